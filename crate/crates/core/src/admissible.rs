//! Admissible supports and blocks.
//!
//! A finite set `A ⊂ ℕ*` is admissible when, for every prime `p`, its image
//! modulo `p²` misses at least one class: `t(p, A) < p²`. Since
//! `t(p, A) ≤ |A|`, only primes with `p² ≤ |A|` can ever fail.

use std::collections::HashSet;
use std::fmt;

use serde::Serialize;

use crate::par::{self, Parallelism};
use crate::sieve::{is_prime, isqrt, primes_up_to};
use crate::{Error, Result};

/// Default longest block length accepted by the enumerators.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Moduli up to this size use a dense bitset in [`residue_count`].
const BITSET_MODULUS_LIMIT: u64 = 1 << 24;

/// Strictly ascending set of positive positions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SupportSet(Vec<u64>);

impl SupportSet {
    pub fn new(positions: Vec<u64>) -> Result<Self> {
        if positions.first() == Some(&0) {
            return Err(Error::InvalidSupport("positions start at 1".into()));
        }
        if positions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSupport(format!(
                "positions must be strictly ascending: {positions:?}"
            )));
        }
        Ok(SupportSet(positions))
    }

    /// Sorts and deduplicates; still rejects position 0.
    pub fn from_unsorted(mut positions: Vec<u64>) -> Result<Self> {
        positions.sort_unstable();
        positions.dedup();
        Self::new(positions)
    }

    pub fn empty() -> Self {
        SupportSet(Vec::new())
    }

    /// Bit `i` of `mask` stands for position `i + 1`.
    pub fn from_mask(mask: u64) -> Self {
        SupportSet((0..64).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect())
    }

    pub fn positions(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest(&self) -> Option<u64> {
        self.0.last().copied()
    }

    pub fn contains(&self, pos: u64) -> bool {
        self.0.binary_search(&pos).is_ok()
    }

    pub fn translate(&self, k: u64) -> SupportSet {
        SupportSet(self.0.iter().map(|&a| a + k).collect())
    }

    pub fn union(&self, other: &SupportSet) -> SupportSet {
        let mut v: Vec<u64> = self.0.iter().chain(&other.0).copied().collect();
        v.sort_unstable();
        v.dedup();
        SupportSet(v)
    }

    pub fn difference(&self, other: &SupportSet) -> SupportSet {
        SupportSet(self.0.iter().copied().filter(|&a| !other.contains(a)).collect())
    }

    pub fn is_disjoint(&self, other: &SupportSet) -> bool {
        self.0.iter().all(|&a| !other.contains(a))
    }

    pub fn is_subset(&self, other: &SupportSet) -> bool {
        self.0.iter().all(|&a| other.contains(a))
    }
}

/// Something with a length and a set of nonzero positions.
pub trait Block {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn support(&self) -> SupportSet;
}

/// Finite word over `{0, 1}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block2(Vec<u8>);

impl Block2 {
    pub fn new(word: Vec<u8>) -> Result<Self> {
        if let Some(&b) = word.iter().find(|&&b| b > 1) {
            return Err(Error::InvalidSymbol {
                symbol: char::from_digit(b as u32 % 10, 10).unwrap_or('?'),
                block: format!("{word:?}"),
            });
        }
        Ok(Block2(word))
    }

    /// Parses `"0110"`; whitespace is ignored.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::InvalidSymbol {
                    symbol: c,
                    block: s.to_string(),
                }),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Block2)
    }

    /// Block of length `len` whose ones are the bits of `mask` (bit `i` ↔ position `i + 1`).
    pub fn from_mask(mask: u64, len: usize) -> Self {
        Block2((0..len).map(|i| (mask >> i & 1) as u8).collect())
    }

    /// Inverse of [`Block2::from_mask`]; needs `len ≤ 64`.
    pub fn mask(&self) -> u64 {
        debug_assert!(self.0.len() <= 64);
        self.0
            .iter()
            .enumerate()
            .fold(0, |m, (i, &b)| m | (b as u64) << i)
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Positions (1-based) holding a 0.
    pub fn zeros(&self) -> Vec<u64> {
        (1..=self.0.len() as u64)
            .filter(|&i| self.0[(i - 1) as usize] == 0)
            .collect()
    }

    pub fn push(&self, symbol: u8) -> Block2 {
        let mut w = self.0.clone();
        w.push(symbol);
        Block2(w)
    }

    pub fn prepend(&self, symbol: u8) -> Block2 {
        let mut w = Vec::with_capacity(self.0.len() + 1);
        w.push(symbol);
        w.extend_from_slice(&self.0);
        Block2(w)
    }
}

impl Block for Block2 {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn support(&self) -> SupportSet {
        SupportSet(
            (1..=self.0.len() as u64)
                .filter(|&i| self.0[(i - 1) as usize] != 0)
                .collect(),
        )
    }
}

impl fmt::Display for Block2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

/// Finite word over `{−1, 0, +1}`, written with `-`, `0`, `+`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Block3(Vec<i8>);

impl Block3 {
    pub fn new(word: Vec<i8>) -> Result<Self> {
        if let Some(&b) = word.iter().find(|&&b| !(-1..=1).contains(&b)) {
            return Err(Error::InvalidSymbol {
                symbol: char::from_digit(b.unsigned_abs() as u32 % 10, 10).unwrap_or('?'),
                block: format!("{word:?}"),
            });
        }
        Ok(Block3(word))
    }

    /// Parses `"+0-0"`. `1` is read as `+`, the Unicode minus as `-`;
    /// whitespace is ignored.
    pub fn parse(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' | '1' => Ok(1),
                '-' | '\u{2212}' => Ok(-1),
                '0' => Ok(0),
                _ => Err(Error::InvalidSymbol {
                    symbol: c,
                    block: s.to_string(),
                }),
            })
            .collect::<Result<Vec<i8>>>()
            .map(Block3)
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<i8> {
        self.0
    }

    /// Coordinatewise square.
    pub fn squared(&self) -> Block2 {
        Block2(self.0.iter().map(|&v| (v * v) as u8).collect())
    }

    /// Value at 1-based `pos`.
    pub fn at(&self, pos: u64) -> Option<i8> {
        pos.checked_sub(1)
            .and_then(|i| self.0.get(i as usize))
            .copied()
    }
}

impl Block for Block3 {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn support(&self) -> SupportSet {
        SupportSet(
            (1..=self.0.len() as u64)
                .filter(|&i| self.0[(i - 1) as usize] != 0)
                .collect(),
        )
    }
}

impl fmt::Display for Block3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(match b {
                1 => "+",
                -1 => "-",
                _ => "0",
            })?;
        }
        Ok(())
    }
}

/// `t(p, A)`: number of classes mod `p²` hit by `A`.
pub fn residue_count(p: u64, support: &SupportSet) -> Result<usize> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let m = p
        .checked_mul(p)
        .ok_or_else(|| Error::InvalidParameter(format!("p² overflows for p = {p}")))?;
    Ok(residue_count_mod(m, support.positions()))
}

pub(crate) fn residue_count_mod(m: u64, positions: &[u64]) -> usize {
    if m <= BITSET_MODULUS_LIMIT {
        let mut bits = vec![0u64; (m as usize).div_ceil(64)];
        let mut count = 0;
        for &a in positions {
            let r = (a % m) as usize;
            let (w, b) = (r / 64, r % 64);
            if bits[w] >> b & 1 == 0 {
                bits[w] |= 1 << b;
                count += 1;
            }
        }
        count
    } else {
        positions.iter().map(|&a| a % m).collect::<HashSet<_>>().len()
    }
}

/// Outcome of an admissibility test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// Primes with `p² ≤ |A|`, the only ones that can fail.
    pub checked_primes: Vec<u64>,
    /// Smallest prime whose square classes are all covered, if any.
    pub covering_prime: Option<u64>,
}

pub fn admissibility(support: &SupportSet) -> AdmissibilityReport {
    let checked_primes = primes_up_to(isqrt(support.len() as u64)).into_vec();
    let covering_prime = checked_primes
        .iter()
        .copied()
        .find(|&p| residue_count_mod(p * p, support.positions()) as u64 == p * p);
    AdmissibilityReport {
        admissible: covering_prime.is_none(),
        checked_primes,
        covering_prime,
    }
}

pub fn is_admissible_support(support: &SupportSet) -> bool {
    admissibility(support).admissible
}

pub fn is_admissible_block<B: Block + ?Sized>(block: &B) -> bool {
    is_admissible_support(&block.support())
}

/// Admissibility test that checks every prime up to `bound` instead of
/// stopping at `√|A|`.
pub fn is_admissible_support_up_to(support: &SupportSet, bound: u64) -> bool {
    primes_up_to(bound)
        .as_slice()
        .iter()
        .all(|&p| (residue_count_mod(p * p, support.positions()) as u64) < p * p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Alphabet {
    /// `{0, 1}`
    Binary,
    /// `{−1, 0, +1}`
    Ternary,
}

impl Alphabet {
    /// Symbols in lexicographic order.
    fn symbols(self) -> &'static [i8] {
        match self {
            Alphabet::Binary => &[0, 1],
            Alphabet::Ternary => &[-1, 0, 1],
        }
    }
}

/// Incremental `t(p, ·)` bookkeeping for the primes that matter at a given
/// block length.
struct ResidueTracker {
    moduli: Vec<(usize, Vec<u32>, usize)>,
    violations: usize,
}

impl ResidueTracker {
    fn for_length(n: usize) -> Self {
        let moduli = primes_up_to(isqrt(n as u64))
            .into_vec()
            .into_iter()
            .map(|p| {
                let m = (p * p) as usize;
                (m, vec![0u32; m], 0)
            })
            .collect();
        ResidueTracker {
            moduli,
            violations: 0,
        }
    }

    fn push(&mut self, pos: usize) {
        for (m, counts, distinct) in &mut self.moduli {
            let c = &mut counts[pos % *m];
            if *c == 0 {
                *distinct += 1;
                if *distinct == *m {
                    self.violations += 1;
                }
            }
            *c += 1;
        }
    }

    fn pop(&mut self, pos: usize) {
        for (m, counts, distinct) in &mut self.moduli {
            let c = &mut counts[pos % *m];
            *c -= 1;
            if *c == 0 {
                if *distinct == *m {
                    self.violations -= 1;
                }
                *distinct -= 1;
            }
        }
    }

    fn admissible(&self) -> bool {
        self.violations == 0
    }
}

/// Depth-first walk over admissible words of length `n`, in lexicographic
/// order, starting from `prefix`. Stops early once `visit` returns `false`.
fn walk(n: usize, symbols: &[i8], prefix: &[i8], visit: &mut dyn FnMut(&[i8]) -> bool) -> bool {
    let mut tracker = ResidueTracker::for_length(n);
    for (i, &s) in prefix.iter().enumerate() {
        if s != 0 {
            tracker.push(i + 1);
        }
    }
    if !tracker.admissible() {
        return true;
    }
    let mut word = prefix.to_vec();
    extend(n, symbols, &mut tracker, &mut word, visit)
}

fn extend(
    n: usize,
    symbols: &[i8],
    tracker: &mut ResidueTracker,
    word: &mut Vec<i8>,
    visit: &mut dyn FnMut(&[i8]) -> bool,
) -> bool {
    if word.len() == n {
        return visit(word);
    }
    let pos = word.len() + 1;
    for &s in symbols {
        if s != 0 {
            tracker.push(pos);
        }
        let mut go_on = true;
        if tracker.admissible() {
            word.push(s);
            go_on = extend(n, symbols, tracker, word, visit);
            word.pop();
        }
        if s != 0 {
            tracker.pop(pos);
        }
        if !go_on {
            return false;
        }
    }
    true
}

/// Enumerates admissible blocks support-first, splitting the search over
/// short prefixes when running in parallel.
#[derive(Clone, Copy, Debug)]
pub struct Enumerator {
    pub cap: usize,
    pub parallelism: Parallelism,
}

impl Default for Enumerator {
    fn default() -> Self {
        Enumerator {
            cap: DEFAULT_ENUMERATION_CAP,
            parallelism: Parallelism::default(),
        }
    }
}

impl Enumerator {
    fn check_cap(&self, n: usize) -> Result<()> {
        if n > self.cap {
            return Err(Error::EnumerationCap { len: n, cap: self.cap });
        }
        Ok(())
    }

    fn prefixes(n: usize, symbols: &[i8]) -> Vec<Vec<i8>> {
        let depth = n.min(3);
        let mut out = vec![Vec::new()];
        for _ in 0..depth {
            out = out
                .into_iter()
                .flat_map(|p| {
                    symbols.iter().map(move |&s| {
                        let mut q = p.clone();
                        q.push(s);
                        q
                    })
                })
                .collect();
        }
        out
    }

    fn words(&self, n: usize, alphabet: Alphabet) -> Result<Vec<Vec<i8>>> {
        self.check_cap(n)?;
        let symbols = alphabet.symbols();
        let prefixes = Self::prefixes(n, symbols);
        let parts = par::map_indices(self.parallelism, prefixes.len(), |i| {
            let mut found = Vec::new();
            walk(n, symbols, &prefixes[i], &mut |w| {
                found.push(w.to_vec());
                true
            });
            found
        });
        Ok(parts.into_iter().flatten().collect())
    }

    /// Admissible `{0,1}` blocks of length `n`, lexicographic (`0 < 1`).
    pub fn binary(&self, n: usize) -> Result<Vec<Block2>> {
        Ok(self
            .words(n, Alphabet::Binary)?
            .into_iter()
            .map(|w| Block2(w.into_iter().map(|s| s as u8).collect()))
            .collect())
    }

    /// Admissible `{−1,0,+1}` blocks of length `n`, lexicographic (`− < 0 < +`).
    pub fn ternary(&self, n: usize) -> Result<Vec<Block3>> {
        Ok(self
            .words(n, Alphabet::Ternary)?
            .into_iter()
            .map(Block3)
            .collect())
    }

    /// Number of admissible blocks, via `Σ_S 2^{|S|}` over admissible supports
    /// for the ternary alphabet.
    pub fn count(&self, n: usize, alphabet: Alphabet) -> Result<u64> {
        self.check_cap(n)?;
        let symbols = Alphabet::Binary.symbols();
        let prefixes = Self::prefixes(n, symbols);
        let parts = par::map_indices(self.parallelism, prefixes.len(), |i| {
            let mut total = 0u64;
            walk(n, symbols, &prefixes[i], &mut |w| {
                total += match alphabet {
                    Alphabet::Binary => 1,
                    Alphabet::Ternary => 1 << w.iter().filter(|&&s| s != 0).count(),
                };
                true
            });
            total
        });
        Ok(parts.into_iter().sum())
    }

    /// Sequential lexicographic walk over admissible words; `visit` returns
    /// `false` to stop.
    pub fn visit(
        &self,
        n: usize,
        alphabet: Alphabet,
        visit: &mut dyn FnMut(&[i8]) -> bool,
    ) -> Result<()> {
        self.check_cap(n)?;
        walk(n, alphabet.symbols(), &[], visit);
        Ok(())
    }
}

pub fn enumerate_admissible_binary(n: usize) -> Result<Vec<Block2>> {
    Enumerator::default().binary(n)
}

pub fn enumerate_admissible_ternary(n: usize) -> Result<Vec<Block3>> {
    Enumerator::default().ternary(n)
}
