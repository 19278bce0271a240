//! Segmented sieves for the Möbius function μ, the Liouville function λ and
//! the square-free indicator μ², plus trial-division oracles.
//!
//! Tables are 1-based: `table.get(n)` is the value at `n` for `1 ≤ n ≤ max_n`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::par::{self, Parallelism};
use crate::{Error, Result};

/// Magic bytes opening a serialized [`ArithTable`].
pub const TABLE_MAGIC: &[u8; 4] = b"MFL1";

/// Default number of entries per sieve segment.
pub const DEFAULT_SEGMENT_LEN: usize = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithFunction {
    Mobius,
    Liouville,
    SquareFree,
}

impl ArithFunction {
    /// Function id used by the binary table format.
    pub fn id(self) -> u8 {
        match self {
            ArithFunction::Mobius => 0,
            ArithFunction::Liouville => 1,
            ArithFunction::SquareFree => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(ArithFunction::Mobius),
            1 => Some(ArithFunction::Liouville),
            2 => Some(ArithFunction::SquareFree),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ArithFunction::Mobius => "mobius",
            ArithFunction::Liouville => "liouville",
            ArithFunction::SquareFree => "squarefree",
        }
    }

    /// Value at `n` by trial division.
    pub fn direct(self, n: u64) -> i8 {
        match self {
            ArithFunction::Mobius => mobius_direct(n),
            ArithFunction::Liouville => liouville_direct(n),
            ArithFunction::SquareFree => squarefree_direct(n),
        }
    }
}

/// All primes up to a bound, ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimeList {
    bound: u64,
    primes: Vec<u64>,
}

impl PrimeList {
    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.primes
    }
}

/// Sieve of Eratosthenes. Bounds below 2 give an empty list.
pub fn primes_up_to(bound: u64) -> PrimeList {
    if bound < 2 {
        return PrimeList {
            bound,
            primes: Vec::new(),
        };
    }
    let n = bound as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i.saturating_mul(i);
        while j <= n {
            composite[j] = true;
            j += i;
        }
    }
    PrimeList { bound, primes }
}

/// Deterministic primality test by trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n.is_multiple_of(2) {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// Returns `(Ω(n), square-free?)` by trial division.
fn factor_shape(mut n: u64) -> (u32, bool) {
    let mut big_omega = 0;
    let mut squarefree = true;
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        let mut e = 0;
        while n.is_multiple_of(d) {
            n /= d;
            e += 1;
        }
        big_omega += e;
        if e >= 2 {
            squarefree = false;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        big_omega += 1;
    }
    (big_omega, squarefree)
}

/// μ(n) straight from the case definition. `n = 0` is mapped to 0.
pub fn mobius_direct(n: u64) -> i8 {
    if n == 0 {
        return 0;
    }
    match factor_shape(n) {
        (_, false) => 0,
        (k, true) if k % 2 == 0 => 1,
        _ => -1,
    }
}

/// λ(n) = (−1)^Ω(n). `n = 0` is mapped to 0.
pub fn liouville_direct(n: u64) -> i8 {
    if n == 0 {
        return 0;
    }
    if factor_shape(n).0.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// 1 if `n` is square-free, else 0.
pub fn squarefree_direct(n: u64) -> i8 {
    (n != 0 && factor_shape(n).1) as i8
}

/// Immutable table of one arithmetic function on `1..=max_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArithTable {
    function: ArithFunction,
    values: Vec<i8>,
}

impl ArithTable {
    pub fn function(&self) -> ArithFunction {
        self.function
    }

    pub fn max_n(&self) -> u64 {
        self.values.len() as u64
    }

    /// Value at `n` (1-based).
    ///
    /// # Panics
    /// If `n` is 0 or beyond `max_n`.
    #[inline]
    pub fn get(&self, n: u64) -> i8 {
        self.values[(n - 1) as usize]
    }

    /// Values for `n = 1..=max_n`; slot `i` holds the value at `i + 1`.
    pub fn values(&self) -> &[i8] {
        &self.values
    }

    /// Pointwise square, i.e. the square-free indicator for a Möbius table.
    pub fn squared(&self) -> ArithTable {
        ArithTable {
            function: ArithFunction::SquareFree,
            values: self.values.iter().map(|v| v * v).collect(),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(TABLE_MAGIC)?;
        w.write_all(&[self.function.id()])?;
        w.write_all(&self.max_n().to_le_bytes())?;
        let bytes: Vec<u8> = self.values.iter().map(|&v| v as u8).collect();
        w.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != TABLE_MAGIC {
            return Err(Error::Format(format!("bad magic {magic:?}")));
        }
        let mut id = [0u8; 1];
        r.read_exact(&mut id)?;
        let function = ArithFunction::from_id(id[0])
            .ok_or_else(|| Error::Format(format!("unknown function id {}", id[0])))?;
        let mut len = [0u8; 8];
        r.read_exact(&mut len)?;
        let max_n = u64::from_le_bytes(len);
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() as u64 != max_n {
            return Err(Error::Format(format!(
                "header says {max_n} entries, body has {}",
                bytes.len()
            )));
        }
        let values: Vec<i8> = bytes.into_iter().map(|b| b as i8).collect();
        let allowed: &[i8] = match function {
            ArithFunction::SquareFree => &[0, 1],
            _ => &[-1, 0, 1],
        };
        if let Some(pos) = values.iter().position(|v| !allowed.contains(v)) {
            return Err(Error::Format(format!(
                "value {} at n = {} outside the alphabet",
                values[pos],
                pos + 1
            )));
        }
        Ok(ArithTable { function, values })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SieveOptions {
    pub segment_len: usize,
    pub parallelism: Parallelism,
}

impl Default for SieveOptions {
    fn default() -> Self {
        Self {
            segment_len: DEFAULT_SEGMENT_LEN,
            parallelism: Parallelism::default(),
        }
    }
}

pub fn sieve(function: ArithFunction, max_n: u64) -> Result<ArithTable> {
    sieve_with(function, max_n, SieveOptions::default())
}

pub fn sieve_with(function: ArithFunction, max_n: u64, opts: SieveOptions) -> Result<ArithTable> {
    if max_n == 0 {
        return Err(Error::EmptyRange);
    }
    if opts.segment_len == 0 {
        return Err(Error::InvalidParameter("segment length must be positive".into()));
    }
    let primes = primes_up_to(isqrt(max_n));
    let primes = primes.as_slice();
    let mut values = vec![0i8; max_n as usize];
    let seg = opts.segment_len;
    par::for_each_chunk_mut(opts.parallelism, &mut values, seg, |i, out| {
        fill_segment(function, primes, 1 + (i * seg) as u64, out);
    });
    Ok(ArithTable { function, values })
}

/// Fills `out` with the values at `lo, lo + 1, …`.
///
/// Every prime with `p² ≤ hi` is sieved out and its contribution multiplied
/// into `prod`; whatever is left of `n` after that is 1 or a single prime.
fn fill_segment(function: ArithFunction, primes: &[u64], lo: u64, out: &mut [i8]) {
    let hi = lo + out.len() as u64 - 1;
    let mut prod = vec![1u64; out.len()];
    out.fill(1);
    let first_multiple = |q: u64| lo.div_ceil(q) * q;
    for &p in primes {
        if p * p > hi {
            break;
        }
        match function {
            ArithFunction::Liouville => {
                let mut q = p;
                loop {
                    let mut m = first_multiple(q);
                    while m <= hi {
                        let i = (m - lo) as usize;
                        out[i] = -out[i];
                        prod[i] *= p;
                        m += q;
                    }
                    if q > hi / p {
                        break;
                    }
                    q *= p;
                }
            }
            ArithFunction::Mobius | ArithFunction::SquareFree => {
                let mut m = first_multiple(p);
                while m <= hi {
                    let i = (m - lo) as usize;
                    out[i] = -out[i];
                    prod[i] *= p;
                    m += p;
                }
                let q = p * p;
                let mut m = first_multiple(q);
                while m <= hi {
                    out[(m - lo) as usize] = 0;
                    m += q;
                }
            }
        }
    }
    for (i, v) in out.iter_mut().enumerate() {
        if prod[i] != lo + i as u64 {
            *v = -*v;
        }
        if function == ArithFunction::SquareFree {
            *v = v.abs();
        }
    }
}

/// ⌊√n⌋.
pub fn isqrt(n: u64) -> u64 {
    let mut r = ((n as f64).sqrt() as u64).min(u32::MAX as u64);
    while r * r > n {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_division_primes(bound: u64) -> Vec<u64> {
        (2..=bound)
            .filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0))
            .collect()
    }

    #[test]
    fn small_prime_lists() {
        assert_eq!(primes_up_to(10).as_slice(), &[2, 3, 5, 7]);
        assert_eq!(primes_up_to(2).as_slice(), &[2]);
        assert!(primes_up_to(1).is_empty());
        assert!(primes_up_to(0).is_empty());
        assert_eq!(primes_up_to(100).len(), trial_division_primes(100).len());
        assert_eq!(primes_up_to(100).len(), 25);
        assert_eq!(primes_up_to(5000).into_vec(), trial_division_primes(5000));
    }

    #[test]
    fn mobius_first_twelve() {
        let t = sieve(ArithFunction::Mobius, 12).unwrap();
        assert_eq!(t.values(), &[1, -1, -1, 0, -1, 1, -1, 0, 0, 1, -1, 0]);
        let oracle: Vec<i8> = (1..=12).map(mobius_direct).collect();
        assert_eq!(t.values(), oracle.as_slice());
    }

    #[test]
    fn liouville_and_squarefree_examples() {
        assert_eq!(sieve(ArithFunction::Liouville, 8).unwrap().get(8), -1);
        assert_eq!(sieve(ArithFunction::SquareFree, 4).unwrap().get(4), 0);
        assert_eq!(mobius_direct(1), 1);
        assert_eq!(mobius_direct(6), 1);
        assert_eq!(mobius_direct(12), 0);
    }

    #[test]
    fn empty_range_is_an_error() {
        assert!(matches!(
            sieve(ArithFunction::Mobius, 0),
            Err(Error::EmptyRange)
        ));
    }

    #[test]
    fn value_at_one_is_one() {
        for f in [ArithFunction::Mobius, ArithFunction::Liouville, ArithFunction::SquareFree] {
            assert_eq!(sieve(f, 1).unwrap().get(1), 1);
        }
    }

    #[test]
    fn all_functions_match_trial_division() {
        for f in [ArithFunction::Mobius, ArithFunction::Liouville, ArithFunction::SquareFree] {
            let t = sieve(f, 20_000).unwrap();
            for n in 1..=20_000 {
                assert_eq!(t.get(n), f.direct(n), "{f:?} at {n}");
            }
        }
    }

    #[test]
    fn segment_size_does_not_change_the_table() {
        for f in [ArithFunction::Mobius, ArithFunction::Liouville, ArithFunction::SquareFree] {
            let whole = sieve_with(
                f,
                50_000,
                SieveOptions {
                    segment_len: 50_000,
                    parallelism: Parallelism::Sequential,
                },
            )
            .unwrap();
            for seg in [1, 7, 97, 1024, 4099] {
                for parallelism in [Parallelism::Sequential, Parallelism::Parallel] {
                    let t = sieve_with(f, 50_000, SieveOptions { segment_len: seg, parallelism })
                        .unwrap();
                    assert_eq!(t, whole, "{f:?} seg {seg}");
                }
            }
        }
    }

    #[test]
    fn mobius_is_liouville_times_squarefree() {
        let n = 100_000;
        let mu = sieve(ArithFunction::Mobius, n).unwrap();
        let lambda = sieve(ArithFunction::Liouville, n).unwrap();
        let sf = sieve(ArithFunction::SquareFree, n).unwrap();
        for k in 1..=n {
            assert_eq!(mu.get(k), lambda.get(k) * sf.get(k));
            assert_eq!(sf.get(k), mu.get(k) * mu.get(k));
        }
        assert_eq!(mu.squared(), sf);
    }

    #[test]
    fn divisor_sum_of_mobius_vanishes() {
        let n = 10_000u64;
        let mu = sieve(ArithFunction::Mobius, n).unwrap();
        let mut acc = vec![0i64; n as usize + 1];
        for d in 1..=n {
            let m = mu.get(d) as i64;
            let mut k = d;
            while k <= n {
                acc[k as usize] += m;
                k += d;
            }
        }
        assert_eq!(acc[1], 1);
        assert!(acc[2..].iter().all(|&s| s == 0));
    }

    #[test]
    fn binary_layout() {
        let t = sieve(ArithFunction::Mobius, 4).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(
            buf,
            [b'M', b'F', b'L', b'1', 0, 4, 0, 0, 0, 0, 0, 0, 0, 1, 0xff, 0xff, 0]
        );
        assert_eq!(ArithTable::read_from(buf.as_slice()).unwrap(), t);
    }

    #[test]
    fn malformed_files_are_rejected() {
        let t = sieve(ArithFunction::SquareFree, 10).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();

        let mut bad_magic = buf.clone();
        bad_magic[0] = b'X';
        assert!(ArithTable::read_from(bad_magic.as_slice()).is_err());

        let mut truncated = buf.clone();
        truncated.pop();
        assert!(ArithTable::read_from(truncated.as_slice()).is_err());

        let mut bad_value = buf.clone();
        *bad_value.last_mut().unwrap() = 0xff;
        assert!(ArithTable::read_from(bad_value.as_slice()).is_err());

        let mut bad_id = buf;
        bad_id[4] = 9;
        assert!(ArithTable::read_from(bad_id.as_slice()).is_err());
    }

    #[test]
    fn isqrt_edges() {
        for n in [0u64, 1, 2, 3, 4, 15, 16, 17, 99, 100, u32::MAX as u64, u64::MAX] {
            let r = isqrt(n);
            assert!(r.checked_mul(r).is_some_and(|sq| sq <= n));
            assert!((r + 1).checked_mul(r + 1).is_none_or(|sq| sq > n));
        }
    }
}
