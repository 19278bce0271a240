use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::par::{map_indices, Parallelism};
use crate::{Error, Result};

/// Longest sequence length `barker_search` accepts.
pub const BARKER_SEARCH_CAP: usize = 32;

/// Assignment steps expanded up front to split the search into parallel tasks.
const SPLIT_DEPTH: usize = 10;

/// A finite `±1` sequence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignSequence(Vec<i8>);

impl SignSequence {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(&v) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::InvalidParameter(format!(
                "sign sequences take ±1 entries, got {v}"
            )));
        }
        Ok(SignSequence(values))
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Accepts `"++-+"` or comma-separated integers such as `"1,1,-1"`.
impl FromStr for SignSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |c: char| Error::InvalidSymbol {
            symbol: c,
            block: s.to_string(),
        };
        if s.contains(',') {
            let values = s
                .split(',')
                .map(|t| match t.trim() {
                    "1" | "+1" | "+" => Ok(1),
                    "-1" | "-" | "−1" | "−" => Ok(-1),
                    t => Err(bad(t.chars().next().unwrap_or(','))),
                })
                .collect::<Result<Vec<i8>>>()?;
            return SignSequence::new(values);
        }
        let values = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '+' => Ok(1),
                '-' | '−' => Ok(-1),
                c => Err(bad(c)),
            })
            .collect::<Result<Vec<i8>>>()?;
        SignSequence::new(values)
    }
}

impl fmt::Display for SignSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &v in &self.0 {
            f.write_str(if v > 0 { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl Serialize for SignSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Aperiodic autocorrelations `c_k = Σ_j x_j x_{j+k}` for `k = 1, …, N−1`.
pub fn autocorrelations(x: &SignSequence) -> Vec<i64> {
    let x = x.as_slice();
    (1..x.len())
        .map(|k| {
            x.iter()
                .zip(&x[k..])
                .map(|(&a, &b)| (a * b) as i64)
                .sum()
        })
        .collect()
}

pub fn is_barker(x: &SignSequence) -> bool {
    autocorrelations(x).iter().all(|c| c.abs() <= 1)
}

/// Depth-first state. Positions are filled from both ends inwards, so the
/// long-shift correlations become fully determined first.
struct Search {
    n: usize,
    order: Vec<usize>,
    x: Vec<i8>,
    /// Partial sum of `c_k` over products whose two factors are assigned.
    partial: Vec<i64>,
    /// Number of such products.
    known: Vec<i64>,
}

impl Search {
    fn new(n: usize) -> Self {
        let mut order = Vec::with_capacity(n);
        let (mut lo, mut hi) = (0, n);
        while lo < hi {
            order.push(lo);
            lo += 1;
            if lo < hi {
                hi -= 1;
                order.push(hi);
            }
        }
        Search {
            n,
            order,
            x: vec![0; n],
            partial: vec![0; n],
            known: vec![0; n],
        }
    }

    fn set(&mut self, q: usize, v: i8) {
        self.x[q] = v;
        self.update(q, v as i64, 1);
    }

    fn unset(&mut self, q: usize) {
        let v = self.x[q] as i64;
        self.update(q, -v, -1);
        self.x[q] = 0;
    }

    fn update(&mut self, q: usize, v: i64, dk: i64) {
        for k in 1..self.n {
            if q >= k && self.x[q - k] != 0 {
                self.partial[k] += v * self.x[q - k] as i64;
                self.known[k] += dk;
            }
            if q + k < self.n && self.x[q + k] != 0 {
                self.partial[k] += v * self.x[q + k] as i64;
                self.known[k] += dk;
            }
        }
    }

    /// Some completion can still keep every `|c_k| ≤ 1`.
    fn feasible(&self) -> bool {
        (1..self.n).all(|k| {
            let unknown = (self.n - k) as i64 - self.known[k];
            self.partial[k].abs() - unknown <= 1
        })
    }

    fn dfs(&mut self, step: usize, out: &mut Vec<SignSequence>) {
        if step == self.n {
            out.push(SignSequence(self.x.clone()));
            return;
        }
        let q = self.order[step];
        for v in [1, -1] {
            self.set(q, v);
            if self.feasible() {
                self.dfs(step + 1, out);
            }
            self.unset(q);
        }
    }

    /// Feasible assignments of the first `depth` steps (after `x₀ = +1`).
    fn prefixes(&mut self, step: usize, depth: usize, cur: &mut Vec<i8>, out: &mut Vec<Vec<i8>>) {
        if step == depth {
            out.push(cur.clone());
            return;
        }
        let q = self.order[step];
        for v in [1, -1] {
            self.set(q, v);
            if self.feasible() {
                cur.push(v);
                self.prefixes(step + 1, depth, cur, out);
                cur.pop();
            }
            self.unset(q);
        }
    }
}

/// All Barker sequences of length `len` with first entry `+1`, sorted by
/// their `+`/`-` spelling.
pub fn barker_sequences_of_length(par: Parallelism, len: usize) -> Result<Vec<SignSequence>> {
    if len > BARKER_SEARCH_CAP {
        return Err(Error::EnumerationCap {
            len,
            cap: BARKER_SEARCH_CAP,
        });
    }
    if len == 0 {
        return Ok(Vec::new());
    }
    let mut root = Search::new(len);
    root.set(0, 1);
    let depth = len.min(1 + SPLIT_DEPTH);
    let mut prefixes = Vec::new();
    root.prefixes(1, depth, &mut Vec::new(), &mut prefixes);

    let order = root.order.clone();
    let found = map_indices(par, prefixes.len(), |i| {
        let mut s = Search::new(len);
        s.set(0, 1);
        for (step, &v) in prefixes[i].iter().enumerate() {
            s.set(order[step + 1], v);
        }
        let mut out = Vec::new();
        s.dfs(depth, &mut out);
        out
    });
    let mut all: Vec<SignSequence> = found.into_iter().flatten().collect();
    all.sort_by_cached_key(|s| s.to_string());
    Ok(all)
}

pub fn barker_search(max_len: usize) -> Result<BTreeMap<usize, Vec<SignSequence>>> {
    barker_search_with(Parallelism::default(), max_len)
}

/// Exhaustive search for every length `1..=max_len`; lengths with no Barker
/// sequence map to an empty list.
pub fn barker_search_with(
    par: Parallelism,
    max_len: usize,
) -> Result<BTreeMap<usize, Vec<SignSequence>>> {
    if max_len > BARKER_SEARCH_CAP {
        return Err(Error::EnumerationCap {
            len: max_len,
            cap: BARKER_SEARCH_CAP,
        });
    }
    (1..=max_len)
        .map(|n| Ok((n, barker_sequences_of_length(par, n)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> SignSequence {
        s.parse().unwrap()
    }

    #[test]
    fn autocorrelation_examples() {
        assert_eq!(autocorrelations(&seq("++")), vec![1]);
        assert_eq!(autocorrelations(&seq("+-+")), vec![-2, 1]);
        assert!(autocorrelations(&seq("+++++--++-+-+")).iter().all(|c| c.abs() <= 1));
        assert!(autocorrelations(&seq("+")).is_empty());
    }

    #[test]
    fn barker_examples() {
        assert!(is_barker(&seq("+")));
        assert!(is_barker(&seq("++-")));
        assert!(!is_barker(&seq("++++")));
        assert!(!is_barker(&seq("+-+")));
    }

    #[test]
    fn parsing() {
        assert_eq!(seq("1,-1, 1"), seq("+-+"));
        assert_eq!(seq("+ − +").to_string(), "+-+");
        assert!("+0+".parse::<SignSequence>().is_err());
        assert!(SignSequence::new(vec![1, 2]).is_err());
    }

    #[test]
    fn search_matches_brute_force() {
        for n in 1..=16usize {
            let brute: Vec<String> = (0..1u32 << (n - 1))
                .map(|m| {
                    let v = std::iter::once(1)
                        .chain((0..n - 1).map(|i| if m >> i & 1 == 0 { 1 } else { -1 }))
                        .collect();
                    SignSequence(v)
                })
                .filter(is_barker)
                .map(|s| s.to_string())
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let found: Vec<String> = barker_sequences_of_length(Parallelism::Sequential, n)
                .unwrap()
                .iter()
                .map(|s| s.to_string())
                .collect();
            assert_eq!(found, brute, "length {n}");
        }
    }

    #[test]
    fn known_lengths() {
        let map = barker_search(16).unwrap();
        let lengths: Vec<usize> = map
            .iter()
            .filter(|(_, v)| !v.is_empty())
            .map(|(&n, _)| n)
            .collect();
        assert_eq!(lengths, vec![1, 2, 3, 4, 5, 7, 11, 13]);
        assert!(map[&13].contains(&seq("+++++--++-+-+")));
        assert!(map[&6].is_empty());
        assert!(map.values().flatten().all(is_barker));
    }

    #[test]
    fn parallel_matches_sequential() {
        for n in [7, 11, 13, 14] {
            assert_eq!(
                barker_sequences_of_length(Parallelism::Sequential, n).unwrap(),
                barker_sequences_of_length(Parallelism::Parallel, n).unwrap()
            );
        }
    }

    #[test]
    fn cap() {
        assert!(matches!(
            barker_search(BARKER_SEARCH_CAP + 1),
            Err(Error::EnumerationCap { .. })
        ));
    }
}
