//! Mirsky measure ν_M of binary cylinders.
//!
//! The density of integers `m` with `m + a` square-free for every `a ∈ A` is
//! `d(A) = ∏_p (1 − t(p, A)/p²)`. Truncating at primes `p ≤ P` costs at most
//! `|A|·Σ_{p>P} p⁻² < |A|/P`. Cylinder values follow by inclusion–exclusion
//! over the zero positions of the block:
//! `ν_M(C(x)) = Σ_{Z' ⊆ Z} (−1)^{|Z'|} d(supp(x) ∪ Z')`.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::Serialize;

use crate::admissible::{residue_count_mod, Block, Block2, SupportSet};
use crate::empirical::count_windows;
use crate::par::{self, Parallelism};
use crate::sieve::{primes_up_to, ArithFunction, ArithTable};
use crate::{Error, Result};

/// Largest number of zero positions expanded by inclusion–exclusion.
pub const IE_ZERO_CAP: usize = 20;

/// Longest block length for [`MirskyMeasure::level_table`].
pub const LEVEL_TABLE_CAP: usize = 20;

/// Below this the running product moves into log space.
const LOG_SPACE_THRESHOLD: f64 = 1e-300;

/// A density truncated at a prime cutoff, with a certified error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncatedDensity {
    pub value: f64,
    /// `ln(value)`, kept finite where `value` itself underflows.
    pub ln_value: f64,
    pub prime_cutoff: u64,
    pub error_bound: f64,
}

impl TruncatedDensity {
    fn exact(value: f64, prime_cutoff: u64) -> Self {
        TruncatedDensity {
            value,
            ln_value: value.ln(),
            prime_cutoff,
            error_bound: 0.0,
        }
    }

    /// Scales value and bound by a nonnegative constant.
    pub fn scaled(&self, factor: f64) -> Self {
        TruncatedDensity {
            value: self.value * factor,
            ln_value: self.ln_value + factor.ln(),
            prime_cutoff: self.prime_cutoff,
            error_bound: self.error_bound * factor,
        }
    }
}

/// Product of factors in `[0, 1]`, spilling into log space on underflow.
#[derive(Clone, Copy, Debug)]
struct Product {
    mantissa: f64,
    ln_scale: f64,
    zero: bool,
}

impl Product {
    fn one() -> Self {
        Product {
            mantissa: 1.0,
            ln_scale: 0.0,
            zero: false,
        }
    }

    fn mul(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.zero = true;
            return;
        }
        self.mantissa *= factor;
        self.renormalize();
    }

    fn combine(mut self, other: Product) -> Product {
        self.zero |= other.zero;
        self.mantissa *= other.mantissa;
        self.ln_scale += other.ln_scale;
        self.renormalize();
        self
    }

    fn renormalize(&mut self) {
        if self.mantissa < LOG_SPACE_THRESHOLD {
            self.ln_scale += self.mantissa.ln();
            self.mantissa = 1.0;
        }
    }

    fn value(&self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.mantissa * self.ln_scale.exp()
        }
    }

    fn ln(&self) -> f64 {
        if self.zero {
            f64::NEG_INFINITY
        } else {
            self.mantissa.ln() + self.ln_scale
        }
    }
}

/// Mirsky measure truncated at a fixed prime cutoff.
///
/// Tail products `∏ (1 − k/p²)` over the primes that cannot collide inside a
/// pattern are shared between queries.
pub struct MirskyMeasure {
    cutoff: u64,
    primes: Vec<u64>,
    parallelism: Parallelism,
    tails: Mutex<HashMap<(usize, usize), Product>>,
}

impl std::fmt::Debug for MirskyMeasure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MirskyMeasure")
            .field("cutoff", &self.cutoff)
            .field("primes", &self.primes.len())
            .finish()
    }
}

impl MirskyMeasure {
    pub fn new(cutoff: u64) -> Result<Self> {
        Self::with_parallelism(cutoff, Parallelism::default())
    }

    pub fn with_parallelism(cutoff: u64, parallelism: Parallelism) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidParameter(format!(
                "prime cutoff must be at least 2, got {cutoff}"
            )));
        }
        Ok(MirskyMeasure {
            cutoff,
            primes: primes_up_to(cutoff).into_vec(),
            parallelism,
            tails: Mutex::new(HashMap::new()),
        })
    }

    pub fn cutoff(&self) -> u64 {
        self.cutoff
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn tail(&self, k: usize, from: usize) -> Product {
        if let Some(p) = self.tails.lock().unwrap().get(&(k, from)) {
            return *p;
        }
        let mut prod = Product::one();
        for &p in &self.primes[from..] {
            let sq = (p * p) as f64;
            prod.mul(1.0 - k as f64 / sq);
        }
        self.tails.lock().unwrap().insert((k, from), prod);
        prod
    }

    /// `d(A)` truncated at the cutoff.
    pub fn pattern_density(&self, support: &SupportSet) -> TruncatedDensity {
        let pos = support.positions();
        let k = pos.len();
        if k == 0 {
            return TruncatedDensity::exact(1.0, self.cutoff);
        }
        // For p² > max − min all positions fall in distinct classes, t(p, A) = |A|.
        let span = pos[k - 1] - pos[0];
        let split = self.primes.partition_point(|&p| p * p <= span);
        let mut prod = Product::one();
        for &p in &self.primes[..split] {
            let m = p * p;
            let t = residue_count_mod(m, pos);
            prod.mul(1.0 - t as f64 / m as f64);
        }
        let prod = prod.combine(self.tail(k, split));
        TruncatedDensity {
            value: prod.value(),
            ln_value: prod.ln(),
            prime_cutoff: self.cutoff,
            // a vanishing factor at p ≤ P makes the untruncated density vanish too
            error_bound: if prod.zero {
                0.0
            } else {
                k as f64 / self.cutoff as f64
            },
        }
    }

    /// `ν_M(C(x))` by inclusion–exclusion over the zeros of `block`.
    pub fn cylinder(&self, block: &Block2) -> Result<TruncatedDensity> {
        let zeros = block.zeros();
        if zeros.len() > IE_ZERO_CAP {
            return Err(Error::InclusionExclusionCap {
                zeros: zeros.len(),
                cap: IE_ZERO_CAP,
            });
        }
        let ones = block.support();
        let term = |mask: usize| {
            let extra: Vec<u64> = zeros
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &z)| z)
                .collect();
            let set = ones.union(&SupportSet::new(extra).expect("zeros are ascending"));
            let d = self.pattern_density(&set);
            let sign = if mask.count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
            (sign * d.value, d.error_bound)
        };
        let n_terms = 1usize << zeros.len();
        let terms = if n_terms >= 256 {
            par::map_indices(self.parallelism, n_terms, term)
        } else {
            (0..n_terms).map(term).collect()
        };
        let value: f64 = terms.iter().map(|t| t.0).sum();
        let error_bound: f64 = terms.iter().map(|t| t.1).sum();
        let value = value.clamp(0.0, 1.0);
        Ok(TruncatedDensity {
            value,
            ln_value: value.ln(),
            prime_cutoff: self.cutoff,
            error_bound,
        })
    }

    /// Every level-`n` cylinder at once, indexed by the mask of ones
    /// (bit `i` ↔ position `i + 1`).
    ///
    /// Computes `d` on all `2ⁿ` supports and applies the alternating
    /// superset transform, `n·2ⁿ` additions instead of `3ⁿ`.
    pub fn level_table(&self, n: usize) -> Result<Vec<TruncatedDensity>> {
        if n > LEVEL_TABLE_CAP {
            return Err(Error::EnumerationCap {
                len: n,
                cap: LEVEL_TABLE_CAP,
            });
        }
        let size = 1usize << n;
        let densities = par::map_indices(self.parallelism, size, |mask| {
            self.pattern_density(&SupportSet::from_mask(mask as u64))
        });
        let mut values: Vec<f64> = densities.iter().map(|d| d.value).collect();
        let mut bounds: Vec<f64> = densities.iter().map(|d| d.error_bound).collect();
        for bit in 0..n {
            let b = 1usize << bit;
            for mask in 0..size {
                if mask & b == 0 {
                    values[mask] -= values[mask | b];
                    bounds[mask] += bounds[mask | b];
                }
            }
        }
        Ok(values
            .into_iter()
            .zip(bounds)
            .map(|(v, e)| {
                let v = v.clamp(0.0, 1.0);
                TruncatedDensity {
                    value: v,
                    ln_value: v.ln(),
                    prime_cutoff: self.cutoff,
                    error_bound: e,
                }
            })
            .collect())
    }
}

pub fn squarefree_pattern_density(support: &SupportSet, cutoff: u64) -> Result<TruncatedDensity> {
    Ok(MirskyMeasure::new(cutoff)?.pattern_density(support))
}

pub fn mirsky_cylinder(block: &Block2, cutoff: u64) -> Result<TruncatedDensity> {
    MirskyMeasure::new(cutoff)?.cylinder(block)
}

/// Frequency of `block` among the windows of μ² starting at `1..=n_windows`.
///
/// Accepts a square-free table or a Möbius table (squared on the fly).
pub fn mirsky_empirical(block: &Block2, table: &ArithTable, n_windows: u64) -> Result<f64> {
    let squares: std::borrow::Cow<'_, [i8]> = match table.function() {
        ArithFunction::SquareFree => table.values().into(),
        ArithFunction::Mobius => table.squared().values().to_vec().into(),
        other => {
            return Err(Error::WrongFunction {
                expected: "square-free or Möbius",
                found: other.name(),
            })
        }
    };
    let pattern: Vec<i8> = block.as_slice().iter().map(|&b| b as i8).collect();
    let hits = count_windows(Parallelism::default(), &squares, &pattern, n_windows)?;
    Ok(hits as f64 / n_windows as f64)
}
