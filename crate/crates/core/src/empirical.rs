//! Empirical statistics of μ and λ: Cesàro and logarithmic correlation sums,
//! logarithmic densities, window frequencies, and coverage of admissible
//! blocks by the orbit of μ.
//!
//! Windows and sums start at position 1.

use std::collections::HashSet;

use serde::Serialize;

use crate::admissible::{Alphabet, Block3, Enumerator};
use crate::chowla::{ChowlaMeasure, SignedCylinder};
use crate::mirsky::TruncatedDensity;
use crate::par::{self, Parallelism};
use crate::sieve::{ArithFunction, ArithTable};
use crate::{Error, Result};

/// Most missing blocks listed by [`orbit_block_coverage`].
pub const MISSING_SAMPLE_LIMIT: usize = 20;

/// Shifts `0 = a₀ < a₁ < … < a_r` with exponents `i_s ∈ {1, 2}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorrelationSpec {
    shifts: Vec<u64>,
    exponents: Vec<u8>,
}

impl CorrelationSpec {
    pub fn new(shifts: Vec<u64>, exponents: Vec<u8>) -> Result<Self> {
        if shifts.is_empty() {
            return Err(Error::InvalidCorrelation("no shifts".into()));
        }
        if shifts.len() != exponents.len() {
            return Err(Error::InvalidCorrelation(format!(
                "{} shifts but {} exponents",
                shifts.len(),
                exponents.len()
            )));
        }
        if shifts[0] != 0 {
            return Err(Error::InvalidCorrelation("first shift must be 0".into()));
        }
        if shifts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCorrelation(
                "shifts must be strictly ascending".into(),
            ));
        }
        if exponents.iter().any(|&e| e != 1 && e != 2) {
            return Err(Error::InvalidCorrelation("exponents must be 1 or 2".into()));
        }
        Ok(CorrelationSpec { shifts, exponents })
    }

    pub fn shifts(&self) -> &[u64] {
        &self.shifts
    }

    pub fn exponents(&self) -> &[u8] {
        &self.exponents
    }

    pub fn max_shift(&self) -> u64 {
        *self.shifts.last().unwrap()
    }

    /// All exponents equal to 2: the sum measures a density rather than a
    /// Chowla correlation.
    pub fn is_density_mode(&self) -> bool {
        self.exponents.iter().all(|&e| e == 2)
    }

    #[inline]
    fn term(&self, values: &[i8], n: u64) -> i64 {
        self.shifts
            .iter()
            .zip(&self.exponents)
            .map(|(&a, &e)| {
                let v = values[(n + a - 1) as usize] as i64;
                if e == 1 {
                    v
                } else {
                    v * v
                }
            })
            .product()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LogNormalizer {
    /// `log N`
    LogN,
    /// `ℓ_N = Σ_{n≤N} 1/n`
    EllN,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "normalizer")]
pub enum AveragingMode {
    Cesaro,
    Logarithmic(LogNormalizer),
}

impl AveragingMode {
    pub fn name(&self) -> &'static str {
        match self {
            AveragingMode::Cesaro => "cesaro",
            AveragingMode::Logarithmic(_) => "log",
        }
    }

    pub fn normalizer_name(&self) -> &'static str {
        match self {
            AveragingMode::Cesaro => "N",
            AveragingMode::Logarithmic(LogNormalizer::LogN) => "logN",
            AveragingMode::Logarithmic(LogNormalizer::EllN) => "ellN",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationValue {
    pub value: f64,
    /// Set when every exponent is 2.
    pub density_mode: bool,
    pub n: u64,
    pub mode: AveragingMode,
}

/// `ℓ_N`, summed the same way as the logarithmic sums.
pub fn harmonic(par: Parallelism, n: u64) -> f64 {
    par::sum_f64(par, 1..n + 1, |k| 1.0 / k as f64)
}

fn normalizer(par: Parallelism, n: u64, which: LogNormalizer) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "logarithmic averages need N ≥ 2, got {n}"
        )));
    }
    Ok(match which {
        LogNormalizer::LogN => (n as f64).ln(),
        LogNormalizer::EllN => harmonic(par, n),
    })
}

pub fn chowla_sum(
    table: &ArithTable,
    spec: &CorrelationSpec,
    n: u64,
    mode: AveragingMode,
) -> Result<CorrelationValue> {
    chowla_sum_with(Parallelism::default(), table, spec, n, mode)
}

/// Cesàro `(1/N) Σ_{n≤N} ∏ f(n + a_s)^{i_s}` or its `1/n`-weighted
/// logarithmic counterpart, for `f = μ` or `f = λ`.
pub fn chowla_sum_with(
    par: Parallelism,
    table: &ArithTable,
    spec: &CorrelationSpec,
    n: u64,
    mode: AveragingMode,
) -> Result<CorrelationValue> {
    if table.function() == ArithFunction::SquareFree {
        return Err(Error::WrongFunction {
            expected: "Möbius or Liouville",
            found: table.function().name(),
        });
    }
    if n == 0 {
        return Err(Error::EmptyRange);
    }
    let needed = n + spec.max_shift();
    if needed > table.max_n() {
        return Err(Error::RangeOverflow {
            needed,
            available: table.max_n(),
        });
    }
    let values = table.values();
    let value = match mode {
        AveragingMode::Cesaro => {
            par::sum_i64(par, 1..n + 1, |k| spec.term(values, k)) as f64 / n as f64
        }
        AveragingMode::Logarithmic(which) => {
            let norm = normalizer(par, n, which)?;
            par::sum_f64(par, 1..n + 1, |k| spec.term(values, k) as f64 / k as f64) / norm
        }
    };
    Ok(CorrelationValue {
        value,
        density_mode: spec.is_density_mode(),
        n,
        mode,
    })
}

/// `(1/norm) Σ_{n≤N} 1_E(n)/n`.
pub fn log_density<F>(indicator: F, n: u64, which: LogNormalizer) -> Result<f64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    let par = Parallelism::default();
    let norm = normalizer(par, n, which)?;
    let num = par::sum_f64(par, 1..n + 1, |k| {
        if indicator(k) {
            1.0 / k as f64
        } else {
            0.0
        }
    });
    Ok(num / norm)
}

/// Number of starts `s ∈ 1..=n_windows` with `values[s..s+len]` equal to
/// `pattern` (1-based positions; slot 0 of `values` is position 1).
pub fn count_windows(par: Parallelism, values: &[i8], pattern: &[i8], n_windows: u64) -> Result<u64> {
    if n_windows == 0 {
        return Err(Error::EmptyRange);
    }
    let needed = n_windows + pattern.len() as u64 - pattern.len().min(1) as u64;
    if needed > values.len() as u64 {
        return Err(Error::RangeOverflow {
            needed,
            available: values.len() as u64,
        });
    }
    let hits = par::sum_i64(par, 0..n_windows, |s| {
        let s = s as usize;
        (values[s..s + pattern.len()] == *pattern) as i64
    });
    Ok(hits as u64)
}

/// Frequency of `pattern` under the empirical measure `m_N(x)`.
pub fn empirical_measure_cylinder(source: &[i8], pattern: &[i8], n_windows: u64) -> Result<f64> {
    Ok(count_windows(Parallelism::default(), source, pattern, n_windows)? as f64 / n_windows as f64)
}

/// Empirical frequency of a signed cylinder in μ next to the Chowla-measure
/// value. Nothing is asserted about their agreement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CylinderComparison {
    pub empirical: f64,
    pub predicted: TruncatedDensity,
    pub deviation: f64,
}

pub fn compare_with_chowla(
    mobius: &ArithTable,
    cylinder: &SignedCylinder,
    n_windows: u64,
    measure: &ChowlaMeasure,
) -> Result<CylinderComparison> {
    if mobius.function() != ArithFunction::Mobius {
        return Err(Error::WrongFunction {
            expected: "Möbius",
            found: mobius.function().name(),
        });
    }
    let block = cylinder.to_block3();
    let empirical = empirical_measure_cylinder(mobius.values(), block.as_slice(), n_windows)?;
    let predicted = measure.cylinder(cylinder)?;
    Ok(CylinderComparison {
        empirical,
        predicted,
        deviation: empirical - predicted.value,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockCoverage {
    pub len: usize,
    pub n_windows: u64,
    pub seen: u64,
    pub admissible_total: u64,
    pub ratio: f64,
    /// Up to [`MISSING_SAMPLE_LIMIT`] admissible blocks never seen, in lexicographic order.
    pub missing: Vec<String>,
}

fn digit(v: i8) -> u64 {
    (v + 1) as u64
}

/// How many admissible `{−1,0,+1}` blocks of length `len` occur as windows of
/// μ starting at `1..=n_windows`.
pub fn orbit_block_coverage(
    mobius: &ArithTable,
    len: usize,
    n_windows: u64,
    enumerator: &Enumerator,
) -> Result<BlockCoverage> {
    if mobius.function() != ArithFunction::Mobius {
        return Err(Error::WrongFunction {
            expected: "Möbius",
            found: mobius.function().name(),
        });
    }
    if len == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    let admissible_total = enumerator.count(len, Alphabet::Ternary)?;
    if n_windows == 0 {
        return Err(Error::EmptyRange);
    }
    let needed = n_windows + len as u64 - 1;
    if needed > mobius.max_n() {
        return Err(Error::RangeOverflow {
            needed,
            available: mobius.max_n(),
        });
    }
    // base-3 codes with digit v + 1 sort like the blocks (− < 0 < +)
    let modulus = 3u64.pow(len as u32);
    let values = mobius.values();
    let mut code = values[..len - 1].iter().fold(0u64, |c, &v| c * 3 + digit(v));
    let mut seen = HashSet::new();
    for &v in &values[len - 1..len - 1 + n_windows as usize] {
        code = (code * 3 + digit(v)) % modulus;
        seen.insert(code);
    }
    let seen_count = seen.len() as u64;
    let mut missing = Vec::new();
    if seen_count < admissible_total {
        enumerator.visit(len, Alphabet::Ternary, &mut |w| {
            let c = w.iter().fold(0u64, |c, &v| c * 3 + digit(v));
            if !seen.contains(&c) {
                missing.push(Block3::new(w.to_vec()).expect("ternary word").to_string());
            }
            missing.len() < MISSING_SAMPLE_LIMIT
        })?;
    }
    Ok(BlockCoverage {
        len,
        n_windows,
        seen: seen_count,
        admissible_total,
        ratio: seen_count as f64 / admissible_total as f64,
        missing,
    })
}
