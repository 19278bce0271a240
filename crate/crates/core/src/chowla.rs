//! The Chowla measure μ_M on signed cylinders.
//!
//! A level-`n` signed cylinder `C(x, y(A))` fixes the squared pattern
//! `x ∈ {0,1}ⁿ` and the set `A ⊆ supp(x)` of positions carrying `−1`. Any
//! admissible measure gives every sign pattern over `x` the same mass
//! `ν_M(C(x)) / 2^{|supp(x)|}`: the vanishing integrals of `F_{A,B}` and the
//! pushforward condition form a Walsh–Hadamard system whose only solution is
//! the constant vector.

use serde::Serialize;

use crate::admissible::{is_admissible_block, Block, Block2, Block3, SupportSet};
use crate::mirsky::{MirskyMeasure, TruncatedDensity};
use crate::par::{self, KahanSum, Parallelism};
use crate::walsh;
use crate::{Error, Result};

/// Longest level for exhaustive tables and level integrals.
pub const LEVEL_CAP: usize = 16;

/// Longest level accepted by [`verify_admissible_level`].
pub const VERIFY_LEVEL_CAP: usize = 10;

/// Largest support handled by [`uniqueness_solve`].
pub const UNIQUENESS_SUPPORT_CAP: usize = 24;

/// Default float tolerance for the admissibility checks.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Signed cylinder: squared pattern plus the positions carrying `−1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedCylinder {
    base: Block2,
    /// One flag per support position, ascending: `true` for `−1`.
    negative: Vec<bool>,
}

impl SignedCylinder {
    /// `signs` lists `±1` for each support position of `base`, in order.
    pub fn new(base: Block2, signs: &[i8]) -> Result<Self> {
        let s = base.support().len();
        if signs.len() != s {
            return Err(Error::SignCount {
                expected: s,
                found: signs.len(),
            });
        }
        let negative = signs
            .iter()
            .map(|&v| match v {
                1 => Ok(false),
                -1 => Ok(true),
                other => Err(Error::InvalidParameter(format!("sign {other} is not ±1"))),
            })
            .collect::<Result<_>>()?;
        Ok(SignedCylinder { base, negative })
    }

    /// Bit `j` of `mask` makes the `j`-th support position negative.
    pub fn from_negative_mask(base: Block2, mask: u64) -> Self {
        let s = base.support().len();
        let negative = (0..s).map(|j| mask >> j & 1 == 1).collect();
        SignedCylinder { base, negative }
    }

    pub fn from_block3(block: &Block3) -> Self {
        SignedCylinder {
            base: block.squared(),
            negative: block
                .as_slice()
                .iter()
                .filter(|&&v| v != 0)
                .map(|&v| v < 0)
                .collect(),
        }
    }

    pub fn base(&self) -> &Block2 {
        &self.base
    }

    /// The set `A` of `C(x, y(A))`.
    pub fn negative_positions(&self) -> SupportSet {
        let supp = self.base.support();
        SupportSet::new(
            supp.positions()
                .iter()
                .zip(&self.negative)
                .filter(|(_, &neg)| neg)
                .map(|(&p, _)| p)
                .collect(),
        )
        .expect("subset of an ascending support")
    }

    pub fn to_block3(&self) -> Block3 {
        let mut signs = self.negative.iter();
        Block3::new(
            self.base
                .as_slice()
                .iter()
                .map(|&b| match (b, b == 1 && *signs.next().unwrap()) {
                    (0, _) => 0,
                    (_, true) => -1,
                    _ => 1,
                })
                .collect(),
        )
        .expect("symbols in {-1, 0, 1}")
    }
}

/// `F_{A,B}(x) = ∏_{a∈A} x_a · ∏_{b∈B} x_b²`, stored with `A ∩ B = ∅`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fab {
    odd: SupportSet,
    squared: SupportSet,
}

impl Fab {
    /// Drops `A ∩ B` from `B`; `x_a · x_a²` and `x_a` agree on `{0, ±1}`.
    pub fn new(odd: SupportSet, squared: SupportSet) -> Self {
        let squared = squared.difference(&odd);
        Fab { odd, squared }
    }

    pub fn odd(&self) -> &SupportSet {
        &self.odd
    }

    pub fn squared(&self) -> &SupportSet {
        &self.squared
    }

    pub fn max_position(&self) -> u64 {
        self.odd.largest().unwrap_or(0).max(self.squared.largest().unwrap_or(0))
    }

    fn masks(&self) -> (u64, u64) {
        let m = |s: &SupportSet| s.positions().iter().fold(0u64, |m, &p| m | 1 << (p - 1));
        (m(&self.odd), m(&self.squared))
    }

    pub fn eval(&self, block: &Block3) -> Result<i8> {
        let max = self.max_position();
        if max as usize > block.len() {
            return Err(Error::PositionOutOfRange {
                position: max,
                len: block.len(),
            });
        }
        let at = |p: u64| block.at(p).unwrap();
        let odd: i8 = self.odd.positions().iter().map(|&p| at(p)).product();
        let sq: i8 = self.squared.positions().iter().map(|&p| at(p) * at(p)).product();
        Ok(odd * sq)
    }

    /// Value on the signed cylinder with support mask `supp` and negative
    /// mask `neg` (level ≤ 64).
    fn eval_masks(odd: u64, squared: u64, supp: u64, neg: u64) -> i8 {
        if (odd | squared) & !supp != 0 {
            0
        } else if (odd & neg).count_ones().is_multiple_of(2) {
            1
        } else {
            -1
        }
    }
}

/// Values of a measure on all level-`n` signed cylinders.
///
/// Stored densely: the block `v₁…vₙ` sits at `Σ (vᵢ + 1)·3^{i−1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleMeasureLevel {
    n: usize,
    values: Vec<f64>,
}

fn pow3(n: usize) -> usize {
    3usize.pow(n as u32)
}

impl AdmissibleMeasureLevel {
    pub fn zeros(n: usize) -> Result<Self> {
        if n > LEVEL_CAP {
            return Err(Error::EnumerationCap { len: n, cap: LEVEL_CAP });
        }
        Ok(AdmissibleMeasureLevel {
            n,
            values: vec![0.0; pow3(n)],
        })
    }

    pub fn level(&self) -> usize {
        self.n
    }

    fn index(&self, block: &Block3) -> Result<usize> {
        if block.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "block of length {} in a level-{} table",
                block.len(),
                self.n
            )));
        }
        Ok(block
            .as_slice()
            .iter()
            .rev()
            .fold(0usize, |i, &v| i * 3 + (v + 1) as usize))
    }

    fn decode(n: usize, mut index: usize) -> Vec<i8> {
        (0..n)
            .map(|_| {
                let d = (index % 3) as i8 - 1;
                index /= 3;
                d
            })
            .collect()
    }

    /// `(support mask, negative mask)` of the block at `index`.
    fn masks(n: usize, mut index: usize) -> (u64, u64) {
        let (mut supp, mut neg) = (0u64, 0u64);
        for i in 0..n {
            match index % 3 {
                0 => {
                    supp |= 1 << i;
                    neg |= 1 << i;
                }
                2 => supp |= 1 << i,
                _ => {}
            }
            index /= 3;
        }
        (supp, neg)
    }

    pub fn get(&self, block: &Block3) -> Result<f64> {
        Ok(self.values[self.index(block)?])
    }

    pub fn set(&mut self, block: &Block3, value: f64) -> Result<()> {
        let i = self.index(block)?;
        self.values[i] = value;
        Ok(())
    }

    /// Nonzero entries in index order.
    pub fn iter(&self) -> impl Iterator<Item = (Block3, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| (Block3::new(Self::decode(self.n, i)).unwrap(), v))
    }

    pub fn total(&self) -> f64 {
        self.values.iter().copied().collect::<KahanSum>().total()
    }

    /// `∫ F_{A,B} dm` over this table.
    pub fn integral(&self, f: &Fab) -> Result<f64> {
        if f.max_position() as usize > self.n {
            return Err(Error::PositionOutOfRange {
                position: f.max_position(),
                len: self.n,
            });
        }
        let (odd, sq) = f.masks();
        Ok(self
            .values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, &v)| {
                let (supp, neg) = Self::masks(self.n, i);
                Fab::eval_masks(odd, sq, supp, neg) as f64 * v
            })
            .collect::<KahanSum>()
            .total())
    }
}

/// Chowla measure built on a truncated Mirsky measure.
#[derive(Debug)]
pub struct ChowlaMeasure {
    mirsky: MirskyMeasure,
}

impl ChowlaMeasure {
    pub fn new(cutoff: u64) -> Result<Self> {
        Ok(ChowlaMeasure {
            mirsky: MirskyMeasure::new(cutoff)?,
        })
    }

    pub fn from_mirsky(mirsky: MirskyMeasure) -> Self {
        ChowlaMeasure { mirsky }
    }

    pub fn mirsky(&self) -> &MirskyMeasure {
        &self.mirsky
    }

    /// `μ_M(C(x, y(A))) = ν_M(C(x)) / 2^{|supp(x)|}`.
    pub fn cylinder(&self, c: &SignedCylinder) -> Result<TruncatedDensity> {
        let s = c.base.support().len() as i32;
        Ok(self.mirsky.cylinder(&c.base)?.scaled(0.5f64.powi(s)))
    }

    /// The full level-`n` table.
    pub fn level(&self, n: usize) -> Result<AdmissibleMeasureLevel> {
        let mut table = AdmissibleMeasureLevel::zeros(n)?;
        let nu = self.mirsky.level_table(n)?;
        for (mask, d) in nu.iter().enumerate() {
            let base = Block2::from_mask(mask as u64, n);
            if !is_admissible_block(&base) {
                continue;
            }
            let s = mask.count_ones();
            let v = d.value * 0.5f64.powi(s as i32);
            for neg in 0..1u64 << s {
                let c = SignedCylinder::from_negative_mask(base.clone(), neg);
                table.set(&c.to_block3(), v)?;
            }
        }
        Ok(table)
    }

    /// `Σ` over all level-`n` signed cylinders of `F_{A,B} · μ_M(cylinder)`.
    pub fn integral_fab_level(&self, f: &Fab, n: usize) -> Result<f64> {
        if n > LEVEL_CAP {
            return Err(Error::EnumerationCap { len: n, cap: LEVEL_CAP });
        }
        if f.max_position() as usize > n {
            return Err(Error::PositionOutOfRange {
                position: f.max_position(),
                len: n,
            });
        }
        let nu = self.mirsky.level_table(n)?;
        let (odd, sq) = f.masks();
        let per_base = par::map_indices(Parallelism::default(), nu.len(), |mask| {
            let supp = mask as u64;
            let s = supp.count_ones();
            let v = nu[mask].value * 0.5f64.powi(s as i32);
            let mut acc = 0i64;
            // every submask of the support is one sign pattern
            let mut neg = supp;
            loop {
                acc += Fab::eval_masks(odd, sq, supp, neg) as i64;
                if neg == 0 {
                    break;
                }
                neg = (neg - 1) & supp;
            }
            acc as f64 * v
        });
        Ok(per_base.into_iter().collect::<KahanSum>().total())
    }
}

pub fn chowla_cylinder(c: &SignedCylinder, cutoff: u64) -> Result<TruncatedDensity> {
    ChowlaMeasure::new(cutoff)?.cylinder(c)
}

pub fn integral_fab_level(f: &Fab, n: usize, cutoff: u64) -> Result<f64> {
    ChowlaMeasure::new(cutoff)?.integral_fab_level(f, n)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniquenessSolution {
    pub support_size: usize,
    /// Mass of each sign pattern, indexed by negative mask over the support.
    pub values: Vec<f64>,
    pub closed_form: f64,
    /// `max |fwht solution − closed form|`.
    pub max_disagreement: f64,
    /// `‖C·ν − a·δ_∅‖∞` of the transform solution.
    pub residual: f64,
}

impl UniquenessSolution {
    pub fn cylinders(&self, base: &Block2) -> Vec<(SignedCylinder, f64)> {
        self.values
            .iter()
            .enumerate()
            .map(|(mask, &v)| (SignedCylinder::from_negative_mask(base.clone(), mask as u64), v))
            .collect()
    }
}

/// Solves the Walsh system `Σ_B (−1)^{|A∩B|} m(B) = nu·[A = ∅]` over the
/// subsets of `supp(base)` and checks it against `nu / 2^{|supp|}`.
///
/// # Panics
/// If the two routes disagree by more than `10⁻¹²·max(1, nu)`.
pub fn uniqueness_solve(base: &Block2, nu: f64) -> Result<UniquenessSolution> {
    if nu.is_nan() || nu < 0.0 {
        return Err(Error::InvalidParameter(format!("nu must be nonnegative, got {nu}")));
    }
    let s = base.support().len();
    if s > UNIQUENESS_SUPPORT_CAP {
        return Err(Error::EnumerationCap {
            len: s,
            cap: UNIQUENESS_SUPPORT_CAP,
        });
    }
    let sol = walsh::solve_uniform_system(s as u32, nu)?;
    let closed_form = nu / (1u64 << s) as f64;
    let max_disagreement = sol
        .nu
        .iter()
        .map(|v| (v - closed_form).abs())
        .fold(0.0, f64::max);
    assert!(
        max_disagreement <= 1e-12 * nu.max(1.0),
        "transform and closed form disagree by {max_disagreement}"
    );
    Ok(UniquenessSolution {
        support_size: s,
        values: sol.nu,
        closed_form,
        max_disagreement,
        residual: sol.residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub prime_cutoff: u64,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
}

/// Finite-level admissibility checks for a table `m`:
/// shift consistency of the `(n−1)`-marginals, pushforward under squaring
/// equal to `ν_M` (within `tol` plus the Euler-product bound of each
/// cylinder), and `∫ F_{A,B} dm ≈ 0` for every `A ≠ ∅`, `A ∪ B ⊆ [1, n]`.
pub fn verify_admissible_level(
    m: &AdmissibleMeasureLevel,
    mirsky: &MirskyMeasure,
    tol: f64,
) -> Result<LevelReport> {
    let n = m.n;
    if n == 0 || n > VERIFY_LEVEL_CAP {
        return Err(Error::EnumerationCap {
            len: n,
            cap: VERIFY_LEVEL_CAP,
        });
    }

    // (a) marginal on the first n−1 coordinates vs the last n−1
    let lower = pow3(n - 1);
    let mut first = vec![KahanSum::new(); lower];
    let mut last = vec![KahanSum::new(); lower];
    for (i, &v) in m.values.iter().enumerate() {
        first[i % lower].add(v);
        last[i / 3].add(v);
    }
    let shift_dev = first
        .iter()
        .zip(&last)
        .map(|(a, b)| (a.total() - b.total()).abs())
        .fold(0.0, f64::max);

    // (b) pushforward under squaring
    let nu = mirsky.level_table(n)?;
    let mut pushed = vec![KahanSum::new(); 1 << n];
    for (i, &v) in m.values.iter().enumerate() {
        pushed[AdmissibleMeasureLevel::masks(n, i).0 as usize].add(v);
    }
    let mut push_dev = 0.0f64;
    let mut push_ok = true;
    let mut push_tol = tol;
    for (mask, d) in nu.iter().enumerate() {
        let dev = (pushed[mask].total() - d.value).abs();
        push_dev = push_dev.max(dev);
        push_ok &= dev <= tol + d.error_bound;
        push_tol = push_tol.max(tol + d.error_bound);
    }

    // (c) all integrals of F_{A,B} with A ≠ ∅, accumulated per cylinder
    let tern: Vec<usize> = (0..1usize << n)
        .map(|mask| {
            (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(pow3)
                .sum()
        })
        .collect();
    let mut integrals = vec![0.0f64; pow3(n)];
    for (i, &v) in m.values.iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        let (supp, neg) = AdmissibleMeasureLevel::masks(n, i);
        let mut a = supp;
        loop {
            if a != 0 {
                let sign = if (a & neg).count_ones() % 2 == 0 { v } else { -v };
                let rest = supp & !a;
                let mut b = rest;
                loop {
                    integrals[tern[a as usize] + 2 * tern[b as usize]] += sign;
                    if b == 0 {
                        break;
                    }
                    b = (b - 1) & rest;
                }
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & supp;
        }
    }
    let fab_dev = integrals.iter().map(|x| x.abs()).fold(0.0, f64::max);

    let checks = vec![
        CheckOutcome {
            name: "shift_invariance",
            passed: shift_dev <= tol,
            max_deviation: shift_dev,
            tolerance: tol,
        },
        CheckOutcome {
            name: "squared_pushforward",
            passed: push_ok,
            max_deviation: push_dev,
            tolerance: push_tol,
        },
        CheckOutcome {
            name: "vanishing_fab_integrals",
            passed: fab_dev <= tol,
            max_deviation: fab_dev,
            tolerance: tol,
        },
    ];
    Ok(LevelReport {
        level: n,
        prime_cutoff: mirsky.cutoff(),
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2(s: &str) -> Block2 {
        Block2::parse(s).unwrap()
    }

    fn b3(s: &str) -> Block3 {
        Block3::parse(s).unwrap()
    }

    fn set(v: &[u64]) -> SupportSet {
        SupportSet::new(v.to_vec()).unwrap()
    }

    fn measure() -> ChowlaMeasure {
        ChowlaMeasure::new(10_000).unwrap()
    }

    #[test]
    fn signed_cylinder_round_trip() {
        let c = SignedCylinder::new(b2("1011"), &[1, -1, -1]).unwrap();
        assert_eq!(c.to_block3(), b3("+0--"));
        assert_eq!(SignedCylinder::from_block3(&b3("+0--")), c);
        assert_eq!(c.negative_positions(), set(&[3, 4]));
        assert!(SignedCylinder::new(b2("11"), &[1]).is_err());
        assert!(SignedCylinder::new(b2("1"), &[0]).is_err());
    }

    #[test]
    fn chowla_cylinder_examples() {
        let m = measure();
        let plus = m.cylinder(&SignedCylinder::new(b2("1"), &[1]).unwrap()).unwrap();
        assert!((plus.value - 0.303964).abs() < 1e-5);
        let zero = m.cylinder(&SignedCylinder::new(b2("0"), &[]).unwrap()).unwrap();
        assert!((zero.value - 0.392073).abs() < 1e-5);
        let pm = m.cylinder(&SignedCylinder::new(b2("11"), &[1, -1]).unwrap()).unwrap();
        assert!((pm.value - 0.3226 / 4.0).abs() < 1e-4);
        let pair = m.mirsky().cylinder(&b2("11")).unwrap();
        assert!((pm.value - pair.value / 4.0).abs() < 1e-15);
        assert!((pm.error_bound - pair.error_bound / 4.0).abs() < 1e-15);
    }

    #[test]
    fn fab_evaluation() {
        let f = Fab::new(set(&[1]), SupportSet::empty());
        assert_eq!(f.eval(&b3("+10")).unwrap(), 1);
        let f = Fab::new(set(&[1]), set(&[2]));
        assert_eq!(f.eval(&b3("-+")).unwrap(), -1);
        let f = Fab::new(set(&[2]), SupportSet::empty());
        assert_eq!(f.eval(&b3("+0")).unwrap(), 0);
        assert!(matches!(
            f.eval(&b3("+")),
            Err(Error::PositionOutOfRange { position: 2, len: 1 })
        ));
        let overlapping = Fab::new(set(&[1, 2]), set(&[2, 3]));
        assert_eq!(overlapping.squared(), &set(&[3]));
    }

    #[test]
    fn fab_masks_agree_with_direct_evaluation() {
        let table = measure().level(3).unwrap();
        for (block, _) in table.iter() {
            let (supp, neg) = AdmissibleMeasureLevel::masks(3, table.index(&block).unwrap());
            for a in 0..8u64 {
                for b in 0..8u64 {
                    if a & b != 0 {
                        continue;
                    }
                    let f = Fab::new(SupportSet::from_mask(a), SupportSet::from_mask(b));
                    let (fa, fb) = f.masks();
                    assert_eq!(Fab::eval_masks(fa, fb, supp, neg), f.eval(&block).unwrap());
                }
            }
        }
    }

    #[test]
    fn level_integrals() {
        let m = measure();
        let a1 = Fab::new(set(&[1]), SupportSet::empty());
        assert_eq!(m.integral_fab_level(&a1, 1).unwrap(), 0.0);
        let b1 = Fab::new(SupportSet::empty(), set(&[1]));
        let v = m.integral_fab_level(&b1, 1).unwrap();
        assert!((v - m.mirsky().cylinder(&b2("1")).unwrap().value).abs() < 1e-15);
        let a1b2 = Fab::new(set(&[1]), set(&[2]));
        assert!(m.integral_fab_level(&a1b2, 2).unwrap().abs() < 1e-15);
        assert!(m.integral_fab_level(&a1b2, 1).is_err());
    }

    #[test]
    fn integrals_via_table_and_direct_sum_agree() {
        let m = measure();
        let table = m.level(4).unwrap();
        for a in 0..16u64 {
            for b in 0..16u64 {
                if a & b != 0 {
                    continue;
                }
                let f = Fab::new(SupportSet::from_mask(a), SupportSet::from_mask(b));
                let direct = m.integral_fab_level(&f, 4).unwrap();
                let via_table = table.integral(&f).unwrap();
                assert!((direct - via_table).abs() < 1e-14);
                if a != 0 {
                    assert!(direct.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn uniqueness_examples() {
        let s = uniqueness_solve(&b2("1"), 0.6).unwrap();
        assert_eq!(s.values.len(), 2);
        assert!(s.values.iter().all(|v| (v - 0.3).abs() < 1e-15));
        let s = uniqueness_solve(&b2("00"), 0.39).unwrap();
        assert_eq!(s.values, vec![0.39]);
        let s = uniqueness_solve(&b2("11"), 0.32).unwrap();
        assert_eq!(s.values.len(), 4);
        assert!(s.values.iter().all(|v| (v - 0.08).abs() < 1e-15));
        assert!(s.residual <= 1e-12);
        assert_eq!(s.cylinders(&b2("11"))[3].0.to_block3(), b3("--"));
        assert!(uniqueness_solve(&b2("1"), -1.0).is_err());
    }

    #[test]
    fn table_identities() {
        let m = measure();
        let mut previous: Option<AdmissibleMeasureLevel> = None;
        for n in 1..=6 {
            let table = m.level(n).unwrap();
            assert!((table.total() - 1.0).abs() < 1e-12);
            // every base: sign patterns share one value summing to ν_M
            for mask in 0..1u64 << n {
                let base = Block2::from_mask(mask, n);
                let nu = m.mirsky().cylinder(&base).unwrap().value;
                let s = mask.count_ones();
                let vals: Vec<f64> = (0..1u64 << s)
                    .map(|neg| {
                        let c = SignedCylinder::from_negative_mask(base.clone(), neg);
                        table.get(&c.to_block3()).unwrap()
                    })
                    .collect();
                assert!(vals.iter().all(|&v| v == vals[0]));
                assert!((vals.iter().sum::<f64>() - nu).abs() < 1e-12);
            }
            if let Some(prev) = previous {
                for (block, v) in prev.iter() {
                    let sum: f64 = [-1i8, 0, 1]
                        .iter()
                        .map(|&s| {
                            let mut w = block.as_slice().to_vec();
                            w.push(s);
                            table.get(&Block3::new(w).unwrap()).unwrap()
                        })
                        .sum();
                    assert!((sum - v).abs() < 1e-12);
                }
            }
            previous = Some(table);
        }
    }

    #[test]
    fn constructed_levels_pass_verification() {
        let m = measure();
        for n in 1..=5 {
            let report = verify_admissible_level(&m.level(n).unwrap(), m.mirsky(), DEFAULT_TOL)
                .unwrap();
            assert!(report.passed, "{report:?}");
        }
    }

    #[test]
    fn perturbed_table_fails_fab_check() {
        let m = measure();
        let mut table = m.level(3).unwrap();
        let target = b3("+0-");
        let v = table.get(&target).unwrap();
        table.set(&target, v + 0.01).unwrap();
        let report = verify_admissible_level(&table, m.mirsky(), DEFAULT_TOL).unwrap();
        assert!(!report.passed);
        let fab = &report.checks[2];
        assert!(!fab.passed);
        assert!(fab.max_deviation >= 0.01 - 1e-12);
    }

    #[test]
    fn uniform_ternary_table_fails_pushforward() {
        let m = measure();
        let mut table = AdmissibleMeasureLevel::zeros(1).unwrap();
        for s in ["-", "0", "+"] {
            table.set(&b3(s), 1.0 / 3.0).unwrap();
        }
        let report = verify_admissible_level(&table, m.mirsky(), DEFAULT_TOL).unwrap();
        let push = &report.checks[1];
        assert!(!push.passed);
        assert!((push.max_deviation - (2.0 / 3.0 - 0.607927)).abs() < 1e-4);
    }

    #[test]
    fn level_caps() {
        assert!(AdmissibleMeasureLevel::zeros(LEVEL_CAP + 1).is_err());
        let m = measure();
        let big = AdmissibleMeasureLevel::zeros(VERIFY_LEVEL_CAP + 1).unwrap();
        assert!(verify_admissible_level(&big, m.mirsky(), DEFAULT_TOL).is_err());
    }
}
