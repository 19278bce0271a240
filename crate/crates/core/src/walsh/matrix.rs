use serde::Serialize;

use super::transform::dense_walsh;
use crate::{Error, Result};

/// Largest ground-set size whose Walsh determinant is also computed exactly.
pub const EXACT_DET_MAX_N: u32 = 4;

fn check_square<T>(m: &[Vec<T>]) -> Result<usize> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(Error::NotSquare);
    }
    Ok(n)
}

/// Fraction-free (Bareiss) elimination in `i128`; every intermediate is a
/// minor of the input, so the result is exact unless a minor overflows.
pub fn exact_det(m: &[Vec<i64>]) -> Result<i128> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(1);
    }
    let overflow = || Error::InvalidParameter("determinant overflows i128".into());
    let mut a: Vec<Vec<i128>> = m
        .iter()
        .map(|r| r.iter().map(|&x| x as i128).collect())
        .collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&i| a[i][k] != 0) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return Ok(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let lhs = a[i][j].checked_mul(a[k][k]).ok_or_else(overflow)?;
                let rhs = a[i][k].checked_mul(a[k][j]).ok_or_else(overflow)?;
                a[i][j] = lhs.checked_sub(rhs).ok_or_else(overflow)? / prev;
            }
            a[i][k] = 0;
        }
        prev = a[k][k];
    }
    Ok(sign * a[n - 1][n - 1])
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn det_f64(m: &[Vec<f64>]) -> Result<f64> {
    let n = check_square(m)?;
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap();
        if a[pivot][k] == 0.0 {
            return Ok(0.0);
        }
        if pivot != k {
            a.swap(pivot, k);
            det = -det;
        }
        det *= a[k][k];
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot = &top[k];
        for row in rest {
            let f = row[k] / pivot[k];
            for (x, &y) in row[k..].iter_mut().zip(&pivot[k..]) {
                *x -= f * y;
            }
        }
    }
    Ok(det)
}

/// `det C` for the Walsh matrix over an `n`-element set, as
/// `sign · 2^{log2_abs}` with `log2_abs = n·2^{n−1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WalshDeterminant {
    pub n: u32,
    pub sign: i8,
    pub log2_abs: u128,
    /// Exact determinant for `n ≤ EXACT_DET_MAX_N`.
    pub exact: Option<i128>,
}

pub fn walsh_det_log2(n: u32) -> Result<WalshDeterminant> {
    if n == 0 || n > 64 {
        return Err(Error::InvalidParameter(format!(
            "ground-set size must be in 1..=64, got {n}"
        )));
    }
    let log2_abs = (n as u128) << (n - 1);
    // [[C, C], [C, −C]] has det (−2)^{2ⁿ}·det(C)², positive once n ≥ 1
    let sign = if n == 1 { -1 } else { 1 };
    let exact = if n <= EXACT_DET_MAX_N {
        let m: Vec<Vec<i64>> = dense_walsh(n)
            .into_iter()
            .map(|r| r.into_iter().map(i64::from).collect())
            .collect();
        let d = exact_det(&m)?;
        assert_eq!(d.signum() as i8, sign, "sign of det C for n = {n}");
        assert_eq!(d.unsigned_abs(), 1u128 << log2_abs, "|det C| for n = {n}");
        Some(d)
    } else {
        None
    };
    Ok(WalshDeterminant {
        n,
        sign,
        log2_abs,
        exact,
    })
}

/// `H·Hᵀ = n·I` for a `±1` matrix.
pub fn is_hadamard(m: &[Vec<i8>]) -> Result<bool> {
    let n = check_square(m)?;
    for (i, row) in m.iter().enumerate() {
        if let Some(j) = row.iter().position(|&x| x != 1 && x != -1) {
            return Err(Error::InvalidEntry {
                row: i,
                col: j,
                value: row[j] as f64,
            });
        }
    }
    for i in 0..n {
        for j in i..n {
            let dot: i64 = m[i].iter().zip(&m[j]).map(|(&a, &b)| (a * b) as i64).sum();
            if dot != if i == j { n as i64 } else { 0 } {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetBound {
    pub det_abs: f64,
    /// `n^{n/2}`
    pub bound: f64,
    /// `|det|` equals the bound to 10⁻⁹ relative.
    pub tight: bool,
}

/// Hadamard's inequality `|det M| ≤ n^{n/2}` for entries in `[−1, 1]`.
///
/// # Panics
/// If the bound is attained by a matrix that is not Hadamard.
pub fn hadamard_det_bound_check(m: &[Vec<f64>]) -> Result<DetBound> {
    let n = check_square(m)?;
    for (i, row) in m.iter().enumerate() {
        if let Some(j) = row.iter().position(|x| !(-1.0..=1.0).contains(x)) {
            return Err(Error::InvalidEntry {
                row: i,
                col: j,
                value: row[j],
            });
        }
    }
    let det_abs = det_f64(m)?.abs();
    let bound = (n as f64).powf(n as f64 / 2.0);
    let tight = (det_abs - bound).abs() <= 1e-9 * bound;
    if tight {
        let signs: Option<Vec<Vec<i8>>> = m
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&x| {
                        if (x - 1.0).abs() <= 1e-9 {
                            Some(1)
                        } else if (x + 1.0).abs() <= 1e-9 {
                            Some(-1)
                        } else {
                            None
                        }
                    })
                    .collect()
            })
            .collect();
        let hadamard = signs.is_some_and(|s| is_hadamard(&s).unwrap_or(false));
        assert!(hadamard, "determinant bound attained by a non-Hadamard matrix");
    }
    Ok(DetBound {
        det_abs,
        bound,
        tight,
    })
}

/// `m × m` circulant: row `i` is `row` rotated right by `i`.
pub fn circulant_from_row(row: &[i8]) -> Vec<Vec<i8>> {
    let m = row.len();
    (0..m)
        .map(|i| (0..m).map(|j| row[(j + m - i) % m]).collect())
        .collect()
}
