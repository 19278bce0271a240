use serde::Serialize;

use crate::par::Parallelism;
use crate::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Largest `n` for which `2ⁿ`-long vectors are built.
pub const MAX_TRANSFORM_BITS: u32 = 30;

/// Below this length the transform always runs sequentially.
const PARALLEL_MIN_LEN: usize = 1 << 14;

/// `C(A, B) = (−1)^{popcount(A ∧ B)}`.
#[inline]
pub fn walsh_entry(a: u64, b: u64) -> i8 {
    if (a & b).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Materialized `2ⁿ × 2ⁿ` sign matrix.
pub fn dense_walsh(n: u32) -> Vec<Vec<i8>> {
    let size = 1u64 << n;
    (0..size)
        .map(|a| (0..size).map(|b| walsh_entry(a, b)).collect())
        .collect()
}

/// In-place `v ← C·v` in `O(n·2ⁿ)`.
pub fn fwht(v: &mut [f64]) -> Result<()> {
    fwht_with(Parallelism::default(), v)
}

pub fn fwht_with(par: Parallelism, v: &mut [f64]) -> Result<()> {
    if !v.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(v.len()));
    }
    let len = v.len();
    let parallel = par.is_parallel() && len >= PARALLEL_MIN_LEN;
    let mut h = 1;
    while h < len {
        if parallel {
            #[cfg(feature = "parallel")]
            {
                if len / (2 * h) >= 64 {
                    v.par_chunks_mut(2 * h).for_each(|block| butterfly(block, h));
                } else {
                    for block in v.chunks_mut(2 * h) {
                        let (lo, hi) = block.split_at_mut(h);
                        lo.par_iter_mut().zip(hi.par_iter_mut()).for_each(|(x, y)| {
                            let (a, b) = (*x, *y);
                            *x = a + b;
                            *y = a - b;
                        });
                    }
                }
            }
        } else {
            for block in v.chunks_mut(2 * h) {
                butterfly(block, h);
            }
        }
        h *= 2;
    }
    Ok(())
}

#[inline]
fn butterfly(block: &mut [f64], h: usize) {
    let (lo, hi) = block.split_at_mut(h);
    for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = a + b;
        *y = a - b;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UniformSolution {
    pub nu: Vec<f64>,
    /// `‖C·ν − a·δ_∅‖∞`
    pub residual: f64,
}

/// The unique `ν` with `C·ν = a·δ_∅`, computed as `C·(a·δ_∅)/2ⁿ` using
/// `C² = 2ⁿ·I`, then pushed back through the transform for the residual.
pub fn solve_uniform_system(n: u32, a: f64) -> Result<UniformSolution> {
    if n > MAX_TRANSFORM_BITS {
        return Err(Error::InvalidParameter(format!(
            "ground set of size {n} exceeds {MAX_TRANSFORM_BITS}"
        )));
    }
    let size = 1usize << n;
    let mut nu = vec![0.0; size];
    nu[0] = a;
    fwht(&mut nu)?;
    let scale = 1.0 / size as f64;
    nu.iter_mut().for_each(|x| *x *= scale);

    let mut back = nu.clone();
    fwht(&mut back)?;
    let residual = back
        .iter()
        .enumerate()
        .map(|(i, &x)| (x - if i == 0 { a } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    Ok(UniformSolution { nu, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense_apply(n: u32, v: &[f64]) -> Vec<f64> {
        let size = 1u64 << n;
        (0..size)
            .map(|a| {
                (0..size)
                    .map(|b| walsh_entry(a, b) as f64 * v[b as usize])
                    .sum()
            })
            .collect()
    }

    #[test]
    fn entries() {
        assert_eq!(walsh_entry(0, 0), 1);
        assert_eq!(walsh_entry(0b1, 0b1), -1);
        // {1,2} ∩ {2,3} = {2}
        assert_eq!(walsh_entry(0b011, 0b110), -1);
        assert_eq!(dense_walsh(1), vec![vec![1, 1], vec![1, -1]]);
    }

    #[test]
    fn small_transforms() {
        let mut v = vec![1.0, 0.0];
        fwht(&mut v).unwrap();
        assert_eq!(v, vec![1.0, 1.0]);
        let mut v = vec![2.5, 2.5];
        fwht(&mut v).unwrap();
        assert_eq!(v, vec![5.0, 0.0]);
        assert!(matches!(fwht(&mut [1.0, 2.0, 3.0]), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn transform_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 0..=10u32 {
            let v: Vec<f64> = (0..1usize << n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut w = v.clone();
            fwht(&mut w).unwrap();
            let d = dense_apply(n, &v);
            for (x, y) in w.iter().zip(&d) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn rows_are_orthogonal() {
        // C·Cᵀ = 2ⁿ·I, read off from the transform of each basis vector
        for n in 0..=10u32 {
            let size = 1usize << n;
            let cols: Vec<Vec<f64>> = (0..size)
                .map(|j| {
                    let mut e = vec![0.0; size];
                    e[j] = 1.0;
                    fwht(&mut e).unwrap();
                    e
                })
                .collect();
            for i in (0..size).step_by((size / 16).max(1)) {
                for j in 0..size {
                    let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                    assert_eq!(dot, if i == j { size as f64 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn parallel_transform_is_bit_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let v: Vec<f64> = (0..1 << 17).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut a = v.clone();
        let mut b = v;
        fwht_with(Parallelism::Sequential, &mut a).unwrap();
        fwht_with(Parallelism::Parallel, &mut b).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn uniform_system_examples() {
        assert_eq!(solve_uniform_system(1, 1.0).unwrap().nu, vec![0.5, 0.5]);
        assert_eq!(solve_uniform_system(3, 8.0).unwrap().nu, vec![1.0; 8]);
        assert_eq!(solve_uniform_system(2, 0.0).unwrap().nu, vec![0.0; 4]);
        assert_eq!(solve_uniform_system(0, 0.7).unwrap().nu, vec![0.7]);
        for n in 0..=10 {
            let s = solve_uniform_system(n, 0.37).unwrap();
            assert!(s.residual <= 1e-12);
            assert!(s.nu.iter().all(|&x| (x - 0.37 / (1u64 << n) as f64).abs() < 1e-15));
        }
        assert!(solve_uniform_system(MAX_TRANSFORM_BITS + 1, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn transform_is_an_involution_up_to_scale(n in 0u32..9, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v: Vec<f64> = (0..1usize << n).map(|_| rng.random_range(-10.0..10.0)).collect();
            let mut w = v.clone();
            fwht(&mut w).unwrap();
            fwht(&mut w).unwrap();
            let scale = (1u64 << n) as f64;
            for (x, y) in w.iter().zip(&v) {
                prop_assert!((x - scale * y).abs() < 1e-9 * scale);
            }
        }
    }
}
