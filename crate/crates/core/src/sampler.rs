//! Monte Carlo sampling of the Mirsky and Chowla measures.
//!
//! A point `g` of the truncated group `∏_{p ≤ P} ℤ/p²ℤ` is read through the
//! window `x_n = 0` iff `g_p + n ≡ 0 (mod p²)` for some `p ≤ P`, `n = 1…N`.
//! Under Haar measure this is a Mirsky sample; multiplying the non-zero
//! coordinates by independent fair signs gives a Chowla sample.
//!
//! [`ChowlaSampler`] never materializes `g`. Primes with `p² ≤ N` get an
//! explicit uniform residue. For `p² > N` the class `−g_p mod p²` meets the
//! window at most once, with probability `N/p²` and then at a uniform
//! position; those hits are drawn by thinning a geometric skip process, so a
//! sample costs `O(√N + N/log N)` random draws whatever the cutoff.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::admissible::{Block2, Block3};
use crate::chowla::Fab;
use crate::par::{map_chunks, map_indices, Parallelism, REDUCTION_CHUNK};
use crate::sieve::primes_up_to;
use crate::{Error, Result};

/// Generator behind every sample; sample `i` of seed `s` reads stream `i` of
/// the generator seeded by `s`.
pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha), seed_from_u64(seed), stream = sample index";

/// Default cutoff per unit of window length.
pub const DEFAULT_CUTOFF_PER_LEN: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SampleConfig {
    /// Prime cutoff `P`.
    pub cutoff: u64,
    /// Window length `N`.
    pub len: usize,
    pub seed: u64,
}

impl SampleConfig {
    /// `P = 10⁵·N`.
    pub fn with_default_cutoff(len: usize, seed: u64) -> Self {
        SampleConfig {
            cutoff: DEFAULT_CUTOFF_PER_LEN.saturating_mul(len as u64),
            len,
            seed,
        }
    }

    /// Total-variation distance to the untruncated measure on the window,
    /// at most `N/P`.
    pub fn truncation_bound(&self) -> f64 {
        self.len as f64 / self.cutoff as f64
    }

    fn validate(&self) -> Result<()> {
        if self.cutoff < 2 {
            return Err(Error::InvalidParameter(format!(
                "prime cutoff must be at least 2, got {}",
                self.cutoff
            )));
        }
        if self.len == 0 {
            return Err(Error::InvalidParameter("window length must be positive".into()));
        }
        Ok(())
    }

    fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}

/// A point of `∏_{p ≤ P} ℤ/p²ℤ`, stored as `(p, g_p)` pairs in prime order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPoint {
    residues: Vec<(u64, u64)>,
}

impl GroupPoint {
    pub fn new(mut residues: Vec<(u64, u64)>) -> Result<Self> {
        residues.sort_unstable();
        for w in residues.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParameter(format!("prime {} repeated", w[0].0)));
            }
        }
        for &(p, r) in &residues {
            if !crate::sieve::is_prime(p) {
                return Err(Error::NotPrime(p));
            }
            if r >= p * p {
                return Err(Error::InvalidParameter(format!(
                    "residue {r} out of range for modulus {}",
                    p * p
                )));
            }
        }
        Ok(GroupPoint { residues })
    }

    /// Haar-random point with every prime up to `cfg.cutoff`, drawn from
    /// stream `index`. Costs one draw per prime; meant for checks at small
    /// cutoffs.
    pub fn random(cfg: &SampleConfig, index: u64) -> Result<Self> {
        cfg.validate()?;
        let mut rng = cfg.rng(index);
        let residues = primes_up_to(cfg.cutoff)
            .as_slice()
            .iter()
            .map(|&p| (p, rng.random_range(0..p * p)))
            .collect();
        Ok(GroupPoint { residues })
    }

    pub fn residues(&self) -> &[(u64, u64)] {
        &self.residues
    }

    pub fn residue(&self, p: u64) -> Option<u64> {
        self.residues
            .binary_search_by_key(&p, |&(q, _)| q)
            .ok()
            .map(|i| self.residues[i].1)
    }

    /// The translate `g + 𝟏`.
    pub fn translate(&self) -> GroupPoint {
        GroupPoint {
            residues: self
                .residues
                .iter()
                .map(|&(p, r)| (p, (r + 1) % (p * p)))
                .collect(),
        }
    }

    /// `(f(Tⁿ g))_{n = 1…len}`.
    pub fn window(&self, len: usize) -> Block2 {
        let mut x = vec![1u8; len];
        for &(p, r) in &self.residues {
            let m = p * p;
            // first n ≥ 1 with n ≡ −r (mod m)
            let mut n = (m - r % m) % m;
            if n == 0 {
                n = m;
            }
            while n <= len as u64 {
                x[n as usize - 1] = 0;
                n += m;
            }
        }
        Block2::new(x).expect("binary word")
    }
}

/// Exact sampler for a fixed configuration.
#[derive(Clone, Debug)]
pub struct ChowlaSampler {
    cfg: SampleConfig,
    parallelism: Parallelism,
    /// Primes with `p² ≤ N`.
    head: Vec<u64>,
    /// Hit probabilities `N/p²` of the remaining primes, decreasing.
    tail: Vec<f64>,
}

impl ChowlaSampler {
    pub fn new(cfg: SampleConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.len as u64;
        let primes = primes_up_to(cfg.cutoff);
        let (head, tail): (Vec<u64>, Vec<u64>) =
            primes.as_slice().iter().partition(|&&p| p * p <= n);
        let tail = tail.into_iter().map(|p| n as f64 / (p * p) as f64).collect();
        Ok(ChowlaSampler {
            cfg,
            parallelism: Parallelism::default(),
            head,
            tail,
        })
    }

    pub fn with_parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn config(&self) -> &SampleConfig {
        &self.cfg
    }

    fn draw_support(&self, rng: &mut ChaCha8Rng) -> Vec<u8> {
        let len = self.cfg.len;
        let mut x = vec![1u8; len];
        for &p in &self.head {
            let m = p * p;
            let r = rng.random_range(0..m);
            let mut n = (m - r) % m;
            if n == 0 {
                n = m;
            }
            while n <= len as u64 {
                x[n as usize - 1] = 0;
                n += m;
            }
        }
        // Bernoulli(q_i) trials for decreasing q_i: propose with the current
        // maximum q_i via a geometric skip, accept candidate j with q_j / q_i.
        let mut i = 0;
        while i < self.tail.len() {
            let bound = self.tail[i];
            let u: f64 = 1.0 - rng.random::<f64>();
            let skip = (u.ln() / (-bound).ln_1p()).floor();
            if skip >= (self.tail.len() - i) as f64 {
                break;
            }
            let j = i + skip as usize;
            if rng.random::<f64>() * bound < self.tail[j] {
                x[rng.random_range(0..len)] = 0;
            }
            i = j + 1;
        }
        x
    }

    /// Mirsky sample number `index`.
    pub fn mirsky_sample(&self, index: u64) -> Block2 {
        let mut rng = self.cfg.rng(index);
        Block2::new(self.draw_support(&mut rng)).expect("binary word")
    }

    /// Chowla sample number `index`; its square is `mirsky_sample(index)`.
    pub fn chowla_sample(&self, index: u64) -> Block3 {
        let mut rng = self.cfg.rng(index);
        let x = self.draw_support(&mut rng);
        let signed = x
            .into_iter()
            .map(|v| {
                if v == 0 {
                    0
                } else if rng.random::<bool>() {
                    1
                } else {
                    -1
                }
            })
            .collect();
        Block3::new(signed).expect("ternary word")
    }

    /// Samples `0..count`, in index order.
    pub fn samples(&self, count: u64) -> Vec<Block3> {
        map_indices(self.parallelism, count as usize, |i| self.chowla_sample(i as u64))
    }

    pub fn mc_integral_fab(&self, f: &Fab, samples: u64) -> Result<McEstimate> {
        if f.max_position() > self.cfg.len as u64 {
            return Err(Error::PositionOutOfRange {
                position: f.max_position(),
                len: self.cfg.len,
            });
        }
        let (sum, sum_sq) = map_chunks(self.parallelism, 0..samples, REDUCTION_CHUNK, |r| {
            r.map(|i| f.eval(&self.chowla_sample(i)).expect("position checked") as i64)
                .fold((0i64, 0i64), |(s, s2), v| (s + v, s2 + v * v))
        })
        .into_iter()
        .fold((0, 0), |(a, b), (s, s2)| (a + s, b + s2));
        Ok(McEstimate::from_sums(sum, sum_sq, samples))
    }
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

impl McEstimate {
    fn from_sums(sum: i64, sum_sq: i64, m: u64) -> Self {
        if m == 0 {
            return McEstimate {
                mean: f64::NAN,
                stderr: f64::NAN,
                samples: 0,
            };
        }
        let mf = m as f64;
        let mean = sum as f64 / mf;
        let stderr = if m < 2 {
            0.0
        } else {
            // Σ(v − mean)² = Σv² − (Σv)²/M, kept in integers as M·Σv² − (Σv)²
            let centered = (m as i128 * sum_sq as i128 - sum as i128 * sum as i128) as f64 / mf;
            (centered.max(0.0) / (mf - 1.0) / mf).sqrt()
        };
        McEstimate {
            mean,
            stderr,
            samples: m,
        }
    }
}

/// First Mirsky sample of `cfg.seed`.
pub fn mirsky_sample(cfg: SampleConfig) -> Result<Block2> {
    Ok(ChowlaSampler::new(cfg)?.mirsky_sample(0))
}

/// First Chowla sample of `cfg.seed`.
pub fn chowla_sample(cfg: SampleConfig) -> Result<Block3> {
    Ok(ChowlaSampler::new(cfg)?.chowla_sample(0))
}

pub fn mc_integral_fab(f: &Fab, samples: u64, cfg: SampleConfig) -> Result<McEstimate> {
    ChowlaSampler::new(cfg)?.mc_integral_fab(f, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::admissible::{is_admissible_block, SupportSet};
    use crate::mirsky::MirskyMeasure;

    fn cfg(cutoff: u64, len: usize, seed: u64) -> SampleConfig {
        SampleConfig { cutoff, len, seed }
    }

    #[test]
    fn group_point_windows() {
        let g = GroupPoint::new(vec![(2, 3)]).unwrap();
        assert_eq!(g.window(4).as_slice(), &[0, 1, 1, 1]);

        let g = GroupPoint::new(vec![(2, 0)]).unwrap();
        let w = g.window(20);
        for n in 1..=20usize {
            assert_eq!(w.as_slice()[n - 1] == 0, n % 4 == 0, "n = {n}");
        }
        // Tⁿ shifts the window
        assert_eq!(g.translate().window(19).as_slice(), &w.as_slice()[1..]);

        let g = GroupPoint::new(vec![(3, 8), (2, 1)]).unwrap();
        assert_eq!(g.residue(3), Some(8));
        assert_eq!(g.window(10).zeros(), vec![1, 3, 7, 10]);
        assert!(GroupPoint::new(vec![(4, 0)]).is_err());
        assert!(GroupPoint::new(vec![(3, 9)]).is_err());
    }

    #[test]
    fn deterministic_per_seed_and_index() {
        let s = ChowlaSampler::new(cfg(10_007, 64, 42)).unwrap();
        assert_eq!(s.chowla_sample(5), s.chowla_sample(5));
        assert_ne!(s.samples(20), ChowlaSampler::new(cfg(10_007, 64, 43)).unwrap().samples(20));
        assert_eq!(
            s.samples(50),
            s.clone().with_parallelism(Parallelism::Sequential).samples(50)
        );
        assert_eq!(chowla_sample(cfg(10_007, 64, 42)).unwrap(), s.chowla_sample(0));
    }

    #[test]
    fn chowla_squares_to_mirsky() {
        let s = ChowlaSampler::new(cfg(1000, 40, 7)).unwrap();
        for i in 0..200 {
            assert_eq!(s.chowla_sample(i).squared(), s.mirsky_sample(i));
        }
    }

    #[test]
    fn samples_are_admissible() {
        let s = ChowlaSampler::new(cfg(1000, 24, 1)).unwrap();
        for b in s.samples(500) {
            assert!(is_admissible_block(&b), "{b}");
        }
    }

    /// The lazy sampler and a fully materialized group point give the same
    /// cylinder frequencies, both matching the exact truncated product.
    #[test]
    fn frequencies_match_truncated_measure() {
        let (cutoff, len, m) = (13u64, 12usize, 40_000u64);
        let c = cfg(cutoff, len, 99);
        let lazy = ChowlaSampler::new(c).unwrap();
        let full: Vec<Block2> = (0..m)
            .map(|i| GroupPoint::random(&c, i).unwrap().window(len))
            .collect();
        let lazy: Vec<Block2> = (0..m).map(|i| lazy.mirsky_sample(i)).collect();
        let measure = MirskyMeasure::new(cutoff).unwrap();
        for start in [0usize, 5] {
            for mask in 0..8u64 {
                let block = Block2::from_mask(mask, 3);
                let v = measure.cylinder(&block).unwrap().value;
                let tol = 4.0 * (v * (1.0 - v) / m as f64).sqrt() + 1e-12;
                for samples in [&full, &lazy] {
                    let hits = samples
                        .iter()
                        .filter(|w| w.as_slice()[start..start + 3] == *block.as_slice())
                        .count();
                    let freq = hits as f64 / m as f64;
                    assert!((freq - v).abs() <= tol, "{block} at {start}: {freq} vs {v}");
                }
            }
        }
    }

    #[test]
    fn sign_frequencies_and_independence() {
        let s = ChowlaSampler::new(cfg(1000, 8, 3)).unwrap();
        let m = 20_000;
        let (mut plus, mut nonzero, mut prod_sum, mut both) = (0i64, 0i64, 0i64, 0i64);
        for b in s.samples(m) {
            let (x1, x2) = (b.as_slice()[0], b.as_slice()[1]);
            if x1 != 0 {
                nonzero += 1;
                plus += (x1 > 0) as i64;
            }
            if x1 != 0 && x2 != 0 {
                both += 1;
                prod_sum += (x1 * x2) as i64;
            }
        }
        let sigma = 0.5 / (nonzero as f64).sqrt();
        assert!((plus as f64 / nonzero as f64 - 0.5).abs() <= 4.0 * sigma);
        let corr = prod_sum as f64 / both as f64;
        assert!(corr.abs() <= 4.0 / (both as f64).sqrt());
    }

    #[test]
    fn fab_estimates() {
        let c = cfg(1000, 4, 11);
        let one = mc_integral_fab(&Fab::new(SupportSet::empty(), SupportSet::empty()), 1000, c)
            .unwrap();
        assert_eq!((one.mean, one.stderr), (1.0, 0.0));

        let odd = mc_integral_fab(&Fab::new(SupportSet::new(vec![1]).unwrap(), SupportSet::empty()), 20_000, c)
            .unwrap();
        assert!(odd.mean.abs() <= 3.0 * odd.stderr + 1e-12);

        let sq = mc_integral_fab(&Fab::new(SupportSet::empty(), SupportSet::new(vec![1]).unwrap()), 20_000, c)
            .unwrap();
        let v = MirskyMeasure::new(1000).unwrap().cylinder(&Block2::parse("1").unwrap()).unwrap();
        assert!((sq.mean - v.value).abs() <= 4.0 * sq.stderr + v.error_bound);

        let too_long = Fab::new(SupportSet::new(vec![5]).unwrap(), SupportSet::empty());
        assert!(mc_integral_fab(&too_long, 10, c).is_err());
    }

    #[test]
    fn invalid_configs() {
        assert!(ChowlaSampler::new(cfg(1, 4, 0)).is_err());
        assert!(ChowlaSampler::new(cfg(100, 0, 0)).is_err());
        assert_eq!(SampleConfig::with_default_cutoff(32, 0).cutoff, 3_200_000);
    }
}
