//! Cross-module invariants, checked against definitions.

use proptest::prelude::*;

use mflab_core::admissible::{is_admissible_block, Block, Block2, Block3, Enumerator};
use mflab_core::chowla::{chowla_cylinder, uniqueness_solve, ChowlaMeasure, SignedCylinder};
use mflab_core::mirsky::MirskyMeasure;
use mflab_core::sampler::{ChowlaSampler, GroupPoint, SampleConfig};
use mflab_core::sieve::{sieve, sieve_with, ArithFunction, ArithTable, SieveOptions};
use mflab_core::walsh::{dense_walsh, fwht_with};
use mflab_core::Parallelism;

fn both(f: ArithFunction, n: u64, segment_len: usize) -> (ArithTable, ArithTable) {
    let run = |parallelism| {
        sieve_with(f, n, SieveOptions { segment_len, parallelism }).unwrap()
    };
    (run(Parallelism::Sequential), run(Parallelism::Parallel))
}

#[test]
fn parallel_and_sequential_sieves_agree() {
    for f in [ArithFunction::Mobius, ArithFunction::Liouville, ArithFunction::SquareFree] {
        let (a, b) = both(f, 300_000, 4096);
        assert_eq!(a.values(), b.values());
        assert_eq!(a.values(), sieve(f, 300_000).unwrap().values());
    }
}

#[test]
fn table_files_round_trip() {
    let t = sieve(ArithFunction::Liouville, 5000).unwrap();
    let mut buf = Vec::new();
    t.write_to(&mut buf).unwrap();
    assert_eq!(&buf[..4], b"MFL1");
    assert_eq!(buf[4], 1);
    assert_eq!(ArithTable::read_from(&buf[..]).unwrap(), t);
}

#[test]
fn mobius_windows_are_admissible() {
    // every window of μ has an admissible support: μ(n) = 0 on each class 0 mod p²
    let mu = sieve(ArithFunction::Mobius, 20_000).unwrap();
    for start in (0..19_970).step_by(7) {
        let w = Block3::new(mu.values()[start..start + 24].to_vec()).unwrap();
        assert!(is_admissible_block(&w));
    }
}

#[test]
fn chowla_level_sums_to_one_and_projects_to_mirsky() {
    let m = ChowlaMeasure::new(10_000).unwrap();
    for n in 1..=5 {
        let table = m.level(n).unwrap();
        assert!((table.total() - 1.0).abs() < 1e-12 + n as f64 * 1e-4);
        let nu: f64 = Enumerator::default()
            .binary(n)
            .unwrap()
            .iter()
            .map(|b| m.mirsky().cylinder(b).unwrap().value)
            .sum();
        assert!((table.total() - nu).abs() < 1e-12);
    }
}

#[test]
fn group_point_and_lazy_sampler_agree_on_small_cutoffs() {
    // with P = 3 the window is determined by two residues; compare the lazy
    // sampler's empirical law with the exact law over all 4·9 group points
    let len = 10;
    let mut exact = std::collections::HashMap::new();
    for g2 in 0..4 {
        for g3 in 0..9 {
            let w = GroupPoint::new(vec![(2, g2), (3, g3)]).unwrap().window(len);
            *exact.entry(w.to_string()).or_insert(0.0) += 1.0 / 36.0;
        }
    }
    let s = ChowlaSampler::new(SampleConfig { cutoff: 3, len, seed: 5 }).unwrap();
    let m = 36_000;
    let mut seen = std::collections::HashMap::new();
    for i in 0..m {
        *seen.entry(s.mirsky_sample(i).to_string()).or_insert(0u64) += 1;
    }
    assert!(seen.keys().all(|k| exact.contains_key(k)));
    for (w, p) in exact {
        let f = *seen.get(&w).unwrap_or(&0) as f64 / m as f64;
        assert!((f - p).abs() <= 4.0 * (p * (1.0 - p) / m as f64).sqrt(), "{w}");
    }
}

proptest! {
    #[test]
    fn fwht_paths_agree_with_dense_matrix(n in 0u32..8, seed in any::<u64>()) {
        let len = 1usize << n;
        let v: Vec<f64> = (0..len).map(|i| ((seed.wrapping_mul(i as u64 + 1) >> 40) % 201) as f64 - 100.0).collect();
        let c = dense_walsh(n);
        let dense: Vec<f64> = c.iter().map(|row| row.iter().zip(&v).map(|(&s, &x)| s as f64 * x).sum()).collect();
        let mut seq = v.clone();
        fwht_with(Parallelism::Sequential, &mut seq).unwrap();
        let mut par = v.clone();
        fwht_with(Parallelism::Parallel, &mut par).unwrap();
        prop_assert_eq!(&seq, &par);
        prop_assert_eq!(seq, dense);
    }

    #[test]
    fn signed_cylinders_split_mass_evenly(mask in 0u64..1 << 10, len in 1usize..=10) {
        let base = Block2::from_mask(mask & ((1 << len) - 1), len);
        let k = base.support().len();
        let nu = MirskyMeasure::new(1000).unwrap().cylinder(&base).unwrap().value;
        let sol = uniqueness_solve(&base, nu).unwrap();
        for (c, v) in sol.cylinders(&base) {
            let direct = chowla_cylinder(&c, 1000).unwrap().value;
            prop_assert!((direct - v).abs() <= 1e-15);
            prop_assert!((direct - nu / (1u64 << k) as f64).abs() <= 1e-15);
        }
    }

    #[test]
    fn signed_cylinder_block3_round_trip(word in proptest::collection::vec(-1i8..=1, 0..12)) {
        let b = Block3::new(word).unwrap();
        let c = SignedCylinder::from_block3(&b);
        prop_assert_eq!(c.to_block3(), b.clone());
        prop_assert_eq!(c.base(), &b.squared());
    }

    #[test]
    fn samples_square_to_mirsky_samples(seed in any::<u64>(), len in 1usize..40) {
        let s = ChowlaSampler::new(SampleConfig { cutoff: 211, len, seed }).unwrap();
        for i in 0..5 {
            let x = s.chowla_sample(i);
            prop_assert_eq!(x.squared(), s.mirsky_sample(i));
            prop_assert!(len > 24 || is_admissible_block(&x));
        }
    }
}
