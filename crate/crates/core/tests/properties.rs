//! Cross-module invariants on random states.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use gtl_core::divergences::{gaussian_kl, trace_distance_bounds, tv_bracket, GaussianDistribution};
use gtl_core::io::{read_state, write_state};
use gtl_core::linalg::Vector;
use gtl_core::measurement::{GeneralDyneSeed, StateOracle};
use gtl_core::state::{apply_symplectic, fidelity, GaussianState};
use gtl_core::symplectic::{random_covariance, random_orthogonal_symplectic, squeezer, symplectic_spectrum, CovarianceKind};

fn state(n: usize, kind: CovarianceKind, seed: u64) -> GaussianState {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let cov = random_covariance(n, 6.0, kind, &mut rng).unwrap();
    let mu = Vector::from_fn(2 * n, |i, _| ((seed as f64) * 0.37 + i as f64).sin());
    GaussianState::new(mu, cov).unwrap()
}

fn kind_of(k: u8) -> CovarianceKind {
    [CovarianceKind::Pure, CovarianceKind::Mixed, CovarianceKind::Passive][k as usize % 3]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symplectic_action_keeps_the_spectrum(n in 1usize..4, k in 0u8..3, seed in 0u64..10_000, z in 0.3f64..3.0) {
        let st = state(n, kind_of(k), seed);
        let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0xABCD);
        let s = random_orthogonal_symplectic(n, &mut rng) * squeezer(&vec![z; n]);
        let moved = apply_symplectic(&st, &s).unwrap();
        let a = symplectic_spectrum(st.sigma()).unwrap();
        let b = symplectic_spectrum(moved.sigma()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-8 * x.max(1.0));
        }
        // Fidelity is invariant under a common Gaussian unitary.
        let other = state(n, kind_of(k + 1), seed + 1);
        let f0 = fidelity(&st, &other).unwrap();
        let f1 = fidelity(&moved, &apply_symplectic(&other, &s).unwrap()).unwrap();
        prop_assert!((f0 - f1).abs() <= 1e-7);
    }

    #[test]
    fn distances_are_ordered(n in 1usize..4, ka in 0u8..3, kb in 0u8..3, seed in 0u64..10_000) {
        let a = state(n, kind_of(ka), seed);
        let b = state(n, kind_of(kb), seed + 7);
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&f));
        prop_assert!((f - fidelity(&b, &a).unwrap()).abs() <= 1e-9);
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let br = trace_distance_bounds(&a, &b, 0, &mut rng).unwrap();
        prop_assert!(0.0 <= br.lower && br.lower <= br.upper + 1e-12 && br.upper <= 1.0 + 1e-12);
        // Fuchs–van de Graaf.
        prop_assert!(br.lower <= (1.0 - f).max(0.0).sqrt() + 1e-9);
        let (wa, wb) = (GaussianDistribution::wigner(&a), GaussianDistribution::wigner(&b));
        prop_assert!(gaussian_kl(&wa, &wb).unwrap() >= -1e-12);
        let tv = tv_bracket(&wa, &wb).unwrap();
        prop_assert!(tv.lower <= tv.upper);
    }

    #[test]
    fn state_files_round_trip(n in 1usize..4, k in 0u8..3, seed in 0u64..10_000) {
        let st = state(n, kind_of(k), seed);
        let mut buf = Vec::new();
        write_state(&st, &mut buf).unwrap();
        let back = read_state(buf.as_slice()).unwrap();
        prop_assert_eq!(back.sigma(), st.sigma());
        prop_assert_eq!(back.mean(), st.mean());
    }

    #[test]
    fn oracle_counts_every_copy(n in 1usize..3, m in 1u64..500, seed in 0u64..1000) {
        let mut o = StateOracle::new(state(n, CovarianceKind::Mixed, seed), seed);
        let het = GeneralDyneSeed::heterodyne(n);
        let a = o.sample_general_dyne(&het, m).unwrap();
        let b = o.sample_general_dyne(&het, m + 1).unwrap();
        prop_assert_eq!(a.len() as u64 + b.len() as u64, o.consumed());
    }
}

#[test]
fn identical_seeds_give_identical_outcomes() {
    let st = state(2, CovarianceKind::Mixed, 5);
    let het = GeneralDyneSeed::heterodyne(2);
    let x = StateOracle::new(st.clone(), 9).sample_general_dyne(&het, 64).unwrap();
    let y = StateOracle::new(st, 9).sample_general_dyne(&het, 64).unwrap();
    assert_eq!(x, y);
}
