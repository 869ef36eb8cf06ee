//! Sweeps used to pick the frozen calibration constants.
//!
//!   cargo run --release -p gtl-core --example calibrate -- unsq
//!   cargo run --release -p gtl-core --example calibrate -- pure 3 100 4
//!   TRIALS=50 cargo run --release -p gtl-core --example calibrate -- s1 12 3 40
//!   cargo run --release -p gtl-core --example calibrate -- passive 3
//!   cargo run --release -p gtl-core --example calibrate -- wigner 3

use gtl_core::divergences::trace_distance_pure;
use gtl_core::linalg;
use gtl_core::measurement::StateOracle;
use gtl_core::state::GaussianState;
use gtl_core::symplectic::{random_covariance, symplectic_inverse, CovarianceKind};
use gtl_core::tomography::*;
use gtl_core::linalg::Vector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let which = args.get(1).map(String::as_str).unwrap_or("unsq");
    match which {
        "unsq" => {
            for &cu in &[25.0, 50.0, 100.0] {
                for &ks in &[2.0, 3.0, 4.0] {
                    for &n in &[1usize, 2, 4, 8] {
                        let cal = Calibration { unsqueeze: cu, unsqueeze_stop: ks, ..Calibration::FROZEN };
                        let res: Vec<(bool, usize, u64)> = (0..100u64).into_par_iter().map(|t| {
                            let mut rng = ChaCha20Rng::seed_from_u64(t);
                            let sig = random_covariance(n, 16.0, CovarianceKind::Pure, &mut rng).unwrap();
                            let truth = GaussianState::new(Vector::zeros(2*n), sig).unwrap();
                            let mut o = StateOracle::new(truth.clone(), t + 1000);
                            match adaptive_unsqueeze_with(&mut o, 16.0, 0.1, &cal) {
                                Ok(u) => {
                                    let si = symplectic_inverse(&u.s);
                                    let lm = linalg::min_eigenvalue(&(&si * truth.sigma() * si.transpose()));
                                    (lm >= 0.25, u.rounds, u.copies)
                                }
                                Err(_) => (false, 99, o.consumed()),
                            }
                        }).collect();
                        let ok = res.iter().filter(|r| r.0).count();
                        let fails = res.iter().filter(|r| r.1 == 99).count();
                        let mean_r: f64 = res.iter().filter(|r| r.1 != 99).map(|r| r.1 as f64).sum::<f64>() / (100 - fails).max(1) as f64;
                        let mean_c: f64 = res.iter().map(|r| r.2 as f64).sum::<f64>() / 100.0;
                        println!("cu={cu} kstop={ks} n={n}: contract {ok}/100 exhausted {fails} rounds {mean_r:.2} copies {mean_c:.0}");
                    }
                }
            }
        }
        "pure" => {
            let ch: f64 = args.get(2).map(|s| s.parse().unwrap()).unwrap_or(6.0);
            let cu: f64 = args.get(3).map(|s| s.parse().unwrap()).unwrap_or(50.0);
            let ks: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(3.0);
            for &n in &[2usize, 4, 8] {
                let cal = Calibration { unsqueeze: cu, unsqueeze_stop: ks, pure_stage: ch, ..Calibration::FROZEN };
                let res: Vec<(f64, u64, u64)> = (0..60u64).into_par_iter().map(|t| {
                    let mut rng = ChaCha20Rng::seed_from_u64(t);
                    let sig = random_covariance(n, 16.0, CovarianceKind::Pure, &mut rng).unwrap();
                    let truth = GaussianState::new(Vector::zeros(2*n), sig).unwrap();
                    let mut o = StateOracle::new(truth.clone(), t + 1000);
                    match learn_pure_with(&mut o, n, 16.0, 0.2, 1.0/3.0, &cal) {
                        Ok(r) => (trace_distance_pure(&r.estimate, &truth).unwrap(), r.copies_used, r.diagnostics.stages[0].copies),
                        Err(_) => (1.0, o.consumed(), 0),
                    }
                }).collect();
                let ok = res.iter().filter(|r| r.0 <= 0.2).count();
                let mut errs: Vec<f64> = res.iter().map(|r| r.0).collect();
                errs.sort_by(f64::total_cmp);
                let mean_c: f64 = res.iter().map(|r| r.1 as f64).sum::<f64>() / 60.0;
                let mean_u: f64 = res.iter().map(|r| r.2 as f64).sum::<f64>() / 60.0;
                println!("ch={ch} n={n}: success {ok}/60 median err {:.3} p90 {:.3} copies {mean_c:.0} (unsq {mean_u:.0})", errs[30], errs[54]);
            }
        }
        "s1" => {
            let c1: f64 = args[2].parse().unwrap();
            let c2: f64 = args[3].parse().unwrap();
            let c3: f64 = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(40.0);
            let eps = 0.15;
            let cal = Calibration { s1_angles: c1, s1_shots: c2, s1_heterodyne: c3, ..Calibration::FROZEN };
            let trials: u64 = std::env::var("TRIALS").ok().map(|s| s.parse().unwrap()).unwrap_or(50);
            let es: Vec<f64> = std::env::var("ES").ok().map(|s| s.split(',').map(|x| x.parse().unwrap()).collect()).unwrap_or(vec![16.0, 64.0, 256.0]);
            for &e in &es {
                let params = AlgS1Params::calibrated_with(e, eps, &cal).unwrap();
                let res: Vec<(f64, f64, String)> = (0..trials).into_par_iter().map(|t| {
                    let mut rng = ChaCha20Rng::seed_from_u64(t);
                    let theta = rand::Rng::random::<f64>(&mut rng) * std::f64::consts::PI;
                    let mu = [rand::Rng::random::<f64>(&mut rng) * 2.0 - 1.0, rand::Rng::random::<f64>(&mut rng) * 2.0 - 1.0];
                    let truth = GaussianState::single_mode(mu, 0.5 / e, 0.5 * e, theta).unwrap();
                    let mut o = StateOracle::new(truth.clone(), t + 1000);
                    let r = learn_single_mode_nonadaptive(&mut o, &params, eps, &mut rng);
                    let err = match &r {
                        Ok(r) => gtl_core::divergences::trace_distance_bounds(&r.estimate, &truth, 0, &mut rng).unwrap().upper,
                        Err(_) => 1.0,
                    };
                    let mut o2 = StateOracle::new(truth.clone(), t + 5000);
                    let b = heterodyne_baseline_with_budget(&mut o2, params.total_copies()).unwrap();
                    let berr = gtl_core::divergences::trace_distance_bounds(&b.estimate, &truth, 0, &mut rng).unwrap().upper;
                    (err, berr, match r { Ok(r) => format!("ok {:?} kappa={:.1} sel={:?} est={:?} truth theta={theta:.4}", r.diagnostics.branch, r.diagnostics.kappa_hat.unwrap(), r.diagnostics.selection, r.estimate.sigma().as_slice()), Err(e) => format!("{e}") })
                }).collect();
                let ok = res.iter().filter(|r| r.0 <= eps).count();
                let mut errs: Vec<f64> = res.iter().map(|r| r.0).collect();
                errs.sort_by(f64::total_cmp);
                let mut b: Vec<f64> = res.iter().map(|r| r.1).collect();
                b.sort_by(f64::total_cmp);
                let aborts = res.iter().filter(|r| !r.2.starts_with("ok")).count();
                let h = trials as usize;
                if std::env::var("SHOW").is_ok() {
                    for r in res.iter().filter(|r| r.0 > eps) { println!("   fail err={:.3} {}", r.0, r.2); }
                }
                println!("E={e} K={} T={} N0={} N={}: success {ok}/{h} aborts {aborts} median {:.3} p67 {:.3} | baseline median {:.3}", params.k, params.t, params.n0, params.total_copies(), errs[h / 2], errs[2 * h / 3], b[h / 2]);
            }
        }
        "passive" => {
            let ch: f64 = args[2].parse().unwrap();
            let cal = Calibration { pure_stage: ch, ..Calibration::FROZEN };
            let res: Vec<(f64, u64)> = (0..60u64).into_par_iter().map(|t| {
                let mut rng = ChaCha20Rng::seed_from_u64(t);
                let sig = random_covariance(2, 8.0, CovarianceKind::Passive, &mut rng).unwrap();
                let truth = GaussianState::new(Vector::zeros(4), sig).unwrap();
                let mut o = StateOracle::new(truth.clone(), t + 1000);
                match learn_passive_purified_with(&mut o, 2, 8.0, 0.25, 1.0/3.0, &mut rng, &cal) {
                    Ok(r) => (gtl_core::divergences::trace_distance_bounds(&r.estimate, &truth, 0, &mut rng).unwrap().upper, r.copies_used),
                    Err(e) => { println!("{e}"); (1.0, 0) }
                }
            }).collect();
            let ok = res.iter().filter(|r| r.0 <= 0.25).count();
            let mut errs: Vec<f64> = res.iter().map(|r| r.0).collect();
            errs.sort_by(f64::total_cmp);
            println!("passive ch={ch}: success {ok}/60 median {:.3} p67 {:.3} copies {}", errs[30], errs[40], res[0].1);
        }
        "wigner" => {
            let cw: f64 = args[2].parse().unwrap();
            let cal = Calibration { wigner_stage: cw, ..Calibration::FROZEN };
            let res: Vec<(f64, f64, u64)> = (0..60u64).into_par_iter().map(|t| {
                let mut rng = ChaCha20Rng::seed_from_u64(t);
                let sig = random_covariance(2, 8.0, CovarianceKind::Mixed, &mut rng).unwrap();
                let truth = GaussianState::new(Vector::from_element(4, 0.5), sig).unwrap();
                let mut o = StateOracle::new(truth.clone(), t + 1000);
                let w = learn_wigner_with(&mut o, 2, 8.0, 0.25, 1.0/3.0, &cal).unwrap();
                let tv = gtl_core::divergences::tv_monte_carlo(&w.distribution, &gtl_core::divergences::GaussianDistribution::wigner(&truth), 20000, &mut rng).unwrap();
                (tv.estimate, tv.std_error, w.copies_used)
            }).collect();
            let ok = res.iter().filter(|r| r.0 <= 0.25 + 3.0 * r.1).count();
            let mut errs: Vec<f64> = res.iter().map(|r| r.0).collect();
            errs.sort_by(f64::total_cmp);
            println!("wigner cw={cw}: success {ok}/60 median {:.3} p67 {:.3} copies {}", errs[30], errs[40], res[0].2);
        }
        other => eprintln!("unknown sweep {other:?} (unsq, pure, s1, passive, wigner)"),
    }
}
