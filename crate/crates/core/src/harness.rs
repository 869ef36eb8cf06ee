//! Experiment orchestration: INI-style configs, seeded trials over a grid of
//! (strategy, n, E, ε, N) cells, schema-versioned CSV output, and the √n
//! separation demo.
//!
//! Every trial draws from its own ChaCha20 stream derived from (master seed,
//! cell index, trial index), and rows are written in grid order, so output
//! does not depend on the worker count.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::divergences::{trace_distance_bounds, trace_distance_pure, tv_monte_carlo, tv_monte_carlo_sharded, GaussianDistribution};
use crate::error::{Error, Result};
use crate::linalg::{Mat, Vector};
use crate::measurement::StateOracle;
use crate::state::{vacuum_probability, GaussianState};
use crate::symplectic::{random_covariance, CovarianceKind};
use crate::tomography::{
    heterodyne_baseline_with_budget, learn_passive_purified_with, learn_pure_with, learn_single_mode_nonadaptive,
    learn_wigner_with, pure_stage_copies, AlgS1Params, Calibration, Diagnostics, S1Branch,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Monte-Carlo draws used to score Wigner estimates.
pub const WIGNER_SCORE_SAMPLES: u64 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    AlgS1,
    HeterodyneBaseline,
    Pure,
    Wigner,
    Passive,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::AlgS1,
        Strategy::HeterodyneBaseline,
        Strategy::Pure,
        Strategy::Wigner,
        Strategy::Passive,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::AlgS1 => "alg-s1",
            Self::HeterodyneBaseline => "heterodyne-baseline",
            Self::Pure => "pure",
            Self::Wigner => "wigner",
            Self::Passive => "passive",
        }
    }

    /// How the error column is measured.
    pub fn metric(&self) -> &'static str {
        match self {
            Self::Pure => "trace-exact",
            Self::Wigner => "wigner-tv-mc",
            _ => "trace-upper",
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "alg-s1" | "s1" => Ok(Self::AlgS1),
            "heterodyne-baseline" | "baseline" | "heterodyne" => Ok(Self::HeterodyneBaseline),
            "pure" => Ok(Self::Pure),
            "wigner" => Ok(Self::Wigner),
            "passive" => Ok(Self::Passive),
            other => Err(Error::Parse(format!(
                "unknown strategy {other:?} (expected one of alg-s1, heterodyne-baseline, pure, wigner, passive)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub id: String,
    pub strategies: Vec<Strategy>,
    pub modes: Vec<usize>,
    pub energies: Vec<f64>,
    pub eps: Vec<f64>,
    /// Copy budgets; empty means each strategy's own calibrated budget.
    pub budgets: Vec<u64>,
    pub trials: usize,
    pub seed: u64,
    pub delta: f64,
    pub output: Option<PathBuf>,
    pub workers: usize,
    /// Adds a wall-clock column, which makes output non-reproducible.
    pub timing: bool,
    pub calibration: Calibration,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            id: "experiment".into(),
            strategies: vec![Strategy::Pure],
            modes: vec![1],
            energies: vec![4.0],
            eps: vec![0.2],
            budgets: Vec::new(),
            trials: 1,
            seed: 0,
            delta: 1.0 / 3.0,
            output: None,
            workers: 1,
            timing: false,
            calibration: Calibration::FROZEN,
        }
    }
}

fn parse_num(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("{key}: not a number: {v:?}")))
}

fn parse_count(key: &str, v: &str) -> Result<u64> {
    let x = parse_num(key, v)?;
    if x < 0.0 || x.fract() != 0.0 || x > 2f64.powi(63) {
        return Err(Error::Parse(format!("{key}: expected a non-negative integer, got {v:?}")));
    }
    Ok(x as u64)
}

fn parse_list<T>(key: &str, v: &str, f: impl Fn(&str, &str) -> Result<T>) -> Result<Vec<T>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| f(key, s)).collect()
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Parse(format!("{key}: expected a boolean, got {v:?}"))),
    }
}

impl ExperimentConfig {
    /// Flat `key = value` text; an optional `[experiment]` header is allowed.
    /// Lists are comma-separated and numbers may use scientific notation.
    pub fn from_ini_str(text: &str) -> Result<Self> {
        let ini = ini::Ini::load_from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut cfg = Self::default();
        let mut budgets_set = false;
        for (section, props) in ini.iter() {
            if let Some(name) = section {
                if name != "experiment" {
                    return Err(Error::Parse(format!("unknown section [{name}]")));
                }
            }
            for (key, v) in props.iter() {
                match key {
                    "id" => cfg.id = v.trim().to_string(),
                    "strategies" | "strategy" => cfg.strategies = parse_list(key, v, |_, s| s.parse())?,
                    "n" | "modes" => {
                        cfg.modes = parse_list(key, v, |k, s| parse_count(k, s).map(|x| x as usize))?
                    }
                    "E" | "energy" | "energies" => cfg.energies = parse_list(key, v, parse_num)?,
                    "eps" => cfg.eps = parse_list(key, v, parse_num)?,
                    "N" | "budget" | "budgets" => {
                        budgets_set = true;
                        cfg.budgets = parse_list(key, v, parse_count)?;
                    }
                    "trials" => cfg.trials = parse_count(key, v)? as usize,
                    "seed" => cfg.seed = parse_count(key, v)?,
                    "delta" => cfg.delta = parse_num(key, v)?,
                    "output" | "out" => cfg.output = Some(PathBuf::from(v.trim())),
                    "workers" => cfg.workers = parse_count(key, v)? as usize,
                    "timing" => cfg.timing = parse_bool(key, v)?,
                    other => return Err(Error::Parse(format!("unknown key {other:?}"))),
                }
            }
        }
        if budgets_set && cfg.budgets.iter().all(|&b| b == 0) {
            cfg.budgets.clear();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_ini_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() || self.modes.is_empty() || self.energies.is_empty() || self.eps.is_empty() {
            return Err(Error::Domain("strategy, n, E and eps grids must be non-empty".into()));
        }
        if self.trials == 0 {
            return Err(Error::Domain("trials must be at least 1".into()));
        }
        if self.modes.contains(&0) {
            return Err(Error::Domain("mode counts must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Domain(format!("delta must lie in (0, 1), got {}", self.delta)));
        }
        if self.eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::Domain("eps values must lie in (0, 1)".into()));
        }
        if self.energies.iter().any(|&e| !(e >= 0.5) || !e.is_finite()) {
            return Err(Error::Domain("E values must be finite and ≥ ½".into()));
        }
        Ok(())
    }

    pub fn cells(&self) -> Vec<Cell> {
        let budgets: Vec<Option<u64>> = if self.budgets.is_empty() {
            vec![None]
        } else {
            self.budgets.iter().map(|&b| (b > 0).then_some(b)).collect()
        };
        let mut out = Vec::new();
        for &strategy in &self.strategies {
            for &n in &self.modes {
                for &e in &self.energies {
                    for &eps in &self.eps {
                        for &budget in &budgets {
                            out.push(Cell { strategy, n, e, eps, budget });
                        }
                    }
                }
            }
        }
        out
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub strategy: Strategy,
    pub n: usize,
    pub e: f64,
    pub eps: f64,
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub strategy: Strategy,
    pub n: usize,
    pub e: f64,
    pub eps: f64,
    /// Copies the oracle handed out during the trial.
    pub copies: u64,
    pub trial: usize,
    pub error: f64,
    pub metric: &'static str,
    pub success: bool,
    pub tags: String,
    pub seed: u64,
    pub wall_ms: Option<f64>,
}

/// Seed of trial `trial` in cell `cell`: the first word of ChaCha20(master)
/// on stream (cell << 32 | trial).
pub fn trial_seed(master: u64, cell: usize, trial: usize) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream(((cell as u64) << 32) | trial as u64);
    rng.next_u64()
}

fn uniform_mean<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    Vector::from_fn(2 * n, |_, _| 2.0 * rng.random::<f64>() - 1.0)
}

/// Test state for a strategy: squeezed pure single-mode states at the energy
/// cap for the single-mode protocol (and the baseline at n = 1), random pure,
/// mixed and passive states otherwise.
pub fn sample_truth<R: Rng + ?Sized>(strategy: Strategy, n: usize, e: f64, rng: &mut R) -> Result<GaussianState> {
    match strategy {
        Strategy::AlgS1 | Strategy::HeterodyneBaseline if n == 1 => {
            let theta = rng.random::<f64>() * std::f64::consts::PI;
            let mu = uniform_mean(1, rng);
            GaussianState::single_mode([mu[0], mu[1]], 0.5 / e, 0.5 * e, theta)
        }
        Strategy::AlgS1 => Err(Error::Domain("alg-s1 is single-mode".into())),
        Strategy::HeterodyneBaseline | Strategy::Pure => {
            let cov = random_covariance(n, e, CovarianceKind::Pure, rng)?;
            GaussianState::new(uniform_mean(n, rng), cov)
        }
        Strategy::Wigner => {
            let cov = random_covariance(n, e, CovarianceKind::Mixed, rng)?;
            GaussianState::new(uniform_mean(n, rng), cov)
        }
        Strategy::Passive => GaussianState::new(Vector::zeros(2 * n), random_covariance(n, e, CovarianceKind::Passive, rng)?),
    }
}

fn tags_of(d: &Diagnostics) -> String {
    let mut parts: Vec<String> = Vec::new();
    match d.branch {
        Some(S1Branch::Heterodyne) => parts.push("branch=heterodyne".into()),
        Some(S1Branch::Squeezed) => parts.push("branch=squeezed".into()),
        None => {}
    }
    if let Some(k) = d.kappa_hat {
        parts.push(format!("kappa={k:.4e}"));
    }
    if let Some(r) = d.unsqueeze_rounds {
        parts.push(format!("rounds={r}"));
    }
    for s in &d.stages {
        parts.push(format!("{}={}", s.stage, s.copies));
    }
    parts.join(";")
}

/// Final-stage constant that spends about `budget` copies.
fn stage_constant_for(budget: u64, n_eff: usize, eps: f64, delta: f64) -> f64 {
    budget as f64 / pure_stage_copies(n_eff, eps, delta / 2.0, 1.0) as f64
}

/// Outcome of one trial, plus the raw samples when asked for.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub record: ExperimentRecord,
    pub samples: Option<Vec<Vec<f64>>>,
    pub truth: GaussianState,
    pub estimate: Option<GaussianState>,
}

/// Runs one trial of `cell` from `seed`. The truth is `truth` when given,
/// otherwise drawn by [`sample_truth`]. Algorithm failures become a
/// success = false row with error 1.
pub fn run_trial(
    experiment: &str,
    cell: &Cell,
    trial: usize,
    seed: u64,
    delta: f64,
    cal: &Calibration,
    truth: Option<GaussianState>,
    keep_samples: bool,
    timing: bool,
) -> Result<TrialOutcome> {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let truth = match truth {
        Some(t) => t,
        None => sample_truth(cell.strategy, cell.n, cell.e, &mut rng)?,
    };
    if truth.n_modes() != cell.n {
        return Err(Error::DimensionMismatch { expected: cell.n, found: truth.n_modes() });
    }
    let mut oracle = StateOracle::from_rng(truth.clone(), ChaCha20Rng::from_rng(&mut rng));
    if keep_samples {
        oracle.record_samples();
    }
    let (n, e, eps) = (cell.n, cell.e, cell.eps);
    let mut cal = *cal;
    let learned: Result<(GaussianState, u64, String, Option<GaussianDistribution>)> = (|| match cell.strategy {
        Strategy::AlgS1 => {
            let mut params = AlgS1Params::calibrated_with(e, eps, &cal)?;
            if let Some(b) = cell.budget {
                let t = (b.saturating_sub(params.n0) / (2 * params.k as u64)).max(1);
                params = AlgS1Params::new(params.k, t, params.n0, e)?;
            }
            let r = learn_single_mode_nonadaptive(&mut oracle, &params, eps, &mut rng)?;
            Ok((r.estimate, r.copies_used, tags_of(&r.diagnostics), None))
        }
        Strategy::HeterodyneBaseline => {
            let budget = cell
                .budget
                .unwrap_or_else(|| crate::tomography::even_ceil(cal.baseline * (n * n) as f64 / (eps * eps)));
            let r = heterodyne_baseline_with_budget(&mut oracle, budget)?;
            Ok((r.estimate, r.copies_used, tags_of(&r.diagnostics), None))
        }
        Strategy::Pure => {
            if let Some(b) = cell.budget {
                cal.pure_stage = stage_constant_for(b, n, eps, delta);
            }
            let r = learn_pure_with(&mut oracle, n, e, eps, delta, &cal)?;
            Ok((r.estimate, r.copies_used, tags_of(&r.diagnostics), None))
        }
        Strategy::Wigner => {
            if let Some(b) = cell.budget {
                cal.wigner_stage = stage_constant_for(b, n, eps, delta);
            }
            let w = learn_wigner_with(&mut oracle, n, e, eps, delta, &cal)?;
            let est = GaussianState::from_matrices(w.distribution.mean().clone(), w.distribution.covariance().clone())
                .unwrap_or_else(|_| truth.clone());
            Ok((est, w.copies_used, tags_of(&w.diagnostics), Some(w.distribution)))
        }
        Strategy::Passive => {
            if let Some(b) = cell.budget {
                cal.pure_stage = stage_constant_for(b, 2 * n, eps, delta);
            }
            let r = learn_passive_purified_with(&mut oracle, n, e, eps, delta, &mut rng, &cal)?;
            Ok((r.estimate, r.copies_used, tags_of(&r.diagnostics), None))
        }
    })();
    let copies = oracle.consumed();
    let (error, tags, estimate) = match learned {
        Ok((est, used, tags, wigner)) => {
            debug_assert_eq!(used, copies, "ledger mismatch");
            let err = match cell.strategy {
                Strategy::Pure => trace_distance_pure(&est, &truth)?,
                Strategy::Wigner => {
                    let dist = wigner.expect("wigner strategy returns a distribution");
                    tv_monte_carlo(&dist, &GaussianDistribution::wigner(&truth), WIGNER_SCORE_SAMPLES, &mut rng)?.estimate
                }
                _ => trace_distance_bounds(&est, &truth, 0, &mut rng)?.upper,
            };
            (err, tags, Some(est))
        }
        Err(err) => (1.0, format!("failed: {err}"), None),
    };
    Ok(TrialOutcome {
        record: ExperimentRecord {
            experiment: experiment.to_string(),
            strategy: cell.strategy,
            n,
            e,
            eps,
            copies,
            trial,
            error,
            metric: cell.strategy.metric(),
            success: estimate.is_some() && error <= eps,
            tags,
            seed,
            wall_ms: timing.then(|| start.elapsed().as_secs_f64() * 1e3),
        },
        samples: keep_samples.then(|| oracle.take_samples()),
        truth,
        estimate,
    })
}

/// Worker count: `GTL_WORKERS` when set, else the requested value, at least 1.
pub fn resolve_workers(requested: usize) -> usize {
    std::env::var("GTL_WORKERS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(requested)
        .max(1)
}

/// All cell × trial records in grid order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let cells = cfg.cells();
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Io(format!("thread pool: {e}")))?;
    pool.install(|| {
        jobs.par_iter()
            .map(|&(c, t)| {
                let seed = trial_seed(cfg.seed, c, t);
                run_trial(&cfg.id, &cells[c], t, seed, cfg.delta, &cfg.calibration, None, false, cfg.timing)
                    .map(|o| o.record)
            })
            .collect()
    })
}

pub const CSV_COLUMNS: [&str; 12] = [
    "experiment", "strategy", "n", "E", "eps", "N", "trial", "error", "metric", "success", "tags", "seed",
];

/// `# schema=1` and a provenance comment, then the header and one row per
/// record. The timing column appears only when `timing` is set.
pub fn write_records<W: Write>(records: &[ExperimentRecord], master_seed: u64, timing: bool, mut w: W) -> Result<()> {
    writeln!(w, "# schema={SCHEMA_VERSION}")?;
    writeln!(w, "# master_seed={master_seed}")?;
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    if timing {
        header.push("wall_ms");
    }
    out.write_record(&header).map_err(|e| Error::Io(e.to_string()))?;
    for r in records {
        let mut row = vec![
            r.experiment.clone(),
            r.strategy.name().to_string(),
            r.n.to_string(),
            r.e.to_string(),
            r.eps.to_string(),
            r.copies.to_string(),
            r.trial.to_string(),
            format!("{:.10e}", r.error),
            r.metric.to_string(),
            r.success.to_string(),
            r.tags.clone(),
            r.seed.to_string(),
        ];
        if timing {
            row.push(format!("{:.3}", r.wall_ms.unwrap_or(f64::NAN)));
        }
        out.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Runs the experiment and writes it to `cfg.output` (or returns the CSV
/// text when no output is set).
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<(Vec<ExperimentRecord>, Vec<u8>)> {
    let records = run_experiment(cfg)?;
    let mut buf = Vec::new();
    write_records(&records, cfg.seed, cfg.timing, &mut buf)?;
    if let Some(path) = &cfg.output {
        std::fs::write(path, &buf).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    }
    Ok((records, buf))
}

/// Per-cell success rate and median error, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub cell: Cell,
    pub trials: usize,
    pub successes: usize,
    pub median_error: f64,
    pub median_copies: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

pub fn summarize(cfg: &ExperimentConfig, records: &[ExperimentRecord]) -> Vec<CellSummary> {
    let t = cfg.trials;
    cfg.cells()
        .into_iter()
        .zip(records.chunks(t))
        .map(|(cell, rows)| CellSummary {
            cell,
            trials: rows.len(),
            successes: rows.iter().filter(|r| r.success).count(),
            median_error: median(rows.iter().map(|r| r.error).collect()),
            median_copies: median(rows.iter().map(|r| r.copies as f64).collect()),
        })
        .collect()
}

/// One row of the √n separation table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtNRow {
    pub n: usize,
    /// 1 − (1 + ε/2n)^{−n}: the photon-counting gap between vacuum and
    /// the thermal state ½(1+ε/n)I.
    pub d_lower: f64,
    pub tv_estimate: f64,
    pub tv_std_error: f64,
    /// d_lower / tv_estimate.
    pub ratio: f64,
}

/// Vacuum against ½(1+ε/n)I on n modes: an analytic trace-distance lower
/// bound next to a Monte-Carlo estimate of the Wigner TV.
pub fn demo_sqrt_n_separation(n_list: &[usize], eps: f64, samples: u64, seed: u64, shards: u64) -> Result<Vec<SqrtNRow>> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            if n == 0 {
                return Err(Error::Domain("n must be at least 1".into()));
            }
            let vac = GaussianState::vacuum(n);
            let warm = GaussianState::centered(Mat::identity(2 * n, 2 * n) * (0.5 * (1.0 + eps / n as f64)))?;
            let d_lower = vacuum_probability(&vac) - vacuum_probability(&warm);
            let tv = tv_monte_carlo_sharded(
                &GaussianDistribution::wigner(&vac),
                &GaussianDistribution::wigner(&warm),
                samples,
                seed.wrapping_add(i as u64),
                shards,
            )?;
            Ok(SqrtNRow {
                n,
                d_lower,
                tv_estimate: tv.estimate,
                tv_std_error: tv.std_error,
                ratio: d_lower / tv.estimate,
            })
        })
        .collect()
}
