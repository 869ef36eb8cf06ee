//! `gtl`: command-line front end for the Gaussian tomography toolkit.
//!
//! Exit status: 0 on success, 1 when a validation check or input state
//! fails, 2 on usage errors (bad flags, unreadable or malformed files).

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use gtl_core::divergences::{gaussian_kl, trace_distance_bounds, tv_bracket, GaussianDistribution};
use gtl_core::ensembles::{build_ensemble, classical_simulability_demo, sample_overlap_family, separation_report, EnsembleKind};
use gtl_core::fock::{cutoff_for_energy, oracle_metrics, MAX_CUTOFF};
use gtl_core::harness::{
    demo_sqrt_n_separation, resolve_workers, run_and_write, run_trial, summarize, trial_seed,
    write_records, Cell, ExperimentConfig, Strategy,
};
use gtl_core::io::{read_state_file, write_samples, write_state_file};
use gtl_core::linalg::op_norm_sym;
use gtl_core::measurement::GeneralDyneSeed;
use gtl_core::state::{fidelity, GaussianState};
use gtl_core::symplectic::{validate_covariance, williamson, CovarianceMatrix, VALIDITY_TOL};
use gtl_core::tomography::Calibration;
use gtl_core::validation::{validation_suite, Suite};
use gtl_core::Error;

#[derive(Parser, Debug)]
#[command(name = "gtl", version, about = "Gaussian-state tomography toolkit")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file (CSV or state file, depending on the command).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; GTL_WORKERS overrides.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// INI-style config; its keys fill in flags that are not given.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run self-check suites, or classify a state file.
    Validate(ValidateArgs),
    /// Learn one state and print an experiment row.
    Learn(LearnArgs),
    /// Distances and fidelities between two state files.
    Distance(DistanceArgs),
    /// Build a hard ensemble and report pairwise separations.
    Ensemble(EnsembleArgs),
    /// Run a seeded experiment grid from a config file.
    Experiment(ExperimentArgs),
    /// Canned demonstrations.
    Demo(DemoArgs),
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// symplectic, oracle, ensembles, identities or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Classify this state file instead of running a suite.
    #[arg(long)]
    state: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LearnArgs {
    /// alg-s1, heterodyne-baseline, pure, wigner or passive.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Energy cap.
    #[arg(long = "E")]
    energy: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Copy budget; omitted means the calibrated default.
    #[arg(long = "N")]
    budget: Option<u64>,
    /// Truth state file; a random state from the strategy's family otherwise.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Write every outcome as trial,copy,coordinates.
    #[arg(long)]
    dump_samples: Option<PathBuf>,
    /// Write the estimate as a state file.
    #[arg(long)]
    estimate: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DistanceArgs {
    a: PathBuf,
    b: PathBuf,
    /// Monte-Carlo draws for the trace-distance lower bound (0 skips).
    #[arg(long, default_value_t = 0)]
    mc_samples: u64,
    /// Fock cutoff for single-mode states; chosen from the energy otherwise.
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Args, Debug)]
struct EnsembleArgs {
    /// passive-c1, pure-c2, pure-scaled-c2.1, heterodyne-c3 or squeezed-pair-e1.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 18)]
    n: usize,
    #[arg(long, default_value_t = 32)]
    members: usize,
    #[arg(long, default_value_t = 0.27)]
    eps: f64,
    #[arg(long, default_value_t = 4.0)]
    lambda: f64,
    /// Squeezing of the single-mode pair.
    #[arg(long, default_value_t = 8.0)]
    a: f64,
    #[arg(long, default_value_t = 0.0)]
    phi: f64,
    /// Attempts at the overlap family before giving up.
    #[arg(long, default_value_t = 10_000)]
    max_tries: usize,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Overrides the config's trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Adds a wall-clock column (not reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug)]
struct DemoArgs {
    #[command(subcommand)]
    which: Demo,
}

#[derive(Subcommand, Debug)]
enum Demo {
    /// Photon-counting gap against Wigner TV for vacuum vs a slightly warm state.
    SqrtN {
        #[arg(long, value_delimiter = ',', default_value = "1,4,16,64")]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// General-dyne outcomes vs Wigner samples plus classical noise.
    Simulability {
        /// State file; a squeezed displaced single-mode state otherwise.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Seed covariance as a state file's sigma; heterodyne otherwise.
        #[arg(long)]
        dyne: Option<PathBuf>,
        #[arg(long, default_value_t = 20_000)]
        m: u64,
    },
}

enum Failure {
    Validation(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Io(_) | Error::Domain(_) | Error::Precondition(_) | Error::DimensionMismatch { .. } => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Validation(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult = std::result::Result<(), Failure>;

fn load_config(cli: &Cli) -> std::result::Result<Option<ExperimentConfig>, Failure> {
    cli.config.as_deref().map(ExperimentConfig::from_file).transpose().map_err(Failure::from)
}

fn seed_of(cli: &Cli, cfg: Option<&ExperimentConfig>) -> u64 {
    cli.seed.or(cfg.map(|c| c.seed)).unwrap_or(0)
}

fn validate(cli: &Cli, args: &ValidateArgs) -> CliResult {
    let cfg = load_config(cli)?;
    if let Some(path) = &args.state {
        let st = read_state_file(path)?;
        let v = validate_covariance(&CovarianceMatrix::new(st.sigma().clone())?, VALIDITY_TOL)?;
        let w = williamson(&CovarianceMatrix::new(st.sigma().clone())?)?;
        println!("modes: {}", st.n_modes());
        println!("class: {:?}", v.class);
        println!("symplectic spectrum: {:?}", w.nu);
        return if v.is_valid() {
            Ok(())
        } else {
            Err(Failure::Validation(format!("minimum symplectic eigenvalue {} < 1/2", v.min_nu)))
        };
    }
    let suite: Suite = args.suite.parse()?;
    let results = validation_suite(suite, seed_of(cli, cfg.as_ref()));
    let mut failed = 0;
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        Err(Failure::Validation(format!("{failed} of {} checks failed", results.len())))
    } else {
        Ok(())
    }
}

fn learn(cli: &Cli, args: &LearnArgs) -> CliResult {
    let cfg = load_config(cli)?;
    let cfg = cfg.as_ref();
    let truth: Option<GaussianState> = args.truth.as_deref().map(read_state_file).transpose()?;
    let strategy: Strategy = match (&args.strategy, cfg) {
        (Some(s), _) => s.parse()?,
        (None, Some(c)) => c.strategies[0],
        (None, None) => return Err(Failure::Usage("--strategy is required".into())),
    };
    let n = args
        .n
        .or(truth.as_ref().map(GaussianState::n_modes))
        .or(cfg.map(|c| c.modes[0]))
        .unwrap_or(1);
    let e = args.energy.or(cfg.map(|c| c.energies[0])).unwrap_or(4.0);
    let eps = args.eps.or(cfg.map(|c| c.eps[0])).unwrap_or(0.2);
    let delta = args.delta.or(cfg.map(|c| c.delta)).unwrap_or(1.0 / 3.0);
    let budget = args.budget.or(cfg.and_then(|c| c.budgets.first().copied())).filter(|&b| b > 0);
    let seed = seed_of(cli, cfg);
    let id = cfg.map_or("learn", |c| c.id.as_str());
    let cell = Cell { strategy, n, e, eps, budget };
    let outcome = run_trial(
        id,
        &cell,
        0,
        trial_seed(seed, 0, 0),
        delta,
        &Calibration::FROZEN,
        truth,
        args.dump_samples.is_some(),
        false,
    )?;
    if let (Some(path), Some(samples)) = (&args.dump_samples, &outcome.samples) {
        write_samples(0, samples, std::fs::File::create(path)?)?;
    }
    if let (Some(path), Some(est)) = (&args.estimate, &outcome.estimate) {
        write_state_file(est, path)?;
    }
    let mut buf = Vec::new();
    write_records(std::slice::from_ref(&outcome.record), seed, false, &mut buf)?;
    match &cli.out {
        Some(path) => append_rows(path, &buf)?,
        None => io::stdout().write_all(&buf)?,
    }
    if outcome.record.tags.starts_with("failed") {
        eprintln!("{}", outcome.record.tags);
    }
    Ok(())
}

/// Appends CSV text, dropping its comment and header lines when the file
/// already has content.
fn append_rows(path: &Path, csv_text: &[u8]) -> io::Result<()> {
    let existing = std::fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false);
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if !existing {
        return f.write_all(csv_text);
    }
    let text = String::from_utf8_lossy(csv_text);
    for line in text.lines().filter(|l| !l.starts_with('#')).skip(1) {
        writeln!(f, "{line}")?;
    }
    Ok(())
}

fn fock_cutoff_for(states: &[&GaussianState]) -> gtl_core::Result<usize> {
    let e = states
        .iter()
        .map(|s| op_norm_sym(s.sigma()) + 0.5 * s.mean().norm_squared())
        .fold(0.5, f64::max);
    Ok(cutoff_for_energy(e, 1e-9)?.max(16))
}

fn distance(cli: &Cli, args: &DistanceArgs) -> CliResult {
    let cfg = load_config(cli)?;
    let a = read_state_file(&args.a)?;
    let b = read_state_file(&args.b)?;
    if a.n_modes() != b.n_modes() {
        return Err(Error::DimensionMismatch { expected: a.n_modes(), found: b.n_modes() }.into());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed_of(cli, cfg.as_ref()));
    let br = trace_distance_bounds(&a, &b, args.mc_samples, &mut rng)?;
    let (wa, wb) = (GaussianDistribution::wigner(&a), GaussianDistribution::wigner(&b));
    let tv = tv_bracket(&wa, &wb)?;
    let mut out: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(io::stdout()),
    };
    writeln!(out, "metric,value,method")?;
    writeln!(out, "fidelity,{:.12e},exact", fidelity(&a, &b)?)?;
    writeln!(out, "trace_lower,{:.12e},{}", br.lower, br.lower_method)?;
    writeln!(out, "trace_upper,{:.12e},{}", br.upper, br.upper_method)?;
    writeln!(out, "wigner_tv_lower,{:.12e},{}", tv.lower, tv.lower_method)?;
    writeln!(out, "wigner_tv_upper,{:.12e},{}", tv.upper, tv.upper_method)?;
    writeln!(out, "wigner_kl,{:.12e},exact", gaussian_kl(&wa, &wb)?)?;
    if a.n_modes() == 1 {
        let d = match args.cutoff {
            Some(d) => d,
            None => fock_cutoff_for(&[&a, &b])?,
        };
        if d > MAX_CUTOFF {
            eprintln!("states too energetic for the Fock oracle (cutoff {d} > {MAX_CUTOFF})");
        } else {
            match oracle_metrics(&a, &b, d, 1e-9) {
                Ok(m) => {
                    writeln!(out, "fock_trace_distance,{:.12e},cutoff={d}", m.trace_distance)?;
                    writeln!(out, "fock_fidelity,{:.12e},{:?}", m.fidelity, m.fidelity_kind)?;
                    writeln!(out, "fock_relative_entropy,{:.12e},cutoff={d}", m.relative_entropy)?;
                }
                Err(e) => eprintln!("Fock oracle skipped: {e}"),
            }
        }
    }
    Ok(())
}

fn parse_kind(args: &EnsembleArgs) -> std::result::Result<EnsembleKind, Failure> {
    let eps = args.eps;
    Ok(match args.kind.as_str() {
        "passive-c1" | "passive" => EnsembleKind::PassiveC1 { eps },
        "pure-c2" | "pure" => EnsembleKind::PureC2 { eps },
        "pure-scaled-c2.1" | "pure-scaled" => EnsembleKind::PureScaledC2_1 { eps },
        "heterodyne-c3" | "heterodyne-hard" => EnsembleKind::HeterodyneHardC3 { eps, lambda: args.lambda },
        "squeezed-pair-e1" | "squeezed-pair" => EnsembleKind::SqueezedPairE1 { eps, a: args.a, phi: args.phi },
        other => {
            return Err(Failure::Usage(format!(
                "unknown ensemble kind {other:?} (expected passive-c1, pure-c2, pure-scaled-c2.1, heterodyne-c3 or squeezed-pair-e1)"
            )))
        }
    })
}

fn ensemble(cli: &Cli, args: &EnsembleArgs) -> CliResult {
    let cfg = load_config(cli)?;
    let kind = parse_kind(args)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed_of(cli, cfg.as_ref()));
    let family = if kind.needs_family() {
        Some(sample_overlap_family(args.n, args.members, args.max_tries, &mut rng)?)
    } else {
        None
    };
    let states = build_ensemble(kind, family.as_ref())?;
    let report = separation_report(kind, &states, family.as_ref())?;
    let mut w = csv::Writer::from_writer(match &cli.out {
        Some(p) => Box::new(std::fs::File::create(p)?) as Box<dyn Write>,
        None => Box::new(io::stdout()),
    });
    let csv_err = |e: csv::Error| Failure::Usage(e.to_string());
    w.write_record(["pair", "D_lower", "KL", "overlap"]).map_err(csv_err)?;
    for p in &report.pairs {
        w.write_record([
            format!("{}-{}", p.a, p.b),
            format!("{:.12e}", p.d_lower),
            format!("{:.12e}", p.kl),
            format!("{:.12e}", p.overlap),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    eprintln!(
        "{}: {} states, min D_lower {:.6e} (promised {:.6e}), max {} {:.6e}",
        kind.name(),
        states.len(),
        report.min_d_lower,
        report.promised,
        report.kl_label,
        report.max_kl
    );
    if report.min_d_lower + 1e-10 < report.promised {
        return Err(Failure::Validation("separation below the promised value".into()));
    }
    Ok(())
}

fn experiment(cli: &Cli, args: &ExperimentArgs) -> CliResult {
    let Some(mut cfg) = load_config(cli)? else {
        return Err(Failure::Usage("experiment needs --config <file>".into()));
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = args.trials {
        cfg.trials = t;
    }
    if cli.out.is_some() {
        cfg.output = cli.out.clone();
    }
    cfg.timing |= args.timing;
    cfg.workers = resolve_workers(cli.workers.unwrap_or(cfg.workers));
    let (records, text) = run_and_write(&cfg)?;
    if cfg.output.is_none() {
        io::stdout().write_all(&text)?;
    }
    for s in summarize(&cfg, &records) {
        eprintln!(
            "{} n={} E={} eps={} N={}: {}/{} within eps, median error {:.4}, median copies {}",
            s.cell.strategy.name(),
            s.cell.n,
            s.cell.e,
            s.cell.eps,
            s.cell.budget.map_or("default".to_string(), |b| b.to_string()),
            s.successes,
            s.trials,
            s.median_error,
            s.median_copies
        );
    }
    Ok(())
}

fn demo(cli: &Cli, args: &DemoArgs) -> CliResult {
    let cfg = load_config(cli)?;
    let seed = seed_of(cli, cfg.as_ref());
    let mut out: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(io::stdout()),
    };
    match &args.which {
        Demo::SqrtN { n_list, eps, samples } => {
            let shards = resolve_workers(cli.workers.unwrap_or(1)).max(8) as u64;
            let rows = demo_sqrt_n_separation(n_list, *eps, *samples, seed, shards)?;
            writeln!(out, "n,D_lower,tv_estimate,tv_std_error,ratio,quarter_sqrt_n")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{:.8},{:.8},{:.8},{:.6},{:.6}",
                    r.n,
                    r.d_lower,
                    r.tv_estimate,
                    r.tv_std_error,
                    r.ratio,
                    0.25 * (r.n as f64).sqrt()
                )?;
            }
        }
        Demo::Simulability { state, dyne, m } => {
            let st = match state {
                Some(p) => read_state_file(p)?,
                None => GaussianState::single_mode([0.4, -1.0], 0.1, 2.5, 0.3)?,
            };
            let seed_cov = match dyne {
                Some(p) => GeneralDyneSeed::from_matrix(read_state_file(p)?.sigma().clone())?,
                None => GeneralDyneSeed::heterodyne(st.n_modes()),
            };
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            let d = classical_simulability_demo(&st, &seed_cov, *m, &mut rng)?;
            writeln!(out, "coordinate,ks_statistic,p_value")?;
            for (i, (stat, p)) in d.ks.iter().enumerate() {
                writeln!(out, "{i},{stat:.6},{p:.6}")?;
            }
            eprintln!(
                "oracle copies {}, simulated draws {}, consistent: {}",
                d.copies_measured, d.copies_simulated, d.consistent
            );
            if !d.consistent {
                return Err(Failure::Validation("measured and simulated outcomes differ".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = match &cli.command {
        Command::Validate(a) => validate(&cli, a),
        Command::Learn(a) => learn(&cli, a),
        Command::Distance(a) => distance(&cli, a),
        Command::Ensemble(a) => ensemble(&cli, a),
        Command::Experiment(a) => experiment(&cli, a),
        Command::Demo(a) => demo(&cli, a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("gtl: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("gtl: {msg}");
            eprintln!("run `gtl --help` for usage");
            ExitCode::from(2)
        }
    }
}
