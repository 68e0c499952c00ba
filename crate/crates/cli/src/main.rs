//! Command-line frontend: run experiments from config files, construct and
//! verify sources and codes, and emit CSV/JSON artifacts.
//!
//! Exit codes: 0 on success/pass, 1 on a domain failure (bound violated,
//! certification failed), 2 on usage or parse errors. Every command is
//! deterministic given `--seed`; omitting it draws one and prints it.
//! `QKDLAB_THREADS` caps the worker pool.

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use qkdlab_core::adversary::{helstrom_bound, optimal_binary_measurement};
use qkdlab_core::analysis::{
    self, eps1_decay_scan, key_independence_check, reliability_experiment, run_batch,
};
use qkdlab_core::codes::{
    asymptotic_rate, binary_entropy, build_privacy_matrix, gilbert_varshamov_construct,
    joint_min_weight, Gf2Matrix,
};
use qkdlab_core::config::SessionConfig;
use qkdlab_core::protocol::{self, block_params, validate_params, ProtocolMode};
use qkdlab_core::quantum::{sample_povm, DensityMatrix};
use qkdlab_core::source::{verify_certificate, SourceSpec};
use qkdlab_core::BitString;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qkdlab", version, about = "Key-distribution simulation and bound verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Source construction and certification.
    Source {
        #[command(subcommand)]
        action: SourceAction,
    },
    /// Print the asymptotic key rate for the given operating point.
    Keyrate(KeyrateArgs),
    /// Code constructions.
    Codes {
        #[command(subcommand)]
        action: CodesAction,
    },
    /// Run a batch of sessions from a config file and emit CSV.
    Simulate(SimulateArgs),
    /// Verify a family of analytic bounds numerically.
    Bounds(BoundsArgs),
    /// State-discrimination experiment against the multi-copy ceiling.
    Distinguish(DistinguishArgs),
    /// Randomized brute-force key-independence instances.
    Independence(IndependenceArgs),
}

#[derive(Subcommand)]
enum SourceAction {
    /// Build the source described by a JSON spec and verify its certificate.
    Verify { path: PathBuf },
}

#[derive(Args)]
struct KeyrateArgs {
    #[arg(long)]
    delta_p: f64,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
}

#[derive(Subcommand)]
enum CodesAction {
    /// Greedy minimum-distance construction.
    Gv {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Privacy-amplification rows against a parity check.
    Pa {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d_min: usize,
        /// JSON file with parity rows; empty parity check when absent.
        #[arg(long)]
        parity: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config protocol mode.
    #[arg(long, value_parser = parse_mode)]
    mode: Option<ProtocolMode>,
    /// Write hex-packed transcript dumps (JSON array) for the whole batch.
    #[arg(long)]
    transcripts: Option<PathBuf>,
}

fn parse_mode(text: &str) -> Result<ProtocolMode, String> {
    match text {
        "bb84" => Ok(ProtocolMode::Bb84),
        "bb84m" => Ok(ProtocolMode::Bb84M),
        "bb84mm" => Ok(ProtocolMode::Bb84MM),
        other => Err(format!("unknown mode {other:?} (expected bb84|bb84m|bb84mm)")),
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    Reliability,
    Tails,
    Privacy,
}

#[derive(Args)]
struct BoundsArgs {
    kind: BoundKind,
    #[arg(long)]
    seed: Option<u64>,
    /// Tuples for `tails`, sessions per grid point for `reliability`.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one CSV row per parameter point.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct DistinguishArgs {
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 8)]
    m_max: u32,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IndependenceArgs {
    #[arg(long, default_value_t = 100)]
    instances: u64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Domain failure: bound violated, certification failed.
struct DomainFailure(String);

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("QKDLAB_THREADS") {
        if let Ok(k) = threads.trim().parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(DomainFailure(msg))) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

/// Outer error = usage/parse (exit 2); inner = domain failure (exit 1).
fn dispatch(cli: Cli) -> Result<std::result::Result<(), DomainFailure>> {
    match cli.command {
        Command::Source { action } => match action {
            SourceAction::Verify { path } => cmd_source_verify(&path),
        },
        Command::Keyrate(args) => cmd_keyrate(args),
        Command::Codes { action } => cmd_codes(action),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Distinguish(args) => cmd_distinguish(args),
        Command::Independence(args) => cmd_independence(args),
    }
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None => {
            let drawn = rand::random::<u64>();
            println!("seed: {drawn}");
            drawn
        }
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_source_verify(path: &PathBuf) -> Result<std::result::Result<(), DomainFailure>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let spec: SourceSpec = serde_json::from_str(&text).context("parsing source spec")?;
    let (model, cert) = spec.build().context("building source")?;
    let tol = spec.certification_tolerance();
    let report = verify_certificate(&model, &cert, tol).context("running verifier")?;
    println!("condition  residual      pass  description");
    for check in &report.checks {
        println!(
            "{:<9}  {:<12.3e}  {:<4}  {}",
            check.label,
            check.residual,
            if check.pass { "yes" } else { "NO" },
            check.description
        );
    }
    println!(
        "beta_qp: claimed {:.6e}, recomputed {:.6e}",
        report.claimed_beta, report.recomputed_beta
    );
    println!(
        "gamma_qp: claimed {:.6e}, recomputed {:.6e}",
        report.claimed_gamma, report.recomputed_gamma
    );
    println!("tolerance: {:.1e}  overall: {}", tol, if report.pass { "PASS" } else { "FAIL" });
    if report.pass {
        Ok(Ok(()))
    } else {
        Ok(Err(DomainFailure(format!("certificate conditions failed: {:?}", report.failed_labels()))))
    }
}

fn cmd_keyrate(args: KeyrateArgs) -> Result<std::result::Result<(), DomainFailure>> {
    let h1_arg = 2.0 * (args.delta_p + args.eps);
    let h2_arg = 2.0 * (args.delta_p + args.beta + 0.5 * args.gamma + 1.5 * args.eps);
    match asymptotic_rate(args.delta_p, args.eps, args.beta, args.gamma) {
        Ok(rate) => {
            let h1 = binary_entropy(h1_arg).expect("argument checked by the rate call");
            let h2 = binary_entropy(h2_arg).expect("argument checked by the rate call");
            println!("H2({h1_arg:.6}) = {h1:.6}");
            println!("H2({h2_arg:.6}) = {h2:.6}");
            if rate > 0.0 {
                println!("rate: {rate:.4}");
            } else {
                println!("rate: {rate:.4} (no key at this operating point)");
            }
            Ok(Ok(()))
        }
        Err(err) => Ok(Err(DomainFailure(format!("parameters outside asymptotic regime: {err}")))),
    }
}

fn cmd_codes(action: CodesAction) -> Result<std::result::Result<(), DomainFailure>> {
    match action {
        CodesAction::Gv { n, t, seed, out } => {
            let seed = resolve_seed(seed);
            let code = match gilbert_varshamov_construct(n, t, seed) {
                Ok(code) => code,
                Err(err) => return Ok(Err(DomainFailure(format!("construction failed: {err}")))),
            };
            let distance = code.minimum_distance().ok();
            let doc = serde_json::json!({
                "n": code.length(),
                "k": code.dimension(),
                "r": code.redundancy(),
                "t_max": code.t_max(),
                "minimum_distance": distance,
                "parity_check": code.parity_check(),
                "seed": seed,
            });
            write_out(&out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
            Ok(Ok(()))
        }
        CodesAction::Pa { n, m, d_min, parity, seed, out } => {
            let seed = resolve_seed(seed);
            let f = match parity {
                Some(path) => {
                    let text = fs::read_to_string(&path)
                        .with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str::<Gf2Matrix>(&text).context("parsing parity rows")?
                }
                None => Gf2Matrix::empty(n),
            };
            if f.cols() != n {
                return Err(anyhow!("parity rows have width {}, expected {n}", f.cols()));
            }
            let pa = match build_privacy_matrix(&f, d_min, m, seed) {
                Ok(pa) => pa,
                Err(err) => return Ok(Err(DomainFailure(format!("construction failed: {err}")))),
            };
            let doc = serde_json::json!({
                "n": n,
                "m": pa.rows(),
                "d_w": pa.d_w(),
                "rows": pa.matrix(),
                "seed": seed,
            });
            write_out(&out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
            Ok(Ok(()))
        }
    }
}

fn cmd_simulate(args: SimulateArgs) -> Result<std::result::Result<(), DomainFailure>> {
    let text = fs::read_to_string(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = SessionConfig::from_json(&text).context("parsing session config")?;
    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(mode) = args.mode {
        config.params.mode = mode;
    }
    let fallback = match config.seed {
        Some(s) => s,
        None => resolve_seed(None),
    };
    let built = config.build(fallback).context("building session")?;
    let validation = validate_params(&built.params, &built.certificate);
    if !validation.pass && !built.allow_invalid_params {
        return Ok(Err(DomainFailure(format!(
            "operating conditions failed: {}",
            validation.summary()
        ))));
    }
    let outcomes = run_batch(
        &built.params,
        &built.source,
        &built.certificate,
        &built.channel,
        &built.attack,
        built.sessions,
        false,
    )
    .context("running sessions")?;

    let mut csv = String::from(protocol::CSV_HEADER);
    csv.push('\n');
    for (i, outcome) in outcomes.iter().enumerate() {
        let seed = protocol::session_seed(built.params.master_seed, i as u64);
        csv.push_str(&outcome.csv_row(seed));
        csv.push('\n');
    }
    write_out(&args.out, &csv)?;
    if let Some(path) = &args.transcripts {
        let dumps: Vec<serde_json::Value> =
            outcomes.iter().map(|o| o.transcript.to_json()).collect();
        fs::write(path, serde_json::to_string_pretty(&dumps)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }

    let aborts = outcomes
        .iter()
        .filter(|o| o.status != qkdlab_core::protocol::SessionStatus::Completed)
        .count();
    let mean_err = analysis::mean_test_error_rate(&outcomes, built.params.block_size)
        .map_or("n/a".to_string(), |v| format!("{v:.6}"));
    let agreed = outcomes.iter().filter(|o| o.key_equal() == Some(true)).count();
    let completed = outcomes.len() - aborts;
    let agreement = if completed > 0 {
        format!("{:.6}", agreed as f64 / completed as f64)
    } else {
        "n/a".to_string()
    };
    println!(
        "sessions={} aborts={aborts} mean_d_sp_frac={mean_err} key_agreement={agreement} seed={}",
        outcomes.len(),
        built.seed
    );
    Ok(Ok(()))
}

fn cmd_bounds(args: BoundsArgs) -> Result<std::result::Result<(), DomainFailure>> {
    let seed = resolve_seed(args.seed);
    match args.kind {
        BoundKind::Tails => {
            let tuples = args.trials.unwrap_or(200);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut violations = 0u64;
            let mut worst_ratio = 0.0f64;
            use rand::Rng;
            for _ in 0..tuples {
                let r = 0.05 + 0.75 * rng.random::<f64>();
                let p = r + (0.94 - r) * rng.random::<f64>();
                let t = (1.0 - p) * (0.05 + 0.9 * rng.random::<f64>());
                if p + t >= 1.0 {
                    continue;
                }
                let n_r = 1 + (rng.random::<u64>() % 20) as usize;
                let n_p = 1 + (rng.random::<u64>() % (40 - n_r as u64)) as usize;
                let (exact, bound) =
                    analysis::binomial_tail_bound(p, r, t, n_r, n_p).context("tail evaluation")?;
                if exact > bound + 1e-12 {
                    violations += 1;
                }
                if bound > 0.0 {
                    worst_ratio = worst_ratio.max(exact / bound);
                }
            }
            let doc = serde_json::json!({
                "kind": "tails",
                "tuples": tuples,
                "violations": violations,
                "worst_ratio": worst_ratio,
                "pass": violations == 0,
                "seed": seed,
            });
            write_out(&args.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
            if violations == 0 {
                Ok(Ok(()))
            } else {
                Ok(Err(DomainFailure(format!("{violations} tail-bound violations"))))
            }
        }
        BoundKind::Reliability => {
            let sessions = args.trials.unwrap_or(2000);
            let (src, cert) = qkdlab_core::source::ideal_bb84_source();
            let mut reports = Vec::new();
            let mut csv = String::from("n,q,trials,empirical,bound,sigma,pass\n");
            let mut all_pass = true;
            for (n, m) in [(200usize, 2usize), (500, 4), (1000, 8)] {
                let delta_p = 3.0 / n as f64;
                let eps = 1.0 / n as f64;
                let params = block_params(n, 10, m, delta_p, eps, 1.0, 0.2, ProtocolMode::Bb84, seed)
                    .context("building grid params")?;
                for q_factor in [0.0, 0.5, 1.0] {
                    let q = q_factor * delta_p;
                    let channel = qkdlab_core::adversary::ChannelModel::new(0.0, q)
                        .context("channel")?;
                    let rel = reliability_experiment(&params, &src, &cert, &channel, sessions)
                        .context("reliability experiment")?;
                    all_pass &= rel.report.pass && rel.guarantee_violations == 0;
                    csv.push_str(&format!(
                        "{n},{q},{},{},{},{},{}\n",
                        rel.report.trials,
                        rel.report.empirical,
                        rel.report.bound,
                        rel.report.sigma,
                        rel.report.pass
                    ));
                    reports.push(serde_json::to_value(&rel)?);
                }
            }
            if let Some(path) = &args.csv {
                fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            }
            let doc = serde_json::json!({
                "kind": "reliability",
                "sessions_per_point": sessions,
                "points": reports,
                "pass": all_pass,
                "seed": seed,
            });
            write_out(&args.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
            if all_pass {
                Ok(Ok(()))
            } else {
                Ok(Err(DomainFailure("reliability bound violated".into())))
            }
        }
        BoundKind::Privacy => {
            let grid: Vec<usize> = (200..=2000).step_by(100).collect();
            let scan = eps1_decay_scan(&grid, 0.05, 0.1);
            let doc = serde_json::json!({
                "kind": "privacy",
                "scan": scan,
                "seed": seed,
            });
            write_out(&args.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
            if scan.pass {
                Ok(Ok(()))
            } else {
                Ok(Err(DomainFailure(format!("entropy-defect slope {} not negative", scan.slope))))
            }
        }
    }
}

fn cmd_distinguish(args: DistinguishArgs) -> Result<std::result::Result<(), DomainFailure>> {
    let seed = resolve_seed(args.seed);
    let one = Complex64::new(1.0, 0.0);
    let zero = DensityMatrix::pure(&[one, Complex64::ZERO]).context("state")?;
    let plus = DensityMatrix::pure(&[one, one]).context("state")?;
    let povm = optimal_binary_measurement(&zero, &plus).context("measurement")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    use rand::Rng;
    let mut correct = 0u64;
    for _ in 0..args.trials {
        let which = rng.random::<bool>() as usize;
        let rho = if which == 0 { &zero } else { &plus };
        if sample_povm(&povm, rho, &mut rng).context("sampling")? == which {
            correct += 1;
        }
    }
    let single = correct as f64 / args.trials as f64;
    let bound1 = helstrom_bound(&zero, &plus, 1).context("bound")?;
    let sigma1 = (bound1 * (1.0 - bound1) / args.trials as f64).sqrt();
    let mut pass = (single - bound1).abs() <= 5.0 * sigma1;

    let mut multi = Vec::new();
    for m in 2..=args.m_max {
        let trials = (args.trials / 2).max(1);
        let mut all_correct = 0u64;
        for _ in 0..trials {
            let ok = (0..m).all(|_| {
                let which = rng.random::<bool>() as usize;
                let rho = if which == 0 { &zero } else { &plus };
                sample_povm(&povm, rho, &mut rng).expect("sampling") == which
            });
            if ok {
                all_correct += 1;
            }
        }
        let freq = all_correct as f64 / trials as f64;
        let bound = helstrom_bound(&zero, &plus, m).context("bound")?;
        let sigma = (bound * (1.0 - bound) / trials as f64).sqrt().max(1e-6);
        let within = freq <= bound + 3.0 * sigma;
        pass &= within;
        multi.push(serde_json::json!({
            "m": m, "empirical": freq, "bound": bound, "sigma": sigma, "pass": within,
        }));
    }
    let doc = serde_json::json!({
        "kind": "distinguish",
        "trials": args.trials,
        "single_copy": {"empirical": single, "bound": bound1, "sigma": sigma1},
        "multi_copy": multi,
        "pass": pass,
        "seed": seed,
    });
    write_out(&args.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    if pass {
        Ok(Ok(()))
    } else {
        Ok(Err(DomainFailure("distinguishing rate outside the ceiling band".into())))
    }
}

fn cmd_independence(args: IndependenceArgs) -> Result<std::result::Result<(), DomainFailure>> {
    use rand::Rng;
    let seed = resolve_seed(args.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ideal = qkdlab_core::source::ideal_bb84_source();
    let tilted = qkdlab_core::source::build_from_distributions(
        &qkdlab_core::source::AngularDistribution::delta(0.0),
        &qkdlab_core::source::AngularDistribution::delta(std::f64::consts::FRAC_PI_4 + 0.03),
    )
    .context("tilted source")?;
    let mut passed = 0u64;
    let mut ran = 0u64;
    let mut worst_spread = 0.0f64;
    while ran < args.instances {
        let (src, cert) = if ran.is_multiple_of(2) { &ideal } else { &tilted };
        let n = 3 + (rng.random::<u64>() % 3) as usize;
        let f_rows = (rng.random::<u64>() % 2) as usize;
        let mut rows = Vec::new();
        for _ in 0..=f_rows {
            rows.push(BitString::random(n, &mut rng));
        }
        let f = Gf2Matrix::new(rows[..f_rows].to_vec(), n);
        let k = Gf2Matrix::new(rows[f_rows..].to_vec(), n);
        if k.row(0).is_zero() || !f.stack(&k).has_independent_rows() {
            continue;
        }
        let d_w = joint_min_weight(&f, &k).context("joint weight")?;
        if d_w < 2 {
            continue;
        }
        let basis = BitString::random(n, &mut rng);
        let h = BitString::random(n, &mut rng);
        let dim = 1usize << n;
        let a = qkdlab_core::ComplexMatrix::from_fn(dim, |_, _| {
            Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        let psd = a.adjoint().matmul(&a);
        let proj = analysis::tilde_pattern_projector(cert, &basis, h.as_word()).context("projector")?;
        let x = qkdlab_core::MeasurementOperator::new(proj.matmul(&psd).matmul(&proj))
            .context("operator")?;
        let report = key_independence_check(&f, &k, src, cert, &basis, &h, d_w / 2, &x, 1e-9)
            .context("independence check")?;
        ran += 1;
        if report.pass {
            passed += 1;
            worst_spread = worst_spread.max(report.max_spread);
        }
    }
    let doc = serde_json::json!({
        "kind": "independence",
        "instances": ran,
        "passed": passed,
        "worst_spread": worst_spread,
        "pass": passed == ran,
        "seed": seed,
    });
    write_out(&args.out, &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    if passed == ran {
        Ok(Ok(()))
    } else {
        Ok(Err(DomainFailure(format!("{} of {ran} instances failed", ran - passed))))
    }
}
