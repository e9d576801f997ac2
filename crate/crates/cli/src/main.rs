//! `bellrand`: bound curves, optimal models, simulation and oracle campaigns.
//!
//! Exit status is 0 on success, 1 on domain, validation or I/O errors, and 2
//! when a verification run finds an oracle value above its closed-form bound.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bellrand::bounds::s_q_max_dist;
use bellrand::curves::{bound_curve, curve_csv, parse_number, Curve, CurveSpec, OnDomainError};
use bellrand::model::validate;
use bellrand::optimal_models::{
    build_fac_model_high_p, build_fac_model_low_p, build_general_model, build_high_p_model,
};
use bellrand::oracle::{lp_deterministic_max_s, oracle_report, OracleOptions};
use bellrand::quantum::{optimize_strategy_numeric, random_distributions};
use bellrand::simulate::{simulate, PartyRule};
use bellrand::{Mode, Model64};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

const SOUNDNESS_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "bellrand",
    version,
    about = "CHSH randomness expansion with reduced free will"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a closed-form bound over a range of P and write CSV.
    Bounds(BoundsArgs),
    /// Build one of the optimal hidden-variable models and write it as JSON.
    Model(ModelArgs),
    /// Run trials of a model from a JSON file and certify the output entropy.
    Simulate(SimulateArgs),
    /// Compare an optimization oracle against its closed-form bound on a grid.
    Verify(VerifyArgs),
}

fn number(s: &str) -> Result<f64, String> {
    parse_number(s).map_err(|e| e.to_string())
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveArg {
    Ns,
    Fac,
    Quantum,
    QuantumFac,
    GOfP,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Ns,
    Fac,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Ns => Mode::Ns,
            ModeArg::Fac => Mode::Fac,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DomainPolicyArg {
    Reject,
    Row,
}

#[derive(clap::Args)]
struct BoundsArgs {
    #[arg(long, value_enum)]
    curve: CurveArg,
    /// Guessing probability (ns, fac).
    #[arg(long, default_value = "1", value_parser = number)]
    g: f64,
    /// Observed CHSH value (g-of-p); defaults to 2√2.
    #[arg(long, value_parser = number)]
    s: Option<f64>,
    /// Adversary class for g-of-p.
    #[arg(long, value_enum, default_value = "ns")]
    mode: ModeArg,
    #[arg(long, default_value = "0.25", value_parser = number)]
    p_min: f64,
    #[arg(long, default_value = "1/3", value_parser = number)]
    p_max: f64,
    #[arg(long, default_value_t = 100)]
    steps: usize,
    /// Reject out-of-domain P values up front, or emit them as error rows.
    #[arg(long, value_enum, default_value = "reject")]
    on_domain_error: DomainPolicyArg,
    /// Output path (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    General,
    HighP,
    FacLow,
    FacHigh,
}

#[derive(clap::Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    kind: ModelKind,
    #[arg(long, value_parser = number)]
    g: f64,
    #[arg(long, value_parser = number)]
    p: f64,
    /// Second setting weight of the high-P model.
    #[arg(long, value_parser = number)]
    q: Option<f64>,
    /// Third setting weight of the high-P model (default: 1 - P - Q).
    #[arg(long, value_parser = number)]
    q_prime: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Alice,
    Bob,
    Best,
}

impl From<RuleArg> for PartyRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Alice => PartyRule::Alice,
            RuleArg::Bob => PartyRule::Bob,
            RuleArg::Best => PartyRule::Best,
        }
    }
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Model JSON as written by `bellrand model`.
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Free-will parameter assumed for certification.
    #[arg(long, value_parser = number)]
    p: f64,
    #[arg(long, value_enum, default_value = "ns")]
    mode: ModeArg,
    /// Outcome Eve tries to guess.
    #[arg(long, value_enum, default_value = "best")]
    rule: RuleArg,
    /// Also write the raw counts as CSV.
    #[arg(long)]
    counts_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Lp,
    Ns,
    Fac,
    Quantum,
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    target: Target,
    #[arg(long, default_value = "0.5", value_parser = number)]
    g_min: f64,
    #[arg(long, default_value = "1", value_parser = number)]
    g_max: f64,
    #[arg(long, default_value_t = 6)]
    g_steps: usize,
    #[arg(long, default_value = "0.25", value_parser = number)]
    p_min: f64,
    #[arg(long, default_value = "1/3", value_parser = number)]
    p_max: f64,
    #[arg(long, default_value_t = 5)]
    steps: usize,
    #[arg(long, default_value_t = 100)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Hidden-variable values per model (ns, fac).
    #[arg(long, default_value_t = 4)]
    components: usize,
    /// Random setting distributions to test (quantum).
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Soundness(String),
}

impl From<bellrand::Error> for Failure {
    fn from(e: bellrand::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Failure::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn cmd_bounds(a: &BoundsArgs) -> Result<(), Failure> {
    let curve = match a.curve {
        CurveArg::Ns => Curve::Ns,
        CurveArg::Fac => Curve::Fac,
        CurveArg::Quantum => Curve::Quantum,
        CurveArg::QuantumFac => Curve::QuantumFac,
        CurveArg::GOfP => Curve::GOfP,
    };
    let spec = CurveSpec {
        curve,
        g: a.g,
        s: a.s.unwrap_or(2.0 * std::f64::consts::SQRT_2),
        mode: a.mode.into(),
        p_min: a.p_min,
        p_max: a.p_max,
        steps: a.steps,
    };
    let policy = match a.on_domain_error {
        DomainPolicyArg::Reject => OnDomainError::Reject,
        DomainPolicyArg::Row => OnDomainError::Row,
    };
    let records = bound_curve(&spec, policy)?;
    emit(a.out.as_deref(), &curve_csv(curve, &records))
}

fn cmd_model(a: &ModelArgs) -> Result<(), Failure> {
    let model = match a.kind {
        ModelKind::General => build_general_model(a.g, a.p)?,
        ModelKind::FacLow => build_fac_model_low_p(a.g, a.p)?,
        ModelKind::FacHigh => build_fac_model_high_p(a.g, a.p)?,
        ModelKind::HighP => {
            let q =
                a.q.ok_or_else(|| Failure::Usage("--q is required for the high-p model".into()))?;
            let q_prime = a.q_prime.unwrap_or(1.0 - a.p - q);
            build_high_p_model(a.g, a.p, q, q_prime, 1e-12)?
        }
    };
    let report = validate(&model, 1e-9);
    if !report.valid {
        return Err(Failure::Usage(format!(
            "constructed model is invalid: {}",
            report.failure.unwrap_or_default()
        )));
    }
    eprintln!(
        "S = {}, G = {}, P = {}, factorizable = {}",
        report.s, report.g, report.p, report.factorizable
    );
    let mut text = model.to_json()?;
    text.push('\n');
    emit(a.out.as_deref(), &text)
}

fn cmd_simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.model).map_err(|e| Failure::Usage(format!("{}: {e}", a.model.display())))?;
    let model = Model64::from_json(&text)?;
    let (counts, report) = simulate(&model, a.trials, a.seed, a.p, a.mode.into(), a.rule.into())?;
    if let Some(path) = &a.counts_out {
        emit(Some(path), &counts.to_csv())?;
    }
    emit(a.out.as_deref(), &json(&report)?)
}

#[derive(Serialize)]
struct VerifyPoint {
    #[serde(rename = "G", skip_serializing_if = "Option::is_none")]
    g: Option<f64>,
    #[serde(rename = "P", skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    distribution: Option<[f64; 4]>,
    closed_form: f64,
    oracle_value: f64,
    gap: f64,
    feasible: bool,
}

#[derive(Serialize)]
struct VerifyReport {
    target: &'static str,
    restarts: usize,
    seed: u64,
    points: Vec<VerifyPoint>,
    /// Largest `closed_form - oracle_value` over feasible points.
    max_gap: f64,
    /// Largest `oracle_value - closed_form` over feasible points.
    max_excess: f64,
    sound: bool,
}

fn grid(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, Failure> {
    Ok(bellrand::curves::p_grid(lo, hi, steps)?)
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    let mut points = Vec::new();
    let (target, restarts) = match a.target {
        Target::Lp => {
            for p in grid(a.p_min, a.p_max, a.steps)? {
                let closed = bellrand::bounds::s_max_ns(1.0, p)?.0;
                let oracle = lp_deterministic_max_s(p)?;
                points.push(VerifyPoint {
                    g: None,
                    p: Some(p),
                    distribution: None,
                    closed_form: closed,
                    oracle_value: oracle,
                    gap: closed - oracle,
                    feasible: true,
                });
            }
            ("lp", 0)
        }
        Target::Ns | Target::Fac => {
            let mode = if matches!(a.target, Target::Ns) {
                Mode::Ns
            } else {
                Mode::Fac
            };
            let opts = OracleOptions {
                components: a.components,
                restarts: a.restarts,
                seed: a.seed,
                ..Default::default()
            };
            for g in grid(a.g_min, a.g_max, a.g_steps)? {
                for p in grid(a.p_min, a.p_max, a.steps)? {
                    let r = oracle_report(mode, g, p, &opts)?;
                    points.push(VerifyPoint {
                        g: Some(g),
                        p: Some(p),
                        distribution: None,
                        closed_form: r.bound_closed_form,
                        oracle_value: r.bound_oracle,
                        gap: r.gap,
                        feasible: r.feasible,
                    });
                }
            }
            (mode.as_str(), a.restarts)
        }
        Target::Quantum => {
            for (i, d) in random_distributions(a.points, a.seed).into_iter().enumerate() {
                let closed = s_q_max_dist(&d)?.0;
                let (oracle, _) = optimize_strategy_numeric(&d, a.restarts, a.seed.wrapping_add(i as u64));
                points.push(VerifyPoint {
                    g: None,
                    p: None,
                    distribution: Some(d.as_array()),
                    closed_form: closed,
                    oracle_value: oracle,
                    gap: closed - oracle,
                    feasible: true,
                });
            }
            ("quantum", a.restarts)
        }
    };
    let feasible = points.iter().filter(|p| p.feasible);
    let max_gap = feasible.clone().map(|p| p.gap).fold(f64::NEG_INFINITY, f64::max);
    let max_excess = feasible.map(|p| -p.gap).fold(f64::NEG_INFINITY, f64::max);
    let sound = max_excess.is_nan() || max_excess <= SOUNDNESS_TOL;
    let report = VerifyReport {
        target,
        restarts,
        seed: a.seed,
        points,
        max_gap,
        max_excess,
        sound,
    };
    emit(a.out.as_deref(), &json(&report)?)?;
    if sound {
        Ok(())
    } else {
        Err(Failure::Soundness(format!(
            "oracle exceeded its closed-form bound by {max_excess:e}"
        )))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot start {n} threads: {e}")))?;
    }
    match &cli.command {
        Command::Bounds(a) => cmd_bounds(a),
        Command::Model(a) => cmd_model(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Soundness(msg)) => {
            eprintln!("soundness violation: {msg}");
            ExitCode::from(2)
        }
    }
}
