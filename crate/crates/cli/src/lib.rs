//! `sdrdu`: JSON in, JSON or CSV out.
//!
//! Exit codes: 0 when the run completed, 1 when it found a violation or a
//! negative verdict (`dominance`, `falsify`, a failing `verify-theorem`),
//! 2 on any input or output error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use sdrdu_core::dominance::{dominates_n, DEFAULT_TOL};
use sdrdu_core::indices::{greediness, monotone_ra_condition, pessimism, q_index, IndexValue};
use sdrdu_core::lab::{counterexample_sweep, falsify, FalsifyConfig, SweepConfig, VIOLATION_GAP};
use sdrdu_core::rdu::rdu_eval;
use sdrdu_core::{Distribution, Domain, RduModel, UtilityFunction, WeightingFunction};

pub mod input;
pub mod report;
pub mod theorem;

use report::{Envelope, Format, Row};
use theorem::Case;

/// Environment variable overriding the default dominance tolerance.
pub const TOL_ENV: &str = "SDRDU_TOL";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{origin}: field {field}: {message}")]
    Json {
        origin: String,
        field: String,
        message: String,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Output(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] sdrdu_core::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "sdrdu",
    version,
    about = "Higher-order stochastic dominance and rank-dependent utility checks"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Dominance tolerance; overrides SDRDU_TOL.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Seed of every random draw; recorded in the report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide whether X dominates Y at order n.
    Dominance {
        #[arg(long)]
        n: u32,
        x: PathBuf,
        y: PathBuf,
    },
    /// Evaluate the rank-dependent functional; identity utility by default.
    Rdu {
        #[arg(long)]
        utility: Option<PathBuf>,
        #[arg(long)]
        weighting: PathBuf,
        x: PathBuf,
    },
    /// Search for a pair ordered at order n that the model ranks backwards.
    Falsify {
        #[arg(long)]
        utility: Option<PathBuf>,
        #[arg(long)]
        weighting: PathBuf,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Outcome interval "a,b" when no utility file fixes it.
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<String>,
        #[arg(long, default_value_t = sdrdu_core::lab::DEFAULT_ATOM_BUDGET)]
        atom_budget: usize,
        /// Skip the structured construction sweep.
        #[arg(long)]
        no_sweep: bool,
    },
    /// Walk the construction sweep and report the first violation.
    Counterexample {
        #[arg(long)]
        weighting: PathBuf,
        #[arg(long)]
        utility: Option<PathBuf>,
        #[arg(long, allow_hyphen_values = true, default_value = "-1,1")]
        domain: String,
        /// "default" or a JSON file with alphas, epsilons and n_params.
        #[arg(long, default_value = "default")]
        sweep: String,
        #[arg(long, default_value_t = 3)]
        n: u32,
    },
    /// Greediness of u, pessimism and Q index of h, and G_u <= P_h.
    Indices {
        #[arg(long)]
        utility: PathBuf,
        #[arg(long)]
        weighting: PathBuf,
    },
    /// Closed-form identity and consistency suites of case i or ii.
    VerifyTheorem {
        #[arg(long, value_enum)]
        case: Case,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

struct Output {
    json: Vec<u8>,
    rows: Vec<Row>,
    negative: bool,
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let common = &cli.common;
    let tol = resolve_tol(common.tol)?;
    let out = match &cli.command {
        Command::Dominance { n, x, y } => cmd_dominance(common, tol, *n, x, y)?,
        Command::Rdu {
            utility,
            weighting,
            x,
        } => cmd_rdu(common, tol, utility.as_deref(), weighting, x)?,
        Command::Falsify {
            utility,
            weighting,
            n,
            trials,
            domain,
            atom_budget,
            no_sweep,
        } => {
            let domain = domain.as_deref().map(parse_domain).transpose()?;
            let config = FalsifyConfig {
                trials: *trials,
                seed: common.seed,
                atom_budget: *atom_budget,
                tol,
                sweep: !no_sweep,
                ..FalsifyConfig::default()
            };
            cmd_falsify(common, utility.as_deref(), weighting, *n, domain, config)?
        }
        Command::Counterexample {
            weighting,
            utility,
            domain,
            sweep,
            n,
        } => {
            let domain = parse_domain(domain)?;
            cmd_counterexample(
                common,
                tol,
                weighting,
                utility.as_deref(),
                domain,
                sweep,
                *n,
            )?
        }
        Command::Indices { utility, weighting } => cmd_indices(common, tol, utility, weighting)?,
        Command::VerifyTheorem { case, trials } => {
            let summary = theorem::verify(*case, *trials, common.seed, tol)?;
            let hash = input::hash(&(case, trials, common.seed, tol));
            let rows = summary.rows();
            let negative = !summary.passed;
            let env = Envelope::new("verify-theorem", common.seed, tol, hash, summary);
            Output {
                json: report::render_json(&env),
                rows,
                negative,
            }
        }
    };
    let bytes = match common.format {
        Format::Json => out.json,
        Format::Csv => report::render_csv(&out.rows)?,
    };
    report::emit(&bytes, common.output.as_deref())?;
    Ok(if out.negative { 1 } else { 0 })
}

fn resolve_tol(flag: Option<f64>) -> Result<f64, CliError> {
    let tol = match flag {
        Some(t) => t,
        None => match std::env::var(TOL_ENV) {
            Ok(text) => text
                .trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("{TOL_ENV}={text}: {e}")))?,
            Err(_) => DEFAULT_TOL,
        },
    };
    if !(tol.is_finite() && tol >= 0.0) {
        return Err(CliError::Usage(format!(
            "tolerance {tol} must be finite and nonnegative"
        )));
    }
    Ok(tol)
}

fn parse_domain(text: &str) -> Result<Domain, CliError> {
    let (a, b) =
        input::parse_domain(text).map_err(|e| CliError::Usage(format!("--domain: {e}")))?;
    Ok(Domain::new(a, b)?)
}

fn finish<T: Serialize>(
    command: &str,
    common: &Common,
    tol: f64,
    hash: String,
    result: T,
    rows: Vec<Row>,
    negative: bool,
) -> Output {
    let env = Envelope::new(command, common.seed, tol, hash, result);
    Output {
        json: report::render_json(&env),
        rows,
        negative,
    }
}

fn cmd_dominance(
    common: &Common,
    tol: f64,
    n: u32,
    x: &Path,
    y: &Path,
) -> Result<Output, CliError> {
    let dx: Distribution = input::load(x)?;
    let dy: Distribution = input::load(y)?;
    let verdict = dominates_n(&dx, &dy, n, tol)?;
    let hash = input::hash(&(&dx, &dy, n, tol));
    let row = Row {
        case_id: format!("dominance/n={n}"),
        inputs_hash: hash.clone(),
        result: if verdict.holds { "holds" } else { "fails" }.into(),
        gap: Some(verdict.max_gap),
        seed: common.seed,
    };
    let negative = !verdict.holds;
    Ok(finish(
        "dominance",
        common,
        tol,
        hash,
        verdict,
        vec![row],
        negative,
    ))
}

#[derive(Serialize)]
struct RduResult {
    value: f64,
    model: RduModel,
}

fn load_model(
    utility: Option<&Path>,
    weighting: &Path,
    domain: Domain,
) -> Result<RduModel, CliError> {
    let h: WeightingFunction = input::load(weighting)?;
    let u = match utility {
        Some(p) => input::load(p)?,
        None => UtilityFunction::identity(domain),
    };
    Ok(RduModel::new(u, h))
}

fn cmd_rdu(
    common: &Common,
    tol: f64,
    utility: Option<&Path>,
    weighting: &Path,
    x: &Path,
) -> Result<Output, CliError> {
    let dist: Distribution = input::load(x)?;
    let model = load_model(utility, weighting, dist.domain())?;
    let value = rdu_eval(&model, &dist)?;
    let hash = input::hash(&(&model, &dist));
    let row = Row {
        case_id: "rdu".into(),
        inputs_hash: hash.clone(),
        result: value.to_string(),
        gap: None,
        seed: common.seed,
    };
    Ok(finish(
        "rdu",
        common,
        tol,
        hash,
        RduResult { value, model },
        vec![row],
        false,
    ))
}

#[derive(Serialize)]
struct FalsifyResult {
    model: RduModel,
    domain: Domain,
    report: sdrdu_core::lab::FalsifyReport<f64>,
}

fn cmd_falsify(
    common: &Common,
    utility: Option<&Path>,
    weighting: &Path,
    n: u32,
    domain: Option<Domain>,
    config: FalsifyConfig<f64>,
) -> Result<Output, CliError> {
    let u: Option<UtilityFunction> = utility.map(input::load).transpose()?;
    let domain = match (&u, domain) {
        (Some(u), Some(d)) if u.domain() != d => {
            return Err(CliError::Usage(format!(
                "--domain {:?} differs from the utility's domain {:?}",
                (d.lo(), d.hi()),
                (u.domain().lo(), u.domain().hi())
            )))
        }
        (Some(u), _) => u.domain(),
        (None, Some(d)) => d,
        (None, None) => theorem::domain(),
    };
    let h: WeightingFunction = input::load(weighting)?;
    let model = RduModel::new(u.unwrap_or_else(|| UtilityFunction::identity(domain)), h);
    let report = falsify(&model, domain, n, &config)?;
    let hash = input::hash(&(&model, n, &config));
    let row = Row {
        case_id: format!("falsify/n={n}"),
        inputs_hash: hash.clone(),
        result: if report.violation.is_some() {
            "violation"
        } else {
            "none"
        }
        .into(),
        gap: report.violation.as_ref().map(|v| v.gap),
        seed: common.seed,
    };
    let negative = report.violation.is_some();
    let result = FalsifyResult {
        model,
        domain,
        report,
    };
    Ok(finish(
        "falsify",
        common,
        config.tol,
        hash,
        result,
        vec![row],
        negative,
    ))
}

#[derive(Serialize)]
struct CounterexampleResult {
    model: RduModel,
    order: u32,
    sweep: SweepConfig<f64>,
    report: sdrdu_core::lab::SweepReport<f64>,
}

fn cmd_counterexample(
    common: &Common,
    tol: f64,
    weighting: &Path,
    utility: Option<&Path>,
    domain: Domain,
    sweep: &str,
    n: u32,
) -> Result<Output, CliError> {
    let sweep: SweepConfig<f64> = if sweep == "default" {
        SweepConfig::default()
    } else {
        input::load(Path::new(sweep))?
    };
    let model = load_model(utility, weighting, domain)?;
    if model.utility.domain() != domain {
        return Err(CliError::Usage(
            "--domain differs from the utility's domain".into(),
        ));
    }
    let report = counterexample_sweep(&model, domain, n, &sweep, VIOLATION_GAP, tol)?;
    let hash = input::hash(&(&model, n, &sweep));
    let row = Row {
        case_id: format!("counterexample/n={n}"),
        inputs_hash: hash.clone(),
        result: if report.violation.is_some() {
            "violation"
        } else {
            "none"
        }
        .into(),
        gap: report.violation.as_ref().map(|v| v.gap),
        seed: common.seed,
    };
    let result = CounterexampleResult {
        model,
        order: n,
        sweep,
        report,
    };
    Ok(finish(
        "counterexample",
        common,
        tol,
        hash,
        result,
        vec![row],
        false,
    ))
}

#[derive(Serialize)]
struct IndicesResult {
    greediness: IndexValue<f64>,
    pessimism: IndexValue<f64>,
    q_index: IndexValue<f64>,
    monotone_ra: bool,
}

fn cmd_indices(
    common: &Common,
    tol: f64,
    utility: &Path,
    weighting: &Path,
) -> Result<Output, CliError> {
    let u: UtilityFunction = input::load(utility)?;
    let h: WeightingFunction = input::load(weighting)?;
    let result = IndicesResult {
        greediness: greediness(&u)?,
        pessimism: pessimism(&h)?,
        q_index: q_index(&h)?,
        monotone_ra: monotone_ra_condition(&u, &h)?,
    };
    let hash = input::hash(&(&u, &h));
    let row = |id: &str, result: String| Row {
        case_id: id.into(),
        inputs_hash: hash.clone(),
        result,
        gap: None,
        seed: common.seed,
    };
    let rows = vec![
        row("greediness", result.greediness.value.to_string()),
        row("pessimism", result.pessimism.value.to_string()),
        row("q_index", result.q_index.value.to_string()),
        row("monotone_ra", result.monotone_ra.to_string()),
    ];
    Ok(finish(
        "indices",
        common,
        tol,
        hash.clone(),
        result,
        rows,
        false,
    ))
}
