//! Command-line front end. The `liqgame` binary is a one-line wrapper
//! around [`run`].
//!
//! Exit codes: 0 on success, 2 for bad input (the message names the
//! offending flag or field), 1 for anything else.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::bayes::{BayesDocument, Responses, TypeSpace};
use crate::fixtures;
use crate::game::{build_instance, build_payoff_matrix, GameInstance};
use crate::lp::{max_transfer, TransferProblem};
use crate::market::{self, TypePairDocument};
use crate::report;
use crate::sim::{run_simulation, SimConfig, SimMode};
use crate::solver::{SolverError, DEFAULT_MAX_DIM};

#[derive(Debug, Parser)]
#[command(name = "liqgame", version, about = "Liquidity games between market makers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// RNG seed for `simulate`. Drawn at random and reported when absent.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Payoff matrix, equilibria and dominance for one instance.
    Solve(SolveArgs),
    /// Prior threshold for the incomplete-information game.
    Bayes(BayesArgs),
    /// Quadrant aggregates of a type-composition matrix.
    Market(MarketArgs),
    /// Monte Carlo hit ratio and volume.
    Simulate(SimulateArgs),
    /// Largest feasible single transfer.
    Lp(LpArgs),
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Player 1's (long) balance.
    #[arg(long, allow_negative_numbers = true, required_unless_present = "config")]
    pub bi: Option<i64>,
    /// Player 2's (short) balance.
    #[arg(long, allow_negative_numbers = true, required_unless_present = "config")]
    pub bj: Option<i64>,
    /// Defaults to the larger balance magnitude.
    #[arg(long)]
    pub cap: Option<u64>,
    /// JSON instance file with balance_i, balance_j, issue_cap.
    #[arg(long, conflicts_with_all = ["bi", "bj", "cap"])]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_DIM)]
    pub max_dim: usize,
}

#[derive(Debug, Args)]
pub struct BayesArgs {
    /// JSON game document; the bundled large/small-bank game by default.
    #[arg(long)]
    pub fixture: Option<PathBuf>,
    /// Comma-separated prior, one entry per type.
    #[arg(long)]
    pub prior: Option<String>,
    /// Player 2's strategy per type, e.g. `a=high,b=low`.
    #[arg(long)]
    pub response: Option<String>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["published", "constructive"])))]
pub struct MarketArgs {
    /// `final_4x4` or `intermediate_2x4`.
    #[arg(long)]
    pub published: Option<String>,
    /// Build the matrix from type-pair games and priors.
    #[arg(long)]
    pub constructive: bool,
    /// Type-pair document for `--constructive`.
    #[arg(long, requires = "constructive")]
    pub fixture: Option<PathBuf>,
    /// Row prior, comma-separated.
    #[arg(long, requires = "constructive")]
    pub priors: Option<String>,
    /// Column prior; defaults to the row prior.
    #[arg(long, requires = "constructive")]
    pub priors_j: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON simulation config; unset fields take defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Also write the rounds-to-clear histogram as CSV.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    OneShot,
    Repeated,
}

#[derive(Debug, Args)]
pub struct LpArgs {
    /// Receiver's absolute need.
    #[arg(long)]
    pub receiver: u64,
    /// Sender's holding.
    #[arg(long)]
    pub sender: u64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

fn input(context: &str, e: impl Display) -> CliError {
    CliError::Input(format!("{context}: {e}"))
}

/// What a successful command produces. Nothing is written until the whole
/// command has succeeded.
#[derive(Debug, Default)]
pub struct Outcome {
    pub body: String,
    pub extra_files: Vec<(PathBuf, String)>,
    pub notices: Vec<String>,
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Solve(a) => solve(a, cli.format),
        Command::Bayes(a) => bayes(a, cli.format),
        Command::Market(a) => market_cmd(a, cli.format),
        Command::Simulate(a) => simulate(a, cli.format, cli.seed),
        Command::Lp(a) => Ok(Outcome {
            body: format!("{}\n", max_transfer(TransferProblem::new(a.receiver, a.sender))),
            ..Outcome::default()
        }),
    }
}

fn read_file(flag: &str, path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| input(&format!("{flag} {}", path.display()), e))
}

fn solve(a: &SolveArgs, format: Format) -> Result<Outcome, CliError> {
    let instance: GameInstance = match &a.config {
        Some(path) => {
            let text = read_file("--config", path)?;
            serde_json::from_str(&text).map_err(|e| input("--config", e))?
        }
        None => {
            let (bi, bj) = (a.bi.expect("clap enforces"), a.bj.expect("clap enforces"));
            let cap = a.cap.unwrap_or(bi.unsigned_abs().max(bj.unsigned_abs()).max(1));
            build_instance(bi, bj, cap).map_err(|e| input("instance", e))?
        }
    };
    let body = match format {
        Format::Csv => build_payoff_matrix(&instance).to_csv(),
        Format::Json => {
            let r = report::solve_report(&instance, a.max_dim).map_err(|e| match e {
                SolverError::DimensionCapExceeded { .. } => input("--max-dim", e),
                other => CliError::Internal(other.to_string()),
            })?;
            report::to_json(&r)
        }
    };
    Ok(Outcome {
        body,
        ..Outcome::default()
    })
}

fn parse_prior(flag: &str, text: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| input(flag, format!("{t:?}: {e}"))))
        .collect()
}

fn parse_responses(text: &str) -> Result<Responses, CliError> {
    text.split(',')
        .map(|pair| {
            pair.split_once('=')
                .map(|(t, s)| (t.trim().to_string(), s.trim().to_string()))
                .ok_or_else(|| input("--response", format!("expected TYPE=STRATEGY, got {pair:?}")))
        })
        .collect()
}

fn fixture_text(flag: &str, path: Option<&Path>, default: &str) -> Result<String, CliError> {
    match path {
        Some(p) => read_file(flag, p),
        None => fixtures::read(default).map_err(|e| input(flag, e)),
    }
}

fn bayes(a: &BayesArgs, format: Format) -> Result<Outcome, CliError> {
    if format == Format::Csv {
        return Err(input("--format", "bayes supports json only"));
    }
    let text = fixture_text("--fixture", a.fixture.as_deref(), fixtures::BAYES_LARGE_SMALL)?;
    let doc: BayesDocument = serde_json::from_str(&text).map_err(|e| input("--fixture", e))?;
    let (game, mut space, mut responses) = doc.into_game().map_err(|e| input("--fixture", e))?;
    if let Some(p) = &a.prior {
        space = TypeSpace::new(space.types.clone(), parse_prior("--prior", p)?).map_err(|e| input("--prior", e))?;
    }
    if let Some(r) = &a.response {
        responses = Some(parse_responses(r)?);
    }
    let r = report::bayes_report(&game, &space, responses).map_err(|e| input("bayes", e))?;
    Ok(Outcome {
        body: report::to_json(&r),
        ..Outcome::default()
    })
}

fn market_cmd(a: &MarketArgs, format: Format) -> Result<Outcome, CliError> {
    let (source, matrix) = match &a.published {
        Some(id) => {
            let m = market::load_published_matrix(id).map_err(|e| input("--published", e))?;
            (id.clone(), m)
        }
        None => {
            let text = fixture_text("--fixture", a.fixture.as_deref(), fixtures::MARKET_CONSTRUCTIVE)?;
            let doc: TypePairDocument = serde_json::from_str(&text).map_err(|e| input("--fixture", e))?;
            let (game, mut prior_i, mut prior_j) = doc.into_game().map_err(|e| input("--fixture", e))?;
            if let Some(p) = &a.priors {
                prior_i = parse_prior("--priors", p)?;
                prior_j = prior_i.clone();
            }
            if let Some(p) = &a.priors_j {
                prior_j = parse_prior("--priors-j", p)?;
            }
            let m = market::weight_by_priors(&game, &prior_i, &prior_j).map_err(|e| input("--priors", e))?;
            ("constructive".to_string(), m)
        }
    };
    let body = match format {
        Format::Csv => matrix.volumes_csv(),
        Format::Json => report::to_json(&report::market_report(&source, &matrix).map_err(|e| input("market", e))?),
    };
    Ok(Outcome {
        body,
        ..Outcome::default()
    })
}

fn simulate(a: &SimulateArgs, format: Format, seed: Option<u64>) -> Result<Outcome, CliError> {
    let mut notices = Vec::new();
    let mut doc = match &a.config {
        Some(path) => {
            let text = read_file("--config", path)?;
            serde_json::from_str::<serde_json::Value>(&text).map_err(|e| input("--config", e))?
        }
        None => serde_json::json!({}),
    };
    let obj = doc
        .as_object_mut()
        .ok_or_else(|| input("--config", "expected a JSON object"))?;
    if let Some(s) = seed {
        obj.insert("seed".into(), s.into());
    } else if !obj.contains_key("seed") {
        let s: u64 = rand::random();
        notices.push(format!("seed: {s}"));
        obj.insert("seed".into(), s.into());
    }
    let mut config: SimConfig = serde_json::from_value(doc).map_err(|e| input("--config", e))?;
    if let Some(t) = a.trials {
        config.trials = t;
    }
    if let Some(m) = a.mode {
        config.mode = match m {
            ModeArg::OneShot => SimMode::OneShot,
            ModeArg::Repeated => SimMode::Repeated,
        };
    }
    let r = run_simulation(&config).map_err(|e| input("simulate", e))?;
    let body = match format {
        Format::Json => report::to_json(&r),
        Format::Csv => r.histogram_csv(),
    };
    let extra_files = a
        .histogram
        .iter()
        .map(|p| (p.clone(), r.histogram_csv()))
        .collect();
    Ok(Outcome {
        body,
        extra_files,
        notices,
    })
}

/// Writes via a temporary file in the same directory, so readers never
/// see a half-written result.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit(cli: &Cli, outcome: Outcome) -> Result<(), CliError> {
    for n in &outcome.notices {
        eprintln!("{n}");
    }
    let internal = |p: &Path, e: std::io::Error| CliError::Internal(format!("writing {}: {e}", p.display()));
    match &cli.output {
        Some(path) => write_atomic(path, &outcome.body).map_err(|e| internal(path, e))?,
        None => std::io::stdout()
            .write_all(outcome.body.as_bytes())
            .map_err(|e| internal(Path::new("<stdout>"), e))?,
    }
    for (path, text) in &outcome.extra_files {
        write_atomic(path, text).map_err(|e| internal(path, e))?;
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli).and_then(|o| emit(&cli, o)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("liqgame").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn negative_balances_parse() {
        let cli = parse(&["solve", "--bi", "2", "--bj", "-2"]);
        let Command::Solve(a) = &cli.command else { panic!() };
        assert_eq!((a.bi, a.bj), (Some(2), Some(-2)));
    }

    #[test]
    fn lp_prints_integer() {
        let o = execute(&parse(&["lp", "--receiver", "10", "--sender", "20"])).unwrap();
        assert_eq!(o.body, "10\n");
    }

    #[test]
    fn same_sign_is_input_error() {
        let e = execute(&parse(&["solve", "--bi", "3", "--bj", "2"])).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().contains("instance"));
    }

    #[test]
    fn market_needs_a_source() {
        assert!(Cli::try_parse_from(["liqgame", "market"]).is_err());
    }

    #[test]
    fn responses_parse() {
        let r = parse_responses("a=high, b=low").unwrap();
        assert_eq!(r["a"], "high");
        assert_eq!(r["b"], "low");
        assert!(parse_responses("a").is_err());
    }
}
