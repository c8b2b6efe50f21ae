//! `tclose` command-line tool.
//!
//! Exit status: 0 on success, 1 on usage, parse or size-guard errors, 2 when
//! the instance is infeasible or a check or identity fails.

mod anonymize;
mod gen;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use tclose::formats::{parse_table_csv, Metadata};
use tclose::metric::SpaceSpec;
use tclose::{Error, Limits, Rational, SaSpace, Table};

#[derive(Parser)]
#[command(name = "tclose", version, about = "Suppression-based table anonymization")]
struct Cli {
    /// Print nothing on standard output.
    #[arg(long, global = true)]
    quiet: bool,

    /// Write `key=value` result lines to this file.
    #[arg(long, global = true, value_name = "PATH")]
    report: Option<PathBuf>,

    /// Allow size guards above their defaults.
    #[arg(long, global = true, env = "TCLOSE_UNSAFE_LIMITS")]
    unsafe_limits: bool,

    /// Largest row count for partition enumeration.
    #[arg(long, global = true, env = "TCLOSE_ORACLE_MAX_N", value_name = "N")]
    oracle_max_n: Option<usize>,

    /// Largest row count for the exact solvers.
    #[arg(long, global = true, env = "TCLOSE_EXACT_MAX_N", value_name = "N")]
    exact_max_n: Option<usize>,

    /// Largest number of integer assignments the MILP enumerator visits.
    #[arg(long, global = true, env = "TCLOSE_MILP_MAX_ASSIGNMENTS", value_name = "N")]
    milp_max_assignments: Option<u128>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a minimum-cost partition and the released table.
    Anonymize(anonymize::AnonymizeArgs),
    /// Check a partition file against a table and a privacy principle.
    Check(anonymize::CheckArgs),
    /// Exact Earth-Mover Distance between two distributions.
    Emd(EmdArgs),
    /// Generate a hardness-reduction instance.
    #[command(subcommand)]
    Gen(gen::GenCommand),
    /// Run a reduction identity or a seeded oracle corpus.
    #[command(subcommand)]
    Verify(verify::VerifyCommand),
}

#[derive(clap::Args)]
struct EmdArgs {
    #[arg(long, value_name = "P1,P2,...")]
    x: String,
    #[arg(long, value_name = "P1,P2,...")]
    y: String,
    /// `equal`, `four-point`, or a space file.
    #[arg(long, default_value = "equal")]
    space: String,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Principle {
    Tclose,
    Kanon,
    Ldiv,
}

pub enum Failure {
    /// Exit 1.
    Usage(String),
    /// Exit 2.
    Rejected(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

pub type CliResult<T = ()> = std::result::Result<T, Failure>;

/// Shared state handed to every command.
pub struct Ctx {
    pub quiet: bool,
    pub limits: Limits,
    pub report: Metadata,
}

impl Ctx {
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }
}

pub fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

pub fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn load_table(path: &Path, split_digits: bool) -> CliResult<Table> {
    Ok(parse_table_csv(&read(path)?, split_digits)?)
}

/// `equal`, `four-point`, or a space file.
pub fn load_space_spec(arg: &str) -> CliResult<SpaceSpec> {
    Ok(match arg {
        "equal" => SpaceSpec::Equal(None),
        "four-point" => SpaceSpec::Matrix(SaSpace::hub_four_point()),
        path => SpaceSpec::parse(&read(Path::new(path))?)?,
    })
}

fn limits(cli: &Cli) -> CliResult<Limits> {
    let mut l = Limits::default();
    let mut raised = Vec::new();
    if let Some(n) = cli.oracle_max_n {
        if n > l.oracle_max_rows {
            raised.push("oracle");
        }
        l.oracle_max_rows = n;
    }
    if let Some(n) = cli.exact_max_n {
        if n > l.exact_max_rows {
            raised.push("exact");
        }
        l.exact_max_rows = n;
    }
    if let Some(n) = cli.milp_max_assignments {
        if n > l.milp_max_assignments {
            raised.push("milp");
        }
        l.milp_max_assignments = n;
    }
    if !raised.is_empty() && !cli.unsafe_limits {
        return Err(Failure::Usage(format!(
            "raising the {} guard above its default needs --unsafe-limits",
            raised.join(", ")
        )));
    }
    // row sets are 64-bit masks
    if l.oracle_max_rows > 63 || l.exact_max_rows > 63 {
        return Err(Failure::Usage("row guards cannot exceed 63".into()));
    }
    Ok(l)
}

fn emd(ctx: &mut Ctx, args: &EmdArgs) -> CliResult {
    let x = tclose::DistributionVector::parse(&args.x)?;
    let y = tclose::DistributionVector::parse(&args.y)?;
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        }
        .into());
    }
    let space = load_space_spec(&args.space)?.resolve_dimension(x.dim())?;
    let d = tclose::metric::emd_general(&x, &y, &space)?;
    ctx.report.set("emd", &d);
    ctx.say(d.to_string());
    Ok(())
}

fn run(cli: &Cli, ctx: &mut Ctx) -> CliResult {
    match &cli.command {
        Command::Anonymize(a) => anonymize::anonymize(ctx, a),
        Command::Check(a) => anonymize::check(ctx, a),
        Command::Emd(a) => emd(ctx, a),
        Command::Gen(g) => gen::run(ctx, g),
        Command::Verify(v) => verify::run(ctx, v),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let limits = match limits(&cli) {
        Ok(l) => l,
        Err(Failure::Usage(msg) | Failure::Rejected(msg)) => {
            eprintln!("tclose: {msg}");
            return ExitCode::from(1);
        }
    };
    let mut ctx = Ctx {
        quiet: cli.quiet,
        limits,
        report: Metadata::new(),
    };
    let outcome = run(&cli, &mut ctx);
    let code = match &outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("tclose: {msg}");
            ctx.report.set("status", "error");
            1
        }
        Err(Failure::Rejected(msg)) => {
            eprintln!("tclose: {msg}");
            ctx.report.set("status", "rejected");
            2
        }
    };
    if code == 0 {
        ctx.report.set("status", "ok");
    }
    if let Some(path) = &cli.report {
        if let Err(e) = fs::write(path, ctx.report.to_string()) {
            eprintln!("tclose: {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::from(code)
}
