//! Command-line front end. Every command returns a [`RunReport`]; the
//! process exit code is 0 when all assertions pass, 1 when one fails and 2
//! for usage or I/O errors.

mod halftone;
mod models;
mod region;
mod report;
mod schedule;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::polytope::Polytope;

pub use report::{config_hash, Assertion, RunReport};

/// Environment variable that overrides `--seed`.
pub const SEED_ENV: &str = "CONVEXDYN_SEED";

#[derive(Debug, Parser)]
#[command(name = "convexdyn", version, about = "Greedy vertex quantization on polytopes")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Seed for every random stream (overridden by CONVEXDYN_SEED).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Check memberships and invariants inline.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Record wall time in the report (makes reports differ between runs).
    #[arg(long, global = true)]
    pub timings: bool,
    /// Do not print the report on stdout.
    #[arg(long, short, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Error-diffuse a PGM/PPM image onto the vertices of a polytope.
    Halftone(halftone::HalftoneArgs),
    /// Greedy assignment of a demand stream to polytope vertices.
    Schedule(schedule::ScheduleArgs),
    /// Build and verify an invariant region of the greedy map.
    Region(region::RegionArgs),
    /// Binary words of the constant-input rotation on [0, 1].
    Sturmian(models::SturmianArgs),
    /// Pursuit of the running input mean by the running output mean.
    Pursuit(models::PursuitArgs),
    /// Sweep face translations of the octahedral polytope.
    Counterexample(models::CounterexampleArgs),
    /// Entry into the absorbing interval on [0, 1].
    Absorb(models::AbsorbArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Halftone(_) => "halftone",
            Command::Schedule(_) => "schedule",
            Command::Region(_) => "region",
            Command::Sturmian(_) => "sturmian",
            Command::Pursuit(_) => "pursuit",
            Command::Counterexample(_) => "counterexample",
            Command::Absorb(_) => "absorb",
        }
    }

    fn config(&self) -> serde_json::Value {
        let v = match self {
            Command::Halftone(a) => serde_json::to_value(a),
            Command::Schedule(a) => serde_json::to_value(a),
            Command::Region(a) => serde_json::to_value(a),
            Command::Sturmian(a) => serde_json::to_value(a),
            Command::Pursuit(a) => serde_json::to_value(a),
            Command::Counterexample(a) => serde_json::to_value(a),
            Command::Absorb(a) => serde_json::to_value(a),
        };
        v.expect("arguments serialize")
    }
}

/// Settings shared by every command after seed resolution.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub strict: bool,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            if report.pass {
                0
            } else {
                for a in report.assertions.iter().filter(|a| !a.pass) {
                    eprintln!("assertion failed: {}: {}", a.name, a.detail);
                }
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

/// Runs the parsed command, writes its artifacts and report, and returns the report.
pub fn execute(cli: &Cli) -> Result<RunReport> {
    let seed = resolve_seed(cli.global.seed)?;
    if let Some(p) = &cli.global.report {
        check_output(p)?;
    }
    let ctx = Context {
        seed,
        strict: cli.global.strict,
    };
    let start = Instant::now();
    let mut report = RunReport::new(cli.command.name(), cli.command.config(), seed, ctx.strict);
    match &cli.command {
        Command::Halftone(a) => halftone::run(a, &ctx, &mut report)?,
        Command::Schedule(a) => schedule::run(a, &ctx, &mut report)?,
        Command::Region(a) => region::run(a, &ctx, &mut report)?,
        Command::Sturmian(a) => models::sturmian(a, &ctx, &mut report)?,
        Command::Pursuit(a) => models::pursuit(a, &ctx, &mut report)?,
        Command::Counterexample(a) => models::counterexample(a, &ctx, &mut report)?,
        Command::Absorb(a) => models::absorb(a, &ctx, &mut report)?,
    }
    report.finish(cli.global.timings.then(|| start.elapsed().as_secs_f64()));
    let json = report.to_json();
    if let Some(p) = &cli.global.report {
        fs::write(p, &json)?;
    }
    if !cli.global.quiet {
        println!("{json}");
    }
    Ok(report)
}

fn resolve_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}=`{s}` is not an unsigned integer"))),
        Err(std::env::VarError::NotPresent) => Ok(flag),
        Err(e) => Err(Error::InvalidArgument(format!("{SEED_ENV}: {e}"))),
    }
}

/// A preset name, or a path to a polytope literal file.
pub fn load_polytope(spec: &str) -> Result<Polytope> {
    match crate::polytope::preset(spec) {
        Ok(p) => Ok(p),
        Err(Error::UnknownPreset(_)) if Path::new(spec).is_file() => Polytope::load(Path::new(spec)),
        Err(e) => Err(e),
    }
}

pub(crate) fn check_input(p: &Path) -> Result<()> {
    if p.is_file() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "input file {} does not exist",
            p.display()
        )))
    }
}

pub(crate) fn check_output(p: &Path) -> Result<()> {
    let dir = match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    if dir.is_dir() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "output directory {} does not exist",
            dir.display()
        )))
    }
}

/// `start:stop:step` with `stop` excluded, or a comma-separated list.
pub fn parse_sweep(s: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [a, b, c] => {
            let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
            let (a, b, c) = (num(a)?, num(b)?, num(c)?);
            if !(c > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
                return Err(format!("bad sweep `{s}`: need start <= stop and step > 0"));
            }
            let n = ((b - a) / c - 1e-9).ceil().max(0.0) as usize;
            Ok((0..n).map(|k| a + k as f64 * c).collect())
        }
        [_] => parse_list(s),
        _ => Err(format!("bad sweep `{s}`: expected start:stop:step")),
    }
}

/// Comma-separated numbers.
pub fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect()
}

/// [`parse_list`] with the error as a usage error.
pub(crate) fn numbers(flag: &str, s: &str) -> Result<Vec<f64>> {
    parse_list(s).map_err(|e| Error::InvalidArgument(format!("--{flag}: {e}")))
}
