//! The `pipframe` command line: run scenarios, list and explain built-ins.
//!
//! Exit status is 0 when every check passes, 1 when a check fails or a
//! computation errors out, and 2 for usage and configuration errors.

pub mod config;
pub mod report;
pub mod runner;
pub mod scenarios;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::par::{self, Execution};
use config::{ConfigError, Format, Prepared};
use runner::Outcome;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pipframe", version, about = "Reproducing pairs, semi-frames and their spaces, checked numerically")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run scenario files or built-ins (`builtin:<name>`, `builtin:all`).
    Run {
        #[arg(required = true)]
        targets: Vec<String>,
        /// Override the seed of every scenario.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "pipframe-reports")]
        out: PathBuf,
        /// Report format; defaults to each scenario's own setting.
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Scenarios run at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Keep the numerics of each scenario on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// List the built-in scenarios.
    List,
    /// Describe the steps of a built-in scenario or a scenario file.
    Explain { name: String },
}

/// Entry point with injectable streams; returns the exit status.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_PASS
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match cli.command {
        Command::List => {
            for b in scenarios::BUILTINS {
                let _ = writeln!(out, "{:<26} {}", b.name, b.scenario().summary);
            }
            EXIT_PASS
        }
        Command::Explain { name } => explain(&name, out, err),
        Command::Run { targets, seed, out: dir, format, jobs, sequential } => {
            let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
            run(&targets, seed, &dir, format, jobs, exec, out, err)
        }
    }
}

fn explain(name: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let target = name.strip_prefix("builtin:").unwrap_or(name);
    let (scenario, steps) = if let Some(b) = scenarios::find(target) {
        (b.scenario(), b.steps.iter().map(|s| s.to_string()).collect::<Vec<_>>())
    } else if Path::new(name).is_file() {
        match config::load(Path::new(name)) {
            Ok(p) => {
                let steps = scenarios::describe_kind(&p.scenario.construction);
                (p.scenario, steps)
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
        }
    } else {
        let _ = writeln!(err, "error: unknown scenario {name:?}; `pipframe list` shows the built-ins");
        return EXIT_USAGE;
    };
    let _ = writeln!(out, "{}: {}", scenario.name, scenario.summary);
    let _ = writeln!(out, "construction: {}, seed {}", scenario.construction.kind(), scenario.seed);
    for (i, s) in steps.iter().enumerate() {
        let _ = writeln!(out, "  {}. {s}", i + 1);
    }
    EXIT_PASS
}

fn resolve(target: &str) -> Result<Vec<Prepared>, ConfigError> {
    let builtin = |name: &str| -> Result<Vec<Prepared>, ConfigError> {
        if name == "all" {
            return scenarios::BUILTINS.iter().map(|b| b.prepared()).collect();
        }
        match scenarios::find(name) {
            Some(b) => Ok(vec![b.prepared()?]),
            None => Err(ConfigError { source: target.to_owned(), message: "unknown built-in scenario".into() }),
        }
    };
    if let Some(name) = target.strip_prefix("builtin:") {
        return builtin(name);
    }
    let path = Path::new(target);
    if !path.exists() && scenarios::find(target).is_some() {
        return builtin(target);
    }
    Ok(vec![config::load(path)?])
}

#[allow(clippy::too_many_arguments)]
fn run(
    targets: &[String],
    seed: Option<u64>,
    dir: &Path,
    format: Option<Format>,
    jobs: usize,
    exec: Execution,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    if jobs == 0 {
        let _ = writeln!(err, "error: --jobs must be at least 1");
        return EXIT_USAGE;
    }
    let mut prepared = Vec::new();
    for t in targets {
        match resolve(t) {
            Ok(ps) => prepared.extend(ps),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    let mut stems = BTreeSet::new();
    for p in &mut prepared {
        p.scenario = runner::with_seed(p.scenario.clone(), seed);
        if !stems.insert(stem(p)) {
            let _ = writeln!(err, "error: two scenarios write reports named {:?}", stem(p));
            return EXIT_USAGE;
        }
    }
    let outcomes = execute(&prepared, jobs, exec);
    let mut status = EXIT_PASS;
    for (p, outcome) in prepared.iter().zip(outcomes) {
        let name = &p.scenario.name;
        match outcome {
            Ok(Outcome { report, timings }) => {
                let fmt = format.unwrap_or(p.scenario.outputs.format);
                let s = stem(p);
                if let Err(e) = report.write(dir, &s, fmt).and_then(|_| timings.write(dir, &s)) {
                    let _ = writeln!(err, "error: writing reports for {name}: {e}");
                    return EXIT_USAGE;
                }
                if report.passed {
                    let _ = writeln!(out, "PASS {name} ({} checks)", report.checks.len());
                } else {
                    status = EXIT_FAIL;
                    let failed: Vec<_> = report.failures().collect();
                    let _ = writeln!(out, "FAIL {name} ({} of {} checks failed)", failed.len(), report.checks.len());
                    for c in failed.iter().take(3) {
                        let _ = writeln!(out, "  {}: residual {:e} > tolerance {:e}", c.name, c.residual, c.tolerance);
                    }
                }
            }
            Err(e) => {
                status = EXIT_FAIL;
                let _ = writeln!(out, "ERROR {name}: {e}");
            }
        }
    }
    status
}

fn stem(p: &Prepared) -> String {
    let s = &p.scenario.outputs.stem;
    if s.is_empty() {
        p.scenario.name.clone()
    } else {
        s.clone()
    }
}

fn execute(prepared: &[Prepared], jobs: usize, exec: Execution) -> Vec<crate::Result<Outcome>> {
    #[cfg(feature = "parallel")]
    if jobs > 1 {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
            return pool.install(|| par::map(Execution::Parallel, prepared, |p| runner::run(p, exec)));
        }
    }
    let _ = jobs;
    par::map(Execution::Sequential, prepared, |p| runner::run(p, exec))
}
