//! Command-line front end. The binary is a thin wrapper around [`run`].
//!
//! Exit codes: 0 success, 1 usage, 2 parse error, 3 validation error,
//! 4 impossible evidence, 5 non-convergence.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::conditioning::{infer_conditioned, ConditioningOptions};
use crate::cutset::{greedy_cutset, min_cutset_exhaustive, Cutset, EXHAUSTIVE_LIMIT};
use crate::dsep;
use crate::error::Error;
use crate::model::{validate, Network, VarId};
use crate::netformat::{self, format_significant, parse_evidence};
use crate::oracle;
use crate::polytree::{BeliefVector, PolytreeEngine, PropagationOptions, Schedule, TraceRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_IMPOSSIBLE: i32 = 4;
pub const EXIT_NONCONVERGENCE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "beliefnet", version, about = "Exact inference in discrete Bayes networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Auto,
    Polytree,
    Conditioning,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScheduleArg {
    Synchronous,
    FairRandom,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a network file and list every violation.
    Validate { file: PathBuf },
    /// Print posterior beliefs.
    Infer {
        file: PathBuf,
        /// Observation `Var=state`; repeatable.
        #[arg(short = 'e', long = "evidence", value_name = "VAR=STATE")]
        evidence: Vec<String>,
        /// Variable to report; repeatable. Defaults to all unobserved ones.
        #[arg(short = 'q', long = "query", value_name = "VAR")]
        query: Vec<String>,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        /// Write one line per message update to this file.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        /// Also print P(e).
        #[arg(long)]
        likelihood: bool,
        /// Cutset for `--method conditioning` (default: greedy).
        #[arg(long, value_delimiter = ',', value_name = "VARS")]
        cutset: Option<Vec<String>>,
        #[arg(long, value_enum, default_value = "synchronous")]
        schedule: ScheduleArg,
        /// Seed for the fair-random schedule.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Threads for conditioned runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Test d-separation of two variables.
    Dsep {
        file: PathBuf,
        #[arg(long = "x")]
        x: String,
        #[arg(long = "y")]
        y: String,
        #[arg(long, value_delimiter = ',', value_name = "VARS")]
        given: Vec<String>,
    },
    /// Find a loop cutset.
    Cutset {
        file: PathBuf,
        /// Search for a minimum cutset instead of the greedy one.
        #[arg(long)]
        exhaustive: bool,
    },
}

/// A failure carrying its exit code and message.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) => EXIT_PARSE,
            Error::Invalid(_) => EXIT_INVALID,
            Error::ImpossibleEvidence { .. } => EXIT_IMPOSSIBLE,
            Error::NonConvergence { .. } => EXIT_NONCONVERGENCE,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn write_failed(e: std::io::Error) -> Failure {
    Failure::usage(format!("write failed: {e}"))
}

/// Runs the command line `args` (program name first), writing results to
/// `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Network, Failure> {
    let text = read(path)?;
    netformat::parse(&text).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{}: {}", path.display(), f.message);
        f
    })
}

fn lookup(net: &Network, names: &[String]) -> Result<Vec<VarId>, Failure> {
    names.iter().map(|n| net.var(n).map_err(Failure::from)).collect()
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Validate { file } => {
            let text = read(&file)?;
            let draft = netformat::parse_draft(&text).map_err(|e| Failure {
                code: EXIT_PARSE,
                message: format!("{}: {e}", file.display()),
            })?;
            let report = validate(&draft);
            if report.is_ok() {
                writeln!(out, "ok").map_err(write_failed)?;
                Ok(())
            } else {
                writeln!(out, "{report}").map_err(write_failed)?;
                Err(Failure {
                    code: EXIT_INVALID,
                    message: format!("{} violation(s)", report.violations.len()),
                })
            }
        }
        Command::Infer {
            file,
            evidence,
            query,
            method,
            trace,
            likelihood,
            cutset,
            schedule,
            seed,
            jobs,
        } => {
            let net = load(&file)?;
            let evidence = parse_evidence(&evidence, &net)?;
            let queries = if query.is_empty() {
                net.ids().filter(|v| !evidence.contains(*v)).collect()
            } else {
                lookup(&net, &query)?
            };
            let propagation = PropagationOptions {
                schedule: match schedule {
                    ScheduleArg::Synchronous => Schedule::Synchronous,
                    ScheduleArg::FairRandom => Schedule::FairRandom { seed },
                },
                ..PropagationOptions::default()
            };
            let method = match method {
                Method::Auto if net.is_singly_connected() => Method::Polytree,
                Method::Auto => Method::Conditioning,
                m => m,
            };
            let mut trace_lines: Vec<String> = Vec::new();
            let (beliefs, log_evidence): (Vec<(VarId, BeliefVector)>, Option<f64>) = match method {
                Method::Polytree => {
                    let engine = PolytreeEngine::new(&net).map_err(|_| {
                        Failure::usage("--method polytree needs a singly connected network")
                    })?;
                    let fixpoint = engine.propagate_traced(&evidence, &propagation, &mut |r: &TraceRecord| {
                        trace_lines.push(r.display(&net).to_string())
                    })?;
                    let beliefs = queries
                        .iter()
                        .map(|&q| Ok((q, engine.fuse_belief(&fixpoint.state, q)?)))
                        .collect::<Result<_, Error>>()?;
                    (beliefs, engine.evidence_log_likelihood(&evidence)?.finite())
                }
                Method::Conditioning => {
                    let cut = match cutset {
                        Some(names) => Cutset::new(&net, lookup(&net, &names)?)?,
                        None => greedy_cutset(&net),
                    };
                    let options = ConditioningOptions {
                        propagation,
                        jobs,
                        trace: trace.is_some(),
                    };
                    let (mixed, runs) = infer_conditioned(&net, &evidence, &cut, &queries, &options)?;
                    for run in &runs {
                        let labels: Vec<String> = run
                            .assignment
                            .iter()
                            .map(|&(v, s)| format!("{}={}", net.var_name(v), net.variable(v).states()[s]))
                            .collect();
                        trace_lines.push(format!("run {} weight {}", labels.join(" "), format_significant(run.weight)));
                        trace_lines.extend(run.trace.iter().map(|r| r.display(&run.reduction.net).to_string()));
                    }
                    (mixed.beliefs, Some(mixed.log_evidence))
                }
                Method::Exact => {
                    let all = oracle::oracle_marginals(&net, &evidence)?;
                    let pd = oracle::oracle_evidence_probability(&net, &evidence)?;
                    (queries.iter().map(|&q| (q, all[q.0].clone())).collect(), Some(pd.ln()))
                }
                Method::Auto => unreachable!("resolved above"),
            };
            if let Some(path) = trace {
                let mut text = trace_lines.join("\n");
                if !text.is_empty() {
                    text.push('\n');
                }
                fs::write(&path, text)
                    .map_err(|e| Failure::usage(format!("cannot write {}: {e}", path.display())))?;
            }
            for (q, belief) in &beliefs {
                writeln!(out, "{}", format_belief(&net, *q, belief)).map_err(write_failed)?;
            }
            if likelihood {
                let p = log_evidence.map_or(0.0, f64::exp);
                writeln!(out, "P(e) = {}", format_significant(p)).map_err(write_failed)?;
            }
            Ok(())
        }
        Command::Dsep { file, x, y, given } => {
            let net = load(&file)?;
            let x = net.var(&x)?;
            let y = net.var(&y)?;
            let given: BTreeSet<VarId> = lookup(&net, &given)?.into_iter().collect();
            let report = dsep::analyze(&net, x, y, &given)?;
            let verdict = if report.separated { "d-separated" } else { "connected" };
            writeln!(out, "{verdict}").map_err(write_failed)?;
            for (path, by) in &report.paths {
                let status = match by {
                    Some(v) => format!("blocked at {}", net.var_name(*v)),
                    None => "open".to_string(),
                };
                writeln!(out, "{}: {status}", path.display(&net)).map_err(write_failed)?;
            }
            Ok(())
        }
        Command::Cutset { file, exhaustive } => {
            let net = load(&file)?;
            let cut = if exhaustive {
                min_cutset_exhaustive(&net, EXHAUSTIVE_LIMIT)?
            } else {
                greedy_cutset(&net)
            };
            let names = cut.names(&net);
            let shown = if names.is_empty() { "(none)".to_string() } else { names.join(" ") };
            writeln!(out, "cutset: {shown}").map_err(write_failed)?;
            writeln!(out, "assignments: {}", cut.assignment_count(&net)).map_err(write_failed)?;
            Ok(())
        }
    }
}

/// `BEL(var) s1=p1 s2=p2 ...` with six decimals.
pub fn format_belief(net: &Network, var: VarId, belief: &BeliefVector) -> String {
    let mut line = format!("BEL({})", net.var_name(var));
    for (label, &p) in net.variable(var).states().iter().zip(belief.as_slice()) {
        // Clamp so rounding noise never prints as -0.000000.
        line.push_str(&format!(" {label}={:.6}", p.clamp(0.0, 1.0)));
    }
    line
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn belief_line_format() {
        let net = crate::fixtures::chain();
        let b = BeliefVector::from_unnormalized(vec![0.27, 0.14]).unwrap();
        assert_eq!(format_belief(&net, VarId(0), &b), "BEL(A) f=0.658537 t=0.341463");
        let tiny = BeliefVector::from_unnormalized(vec![1.0, 0.0]).unwrap();
        assert_eq!(format_belief(&net, VarId(0), &tiny), "BEL(A) f=1.000000 t=0.000000");
    }

    #[test]
    fn usage_errors() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        assert_eq!(run(["beliefnet", "frobnicate"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run(["beliefnet", "infer", "/nonexistent.bn"], &mut out, &mut err), EXIT_USAGE);
        assert_eq!(run(["beliefnet", "--help"], &mut out, &mut err), EXIT_OK);
    }
}
