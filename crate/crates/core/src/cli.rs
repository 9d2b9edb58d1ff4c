//! Command-line harness: parse a run configuration, execute seeded trials and
//! emit a JSON report.
//!
//! Each trial gets its own [`Machine`] seeded with `seed + trial`, so any
//! single trial can be replayed in isolation. Trials run on the rayon pool;
//! the report is always ordered by trial index.

use std::collections::HashSet;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::amplify::{grover, Oracle};
use crate::collision::{self, find_collision, CollisionFn, CollisionInstance};
use crate::minima::{self, ceil_log2, durr_hoyer_with, OracleStyle};
use crate::sim::{Machine, MAX_QUBITS};
use crate::unifsup::{self, prepare_uniform_m, prepare_uniform_m_with_forget};

/// Tolerance for comparing a prepared state against its analytic target.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "safeq", version, about = "Seeded runs of quantum search algorithms on a statevector simulator")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Base seed; trial i uses seed + i.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of independent trials.
    #[arg(long, global = true, default_value_t = 1)]
    trials: usize,
    /// Print the JSON report to stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Write the JSON report to a file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dürr-Høyer minimum search.
    Minima {
        /// Comma-separated distinct values.
        #[arg(long, value_delimiter = ',', conflicts_with = "random_table")]
        table: Option<Vec<u64>>,
        /// Generate a random table of this size from the seed.
        #[arg(long)]
        random_table: Option<usize>,
        /// Realize the oracle through an ancilla register.
        #[arg(long)]
        ancilla: bool,
    },
    /// Collision detection for F(x) = x mod m.
    Collision {
        /// Comma-separated values (default 0..size).
        #[arg(long, value_delimiter = ',', conflicts_with = "size")]
        table: Option<Vec<u64>>,
        /// Use the table 0..size.
        #[arg(long)]
        size: Option<u64>,
        /// Modulus of F.
        #[arg(long = "mod")]
        modulus: u64,
        /// F is r-to-one (0 or 1: arbitrary).
        #[arg(long, default_value_t = 0)]
        r: u64,
    },
    /// Uniform superposition over 0..M.
    Unifsup {
        #[arg(long = "m")]
        m: u64,
        /// Include the amplitude vector in each trial record.
        #[arg(long)]
        dump_amps: bool,
        /// Use the dup/forget implementation.
        #[arg(long)]
        forget: bool,
    },
    /// Grover search for `marks` consecutive states starting at `target`.
    Grover {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        marks: u64,
        #[arg(long, default_value_t = 0)]
        target: u64,
    },
    /// Quantum integer sampling in 0..bound.
    Randint {
        #[arg(long)]
        bound: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum AlgorithmConfig {
    Minima {
        table: Vec<u64>,
        style: OracleStyle,
    },
    Collision {
        table: Vec<u64>,
        modulus: u64,
        r: u64,
    },
    Unifsup {
        m: u64,
        dump_amps: bool,
        forget: bool,
    },
    Grover {
        n: usize,
        marks: u64,
        target: u64,
    },
    Randint {
        bound: u64,
    },
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::Minima { .. } => "minima",
            AlgorithmConfig::Collision { .. } => "collision",
            AlgorithmConfig::Unifsup { .. } => "unifsup",
            AlgorithmConfig::Grover { .. } => "grover",
            AlgorithmConfig::Randint { .. } => "randint",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algorithm: AlgorithmConfig,
    pub seed: u64,
    pub trials: usize,
    pub json: bool,
    pub out: Option<PathBuf>,
}

fn random_table(size: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<u64> = (0..(4 * size as u64).max(1)).collect();
    values.shuffle(&mut rng);
    values.truncate(size);
    values
}

/// Parses arguments (without the program name).
pub fn parse_args<I, S>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args = std::iter::once("safeq".to_string()).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.render().to_string()))?;
    let usage = |msg: &str| CliError::Usage(msg.to_string());

    if cli.common.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let algorithm = match cli.command {
        Command::Minima {
            table,
            random_table: size,
            ancilla,
        } => {
            let table = match (table, size) {
                (Some(t), _) => t,
                (None, Some(n)) if n > 0 => random_table(n, cli.common.seed),
                (None, Some(_)) => return Err(usage("--random-table must be positive")),
                (None, None) => return Err(usage("minima needs --table or --random-table")),
            };
            let style = if ancilla {
                OracleStyle::Ancilla
            } else {
                OracleStyle::Diagonal
            };
            AlgorithmConfig::Minima { table, style }
        }
        Command::Collision {
            table,
            size,
            modulus,
            r,
        } => {
            if modulus == 0 {
                return Err(usage("--mod must be positive"));
            }
            let table = table.unwrap_or_else(|| (0..size.unwrap_or(16)).collect());
            AlgorithmConfig::Collision { table, modulus, r }
        }
        Command::Unifsup { m, dump_amps, forget } => AlgorithmConfig::Unifsup {
            m,
            dump_amps,
            forget,
        },
        Command::Grover { n, marks, target } => AlgorithmConfig::Grover { n, marks, target },
        Command::Randint { bound } => AlgorithmConfig::Randint { bound },
    };
    Ok(RunConfig {
        algorithm,
        seed: cli.common.seed,
        trials: cli.common.trials,
        json: cli.common.json,
        out: cli.common.out,
    })
}

impl RunConfig {
    /// Qubits one trial's machine needs.
    pub fn required_qubits(&self) -> usize {
        match &self.algorithm {
            AlgorithmConfig::Minima { table, style } => minima::required_qubits(table, *style),
            AlgorithmConfig::Collision { table, modulus, r } => {
                collision::required_qubits(&collision_instance(table, *modulus, *r))
            }
            AlgorithmConfig::Unifsup { m, forget, .. } => ceil_log2(*m) + usize::from(*forget),
            AlgorithmConfig::Grover { n, .. } => *n,
            AlgorithmConfig::Randint { bound } => ceil_log2(*bound),
        }
    }

    /// Semantic checks run before any machine is built.
    pub fn validate(&self) -> Result<(), CliError> {
        let config = |msg: String| Err(CliError::Config(msg));
        match &self.algorithm {
            AlgorithmConfig::Minima { table, .. } => {
                if table.is_empty() {
                    return config("table is empty".into());
                }
                let mut seen = HashSet::new();
                if let Some(dup) = table.iter().find(|v| !seen.insert(**v)) {
                    return config(format!("table entries must be distinct, {dup} repeats"));
                }
            }
            AlgorithmConfig::Collision { table, .. } => {
                if table.len() < 2 {
                    return config("collision needs at least two table entries".into());
                }
            }
            AlgorithmConfig::Unifsup { m, .. } => {
                if *m < 2 {
                    return config(format!("M must be at least 2, got {m}"));
                }
            }
            AlgorithmConfig::Grover { n, marks, target } => {
                if *n == 0 || *n > MAX_QUBITS {
                    return config(format!("--n must be in 1..={MAX_QUBITS}"));
                }
                let size = 1u64 << n;
                if *marks == 0 || *marks > size {
                    return config(format!("--marks must be in 1..={size}"));
                }
                if *target >= size {
                    return config(format!("--target must be below {size}"));
                }
            }
            AlgorithmConfig::Randint { bound } => {
                if *bound == 0 {
                    return config("--bound must be positive".into());
                }
                if ceil_log2(*bound) > collision::MAX_RANDOM_BITS {
                    return config(format!("--bound {bound} needs more than 30 qubits"));
                }
            }
        }
        let need = self.required_qubits();
        if need > MAX_QUBITS {
            return config(format!("run needs {need} qubits, cap is {MAX_QUBITS}"));
        }
        Ok(())
    }
}

fn collision_instance(table: &[u64], modulus: u64, r: u64) -> CollisionInstance {
    CollisionInstance {
        table: table.to_vec(),
        f: CollisionFn::modulo(modulus),
        r,
    }
}

fn skip_false(b: &bool) -> bool {
    !*b
}

/// One trial's result.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
#[serde(rename_all = "camelCase")]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pair: Option<[u64; 2]>,
    pub success: bool,
    pub queries: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "skip_false")]
    pub early_exit: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<[f64; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Aggregate {
    pub success_rate: f64,
    pub mean_queries: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmReport {
    pub algorithm: String,
    pub seed: u64,
    pub trials: usize,
    pub results: Vec<TrialRecord>,
    pub aggregate: Aggregate,
    /// Wall-clock milliseconds for the batch.
    pub ms: f64,
}

impl AlgorithmReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs one trial on a fresh machine seeded with `cfg.seed + trial`.
pub fn run_trial(cfg: &RunConfig, trial: usize) -> TrialRecord {
    let seed = cfg.seed.wrapping_add(trial as u64);
    let mut rec = TrialRecord {
        trial,
        seed,
        ..Default::default()
    };
    let mut m = match Machine::new(cfg.required_qubits(), seed) {
        Ok(m) => m,
        Err(e) => {
            rec.error = Some(e.to_string());
            return rec;
        }
    };
    let result = match &cfg.algorithm {
        AlgorithmConfig::Minima { table, style } => {
            durr_hoyer_with(&mut m, table, *style).map(|out| {
                let best = table.iter().min().copied();
                rec.outcome = Some(out.value);
                rec.index = Some(out.index);
                rec.steps = Some(out.steps);
                rec.budget = Some(out.budget);
                rec.success = Some(out.value) == best;
            })
        }
        AlgorithmConfig::Collision { table, modulus, r } => {
            let inst = collision_instance(table, *modulus, *r);
            find_collision(&mut m, &inst).map(|out| {
                let (a, b) = out.pair;
                rec.pair = Some([a, b]);
                rec.k = Some(out.k);
                rec.early_exit = out.early_exit;
                rec.success = a != b
                    && a % modulus == b % modulus
                    && table.contains(&a)
                    && table.contains(&b);
            })
        }
        AlgorithmConfig::Unifsup {
            m: count,
            dump_amps,
            forget,
        } => {
            let prepared = if *forget {
                prepare_uniform_m_with_forget(&mut m, *count)
            } else {
                prepare_uniform_m(&mut m, *count)
            };
            prepared.map(|reg| {
                let target = unifsup::target_amplitudes(*count);
                let amps = &m.state().amplitudes()[..target.len()];
                let err = amps
                    .iter()
                    .zip(&target)
                    .map(|(a, t)| (a.re - t).hypot(a.im))
                    .fold(0.0, f64::max);
                rec.outcome = Some(reg.len() as u64);
                rec.max_error = Some(err);
                rec.success = err < AMPLITUDE_TOLERANCE;
                if *dump_amps {
                    rec.amplitudes = Some(amps.iter().map(|a| [a.re, a.im]).collect());
                }
            })
        }
        AlgorithmConfig::Grover { n, marks, target } => {
            let size = 1u64 << n;
            let (marks, target) = (*marks, *target);
            let is_marked = move |x: u64| (x + size - target) % size < marks;
            let oracle = Oracle::new(*n, is_marked);
            grover(&mut m, &oracle, marks).map(|v| {
                rec.outcome = Some(v);
                rec.success = is_marked(v);
            })
        }
        AlgorithmConfig::Randint { bound } => collision::random_int(&mut m, *bound).map(|v| {
            rec.outcome = Some(v);
            rec.success = v < *bound;
        }),
    };
    if let Err(e) = result {
        rec.success = false;
        rec.error = Some(e.to_string());
    }
    rec.queries = m.queries();
    rec
}

/// Validates `cfg`, runs every trial and aggregates.
pub fn run_and_report(cfg: &RunConfig) -> Result<AlgorithmReport, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let results: Vec<TrialRecord> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(cfg, t))
        .collect();
    let n = results.len() as f64;
    let aggregate = Aggregate {
        success_rate: results.iter().filter(|r| r.success).count() as f64 / n,
        mean_queries: results.iter().map(|r| r.queries as f64).sum::<f64>() / n,
    };
    Ok(AlgorithmReport {
        algorithm: cfg.algorithm.name().to_string(),
        seed: cfg.seed,
        trials: cfg.trials,
        results,
        aggregate,
        ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn summary(report: &AlgorithmReport) -> String {
    let failed = report.results.iter().filter(|r| r.error.is_some()).count();
    format!(
        "{}: {} trials (seed {}), success rate {:.4}, mean queries {:.2}, {} errored, {:.1} ms",
        report.algorithm,
        report.trials,
        report.seed,
        report.aggregate.success_rate,
        report.aggregate.mean_queries,
        failed,
        report.ms
    )
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    if argv.iter().any(|a| a == "--help" || a == "-h" || a == "--version" || a == "-V") {
        let args = std::iter::once("safeq".to_string()).chain(argv);
        if let Err(e) = Cli::try_parse_from(args) {
            let _ = e.print();
        }
        return 0;
    }
    let outcome = parse_args(argv).and_then(|cfg| {
        let report = run_and_report(&cfg)?;
        let json = report.to_json();
        if let Some(path) = &cfg.out {
            fs::write(path, &json).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        }
        if cfg.json {
            println!("{json}");
        } else {
            println!("{}", summary(&report));
        }
        Ok(())
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
