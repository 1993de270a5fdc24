// Copyright 2026 The spinstar Authors
// SPDX-License-Identifier: Apache-2.0

//! `spinstar` command-line driver.
//!
//! A config file is a partial [`SweepSpec`] JSON document laid over the
//! defaults of the chosen subcommand; flags override both.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;
use spinstar_core::sweep::{write_csv, write_json, JsonReport};
use spinstar_core::{run, Experiment, OutputFormat, SweepOutcome, SweepSpec};

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;

#[derive(Parser)]
#[command(name = "spinstar", version, about = "Spin-star memory effects and optimal entangling control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NM and optimized fidelity on an (A, T) lattice
    Grid(Flags),
    /// NM vs optimized fidelity across a family of protocols
    NmFamily(Flags),
    /// Coupling at n whose NM matches a reference configuration
    MatchedNm(Flags),
    /// One configuration
    Single(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Flags {
    /// JSON config (partial spec; missing fields take the subcommand defaults)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads for independent points
    #[arg(long)]
    parallelism: Option<usize>,
    /// Base seed for the random initial fields
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Config(String),
    Numerical(String),
}

fn merge(base: &mut Value, overlay: Value) {
    match (base, overlay) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

fn experiment_name(e: Experiment) -> String {
    serde_json::to_value(e)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default()
}

fn resolve(experiment: Experiment, flags: &Flags) -> Result<SweepSpec, Failure> {
    let cfg = |e: String| Failure::Config(e);
    let mut spec = serde_json::to_value(SweepSpec::for_experiment(experiment)).map_err(|e| cfg(e.to_string()))?;
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
        let overlay: Value = serde_json::from_str(&text).map_err(|e| cfg(format!("{}: {e}", path.display())))?;
        if !overlay.is_object() {
            return Err(cfg(format!("{}: expected a JSON object", path.display())));
        }
        if let Some(e) = overlay.get("experiment") {
            let want = experiment_name(experiment);
            if e.as_str() != Some(want.as_str()) {
                return Err(cfg(format!("config is for experiment {e}, subcommand runs \"{want}\"")));
            }
        }
        merge(&mut spec, overlay);
    }
    let mut spec: SweepSpec = serde_json::from_value(spec).map_err(|e| cfg(e.to_string()))?;
    if let Some(out) = &flags.out {
        spec.output = Some(out.clone());
    }
    if let Some(f) = flags.format {
        spec.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if let Some(p) = flags.parallelism {
        spec.parallelism = p;
    }
    if let Some(seed) = flags.seed {
        spec.optimization.seed = seed;
    }
    spec.validate().map_err(|e| cfg(e.to_string()))?;
    Ok(spec)
}

fn write(outcome: &SweepOutcome, spec: &SweepSpec) -> Result<(), Failure> {
    if outcome.records.is_empty() {
        return Ok(());
    }
    if let Some(path) = &spec.output {
        return spinstar_core::emit_results(outcome, spec, path, spec.format)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())));
    }
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let res = match spec.format {
        OutputFormat::Csv => write_csv(&outcome.records, &mut lock),
        OutputFormat::Json => write_json(
            &JsonReport {
                spec: spec.clone(),
                records: outcome.records.clone(),
                failures: outcome.failures.clone(),
                matched: outcome.matched.clone(),
            },
            &mut lock,
        )
        .and_then(|_| writeln!(lock).map_err(Into::into)),
    };
    res.map_err(|e| Failure::Config(format!("stdout: {e}")))
}

fn execute(experiment: Experiment, flags: &Flags) -> Result<(), Failure> {
    let spec = resolve(experiment, flags)?;
    let outcome = run(&spec).map_err(|e| Failure::Numerical(e.to_string()))?;
    write(&outcome, &spec)?;
    if let Some(m) = &outcome.matched {
        eprintln!(
            "reference NM {:.6}, matched coupling {:.6} (NM {:.6})",
            m.reference_nm, m.matched_coupling, m.matched_nm
        );
    }
    if !outcome.failures.is_empty() {
        let lines: Vec<String> = outcome
            .failures
            .iter()
            .map(|f| format!("point {} [{}]: {}", f.index, f.point, f.error))
            .collect();
        return Err(Failure::Numerical(lines.join("\n")));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, flags) = match &cli.command {
        Command::Grid(f) => (Experiment::Grid, f),
        Command::NmFamily(f) => (Experiment::NmFamily, f),
        Command::MatchedNm(f) => (Experiment::MatchedNm, f),
        Command::Single(f) => (Experiment::Single, f),
    };
    match execute(experiment, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
