// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! `chainloc`: run, validate and inspect ensemble configurations.
//!
//! Exit status is 0 on success, 1 for configuration errors and 2 for
//! runtime failures, including interrupted runs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};

use chainloc::config::{presets, RunConfig};
use chainloc::runner::{self, RunOptions, RunReport};
use chainloc::Error;
use clap::{Parser, Subcommand};

static CANCEL: AtomicBool = AtomicBool::new(false);

#[derive(Parser)]
#[command(name = "chainloc", version, about = "Disorder-averaged dynamics of excitations in a chiral atomic chain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every point of a configuration and write its outputs.
    Run {
        config: PathBuf,
        /// Worker threads; results do not depend on it.
        #[arg(long, env = "CHAINLOC_WORKERS")]
        workers: Option<usize>,
        /// Accept `gamma != 1`.
        #[arg(long)]
        allow_dimensional: bool,
        /// Replace `output.dir` from the file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a configuration and estimate its cost without running it.
    Validate {
        config: PathBuf,
        #[arg(long)]
        allow_dimensional: bool,
    },
    /// Bundled configurations.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List preset names with a one-line description.
    List,
    /// Print a preset's TOML to stdout.
    Emit { name: String },
}

fn exit_code(err: &Error) -> ExitCode {
    if err.is_config_error() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn load(path: &Path) -> Result<RunConfig, ExitCode> {
    RunConfig::from_path(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(1)
    })
}

fn format_time(t: Option<f64>) -> String {
    t.map_or_else(|| "none".to_owned(), |t| format!("{t:.2}"))
}

fn print_report(report: &RunReport) {
    for point in &report.points {
        let name = point.label.as_deref().unwrap_or("run");
        println!(
            "{name}: dim={} realizations={}{} wall-clock={:.1}s",
            point.dim,
            point.realizations,
            if point.complete { "" } else { " (incomplete)" },
            point.elapsed.as_secs_f64()
        );
        println!("  peak <P_m> at final time: {:.4e} at site {}", point.peak.1, point.peak.0);
        if let Some(c) = &point.crossings {
            let g2: Vec<String> = c
                .g2
                .iter()
                .enumerate()
                .map(|(i, t)| format!("r={}:{}", i + 1, format_time(*t)))
                .collect();
            println!("  G2 crossing times: {}", g2.join(" "));
            if let Some(t) = c.g3 {
                println!("  G3 crossing time: {}", format_time(t));
            }
        }
        println!("  output: {}", point.dir.display());
    }
}

fn run(config: PathBuf, workers: Option<usize>, allow_dimensional: bool, out: Option<PathBuf>) -> ExitCode {
    let mut cfg = match load(&config) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    if let Some(dir) = out {
        cfg.output.dir = dir;
    }
    if let Err(e) = ctrlc::set_handler(|| {
        eprintln!("interrupt received; finishing the current batch");
        CANCEL.store(true, Ordering::Relaxed);
    }) {
        eprintln!("warning: cannot install interrupt handler: {e}");
    }
    let opts = RunOptions {
        workers,
        allow_dimensional,
        cancel: Some(&CANCEL),
    };
    match runner::run(&cfg, &opts) {
        Ok(report) => {
            print_report(&report);
            if report.complete {
                ExitCode::SUCCESS
            } else {
                eprintln!("run interrupted; partial results written and marked incomplete");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn validate(config: PathBuf, allow_dimensional: bool) -> ExitCode {
    let cfg = match load(&config) {
        Ok(cfg) => cfg,
        Err(code) => return code,
    };
    match runner::estimate(&cfg, allow_dimensional) {
        Ok(points) => {
            println!("{}: ok, {} run point(s)", config.display(), points.len());
            for p in points {
                println!(
                    "{}: dim={} memory~{:.1} MiB per worker, runtime~{:.0} s on one worker",
                    p.label.as_deref().unwrap_or("run"),
                    p.dim,
                    p.memory_bytes as f64 / (1024.0 * 1024.0),
                    p.runtime_seconds
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {e}", config.display());
            exit_code(&e)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            workers,
            allow_dimensional,
            out,
        } => run(config, workers, allow_dimensional, out),
        Command::Validate {
            config,
            allow_dimensional,
        } => validate(config, allow_dimensional),
        Command::Presets { action } => match action {
            PresetAction::List => {
                for (name, description, _) in presets::PRESETS {
                    println!("{name:<6}  {description}");
                }
                ExitCode::SUCCESS
            }
            PresetAction::Emit { name } => match presets::get(&name) {
                Some(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                None => {
                    let known: Vec<&str> = presets::names().collect();
                    eprintln!("error: unknown preset `{name}` (known: {})", known.join(", "));
                    ExitCode::from(1)
                }
            },
        },
    }
}
