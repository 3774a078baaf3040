// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! Executes a [`RunConfig`]: every sweep point, the optional clean reference
//! run, crossing times and output files.

use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use crate::config::{RunConfig, RunPoint};
use crate::ensemble::{EnsembleResult, EnsembleRunner};
use crate::error::Result;
use crate::observables::crossing_time;
use crate::output::{write_outputs, Crossings, Metadata};

/// Subdirectory of a run point holding the clean reference.
pub const CLEAN_DIR: &str = "clean";

#[derive(Debug, Default)]
pub struct RunOptions<'a> {
    /// Overrides `ensemble.workers` from the file.
    pub workers: Option<usize>,
    pub allow_dimensional: bool,
    /// Raised from outside (e.g. a signal handler) to stop after the
    /// current batch.
    pub cancel: Option<&'a AtomicBool>,
}

/// Outcome of one run point.
#[derive(Clone, Debug)]
pub struct PointReport {
    pub label: Option<String>,
    pub dir: PathBuf,
    pub dim: u64,
    pub realizations: u64,
    pub complete: bool,
    /// 1-based site and value of the largest `⟨P_m⟩` at the final time.
    pub peak: (usize, f64),
    pub crossings: Option<Crossings>,
    pub elapsed: Duration,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub points: Vec<PointReport>,
    /// False if the run was interrupted; later sweep points are then absent.
    pub complete: bool,
}

/// `G2(r)` and `G3` crossing times of `disordered` against `clean`.
pub fn crossings(disordered: &EnsembleResult, clean: &EnsembleResult, t_min: f64) -> Result<Crossings> {
    let times = &disordered.times;
    let g2 = disordered
        .g2
        .iter()
        .zip(&clean.g2)
        .map(|(d, c)| crossing_time(times, d, c, t_min))
        .collect::<Result<_>>()?;
    let g3 = match (&disordered.g3, &clean.g3) {
        (Some(d), Some(c)) => Some(crossing_time(times, d, c, t_min)?),
        _ => None,
    };
    Ok(Crossings { g2, g3 })
}

fn final_peak(result: &EnsembleResult) -> (usize, f64) {
    let last = result.populations.row(result.populations.nrows() - 1);
    last.iter()
        .enumerate()
        .fold((1, f64::NEG_INFINITY), |best, (m, &v)| {
            if v > best.1 {
                (m + 1, v)
            } else {
                best
            }
        })
}

fn clean_point(point: &RunPoint) -> RunConfig {
    let mut cfg = point.config.clone();
    cfg.system.w_over_pi = 0.0;
    cfg.ensemble.realizations = 1;
    cfg.observables.crossing = false;
    cfg.output.dir = point.dir.join(CLEAN_DIR);
    cfg
}

fn run_single(config: &RunConfig, opts: &RunOptions<'_>) -> Result<(EnsembleResult, RunPoint)> {
    let point = config
        .expand(opts.allow_dimensional)?
        .pop()
        .expect("a config without sweep expands to one point");
    let mut ensemble = point.ensemble.clone();
    if opts.workers.is_some() {
        ensemble.workers = opts.workers;
    }
    let mut runner =
        EnsembleRunner::with_capacity(point.simulation.clone(), ensemble, config.propagation.max_dim)?;
    let result = runner.run(opts.cancel)?;
    Ok((result, point))
}

fn dim_of(point: &RunPoint) -> u64 {
    let p = &point.simulation.params;
    crate::basis::binomial(p.n_sites, p.n_excitations).unwrap_or(0) as u64
}

/// Runs every point of `config` and writes its outputs.
pub fn run(config: &RunConfig, opts: &RunOptions<'_>) -> Result<RunReport> {
    let points = config.expand(opts.allow_dimensional)?;
    let mut reports = Vec::with_capacity(points.len());
    for point in points {
        let started = Instant::now();
        let (result, _) = run_single(&point.config, opts)?;
        let mut crossing_report = None;
        if point.config.observables.crossing && result.complete {
            let clean_cfg = clean_point(&point);
            let (clean, clean_pt) = run_single(&clean_cfg, opts)?;
            if clean.complete {
                let meta = Metadata::new(&clean, &clean_cfg, None, dim_of(&clean_pt), None);
                write_outputs(&clean_pt.dir, &clean, &clean_cfg, &meta)?;
                crossing_report = Some(crossings(&result, &clean, point.config.observables.t_min)?);
            }
        }
        let dim = dim_of(&point);
        let meta = Metadata::new(&result, &point.config, point.label.clone(), dim, crossing_report.clone());
        write_outputs(&point.dir, &result, &point.config, &meta)?;
        let interrupted = !result.complete || opts.cancel.is_some_and(|c| c.load(Ordering::Relaxed));
        reports.push(PointReport {
            label: point.label,
            dir: point.dir,
            dim,
            realizations: result.realizations,
            complete: result.complete,
            peak: final_peak(&result),
            crossings: crossing_report,
            elapsed: started.elapsed(),
        });
        if interrupted {
            return Ok(RunReport {
                points: reports,
                complete: false,
            });
        }
    }
    Ok(RunReport {
        points: reports,
        complete: true,
    })
}

/// Static cost estimate for one run point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointEstimate {
    pub label: Option<String>,
    pub dim: u64,
    /// Peak resident bytes per worker.
    pub memory_bytes: u64,
    /// Single-worker wall-clock seconds, order of magnitude only.
    pub runtime_seconds: f64,
}

/// Sustained complex multiply-add throughput assumed for estimates.
const ESTIMATE_FLOPS: f64 = 1.5e10;

/// Validates `config` and estimates memory and runtime for every point.
pub fn estimate(config: &RunConfig, allow_dimensional: bool) -> Result<Vec<PointEstimate>> {
    let points = config.expand(allow_dimensional)?;
    Ok(points
        .iter()
        .map(|point| {
            let dim = dim_of(point) as f64;
            let n_times = point.simulation.grid.len() as f64;
            let dense = 16.0 * dim * dim;
            // Propagator, its Padé workspace and the trajectory.
            let memory = 10.0 * dense + 16.0 * dim * n_times;
            // expm costs about a dozen dense products, stepping one matvec per point.
            let per_realization = (12.0 * 8.0 * dim.powi(3) + 8.0 * dim * dim * n_times) / ESTIMATE_FLOPS;
            let mut realizations = point.ensemble.realizations as f64;
            if point.config.observables.crossing {
                realizations += 1.0;
            }
            PointEstimate {
                label: point.label.clone(),
                dim: dim as u64,
                memory_bytes: memory as u64,
                runtime_seconds: per_realization * realizations,
            }
        })
        .collect())
}
