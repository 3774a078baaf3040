// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! Disorder ensembles with reproducible seeding and ordered reduction.
//!
//! Realization `i` draws its phases from a ChaCha stream keyed by
//! `(master_seed, i)`, so it can be recomputed in isolation. Realizations run
//! in batches on a worker pool; each batch is folded into the running
//! averages in ascending index order, which makes the result bit-identical
//! for any worker count.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coupling::{assemble_with, RowPattern, DEFAULT_MAX_DIM};
use crate::error::{Error, Result};
use crate::evolve::{initial_state, propagate, Method, TimeGrid};
use crate::kernel::{build_kernel, check_disorder_width, DisorderRealization, SystemParams};
use crate::observables::{
    correlations, ObservableOptions, PairMoments, PopulationSeries, RealizationObservables,
    TripleMoments,
};

/// Realizations per worker and batch.
const BATCH_PER_WORKER: usize = 4;

/// Order in which disorder averaging and cumulant formation are applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AveragingMode {
    /// Average the per-realization `G2`/`G3` series.
    #[default]
    CumulantThenAverage,
    /// Average the raw moments first, then form cumulants from the averages.
    AverageThenCumulant,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub realizations: u64,
    pub seed: u64,
    pub averaging: AveragingMode,
    /// Worker threads; `None` uses the global pool size. Never affects results.
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            realizations: 400,
            seed: 0x5eed_2022,
            averaging: AveragingMode::default(),
            workers: None,
        }
    }
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.realizations == 0 {
            return Err(Error::param("realizations", "must be at least 1"));
        }
        if self.workers == Some(0) {
            return Err(Error::param("workers", "must be at least 1"));
        }
        Ok(())
    }
}

/// Onsite phases of realization `index`, uniform in `[-width, width]`.
pub fn draw_disorder(
    width: f64,
    n: usize,
    index: u64,
    master_seed: u64,
) -> Result<DisorderRealization> {
    check_disorder_width(width)?;
    if width == 0.0 {
        return Ok(DisorderRealization::clean(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    let phases = (0..n).map(|_| rng.random_range(-width..=width)).collect();
    Ok(DisorderRealization { phases })
}

/// Per-realization pipeline: parameters, quench and grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub params: SystemParams,
    /// Initially excited sites, 1-based.
    pub quench: Vec<usize>,
    pub grid: TimeGrid,
    pub method: Method,
    pub observables: ObservableOptions,
}

impl Simulation {
    pub fn new(params: SystemParams, quench: Vec<usize>, grid: TimeGrid) -> Self {
        let observables = ObservableOptions::for_chain(params.n_sites);
        Simulation {
            params,
            quench,
            grid,
            method: Method::Expm,
            observables,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.grid.validate()?;
        self.observables.validate(self.params.n_sites)?;
        initial_state(&self.quench, self.params.n_sites, self.params.n_excitations)?;
        Ok(())
    }

    /// Runs one realization with the given phases.
    pub fn realize_with(
        &self,
        pattern: &Arc<RowPattern>,
        disorder: &DisorderRealization,
    ) -> Result<RealizationObservables> {
        let kernel = build_kernel(&self.params, disorder)?;
        let v = assemble_with(pattern, &self.params, &kernel)?;
        let a0 = initial_state(&self.quench, self.params.n_sites, self.params.n_excitations)?;
        let traj = propagate(&v, &a0, &self.grid, self.method)?;
        RealizationObservables::compute(&traj, pattern.basis(), self.observables)
    }

    pub fn realize(
        &self,
        pattern: &Arc<RowPattern>,
        index: u64,
        seed: u64,
    ) -> Result<RealizationObservables> {
        let disorder = draw_disorder(self.params.disorder_width, self.params.n_sites, index, seed)?;
        self.realize_with(pattern, &disorder)
    }
}

/// Running mean and sum of squared deviations (Welford).
#[derive(Clone, Debug)]
struct Welford {
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Welford {
    fn new(len: usize) -> Self {
        Welford {
            mean: vec![0.0; len],
            m2: vec![0.0; len],
        }
    }

    fn push<'a>(&mut self, count: u64, values: impl IntoIterator<Item = &'a f64>) {
        let k = count as f64;
        for ((mean, m2), &x) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(values) {
            let delta = x - *mean;
            *mean += delta / k;
            *m2 += delta * (x - *mean);
        }
    }

    fn std_errors(&self, count: u64) -> Vec<f64> {
        if count < 2 {
            return vec![0.0; self.mean.len()];
        }
        let n = count as f64;
        self.m2
            .iter()
            .map(|&m2| (m2.max(0.0) / (n - 1.0) / n).sqrt())
            .collect()
    }
}

#[derive(Clone, Debug)]
struct Accumulator {
    count: u64,
    shape: (usize, usize),
    populations: Welford,
    pairs: Vec<Welford>,
    triples: Option<Welford>,
    g2: Vec<Welford>,
    g3: Option<Welford>,
    norms: Welford,
    max_norm_increase: f64,
}

impl Accumulator {
    fn new(n_times: usize, n_sites: usize, r_max: usize) -> Self {
        let has_g3 = n_sites >= 3;
        Accumulator {
            count: 0,
            shape: (n_times, n_sites),
            populations: Welford::new(n_times * n_sites),
            pairs: (1..=r_max).map(|r| Welford::new(n_times * (n_sites - r))).collect(),
            triples: has_g3.then(|| Welford::new(n_times * (n_sites - 2))),
            g2: (0..r_max).map(|_| Welford::new(n_times)).collect(),
            g3: has_g3.then(|| Welford::new(n_times)),
            norms: Welford::new(n_times),
            max_norm_increase: f64::NEG_INFINITY,
        }
    }

    fn push(&mut self, obs: &RealizationObservables) {
        self.count += 1;
        let k = self.count;
        self.populations.push(k, obs.populations.values.iter());
        for (acc, p) in self.pairs.iter_mut().zip(&obs.pairs.by_distance) {
            acc.push(k, p.iter());
        }
        if let (Some(acc), Some(t)) = (self.triples.as_mut(), obs.triples.as_ref()) {
            acc.push(k, t.values.iter());
        }
        for (acc, g) in self.g2.iter_mut().zip(&obs.correlations.g2) {
            acc.push(k, g.iter());
        }
        if let (Some(acc), Some(g)) = (self.g3.as_mut(), obs.correlations.g3.as_ref()) {
            acc.push(k, g.iter());
        }
        self.norms.push(k, obs.norms.iter());
        let increase = obs
            .norms
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max);
        self.max_norm_increase = self.max_norm_increase.max(increase);
    }
}

/// Disorder-averaged observables and run metadata.
#[derive(Clone, Debug)]
pub struct EnsembleResult {
    pub simulation: Simulation,
    pub config: EnsembleConfig,
    /// Realizations folded into the averages.
    pub realizations: u64,
    /// False when the run was interrupted before `config.realizations`.
    pub complete: bool,
    pub times: Vec<f64>,
    /// `⟨P_m(t_k)⟩`, `(n_times) × N`.
    pub populations: Array2<f64>,
    pub populations_se: Array2<f64>,
    /// `⟨G2(r)⟩`, entry `r - 1`.
    pub g2: Vec<Vec<f64>>,
    /// Standard error of the per-realization `G2(r)` series.
    pub g2_se: Vec<Vec<f64>>,
    pub g3: Option<Vec<f64>>,
    pub g3_se: Option<Vec<f64>>,
    /// Mean `‖a(t_k)‖²`.
    pub norms: Vec<f64>,
    pub norms_se: Vec<f64>,
    /// Largest single-step increase of `‖a‖²` seen in any realization.
    pub max_norm_increase: f64,
}

impl EnsembleResult {
    /// `Σ_m ⟨P_m(t_k)⟩`.
    pub fn total_population(&self) -> Vec<f64> {
        self.populations.rows().into_iter().map(|r| r.sum()).collect()
    }

    pub fn n_sites(&self) -> usize {
        self.populations.ncols()
    }
}

/// Incremental ensemble driver.
///
/// Because realizations are folded in index order, stopping after `k`
/// realizations yields exactly the result of a fresh `k`-realization run.
pub struct EnsembleRunner {
    simulation: Simulation,
    config: EnsembleConfig,
    pattern: Arc<RowPattern>,
    pool: rayon::ThreadPool,
    acc: Accumulator,
}

impl EnsembleRunner {
    pub fn new(simulation: Simulation, config: EnsembleConfig) -> Result<Self> {
        Self::with_capacity(simulation, config, DEFAULT_MAX_DIM)
    }

    pub fn with_capacity(simulation: Simulation, config: EnsembleConfig, max_dim: usize) -> Result<Self> {
        simulation.validate()?;
        config.validate()?;
        let p = &simulation.params;
        let pattern = Arc::new(RowPattern::with_capacity(p.n_sites, p.n_excitations, max_dim)?);
        let workers = config.workers.unwrap_or_else(rayon::current_num_threads);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::param("workers", e.to_string()))?;
        let acc = Accumulator::new(
            simulation.grid.len(),
            p.n_sites,
            simulation.observables.r_max,
        );
        Ok(EnsembleRunner {
            simulation,
            config,
            pattern,
            pool,
            acc,
        })
    }

    pub fn completed(&self) -> u64 {
        self.acc.count
    }

    /// Runs realizations until `target` have been folded in, or until
    /// `cancel` is raised (checked between batches). Returns the count done.
    pub fn advance_to(&mut self, target: u64, cancel: Option<&AtomicBool>) -> Result<u64> {
        let batch = (self.pool.current_num_threads() * BATCH_PER_WORKER).max(1) as u64;
        while self.acc.count < target {
            if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                break;
            }
            let start = self.acc.count;
            let end = (start + batch).min(target);
            let sim = &self.simulation;
            let pattern = &self.pattern;
            let seed = self.config.seed;
            let results: Vec<Result<RealizationObservables>> = self.pool.install(|| {
                (start..end)
                    .into_par_iter()
                    .map(|i| sim.realize(pattern, i, seed))
                    .collect()
            });
            for (offset, res) in results.into_iter().enumerate() {
                let obs = res.map_err(|e| Error::Realization {
                    index: start + offset as u64,
                    source: Box::new(e),
                })?;
                self.acc.push(&obs);
            }
        }
        Ok(self.acc.count)
    }

    /// Runs up to the configured realization count.
    pub fn run(&mut self, cancel: Option<&AtomicBool>) -> Result<EnsembleResult> {
        self.advance_to(self.config.realizations, cancel)?;
        self.result()
    }

    /// Snapshot of the averages over the realizations completed so far.
    pub fn result(&self) -> Result<EnsembleResult> {
        let acc = &self.acc;
        if acc.count == 0 {
            return Err(Error::Interrupted);
        }
        let (n_times, n_sites) = acc.shape;
        let to_matrix = |v: Vec<f64>, cols: usize| {
            Array2::from_shape_vec((n_times, cols), v).expect("accumulator shape")
        };
        let populations = to_matrix(acc.populations.mean.clone(), n_sites);
        let populations_se = to_matrix(acc.populations.std_errors(acc.count), n_sites);

        let (g2, g3) = match self.config.averaging {
            AveragingMode::CumulantThenAverage => (
                acc.g2.iter().map(|w| w.mean.clone()).collect(),
                acc.g3.as_ref().map(|w| w.mean.clone()),
            ),
            AveragingMode::AverageThenCumulant => {
                let pop = PopulationSeries {
                    values: populations.clone(),
                };
                let pairs = PairMoments {
                    by_distance: acc
                        .pairs
                        .iter()
                        .enumerate()
                        .map(|(i, w)| to_matrix(w.mean.clone(), n_sites - (i + 1)))
                        .collect(),
                };
                let triples = acc.triples.as_ref().map(|w| TripleMoments {
                    values: to_matrix(w.mean.clone(), n_sites - 2),
                });
                let c = correlations(&pop, &pairs, triples.as_ref())?;
                (c.g2, c.g3)
            }
        };

        let mut config = self.config.clone();
        config.workers = None;
        Ok(EnsembleResult {
            simulation: self.simulation.clone(),
            config,
            realizations: acc.count,
            complete: acc.count >= self.config.realizations,
            times: self.simulation.grid.times(),
            populations,
            populations_se,
            g2,
            g2_se: acc.g2.iter().map(|w| w.std_errors(acc.count)).collect(),
            g3,
            g3_se: acc.g3.as_ref().map(|w| w.std_errors(acc.count)),
            norms: acc.norms.mean.clone(),
            norms_se: acc.norms.std_errors(acc.count),
            max_norm_increase: acc.max_norm_increase,
        })
    }
}

/// Draws, propagates and averages `config.realizations` disorder realizations.
pub fn run_ensemble(simulation: &Simulation, config: &EnsembleConfig) -> Result<EnsembleResult> {
    EnsembleRunner::new(simulation.clone(), config.clone())?.run(None)
}

/// Largest relative deviation of the total population between two runs that
/// differ only in their realization count.
pub fn convergence_check(a: &EnsembleResult, b: &EnsembleResult) -> Result<f64> {
    if a.simulation != b.simulation
        || a.config.seed != b.config.seed
        || a.config.averaging != b.config.averaging
    {
        return Err(Error::param(
            "results",
            "convergence check needs runs that differ only in realization count",
        ));
    }
    Ok(a
        .total_population()
        .iter()
        .zip(b.total_population())
        .map(|(x, y)| (x - y).abs() / y)
        .fold(0.0, f64::max))
}
