// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! Populations, occupation moments and bulk-averaged density cumulants.
//!
//! With `n_j = σ_j† σ_j`, the second-order correlation at distance `r` is
//!
//! ```text
//! G2(r) = Σ_{j=1}^{N-r} (⟨n_j n_{j+r}⟩ - ⟨n_j⟩⟨n_{j+r}⟩) / (N - r)
//! ```
//!
//! and the modified third-order correlation is
//!
//! ```text
//! G3 = Σ_{j=1}^{N-2} (⟨n_j n_{j+1} n_{j+2}⟩ - ⟨n_j⟩⟨n_{j+1}⟩⟨n_{j+2}⟩) / (N - 2)
//! ```
//!
//! which keeps the three (second cumulant × mean) terms on top of the third
//! cumulant.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, BareState};
use crate::error::{Error, Result};
use crate::evolve::Trajectory;

/// Default largest distance for `G2(r)`.
pub const DEFAULT_R_MAX: usize = 6;

/// `P_m(t_k)`, stored as `(n_times) × N`.
#[derive(Clone, Debug, PartialEq)]
pub struct PopulationSeries {
    pub values: Array2<f64>,
}

impl PopulationSeries {
    pub fn n_sites(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_times(&self) -> usize {
        self.values.nrows()
    }

    /// `Σ_m P_m(t_k)` per grid point.
    pub fn totals(&self) -> Vec<f64> {
        self.values.rows().into_iter().map(|r| r.sum()).collect()
    }
}

/// `⟨n_j n_{j+r}⟩(t_k)` for `r = 1..=r_max`; entry `r - 1` is `(n_times) × (N - r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PairMoments {
    pub by_distance: Vec<Array2<f64>>,
}

impl PairMoments {
    pub fn r_max(&self) -> usize {
        self.by_distance.len()
    }
}

/// `⟨n_j n_{j+1} n_{j+2}⟩(t_k)`, stored as `(n_times) × (N - 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleMoments {
    pub values: Array2<f64>,
}

/// `G2(r, t_k)` for `r = 1..=r_max` and `G3(t_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationSeries {
    /// Entry `r - 1` holds the series for distance `r`.
    pub g2: Vec<Vec<f64>>,
    /// Absent for chains shorter than three sites.
    pub g3: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableOptions {
    pub r_max: usize,
    /// Divide every moment by `‖a(t)‖²` before forming cumulants.
    pub normalize: bool,
}

impl ObservableOptions {
    /// `r_max = min(6, N - 1)`, unnormalized.
    pub fn for_chain(n_sites: usize) -> Self {
        ObservableOptions {
            r_max: DEFAULT_R_MAX.min(n_sites.saturating_sub(1)),
            normalize: false,
        }
    }

    pub fn validate(&self, n_sites: usize) -> Result<()> {
        if self.r_max > n_sites.saturating_sub(1) {
            return Err(Error::param(
                "r_max",
                format!("must be at most N - 1 = {}, got {}", n_sites.saturating_sub(1), self.r_max),
            ));
        }
        Ok(())
    }
}

/// Everything extracted from one trajectory.
#[derive(Clone, Debug)]
pub struct RealizationObservables {
    pub populations: PopulationSeries,
    pub pairs: PairMoments,
    pub triples: Option<TripleMoments>,
    pub correlations: CorrelationSeries,
    pub norms: Vec<f64>,
}

impl RealizationObservables {
    pub fn compute(traj: &Trajectory, basis: &Basis, opts: ObservableOptions) -> Result<Self> {
        check_dims(traj, basis)?;
        opts.validate(basis.n_sites())?;
        let probs = probabilities(traj, opts.normalize);
        let populations = populations_from(&probs, basis);
        let pairs = pair_moments_from(&probs, basis, opts.r_max);
        let triples = (basis.n_sites() >= 3).then(|| triple_moments_from(&probs, basis));
        let correlations = correlations(&populations, &pairs, triples.as_ref())?;
        Ok(RealizationObservables {
            populations,
            pairs,
            triples,
            correlations,
            norms: traj.norms.clone(),
        })
    }
}

fn check_dims(traj: &Trajectory, basis: &Basis) -> Result<()> {
    if traj.dim() != basis.dim() {
        return Err(Error::param(
            "trajectory",
            format!("dimension {} does not match basis size {}", traj.dim(), basis.dim()),
        ));
    }
    Ok(())
}

/// `|a_q(t_k)|²`, optionally divided by `‖a(t_k)‖²`.
fn probabilities(traj: &Trajectory, normalize: bool) -> Array2<f64> {
    let mut probs = traj.amplitudes.mapv(|z| z.norm_sqr());
    if normalize {
        for (mut row, &n) in probs.rows_mut().into_iter().zip(&traj.norms) {
            if n > 0.0 {
                row.mapv_inplace(|p| p / n);
            }
        }
    }
    probs
}

fn populations_from(probs: &Array2<f64>, basis: &Basis) -> PopulationSeries {
    let mut values = Array2::zeros((probs.nrows(), basis.n_sites()));
    for (p_row, mut out) in probs.rows().into_iter().zip(values.rows_mut()) {
        for (q, &p) in p_row.iter().enumerate() {
            for &s in basis.sites_of(q) {
                out[s as usize] += p;
            }
        }
    }
    PopulationSeries { values }
}

fn pair_moments_from(probs: &Array2<f64>, basis: &Basis, r_max: usize) -> PairMoments {
    let n = basis.n_sites();
    let mut by_distance: Vec<Array2<f64>> = (1..=r_max)
        .map(|r| Array2::zeros((probs.nrows(), n - r)))
        .collect();
    for q in 0..basis.dim() {
        let sites = basis.sites_of(q);
        for (a, &i) in sites.iter().enumerate() {
            for &k in &sites[a + 1..] {
                let r = (k - i) as usize;
                if r > r_max {
                    break;
                }
                let mut col = by_distance[r - 1].column_mut(i as usize);
                col.zip_mut_with(&probs.column(q), |acc, &p| *acc += p);
            }
        }
    }
    PairMoments { by_distance }
}

fn triple_moments_from(probs: &Array2<f64>, basis: &Basis) -> TripleMoments {
    let n = basis.n_sites();
    let mut values = Array2::zeros((probs.nrows(), n - 2));
    for q in 0..basis.dim() {
        let mask = basis.mask_of(q);
        for &i in basis.sites_of(q) {
            let run = 0b111u64 << i;
            if (i as usize) + 2 < n && mask & run == run {
                let mut col = values.column_mut(i as usize);
                col.zip_mut_with(&probs.column(q), |acc, &p| *acc += p);
            }
        }
    }
    TripleMoments { values }
}

/// `P_m(t_k) = Σ_{q ∋ m} |a_q(t_k)|²`.
pub fn populations(traj: &Trajectory, basis: &Basis) -> Result<PopulationSeries> {
    check_dims(traj, basis)?;
    Ok(populations_from(&probabilities(traj, false), basis))
}

/// `⟨Π_{j ∈ sites} n_j⟩(t_k)` for distinct 1-based `sites`.
///
/// More sites than excitations gives the zero series.
pub fn moment(traj: &Trajectory, basis: &Basis, sites: &[usize]) -> Result<Vec<f64>> {
    check_dims(traj, basis)?;
    let n = basis.n_sites();
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    if sorted.is_empty() || sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::param("sites", format!("must be distinct and non-empty, got {sites:?}")));
    }
    if sorted.iter().any(|&s| s == 0 || s > n) {
        return Err(Error::param("sites", format!("labels must lie in 1..={n}, got {sites:?}")));
    }
    let want = BareState::from_zero_based(sorted.iter().map(|s| s - 1)).mask();
    let probs = probabilities(traj, false);
    let mut out = vec![0.0; traj.n_times()];
    for q in (0..basis.dim()).filter(|&q| basis.mask_of(q) & want == want) {
        for (o, &p) in out.iter_mut().zip(probs.column(q)) {
            *o += p;
        }
    }
    Ok(out)
}

/// Pair moments for `r = 1..=r_max`.
pub fn pair_moments(traj: &Trajectory, basis: &Basis, r_max: usize) -> Result<PairMoments> {
    check_dims(traj, basis)?;
    ObservableOptions { r_max, normalize: false }.validate(basis.n_sites())?;
    Ok(pair_moments_from(&probabilities(traj, false), basis, r_max))
}

/// Consecutive-triple moments.
pub fn triple_moments(traj: &Trajectory, basis: &Basis) -> Result<TripleMoments> {
    check_dims(traj, basis)?;
    if basis.n_sites() < 3 {
        return Err(Error::param("n_sites", "triple moments need N >= 3"));
    }
    Ok(triple_moments_from(&probabilities(traj, false), basis))
}

/// Bulk-averaged connected two-point correlation at distance `r`.
pub fn g2(pop: &PopulationSeries, pairs: &PairMoments, r: usize) -> Result<Vec<f64>> {
    let n = pop.n_sites();
    if r == 0 || r >= n {
        return Err(Error::param("r", format!("must lie in 1..={}, got {r}", n.saturating_sub(1))));
    }
    if r > pairs.r_max() {
        return Err(Error::param(
            "r",
            format!("pair moments only cover r <= {}, got {r}", pairs.r_max()),
        ));
    }
    let pair = &pairs.by_distance[r - 1];
    if pair.nrows() != pop.n_times() || pair.ncols() != n - r {
        return Err(Error::param("pairs", "shape does not match the populations"));
    }
    let norm = (n - r) as f64;
    Ok(pop
        .values
        .rows()
        .into_iter()
        .zip(pair.rows())
        .map(|(p, nn)| {
            let sum: f64 = (0..n - r).map(|j| nn[j] - p[j] * p[j + r]).sum();
            sum / norm
        })
        .collect())
}

/// Bulk-averaged modified third-order correlation.
pub fn g3(pop: &PopulationSeries, triples: &TripleMoments) -> Result<Vec<f64>> {
    let n = pop.n_sites();
    if n < 3 {
        return Err(Error::param("n_sites", format!("G3 needs N >= 3, got {n}")));
    }
    let t = &triples.values;
    if t.nrows() != pop.n_times() || t.ncols() != n - 2 {
        return Err(Error::param("triples", "shape does not match the populations"));
    }
    let norm = (n - 2) as f64;
    Ok(pop
        .values
        .rows()
        .into_iter()
        .zip(t.rows())
        .map(|(p, nnn)| {
            let sum: f64 = (0..n - 2)
                .map(|j| nnn[j] - p[j] * p[j + 1] * p[j + 2])
                .sum();
            sum / norm
        })
        .collect())
}

/// `G2(r)` for every available distance, and `G3` when `N >= 3`.
pub fn correlations(
    pop: &PopulationSeries,
    pairs: &PairMoments,
    triples: Option<&TripleMoments>,
) -> Result<CorrelationSeries> {
    let g2 = (1..=pairs.r_max())
        .map(|r| g2(pop, pairs, r))
        .collect::<Result<Vec<_>>>()?;
    let g3 = triples.map(|t| g3(pop, t)).transpose()?;
    Ok(CorrelationSeries { g2, g3 })
}

/// Time after which `disordered - clean` turns from negative to
/// nonnegative for good.
///
/// Only grid points with `t > t_min` are considered. The crossing is linearly
/// interpolated between the last negative point and its successor. Returns
/// `None` if the difference never goes negative, or is still negative at the
/// end of the grid.
pub fn crossing_time(
    times: &[f64],
    disordered: &[f64],
    clean: &[f64],
    t_min: f64,
) -> Result<Option<f64>> {
    if disordered.len() != times.len() || clean.len() != times.len() {
        return Err(Error::param(
            "series",
            format!(
                "grid mismatch: {} times, {} disordered, {} clean values",
                times.len(),
                disordered.len(),
                clean.len()
            ),
        ));
    }
    let diff = |k: usize| disordered[k] - clean[k];
    let Some(first) = times.iter().position(|&t| t > t_min) else {
        return Ok(None);
    };
    let Some(last_neg) = (first..times.len()).rev().find(|&k| diff(k) < 0.0) else {
        return Ok(None);
    };
    if last_neg + 1 >= times.len() {
        return Ok(None);
    }
    let (d0, d1) = (diff(last_neg), diff(last_neg + 1));
    let (t0, t1) = (times[last_neg], times[last_neg + 1]);
    Ok(Some(t0 + (t1 - t0) * (-d0) / (d1 - d0)))
}
