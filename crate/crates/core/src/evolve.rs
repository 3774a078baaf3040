// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! Time propagation of `da/dt = V a` on a uniform grid.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{rank, BareState};
use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::linalg::expm;

/// Relative agreement required between the two propagation methods.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-6;

/// Largest `‖V‖₁ h` allowed for an RK4 substep.
pub const RK4_STEP_BOUND: f64 = 0.1;

/// Uniform grid `{0, Δt, ..., t_max}` in units of `1/γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub t_max: f64,
    pub n_steps: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            t_max: 100.0,
            n_steps: 400,
        }
    }
}

impl TimeGrid {
    pub fn new(t_max: f64, n_steps: usize) -> Result<Self> {
        let grid = TimeGrid { t_max, n_steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::param("n_steps", "must be positive"));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::param(
                "t_max",
                format!("must be positive and finite, got {}", self.t_max),
            ));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.t_max / self.n_steps as f64
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_steps)
            .map(|k| k as f64 * self.t_max / self.n_steps as f64)
            .collect()
    }

    /// Index of the grid point closest to `t` (clamped to the grid).
    pub fn nearest_index(&self, t: f64) -> usize {
        let k = (t / self.dt()).round();
        if k <= 0.0 {
            0
        } else {
            (k as usize).min(self.n_steps)
        }
    }
}

/// Propagation scheme.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// One step propagator `exp(V Δt)` reused across the grid.
    #[default]
    Expm,
    /// Classical fourth-order Runge-Kutta with substeps.
    Rk4,
    /// Runs both and fails if they disagree; returns the `expm` trajectory.
    SelfTest,
}

/// Amplitudes `a_q(t_k)` on every grid point.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `(n_steps + 1) × dim` amplitudes.
    pub amplitudes: Array2<Complex64>,
    /// `‖a(t_k)‖²`.
    pub norms: Vec<f64>,
}

impl Trajectory {
    fn from_amplitudes(times: Vec<f64>, amplitudes: Array2<Complex64>) -> Self {
        let norms = amplitudes
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|z| z.norm_sqr()).sum())
            .collect();
        Trajectory {
            times,
            amplitudes,
            norms,
        }
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.ncols()
    }
}

/// Unit vector on the bare state with the given excited sites (1-based).
pub fn initial_state(excited_sites: &[usize], n: usize, m: usize) -> Result<Array1<Complex64>> {
    let state = BareState::new(excited_sites.to_vec(), n, m)?;
    let q = rank(&state, n, m)?;
    let dim = crate::basis::binomial(n, m).unwrap_or(0) as usize;
    let mut a = Array1::from_elem(dim, Complex64::new(0.0, 0.0));
    a[q] = Complex64::new(1.0, 0.0);
    Ok(a)
}

/// Propagates `a0` under `V` over `grid`.
pub fn propagate(
    v: &CouplingMatrix,
    a0: &Array1<Complex64>,
    grid: &TimeGrid,
    method: Method,
) -> Result<Trajectory> {
    grid.validate()?;
    if a0.len() != v.dim() {
        return Err(Error::param(
            "a0",
            format!("length {} does not match dimension {}", a0.len(), v.dim()),
        ));
    }
    let norm0: f64 = a0.iter().map(|z| z.norm_sqr()).sum();
    if (norm0 - 1.0).abs() > 1e-12 {
        return Err(Error::param(
            "a0",
            format!("initial state must be normalized, ‖a0‖² = {norm0}"),
        ));
    }
    if !v.is_finite() {
        return Err(Error::Numeric("non-finite entry in the coupling matrix".into()));
    }
    match method {
        Method::Expm => propagate_expm(v, a0, grid),
        Method::Rk4 => propagate_rk4(v, a0, grid),
        Method::SelfTest => {
            let reference = propagate_expm(v, a0, grid)?;
            let other = propagate_rk4(v, a0, grid)?;
            let deviation = relative_deviation(&reference, &other);
            if deviation > CROSS_CHECK_TOLERANCE {
                return Err(Error::Integrator {
                    deviation,
                    tolerance: CROSS_CHECK_TOLERANCE,
                });
            }
            Ok(reference)
        }
    }
}

/// Largest `‖a(t_k) - b(t_k)‖₂ / ‖a(t_k)‖₂` over the grid.
pub fn relative_deviation(a: &Trajectory, b: &Trajectory) -> f64 {
    a.amplitudes
        .rows()
        .into_iter()
        .zip(b.amplitudes.rows())
        .zip(&a.norms)
        .map(|((ra, rb), &n)| {
            let diff: f64 = ra.iter().zip(rb.iter()).map(|(x, y)| (x - y).norm_sqr()).sum();
            (diff / n.max(f64::MIN_POSITIVE)).sqrt()
        })
        .fold(0.0, f64::max)
}

fn propagate_expm(v: &CouplingMatrix, a0: &Array1<Complex64>, grid: &TimeGrid) -> Result<Trajectory> {
    let dt = grid.dt();
    let step = expm(&v.to_dense()?.mapv(|z| z * dt))?;
    let mut amps = Array2::from_elem((grid.len(), v.dim()), Complex64::new(0.0, 0.0));
    amps.row_mut(0).assign(a0);
    let mut current = a0.clone();
    for k in 1..grid.len() {
        current = step.dot(&current);
        amps.row_mut(k).assign(&current);
    }
    Ok(Trajectory::from_amplitudes(grid.times(), amps))
}

fn propagate_rk4(v: &CouplingMatrix, a0: &Array1<Complex64>, grid: &TimeGrid) -> Result<Trajectory> {
    let dim = v.dim();
    let dt = grid.dt();
    let substeps = ((v.norm1() * dt / RK4_STEP_BOUND).ceil() as usize).max(1);
    let h = dt / substeps as f64;

    let zero = Complex64::new(0.0, 0.0);
    let mut y: Vec<Complex64> = a0.to_vec();
    let mut k1 = vec![zero; dim];
    let mut k2 = vec![zero; dim];
    let mut k3 = vec![zero; dim];
    let mut k4 = vec![zero; dim];
    let mut tmp = vec![zero; dim];

    let mut amps = Array2::from_elem((grid.len(), dim), zero);
    amps.row_mut(0).assign(a0);
    for k in 1..grid.len() {
        for _ in 0..substeps {
            v.apply(&y, &mut k1);
            axpy_into(&mut tmp, &y, h / 2.0, &k1);
            v.apply(&tmp, &mut k2);
            axpy_into(&mut tmp, &y, h / 2.0, &k2);
            v.apply(&tmp, &mut k3);
            axpy_into(&mut tmp, &y, h, &k3);
            v.apply(&tmp, &mut k4);
            for i in 0..dim {
                y[i] += (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) * (h / 6.0);
            }
        }
        if y.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Numeric(format!("RK4 diverged at step {k}")));
        }
        amps.row_mut(k).assign(&ndarray::ArrayView1::from(&y[..]));
    }
    Ok(Trajectory::from_amplitudes(grid.times(), amps))
}

/// `out = y + c x`.
fn axpy_into(out: &mut [Complex64], y: &[Complex64], c: f64, x: &[Complex64]) {
    for ((o, a), b) in out.iter_mut().zip(y).zip(x) {
        *o = a + b * c;
    }
}

/// Stored `‖a(t_k)‖²` per grid point.
pub fn checkpoint_norm(traj: &Trajectory) -> &[f64] {
    &traj.norms
}
