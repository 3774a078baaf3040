// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-excitation interaction kernel of a chirally coupled chain.
//!
//! For an equidistant chain with phase `ξ` per lattice spacing, the kernel is
//!
//! ```text
//!            ⎧ -γ_L e^{-i(ξ|μ-ν| + W_ν - W_μ)}   μ < ν
//! V̄[μ][ν] = ⎨ -γ/2                               μ = ν
//!            ⎩ -γ_R e^{-i(ξ|μ-ν| + W_μ - W_ν)}   μ > ν
//! ```
//!
//! with `γ_L = γ(1-D)/2`, `γ_R = γ(1+D)/2`. The onsite phase `W_μ` is the
//! displacement of atom `μ` times the guided wave vector, so the total phase
//! is `k_s|r_μ - r_ν|` for a chain whose atoms keep their order. Note that
//! the disorder factor is conjugated between the two triangles: the same
//! factor `e^{-i(W_μ-W_ν)}` on both would be a diagonal gauge transform and
//! leave every population and density correlation unchanged.

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::check_sizes;
use crate::error::{Error, Result};

/// Everything that defines one physical configuration of the chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub n_sites: usize,
    pub n_excitations: usize,
    /// Total decay rate `γ = γ_L + γ_R`; times are measured in `1/γ`.
    pub gamma: f64,
    /// Directionality `D = (γ_R - γ_L)/γ` in `[-1, 1]`.
    pub directionality: f64,
    /// Guided-mode phase per lattice spacing, `ξ = k_s d`.
    pub xi: f64,
    /// Disorder width `W` in `[0, π]`; onsite phases are drawn from `[-W, W]`.
    pub disorder_width: f64,
}

impl SystemParams {
    pub fn new(n_sites: usize, n_excitations: usize) -> Self {
        SystemParams {
            n_sites,
            n_excitations,
            gamma: 1.0,
            directionality: 0.0,
            xi: 0.0,
            disorder_width: 0.0,
        }
    }

    pub fn with_directionality(mut self, d: f64) -> Self {
        self.directionality = d;
        self
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_disorder(mut self, w: f64) -> Self {
        self.disorder_width = w;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    /// Leftward decay rate `γ(1 - D)/2`.
    pub fn gamma_left(&self) -> f64 {
        self.gamma * (1.0 - self.directionality) / 2.0
    }

    /// Rightward decay rate `γ(1 + D)/2`.
    pub fn gamma_right(&self) -> f64 {
        self.gamma * (1.0 + self.directionality) / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        check_sizes(self.n_sites, self.n_excitations)?;
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::param("gamma", format!("must be positive, got {}", self.gamma)));
        }
        if !(-1.0..=1.0).contains(&self.directionality) {
            return Err(Error::param(
                "directionality",
                format!("must lie in [-1, 1], got {}", self.directionality),
            ));
        }
        if !self.xi.is_finite() {
            return Err(Error::param("xi", "must be finite"));
        }
        check_disorder_width(self.disorder_width)
    }
}

pub(crate) fn check_disorder_width(w: f64) -> Result<()> {
    if !(0.0..=PI).contains(&w) {
        return Err(Error::param(
            "disorder_width",
            format!("must lie in [0, π], got {w}"),
        ));
    }
    Ok(())
}

/// Onsite phases `W_μ` of one disorder realization, in radians.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderRealization {
    pub phases: Vec<f64>,
}

impl DisorderRealization {
    pub fn clean(n: usize) -> Self {
        DisorderRealization {
            phases: vec![0.0; n],
        }
    }

    /// The chain reflected in space, `W'_μ = -W_{N+1-μ}`.
    pub fn mirrored(&self) -> Self {
        DisorderRealization {
            phases: self.phases.iter().rev().map(|w| -w).collect(),
        }
    }
}

/// The `N × N` kernel `V̄` in units of `γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    pub vbar: Array2<Complex64>,
}

impl Kernel {
    pub fn n_sites(&self) -> usize {
        self.vbar.nrows()
    }
}

/// Builds `V̄` for one disorder realization.
pub fn build_kernel(params: &SystemParams, disorder: &DisorderRealization) -> Result<Kernel> {
    params.validate()?;
    let n = params.n_sites;
    if disorder.phases.len() != n {
        return Err(Error::param(
            "disorder",
            format!("expected {n} phases, got {}", disorder.phases.len()),
        ));
    }
    let w = params.disorder_width;
    if let Some(bad) = disorder.phases.iter().find(|p| !(p.abs() <= w)) {
        return Err(Error::param(
            "disorder",
            format!("phase {bad} exceeds the disorder width {w}"),
        ));
    }

    let (gl, gr) = (params.gamma_left(), params.gamma_right());
    let diag = Complex64::new(-params.gamma / 2.0, 0.0);
    let w = &disorder.phases;
    let vbar = Array2::from_shape_fn((n, n), |(mu, nu)| {
        if mu == nu {
            return diag;
        }
        let rate = if mu < nu { gl } else { gr };
        let dist = mu.abs_diff(nu) as f64;
        let shift = if mu > nu { w[mu] - w[nu] } else { w[nu] - w[mu] };
        let angle = -(params.xi * dist + shift);
        -Complex64::from_polar(rate, angle)
    });
    Ok(Kernel { vbar })
}

/// Collective decay matrix `Γ = -(V̄ + V̄†)`.
///
/// Hermitian and positive semidefinite with rank at most two: it splits into
/// one rank-1 projector per propagation direction of the guided mode.
pub fn decay_matrix(kernel: &Kernel) -> Array2<Complex64> {
    let v = &kernel.vbar;
    let n = v.nrows();
    Array2::from_shape_fn((n, n), |(i, j)| -(v[[i, j]] + v[[j, i]].conj()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn clean(n: usize, d: f64, xi: f64) -> Kernel {
        let p = SystemParams::new(n, 1).with_directionality(d).with_xi(xi);
        build_kernel(&p, &DisorderRealization::clean(n)).unwrap()
    }

    #[test]
    fn diagonal_is_half_decay_rate() {
        let k = clean(5, 0.0, 0.7);
        for mu in 0..5 {
            assert_eq!(k.vbar[[mu, mu]], Complex64::new(-0.5, 0.0));
        }
    }

    #[test]
    fn cascaded_limit_has_no_upstream_coupling() {
        let p = SystemParams::new(4, 1)
            .with_directionality(1.0)
            .with_xi(1.3)
            .with_disorder(2.0);
        let dis = DisorderRealization {
            phases: vec![0.3, -1.9, 1.2, 0.0],
        };
        let k = build_kernel(&p, &dis).unwrap();
        for mu in 0..4 {
            for nu in mu + 1..4 {
                assert_eq!(k.vbar[[mu, nu]].norm(), 0.0);
            }
        }
    }

    #[test]
    fn reciprocal_chain_at_xi_pi() {
        let k = clean(3, 0.0, PI);
        // 1-based (1,2) and (1,3) entries.
        assert_abs_diff_eq!(k.vbar[[0, 1]].re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(k.vbar[[0, 1]].im, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.vbar[[0, 2]].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(k.vbar[[0, 2]].im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn off_diagonal_moduli() {
        let p = SystemParams::new(6, 2)
            .with_directionality(0.3)
            .with_xi(0.4)
            .with_disorder(1.0);
        let dis = DisorderRealization {
            phases: vec![0.1, -0.9, 0.5, 1.0, -1.0, 0.0],
        };
        let k = build_kernel(&p, &dis).unwrap();
        for mu in 0..6 {
            for nu in 0..6 {
                let expected = match mu.cmp(&nu) {
                    std::cmp::Ordering::Less => p.gamma_left(),
                    std::cmp::Ordering::Greater => p.gamma_right(),
                    std::cmp::Ordering::Equal => 0.5,
                };
                assert_abs_diff_eq!(k.vbar[[mu, nu]].norm(), expected, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = SystemParams::new(3, 1).with_disorder(0.5);
        assert!(build_kernel(&p, &DisorderRealization::clean(4)).is_err());
        let wide = DisorderRealization {
            phases: vec![0.0, 0.6, 0.0],
        };
        assert!(build_kernel(&p, &wide).is_err());
        assert!(SystemParams::new(3, 1).with_disorder(4.0).validate().is_err());
        assert!(SystemParams::new(3, 1).with_directionality(1.5).validate().is_err());
        assert!(SystemParams::new(3, 4).validate().is_err());
    }

    #[test]
    fn dicke_limit_decay_matrix() {
        let g = decay_matrix(&clean(2, 0.0, 0.0));
        for v in g.iter() {
            assert_abs_diff_eq!(v.re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn decay_matrix_diagonal_is_gamma() {
        let p = SystemParams::new(5, 1)
            .with_gamma(2.5)
            .with_directionality(-0.4)
            .with_xi(2.0);
        let k = build_kernel(&p, &DisorderRealization::clean(5)).unwrap();
        let g = decay_matrix(&k);
        for mu in 0..5 {
            assert_eq!(g[[mu, mu]], Complex64::new(2.5, 0.0));
        }
    }

    #[test]
    fn decay_matrix_splits_into_two_directional_projectors() {
        // Γ = γ_R u u† + γ_L conj(u) conj(u)† with u_μ = e^{-i(ξμ + W_μ)}.
        let p = SystemParams::new(6, 1)
            .with_directionality(0.5)
            .with_xi(PI / 8.0)
            .with_disorder(2.5);
        let dis = DisorderRealization {
            phases: vec![0.4, -2.5, 1.7, 2.2, -0.6, 0.0],
        };
        let g = decay_matrix(&build_kernel(&p, &dis).unwrap());
        let u: Vec<Complex64> = (0..6)
            .map(|mu| Complex64::from_polar(1.0, -(p.xi * (mu + 1) as f64 + dis.phases[mu])))
            .collect();
        for mu in 0..6 {
            for nu in 0..6 {
                let expected = p.gamma_right() * u[mu] * u[nu].conj()
                    + p.gamma_left() * u[mu].conj() * u[nu];
                assert_abs_diff_eq!(g[[mu, nu]].re, expected.re, epsilon = 1e-14);
                assert_abs_diff_eq!(g[[mu, nu]].im, expected.im, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn mirror_symmetry_flips_directionality() {
        let n = 5;
        let dis = DisorderRealization {
            phases: vec![0.2, -0.7, 0.9, 0.0, -0.3],
        };
        let p = SystemParams::new(n, 1)
            .with_directionality(0.35)
            .with_xi(0.8)
            .with_disorder(1.0);
        let k = build_kernel(&p, &dis).unwrap();
        let mirrored = build_kernel(
            &p.clone().with_directionality(-0.35),
            &dis.mirrored(),
        )
        .unwrap();
        for mu in 0..n {
            for nu in 0..n {
                assert_eq!(k.vbar[[mu, nu]], mirrored.vbar[[n - 1 - mu, n - 1 - nu]]);
            }
        }
    }
}
