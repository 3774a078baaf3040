// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! Independent reference implementations shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Effective non-Hermitian Hamiltonian on the full `2^N` spin space, built
/// from Kronecker products of single-site operators.
///
/// Coherent part `H_L + H_R` plus `-i/2` times the anticommutator terms of
/// both directional dissipators, with `k_s r_μ = -(ξμ + W_μ)`: the kernel
/// convention `e^{-iξ|μ-ν|}` corresponds to a guided wave vector of negative
/// sign in the master equation. Site 1 is the most significant qubit.
pub struct FullSpace {
    pub n: usize,
    pub h_eff: DMatrix<Complex64>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `σ_μ` (lowering) on site `mu` (0-based) of an `n`-site chain.
fn lowering(n: usize, mu: usize) -> DMatrix<Complex64> {
    let id = DMatrix::<Complex64>::identity(2, 2);
    // |g⟩ = e_0, |e⟩ = e_1; σ = |g⟩⟨e|.
    let sigma = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    let mut out = DMatrix::<Complex64>::identity(1, 1);
    for site in 0..n {
        let factor = if site == mu { &sigma } else { &id };
        out = out.kronecker(factor);
    }
    out
}

impl FullSpace {
    pub fn new(n: usize, gamma: f64, d: f64, xi: f64, phases: &[f64]) -> Self {
        assert_eq!(phases.len(), n);
        let gl = gamma * (1.0 - d) / 2.0;
        let gr = gamma * (1.0 + d) / 2.0;
        let kr: Vec<f64> = (0..n).map(|mu| -(xi * (mu + 1) as f64 + phases[mu])).collect();
        let lower: Vec<DMatrix<Complex64>> = (0..n).map(|mu| lowering(n, mu)).collect();
        let raise: Vec<DMatrix<Complex64>> = lower.iter().map(|s| s.adjoint()).collect();
        let dim = 1 << n;
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        let mut k = DMatrix::<Complex64>::zeros(dim, dim);
        for mu in 0..n {
            for nu in 0..n {
                let hop = &raise[mu] * &lower[nu];
                // Positions keep their order, so |r_μ - r_ν| = sign(μ-ν)(r_μ - r_ν).
                let dist = match mu.cmp(&nu) {
                    std::cmp::Ordering::Less => kr[nu] - kr[mu],
                    std::cmp::Ordering::Greater => kr[mu] - kr[nu],
                    std::cmp::Ordering::Equal => 0.0,
                };
                let e = Complex64::from_polar(1.0, dist);
                // H_L (μ<ν) and H_R (μ>ν): -i γ/2 (e^{ik|r|} σ†_μσ_ν - h.c.).
                if mu < nu {
                    h += &hop * (c(0.0, -gl / 2.0) * e);
                    h += hop.adjoint() * (c(0.0, gl / 2.0) * e.conj());
                } else if mu > nu {
                    h += &hop * (c(0.0, -gr / 2.0) * e);
                    h += hop.adjoint() * (c(0.0, gr / 2.0) * e.conj());
                }
                let signed = kr[mu] - kr[nu];
                let weight = Complex64::from_polar(gl, -signed) + Complex64::from_polar(gr, signed);
                k += &hop * weight;
            }
        }
        let h_eff = h - k * c(0.0, 0.5);
        FullSpace { n, h_eff }
    }

    /// `exp(-i H_eff t) ψ`.
    pub fn evolve(&self, psi: &DMatrix<Complex64>, t: f64) -> DMatrix<Complex64> {
        let u = (&self.h_eff * c(0.0, -t)).exp();
        u * psi
    }

    /// Full-space index of the product state with the given 1-based sites excited.
    pub fn index(&self, sites: &[usize]) -> usize {
        sites.iter().map(|&s| 1usize << (self.n - s)).sum()
    }
}

/// All `M`-subsets of `1..=n` in lexicographic order, by brute-force filtering.
pub fn lexicographic_states(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = (0u64..1 << n)
        .filter(|mask| mask.count_ones() as usize == m)
        .map(|mask| (1..=n).filter(|&s| mask >> (s - 1) & 1 == 1).collect())
        .collect();
    out.sort();
    out
}
