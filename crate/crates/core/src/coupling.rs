// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! The `C(N, M)`-dimensional generator `V` of the multi-excitation amplitudes.
//!
//! Couplings are pairwise: `V[q][s]` is nonzero only when `q` and `s` share
//! `M - 1` excited sites, in which case it equals `V̄[μ][ν]` with `μ` the site
//! excited in `q` only and `ν` the site excited in `s` only. The diagonal is
//! `-Mγ/2`.

use std::io::Write;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;

use crate::basis::{binomial, check_sizes, Basis};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, SystemParams};

/// Default cap on the basis dimension.
pub const DEFAULT_MAX_DIM: usize = 20_000;

/// Largest dimension for which a dense copy of `V` is materialized.
pub const DENSE_LIMIT: usize = 2_000;

/// One off-diagonal slot of a row: target state and the moved excitation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Hop {
    /// Column index `s`.
    pub target: u32,
    /// 0-based site excited in the row state only.
    pub from: u8,
    /// 0-based site excited in the column state only.
    pub to: u8,
}

/// Sparsity pattern of `V`, shared by every disorder realization of a
/// given `(N, M)`.
#[derive(Clone, Debug)]
pub struct RowPattern {
    basis: Basis,
    row_ptr: Vec<usize>,
    hops: Vec<Hop>,
}

impl RowPattern {
    /// Builds the pattern, refusing bases larger than `max_dim`.
    pub fn with_capacity(n: usize, m: usize, max_dim: usize) -> Result<Self> {
        check_sizes(n, m)?;
        let dim = binomial(n, m).unwrap_or(u128::MAX);
        if dim > max_dim as u128 {
            return Err(Error::Capacity {
                dim,
                limit: max_dim,
            });
        }
        let basis = Basis::new(n, m)?;
        let per_row = m * (n - m);
        let mut row_ptr = Vec::with_capacity(basis.dim() + 1);
        let mut hops = Vec::with_capacity(basis.dim() * per_row);
        row_ptr.push(0);
        let mut scratch: Vec<usize> = Vec::with_capacity(m);
        for q in 0..basis.dim() {
            let mask = basis.mask_of(q);
            for &from in basis.sites_of(q) {
                for to in (0..n).filter(|&t| mask & (1u64 << t) == 0) {
                    scratch.clear();
                    scratch.extend(
                        basis
                            .sites_of(q)
                            .iter()
                            .map(|&x| x as usize)
                            .filter(|&x| x != from as usize),
                    );
                    let pos = scratch.partition_point(|&x| x < to);
                    scratch.insert(pos, to);
                    let target = crate::basis::rank_zero_based(scratch.iter().copied(), n, m);
                    hops.push(Hop {
                        target: target as u32,
                        from,
                        to: to as u8,
                    });
                }
            }
            row_ptr.push(hops.len());
        }
        Ok(RowPattern {
            basis,
            row_ptr,
            hops,
        })
    }

    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_capacity(n, m, DEFAULT_MAX_DIM)
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Off-diagonal slots of row `q`.
    pub fn row(&self, q: usize) -> &[Hop] {
        &self.hops[self.row_ptr[q]..self.row_ptr[q + 1]]
    }

    pub fn nnz_off_diagonal(&self) -> usize {
        self.hops.len()
    }
}

/// Precomputed neighbor lists for every basis state of `(n, m)`.
pub fn row_structure(n: usize, m: usize) -> Result<RowPattern> {
    RowPattern::new(n, m)
}

/// The generator `V` for one disorder realization, stored row-compressed.
#[derive(Clone, Debug)]
pub struct CouplingMatrix {
    pattern: Arc<RowPattern>,
    diagonal: Complex64,
    values: Vec<Complex64>,
    params: SystemParams,
}

impl CouplingMatrix {
    pub fn dim(&self) -> usize {
        self.pattern.dim()
    }

    pub fn pattern(&self) -> &Arc<RowPattern> {
        &self.pattern
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn diagonal(&self) -> Complex64 {
        self.diagonal
    }

    /// Entry `V[q][s]`.
    pub fn get(&self, q: usize, s: usize) -> Complex64 {
        if q == s {
            return self.diagonal;
        }
        let start = self.pattern.row_ptr[q];
        self.pattern
            .row(q)
            .iter()
            .position(|h| h.target as usize == s)
            .map_or(Complex64::new(0.0, 0.0), |k| self.values[start + k])
    }

    /// `(column, value)` pairs of the off-diagonal part of row `q`.
    pub fn row_entries(&self, q: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let start = self.pattern.row_ptr[q];
        self.pattern
            .row(q)
            .iter()
            .enumerate()
            .map(move |(k, h)| (h.target as usize, self.values[start + k]))
    }

    pub fn to_dense(&self) -> Result<Array2<Complex64>> {
        let dim = self.dim();
        if dim > DENSE_LIMIT {
            return Err(Error::Capacity {
                dim: dim as u128,
                limit: DENSE_LIMIT,
            });
        }
        let mut out = Array2::from_elem((dim, dim), Complex64::new(0.0, 0.0));
        for q in 0..dim {
            out[[q, q]] = self.diagonal;
            for (s, v) in self.row_entries(q) {
                out[[q, s]] = v;
            }
        }
        Ok(out)
    }

    /// `y = V x`.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let hops = &self.pattern.hops;
        for q in 0..self.dim() {
            let (lo, hi) = (self.pattern.row_ptr[q], self.pattern.row_ptr[q + 1]);
            let mut acc = self.diagonal * x[q];
            for k in lo..hi {
                acc += self.values[k] * x[hops[k].target as usize];
            }
            y[q] = acc;
        }
    }

    /// Maximum absolute column sum, `‖V‖₁`.
    pub fn norm1(&self) -> f64 {
        let mut cols = vec![self.diagonal.norm(); self.dim()];
        for (k, h) in self.pattern.hops.iter().enumerate() {
            cols[h.target as usize] += self.values[k].norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        std::iter::once(&self.diagonal)
            .chain(self.values.iter())
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Writes nonzero entries as `row col re im` lines (0-based indices).
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# row col re im")?;
        for q in 0..self.dim() {
            let mut entries: Vec<(usize, Complex64)> = self.row_entries(q).collect();
            entries.push((q, self.diagonal));
            entries.sort_by_key(|e| e.0);
            for (s, v) in entries {
                if v.norm() != 0.0 {
                    writeln!(out, "{q} {s} {:e} {:e}", v.re, v.im)?;
                }
            }
        }
        Ok(())
    }
}

/// Assembles `V` from the kernel, building a fresh sparsity pattern.
pub fn assemble(params: &SystemParams, kernel: &Kernel) -> Result<CouplingMatrix> {
    let pattern = Arc::new(RowPattern::new(params.n_sites, params.n_excitations)?);
    assemble_with(&pattern, params, kernel)
}

/// Fills the values of `V` on an existing pattern.
pub fn assemble_with(
    pattern: &Arc<RowPattern>,
    params: &SystemParams,
    kernel: &Kernel,
) -> Result<CouplingMatrix> {
    let basis = pattern.basis();
    if basis.n_sites() != params.n_sites || basis.n_excitations() != params.n_excitations {
        return Err(Error::param(
            "pattern",
            format!(
                "built for N={}, M={} but params have N={}, M={}",
                basis.n_sites(),
                basis.n_excitations(),
                params.n_sites,
                params.n_excitations
            ),
        ));
    }
    if kernel.n_sites() != params.n_sites {
        return Err(Error::param(
            "kernel",
            format!("kernel is {0}x{0}, expected N={1}", kernel.n_sites(), params.n_sites),
        ));
    }
    let values = pattern
        .hops
        .iter()
        .map(|h| kernel.vbar[[h.from as usize, h.to as usize]])
        .collect();
    Ok(CouplingMatrix {
        pattern: Arc::clone(pattern),
        diagonal: Complex64::new(-(params.n_excitations as f64) * params.gamma / 2.0, 0.0),
        values,
        params: params.clone(),
    })
}
