// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! Bare states of `M` excitations distributed over `N` ordered sites.
//!
//! A bare state is the sorted tuple of excited sites. The basis is ordered
//! lexicographically, which groups the states into `N - M + 1` sectors keyed
//! by the first excited site: sector `k` holds the `C(N - k, M - 1)` states
//! whose lowest excited atom is `k`.
//!
//! Site labels are 1-based at the public API and 0-based inside the crate.

use std::fmt;

use crate::error::{Error, Result};

/// Largest supported chain length (states are packed into a `u64` mask).
pub const MAX_SITES: usize = 64;

/// Binomial coefficient `C(n, k)`, or `None` on overflow of `u128`.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

fn binom_u64(n: usize, k: usize) -> u64 {
    // Callers only reach this with n <= 64, where C(n, k) < 2^63.
    binomial(n, k).map_or(u64::MAX, |c| c as u64)
}

pub(crate) fn check_sizes(n: usize, m: usize) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return Err(Error::param(
            "n_sites",
            format!("must lie in 1..={MAX_SITES}, got {n}"),
        ));
    }
    if m == 0 || m > n {
        return Err(Error::param(
            "n_excitations",
            format!("must lie in 1..={n} for {n} sites, got {m}"),
        ));
    }
    Ok(())
}

/// A product state with a definite set of excited sites.
///
/// Sites are 1-based and strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BareState(Vec<usize>);

impl BareState {
    /// Validates `sites` as `m` strictly increasing labels in `1..=n`.
    pub fn new(sites: Vec<usize>, n: usize, m: usize) -> Result<Self> {
        check_sizes(n, m)?;
        if sites.len() != m {
            return Err(Error::param(
                "sites",
                format!("expected {m} excited sites, got {}", sites.len()),
            ));
        }
        if sites.iter().any(|&s| s == 0 || s > n) {
            return Err(Error::param(
                "sites",
                format!("site labels must lie in 1..={n}, got {sites:?}"),
            ));
        }
        if sites.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param(
                "sites",
                format!("sites must be strictly increasing, got {sites:?}"),
            ));
        }
        Ok(BareState(sites))
    }

    /// Builds a state from 0-based sorted sites without validation.
    pub(crate) fn from_zero_based(sites: impl IntoIterator<Item = usize>) -> Self {
        BareState(sites.into_iter().map(|s| s + 1).collect())
    }

    /// Excited sites, 1-based.
    pub fn sites(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, site: usize) -> bool {
        self.0.binary_search(&site).is_ok()
    }

    pub(crate) fn mask(&self) -> u64 {
        self.0.iter().fold(0u64, |acc, &s| acc | 1 << (s - 1))
    }
}

impl fmt::Display for BareState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, ")")
    }
}

/// Position of a bare state in the lexicographic basis order.
pub type BasisIndex = usize;

/// All `C(N, M)` bare states in lexicographic order.
pub fn enumerate(n: usize, m: usize) -> Result<Vec<BareState>> {
    check_sizes(n, m)?;
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..m).collect();
    loop {
        out.push(BareState::from_zero_based(current.iter().copied()));
        // Advance to the next combination: bump the rightmost movable entry.
        let Some(i) = (0..m).rev().find(|&i| current[i] < n - m + i) else {
            break;
        };
        current[i] += 1;
        for j in i + 1..m {
            current[j] = current[j - 1] + 1;
        }
    }
    Ok(out)
}

/// Lexicographic rank of `state`, computed from binomial coefficients.
pub fn rank(state: &BareState, n: usize, m: usize) -> Result<BasisIndex> {
    let state = BareState::new(state.0.clone(), n, m)?;
    Ok(rank_zero_based(
        state.0.iter().map(|s| s - 1),
        n,
        m,
    ))
}

/// Rank of sorted 0-based sites: `C(n,m) - 1 - sum_i C(n - 1 - c_i, m - i)`.
pub(crate) fn rank_zero_based(sites: impl Iterator<Item = usize>, n: usize, m: usize) -> usize {
    let total = binom_u64(n, m);
    let tail: u64 = sites
        .enumerate()
        .map(|(i, c)| binom_u64(n - 1 - c, m - i))
        .sum();
    (total - 1 - tail) as usize
}

/// Inverse of [`rank`].
pub fn unrank(q: BasisIndex, n: usize, m: usize) -> Result<BareState> {
    check_sizes(n, m)?;
    let total = binom_u64(n, m);
    if q as u64 >= total {
        return Err(Error::param(
            "q",
            format!("index {q} out of range for a basis of size {total}"),
        ));
    }
    let mut x = total - 1 - q as u64;
    let mut sites = Vec::with_capacity(m);
    let mut c = 0usize;
    for i in 0..m {
        while binom_u64(n - 1 - c, m - i) > x {
            c += 1;
        }
        x -= binom_u64(n - 1 - c, m - i);
        sites.push(c);
        c += 1;
    }
    Ok(BareState::from_zero_based(sites))
}

/// A state obtained by relocating one excitation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Neighbor {
    pub state: BareState,
    /// Site (1-based) that is excited in the original state only.
    pub moved_from: usize,
    /// Site (1-based) that is excited in the neighbor only.
    pub moved_to: usize,
}

/// All states that differ from `state` by moving exactly one excitation.
///
/// Ordered by the excitation that moves, then by destination site.
pub fn neighbors(state: &BareState, n: usize, m: usize) -> Result<Vec<Neighbor>> {
    let state = BareState::new(state.0.clone(), n, m)?;
    let mut out = Vec::with_capacity(m * (n - m));
    for &from in &state.0 {
        for to in (1..=n).filter(|s| !state.contains(*s)) {
            let mut sites: Vec<usize> = state.0.iter().copied().filter(|&s| s != from).collect();
            let pos = sites.partition_point(|&s| s < to);
            sites.insert(pos, to);
            out.push(Neighbor {
                state: BareState(sites),
                moved_from: from,
                moved_to: to,
            });
        }
    }
    Ok(out)
}

/// Materialized basis with packed per-state data for fast inner loops.
#[derive(Clone, Debug)]
pub struct Basis {
    n: usize,
    m: usize,
    /// `dim * m` 0-based sites, row-major per state.
    sites: Vec<u8>,
    masks: Vec<u64>,
}

impl Basis {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        let states = enumerate(n, m)?;
        let mut sites = Vec::with_capacity(states.len() * m);
        let mut masks = Vec::with_capacity(states.len());
        for s in &states {
            sites.extend(s.0.iter().map(|&x| (x - 1) as u8));
            masks.push(s.mask());
        }
        Ok(Basis { n, m, sites, masks })
    }

    pub fn n_sites(&self) -> usize {
        self.n
    }

    pub fn n_excitations(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.masks.len()
    }

    /// 0-based excited sites of state `q`.
    pub(crate) fn sites_of(&self, q: usize) -> &[u8] {
        &self.sites[q * self.m..(q + 1) * self.m]
    }

    pub(crate) fn mask_of(&self, q: usize) -> u64 {
        self.masks[q]
    }

    pub fn state(&self, q: BasisIndex) -> BareState {
        BareState::from_zero_based(self.sites_of(q).iter().map(|&s| s as usize))
    }

    pub fn index_of(&self, state: &BareState) -> Result<BasisIndex> {
        rank(state, self.n, self.m)
    }

    /// Number of states in each sector, i.e. grouped by first excited site.
    pub fn sector_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.n - self.m + 1];
        for q in 0..self.dim() {
            sizes[self.sites_of(q)[0] as usize] += 1;
        }
        sizes
    }
}
