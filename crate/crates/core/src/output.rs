// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON writers for ensemble results.
//!
//! Layout of one output directory:
//!
//! | file              | columns                         |
//! |-------------------|---------------------------------|
//! | `populations.csv` | `t,P_1,...,P_N`                 |
//! | `g2.csv`          | `t,r1,...,r{r_max}`             |
//! | `g3.csv`          | `t,value`                       |
//! | `norms.csv`       | `t,norm,stderr`                 |
//! | `snapshots.csv`   | `t,P_1,...,P_N` (selected rows) |
//! | `metadata.json`   | see [`Metadata`]                |
//! | `config.toml`     | config echo of this run         |
//!
//! Times print with the shortest round-trip representation, values in
//! exponent notation. Output depends only on the result, never on the worker
//! count or wall-clock.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{Observable, RunConfig};
use crate::ensemble::EnsembleResult;
use crate::error::{Error, Result};

pub const METADATA_SCHEMA: u32 = 1;

/// Crossing times of one disordered run against its clean reference.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Crossings {
    /// Entry `r - 1`; `None` when the curves never cross for good.
    pub g2: Vec<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g3: Option<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    /// `(n_times) × N`, row-major.
    pub populations: Vec<Vec<f64>>,
    pub g2: Vec<Vec<f64>>,
    pub g3: Option<Vec<f64>>,
    pub norms: Vec<f64>,
}

/// Contents of `metadata.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub schema: u32,
    pub version: String,
    pub label: Option<String>,
    pub seed: u64,
    pub realizations_requested: u64,
    pub realizations_completed: u64,
    pub complete: bool,
    pub dim: u64,
    pub averaging: String,
    /// Largest per-step increase of `‖a‖²` in any realization.
    pub max_norm_increase: f64,
    pub crossings: Option<Crossings>,
    pub config: RunConfig,
    pub standard_errors: StandardErrors,
}

impl Metadata {
    pub fn new(
        result: &EnsembleResult,
        config: &RunConfig,
        label: Option<String>,
        dim: u64,
        crossings: Option<Crossings>,
    ) -> Self {
        let averaging = serde_json::to_value(result.config.averaging)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        Metadata {
            schema: METADATA_SCHEMA,
            version: crate::VERSION.to_owned(),
            label,
            seed: result.config.seed,
            realizations_requested: result.config.realizations,
            realizations_completed: result.realizations,
            complete: result.complete,
            dim,
            averaging,
            max_norm_increase: result.max_norm_increase,
            crossings,
            config: config.clone(),
            standard_errors: StandardErrors {
                populations: result
                    .populations_se
                    .rows()
                    .into_iter()
                    .map(|r| r.to_vec())
                    .collect(),
                g2: result.g2_se.clone(),
                g3: result.g3_se.clone(),
                norms: result.norms_se.clone(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes to JSON");
        s.push('\n');
        s
    }
}

/// Header plus one row `(time index, values)` per line.
fn table(header: &[String], times: &[f64], rows: impl Iterator<Item = (usize, Vec<f64>)>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for (k, values) in rows {
        write!(out, "{}", times[k]).unwrap();
        for v in values {
            write!(out, ",{v:e}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn header(first: &str, rest: impl Iterator<Item = String>) -> Vec<String> {
    std::iter::once(first.to_owned()).chain(rest).collect()
}

pub fn populations_csv(result: &EnsembleResult) -> String {
    let pops = &result.populations;
    table(
        &header("t", (1..=pops.ncols()).map(|m| format!("P_{m}"))),
        &result.times,
        (0..pops.nrows()).map(|k| (k, pops.row(k).to_vec())),
    )
}

/// Population rows nearest to each requested time.
pub fn snapshots_csv(result: &EnsembleResult, snapshot_times: &[f64]) -> String {
    let grid = &result.simulation.grid;
    let pops = &result.populations;
    table(
        &header("t", (1..=pops.ncols()).map(|m| format!("P_{m}"))),
        &result.times,
        snapshot_times.iter().map(|&t| {
            let k = grid.nearest_index(t);
            (k, pops.row(k).to_vec())
        }),
    )
}

pub fn g2_csv(result: &EnsembleResult) -> String {
    let g2 = &result.g2;
    table(
        &header("t", (1..=g2.len()).map(|r| format!("r{r}"))),
        &result.times,
        (0..result.times.len()).map(|k| (k, g2.iter().map(|series| series[k]).collect())),
    )
}

/// `None` when the chain is too short for `G3`.
pub fn g3_csv(result: &EnsembleResult) -> Option<String> {
    let g3 = result.g3.as_ref()?;
    Some(table(
        &header("t", ["value".to_owned()].into_iter()),
        &result.times,
        g3.iter().enumerate().map(|(k, &v)| (k, vec![v])),
    ))
}

pub fn norms_csv(result: &EnsembleResult) -> String {
    table(
        &header("t", ["norm".to_owned(), "stderr".to_owned()].into_iter()),
        &result.times,
        (0..result.norms.len()).map(|k| (k, vec![result.norms[k], result.norms_se[k]])),
    )
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

/// Writes the requested CSV files plus `metadata.json` and `config.toml`.
pub fn write_outputs(
    dir: &Path,
    result: &EnsembleResult,
    config: &RunConfig,
    metadata: &Metadata,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let emit = &config.observables.emit;
    if emit.contains(&Observable::Populations) {
        write_file(dir, "populations.csv", &populations_csv(result))?;
    }
    if emit.contains(&Observable::G2) {
        write_file(dir, "g2.csv", &g2_csv(result))?;
    }
    if emit.contains(&Observable::G3) {
        if let Some(text) = g3_csv(result) {
            write_file(dir, "g3.csv", &text)?;
        }
    }
    if emit.contains(&Observable::Norms) {
        write_file(dir, "norms.csv", &norms_csv(result))?;
    }
    if !config.observables.snapshot_times.is_empty() {
        write_file(
            dir,
            "snapshots.csv",
            &snapshots_csv(result, &config.observables.snapshot_times),
        )?;
    }
    write_file(dir, "config.toml", &config.to_toml_string())?;
    write_file(dir, "metadata.json", &metadata.to_json())
}
