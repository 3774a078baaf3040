// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! TOML run configuration and the bundled presets.
//!
//! Angles are given in units of π (`xi_over_pi`, `w_over_pi`). Every table
//! except `[system]` and `[initial]` is optional. Unknown keys are rejected so
//! that typos surface as errors rather than silently falling back to
//! defaults. The full key reference lives in the guide's configuration
//! chapter.

use std::f64::consts::PI;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::basis::binomial;
use crate::coupling::{DEFAULT_MAX_DIM, DENSE_LIMIT};
use crate::ensemble::{EnsembleConfig, Simulation};
use crate::error::{Error, Result};
use crate::evolve::{Method, TimeGrid};
use crate::kernel::SystemParams;
use crate::observables::{ObservableOptions, DEFAULT_R_MAX};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub n_sites: usize,
    pub n_excitations: usize,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub directionality: f64,
    #[serde(default)]
    pub xi_over_pi: f64,
    #[serde(default)]
    pub w_over_pi: f64,
}

fn one() -> f64 {
    1.0
}

impl SystemSection {
    pub fn params(&self) -> SystemParams {
        SystemParams::new(self.n_sites, self.n_excitations)
            .with_gamma(self.gamma)
            .with_directionality(self.directionality)
            .with_xi(self.xi_over_pi * PI)
            .with_disorder(self.w_over_pi * PI)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// 1-based sites excited at `t = 0`.
    pub excited_sites: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationSection {
    pub method: Method,
    pub max_dim: usize,
}

impl Default for PropagationSection {
    fn default() -> Self {
        PropagationSection {
            method: Method::Expm,
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

/// Output files that can be requested.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Observable {
    Populations,
    G2,
    G3,
    Norms,
}

impl Observable {
    pub const ALL: [Observable; 4] = [
        Observable::Populations,
        Observable::G2,
        Observable::G3,
        Observable::Norms,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObservablesSection {
    pub emit: Vec<Observable>,
    /// Largest `r` for `G2(r)`; defaults to `min(6, N - 1)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_max: Option<usize>,
    pub normalize: bool,
    /// Times at which population profiles go to `snapshots.csv`.
    pub snapshot_times: Vec<f64>,
    /// Also run the clean (`W = 0`) chain and report crossing times.
    pub crossing: bool,
    pub t_min: f64,
}

impl Default for ObservablesSection {
    fn default() -> Self {
        ObservablesSection {
            emit: Observable::ALL.to_vec(),
            r_max: None,
            normalize: false,
            snapshot_times: Vec::new(),
            crossing: false,
            t_min: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: "out".into() }
    }
}

/// Parameter varied across a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Directionality,
    XiOverPi,
    WOverPi,
    /// Distance between two quenched sites; the first site stays fixed.
    Separation,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Directionality => "directionality",
            SweepAxis::XiOverPi => "xi_over_pi",
            SweepAxis::WOverPi => "w_over_pi",
            SweepAxis::Separation => "separation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub grid: TimeGrid,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub propagation: PropagationSection,
    #[serde(default)]
    pub observables: ObservablesSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

/// One fully specified simulation derived from a config.
#[derive(Clone, Debug, PartialEq)]
pub struct RunPoint {
    /// `axis_value` for sweep points, `None` otherwise.
    pub label: Option<String>,
    pub simulation: Simulation,
    pub ensemble: EnsembleConfig,
    pub dir: PathBuf,
    /// The config of this point alone (sweep resolved), for echoing.
    pub config: RunConfig,
}

fn cfg_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("`{field}`: {msg}"))
}

fn format_value(v: f64) -> String {
    format!("{v}")
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("run config serializes to TOML")
    }

    /// Checks every field; `gamma != 1` needs `allow_dimensional`.
    pub fn validate(&self, allow_dimensional: bool) -> Result<()> {
        self.expand(allow_dimensional).map(|_| ())
    }

    /// Resolves the sweep into individual run points, validating each.
    pub fn expand(&self, allow_dimensional: bool) -> Result<Vec<RunPoint>> {
        let sys = &self.system;
        if sys.gamma != 1.0 && !allow_dimensional {
            return Err(cfg_err(
                "system.gamma",
                format!(
                    "is {} but times and rates are expressed in units of γ; \
                     pass --allow-dimensional to override",
                    sys.gamma
                ),
            ));
        }
        if !(0.0..=1.0).contains(&sys.w_over_pi) {
            return Err(cfg_err(
                "system.w_over_pi",
                format!("must lie in [0, 1], got {}", sys.w_over_pi),
            ));
        }
        self.grid
            .validate()
            .map_err(|e| cfg_err("grid", e))?;
        self.ensemble
            .validate()
            .map_err(|e| cfg_err("ensemble", e))?;
        let obs = &self.observables;
        if !(obs.t_min >= 0.0 && obs.t_min.is_finite()) {
            return Err(cfg_err("observables.t_min", format!("must be >= 0, got {}", obs.t_min)));
        }
        if let Some(t) = obs
            .snapshot_times
            .iter()
            .find(|t| !(0.0..=self.grid.t_max).contains(*t))
        {
            return Err(cfg_err(
                "observables.snapshot_times",
                format!("{t} lies outside [0, t_max = {}]", self.grid.t_max),
            ));
        }

        let points: Vec<RunConfig> = match &self.sweep {
            None => vec![self.clone()],
            Some(sweep) => {
                if sweep.values.is_empty() {
                    return Err(cfg_err("sweep.values", "must not be empty"));
                }
                sweep
                    .values
                    .iter()
                    .map(|&v| self.at_sweep_value(sweep.axis, v))
                    .collect::<Result<_>>()?
            }
        };

        points
            .into_iter()
            .map(|cfg| {
                let label = self
                    .sweep
                    .as_ref()
                    .map(|s| format!("{}_{}", s.axis.name(), format_value(cfg.sweep_value(s.axis))));
                cfg.single_point(label)
            })
            .collect()
    }

    fn sweep_value(&self, axis: SweepAxis) -> f64 {
        match axis {
            SweepAxis::Directionality => self.system.directionality,
            SweepAxis::XiOverPi => self.system.xi_over_pi,
            SweepAxis::WOverPi => self.system.w_over_pi,
            SweepAxis::Separation => {
                let s = &self.initial.excited_sites;
                (s[1] - s[0]) as f64
            }
        }
    }

    fn at_sweep_value(&self, axis: SweepAxis, value: f64) -> Result<RunConfig> {
        let mut cfg = self.clone();
        cfg.sweep = None;
        match axis {
            SweepAxis::Directionality => cfg.system.directionality = value,
            SweepAxis::XiOverPi => cfg.system.xi_over_pi = value,
            SweepAxis::WOverPi => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(cfg_err("sweep.values", format!("w_over_pi {value} outside [0, 1]")));
                }
                cfg.system.w_over_pi = value;
            }
            SweepAxis::Separation => {
                if cfg.system.n_excitations != 2 || cfg.initial.excited_sites.len() != 2 {
                    return Err(cfg_err(
                        "sweep.axis",
                        "a separation sweep needs exactly two excitations",
                    ));
                }
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(cfg_err(
                        "sweep.values",
                        format!("separations must be positive integers, got {value}"),
                    ));
                }
                let first = cfg.initial.excited_sites[0];
                cfg.initial.excited_sites = vec![first, first + value as usize];
            }
        }
        let label = format!("{}_{}", axis.name(), format_value(value));
        cfg.output.dir = self.output.dir.join(label);
        Ok(cfg)
    }

    fn single_point(self, label: Option<String>) -> Result<RunPoint> {
        let params = self.system.params();
        params.validate().map_err(|e| cfg_err("system", e))?;
        let n = params.n_sites;
        let dim = binomial(n, params.n_excitations).unwrap_or(u128::MAX);
        let limit = match self.propagation.method {
            Method::Rk4 => self.propagation.max_dim,
            Method::Expm | Method::SelfTest => self.propagation.max_dim.min(DENSE_LIMIT),
        };
        if dim > limit as u128 {
            return Err(Error::Capacity { dim, limit });
        }
        let r_max = self
            .observables
            .r_max
            .unwrap_or_else(|| DEFAULT_R_MAX.min(n - 1));
        let observables = ObservableOptions {
            r_max,
            normalize: self.observables.normalize,
        };
        let simulation = Simulation {
            params,
            quench: self.initial.excited_sites.clone(),
            grid: self.grid,
            method: self.propagation.method,
            observables,
        };
        simulation.validate().map_err(|e| match e {
            Error::Parameter { name: "sites", reason } => {
                cfg_err("initial.excited_sites", reason)
            }
            Error::Parameter { name: "r_max", reason } => cfg_err("observables.r_max", reason),
            other => cfg_err("config", other),
        })?;
        Ok(RunPoint {
            label,
            simulation,
            ensemble: self.ensemble.clone(),
            dir: self.output.dir.clone(),
            config: self,
        })
    }
}

/// Bundled configurations for the standard scenarios.
pub mod presets {
    /// `(name, description, TOML)`.
    pub const PRESETS: &[(&str, &str, &str)] = &[
        (
            "fig2",
            "N=30, M=2 side-by-side quench at the centre, ξ=π/8, W=0.8π; D swept over {0, 0.5}",
            include_str!("../../../presets/fig2.toml"),
        ),
        (
            "fig2b",
            "population profiles at γt=80 for D=0.5 and W/π in {0.1, 0.5, 0.8}",
            include_str!("../../../presets/fig2b.toml"),
        ),
        (
            "fig3",
            "N=15, M=3 quench on sites 7-9; W/π swept over {0, 0.1, 0.8}",
            include_str!("../../../presets/fig3.toml"),
        ),
        (
            "fig4",
            "G2(r) for r=1..5 at D=0.5, W=0.8π with the clean reference and crossing times",
            include_str!("../../../presets/fig4.toml"),
        ),
        (
            "fig5",
            "separated two-excitation quenches, separations {1, 2, 3, 6}",
            include_str!("../../../presets/fig5.toml"),
        ),
        (
            "fig6",
            "crossing times of G2(r) for separations {2, 3}",
            include_str!("../../../presets/fig6.toml"),
        ),
        (
            "fig7",
            "G3 for N=15, M=3 with crossing times; W/π swept over {0.1, 0.8}",
            include_str!("../../../presets/fig7.toml"),
        ),
    ];

    pub fn get(name: &str) -> Option<&'static str> {
        PRESETS.iter().find(|p| p.0 == name).map(|p| p.2)
    }

    pub fn names() -> impl Iterator<Item = &'static str> {
        PRESETS.iter().map(|p| p.0)
    }
}
