// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

/// Errors produced by the simulation library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The requested basis is larger than the configured cap.
    #[error("basis dimension {dim} exceeds the capacity limit of {limit}")]
    Capacity { dim: u128, limit: usize },

    /// A matrix or vector contains NaN or infinite entries.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// The two propagation methods disagree beyond tolerance.
    #[error("integrator cross-check failed: relative deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    Integrator { deviation: f64, tolerance: f64 },

    /// A single disorder realization failed inside the ensemble loop.
    #[error("realization {index} failed: {source}")]
    Realization {
        index: u64,
        #[source]
        source: Box<Error>,
    },

    /// Cancelled before any realization completed.
    #[error("interrupted before any realization completed")]
    Interrupted,

    /// The run configuration could not be parsed or is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input rather than by the computation.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Parameter { .. } | Error::Capacity { .. } | Error::Config(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
