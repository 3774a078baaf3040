// Copyright 2026 The chainloc Authors
// SPDX-License-Identifier: Apache-2.0

//! Dissipative dynamics of several atomic excitations in a chain coupled to a
//! chiral waveguide, with onsite phase disorder.
//!
//! The pipeline for one disorder realization is
//!
//! 1. [`basis`]: enumerate the `C(N, M)` bare states,
//! 2. [`kernel`]: build the single-excitation kernel `V̄` for given `D`, `ξ`
//!    and onsite phases,
//! 3. [`coupling`]: lift it to the `M`-excitation generator `V`,
//! 4. [`evolve`]: integrate `da/dt = V a` on a time grid,
//! 5. [`observables`]: reduce amplitudes to populations and density
//!    correlations.
//!
//! [`ensemble`] repeats this over disorder realizations in parallel, and
//! [`runner`] drives whole configuration files, writing CSV/JSON output via
//! [`output`].
//!
//! ```
//! use std::f64::consts::PI;
//! use chainloc::{ensemble::{run_ensemble, EnsembleConfig, Simulation}, SystemParams, TimeGrid};
//!
//! let params = SystemParams::new(8, 2)
//!     .with_directionality(0.5)
//!     .with_xi(PI / 8.0)
//!     .with_disorder(0.8 * PI);
//! let sim = Simulation::new(params, vec![4, 5], TimeGrid::new(20.0, 40)?);
//! let cfg = EnsembleConfig { realizations: 8, ..EnsembleConfig::default() };
//! let result = run_ensemble(&sim, &cfg)?;
//! assert_eq!(result.populations.dim(), (41, 8));
//! # Ok::<(), chainloc::Error>(())
//! ```

pub mod basis;
pub mod config;
pub mod coupling;
pub mod ensemble;
mod error;
pub mod evolve;
pub mod kernel;
pub mod linalg;
pub mod observables;
pub mod output;
pub mod runner;

pub use basis::{BareState, Basis};
pub use coupling::CouplingMatrix;
pub use error::{Error, Result};
pub use evolve::{Method, TimeGrid, Trajectory};
pub use kernel::{DisorderRealization, Kernel, SystemParams};

/// Crate version, recorded in run metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

// The guide's code listings compile and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/basis.md")]
    mod basis {}
    #[doc = include_str!("../../../book/src/kernel.md")]
    mod kernel {}
    #[doc = include_str!("../../../book/src/coupling.md")]
    mod coupling {}
    #[doc = include_str!("../../../book/src/evolution.md")]
    mod evolution {}
    #[doc = include_str!("../../../book/src/observables.md")]
    mod observables {}
    #[doc = include_str!("../../../book/src/ensembles.md")]
    mod ensembles {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
