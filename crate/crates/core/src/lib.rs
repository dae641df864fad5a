//! Cavity-QED modelling and parameter extraction for a solid-state color
//! center coupled to a photonic-crystal cavity.
//!
//! The crate is organised by concern:
//!
//! * [`qdyn`] - dense Lindblad master-equation engine (Jaynes-Cummings and
//!   Tavis-Cummings), steady states and two-time correlations.
//! * [`derive`] - closed-form figures of merit (β, cooperativity, Purcell
//!   factors, Q/κ conversion, collective strong-coupling threshold) with
//!   first-order uncertainty propagation.
//! * [`spectra`] - dipole-induced-transparency and bare-cavity transmission,
//!   cavity tuning maps.
//! * [`dynamics`] - simulated decay traces and lifetime extraction.
//! * [`fit`] - Levenberg-Marquardt engine and the model zoo.
//! * [`io`] - CSV series, streak images and flat run configuration.
//!
//! Unit convention: every user-facing rate or frequency is an ordinary
//! frequency ν = ω/2π in GHz, times are in ns. The master-equation engine
//! multiplies by 2π internally and works in rad/ns.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod derive;
pub mod dynamics;
pub mod error;
pub mod fit;
pub mod io;
pub mod qdyn;
pub mod spectra;

pub use error::{Error, Result};

pub use derive::{CavityRecord, EmitterRecord, Measured, SiVSpec, Unit};
pub use dynamics::{DecayKind, DecayTrace};
pub use fit::{FitModel, FitResult, ModelKind};
pub use io::{RunConfig, StreakImage};
pub use qdyn::{DensityMatrix, HilbertConfig, LindbladSystem, Sampler, SystemParams};
pub use spectra::{AxisKind, SpectrumSeries};

/// 2π, the factor between ordinary (GHz) and angular (rad/ns) frequency.
pub const TWO_PI: f64 = std::f64::consts::TAU;

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Version tag of the plain-text file formats read and written by [`io`].
pub const FORMAT_VERSION: &str = "1";
