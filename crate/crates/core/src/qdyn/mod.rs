//! Dense density-matrix engine for cavity-QED open systems.

mod correlation;
mod density;
mod evolve;
mod integrate;
mod lindblad;
mod steady;
mod system;

pub use correlation::{g2_correlation, MIN_PHOTON_NUMBER};
pub use density::{expectation, DensityMatrix, HERMITIAN_TOL, POSITIVITY_TOL, TRACE_TOL};
pub use evolve::{evolve, evolve_with, Sampler};
pub use integrate::{integrate, IntegratorOptions};
pub use lindblad::{lindblad_derivative, liouvillian};
pub use steady::{steady_state, MAX_STEADY_STATE_DIM};
pub use system::{
    build_system, CMatrix, CollapseOp, HilbertConfig, LindbladSystem, SystemParams, DEFAULT_DIM_CAP,
};
