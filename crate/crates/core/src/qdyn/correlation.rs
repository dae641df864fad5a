use num_complex::Complex64;

use super::density::{expectation, DensityMatrix};
use super::evolve::{evolve, Sampler};
use super::steady::steady_state;
use super::system::{CMatrix, LindbladSystem};
use crate::{Error, Result};

/// Steady-state photon numbers below this make g² meaningless.
pub const MIN_PHOTON_NUMBER: f64 = 1e-12;

/// Normalised intensity correlation of the cavity field,
/// `g²(τ) = <a†(0) a†(τ) a(τ) a(0)> / <a†a>²`, by the quantum regression
/// theorem: `a ρ_ss a†` is propagated with the system's own Liouvillian.
///
/// `tau_grid` must be ascending and non-negative. Requires a system built
/// with [`super::build_system`].
pub fn g2_correlation(sys: &LindbladSystem, tau_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let cfg = sys.config().ok_or_else(|| Error::Config("g2 needs a system with a cavity mode".into()))?;
    let a = cfg.annihilation();
    let n_op = cfg.photon_number();
    let rho_ss = steady_state(sys)?;
    g2_from_state(sys, &rho_ss, &a, &n_op, tau_grid)
}

pub(crate) fn g2_from_state(
    sys: &LindbladSystem,
    rho_ss: &DensityMatrix,
    a: &CMatrix,
    n_op: &CMatrix,
    tau_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if tau_grid.is_empty() {
        return Ok(Vec::new());
    }
    if tau_grid[0] < 0.0 || tau_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("tau grid must be strictly ascending and >= 0".into()));
    }
    let n = expectation(n_op, rho_ss)?.re;
    if !(n >= MIN_PHOTON_NUMBER) {
        return Err(Error::UndefinedCorrelation { photons: n });
    }
    // a ρ a† / <a†a> is itself a density matrix
    let collapsed = a * rho_ss.matrix() * a.adjoint() / Complex64::new(n, 0.0);
    let collapsed = DensityMatrix::from_matrix_unchecked(collapsed)?.hermitize();

    let t_final = tau_grid[tau_grid.len() - 1];
    let states = if t_final > 0.0 {
        evolve(sys, &collapsed, t_final, &Sampler::Times(tau_grid.to_vec()))?
    } else {
        vec![(0.0, collapsed)]
    };
    states.iter().map(|(t, rho)| Ok((*t, expectation(n_op, rho)?.re / n))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdyn::{build_system, HilbertConfig, SystemParams};

    #[test]
    fn undriven_system_is_undefined() {
        let cfg = HilbertConfig::new(2, 1).unwrap();
        let sys = build_system(cfg, &SystemParams::new(1.0, 10.0, 1.0)).unwrap();
        assert!(matches!(g2_correlation(&sys, &[0.0, 1.0]), Err(Error::UndefinedCorrelation { .. })));
    }

    #[test]
    fn coherent_drive_is_poissonian() {
        let cfg = HilbertConfig::new(5, 1).unwrap();
        let p = SystemParams { kappa: 10.0, gamma_rad: 1.0, omega_drive: 1.0, ..SystemParams::default() };
        let sys = build_system(cfg, &p).unwrap();
        let taus: Vec<f64> = (0..6).map(|k| k as f64 * 0.05).collect();
        for (_, g2) in g2_correlation(&sys, &taus).unwrap() {
            assert!((g2 - 1.0).abs() < 1e-6, "g2 = {g2}");
        }
    }
}
