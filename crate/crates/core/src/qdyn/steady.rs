use nalgebra::DVector;
use num_complex::Complex64;

use super::density::DensityMatrix;
use super::lindblad::liouvillian;
use super::system::{CMatrix, LindbladSystem};
use crate::{Error, Result};

/// Largest Hilbert dimension handed to the dense Liouvillian solve. The
/// superoperator is `dim² x dim²`, so 40 already means a 1600 x 1600 LU.
pub const MAX_STEADY_STATE_DIM: usize = 40;

/// Relative pivot size below which the bordered Liouvillian is treated as
/// singular (more than one steady state).
const PIVOT_TOL: f64 = 1e-12;

/// Solve `L(ρ) = 0` with `tr ρ = 1`.
///
/// The row of the vectorised Liouvillian belonging to `ρ_00` is replaced by
/// the trace condition; trace preservation makes that row redundant, so the
/// bordered system is regular exactly when the steady state is unique.
pub fn steady_state(sys: &LindbladSystem) -> Result<DensityMatrix> {
    if !sys.is_dissipative() {
        return Err(Error::Degenerate(
            "system has no dissipation; every eigenstate of H is stationary".into(),
        ));
    }
    let d = sys.dim();
    if d > MAX_STEADY_STATE_DIM {
        return Err(Error::Config(format!(
            "steady-state solve limited to dimension {MAX_STEADY_STATE_DIM}, got {d}"
        )));
    }
    let l = liouvillian(sys);
    let n = d * d;
    let mut a = l.clone();
    for k in 0..n {
        a[(0, k)] = Complex64::new(0.0, 0.0);
    }
    for i in 0..d {
        a[(0, i + i * d)] = Complex64::new(1.0, 0.0);
    }
    let mut b = DVector::<Complex64>::zeros(n);
    b[0] = Complex64::new(1.0, 0.0);

    let lu = a.clone().lu();
    let u_diag: Vec<f64> = lu.u().diagonal().iter().map(|c| c.norm()).collect();
    let max_piv = u_diag.iter().copied().fold(0.0, f64::max);
    let min_piv = u_diag.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_piv > PIVOT_TOL * max_piv) {
        return Err(Error::Degenerate(format!(
            "Liouvillian has a multi-dimensional kernel (pivot ratio {:e})",
            min_piv / max_piv
        )));
    }
    let mut x = lu.solve(&b).ok_or_else(|| Error::Degenerate("bordered Liouvillian is singular".into()))?;
    // one round of iterative refinement
    let r = &b - &a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }

    let residual = (&l * &x).norm();
    let l_norm = l.norm();
    if residual > 1e-9 * l_norm {
        return Err(Error::Degenerate(format!(
            "steady-state residual {residual:e} exceeds 1e-9 |L| = {:e}",
            1e-9 * l_norm
        )));
    }

    let rho = CMatrix::from_column_slice(d, d, x.as_slice());
    let rho = DensityMatrix::from_matrix_unchecked(rho)?.hermitize();
    // renormalise away round-off in the trace
    let tr = rho.trace().re;
    let rho = DensityMatrix::new(rho.into_matrix() / Complex64::new(tr, 0.0))?;
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdyn::{build_system, expectation, HilbertConfig, SystemParams};

    #[test]
    fn undriven_system_relaxes_to_ground() {
        let cfg = HilbertConfig::new(2, 1).unwrap();
        let p = SystemParams {
            g: 3.0,
            kappa: 20.0,
            gamma_rad: 0.5,
            gamma_deph: 0.2,
            delta_a: 1.0,
            ..SystemParams::default()
        };
        let rho = steady_state(&build_system(cfg, &p).unwrap()).unwrap();
        let ground = DensityMatrix::basis(cfg.dim(), 0).unwrap();
        assert!(rho.trace_distance(&ground).unwrap() < 1e-10);
    }

    #[test]
    fn driven_empty_cavity_photon_number() {
        let cfg = HilbertConfig::new(6, 1).unwrap();
        let p = SystemParams {
            kappa: 10.0,
            gamma_rad: 1.0,
            delta_c: 3.0,
            omega_drive: 0.4,
            ..SystemParams::default()
        };
        let rho = steady_state(&build_system(cfg, &p).unwrap()).unwrap();
        let n = expectation(&cfg.photon_number(), &rho).unwrap().re;
        let expected = (0.2f64).powi(2) / (5.0f64.powi(2) + 9.0);
        assert!((n - expected).abs() < 1e-9 * expected.max(1e-3), "{n} vs {expected}");
    }

    #[test]
    fn closed_system_is_degenerate() {
        let cfg = HilbertConfig::new(1, 1).unwrap();
        let p = SystemParams::new(1.0, 0.0, 0.0);
        let sys = build_system(cfg, &p).unwrap();
        assert!(matches!(steady_state(&sys), Err(Error::Degenerate(_))));
    }

    #[test]
    fn pure_dephasing_only_is_degenerate() {
        // populations of an undriven dephasing-only emitter are all stationary
        let cfg = HilbertConfig::new(1, 1).unwrap();
        let p = SystemParams { gamma_deph: 1.0, ..SystemParams::default() };
        let sys = build_system(cfg, &p).unwrap();
        assert!(matches!(steady_state(&sys), Err(Error::Degenerate(_))));
    }

    #[test]
    fn too_large_rejected() {
        let cfg = HilbertConfig::new(4, 4).unwrap();
        let sys = build_system(cfg, &SystemParams::new(1.0, 1.0, 1.0)).unwrap();
        assert!(matches!(steady_state(&sys), Err(Error::Config(_))));
    }
}
