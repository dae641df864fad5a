use num_complex::Complex64;

use super::system::CMatrix;
use crate::{Error, Result};

/// Tolerance on `|tr ρ - 1|` accepted by [`DensityMatrix::new`].
pub const TRACE_TOL: f64 = 1e-9;
/// Tolerance on `max |ρ - ρ†|` accepted by [`DensityMatrix::new`].
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Most negative eigenvalue accepted by [`DensityMatrix::new`].
pub const POSITIVITY_TOL: f64 = 1e-9;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// up to solver tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    pub fn new(entries: CMatrix) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(entries)?;
        rho.check(TRACE_TOL, HERMITIAN_TOL, POSITIVITY_TOL)?;
        Ok(rho)
    }

    /// Wrap a square matrix without checking trace, Hermiticity or
    /// positivity.
    pub(crate) fn from_matrix_unchecked(entries: CMatrix) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::ShapeMismatch {
                expected: entries.nrows(),
                rows: entries.nrows(),
                cols: entries.ncols(),
            });
        }
        Ok(Self { entries })
    }

    /// Projector onto basis state `index`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::Config(format!("basis index {index} out of range for dimension {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = Complex64::new(1.0, 0.0);
        Ok(Self { entries: m })
    }

    /// `|ψ><ψ|` for a (not necessarily normalised) state vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if psi.is_empty() || norm2 == 0.0 || !norm2.is_finite() {
            return Err(Error::InvalidParams("state vector has zero norm".into()));
        }
        let d = psi.len();
        let m = CMatrix::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / norm2);
        Ok(Self { entries: m })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn purity(&self) -> f64 {
        // tr(ρ²) = Σ |ρ_ij|² for Hermitian ρ
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest entry of `|ρ - ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// Trace distance `½ ‖ρ - σ‖₁`.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if other.dim() != self.dim() {
            return Err(Error::ShapeMismatch { expected: self.dim(), rows: other.dim(), cols: other.dim() });
        }
        let diff = &self.entries - &other.entries;
        let herm = (&diff + diff.adjoint()) * Complex64::new(0.5, 0.0);
        Ok(0.5 * herm.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
    }

    /// Validate against explicit tolerances.
    pub fn check(&self, trace_tol: f64, herm_tol: f64, pos_tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > trace_tol {
            return Err(Error::InvalidParams(format!(
                "density matrix trace {tr} differs from 1 by more than {trace_tol:e}"
            )));
        }
        let herm = self.hermiticity_error();
        if herm > herm_tol {
            return Err(Error::InvalidParams(format!(
                "density matrix not Hermitian (max |ρ - ρ†| = {herm:e})"
            )));
        }
        let min_ev = self.min_eigenvalue();
        if min_ev < -pos_tol {
            return Err(Error::InvalidParams(format!(
                "density matrix not positive (min eigenvalue {min_ev:e})"
            )));
        }
        Ok(())
    }

    /// Replace `ρ` by its Hermitian part.
    pub(crate) fn hermitize(mut self) -> Self {
        let adj = self.entries.adjoint();
        self.entries += adj;
        self.entries *= Complex64::new(0.5, 0.0);
        self
    }
}

/// `tr(op ρ)`.
pub fn expectation(op: &CMatrix, rho: &DensityMatrix) -> Result<Complex64> {
    let d = rho.dim();
    if op.nrows() != d || op.ncols() != d {
        return Err(Error::ShapeMismatch { expected: d, rows: op.nrows(), cols: op.ncols() });
    }
    let m = rho.matrix();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for k in 0..d {
            acc += op[(i, k)] * m[(k, i)];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdyn::HilbertConfig;

    #[test]
    fn expectation_examples() {
        let cfg = HilbertConfig::new(2, 1).unwrap();
        let d = cfg.dim();
        let excited = DensityMatrix::basis(d, cfg.index(0, 1)).unwrap();
        let vacuum = DensityMatrix::basis(d, cfg.index(0, 0)).unwrap();
        let id = CMatrix::identity(d, d);
        let e = expectation(&id, &excited).unwrap();
        assert!((e - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let e = expectation(&cfg.excited_population(0), &excited).unwrap();
        assert!((e.re - 1.0).abs() < 1e-15);
        let e = expectation(&cfg.photon_number(), &vacuum).unwrap();
        assert_eq!(e.re, 0.0);
    }

    #[test]
    fn expectation_shape_mismatch() {
        let rho = DensityMatrix::basis(4, 0).unwrap();
        let op = CMatrix::identity(3, 3);
        assert!(matches!(expectation(&op, &rho), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let mut m = CMatrix::identity(2, 2);
        assert!(DensityMatrix::new(m.clone()).is_err()); // trace 2
        m[(1, 1)] = Complex64::new(0.0, 0.0);
        m[(0, 1)] = Complex64::new(0.3, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_err()); // not Hermitian
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(-0.5, 0.0),
            ],
        );
        assert!(DensityMatrix::new(m).is_err()); // negative eigenvalue
    }

    #[test]
    fn pure_state_and_distance() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure(&[Complex64::new(h, 0.0), Complex64::new(h, 0.0)]).unwrap();
        assert!((plus.purity() - 1.0).abs() < 1e-14);
        let zero = DensityMatrix::basis(2, 0).unwrap();
        let td = plus.trace_distance(&zero).unwrap();
        assert!((td - h).abs() < 1e-12);
        assert!(DensityMatrix::new(plus.matrix().clone()).is_ok());
    }
}
