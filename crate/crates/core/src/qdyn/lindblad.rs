use num_complex::Complex64;

use super::density::DensityMatrix;
use super::system::{CMatrix, LindbladSystem};
use crate::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `dρ/dt = -i[H, ρ] + Σ r (L ρ L† - ½{L†L, ρ})`.
pub fn lindblad_derivative(sys: &LindbladSystem, rho: &DensityMatrix) -> Result<CMatrix> {
    let d = sys.dim();
    if rho.dim() != d {
        return Err(Error::ShapeMismatch { expected: d, rows: rho.dim(), cols: rho.dim() });
    }
    Ok(apply_generator(sys, rho.matrix()))
}

/// Generator applied to an arbitrary square matrix of the right size.
///
/// Written as `-i H_eff ρ + i ρ H_eff† + Σ J ρ J†` with
/// `H_eff = H - (i/2) Σ r L†L` and `J = √r L`.
pub(crate) fn apply_generator(sys: &LindbladSystem, m: &CMatrix) -> CMatrix {
    let h_eff_m = sys.h_eff() * m;
    // -i H_eff ρ + (-i H_eff ρ)† is exactly the coherent + anticommutator
    // part when ρ is Hermitian; use the general form so the map stays linear
    // for non-Hermitian arguments.
    let mut out = &h_eff_m * (-I) + (m * sys.h_eff().adjoint()) * I;
    for j in sys.jumps() {
        out += j * m * j.adjoint();
    }
    out
}

/// Dense Liouvillian superoperator on column-stacked `vec(ρ)`, where the
/// entry `ρ_ij` sits at index `i + j·d`.
pub fn liouvillian(sys: &LindbladSystem) -> CMatrix {
    let d = sys.dim();
    let n = d * d;
    let mut l = CMatrix::zeros(n, n);
    let h = sys.h_eff();
    let idx = |i: usize, j: usize| i + j * d;

    // -i H_eff ρ  ->  [(i,j),(k,j)] += -i H_ik
    // +i ρ H_eff† ->  [(i,j),(i,k)] += +i conj(H_jk)
    for k in 0..d {
        for i in 0..d {
            let hik = h[(i, k)];
            if hik != Complex64::new(0.0, 0.0) {
                for j in 0..d {
                    l[(idx(i, j), idx(k, j))] += -I * hik;
                    l[(idx(j, i), idx(j, k))] += I * hik.conj();
                }
            }
        }
    }
    // J ρ J† -> [(i,j),(k,m)] += J_ik conj(J_jm)
    for jmat in sys.jumps() {
        let nz: Vec<(usize, usize, Complex64)> = (0..d)
            .flat_map(|c| (0..d).map(move |r| (r, c)))
            .filter_map(|(r, c)| {
                let v = jmat[(r, c)];
                (v != Complex64::new(0.0, 0.0)).then_some((r, c, v))
            })
            .collect();
        for &(i, k, a) in &nz {
            for &(j, m, b) in &nz {
                l[(idx(i, j), idx(k, m))] += a * b.conj();
            }
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qdyn::{build_system, HilbertConfig, SystemParams};
    use crate::TWO_PI;

    fn random_like_rho(d: usize) -> DensityMatrix {
        // deterministic mixed state with coherences
        let psi: Vec<Complex64> =
            (0..d).map(|k| Complex64::new(1.0 + k as f64 * 0.3, 0.2 * k as f64 - 0.5)).collect();
        let pure = DensityMatrix::pure(&psi).unwrap();
        let mix = pure.matrix() * Complex64::new(0.7, 0.0)
            + CMatrix::identity(d, d) * Complex64::new(0.3 / d as f64, 0.0);
        DensityMatrix::new(mix).unwrap()
    }

    fn params() -> SystemParams {
        SystemParams {
            g: 2.0,
            kappa: 10.0,
            gamma_rad: 0.5,
            gamma_deph: 0.3,
            delta_c: 1.0,
            delta_a: -0.5,
            omega_drive: 0.8,
            ..SystemParams::default()
        }
    }

    #[test]
    fn trace_free_and_hermitian() {
        let cfg = HilbertConfig::new(2, 2).unwrap();
        let sys = build_system(cfg, &params()).unwrap();
        let rho = random_like_rho(cfg.dim());
        let dr = lindblad_derivative(&sys, &rho).unwrap();
        assert!(dr.trace().norm() < 1e-12);
        assert!((&dr - dr.adjoint()).camax() < 1e-12);
    }

    #[test]
    fn decoupled_emitter_decays_at_gamma_rad() {
        let cfg = HilbertConfig::new(1, 1).unwrap();
        let p = SystemParams::new(0.0, 3.0, 0.7);
        let sys = build_system(cfg, &p).unwrap();
        let rho = DensityMatrix::basis(cfg.dim(), cfg.index(0, 1)).unwrap();
        let dr = lindblad_derivative(&sys, &rho).unwrap();
        let rate = crate::qdyn::expectation(
            &cfg.excited_population(0),
            &DensityMatrix::from_matrix_unchecked(dr).unwrap(),
        )
        .unwrap()
        .re;
        assert!((rate + TWO_PI * 0.7).abs() < 1e-12);
    }

    #[test]
    fn superoperator_matches_direct_application() {
        let cfg = HilbertConfig::new(2, 1).unwrap();
        let sys = build_system(cfg, &params()).unwrap();
        let rho = random_like_rho(cfg.dim());
        let d = cfg.dim();
        let l = liouvillian(&sys);
        let v = nalgebra::DVector::from_iterator(d * d, rho.matrix().iter().copied());
        let lv = l * v;
        let direct = lindblad_derivative(&sys, &rho).unwrap();
        let direct_vec: Vec<Complex64> = direct.iter().copied().collect();
        for (a, b) in lv.iter().zip(direct_vec.iter()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn shape_mismatch() {
        let cfg = HilbertConfig::new(1, 1).unwrap();
        let sys = build_system(cfg, &params()).unwrap();
        let rho = DensityMatrix::basis(6, 0).unwrap();
        assert!(matches!(lindblad_derivative(&sys, &rho), Err(Error::ShapeMismatch { .. })));
    }
}
