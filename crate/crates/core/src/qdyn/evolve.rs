use super::density::{DensityMatrix, TRACE_TOL};
use super::integrate::{integrate, IntegratorOptions};
use super::lindblad::apply_generator;
use super::system::LindbladSystem;
use crate::{Error, Result};

/// Output time grid for [`evolve`].
#[derive(Debug, Clone, PartialEq)]
pub enum Sampler {
    /// `0, dt, 2dt, ...` up to `t_final`; `t_final` itself is always included.
    Uniform { dt: f64 },
    /// Explicit ascending times in `[0, t_final]`.
    Times(Vec<f64>),
}

impl Sampler {
    pub fn times(&self, t_final: f64) -> Result<Vec<f64>> {
        match self {
            Sampler::Uniform { dt } => {
                if !(*dt > 0.0 && dt.is_finite()) {
                    return Err(Error::Config(format!("sampling step must be > 0, got {dt}")));
                }
                let n = (t_final / dt + 1e-9).floor() as usize;
                let mut ts: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
                if t_final - ts[n] > 1e-9 * dt {
                    ts.push(t_final);
                }
                Ok(ts)
            }
            Sampler::Times(ts) => {
                if ts.is_empty() {
                    return Err(Error::Config("empty sample time list".into()));
                }
                if ts.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Config("sample times must be strictly ascending".into()));
                }
                if ts[0] < 0.0 || ts[ts.len() - 1] > t_final * (1.0 + 1e-12) {
                    return Err(Error::Config(format!("sample times must lie in [0, {t_final}]")));
                }
                Ok(ts.clone())
            }
        }
    }
}

/// Integrate the master equation from `rho0` and return the state at each
/// sample time.
pub fn evolve(
    sys: &LindbladSystem,
    rho0: &DensityMatrix,
    t_final: f64,
    sampler: &Sampler,
) -> Result<Vec<(f64, DensityMatrix)>> {
    evolve_with(sys, rho0, t_final, sampler, &IntegratorOptions::default())
}

pub fn evolve_with(
    sys: &LindbladSystem,
    rho0: &DensityMatrix,
    t_final: f64,
    sampler: &Sampler,
    opts: &IntegratorOptions,
) -> Result<Vec<(f64, DensityMatrix)>> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::Config(format!("t_final must be > 0, got {t_final}")));
    }
    if rho0.dim() != sys.dim() {
        return Err(Error::ShapeMismatch { expected: sys.dim(), rows: rho0.dim(), cols: rho0.dim() });
    }
    let times = sampler.times(t_final)?;
    let states = integrate(|m| apply_generator(sys, m), rho0.matrix().clone(), &times, opts)?;
    times
        .into_iter()
        .zip(states)
        .map(|(t, m)| {
            let rho = DensityMatrix::from_matrix_unchecked(m)?.hermitize();
            let tr = rho.trace();
            if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
                return Err(Error::Solver(format!("trace drifted to {tr} at t = {t} ns")));
            }
            Ok((t, rho))
        })
        .collect()
}
