//! Dormand-Prince 5(4) with PI step-size control (Hairer, Nørsett & Wanner,
//! "Solving ODEs I", II.4) on dense complex matrices.

use num_complex::Complex64;

use super::system::CMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step, ns. Chosen automatically when `None`.
    pub h_init: Option<f64>,
    /// Hard cap on accepted + rejected steps.
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h_init: None, max_steps: 5_000_000 }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const ALPHA: f64 = 0.2 - 0.75 * BETA;

/// `y + Σ c_k k_k`.
fn combine(y: &CMatrix, terms: &[(f64, &CMatrix)]) -> CMatrix {
    let mut out = y.clone();
    for &(c, k) in terms {
        out.zip_apply(k, |o, v| *o += v * c);
    }
    out
}

fn error_norm(err: &CMatrix, y0: &CMatrix, y1: &CMatrix, opts: &IntegratorOptions) -> f64 {
    let mut acc = 0.0;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
        let r = e.norm() / sc;
        acc += r * r;
    }
    (acc / err.len().max(1) as f64).sqrt()
}

fn rms(m: &CMatrix) -> f64 {
    (m.iter().map(Complex64::norm_sqr).sum::<f64>() / m.len().max(1) as f64).sqrt()
}

/// Integrate `dy/dt = f(y)` from `t = 0`, returning `y` at each of
/// `times` (ascending, non-negative). Output times are hit exactly.
pub fn integrate<F>(f: F, y0: CMatrix, times: &[f64], opts: &IntegratorOptions) -> Result<Vec<CMatrix>>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::Config("sample times must be ascending and >= 0".into()));
    }
    let t_end = times.last().copied().unwrap_or(0.0);
    let mut out = Vec::with_capacity(times.len());
    let mut y = y0;
    let mut t = 0.0;
    let mut k1 = f(&y);

    let mut h = match opts.h_init {
        Some(h) => h,
        None => {
            let d0 = rms(&y).max(opts.atol);
            let d1 = rms(&k1);
            if d1 > 1e-300 {
                0.01 * d0 / d1
            } else {
                1e-3
            }
        }
    }
    .min(t_end.max(f64::MIN_POSITIVE));
    let mut err_old: f64 = 1e-4;
    let mut steps = 0usize;

    for &target in times {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let hs = if last { remaining } else { h };
            if hs < 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Stiff { t, step: hs });
            }
            steps += 1;
            if steps > opts.max_steps {
                return Err(Error::Stiff { t, step: hs });
            }

            let k2 = f(&combine(&y, &[(hs * A21, &k1)]));
            let k3 = f(&combine(&y, &[(hs * A31, &k1), (hs * A32, &k2)]));
            let k4 = f(&combine(&y, &[(hs * A41, &k1), (hs * A42, &k2), (hs * A43, &k3)]));
            let k5 = f(&combine(&y, &[(hs * A51, &k1), (hs * A52, &k2), (hs * A53, &k3), (hs * A54, &k4)]));
            let k6 = f(&combine(
                &y,
                &[(hs * A61, &k1), (hs * A62, &k2), (hs * A63, &k3), (hs * A64, &k4), (hs * A65, &k5)],
            ));
            let y_new = combine(
                &y,
                &[(hs * A71, &k1), (hs * A73, &k3), (hs * A74, &k4), (hs * A75, &k5), (hs * A76, &k6)],
            );
            let k7 = f(&y_new);
            let err_vec = combine(
                &CMatrix::zeros(y.nrows(), y.ncols()),
                &[
                    (hs * E1, &k1),
                    (hs * E3, &k3),
                    (hs * E4, &k4),
                    (hs * E5, &k5),
                    (hs * E6, &k6),
                    (hs * E7, &k7),
                ],
            );
            let err = error_norm(&err_vec, &y, &y_new, opts);
            if !err.is_finite() {
                h = hs * FAC_MIN;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Stiff { t, step: h });
                }
                continue;
            }

            if err <= 1.0 {
                let fac = if err == 0.0 {
                    FAC_MAX
                } else {
                    (SAFETY * err.powf(-ALPHA) * err_old.powf(BETA)).clamp(FAC_MIN, FAC_MAX)
                };
                err_old = err.max(1e-4);
                t = if last { target } else { t + hs };
                y = y_new;
                k1 = k7;
                // a clipped final step says nothing about the natural step size
                if !last || hs >= h {
                    h = hs * fac;
                }
            } else {
                let fac = (SAFETY * err.powf(-ALPHA)).clamp(FAC_MIN, 1.0);
                h = hs * fac;
                if h < 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Stiff { t, step: h });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
