use nalgebra::{DMatrix, DVector};

use super::model::FitModel;
use super::result::{FitResult, FittedParam};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged when every `|δ_k| < xtol (|u_k| + xtol)` on an accepted step.
    pub xtol: f64,
    /// Converged when both the actual and the predicted relative χ² drop of an
    /// accepted step are below this.
    pub ftol: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self { max_iterations: 500, xtol: 1e-8, ftol: 1e-10 }
    }
}

/// Smallest eigenvalue ratio of the column-normalised normal matrix
/// accepted as identifiable.
const DEGENERACY_TOL: f64 = 1e-12;

/// Data for a fit: abscissa, ordinate and optional 1σ per point.
#[derive(Debug, Clone, Copy)]
pub struct FitData<'a> {
    pub x: &'a [f64],
    pub y: &'a [f64],
    pub sigma: Option<&'a [f64]>,
}

impl<'a> FitData<'a> {
    pub fn new(x: &'a [f64], y: &'a [f64]) -> Self {
        Self { x, y, sigma: None }
    }

    pub fn weighted(x: &'a [f64], y: &'a [f64], sigma: &'a [f64]) -> Self {
        Self { x, y, sigma: Some(sigma) }
    }

    fn validate(&self, n_free: usize) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::InvalidParams(format!(
                "x has {} points, y has {}",
                self.x.len(),
                self.y.len()
            )));
        }
        if let Some(s) = self.sigma {
            if s.len() != self.y.len() {
                return Err(Error::InvalidParams("sigma length differs from y".into()));
            }
            if s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::InvalidParams("all sigma_y must be finite and > 0".into()));
            }
        }
        if self.x.iter().chain(self.y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("data contain non-finite values".into()));
        }
        if self.y.len() < 2 * n_free {
            return Err(Error::InvalidParams(format!(
                "{} points are too few for {n_free} free parameters (need {})",
                self.y.len(),
                2 * n_free
            )));
        }
        Ok(())
    }
}

/// Weighted residuals `(y - f)/σ` as a function of the internal
/// (transformed) free parameters.
struct Problem<'a> {
    model: &'a FitModel,
    data: FitData<'a>,
}

impl Problem<'_> {
    fn external(&self, u: &DVector<f64>) -> Vec<f64> {
        let specs: Vec<_> = self.model.params().iter().filter(|p| p.free).collect();
        u.iter().zip(specs).map(|(&ui, s)| s.bound.to_external(ui)).collect()
    }

    fn residuals_ext(&self, free: &[f64]) -> Result<DVector<f64>> {
        let full = self.model.merge(free);
        let f = self.model.kind().evaluate(&full, self.data.x)?;
        Ok(DVector::from_iterator(
            f.len(),
            f.iter().enumerate().map(|(i, fi)| {
                let s = self.data.sigma.map_or(1.0, |s| s[i]);
                (self.data.y[i] - fi) / s
            }),
        ))
    }

    fn residuals(&self, u: &DVector<f64>) -> Result<DVector<f64>> {
        self.residuals_ext(&self.external(u))
    }

    /// Central-difference Jacobian of `g` at `p`, step `max(1e-6, 1e-6|p_j|)`.
    fn jacobian<F>(p: &DVector<f64>, n_rows: usize, g: F) -> Result<DMatrix<f64>>
    where
        F: Fn(&DVector<f64>) -> Result<DVector<f64>>,
    {
        let mut j = DMatrix::zeros(n_rows, p.len());
        for k in 0..p.len() {
            let h = (1e-6 * p[k].abs()).max(1e-6);
            let mut hi = p.clone();
            let mut lo = p.clone();
            hi[k] += h;
            lo[k] -= h;
            let col = (g(&hi)? - g(&lo)?) / (2.0 * h);
            j.set_column(k, &col);
        }
        Ok(j)
    }
}

/// Numeric Jacobian of the weighted residuals with respect to the free
/// parameters in natural units, evaluated at `free`.
pub fn residual_jacobian(model: &FitModel, data: FitData<'_>, free: &[f64]) -> Result<DMatrix<f64>> {
    let prob = Problem { model, data };
    let p = DVector::from_column_slice(free);
    Problem::jacobian(&p, data.y.len(), |q| prob.residuals_ext(q.as_slice()))
}

/// Levenberg-Marquardt least squares with default options.
pub fn lm_fit(model: &FitModel, data: FitData<'_>) -> Result<FitResult> {
    lm_fit_with(model, data, &LmOptions::default())
}

pub fn lm_fit_with(model: &FitModel, data: FitData<'_>, opts: &LmOptions) -> Result<FitResult> {
    let n_free = model.n_free();
    data.validate(n_free)?;
    let prob = Problem { model, data };
    let n = data.y.len();

    let free_specs: Vec<_> = model.params().iter().filter(|p| p.free).collect();
    let mut u = DVector::from_iterator(n_free, free_specs.iter().map(|s| s.bound.to_internal(s.value)));
    let mut r = prob.residuals(&u)?;
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::InvalidParams("model is not finite at the initial guess".into()));
    }

    let mut j = Problem::jacobian(&u, n, |q| prob.residuals(q))?;
    let mut a = j.transpose() * &j;
    let mut grad = j.transpose() * &r;
    let mut mu = 1e-3 * a.diagonal().max().max(1e-300);
    let mut nu = 2.0;
    let mut converged = cost == 0.0;
    let mut iterations = 0;

    while !converged && iterations < opts.max_iterations {
        iterations += 1;
        let diag_max = a.diagonal().max().max(1e-300);
        let damp = DVector::from_iterator(n_free, a.diagonal().iter().map(|d| d.max(1e-12 * diag_max)));
        let mut lhs = a.clone();
        for k in 0..n_free {
            lhs[(k, k)] += mu * damp[k];
        }
        let Some(chol) = lhs.cholesky() else {
            mu *= nu;
            nu *= 2.0;
            continue;
        };
        let delta = chol.solve(&(-&grad));
        let u_new = &u + &delta;
        let r_new = match prob.residuals(&u_new) {
            Ok(r) => r,
            Err(_) => DVector::from_element(n, f64::INFINITY),
        };
        let cost_new = r_new.norm_squared();
        // L(0) - L(δ) = ½ δᵀ(μDδ - Jᵀr), cost here is 2F
        let predicted = delta.dot(&(delta.component_mul(&damp) * mu - &grad));
        let rho = if cost_new.is_finite() && predicted > 0.0 { (cost - cost_new) / predicted } else { -1.0 };

        if rho > 0.0 {
            let step_small =
                delta.iter().zip(u.iter()).all(|(d, x)| d.abs() < opts.xtol * (x.abs() + opts.xtol));
            let drop_small = (cost - cost_new) < opts.ftol * cost && predicted < opts.ftol * cost;
            u = u_new;
            r = r_new;
            cost = cost_new;
            mu *= (1.0_f64 / 3.0).max(1.0 - (2.0 * rho - 1.0).powi(3));
            nu = 2.0;
            converged = step_small || drop_small || cost == 0.0;
            if !converged {
                j = Problem::jacobian(&u, n, |q| prob.residuals(q))?;
                a = j.transpose() * &j;
                grad = j.transpose() * &r;
                if grad.amax() == 0.0 {
                    converged = true;
                }
            }
        } else {
            mu *= nu;
            nu *= 2.0;
            if !mu.is_finite() || mu > 1e300 {
                // no descent direction left at machine precision
                converged = true;
            }
        }
    }

    let free = prob.external(&u);
    finish(model, data, &free, cost, converged, iterations)
}

fn finish(
    model: &FitModel,
    data: FitData<'_>,
    free: &[f64],
    cost: f64,
    converged: bool,
    iterations: usize,
) -> Result<FitResult> {
    let n = data.y.len();
    let n_free = free.len();
    let dof = (n - n_free).max(1) as f64;
    let chi2_reduced = cost / dof;

    let jn = residual_jacobian(model, data, free)?;
    let normal = jn.transpose() * &jn;
    let names = model.free_names();

    // identifiability on the column-normalised normal matrix
    let scale: Vec<f64> = (0..n_free).map(|k| normal[(k, k)].sqrt()).collect();
    if let Some(k) = scale.iter().position(|&s| !(s > 0.0)) {
        return Err(Error::DegenerateFit { direction: names[k].to_string() });
    }
    let normed = DMatrix::from_fn(n_free, n_free, |i, k| normal[(i, k)] / (scale[i] * scale[k]));
    let eig = normed.clone().symmetric_eigen();
    let (i_min, &ev_min) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one free parameter");
    let ev_max = eig.eigenvalues.max();
    if !(ev_min > DEGENERACY_TOL * ev_max) {
        let v = eig.eigenvectors.column(i_min);
        let terms: Vec<String> = v
            .iter()
            .zip(&names)
            .filter(|(c, _)| c.abs() > 0.1)
            .map(|(c, name)| format!("{c:+.3}*{name}"))
            .collect();
        return Err(Error::DegenerateFit { direction: terms.join(" ") });
    }
    let inv_normed =
        normed.try_inverse().ok_or_else(|| Error::DegenerateFit { direction: names.join(", ") })?;
    let covariance =
        DMatrix::from_fn(n_free, n_free, |i, k| inv_normed[(i, k)] / (scale[i] * scale[k]) * chi2_reduced);
    let covariance = (&covariance + covariance.transpose()) * 0.5;

    let full = model.merge(free);
    let fitted = model.kind().evaluate(&full, data.x)?;
    let residuals: Vec<f64> = data.y.iter().zip(&fitted).map(|(y, f)| y - f).collect();

    let mut k = 0;
    let params = model
        .params()
        .iter()
        .zip(&full)
        .map(|(spec, &value)| {
            let sigma = if spec.free {
                let s = covariance[(k, k)].max(0.0).sqrt();
                k += 1;
                s
            } else {
                0.0
            };
            FittedParam {
                name: spec.name.to_string(),
                value,
                sigma,
                fixed: !spec.free,
                unit: model.unit_of(spec.name),
            }
        })
        .collect();

    Ok(FitResult {
        model: model.kind(),
        params,
        chi2_reduced,
        covariance,
        free_names: names.iter().map(|s| s.to_string()).collect(),
        converged,
        n_iterations: iterations,
        residuals,
        unidentifiable: Vec::new(),
    })
}
