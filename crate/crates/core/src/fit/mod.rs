//! Nonlinear least squares (Levenberg-Marquardt) and the spectroscopy model
//! zoo: Lorentzian lines, exponential decays, transparency spectra and
//! power-broadened linewidths.

mod guess;
mod lm;
mod model;
mod result;

pub use guess::initial_guess;
pub use lm::{lm_fit, lm_fit_with, residual_jacobian, FitData, LmOptions};
pub use model::{evaluate_model, Bound, FitModel, ModelKind, ParamSpec};
pub use result::{FitResult, FittedParam};

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Fit `Δν(P) = Δν0 √(1 + P/P_sat)` to `(power, linewidth)` pairs and
/// report `linewidth0` as the zero-power linewidth.
///
/// When the linewidths carry no power dependence, `p_sat` is reported as
/// infinite and listed in [`FitResult::unidentifiable`].
pub fn fit_linewidth_extrapolation(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InvalidParams(format!(
            "linewidth extrapolation needs >= 3 points, got {}",
            points.len()
        )));
    }
    let (power, width): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    if power.iter().any(|p| !(*p >= 0.0)) || width.iter().any(|w| !(*w > 0.0)) {
        return Err(Error::InvalidParams("powers must be >= 0 and linewidths > 0".into()));
    }

    let w_min = width.iter().copied().fold(f64::INFINITY, f64::min);
    let w_max = width.iter().copied().fold(0.0, f64::max);
    if w_max - w_min <= 1e-12 * w_max {
        return Ok(saturation_free(&width));
    }

    let guess = initial_guess(ModelKind::PowerBroadening, &power, &width, 1.0)?;
    let model = FitModel::new(ModelKind::PowerBroadening, &guess)?;
    let data = FitData::new(&power, &width);
    match lm_fit(&model, data) {
        Err(Error::DegenerateFit { .. }) => {
            let held = model.fix("p_sat", f64::INFINITY)?;
            let mut res = lm_fit(&held, data)?;
            res.unidentifiable.push("p_sat".into());
            Ok(res)
        }
        other => other,
    }
}

fn saturation_free(width: &[f64]) -> FitResult {
    let n = width.len();
    let mean = width.iter().sum::<f64>() / n as f64;
    let residuals: Vec<f64> = width.iter().map(|w| w - mean).collect();
    let chi2_reduced = residuals.iter().map(|r| r * r).sum::<f64>() / (n - 1) as f64;
    let sigma = (chi2_reduced / n as f64).sqrt();
    FitResult {
        model: ModelKind::PowerBroadening,
        params: vec![
            FittedParam { name: "linewidth0".into(), value: mean, sigma, fixed: false, unit: "y".into() },
            FittedParam {
                name: "p_sat".into(),
                value: f64::INFINITY,
                sigma: 0.0,
                fixed: true,
                unit: "x".into(),
            },
        ],
        chi2_reduced,
        covariance: DMatrix::from_element(1, 1, sigma * sigma),
        free_names: vec!["linewidth0".into()],
        converged: true,
        n_iterations: 0,
        residuals,
        unidentifiable: vec!["p_sat".into()],
    }
}
