use std::fmt;
use std::str::FromStr;

use crate::qdyn::SystemParams;
use crate::spectra::dit_amplitude;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// `off + A (w/2)² / ((x - x0)² + (w/2)²)`, `w` the FWHM.
    Lorentzian,
    /// `off + A exp(-(x - t0)/τ)`, optionally convolved with a Gaussian IRF.
    ExpDecay,
    /// `off + A T(ν)` with the drop-filter transparency transmission.
    Dit,
    /// `Δν0 √(1 + P/P_sat)`.
    PowerBroadening,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] =
        [ModelKind::Lorentzian, ModelKind::ExpDecay, ModelKind::Dit, ModelKind::PowerBroadening];

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Lorentzian => "lorentzian",
            ModelKind::ExpDecay => "exp_decay",
            ModelKind::Dit => "dit",
            ModelKind::PowerBroadening => "power_broadening",
        }
    }

    /// Parameter labels in evaluation order.
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            ModelKind::Lorentzian => &["x0", "fwhm", "amplitude", "offset"],
            ModelKind::ExpDecay => &["amplitude", "tau", "offset", "t0", "sigma_irf"],
            ModelKind::Dit => {
                &["nu_c", "nu_a", "g", "kappa", "gamma", "amplitude", "offset", "kappa_wg_fraction"]
            }
            ModelKind::PowerBroadening => &["linewidth0", "p_sat"],
        }
    }

    /// Evaluate the model with the full parameter vector (see
    /// [`ModelKind::param_names`]) at each point of `x`.
    pub fn evaluate(&self, params: &[f64], x: &[f64]) -> Result<Vec<f64>> {
        let names = self.param_names();
        if params.len() != names.len() {
            return Err(Error::InvalidParams(format!(
                "{} takes {} parameters ({}), got {}",
                self.name(),
                names.len(),
                names.join(", "),
                params.len()
            )));
        }
        if let Some((name, v)) = names
            .iter()
            .zip(params)
            .find(|(n, v)| !(v.is_finite() || (**n == "p_sat" && **v == f64::INFINITY)))
        {
            return Err(Error::InvalidParams(format!("parameter {name} is {v}")));
        }
        Ok(match self {
            ModelKind::Lorentzian => {
                let (x0, w, a, off) = (params[0], params[1], params[2], params[3]);
                let hw2 = (w / 2.0) * (w / 2.0);
                x.iter().map(|&xi| off + a * hw2 / ((xi - x0).powi(2) + hw2)).collect()
            }
            ModelKind::ExpDecay => {
                let (a, tau, off, t0, s) = (params[0], params[1], params[2], params[3], params[4]);
                if s < 0.0 {
                    return Err(Error::InvalidParams(format!("sigma_irf must be >= 0, got {s}")));
                }
                if s == 0.0 {
                    x.iter().map(|&xi| off + a * (-(xi - t0) / tau).exp()).collect()
                } else {
                    x.iter().map(|&xi| off + a * exp_gauss_conv(xi - t0, tau, s)).collect()
                }
            }
            ModelKind::Dit => {
                let p = SystemParams {
                    g: params[2],
                    kappa: params[3],
                    kappa_wg_fraction: params[7],
                    gamma_rad: params[4],
                    gamma_deph: 0.0,
                    delta_c: params[0],
                    delta_a: params[1],
                    omega_drive: 0.0,
                };
                let (a, off) = (params[5], params[6]);
                x.iter().map(|&nu| off + a * dit_amplitude(&p, nu).norm_sqr()).collect()
            }
            ModelKind::PowerBroadening => {
                let (w0, psat) = (params[0], params[1]);
                x.iter().map(|&p| w0 * (1.0 + p / psat).sqrt()).collect()
            }
        })
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            Error::Config(format!(
                "unknown model '{s}' (expected lorentzian, exp_decay, dit or power_broadening)"
            ))
        })
    }
}

/// `exp(a) erfc(b)` without overflow in either factor.
fn exp_erfc(a: f64, b: f64) -> f64 {
    if b < 10.0 {
        a.exp() * libm::erfc(b)
    } else {
        // erfc(b) = exp(-b²) erfcx(b), asymptotic series for erfcx
        let inv = 1.0 / (b * b);
        let series = 1.0 - 0.5 * inv + 0.75 * inv * inv - 1.875 * inv.powi(3) + 6.5625 * inv.powi(4);
        (a - b * b).exp() * series / (b * std::f64::consts::PI.sqrt())
    }
}

/// Step-started exponential `Θ(u) exp(-u/τ)` convolved with a unit-area
/// Gaussian of standard deviation `s`.
fn exp_gauss_conv(u: f64, tau: f64, s: f64) -> f64 {
    let a = s * s / (2.0 * tau * tau) - u / tau;
    let b = (s / tau - u / s) / std::f64::consts::SQRT_2;
    0.5 * exp_erfc(a, b)
}

/// How a free parameter is kept inside its domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    None,
    /// `p > 0`, fitted as `ln p`.
    Positive,
    /// `lo < p < hi`, fitted through a logistic map.
    Range(f64, f64),
}

impl Bound {
    pub(crate) fn to_internal(self, p: f64) -> f64 {
        match self {
            Bound::None => p,
            Bound::Positive => p.ln(),
            Bound::Range(lo, hi) => {
                let s = ((p - lo) / (hi - lo)).clamp(1e-12, 1.0 - 1e-12);
                (s / (1.0 - s)).ln()
            }
        }
    }

    pub(crate) fn to_external(self, u: f64) -> f64 {
        match self {
            Bound::None => u,
            Bound::Positive => u.exp(),
            Bound::Range(lo, hi) => lo + (hi - lo) / (1.0 + (-u).exp()),
        }
    }

    fn admits(&self, p: f64) -> bool {
        match *self {
            Bound::None => p.is_finite(),
            Bound::Positive => p > 0.0 && p.is_finite(),
            Bound::Range(lo, hi) => p > lo && p < hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    /// Initial guess when free, the held value when fixed.
    pub value: f64,
    pub free: bool,
    pub bound: Bound,
}

/// A model kind plus the split into fixed and free parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct FitModel {
    kind: ModelKind,
    params: Vec<ParamSpec>,
    pub x_unit: String,
    pub y_unit: String,
}

impl FitModel {
    /// Start from the kind's default split with the given values (full
    /// parameter vector, same order as [`ModelKind::param_names`]).
    ///
    /// Defaults: `t0` and `sigma_irf` fixed for `exp_decay`; `gamma` and
    /// `kappa_wg_fraction` fixed for `dit`; widths, lifetimes and rates are
    /// positive-bounded.
    pub fn new(kind: ModelKind, values: &[f64]) -> Result<Self> {
        let names = kind.param_names();
        if values.len() != names.len() {
            return Err(Error::InvalidParams(format!(
                "{} takes {} parameters, got {}",
                kind,
                names.len(),
                values.len()
            )));
        }
        let params = names
            .iter()
            .zip(values)
            .map(|(&name, &value)| {
                let (free, bound) = match (kind, name) {
                    (ModelKind::Lorentzian, "fwhm") => (true, Bound::Positive),
                    (ModelKind::ExpDecay, "tau") => (true, Bound::Positive),
                    (ModelKind::ExpDecay, "t0" | "sigma_irf") => (false, Bound::None),
                    (ModelKind::Dit, "g" | "kappa") => (true, Bound::Positive),
                    (ModelKind::Dit, "gamma") => (false, Bound::Positive),
                    (ModelKind::Dit, "kappa_wg_fraction") => (false, Bound::Range(0.0, 1.0)),
                    (ModelKind::PowerBroadening, _) => (true, Bound::Positive),
                    _ => (true, Bound::None),
                };
                ParamSpec { name, value, free, bound }
            })
            .collect();
        let model = Self { kind, params, x_unit: "x".into(), y_unit: "y".into() };
        model.validate()?;
        Ok(model)
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn params(&self) -> &[ParamSpec] {
        &self.params
    }

    pub fn with_units(mut self, x_unit: &str, y_unit: &str) -> Self {
        self.x_unit = x_unit.into();
        self.y_unit = y_unit.into();
        self
    }

    fn spec_mut(&mut self, name: &str) -> Result<&mut ParamSpec> {
        let kind = self.kind;
        self.params
            .iter_mut()
            .find(|p| p.name == name)
            .ok_or_else(|| Error::InvalidParams(format!("{kind} has no parameter '{name}'")))
    }

    pub fn fix(mut self, name: &str, value: f64) -> Result<Self> {
        let p = self.spec_mut(name)?;
        p.value = value;
        p.free = false;
        self.validate()?;
        Ok(self)
    }

    pub fn free(mut self, name: &str, initial: f64) -> Result<Self> {
        let p = self.spec_mut(name)?;
        p.value = initial;
        p.free = true;
        self.validate()?;
        Ok(self)
    }

    pub fn bound(mut self, name: &str, bound: Bound) -> Result<Self> {
        self.spec_mut(name)?.bound = bound;
        self.validate()?;
        Ok(self)
    }

    pub fn free_names(&self) -> Vec<&'static str> {
        self.params.iter().filter(|p| p.free).map(|p| p.name).collect()
    }

    pub fn n_free(&self) -> usize {
        self.params.iter().filter(|p| p.free).count()
    }

    pub fn values(&self) -> Vec<f64> {
        self.params.iter().map(|p| p.value).collect()
    }

    /// Full parameter vector with the free slots replaced by `free_values`.
    pub fn merge(&self, free_values: &[f64]) -> Vec<f64> {
        let mut it = free_values.iter();
        self.params.iter().map(|p| if p.free { *it.next().expect("free count") } else { p.value }).collect()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.kind.evaluate(&self.values(), x)
    }

    fn validate(&self) -> Result<()> {
        if self.n_free() == 0 {
            return Err(Error::InvalidParams(format!("{} has no free parameter", self.kind)));
        }
        for p in &self.params {
            if let Bound::Range(lo, hi) = p.bound {
                if !(lo < hi) {
                    return Err(Error::InvalidParams(format!(
                        "bounds for {} need lo < hi, got [{lo}, {hi}]",
                        p.name
                    )));
                }
            }
            if p.free && !p.bound.admits(p.value) {
                return Err(Error::InvalidParams(format!(
                    "initial value {} of {} violates its bound {:?}",
                    p.value, p.name, p.bound
                )));
            }
        }
        Ok(())
    }

    /// Unit label of a parameter, derived from the axis units.
    pub fn unit_of(&self, name: &str) -> String {
        let x = self.x_unit.clone();
        let y = self.y_unit.clone();
        match (self.kind, name) {
            (_, "amplitude" | "offset") => y,
            (ModelKind::Dit, "kappa_wg_fraction") => "1".into(),
            (ModelKind::PowerBroadening, "linewidth0") => y,
            _ => x,
        }
    }
}

/// `evaluate_model` entry point: full parameter vector, any kind.
pub fn evaluate_model(kind: ModelKind, params: &[f64], x: &[f64]) -> Result<Vec<f64>> {
    kind.evaluate(params, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lorentzian_peak() {
        let y = evaluate_model(ModelKind::Lorentzian, &[3.0, 2.0, 5.0, 0.5], &[3.0, 4.0]).unwrap();
        assert!((y[0] - 5.5).abs() < 1e-15);
        assert!((y[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn exp_decay_one_lifetime() {
        let y = evaluate_model(ModelKind::ExpDecay, &[10.0, 0.194, 1.0, 0.05, 0.0], &[0.244]).unwrap();
        assert!((y[0] - (1.0 + 10.0 / std::f64::consts::E)).abs() < 1e-12);
    }

    #[test]
    fn power_broadening_at_three_psat() {
        let y = evaluate_model(ModelKind::PowerBroadening, &[304.0, 1.5], &[4.5, 0.0]).unwrap();
        assert!((y[0] - 608.0).abs() < 1e-12);
        assert_eq!(y[1], 304.0);
    }

    #[test]
    fn irf_convolution_limits() {
        // narrow IRF approaches the bare exponential after t0
        let p_irf = [1.0, 0.2, 0.0, 0.0, 1e-4];
        let p_bare = [1.0, 0.2, 0.0, 0.0, 0.0];
        let xs = [0.05, 0.3, 1.0, 3.0];
        let a = evaluate_model(ModelKind::ExpDecay, &p_irf, &xs).unwrap();
        let b = evaluate_model(ModelKind::ExpDecay, &p_bare, &xs).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-3 * v);
        }
        // unit area: ∫ conv = τ
        let dx = 1e-3;
        let grid: Vec<f64> = (0..20_000).map(|k| -2.0 + k as f64 * dx).collect();
        let y = evaluate_model(ModelKind::ExpDecay, &[1.0, 0.2, 0.0, 0.0, 0.05], &grid).unwrap();
        let area: f64 = y.iter().sum::<f64>() * dx;
        assert!((area - 0.2).abs() < 1e-4, "area {area}");
        // far tail uses the asymptotic branch without overflow
        let tail = evaluate_model(ModelKind::ExpDecay, &[1.0, 0.2, 0.0, 0.0, 0.05], &[-5.0]).unwrap();
        assert!(tail[0].is_finite() && tail[0] >= 0.0 && tail[0] < 1e-100);
    }

    #[test]
    fn dit_model_matches_spectrum_module() {
        let y = evaluate_model(ModelKind::Dit, &[0.0, 0.0, 4.9, 49.7, 1.36, 1.0, 0.0, 1.0], &[0.0]).unwrap();
        let c = 4.0 * 4.9f64 * 4.9 / (49.7 * 1.36);
        assert!((y[0] - (c / (1.0 + c)).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn invalid_vectors() {
        assert!(evaluate_model(ModelKind::Lorentzian, &[1.0, 2.0], &[0.0]).is_err());
        assert!(evaluate_model(ModelKind::Lorentzian, &[1.0, f64::NAN, 1.0, 0.0], &[0.0]).is_err());
        assert!(evaluate_model(ModelKind::ExpDecay, &[1.0, 1.0, 0.0, 0.0, -1.0], &[0.0]).is_err());
    }

    #[test]
    fn model_spec_rules() {
        let m = FitModel::new(ModelKind::ExpDecay, &[1.0, 0.2, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.free_names(), vec!["amplitude", "tau", "offset"]);
        assert!(FitModel::new(ModelKind::ExpDecay, &[1.0, -0.2, 0.0, 0.0, 0.0]).is_err());
        let m = FitModel::new(ModelKind::PowerBroadening, &[300.0, 1.0]).unwrap();
        let m = m.fix("linewidth0", 300.0).unwrap();
        assert!(m.clone().fix("p_sat", 1.0).is_err()); // nothing left free
        assert!(m.clone().bound("p_sat", Bound::Range(2.0, 1.0)).is_err());
        assert!(m.fix("nope", 1.0).is_err());
        assert_eq!("dit".parse::<ModelKind>().unwrap(), ModelKind::Dit);
        assert!("gauss".parse::<ModelKind>().is_err());
    }

    #[test]
    fn bound_transforms_round_trip() {
        for b in [Bound::None, Bound::Positive, Bound::Range(-2.0, 5.0)] {
            for p in [0.1, 1.0, 3.7] {
                let back = b.to_external(b.to_internal(p));
                assert!((back - p).abs() < 1e-12, "{b:?} {p}");
            }
        }
    }
}
