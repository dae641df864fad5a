use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::model::ModelKind;
use crate::derive::{Measured, Unit};

#[derive(Debug, Clone, PartialEq)]
pub struct FittedParam {
    pub name: String,
    pub value: f64,
    /// 1σ from the covariance scaled by χ²_red; 0 for fixed parameters.
    pub sigma: f64,
    pub fixed: bool,
    pub unit: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub model: ModelKind,
    /// Every model parameter, fixed ones included, in model order.
    pub params: Vec<FittedParam>,
    pub chi2_reduced: f64,
    /// Covariance of the free parameters (order of `free_names`), already
    /// scaled by χ²_red.
    pub covariance: DMatrix<f64>,
    pub free_names: Vec<String>,
    pub converged: bool,
    pub n_iterations: usize,
    /// `y - f(x)`, unweighted.
    pub residuals: Vec<f64>,
    /// Parameters the data cannot constrain (reported, held at their
    /// limiting value).
    pub unidentifiable: Vec<String>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<&FittedParam> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn get(&self, name: &str) -> Option<Measured> {
        self.param(name).map(|p| Measured { value: p.value, sigma: p.sigma, unit: Unit::Dimensionless })
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.param(name).map(|p| p.value)
    }

    /// Human-readable report, one `label value sigma unit` line per
    /// parameter after a short header.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# model {}", self.model);
        let _ = writeln!(s, "# converged {}", self.converged);
        let _ = writeln!(s, "# iterations {}", self.n_iterations);
        let _ = writeln!(s, "# chi2_reduced {:.6e}", self.chi2_reduced);
        let _ = writeln!(s, "# points {}", self.residuals.len());
        if !self.unidentifiable.is_empty() {
            let _ = writeln!(s, "# unidentifiable {}", self.unidentifiable.join(","));
        }
        for p in &self.params {
            let tag = if p.fixed { " (fixed)" } else { "" };
            let _ = writeln!(s, "{} {:.10e} {:.3e} {}{}", p.name, p.value, p.sigma, p.unit, tag);
        }
        s
    }

    /// Machine-readable CSV: `label,value,sigma,unit,fixed`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,value,sigma,unit,fixed\n");
        for p in &self.params {
            let _ = writeln!(s, "{},{:.16e},{:.16e},{},{}", p.name, p.value, p.sigma, p.unit, p.fixed);
        }
        let _ = writeln!(s, "chi2_reduced,{:.16e},0,1,true", self.chi2_reduced);
        s
    }
}
