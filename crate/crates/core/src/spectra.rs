//! Frequency-domain models: drop-filter cavity transmission with and without
//! a coupled emitter (dipole-induced transparency), and cavity tuning maps.
//!
//! Convention: the bare cavity *suppresses* transmission on resonance. The
//! waveguide transmission amplitude is
//!
//! ```text
//!         i(ν_c - ν) + κ_loss/2 + g²/(i(ν_a - ν) + γ/2)
//! t(ν) = -----------------------------------------------
//!         i(ν_c - ν) + κ/2      + g²/(i(ν_a - ν) + γ/2)
//! ```
//!
//! with `κ_loss = (1 - kappa_wg_fraction) κ` and γ the total emitter FWHM.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::derive::{optical_frequency_ghz, purcell_lorentzian, SiVSpec};
use crate::qdyn::{build_system, expectation, steady_state, HilbertConfig, SystemParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    FrequencyGhz,
    WavelengthNm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValueKind {
    Transmission,
    Counts,
}

/// Sampled spectrum on a strictly monotone axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSeries {
    axis_kind: AxisKind,
    value_kind: ValueKind,
    axis: Vec<f64>,
    values: Vec<f64>,
    pub meta: BTreeMap<String, String>,
}

impl SpectrumSeries {
    pub fn new(axis_kind: AxisKind, value_kind: ValueKind, axis: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if axis.len() != values.len() {
            return Err(Error::InvalidParams(format!(
                "axis has {} points but values has {}",
                axis.len(),
                values.len()
            )));
        }
        if axis.is_empty() {
            return Err(Error::InvalidParams("empty spectrum".into()));
        }
        check_monotone(&axis)?;
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParams(format!(
                "spectrum value {v} at index {i} is negative or not finite"
            )));
        }
        Ok(Self { axis_kind, value_kind, axis, values, meta: BTreeMap::new() })
    }

    pub fn axis_kind(&self) -> AxisKind {
        self.axis_kind
    }

    pub fn value_kind(&self) -> ValueKind {
        self.value_kind
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.axis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axis.is_empty()
    }

    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.insert(key.to_string(), value.to_string());
        self
    }

    /// Axis position of the smallest value.
    pub fn argmin(&self) -> f64 {
        let (i, _) = self.values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
        self.axis[i]
    }
}

pub(crate) fn check_monotone(axis: &[f64]) -> Result<()> {
    if axis.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParams("axis contains non-finite values".into()));
    }
    let inc = axis.windows(2).all(|w| w[1] > w[0]);
    let dec = axis.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(Error::InvalidParams("axis is not strictly monotone".into()));
    }
    Ok(())
}

/// Complex waveguide transmission amplitude at probe frequency `nu` (GHz,
/// same frame as `delta_c`/`delta_a`).
pub fn dit_amplitude(params: &SystemParams, nu: f64) -> Complex64 {
    let gamma = params.gamma_total();
    let emitter = Complex64::new(gamma / 2.0, params.delta_a - nu);
    let dressing = if params.g == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(params.g * params.g, 0.0) / emitter
    };
    let cav = Complex64::new(0.0, params.delta_c - nu) + dressing;
    let num = cav + params.kappa_loss() / 2.0;
    let den = cav + params.kappa / 2.0;
    num / den
}

/// `T(ν) = |t(ν)|²` on the caller's probe grid (GHz).
pub fn dit_transmission(params: &SystemParams, probe_grid: &[f64]) -> Result<SpectrumSeries> {
    params.validate()?;
    if !(params.kappa > 0.0) {
        return Err(Error::InvalidParams("kappa must be > 0".into()));
    }
    check_monotone(probe_grid)?;
    let values: Vec<f64> = probe_grid.iter().map(|&nu| dit_amplitude(params, nu).norm_sqr()).collect();
    Ok(SpectrumSeries::new(AxisKind::FrequencyGhz, ValueKind::Transmission, probe_grid.to_vec(), values)?
        .with_meta("model", "dit"))
}

/// Bare-cavity Lorentzian dip: [`dit_transmission`] with `g = 0`.
pub fn bare_cavity_transmission(params: &SystemParams, probe_grid: &[f64]) -> Result<SpectrumSeries> {
    let bare = SystemParams { g: 0.0, ..*params };
    Ok(dit_transmission(&bare, probe_grid)?.with_meta("model", "bare_cavity"))
}

/// Weak-drive transmission from the master-equation steady state.
///
/// For each probe frequency the system is rebuilt in the probe's rotating
/// frame and driven through the cavity with amplitude `omega_drive`; the
/// output field is the input minus the waveguide leakage,
/// `t = 1 - i κ_wg <a> / Ω`. Grid points are solved in parallel and
/// returned in grid order.
pub fn master_equation_transmission(
    params: &SystemParams,
    probe_grid: &[f64],
    config: HilbertConfig,
    omega_drive: f64,
) -> Result<SpectrumSeries> {
    params.validate()?;
    check_monotone(probe_grid)?;
    if !(omega_drive > 0.0) {
        return Err(Error::InvalidParams("drive amplitude must be > 0".into()));
    }
    let a = config.annihilation();
    let kappa_wg = params.kappa * params.kappa_wg_fraction;
    let values = probe_grid
        .par_iter()
        .map(|&nu| {
            let p = SystemParams {
                delta_c: params.delta_c - nu,
                delta_a: params.delta_a - nu,
                omega_drive,
                ..*params
            };
            let rho = steady_state(&build_system(config, &p)?)?;
            let field = expectation(&a, &rho)?;
            let t = Complex64::new(1.0, 0.0) - Complex64::new(0.0, kappa_wg / omega_drive) * field;
            Ok(t.norm_sqr())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SpectrumSeries::new(AxisKind::FrequencyGhz, ValueKind::Transmission, probe_grid.to_vec(), values)?
        .with_meta("model", "master_equation"))
}

/// Cavity position axis for [`pl_tuning_map`].
#[derive(Debug, Clone, PartialEq)]
pub enum CavityGrid {
    /// Cavity frequency in the same (GHz) frame as the line frequencies.
    FrequencyGhz(Vec<f64>),
    /// Cavity wavelength; line frequencies are then absolute optical
    /// frequencies in GHz.
    WavelengthNm(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningMapRow {
    pub cavity_pos: f64,
    pub line: &'static str,
    pub intensity_rel: f64,
}

/// Relative line intensities as the cavity is scanned across the four
/// SiV lines: `1 + F_X/(1 + (2Δ_X/κ)²)`, baseline exactly 1 far detuned.
/// Rows are ordered by cavity position, then line A-D.
pub fn pl_tuning_map(
    siv: &SiVSpec,
    kappa: f64,
    f0_per_line: [f64; 4],
    grid: &CavityGrid,
) -> Result<Vec<TuningMapRow>> {
    if let Some(f) = f0_per_line.iter().find(|f| !(**f >= 0.0)) {
        return Err(Error::InvalidParams(format!("line enhancement must be >= 0, got {f}")));
    }
    let (positions, freq_of): (&[f64], fn(f64) -> f64) = match grid {
        CavityGrid::FrequencyGhz(v) => (v, |x| x),
        CavityGrid::WavelengthNm(v) => (v, optical_frequency_ghz),
    };
    check_monotone(positions)?;
    let mut rows = Vec::with_capacity(positions.len() * 4);
    for &pos in positions {
        let nu_cav = freq_of(pos);
        for (k, label) in SiVSpec::LABELS.iter().enumerate() {
            let delta = siv.transition_freqs[k] - nu_cav;
            rows.push(TuningMapRow {
                cavity_pos: pos,
                line: label,
                intensity_rel: 1.0 + purcell_lorentzian(f0_per_line[k], delta, kappa)?,
            });
        }
    }
    Ok(rows)
}

/// Line enhancement `f0` that produces a given on/off peak ratio.
pub fn f0_for_peak_ratio(ratio: f64) -> Result<f64> {
    if !(ratio >= 1.0) {
        return Err(Error::InvalidParams(format!("peak ratio must be >= 1, got {ratio}")));
    }
    Ok(ratio - 1.0)
}
