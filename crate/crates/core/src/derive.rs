//! Closed-form cavity-QED figures of merit with first-order (linearised)
//! uncertainty propagation. Inputs are treated as uncorrelated.
//!
//! Rates are ordinary frequencies in GHz, times in ns.

use std::fmt;

use crate::{Error, Result, SPEED_OF_LIGHT, TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    Dimensionless,
    Ghz,
    Mhz,
    Ns,
    Nm,
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Dimensionless => "1",
            Unit::Ghz => "GHz",
            Unit::Mhz => "MHz",
            Unit::Ns => "ns",
            Unit::Nm => "nm",
        })
    }
}

/// A value with its 1σ uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
    pub unit: Unit,
}

impl Measured {
    pub fn new(value: f64, sigma: f64, unit: Unit) -> Result<Self> {
        if !value.is_finite() || !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "measured value needs finite value and sigma >= 0, got {value} ± {sigma}"
            )));
        }
        Ok(Self { value, sigma, unit })
    }

    /// An exact (σ = 0) value.
    pub fn exact(value: f64, unit: Unit) -> Self {
        Self { value, sigma: 0.0, unit }
    }

    pub fn relative(&self) -> f64 {
        if self.value == 0.0 {
            0.0
        } else {
            self.sigma / self.value.abs()
        }
    }
}

impl fmt::Display for Measured {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prec = f.precision().unwrap_or(4);
        write!(f, "{:.*} ± {:.*}", prec, self.value, prec, self.sigma)?;
        if self.unit != Unit::Dimensionless {
            write!(f, " {}", self.unit)?;
        }
        Ok(())
    }
}

/// One row of a lifetime table: on/off-resonance lifetimes and the measured
/// intensity ratio (stored, not modelled).
#[derive(Debug, Clone, PartialEq)]
pub struct EmitterRecord {
    pub id: String,
    pub tau_on: Measured,
    pub tau_off: Measured,
    pub intensity_ratio: f64,
}

impl EmitterRecord {
    pub fn new(
        id: impl Into<String>,
        tau_on: Measured,
        tau_off: Measured,
        intensity_ratio: f64,
    ) -> Result<Self> {
        if !(tau_on.value > 0.0) || !(tau_off.value > 0.0) {
            return Err(Error::InvalidParams("lifetimes must be > 0".into()));
        }
        Ok(Self { id: id.into(), tau_on, tau_off, intensity_ratio })
    }

    /// `τ_off / τ_on` with propagated σ.
    pub fn lifetime_ratio(&self) -> Measured {
        let r = self.tau_off.value / self.tau_on.value;
        let rel = self.tau_on.relative().hypot(self.tau_off.relative());
        Measured::exact(r, Unit::Dimensionless).with_sigma(r * rel)
    }

    pub fn beta(&self) -> BetaEstimate {
        beta_factor(self.tau_on, self.tau_off).expect("validated on construction")
    }
}

impl Measured {
    fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma.abs();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityRecord {
    pub lambda_nm: f64,
    pub q_factor: f64,
    /// Mode volume in units of (λ/n)³.
    pub mode_volume: f64,
    pub refractive_index: f64,
}

impl CavityRecord {
    pub fn new(lambda_nm: f64, q_factor: f64, mode_volume: f64, refractive_index: f64) -> Result<Self> {
        for (name, v) in [
            ("lambda_nm", lambda_nm),
            ("q_factor", q_factor),
            ("mode_volume", mode_volume),
            ("refractive_index", refractive_index),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(Self { lambda_nm, q_factor, mode_volume, refractive_index })
    }

    /// Mode volume in μm³.
    pub fn mode_volume_um3(&self) -> f64 {
        let l = self.lambda_nm * 1e-3 / self.refractive_index;
        self.mode_volume * l * l * l
    }
}

/// SiV⁻ zero-phonon structure: four line frequencies (A-D), their FWHM
/// linewidths, the ground-state splitting and the branching-ratio bound.
#[derive(Debug, Clone, PartialEq)]
pub struct SiVSpec {
    pub transition_freqs: [f64; 4],
    pub linewidths: [f64; 4],
    pub ground_splitting: f64,
    pub branching_xi_max: f64,
}

impl SiVSpec {
    pub const LABELS: [&'static str; 4] = ["A", "B", "C", "D"];

    pub fn new(
        transition_freqs: [f64; 4],
        linewidths: [f64; 4],
        ground_splitting: f64,
        branching_xi_max: f64,
    ) -> Result<Self> {
        if !(branching_xi_max > 0.0 && branching_xi_max <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "branching ratio must lie in (0, 1], got {branching_xi_max}"
            )));
        }
        if !(ground_splitting >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "ground splitting must be >= 0, got {ground_splitting}"
            )));
        }
        if transition_freqs.iter().chain(&linewidths).any(|v| !v.is_finite())
            || linewidths.iter().any(|&w| w < 0.0)
        {
            return Err(Error::InvalidParams(
                "line frequencies/linewidths must be finite, widths >= 0".into(),
            ));
        }
        Ok(Self { transition_freqs, linewidths, ground_splitting, branching_xi_max })
    }
}

/// β with a flag raised when `τ_on > τ_off` (β < 0, no enhancement).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaEstimate {
    pub beta: Measured,
    pub no_enhancement: bool,
}

/// `β = 1 - τ_on/τ_off`.
pub fn beta_factor(tau_on: Measured, tau_off: Measured) -> Result<BetaEstimate> {
    if !(tau_on.value > 0.0 && tau_off.value > 0.0) {
        return Err(Error::InvalidParams(format!(
            "lifetimes must be > 0, got τ_on = {}, τ_off = {}",
            tau_on.value, tau_off.value
        )));
    }
    let ratio = tau_on.value / tau_off.value;
    let sigma = ratio * tau_on.relative().hypot(tau_off.relative());
    Ok(BetaEstimate {
        beta: Measured::exact(1.0 - ratio, Unit::Dimensionless).with_sigma(sigma),
        no_enhancement: tau_on.value > tau_off.value,
    })
}

/// `C = 4g²/(κγ)`.
pub fn cooperativity(g: Measured, kappa: Measured, gamma: Measured) -> Result<Measured> {
    if !(g.value >= 0.0 && kappa.value > 0.0 && gamma.value > 0.0) {
        return Err(Error::InvalidParams(format!(
            "cooperativity needs g >= 0 and κ, γ > 0 (got {}, {}, {})",
            g.value, kappa.value, gamma.value
        )));
    }
    let c = 4.0 * g.value * g.value / (kappa.value * gamma.value);
    // ∂lnC: 2 δg/g, -δκ/κ, -δγ/γ; written without dividing by g so g = 0 works
    let dg = 8.0 * g.value / (kappa.value * gamma.value) * g.sigma;
    let rel_kg = kappa.relative().hypot(gamma.relative());
    let sigma = dg.hypot(c * rel_kg);
    Ok(Measured::exact(c, Unit::Dimensionless).with_sigma(sigma))
}

/// Minimum Purcell factor from the lifetime reduction `R = τ_off/τ_on` and
/// the branching-ratio upper bound `ξ_max`: `F_min = (R - 1)/ξ_max`.
///
/// The enhanced rate into the line is `Γ_on - Γ_off = (R - 1) Γ_off`, and
/// the free-space rate into the same line is at most `ξ_max Γ_off`.
pub fn min_purcell(lifetime_ratio: Measured, xi_max: f64) -> Result<Measured> {
    if !(xi_max > 0.0 && xi_max <= 1.0) {
        return Err(Error::InvalidParams(format!("branching ratio must lie in (0, 1], got {xi_max}")));
    }
    if lifetime_ratio.value < 1.0 {
        return Err(Error::NoEnhancement { ratio: lifetime_ratio.value });
    }
    Ok(Measured::exact((lifetime_ratio.value - 1.0) / xi_max, Unit::Dimensionless)
        .with_sigma(lifetime_ratio.sigma / xi_max))
}

/// Ideal Purcell factor `(3/4π²) Q / V` with `V` in `(λ/n)³`.
pub fn theoretical_purcell(cav: &CavityRecord) -> f64 {
    3.0 / (4.0 * std::f64::consts::PI.powi(2)) * cav.q_factor / cav.mode_volume
}

/// Lorentzian detuning dependence `f0 / (1 + (2Δ/κ)²)`.
pub fn purcell_lorentzian(f0: f64, detuning: f64, kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParams(format!("kappa must be > 0, got {kappa}")));
    }
    let x = 2.0 * detuning / kappa;
    Ok(f0 / (1.0 + x * x))
}

/// Fourier-limited FWHM linewidth `1/(2πτ)` in MHz for a lifetime in ns.
pub fn fourier_limited_linewidth(tau_ns: f64) -> Result<f64> {
    if !(tau_ns > 0.0) {
        return Err(Error::InvalidParams(format!("lifetime must be > 0, got {tau_ns}")));
    }
    Ok(1e3 / (TWO_PI * tau_ns))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    /// κ (GHz) to Q.
    KappaToQ,
    /// Q to κ (GHz).
    QToKappa,
}

/// Optical frequency `c/λ` in GHz.
pub fn optical_frequency_ghz(lambda_nm: f64) -> f64 {
    SPEED_OF_LIGHT / lambda_nm
}

/// `Q = (c/λ)/κ` or `κ = (c/λ)/Q` at the caller's resonance wavelength.
pub fn q_kappa_convert(value: Measured, lambda_nm: f64, direction: Conversion) -> Result<Measured> {
    if !(value.value > 0.0) || !(lambda_nm > 0.0) {
        return Err(Error::InvalidParams(format!(
            "Q/κ conversion needs positive inputs, got {} at {lambda_nm} nm",
            value.value
        )));
    }
    let f = optical_frequency_ghz(lambda_nm);
    let out = f / value.value;
    let unit = match direction {
        Conversion::KappaToQ => Unit::Dimensionless,
        Conversion::QToKappa => Unit::Ghz,
    };
    Ok(Measured::exact(out, unit).with_sigma(out * value.relative()))
}

/// Photon emission rate into the cavity `(β/τ_on)/2π`, in GHz.
pub fn emission_rate_into_cavity(beta: f64, tau_on_ns: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) || !(tau_on_ns > 0.0) {
        return Err(Error::InvalidParams(format!(
            "need β in [0, 1] and τ_on > 0, got β = {beta}, τ_on = {tau_on_ns}"
        )));
    }
    Ok(beta / tau_on_ns / TWO_PI)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrongCoupling {
    /// Whether a single emitter already satisfies the criterion.
    pub is_strong: bool,
    /// Smallest emitter count `N` with `g√N > (κ - γ)/4`.
    pub n_emitters_needed: u64,
    /// `(κ - γ)/4`, GHz.
    pub threshold: f64,
}

/// Collective strong-coupling onset. With `N` identical emitters the
/// coupling becomes `g√N`; the two normal-mode frequencies
/// `±√(g_eff² - ((κ - γ)/4)²)` split once `g_eff > (κ - γ)/4`.
pub fn strong_coupling_threshold(g: f64, kappa: f64, gamma: f64) -> Result<StrongCoupling> {
    if !(g > 0.0 && kappa > 0.0 && gamma > 0.0) {
        return Err(Error::InvalidParams(format!(
            "strong-coupling check needs g, κ, γ > 0 (got {g}, {kappa}, {gamma})"
        )));
    }
    if kappa <= gamma {
        return Err(Error::UnsupportedRegime(format!(
            "criterion assumes κ > γ, got κ = {kappa}, γ = {gamma}"
        )));
    }
    let threshold = (kappa - gamma) / 4.0;
    let ratio = threshold / g;
    // smallest N with √N > ratio, i.e. N > ratio²
    let mut n = (ratio * ratio).floor().max(0.0) as u64 + 1;
    while n > 1 && g * ((n - 1) as f64).sqrt() > threshold {
        n -= 1;
    }
    while g * (n as f64).sqrt() <= threshold {
        n += 1;
    }
    Ok(StrongCoupling { is_strong: g > threshold, n_emitters_needed: n, threshold })
}
