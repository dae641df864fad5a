//! Emitter decay on and off cavity resonance: master-equation traces,
//! bad-cavity rates, synthetic photon counts and single-exponential lifetime
//! extraction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::fit::{lm_fit, FitData, FitModel, FitResult, ModelKind};
use crate::qdyn::{build_system, evolve, expectation, DensityMatrix, HilbertConfig, Sampler, SystemParams};
use crate::{Error, Result, TWO_PI};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayKind {
    Population,
    Counts,
}

/// Uniformly time-binned decay data.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayTrace {
    pub t0: f64,
    pub dt: f64,
    values: Vec<f64>,
    pub kind: DecayKind,
}

impl DecayTrace {
    pub fn new(t0: f64, dt: f64, values: Vec<f64>, kind: DecayKind) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) || !t0.is_finite() {
            return Err(Error::InvalidParams(format!(
                "decay trace needs finite t0 and dt > 0, got dt = {dt}"
            )));
        }
        if values.is_empty() {
            return Err(Error::InvalidParams("decay trace is empty".into()));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidParams(format!(
                "decay value {v} at bin {i} is negative or not finite"
            )));
        }
        Ok(Self { t0, dt, values, kind })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }
}

/// Excited-state population of emitter 0 after starting from `|0; e g ..>`
/// with no drive.
pub fn simulate_decay(
    config: HilbertConfig,
    params: &SystemParams,
    t_final: f64,
    dt: f64,
) -> Result<DecayTrace> {
    if params.omega_drive != 0.0 {
        return Err(Error::InvalidParams("decay simulation runs without drive (omega_drive = 0)".into()));
    }
    if !(dt > 0.0) || !(t_final > 0.0) {
        return Err(Error::InvalidParams(format!("need t_final > 0 and dt > 0, got {t_final}, {dt}")));
    }
    let sys = build_system(config, params)?;
    let rho0 = DensityMatrix::basis(config.dim(), config.index(0, 1))?;
    let pop = config.excited_population(0);
    let n = (t_final / dt + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let t_end = times[n];
    let states =
        if t_end > 0.0 { evolve(&sys, &rho0, t_end, &Sampler::Times(times))? } else { vec![(0.0, rho0)] };
    let values = states
        .iter()
        .map(|(_, rho)| expectation(&pop, rho).map(|c| c.re.max(0.0)))
        .collect::<Result<Vec<f64>>>()?;
    DecayTrace::new(0.0, dt, values, DecayKind::Population)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BadCavityRate {
    /// Γ/2π in GHz.
    pub rate: f64,
    /// False when κ < 10 g, where adiabatic elimination is unreliable.
    pub regime_ok: bool,
}

impl BadCavityRate {
    /// Energy decay time `1/Γ` in ns.
    pub fn lifetime_ns(&self) -> f64 {
        1.0 / (TWO_PI * self.rate)
    }
}

/// Adiabatically eliminated decay rate
/// `Γ/2π = γ_rad + (4g²/κ) / (1 + (2Δ/κ)²)` with `Δ = ν_a - ν_c`.
pub fn effective_rate_bad_cavity(params: &SystemParams) -> Result<BadCavityRate> {
    params.validate()?;
    if !(params.kappa > 0.0) {
        return Err(Error::InvalidParams("kappa must be > 0".into()));
    }
    let delta = params.delta_a - params.delta_c;
    let x = 2.0 * delta / params.kappa;
    let purcell = 4.0 * params.g * params.g / params.kappa / (1.0 + x * x);
    Ok(BadCavityRate { rate: params.gamma_rad + purcell, regime_ok: params.kappa >= 10.0 * params.g })
}

/// Length of the cavity-loading transient skipped before lifetime fits,
/// `2/(2πκ)` ns.
pub fn loading_transient(kappa: f64) -> f64 {
    if kappa > 0.0 {
        2.0 / (TWO_PI * kappa)
    } else {
        0.0
    }
}

/// Scale a population trace to `peak_counts` at its maximum, add a flat
/// `background`, and draw Poisson counts with a seeded generator.
pub fn to_counts(trace: &DecayTrace, peak_counts: f64, background: f64, seed: u64) -> Result<DecayTrace> {
    if !(peak_counts > 0.0) || !(background >= 0.0) {
        return Err(Error::InvalidParams("need peak_counts > 0 and background >= 0".into()));
    }
    let max = trace.values().iter().copied().fold(0.0, f64::max);
    if !(max > 0.0) {
        return Err(Error::InvalidParams("trace has no signal to scale".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = trace
        .values()
        .iter()
        .map(|&v| {
            let mean = v / max * peak_counts + background;
            if mean > 0.0 {
                Poisson::new(mean)
                    .map(|d| d.sample(&mut rng))
                    .map_err(|e| Error::InvalidParams(format!("Poisson mean {mean}: {e}")))
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    DecayTrace::new(trace.t0, trace.dt, counts, DecayKind::Counts)
}

/// Single-exponential fit of a trace from `skip` ns onwards.
///
/// Population traces are fitted with zero offset and unit weights; count
/// traces with a free offset and Poisson weights `√max(n, 1)`. The decay
/// origin `t0` is held at the first retained bin.
pub fn fit_decay(trace: &DecayTrace, skip: f64) -> Result<FitResult> {
    let start = (skip.max(0.0) / trace.dt - 1e-9).ceil() as usize;
    if start >= trace.len() {
        return Err(Error::InvalidParams(format!("skip {skip} ns removes the whole trace")));
    }
    let x: Vec<f64> = (start..trace.len()).map(|i| trace.time(i)).collect();
    let y: Vec<f64> = trace.values()[start..].to_vec();
    let t0 = x[0];
    let a0 = y[0].max(f64::MIN_POSITIVE);
    let floor = match trace.kind {
        DecayKind::Population => 0.0,
        DecayKind::Counts => {
            let tail = &y[y.len() - (y.len() / 10).max(1)..];
            tail.iter().sum::<f64>() / tail.len() as f64
        }
    };
    let target = floor + (a0 - floor) / std::f64::consts::E;
    let tau0 = x
        .iter()
        .zip(&y)
        .find(|(_, v)| **v <= target)
        .map(|(t, _)| (t - t0).max(trace.dt))
        .unwrap_or((x[x.len() - 1] - t0).max(trace.dt));

    let base = FitModel::new(ModelKind::ExpDecay, &[a0 - floor, tau0, floor, t0, 0.0])?.with_units(
        "ns",
        match trace.kind {
            DecayKind::Population => "1",
            DecayKind::Counts => "counts",
        },
    );
    match trace.kind {
        DecayKind::Population => {
            let model = base.fix("offset", 0.0)?;
            lm_fit(&model, FitData::new(&x, &y))
        }
        DecayKind::Counts => {
            let sigma: Vec<f64> = y.iter().map(|v| v.max(1.0).sqrt()).collect();
            lm_fit(&base, FitData::weighted(&x, &y, &sigma))
        }
    }
}

/// Decay rate Γ/2π (GHz) fitted from a simulated trace, skipping the
/// cavity-loading transient.
pub fn fitted_decay_rate(trace: &DecayTrace, kappa: f64) -> Result<f64> {
    let fit = fit_decay(trace, loading_transient(kappa))?;
    let tau = fit.value("tau").expect("exp_decay has tau");
    Ok(1.0 / (TWO_PI * tau))
}
