//! One function per subcommand; each returns the text to emit.

use std::fmt::Write as _;
use std::path::Path;

use cqed_core::derive::{
    beta_factor, cooperativity, emission_rate_into_cavity, fourier_limited_linewidth, min_purcell,
    q_kappa_convert, strong_coupling_threshold, theoretical_purcell, Conversion,
};
use cqed_core::dynamics::{simulate_decay, to_counts};
use cqed_core::fit::{fit_linewidth_extrapolation, initial_guess, lm_fit_with, FitData, FitModel, LmOptions};
use cqed_core::io::{
    bin_streak_region, decay_csv, fmt_f64, g2_csv, read_series_csv, read_streak, spectrum_csv,
    tuning_map_csv, Series,
};
use cqed_core::qdyn::build_system;
use cqed_core::spectra::{
    bare_cavity_transmission, dit_transmission, master_equation_transmission, pl_tuning_map, CavityGrid,
};
use cqed_core::{
    CavityRecord, Error, FitResult, HilbertConfig, Measured, ModelKind, Result, RunConfig, SiVSpec,
    SystemParams, Unit,
};

use crate::Format;

const SYSTEM_KEYS: [&str; 10] = [
    "g",
    "kappa",
    "gamma",
    "gamma_deph",
    "kappa_wg_fraction",
    "delta_c",
    "delta_a",
    "omega",
    "n_max",
    "n_emitters",
];

fn allow(cfg: &RunConfig, own: &[&str], with_system: bool, prefixes: &[&str]) -> Result<()> {
    let mut keys: Vec<&str> = own.to_vec();
    if with_system {
        keys.extend(SYSTEM_KEYS);
    }
    cfg.validate_keys(&keys, prefixes)
}

/// Central value of a key written `x` or `x +- s`.
fn value(cfg: &RunConfig, key: &str) -> Result<Option<f64>> {
    Ok(cfg.measured(key)?.map(|(v, _)| v))
}

fn value_or(cfg: &RunConfig, key: &str, default: f64) -> Result<f64> {
    Ok(value(cfg, key)?.unwrap_or(default))
}

fn required(cfg: &RunConfig, key: &str) -> Result<f64> {
    value(cfg, key)?.ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
}

fn measured(cfg: &RunConfig, key: &str, unit: Unit) -> Result<Option<Measured>> {
    cfg.measured(key)?.map(|(v, s)| Measured::new(v, s, unit)).transpose()
}

fn system(cfg: &RunConfig) -> Result<SystemParams> {
    let p = SystemParams {
        g: required(cfg, "g")?,
        kappa: required(cfg, "kappa")?,
        gamma_rad: required(cfg, "gamma")?,
        gamma_deph: value_or(cfg, "gamma_deph", 0.0)?,
        kappa_wg_fraction: value_or(cfg, "kappa_wg_fraction", 1.0)?,
        delta_c: value_or(cfg, "delta_c", 0.0)?,
        delta_a: value_or(cfg, "delta_a", 0.0)?,
        omega_drive: value_or(cfg, "omega", 0.0)?,
    };
    p.validate()?;
    Ok(p)
}

fn hilbert(cfg: &RunConfig, n_max: usize) -> Result<HilbertConfig> {
    HilbertConfig::new(cfg.get_or("n_max", n_max)?, cfg.get_or("n_emitters", 1)?)
}

fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(hi > lo) {
        return Err(Error::Config(format!("need points >= 2 and max > min, got {n} points on [{lo}, {hi}]")));
    }
    Ok((0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect())
}

fn four(cfg: &RunConfig, key: &str) -> Result<Option<[f64; 4]>> {
    match cfg.f64_list(key)? {
        None => Ok(None),
        Some(v) => <[f64; 4]>::try_from(v.as_slice())
            .map(Some)
            .map_err(|_| Error::Config(format!("'{key}' needs 4 values (lines A-D), got {}", v.len()))),
    }
}

struct Table {
    rows: Vec<(String, f64, f64, String)>,
}

impl Table {
    fn push(&mut self, name: &str, value: f64, sigma: f64, unit: &str) {
        self.rows.push((name.into(), value, sigma, unit.into()));
    }

    fn render(&self, format: Format) -> String {
        let mut s = String::new();
        match format {
            Format::Csv => {
                s.push_str("quantity,value,sigma,unit\n");
                for (n, v, e, u) in &self.rows {
                    let _ = writeln!(s, "{n},{},{},{u}", fmt_f64(*v), fmt_f64(*e));
                }
            }
            Format::Table => {
                let _ = writeln!(s, "{:<26} {:>14} {:>12}  unit", "quantity", "value", "sigma");
                for (n, v, e, u) in &self.rows {
                    let _ = writeln!(s, "{n:<26} {v:>14.4} {e:>12.4}  {u}");
                }
            }
        }
        s
    }
}

pub fn derive(cfg: &RunConfig, format: Format) -> Result<String> {
    allow(
        cfg,
        &[
            "tau_on",
            "tau_off",
            "lifetime_ratio",
            "xi_max",
            "g",
            "kappa",
            "gamma",
            "q_factor",
            "mode_volume",
            "refractive_index",
            "lambda_nm",
            "linewidth_mhz",
            "tau_ns",
            "q_gain",
            "v_shrink",
        ],
        false,
        &[],
    )?;
    let mut t = Table { rows: Vec::new() };

    let tau_on = measured(cfg, "tau_on", Unit::Ns)?;
    let tau_off = measured(cfg, "tau_off", Unit::Ns)?;
    let mut beta = None;
    if let (Some(on), Some(off)) = (tau_on, tau_off) {
        let b = beta_factor(on, off)?;
        t.push("beta", b.beta.value, b.beta.sigma, "1");
        let r = off.value / on.value;
        let rs = r * on.relative().hypot(off.relative());
        t.push("lifetime_ratio", r, rs, "1");
        beta = Some((b.beta.value, on.value));
    }

    let ratio = match measured(cfg, "lifetime_ratio", Unit::Dimensionless)? {
        Some(m) => Some(m),
        None => match (tau_on, tau_off) {
            (Some(on), Some(off)) => {
                let r = off.value / on.value;
                Some(Measured::new(r, r * on.relative().hypot(off.relative()), Unit::Dimensionless)?)
            }
            _ => None,
        },
    };
    if let (Some(r), Some(xi)) = (ratio, value(cfg, "xi_max")?) {
        let f = min_purcell(r, xi)?;
        t.push("f_min", f.value, f.sigma, "1");
    }

    let g = measured(cfg, "g", Unit::Ghz)?;
    let kappa = measured(cfg, "kappa", Unit::Ghz)?;
    let gamma = measured(cfg, "gamma", Unit::Ghz)?;
    let lambda = value(cfg, "lambda_nm")?;
    if let (Some(g), Some(k), Some(y)) = (g, kappa, gamma) {
        let c = cooperativity(g, k, y)?;
        t.push("cooperativity", c.value, c.sigma, "1");
        let s = strong_coupling_threshold(g.value, k.value, y.value)?;
        t.push("strong_threshold", s.threshold, 0.0, "GHz");
        t.push("strongly_coupled", f64::from(u8::from(s.is_strong)), 0.0, "bool");
        t.push("n_strong", s.n_emitters_needed as f64, 0.0, "emitters");
        let q_gain = value_or(cfg, "q_gain", 2.0)?;
        let v_shrink = value_or(cfg, "v_shrink", 1.5)?;
        if !(q_gain > 0.0 && v_shrink > 0.0) {
            return Err(Error::Config("q_gain and v_shrink must be > 0".into()));
        }
        let (g2, k2) = (g.value * v_shrink.sqrt(), k.value / q_gain);
        if k2 > y.value {
            let s2 = strong_coupling_threshold(g2, k2, y.value)?;
            t.push("improved_g", g2, 0.0, "GHz");
            t.push("improved_kappa", k2, 0.0, "GHz");
            t.push("improved_strongly_coupled", f64::from(u8::from(s2.is_strong)), 0.0, "bool");
            t.push("improved_n_strong", s2.n_emitters_needed as f64, 0.0, "emitters");
        }
    }
    if let (Some(k), Some(l)) = (kappa, lambda) {
        let q = q_kappa_convert(k, l, Conversion::KappaToQ)?;
        t.push("q_from_kappa", q.value, q.sigma, "1");
    }

    if let (Some(q), Some(v), Some(n), Some(l)) =
        (value(cfg, "q_factor")?, value(cfg, "mode_volume")?, value(cfg, "refractive_index")?, lambda)
    {
        let cav = CavityRecord::new(l, q, v, n)?;
        t.push("f_theory", theoretical_purcell(&cav), 0.0, "1");
        t.push("mode_volume_um3", cav.mode_volume_um3(), 0.0, "um^3");
        let k = q_kappa_convert(Measured::exact(q, Unit::Dimensionless), l, Conversion::QToKappa)?;
        t.push("kappa_from_q", k.value, 0.0, "GHz");
    }

    let tau_ref = match value(cfg, "tau_ns")? {
        Some(v) => Some(v),
        None => tau_off.map(|m| m.value),
    };
    if let Some(tau) = tau_ref {
        let fl = fourier_limited_linewidth(tau)?;
        t.push("fourier_linewidth", fl, 0.0, "MHz");
        if let Some((lw, lws)) = cfg.measured("linewidth_mhz")? {
            t.push("linewidth_ratio", lw / fl, lws / fl, "1");
        }
    }
    if let Some((b, on)) = beta {
        t.push("emission_rate_into_cavity", emission_rate_into_cavity(b, on)?, 0.0, "GHz");
    }

    if t.rows.is_empty() {
        return Err(Error::Config(
            "no derivable quantity: supply e.g. tau_on/tau_off or g/kappa/gamma".into(),
        ));
    }
    Ok(t.render(format))
}

pub fn spectrum(cfg: &RunConfig) -> Result<String> {
    allow(cfg, &["model", "freq_min", "freq_max", "points"], true, &[])?;
    let p = system(cfg)?;
    let span = 2.0 * p.kappa.max(p.g);
    let axis = grid(
        value_or(cfg, "freq_min", -span)?,
        value_or(cfg, "freq_max", span)?,
        cfg.get_or("points", 401)?,
    )?;
    let model: String = cfg.get_or("model", "dit".to_string())?;
    let s = match model.as_str() {
        "dit" => dit_transmission(&p, &axis)?,
        "bare" => bare_cavity_transmission(&p, &axis)?,
        "master" => {
            let drive = if p.omega_drive > 0.0 { p.omega_drive } else { 0.05 };
            let p = SystemParams { omega_drive: 0.0, ..p };
            master_equation_transmission(&p, &axis, hilbert(cfg, 2)?, drive)?
        }
        other => return Err(Error::Config(format!("unknown spectrum model '{other}' (dit, bare, master)"))),
    };
    Ok(spectrum_csv(&s))
}

pub fn decay(cfg: &RunConfig, seed: u64) -> Result<String> {
    allow(cfg, &["t_final", "dt", "peak_counts", "background"], true, &[])?;
    let p = system(cfg)?;
    let t_final = value_or(cfg, "t_final", 5.0)?;
    let dt = value_or(cfg, "dt", t_final / 500.0)?;
    let trace = simulate_decay(hilbert(cfg, 1)?, &p, t_final, dt)?;
    let trace = match value(cfg, "peak_counts")? {
        Some(peak) => to_counts(&trace, peak, value_or(cfg, "background", 0.0)?, seed)?,
        None => trace,
    };
    Ok(decay_csv(&trace))
}

pub fn tuning_map(cfg: &RunConfig) -> Result<String> {
    allow(
        cfg,
        &[
            "lines",
            "linewidths",
            "ground_splitting",
            "xi_max",
            "kappa",
            "f0",
            "peak_ratios",
            "cavity_min",
            "cavity_max",
            "points",
            "axis",
        ],
        false,
        &[],
    )?;
    let lines = four(cfg, "lines")?.ok_or_else(|| Error::Config("missing required key 'lines'".into()))?;
    let siv = SiVSpec::new(
        lines,
        four(cfg, "linewidths")?.unwrap_or([0.0; 4]),
        value_or(cfg, "ground_splitting", 0.0)?,
        value_or(cfg, "xi_max", 1.0)?,
    )?;
    let f0 = match (four(cfg, "f0")?, four(cfg, "peak_ratios")?) {
        (Some(f), None) => f,
        (None, Some(r)) => {
            let mut f = [0.0; 4];
            for (dst, ratio) in f.iter_mut().zip(r) {
                *dst = cqed_core::spectra::f0_for_peak_ratio(ratio)?;
            }
            f
        }
        (Some(_), Some(_)) => {
            return Err(Error::Config("give either 'f0' or 'peak_ratios', not both".into()))
        }
        (None, None) => return Err(Error::Config("missing 'f0' or 'peak_ratios'".into())),
    };
    let positions =
        grid(required(cfg, "cavity_min")?, required(cfg, "cavity_max")?, cfg.get_or("points", 201)?)?;
    let axis: String = cfg.get_or("axis", "frequency".to_string())?;
    let grid = match axis.as_str() {
        "frequency" => CavityGrid::FrequencyGhz(positions),
        "wavelength" => CavityGrid::WavelengthNm(positions),
        other => return Err(Error::Config(format!("unknown axis '{other}' (frequency, wavelength)"))),
    };
    let rows = pl_tuning_map(&siv, required(cfg, "kappa")?, f0, &grid)?;
    Ok(tuning_map_csv(&rows))
}

pub fn g2(cfg: &RunConfig) -> Result<String> {
    allow(cfg, &["tau_max", "tau_points"], true, &[])?;
    let p = system(cfg)?;
    if !(p.omega_drive > 0.0) {
        return Err(Error::Config("g2 needs a drive: set 'omega' > 0".into()));
    }
    let tau = grid(0.0, value_or(cfg, "tau_max", 5.0)?, cfg.get_or("tau_points", 101)?)?;
    let sys = build_system(hilbert(cfg, 3)?, &p)?;
    Ok(g2_csv(&cqed_core::qdyn::g2_correlation(&sys, &tau)?))
}

pub fn streak_bin(cfg: &RunConfig, data: &Path) -> Result<String> {
    allow(cfg, &["lambda_min", "lambda_max"], false, &[])?;
    let img = read_streak(data)?;
    let trace = bin_streak_region(&img, required(cfg, "lambda_min")?, required(cfg, "lambda_max")?)?;
    Ok(decay_csv(&trace))
}

pub fn fit(cfg: &RunConfig, model: &str, data: Option<&Path>) -> Result<FitResult> {
    let kind: ModelKind = model.parse()?;
    allow(
        cfg,
        &["gamma", "skip_ns", "powers", "linewidths", "weights", "max_iter"],
        false,
        &["init.", "fix.", "free."],
    )?;
    for key in cfg.keys() {
        if let Some((_, name)) = key.split_once('.') {
            if !kind.param_names().contains(&name) {
                return Err(Error::Config(format!(
                    "'{key}': model {kind} has no parameter '{name}' ({})",
                    kind.param_names().join(", ")
                )));
            }
        }
    }

    let (x, y) = match data {
        Some(path) => match read_series_csv(path)? {
            Series::Spectrum(s) => (s.axis().to_vec(), s.values().to_vec()),
            Series::Decay(d) => (d.times(), d.values().to_vec()),
        },
        None => match (cfg.f64_list("powers")?, cfg.f64_list("linewidths")?) {
            (Some(p), Some(w)) if kind == ModelKind::PowerBroadening => {
                if p.len() != w.len() {
                    return Err(Error::Config(format!(
                        "'powers' has {} values, 'linewidths' {}",
                        p.len(),
                        w.len()
                    )));
                }
                (p, w)
            }
            _ => return Err(Error::Config(format!("model {kind} needs --data"))),
        },
    };
    let (x, y) = match value(cfg, "skip_ns")? {
        Some(skip) => {
            let t0 = x.first().copied().unwrap_or(0.0);
            x.into_iter().zip(y).filter(|(t, _)| *t >= t0 + skip - 1e-12).unzip()
        }
        None => (x, y),
    };

    let has_overrides = cfg.keys().any(|k| k.contains('.'));
    let opts = LmOptions {
        max_iterations: cfg.get_or("max_iter", LmOptions::default().max_iterations)?,
        ..LmOptions::default()
    };
    let weights: String = cfg.get_or("weights", "none".to_string())?;
    let sigma: Option<Vec<f64>> = match weights.as_str() {
        "none" => None,
        "poisson" => Some(y.iter().map(|v| v.max(1.0).sqrt()).collect()),
        other => return Err(Error::Config(format!("unknown weights '{other}' (none, poisson)"))),
    };
    if kind == ModelKind::PowerBroadening
        && !has_overrides
        && sigma.is_none()
        && cfg.raw("max_iter").is_none()
    {
        let pts: Vec<(f64, f64)> = x.into_iter().zip(y).collect();
        return fit_linewidth_extrapolation(&pts);
    }

    let mut guess = initial_guess(kind, &x, &y, value_or(cfg, "gamma", 1.0)?)?;
    for (i, name) in kind.param_names().iter().enumerate() {
        if let Some(v) = value(cfg, &format!("init.{name}"))? {
            guess[i] = v;
        }
    }
    let mut fm = FitModel::new(kind, &guess)?;
    for (i, name) in kind.param_names().iter().enumerate() {
        if let Some(v) = value(cfg, &format!("fix.{name}"))? {
            fm = fm.fix(name, v)?;
        }
        if cfg.get_or(&format!("free.{name}"), false)? {
            fm = fm.free(name, guess[i])?;
        }
    }
    let data = match &sigma {
        Some(s) => FitData::weighted(&x, &y, s),
        None => FitData::new(&x, &y),
    };
    lm_fit_with(&fm, data, &opts)
}
