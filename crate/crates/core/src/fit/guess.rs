//! Data-driven starting points for the model zoo.

use super::model::ModelKind;
use crate::{Error, Result};

fn extremes(y: &[f64]) -> (usize, usize) {
    let lo = (0..y.len()).min_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap_or(0);
    let hi = (0..y.len()).max_by(|&a, &b| y[a].total_cmp(&y[b])).unwrap_or(0);
    (lo, hi)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s[s.len() / 2]
}

/// Full width of the region around `center` where `y` stays beyond `level`
/// (above when `above`, else below).
fn width_at(x: &[f64], y: &[f64], center: usize, level: f64, above: bool) -> f64 {
    let inside = |v: f64| if above { v >= level } else { v <= level };
    let mut l = center;
    while l > 0 && inside(y[l - 1]) {
        l -= 1;
    }
    let mut r = center;
    while r + 1 < y.len() && inside(y[r + 1]) {
        r += 1;
    }
    let step = if x.len() > 1 { (x[x.len() - 1] - x[0]).abs() / (x.len() - 1) as f64 } else { 1.0 };
    ((x[r] - x[l]).abs()).max(step)
}

/// Initial parameter vector for `kind` from sampled data.
///
/// `gamma_hint` seeds the emitter linewidth of the `dit` model, which is
/// held fixed by default.
pub fn initial_guess(kind: ModelKind, x: &[f64], y: &[f64], gamma_hint: f64) -> Result<Vec<f64>> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::InvalidParams(
            "need at least 3 matching (x, y) points for an initial guess".into(),
        ));
    }
    let (i_lo, i_hi) = extremes(y);
    let base = median(y);
    Ok(match kind {
        ModelKind::Lorentzian => {
            let dip = (base - y[i_lo]) > (y[i_hi] - base);
            let (c, amp) = if dip { (i_lo, y[i_lo] - base) } else { (i_hi, y[i_hi] - base) };
            let w = width_at(x, y, c, base + amp / 2.0, !dip);
            vec![x[c], w, amp, base]
        }
        ModelKind::ExpDecay => {
            let tail = &y[y.len() - (y.len() / 10).max(1)..];
            let off = tail.iter().sum::<f64>() / tail.len() as f64;
            let amp = (y[i_hi] - off).max(f64::MIN_POSITIVE);
            let target = off + amp / std::f64::consts::E;
            let t0 = x[i_hi];
            let tau = (i_hi..y.len())
                .find(|&i| y[i] <= target)
                .map(|i| x[i] - t0)
                .filter(|t| *t > 0.0)
                .unwrap_or((x[x.len() - 1] - t0).abs().max(f64::EPSILON));
            vec![amp, tau, off, t0, 0.0]
        }
        ModelKind::Dit => {
            // cavity dip on a baseline, transparency peak inside it
            let edge = ((y.len() / 20).max(1)).min(y.len() / 2);
            let baseline = (y[..edge].iter().chain(&y[y.len() - edge..]).sum::<f64>()) / (2 * edge) as f64;
            let smooth: Vec<f64> = (0..y.len())
                .map(|i| {
                    let a = i.saturating_sub(edge);
                    let b = (i + edge + 1).min(y.len());
                    y[a..b].iter().sum::<f64>() / (b - a) as f64
                })
                .collect();
            let (c, _) = extremes(&smooth);
            let kappa = width_at(x, &smooth, c, (baseline + smooth[c]) / 2.0, false);
            let window: Vec<usize> = (0..y.len()).filter(|&i| (x[i] - x[c]).abs() <= kappa / 2.0).collect();
            let a_idx = window
                .iter()
                .copied()
                .max_by(|&p, &q| (y[p] - smooth[p]).total_cmp(&(y[q] - smooth[q])))
                .unwrap_or(c);
            let t_peak = (y[a_idx] / baseline.max(f64::MIN_POSITIVE)).clamp(1e-4, 0.99);
            let r = t_peak.sqrt();
            let coop = r / (1.0 - r);
            let g = (coop * kappa * gamma_hint / 4.0).sqrt().max(1e-3);
            vec![x[c], x[a_idx], g, kappa, gamma_hint, baseline, 0.0, 1.0]
        }
        ModelKind::PowerBroadening => {
            let (p_lo, p_hi) = extremes(x);
            let w_lo = y[p_lo];
            let slope = (y[p_hi].powi(2) - w_lo.powi(2)) / (x[p_hi] - x[p_lo]).max(1e-300);
            let psat = if slope > 0.0 { (w_lo * w_lo / slope).max(1e-12) } else { x[p_hi].max(1.0) };
            vec![w_lo, psat]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{lm_fit, FitData, FitModel};

    fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    }

    fn fits_from_guess(kind: ModelKind, truth: &[f64], x: &[f64], gamma: f64) {
        let y = kind.evaluate(truth, x).unwrap();
        let g = initial_guess(kind, x, &y, gamma).unwrap();
        let fit = lm_fit(&FitModel::new(kind, &g).unwrap(), FitData::new(x, &y)).unwrap();
        for (n, t) in kind.param_names().iter().zip(truth) {
            let v = fit.value(n).unwrap();
            assert!((v - t).abs() <= 1e-6 * t.abs().max(1.0), "{kind} {n}: {v} vs {t}");
        }
    }

    #[test]
    fn lorentzian_peak_and_dip() {
        let x = grid(-100.0, 100.0, 201);
        fits_from_guess(ModelKind::Lorentzian, &[5.0, 30.0, 2.0, 0.5], &x, 1.0);
        fits_from_guess(ModelKind::Lorentzian, &[-5.0, 49.7, -0.9, 1.0], &x, 1.0);
    }

    #[test]
    fn exp_decay_from_counts() {
        let x = grid(0.0, 1.5, 300);
        fits_from_guess(ModelKind::ExpDecay, &[1e4, 0.194, 3.0, 0.0, 0.0], &x, 1.0);
    }

    #[test]
    fn dit_spectrum() {
        let x = grid(-100.0, 100.0, 401);
        fits_from_guess(ModelKind::Dit, &[2.0, 1.0, 4.9, 49.7, 1.36, 1.0, 0.0, 1.0], &x, 1.36);
    }

    #[test]
    fn power_broadening() {
        let x = [0.1, 0.3, 1.0, 3.0, 10.0];
        fits_from_guess(ModelKind::PowerBroadening, &[304.0, 1.2], &x, 1.0);
    }
}
