//! Two-column CSV series.
//!
//! ```text
//! file   := header NL row (NL row)* NL?
//! header := "freq_ghz,transmission" | "wavelength_nm,counts" | "time_ns,value"
//! row    := number "," number
//! ```
//!
//! Numbers are written with 17 significant digits so that reading back
//! reproduces every value bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dynamics::{DecayKind, DecayTrace};
use crate::spectra::{check_monotone, AxisKind, SpectrumSeries, TuningMapRow, ValueKind};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// `freq_ghz,transmission`
    Transmission,
    /// `wavelength_nm,counts`
    WavelengthCounts,
    /// `time_ns,value`
    Decay,
}

impl SeriesKind {
    pub const ALL: [SeriesKind; 3] =
        [SeriesKind::Transmission, SeriesKind::WavelengthCounts, SeriesKind::Decay];

    pub fn header(&self) -> &'static str {
        match self {
            SeriesKind::Transmission => "freq_ghz,transmission",
            SeriesKind::WavelengthCounts => "wavelength_nm,counts",
            SeriesKind::Decay => "time_ns,value",
        }
    }

    fn from_header(h: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.header() == h)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Series {
    Spectrum(SpectrumSeries),
    Decay(DecayTrace),
}

/// Format a float with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_num(cell: &str, source: &Path, line: usize, column: usize) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| Error::parse(source, line, column, format!("'{cell}' is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(source, line, column, format!("'{cell}' is not finite")));
    }
    Ok(v)
}

type Rows = Vec<(usize, f64, f64)>;

/// Header kind and numeric rows of a two-column CSV, with 1-based line
/// numbers.
fn parse_columns(text: &str, source: &Path) -> Result<(SeriesKind, Rows)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (_, header) = lines.next().ok_or_else(|| Error::parse(source, 1, 1, "empty file"))?;
    let kind = SeriesKind::from_header(header.trim()).ok_or_else(|| {
        Error::parse(
            source,
            1,
            1,
            format!(
                "unknown header '{header}' (expected one of: {})",
                SeriesKind::ALL.map(|k| k.header()).join(" | ")
            ),
        )
    })?;
    let mut rows = Vec::new();
    for (ln, line) in lines {
        if line.trim().is_empty() {
            return Err(Error::parse(source, ln, 1, "blank line in data section"));
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 2 {
            return Err(Error::parse(
                source,
                ln,
                cells.len().min(3),
                format!("expected 2 columns, found {}", cells.len()),
            ));
        }
        let a = parse_num(cells[0], source, ln, 1)?;
        let b = parse_num(cells[1], source, ln, 2)?;
        rows.push((ln, a, b));
    }
    if rows.is_empty() {
        return Err(Error::parse(source, 2, 1, "no data rows"));
    }
    Ok((kind, rows))
}

/// Parse CSV text; `source` names the input in error messages.
pub fn parse_series(text: &str, source: &Path) -> Result<Series> {
    let (kind, rows) = parse_columns(text, source)?;
    for &(ln, _, v) in &rows {
        if v < 0.0 && kind != SeriesKind::Decay {
            return Err(Error::parse(source, ln, 2, format!("negative value {v}")));
        }
        if v < 0.0 {
            return Err(Error::parse(source, ln, 2, format!("negative decay value {v}")));
        }
    }
    match kind {
        SeriesKind::Transmission | SeriesKind::WavelengthCounts => {
            let axis: Vec<f64> = rows.iter().map(|r| r.1).collect();
            if check_monotone(&axis).is_err() {
                let bad = axis
                    .windows(3)
                    .position(|w| (w[1] - w[0]) * (w[2] - w[1]) <= 0.0)
                    .map(|i| i + 2)
                    .unwrap_or(if axis.len() > 1 { 1 } else { 0 });
                let ln = rows[bad.min(rows.len() - 1)].0;
                return Err(Error::parse(source, ln, 1, "axis is not strictly monotone"));
            }
            let (axis_kind, value_kind) = if kind == SeriesKind::Transmission {
                (AxisKind::FrequencyGhz, ValueKind::Transmission)
            } else {
                (AxisKind::WavelengthNm, ValueKind::Counts)
            };
            let values = rows.iter().map(|r| r.2).collect();
            Ok(Series::Spectrum(SpectrumSeries::new(axis_kind, value_kind, axis, values)?))
        }
        SeriesKind::Decay => {
            let times: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let dt = uniform_step(&times)
                .map_err(|i| Error::parse(source, rows[i].0, 1, "time axis is not uniformly spaced"))?;
            let values = rows.iter().map(|r| r.2).collect();
            Ok(Series::Decay(DecayTrace::new(times[0], dt, values, DecayKind::Population)?))
        }
    }
}

/// Step `dt` such that `t0 + i dt` reproduces every time, exactly when the
/// file came from [`write_decay_csv`], otherwise within 1e-9 relative.
/// On failure returns the index of the first offending time.
fn uniform_step(times: &[f64]) -> std::result::Result<f64, usize> {
    if times.len() == 1 {
        return Ok(1.0);
    }
    let n = times.len();
    let t0 = times[0];
    let est = (times[n - 1] - t0) / (n - 1) as f64;
    if !(est > 0.0) {
        return Err(1);
    }
    let reproduces = |dt: f64| times.iter().enumerate().all(|(i, &t)| t0 + i as f64 * dt == t);
    // every time pins dt to within half an ulp of itself; scan outward from
    // the middle of the intersected window
    let half_ulp = |t: f64| (f64::from_bits(t.abs().to_bits() + 1) - t.abs()) / 2.0;
    let (mut lo, mut hi) = (0.0f64, f64::INFINITY);
    for (i, &t) in times.iter().enumerate().skip(1) {
        let w = half_ulp(t) + half_ulp(t0);
        lo = lo.max((t - t0 - w) / i as f64);
        hi = hi.min((t - t0 + w) / i as f64);
    }
    let mid = if lo <= hi { 0.5 * (lo + hi) } else { est };
    let mut candidates = vec![est, times[1] - t0, mid];
    for k in 1..=4096u64 {
        candidates.push(f64::from_bits(mid.to_bits() + k));
        candidates.push(f64::from_bits(mid.to_bits().saturating_sub(k)));
    }
    if let Some(&dt) = candidates.iter().find(|&&dt| dt > 0.0 && reproduces(dt)) {
        return Ok(dt);
    }
    let tol = 1e-9 * est.max(times[n - 1].abs());
    match times.iter().enumerate().position(|(i, &t)| (t - (t0 + i as f64 * est)).abs() > tol) {
        Some(i) => Err(i),
        None => Ok(est),
    }
}

pub fn read_series_csv(path: &Path) -> Result<Series> {
    let text = fs::read_to_string(path)?;
    parse_series(&text, path)
}

pub fn spectrum_csv(series: &SpectrumSeries) -> String {
    let kind = match series.axis_kind() {
        AxisKind::FrequencyGhz => SeriesKind::Transmission,
        AxisKind::WavelengthNm => SeriesKind::WavelengthCounts,
    };
    let mut s = String::with_capacity(48 * (series.len() + 1));
    s.push_str(kind.header());
    s.push('\n');
    for (x, y) in series.axis().iter().zip(series.values()) {
        let _ = writeln!(s, "{},{}", fmt_f64(*x), fmt_f64(*y));
    }
    s
}

pub fn decay_csv(trace: &DecayTrace) -> String {
    let mut s = String::with_capacity(48 * (trace.len() + 1));
    s.push_str(SeriesKind::Decay.header());
    s.push('\n');
    for (i, v) in trace.values().iter().enumerate() {
        let _ = writeln!(s, "{},{}", fmt_f64(trace.time(i)), fmt_f64(*v));
    }
    s
}

pub fn write_spectrum_csv(path: &Path, series: &SpectrumSeries) -> Result<()> {
    fs::write(path, spectrum_csv(series))?;
    Ok(())
}

pub fn write_decay_csv(path: &Path, trace: &DecayTrace) -> Result<()> {
    fs::write(path, decay_csv(trace))?;
    Ok(())
}

pub const TUNING_MAP_HEADER: &str = "cavity_pos,line,intensity_rel";

/// Long-form tuning map: `cavity_pos,line,intensity_rel`.
pub fn tuning_map_csv(rows: &[TuningMapRow]) -> String {
    let mut s = String::from(TUNING_MAP_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{}", fmt_f64(r.cavity_pos), r.line, fmt_f64(r.intensity_rel));
    }
    s
}

/// `(cavity_pos, line, intensity_rel)` triples from a tuning-map CSV.
pub fn parse_tuning_map(text: &str, source: &Path) -> Result<Vec<(f64, String, f64)>> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    match lines.next() {
        Some((_, h)) if h.trim() == TUNING_MAP_HEADER => {}
        Some((_, h)) => {
            return Err(Error::parse(
                source,
                1,
                1,
                format!("expected header '{TUNING_MAP_HEADER}', got '{h}'"),
            ))
        }
        None => return Err(Error::parse(source, 1, 1, "empty file")),
    }
    let mut out = Vec::new();
    for (ln, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 3 {
            return Err(Error::parse(
                source,
                ln,
                cells.len().min(4),
                format!("expected 3 columns, found {}", cells.len()),
            ));
        }
        let pos = parse_num(cells[0], source, ln, 1)?;
        let label = cells[1].trim();
        if !["A", "B", "C", "D"].contains(&label) {
            return Err(Error::parse(source, ln, 2, format!("unknown line label '{label}'")));
        }
        let v = parse_num(cells[2], source, ln, 3)?;
        if v < 0.0 {
            return Err(Error::parse(source, ln, 3, format!("negative intensity {v}")));
        }
        out.push((pos, label.to_string(), v));
    }
    if out.is_empty() {
        return Err(Error::parse(source, 2, 1, "no data rows"));
    }
    Ok(out)
}

/// `tau_ns,g2` CSV.
pub fn g2_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("tau_ns,g2\n");
    for (t, g) in points {
        let _ = writeln!(s, "{},{}", fmt_f64(*t), fmt_f64(*g));
    }
    s
}
