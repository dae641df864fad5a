//! Headered streak-camera grid.
//!
//! ```text
//! file   := header NL row{rows} NL?
//! header := "#" ("rows=" int) ("cols=" int) ("t0_ns=" num) ("dt_ns=" num)
//!               ("lambda0_nm=" num) ("dlambda_nm=" num)      ; whitespace separated
//! row    := num (WS num){cols-1}                            ; one time bin
//! ```
//!
//! Row `i` is the time bin starting at `t0 + i dt`, column `j` sits at
//! wavelength `lambda0 + j dlambda`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::series::fmt_f64;
use crate::dynamics::{DecayKind, DecayTrace};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StreakImage {
    rows: usize,
    cols: usize,
    pub t0: f64,
    pub dt: f64,
    pub lambda0: f64,
    pub dlambda: f64,
    counts: Vec<f64>,
}

impl StreakImage {
    /// `counts` is row-major, `rows x cols`.
    pub fn new(
        rows: usize,
        cols: usize,
        t0: f64,
        dt: f64,
        lambda0: f64,
        dlambda: f64,
        counts: Vec<f64>,
    ) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParams("streak image needs rows, cols >= 1".into()));
        }
        if counts.len() != rows * cols {
            return Err(Error::InvalidParams(format!("{} counts for a {rows}x{cols} image", counts.len())));
        }
        if !(dt > 0.0 && dt.is_finite()) || !(dlambda != 0.0 && dlambda.is_finite()) {
            return Err(Error::InvalidParams(format!("need dt > 0 and dlambda != 0, got {dt}, {dlambda}")));
        }
        if !t0.is_finite() || !lambda0.is_finite() {
            return Err(Error::InvalidParams("t0 and lambda0 must be finite".into()));
        }
        if let Some((i, c)) = counts.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c >= 0.0)) {
            return Err(Error::InvalidParams(format!(
                "count {c} at row {}, column {} is negative or not finite",
                i / cols + 1,
                i % cols + 1
            )));
        }
        Ok(Self { rows, cols, t0, dt, lambda0, dlambda, counts })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.counts[row * self.cols + col]
    }

    pub fn wavelength(&self, col: usize) -> f64 {
        self.lambda0 + col as f64 * self.dlambda
    }

    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }
}

const KEYS: [&str; 6] = ["rows", "cols", "t0_ns", "dt_ns", "lambda0_nm", "dlambda_nm"];

pub fn parse_streak(text: &str, source: &Path) -> Result<StreakImage> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (_, header) = lines.next().ok_or_else(|| Error::parse(source, 1, 1, "empty file"))?;
    let body = header
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::parse(source, 1, 1, "header must start with '#'"))?;

    let mut vals: [Option<f64>; 6] = [None; 6];
    for (col, tok) in body.split_whitespace().enumerate() {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| Error::parse(source, 1, col + 1, format!("expected key=value, got '{tok}'")))?;
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| Error::parse(source, 1, col + 1, format!("unknown header key '{key}'")))?;
        if vals[slot].is_some() {
            return Err(Error::parse(source, 1, col + 1, format!("duplicate header key '{key}'")));
        }
        let v: f64 = value
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::parse(source, 1, col + 1, format!("bad value '{value}' for {key}")))?;
        vals[slot] = Some(v);
    }
    if let Some(missing) = KEYS.iter().zip(&vals).find(|(_, v)| v.is_none()) {
        return Err(Error::parse(source, 1, 1, format!("header is missing '{}'", missing.0)));
    }
    let v: Vec<f64> = vals.iter().map(|v| v.unwrap()).collect();
    let as_count = |x: f64, name: &str| -> Result<usize> {
        if x >= 1.0 && x.fract() == 0.0 {
            Ok(x as usize)
        } else {
            Err(Error::parse(source, 1, 1, format!("{name} must be a positive integer, got {x}")))
        }
    };
    let rows = as_count(v[0], "rows")?;
    let cols = as_count(v[1], "cols")?;
    let (t0, dt, lambda0, dlambda) = (v[2], v[3], v[4], v[5]);
    if !(dt > 0.0) {
        return Err(Error::parse(source, 1, 1, format!("dt_ns must be > 0, got {dt}")));
    }
    if dlambda == 0.0 {
        return Err(Error::parse(source, 1, 1, "dlambda_nm must be nonzero"));
    }

    let mut counts = Vec::with_capacity(rows * cols);
    let mut seen = 0;
    for (ln, line) in lines {
        if seen == rows {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::parse(
                source,
                ln,
                1,
                format!("header declares rows={rows} but more rows follow"),
            ));
        }
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != cols {
            return Err(Error::parse(
                source,
                ln,
                cells.len().min(cols) + 1,
                format!("expected {cols} values, found {}", cells.len()),
            ));
        }
        for (c, cell) in cells.iter().enumerate() {
            let x: f64 = cell
                .parse()
                .map_err(|_| Error::parse(source, ln, c + 1, format!("'{cell}' is not a number")))?;
            if !x.is_finite() {
                return Err(Error::parse(source, ln, c + 1, format!("'{cell}' is not finite")));
            }
            if x < 0.0 {
                return Err(Error::parse(source, ln, c + 1, format!("negative count {x}")));
            }
            counts.push(x);
        }
        seen += 1;
    }
    if seen < rows {
        return Err(Error::parse(
            source,
            seen + 2,
            1,
            format!("header declares rows={rows} but only {seen} rows present"),
        ));
    }
    StreakImage::new(rows, cols, t0, dt, lambda0, dlambda, counts)
}

pub fn read_streak(path: &Path) -> Result<StreakImage> {
    let text = fs::read_to_string(path)?;
    parse_streak(&text, path)
}

pub fn streak_text(img: &StreakImage) -> String {
    let mut s = format!(
        "# rows={} cols={} t0_ns={} dt_ns={} lambda0_nm={} dlambda_nm={}\n",
        img.rows,
        img.cols,
        fmt_f64(img.t0),
        fmt_f64(img.dt),
        fmt_f64(img.lambda0),
        fmt_f64(img.dlambda)
    );
    for r in 0..img.rows {
        let row: Vec<String> = (0..img.cols).map(|c| fmt_f64(img.at(r, c))).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}

pub fn write_streak(path: &Path, img: &StreakImage) -> Result<()> {
    fs::write(path, streak_text(img))?;
    Ok(())
}

/// Sum counts over the columns whose wavelength lies in
/// `[lambda_min, lambda_max]`, one value per time bin.
pub fn bin_streak_region(img: &StreakImage, lambda_min: f64, lambda_max: f64) -> Result<DecayTrace> {
    let (lo, hi) = if lambda_min <= lambda_max { (lambda_min, lambda_max) } else { (lambda_max, lambda_min) };
    let selected: Vec<usize> = (0..img.cols)
        .filter(|&c| {
            let l = img.wavelength(c);
            l >= lo && l <= hi
        })
        .collect();
    if selected.is_empty() {
        return Err(Error::InvalidParams(format!(
            "window [{lo}, {hi}] nm selects no columns of the image ({} .. {} nm)",
            img.wavelength(0),
            img.wavelength(img.cols - 1)
        )));
    }
    let values = (0..img.rows).map(|r| selected.iter().map(|&c| img.at(r, c)).sum()).collect();
    DecayTrace::new(img.t0, img.dt, values, DecayKind::Counts)
}
