use std::path::Path;

use cqed_core::dynamics::{DecayKind, DecayTrace};
use cqed_core::io::{
    decay_csv, parse_series, parse_streak, read_series_csv, read_streak, spectrum_csv, streak_text,
    write_decay_csv, write_spectrum_csv, write_streak, RunConfig, Series,
};
use cqed_core::spectra::{AxisKind, SpectrumSeries, ValueKind};
use cqed_core::{Error, StreakImage};
use proptest::prelude::*;

fn src() -> &'static Path {
    Path::new("data.csv")
}

proptest! {
    #[test]
    fn spectrum_round_trip(
        start in -1e3..1e3f64,
        steps in proptest::collection::vec(1e-6..10.0f64, 2..60),
        seed_vals in proptest::collection::vec(0.0..1e6f64, 60),
        wavelength in any::<bool>(),
    ) {
        let mut axis = vec![start];
        for s in &steps {
            let next = axis[axis.len() - 1] + s;
            axis.push(next);
        }
        let values = seed_vals[..axis.len()].to_vec();
        let (ak, vk) = if wavelength {
            (AxisKind::WavelengthNm, ValueKind::Counts)
        } else {
            (AxisKind::FrequencyGhz, ValueKind::Transmission)
        };
        let s = SpectrumSeries::new(ak, vk, axis, values).unwrap();
        let text = spectrum_csv(&s);
        match parse_series(&text, src()).unwrap() {
            Series::Spectrum(back) => {
                prop_assert_eq!(back.axis(), s.axis());
                prop_assert_eq!(back.values(), s.values());
                prop_assert_eq!(spectrum_csv(&back), text);
            }
            Series::Decay(_) => prop_assert!(false, "wrong kind"),
        }
    }

    #[test]
    fn decay_round_trip(
        t0 in -5.0..5.0f64,
        dt in 1e-4..1.0f64,
        values in proptest::collection::vec(0.0..1e5f64, 1..200),
    ) {
        let trace = DecayTrace::new(t0, dt, values, DecayKind::Population).unwrap();
        let text = decay_csv(&trace);
        match parse_series(&text, src()).unwrap() {
            Series::Decay(back) => {
                prop_assert_eq!(back.values(), trace.values());
                prop_assert_eq!(decay_csv(&back), text);
            }
            Series::Spectrum(_) => prop_assert!(false, "wrong kind"),
        }
    }

    #[test]
    fn streak_round_trip(
        rows in 1usize..12,
        cols in 1usize..12,
        dt in 1e-4..1.0f64,
        dl in prop_oneof![-1.0..-1e-3f64, 1e-3..1.0f64],
        cells in proptest::collection::vec(0.0..1e4f64, 144),
    ) {
        let img = StreakImage::new(rows, cols, 0.0, dt, 737.0, dl, cells[..rows * cols].to_vec()).unwrap();
        let text = streak_text(&img);
        let back = parse_streak(&text, src()).unwrap();
        prop_assert_eq!(&back, &img);
        prop_assert_eq!(streak_text(&back), text);
    }

    #[test]
    fn garbage_cells_are_located(row in 0usize..3, col in 0usize..3) {
        let mut grid = vec![vec!["1"; 3]; 3];
        grid[row][col] = "nan?";
        let body: Vec<String> = grid.iter().map(|r| r.join(" ")).collect();
        let text = format!("# rows=3 cols=3 t0_ns=0 dt_ns=1 lambda0_nm=700 dlambda_nm=1\n{}\n", body.join("\n"));
        let err = parse_streak(&text, Path::new("s.txt")).unwrap_err();
        match err {
            Error::Parse { line, column, .. } => {
                prop_assert_eq!(line, row + 2);
                prop_assert_eq!(column, col + 1);
            }
            other => prop_assert!(false, "unexpected {other}"),
        }
    }
}

#[test]
fn files_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let s = SpectrumSeries::new(
        AxisKind::FrequencyGhz,
        ValueKind::Transmission,
        vec![-1.0, 0.0, 1.0],
        vec![0.5, 0.1, 0.5],
    )
    .unwrap();
    let p = dir.path().join("s.csv");
    write_spectrum_csv(&p, &s).unwrap();
    assert!(matches!(read_series_csv(&p).unwrap(), Series::Spectrum(b) if b.values() == s.values()));

    let t = DecayTrace::new(0.0, 0.1, vec![3.0, 2.0, 1.0], DecayKind::Counts).unwrap();
    let p = dir.path().join("d.csv");
    write_decay_csv(&p, &t).unwrap();
    assert!(matches!(read_series_csv(&p).unwrap(), Series::Decay(b) if b.values() == t.values()));

    let img = StreakImage::new(2, 2, 0.0, 0.1, 700.0, 0.5, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let p = dir.path().join("i.txt");
    write_streak(&p, &img).unwrap();
    assert_eq!(read_streak(&p).unwrap(), img);
}

#[test]
fn parse_errors_name_the_file() {
    let e = parse_series("freq_ghz,transmission\n1,0.5\n2,abc\n", Path::new("spec.csv")).unwrap_err();
    assert!(e.to_string().starts_with("spec.csv:3:2"), "{e}");
    let e = parse_series("freq_ghz,transmission\n1,0.5\n2,-0.1\n", Path::new("spec.csv")).unwrap_err();
    assert!(e.to_string().starts_with("spec.csv:3:"), "{e}");
    let e = parse_series("time_ns,value\n0,NaN\n", Path::new("d.csv")).unwrap_err();
    assert!(e.to_string().starts_with("d.csv:2:2"), "{e}");
    let e = parse_series("freq_mhz,transmission\n1,1\n", Path::new("m.csv")).unwrap_err();
    assert!(e.to_string().starts_with("m.csv:1:1"), "{e}");
    let e = RunConfig::parse("g = 1\nfoo\n", Path::new("run.cfg")).unwrap_err();
    assert!(e.to_string().starts_with("run.cfg:2:"), "{e}");
}
