use cqed_core::derive::{
    beta_factor, cooperativity, min_purcell, q_kappa_convert, strong_coupling_threshold, Conversion,
    Measured, Unit,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

const DRAWS: usize = 100_000;

fn m(v: f64, s: f64) -> Measured {
    Measured::new(v, s, Unit::Dimensionless).unwrap()
}

fn sample_sigma<F: Fn(&[f64]) -> f64>(inputs: &[Measured], seed: u64, f: F) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<Normal<f64>> = inputs.iter().map(|x| Normal::new(x.value, x.sigma).unwrap()).collect();
    let mut draw = vec![0.0; inputs.len()];
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..DRAWS {
        for (d, slot) in dists.iter().zip(draw.iter_mut()) {
            *slot = d.sample(&mut rng);
        }
        let v = f(&draw);
        sum += v;
        sum2 += v * v;
    }
    let mean = sum / DRAWS as f64;
    (sum2 / DRAWS as f64 - mean * mean).sqrt()
}

fn close(propagated: f64, sampled: f64) -> bool {
    (propagated - sampled).abs() <= 0.05 * sampled
}

#[test]
fn propagated_sigma_matches_monte_carlo() {
    // inputs carry 2-5% relative errors
    let g = m(4.9, 0.15);
    let k = m(49.7, 2.0);
    let y = m(1.36, 0.04);
    let c = cooperativity(g, k, y).unwrap();
    let s = sample_sigma(&[g, k, y], 1, |v| 4.0 * v[0] * v[0] / (v[1] * v[2]));
    assert!(close(c.sigma, s), "C: {} vs {s}", c.sigma);

    let on = m(0.194, 0.008);
    let off = m(1.84, 0.04);
    let b = beta_factor(on, off).unwrap().beta;
    let s = sample_sigma(&[on, off], 2, |v| 1.0 - v[0] / v[1]);
    assert!(close(b.sigma, s), "β: {} vs {s}", b.sigma);

    let r = m(9.5, 0.6);
    let f = min_purcell(r, 0.325).unwrap();
    let s = sample_sigma(&[r], 3, |v| (v[0] - 1.0) / 0.325);
    assert!(close(f.sigma, s), "F_min: {} vs {s}", f.sigma);

    let kq = Measured::new(49.7, 2.0, Unit::Ghz).unwrap();
    let q = q_kappa_convert(kq, 737.0, Conversion::KappaToQ).unwrap();
    let s = sample_sigma(&[kq], 4, |v| 299_792_458.0 / 737.0 / v[0]);
    assert!(close(q.sigma, s), "Q: {} vs {s}", q.sigma);
}

#[test]
fn purcell_and_beta_are_consistent() {
    for i in 0..40 {
        let ratio = 1.0 + 0.5 * i as f64;
        for j in 1..=10 {
            let xi = j as f64 / 10.0;
            let f = min_purcell(m(ratio, 0.0), xi).unwrap().value;
            let beta = beta_factor(m(1.0, 0.0), m(ratio, 0.0)).unwrap().beta.value;
            let from_f = f * xi / (1.0 + f * xi);
            assert!((beta - from_f).abs() < 1e-12, "R = {ratio}, ξ = {xi}");
        }
    }
}

proptest! {
    #[test]
    fn sigmas_are_nonnegative(v in 0.1..100.0f64, s in 0.0..10.0f64, xi in 0.01..1.0f64) {
        prop_assert!(cooperativity(m(v, s), m(v + 1.0, s), m(v / 2.0, s)).unwrap().sigma >= 0.0);
        prop_assert!(min_purcell(m(1.0 + v, s), xi).unwrap().sigma >= 0.0);
        prop_assert!(beta_factor(m(v, s), m(2.0 * v, s)).unwrap().beta.sigma >= 0.0);
    }

    #[test]
    fn cooperativity_is_unit_free(g in 0.01..20.0f64, k in 0.1..200.0f64, y in 0.01..10.0f64) {
        let ghz = cooperativity(m(g, 0.1), m(k, 1.0), m(y, 0.05)).unwrap();
        let mhz = cooperativity(m(g * 1e3, 100.0), m(k * 1e3, 1e3), m(y * 1e3, 50.0)).unwrap();
        prop_assert!((ghz.value - mhz.value).abs() <= 1e-12 * ghz.value);
        prop_assert!((ghz.sigma - mhz.sigma).abs() <= 1e-9 * ghz.sigma.max(1e-300));
    }

    #[test]
    fn emitter_count_is_monotone(g in 0.1..10.0f64, dg in 0.0..5.0f64, k in 5.0..100.0f64, dk in 0.0..50.0f64) {
        let gamma = 1.0;
        let base = strong_coupling_threshold(g, k, gamma).unwrap().n_emitters_needed;
        let more_g = strong_coupling_threshold(g + dg, k, gamma).unwrap().n_emitters_needed;
        let more_k = strong_coupling_threshold(g, k + dk, gamma).unwrap().n_emitters_needed;
        prop_assert!(more_g <= base);
        prop_assert!(more_k >= base);
    }

    #[test]
    fn q_kappa_round_trip(k in 0.1..1000.0f64, lambda in 400.0..1600.0f64) {
        let q = q_kappa_convert(Measured::new(k, 0.0, Unit::Ghz).unwrap(), lambda, Conversion::KappaToQ).unwrap();
        let back = q_kappa_convert(q, lambda, Conversion::QToKappa).unwrap();
        prop_assert!((back.value - k).abs() <= 1e-12 * k);
    }
}
