use std::f64::consts::PI;

use super::*;
use crate::model::TwoLevelParams;
use crate::propagation::{build_monodromy_at, evolve_stroboscopic, steady_observables, SamplePhase};
use crate::quantum::DensityMatrix;
use crate::scans::{linspace_step, local_maxima, local_minima};
use proptest::prelude::*;

// (1/π)∫₀^π cos(kθ − x sin θ) dθ by the trapezoid rule; the integrand is
// periodic and smooth so this converges geometrically
fn bessel_quad(k: i32, x: f64) -> f64 {
    let n = 4000 + 2 * x.abs() as usize;
    let h = PI / n as f64;
    let f = |th: f64| (k as f64 * th - x * th.sin()).cos();
    let mut s = 0.5 * (f(0.0) + f(PI));
    for i in 1..n {
        s += f(i as f64 * h);
    }
    s * h / PI
}

// coefficient of e^{inθ} in e^{iφ(θ)}
fn fourier_coeff(n: i64, phase: impl Fn(f64) -> f64) -> f64 {
    let m = 8192;
    let h = 2.0 * PI / m as f64;
    (0..m).map(|i| (phase(i as f64 * h) - n as f64 * i as f64 * h).cos()).sum::<f64>() / m as f64
}

#[test]
fn bessel_special_values() {
    assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
    assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
    assert!(bessel_j(0, 2.404826).unwrap().abs() < 1e-6);
    for x in [0.3, 2.0, 17.0] {
        assert_eq!(bessel_j(-1, x).unwrap(), -bessel_j(1, x).unwrap());
        assert_eq!(bessel_j(-4, x).unwrap(), bessel_j(4, x).unwrap());
    }
    assert!(matches!(bessel_j(0, 2e4), Err(crate::Error::Range(_))));
    assert!(bessel_j(0, f64::NAN).is_err());
}

#[test]
fn bessel_against_quadrature() {
    for x in [1e-3, 0.5, 0.999, 1.001, 3.7, -6.2, 25.0, 140.0, -900.0] {
        let v = bessel_j_orders(40, x).unwrap();
        for (k, &j) in v.iter().enumerate() {
            let q = bessel_quad(k as i32, x);
            assert!((j - q).abs() < 1e-13, "J_{k}({x}) = {j} vs {q}");
        }
    }
}

#[test]
fn bessel_sum_rule() {
    for x in [0.2, 4.0, 60.0] {
        let v = bessel_j_orders(x as usize + 40, x).unwrap();
        let s = v[0] * v[0] + 2.0 * v[1..].iter().map(|j| j * j).sum::<f64>();
        assert!((s - 1.0).abs() < 1e-13);
    }
}

#[test]
fn fourier_components_shape() {
    let f = fourier_components(1.0, 20.0, 6);
    assert_eq!(f.dc, 0.5);
    assert!((f.harmonics[0].amplitude - std::f64::consts::FRAC_1_PI).abs() < 1e-16);
    assert_eq!(f.harmonics[0].frequency, 20.0);
    for w in f.harmonics.windows(2) {
        assert!(w[1].amplitude < w[0].amplitude);
        assert_eq!(w[1].frequency - w[0].frequency, 40.0);
    }
}

#[test]
fn fourier_partial_sum_reconstructs_the_square_wave() {
    let p = TwoLevelParams::standard(0.0, 1.0, 0.05);
    let f = fourier_components(1.0, p.omega(), 200);
    let t = p.period();
    assert!((f.reconstruct(0.25 * t) - 1.0).abs() < 1e-3);
    assert!(f.reconstruct(0.75 * t).abs() < 1e-3);
    for frac in [0.1, 0.4, 0.6, 0.9] {
        let want = p.probe_train().value(frac * t);
        assert!((f.reconstruct(frac * t) - want).abs() < 1e-2);
    }
}

#[test]
fn weak_drive_central_line() {
    let p = TwoLevelParams::standard(0.0, 1.0, 1e-4);
    let r = weak_drive_rho11(0.0, &p, 50, Sidebands::Symmetric);
    // (γ1′/2γ10)(Ωp/2)²/(γ1′² + (γ1′/γ10)(Ωp/2)²) with γ1′ = 0.9
    assert!((r - 0.1125 / 1.035).abs() < 1e-6, "{r}");
    // fast modulation acts as a constant drive at the dc amplitude
    let full = steady_observables(&p, SamplePhase::default()).unwrap().rho11;
    assert!((r - full).abs() < 1e-4, "{r} vs {full}");
    let off = TwoLevelParams::standard(0.0, 0.0, 0.05);
    assert_eq!(weak_drive_rho11(3.0, &off, 50, Sidebands::Symmetric), 0.0);
}

#[test]
fn weak_drive_sidebands() {
    let p = TwoLevelParams::standard(0.0, 1.0, 0.05);
    let one = weak_drive_rho11(20.0, &p, 10, Sidebands::OneSided);
    let sym = weak_drive_rho11(20.0, &p, 10, Sidebands::Symmetric);
    let mirror = weak_drive_rho11(-20.0, &p, 10, Sidebands::OneSided);
    assert!(one < 1e-3 && mirror > 1e-2);
    assert!((sym - weak_drive_rho11(-20.0, &p, 10, Sidebands::Symmetric)).abs() < 1e-15);
}

#[test]
fn weak_drive_peaks_match_the_lindblad_scan() {
    let p = TwoLevelParams::standard(0.0, 1.0, 0.05);
    let ds = linspace_step(-30.0, 30.0, 0.1);
    let weak: Vec<f64> = ds.iter().map(|&d| weak_drive_rho11(d, &p, 10, Sidebands::Symmetric)).collect();
    let full: Vec<f64> = ds
        .iter()
        .map(|&d| steady_observables(&p.with_detuning(d), SamplePhase::default()).unwrap().rho11)
        .collect();
    let at = |idx: Vec<usize>| idx.into_iter().map(|i| ds[i]).collect::<Vec<_>>();
    let pw = at(local_maxima(&weak));
    let pf = at(local_maxima(&full));
    assert_eq!(pw.len(), 3, "{pw:?}");
    for (want, (a, b)) in [-20.0, 0.0, 20.0].into_iter().zip(pw.iter().zip(&pf)) {
        assert!((a - want).abs() <= 0.1 + 1e-9 && (b - want).abs() <= 0.1 + 1e-9, "{pw:?} {pf:?}");
    }
}

#[test]
fn single_factor_comb_is_one_bessel_function() {
    let cfg = BesselSumConfig { q_max: 1, ..Default::default() };
    let (op, w) = (30.0, 20.0);
    let x = -2.0 * op / (w * PI);
    let comb = omega_comb(op, w, &cfg).unwrap();
    for n in -15..=15 {
        assert!((comb.get(n) - bessel_j(n as i32, x).unwrap()).abs() < 1e-15);
    }
}

#[test]
fn comb_matches_fourier_analysis_of_the_phase() {
    let cfg = BesselSumConfig::default();
    for (op, w) in [(40.0, 20.0), (1.0, 1.0 / 0.3), (80.0, 20.0)] {
        let comb = omega_comb(op, w, &cfg).unwrap();
        let xs: Vec<f64> = (1..=cfg.q_max).map(|j| harmonic_argument(j, op, w)).collect();
        let phase = |th: f64| xs.iter().enumerate().map(|(j, x)| x * ((2 * j + 1) as f64 * th).sin()).sum::<f64>();
        for n in -12..=12 {
            assert!((comb.get(n) - fourier_coeff(n, phase)).abs() < 1e-12);
        }
        assert!((comb.sum_of_squares() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn comb_converges_to_the_triangle_wave_phase() {
    // all harmonics together integrate the square wave into a triangle wave
    let (op, w) = (40.0, 20.0);
    let amp = op * PI / (4.0 * w);
    let tri = |th: f64| -amp * (2.0 / PI) * th.sin().asin();
    let err = |q: usize| {
        let comb = omega_comb(op, w, &BesselSumConfig { q_max: q, ..Default::default() }).unwrap();
        (-10..=10).map(|n| (comb.get(n) - fourier_coeff(n, tri)).abs()).fold(0.0, f64::max)
    };
    let (e4, e40) = (err(4), err(40));
    assert!(e40 < e4 && e40 < 1e-2, "{e4} {e40}");
}

#[test]
fn comb_in_the_fast_limit() {
    let p = TwoLevelParams::standard(0.0, 1.0, 1e-4);
    let comb = omega_comb(1.0, p.omega(), &BesselSumConfig::default()).unwrap();
    assert!(comb.get(0).powi(2) >= 0.999);
    assert!(comb.sum_of_squares() - comb.get(0).powi(2) <= 1e-3);
    assert!(omega_comb(1.0, 0.0, &BesselSumConfig::default()).is_err());
    assert!(omega_comb(1.0, 1.0, &BesselSumConfig { q_max: 0, ..Default::default() }).is_err());
}

#[test]
fn resonant_steady_fast_limit() {
    let f = fast_modulation_rho11(1.0, 1.0, 0.95);
    assert!((f - 0.08785).abs() < 1e-5);
    let p = TwoLevelParams::standard(0.0, 1.0, 1e-4);
    let r = resonant_steady(1.0, &p, &BesselSumConfig::default()).unwrap();
    assert!((r.rho11 - f).abs() < 1e-3);
    assert!(resonant_steady(1.0, &p.with_detuning(1.0), &BesselSumConfig::default()).is_err());
}

#[test]
fn resonant_steady_has_the_cdt_minimum() {
    let ops = linspace_step(30.0, 50.0, 0.5);
    let cfg = BesselSumConfig::default();
    let ys: Vec<f64> = ops
        .iter()
        .map(|&op| resonant_steady(op, &TwoLevelParams::standard(0.0, op, 0.05), &cfg).unwrap().rho11)
        .collect();
    let mins: Vec<f64> = local_minima(&ys).into_iter().map(|i| ops[i]).collect();
    assert_eq!(mins.len(), 1);
    assert!((mins[0] - 40.0).abs() <= 0.5);
}

#[test]
fn resonant_steady_is_stable_under_truncation() {
    let op = 40.0;
    let p = TwoLevelParams::standard(0.0, op, 0.05);
    let base = BesselSumConfig { n_max: Some(60), ..Default::default() };
    let r = resonant_steady(op, &p, &base).unwrap();
    for cfg in [
        BesselSumConfig { n_max: Some(120), ..base },
        BesselSumConfig { extra_orders: 24, ..base },
        BesselSumConfig { n_max: None, ..base },
    ] {
        let s = resonant_steady(op, &p, &cfg).unwrap();
        assert!((r.rho11 - s.rho11).abs() < 1e-8 && (r.im_rho10 - s.im_rho10).abs() < 1e-8);
    }
}

#[test]
fn cdt_locus_cases() {
    assert_eq!(cdt_locus(20.0, 1, 0.0), Some(40.0));
    assert_eq!(cdt_locus(20.0, 2, 0.0), Some(80.0));
    assert_eq!(cdt_locus(20.0, 1, 40.0), Some(0.0));
    assert_eq!(cdt_locus(20.0, 1, 41.0), None);
    assert_eq!(cdt_locus(20.0, 0, 0.0), None);
}

#[test]
fn bloch_components_roundtrip() {
    let g = BlochComponents::from_density(&DensityMatrix::ground(2));
    assert_eq!((g.u.re, g.w.re), (0.5, 0.5));
    let rho = crate::quantum::density::tests::random_density(2, &[(0.3, 0.1), (-0.2, 0.5), (0.7, -0.4), (0.1, 0.2)]);
    let b = BlochComponents::from_density(&rho);
    assert!(b.to_density().unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
    assert!((b.rho11() - rho.get(1, 1).re).abs() < 1e-15);
    assert!((b.im_rho10() - rho.get(1, 0).im).abs() < 1e-15);
}

#[test]
fn bloch_without_drive_stays_in_the_ground_state() {
    let p = TwoLevelParams::standard(0.0, 0.0, 0.05);
    let tr = integrate_bloch_resonant(&p, 3.0, 1e-10, 8).unwrap();
    for c in &tr.components {
        assert!((c.u.re - 0.5).abs() < 1e-12 && c.rho11().abs() < 1e-12);
    }
    assert!(integrate_bloch_resonant(&p.with_detuning(1.0), 1.0, 1e-8, 8).is_err());
    assert!(integrate_bloch_resonant(&p, 1.0, 1e-8, 3).is_err());
}

#[test]
fn bloch_matches_the_monodromy_evolution() {
    for op in [5.0, 30.0, 60.0] {
        let p = TwoLevelParams::standard(0.0, op, 0.05);
        let tr = integrate_bloch_resonant(&p, 20.0 * p.period(), 1e-11, 4).unwrap();
        let e = build_monodromy_at(&p, SamplePhase::PeriodEnd).unwrap();
        let ev = evolve_stroboscopic(&e, &DensityMatrix::ground(2), 20).unwrap();
        let strobe: Vec<f64> = tr.stroboscopic().map(|(_, c)| c.rho11()).collect();
        assert_eq!(strobe.len(), ev.len());
        for (a, b) in strobe.iter().zip(ev.rho11()) {
            assert!((a - b).abs() < 1e-8, "Ωp={op}: {a} vs {b}");
        }
    }
}

#[test]
fn bloch_average_matches_resonant_steady() {
    let p = TwoLevelParams::standard(0.0, 40.0, 0.05);
    let tr = integrate_bloch_resonant(&p, 40.0, 1e-9, 64).unwrap();
    let avg = tr.mean_rho11_last(20);
    let r = resonant_steady(40.0, &p, &BesselSumConfig::default()).unwrap();
    assert!((avg - r.rho11).abs() < 0.02, "{avg} vs {}", r.rho11);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn bessel_matches_quadrature(k in -30i32..30, x in -200.0..200.0f64) {
        prop_assert!((bessel_j(k, x).unwrap() - bessel_quad(k, x)).abs() < 1e-13);
    }

    #[test]
    fn resonant_population_is_bounded(op in 5.0..100.0f64, tau in 0.001..1.0f64) {
        let p = TwoLevelParams::standard(0.0, op, tau);
        let r = resonant_steady(op, &p, &BesselSumConfig::default()).unwrap();
        prop_assert!(r.rho11 >= -1e-12 && r.rho11 <= 0.5 + 1e-12);
    }

    #[test]
    fn comb_is_normalized(op in 0.0..120.0f64, tau in 0.001..1.0f64) {
        let comb = omega_comb(op, 1.0 / tau, &BesselSumConfig::default()).unwrap();
        prop_assert!((comb.sum_of_squares() - 1.0).abs() < 1e-12);
    }
}
