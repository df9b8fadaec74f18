mod common;

use std::f64::consts::PI;

use common::{frequency_domain_exponent, OracleDrive};
use decolab_core::driven::{decoherence_exponent_driven, drive_convolution, DrivenModel, ExponentScaling};
use decolab_core::numerics::QuadratureSettings;
use decolab_core::{make_oscillator_spec, DriveProfile, OscillatorSpec, SampledCurve};

fn spec(cutoff: f64, dissipation: f64) -> OscillatorSpec {
    make_oscillator_spec(1.0, 1.0, dissipation, cutoff, 1.0, 1.0, true).unwrap()
}

fn model(s: &OscillatorSpec) -> DrivenModel {
    DrivenModel::new(s, &QuadratureSettings::default()).unwrap()
}

#[test]
fn kernels_track_damped_oscillation() {
    let m = model(&spec(1e3, 1e-3));
    let k = m.kernels(10.0, 256).unwrap();
    assert!((k.r.values()[0] - 1.0).abs() < 1e-8);
    assert!((k.y.values()[0] - 1.0).abs() < 1e-8);
    assert!(k.s.values()[0].abs() < 1e-8 && k.z.values()[0].abs() < 1e-8);
    let bound = 5.0 * (1e-3 + 1e-3);
    for i in 0..k.r.len() {
        let t = k.r.abscissa(i);
        let envelope = (-1e-3 * t).exp();
        assert!((k.r.values()[i] - envelope * t.cos()).abs() <= bound, "r at {t}");
        assert!((k.s.values()[i] - envelope * t.sin()).abs() <= bound, "s at {t}");
    }
}

#[test]
fn omega1_grows_with_cutoff() {
    let (low, _) = model(&spec(1e3, 1e-3)).frequencies();
    let (high, _) = model(&spec(1e4, 1e-3)).frequencies();
    assert!(high > low);
}

#[test]
fn frequencies_self_converge() {
    let s = spec(1e3, 1e-3);
    let coarse = model(&s).frequencies();
    let mut tight = QuadratureSettings::default().with_tolerances(1e-15, 1e-12);
    tight.panel_budget *= 2;
    let fine = DrivenModel::new(&s, &tight).unwrap().frequencies();
    assert!((coarse.0 / fine.0 - 1.0).abs() < 1e-6);
    assert!((coarse.1 / fine.1 - 1.0).abs() < 1e-6);
    assert!(coarse.0 > 0.0 && coarse.1 > 0.0);
}

#[test]
fn delta_drive_matches_frequency_domain() {
    let m = model(&spec(1e3, 1e-3));
    for t in [0.001, 0.01, 0.05] {
        let k = m.kernels(t, 64).unwrap();
        let d = m.exponent(&DriveProfile::kick(), &k, t, ExponentScaling::Repaired).unwrap();
        let oracle = frequency_domain_exponent(&m, OracleDrive::Delta(2.0), t);
        assert!((d.value / oracle - 1.0).abs() < 1e-8, "t = {t}: {} vs {oracle}", d.value);
    }
}

#[test]
fn sine_drive_matches_frequency_domain() {
    let m = model(&spec(1e3, 1e-3));
    let t = 0.01;
    let k = m.kernels(t, 801).unwrap();
    let d = m.exponent(&DriveProfile::sine(1.0, 1.0).unwrap(), &k, t, ExponentScaling::Repaired).unwrap();
    let oracle = frequency_domain_exponent(&m, OracleDrive::Sine { amplitude: 1.0, rate: 1.0 }, t);
    assert!((d.value / oracle - 1.0).abs() < 1e-5, "{} vs {oracle}", d.value);
}

#[test]
fn double_integral_two_ways() {
    let m = model(&spec(1e3, 1e-3));
    let t = 0.02;
    let k = m.kernels(t, 2001).unwrap();
    let ramp = SampledCurve::from_fn(0.0, t, 2001, |x| x * x / (t * t)).unwrap();
    let d = m.exponent(&DriveProfile::sampled(ramp).unwrap(), &k, t, ExponentScaling::Repaired).unwrap();
    assert!((d.double_integral / d.double_integral_iterated - 1.0).abs() < 1e-6);
}

#[test]
fn convolution_examples() {
    let y = SampledCurve::from_fn(0.0, 1.0, 101, |t| (3.0 * t).cos()).unwrap();
    assert_eq!(drive_convolution(&DriveProfile::kick(), &y, 0.5).unwrap(), 2.0 * (1.5f64).cos());
}

#[test]
fn driven_zero_time() {
    let d = decoherence_exponent_driven(&spec(1e3, 1e-3), &DriveProfile::kick(), 0.0).unwrap();
    assert_eq!(d.value, 0.0);
}

/// Γ/Ω = 100 keeps the grid (five samples per 1/Γ) affordable out to t = π/Ω.
#[test]
fn slow_drive_is_cutoff_insensitive_and_suppresses_the_burst() {
    let base = spec(100.0, 1e-2);
    let doubled = base.with_cutoff(200.0).unwrap();
    let sine = DriveProfile::sine(1.0, 1.0).unwrap();
    let mut at = Vec::new();
    for s in [&base, &doubled] {
        let m = model(s);
        let k = m.kernels(PI, (5.0 * s.cutoff() * PI) as usize + 1).unwrap();
        let slow = m.exponent(&sine, &k, 3.0, ExponentScaling::Repaired).unwrap();
        let burst = m.exponent(&DriveProfile::kick(), &k, PI, ExponentScaling::Repaired).unwrap();
        let calibrated = m.exponent(&sine, &k, PI, ExponentScaling::Repaired).unwrap();
        for d in [&slow, &burst, &calibrated] {
            assert!(d.value >= 0.0 && !d.negative);
        }
        at.push((slow.value, burst.value, calibrated.value));
    }
    let change = (at[1].0 - at[0].0).abs() / at[0].0;
    assert!(change < 0.05, "relative change {change}");
    for (_, burst, calibrated) in at {
        assert!(burst > calibrated, "{burst} vs {calibrated}");
    }
}

