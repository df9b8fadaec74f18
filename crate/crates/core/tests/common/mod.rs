#![allow(dead_code)]

use num_complex::Complex64;

use decolab_core::driven::DrivenModel;
use decolab_core::numerics::{integrate_trigonometric, OscillatoryTerm, QuadratureSettings, Wave};

/// Drives with a closed-form Fourier transform.
#[derive(Clone, Copy, Debug)]
pub enum OracleDrive {
    Delta(f64),
    Sine { amplitude: f64, rate: f64 },
}

/// ∫₀ᵗ e^{ixu} du without cancellation near x = 0.
fn phase_integral(x: f64, t: f64) -> Complex64 {
    let h = 0.5 * x * t;
    let sinc = if h.abs() < 1e-8 { 1.0 - h * h / 6.0 } else { h.sin() / h };
    Complex64::from_polar(t * sinc, h)
}

/// F(ω) = ∫₀ᵗ α(t′) e^{iω(t−t′)} dt′.
pub fn drive_transform(drive: OracleDrive, w: f64, t: f64) -> Complex64 {
    match drive {
        OracleDrive::Delta(c) => Complex64::from_polar(c, w * t),
        OracleDrive::Sine { amplitude, rate } => {
            let inner = (phase_integral(rate - w, t) - phase_integral(-rate - w, t)) / Complex64::new(0.0, 2.0);
            Complex64::from_polar(1.0, w * t) * inner * amplitude
        }
    }
}

/// F = P(ω) + Q(ω)e^{iωt} away from ω = Λ.
fn split_transform(drive: OracleDrive, w: f64, t: f64) -> (Complex64, f64) {
    match drive {
        OracleDrive::Delta(c) => (Complex64::new(0.0, 0.0), c),
        OracleDrive::Sine { amplitude, rate } => {
            let d = rate * rate - w * w;
            let p = Complex64::new(-amplitude * rate * (rate * t).cos(), -amplitude * w * (rate * t).sin()) / d;
            (p, amplitude * rate / d)
        }
    }
}

/// ∫₀ᵗ α.
pub fn drive_area(drive: OracleDrive, t: f64) -> f64 {
    match drive {
        OracleDrive::Delta(c) => c,
        OracleDrive::Sine { amplitude, rate } => {
            let h = (0.5 * rate * t).sin();
            amplitude * 2.0 * h * h / rate
        }
    }
}

/// The driven exponent assembled in the frequency domain,
/// a²[∫(p̃²/ω)|F|² − (∫(p̃²/ω)Re F)²/(MΩ₁) − (Ω₂/M)(∫(p̃²/ω²)Im F)²],
/// rearranged with Re F = A − G, A = ∫α, into
/// a²[∫(p̃²/ω)(G² + Im F²) − (∫(p̃²/ω)G)²/(MΩ₁) − (Ω₂/M)(∫(p̃²/ω²)Im F)²].
/// Each integral is split into a smooth part and cos ωt, sin ωt parts
/// beyond the last breakpoint.
pub fn frequency_domain_exponent(model: &DrivenModel, drive: OracleDrive, t: f64) -> f64 {
    let spec = model.spec();
    let (m, om, g, gc) = (spec.mass(), spec.frequency(), spec.dissipation(), spec.cutoff());
    let (o1, o2) = model.frequencies();
    let mut bps = vec![om, 2.0 * om, 10.0 * om, gc, om + 5.0 * g, om - 5.0 * g, om + 50.0 * g, om - 50.0 * g];
    if let OracleDrive::Sine { rate, .. } = drive {
        bps.push(rate);
        bps.push(20.0 * rate);
    }
    let settings = QuadratureSettings::default()
        .with_tolerances(1e-300, 1e-11)
        .with_breakpoints(bps.into_iter().filter(|&b| b > 0.0));
    let area = drive_area(drive, t);
    let f = |w: f64| drive_transform(drive, w, t);
    let deficit = |w: f64| match drive {
        OracleDrive::Delta(c) => {
            let h = (0.5 * w * t).sin();
            2.0 * c * h * h
        }
        OracleDrive::Sine { .. } => area - f(w).re,
    };
    let pw = |w: f64| model.weight(w) / w;
    let run = |full: &dyn Fn(f64) -> f64, smooth: &dyn Fn(f64) -> f64, cos: &dyn Fn(f64) -> f64, sin: &dyn Fn(f64) -> f64| {
        let terms = [
            OscillatoryTerm { envelope: cos, frequency: t, wave: Wave::Cos },
            OscillatoryTerm { envelope: sin, frequency: t, wave: Wave::Sin },
        ];
        let e = integrate_trigonometric(full, smooth, &terms, &settings).unwrap();
        assert!(e.converged, "oracle quadrature did not converge: {e:?}");
        e.value
    };
    let power = run(
        &|w| pw(w) * (deficit(w).powi(2) + f(w).im.powi(2)),
        &|w| {
            let (p, q) = split_transform(drive, w, t);
            pw(w) * ((area - p.re).powi(2) + p.im * p.im + q * q)
        },
        &|w| {
            let (p, q) = split_transform(drive, w, t);
            -2.0 * pw(w) * (area - p.re) * q
        },
        &|w| {
            let (p, q) = split_transform(drive, w, t);
            2.0 * pw(w) * p.im * q
        },
    );
    let cos_part = run(
        &|w| pw(w) * deficit(w),
        &|w| pw(w) * (area - split_transform(drive, w, t).0.re),
        &|w| -pw(w) * split_transform(drive, w, t).1,
        &|_| 0.0,
    );
    let sin_part = run(
        &|w| pw(w) / w * f(w).im,
        &|w| pw(w) / w * split_transform(drive, w, t).0.im,
        &|_| 0.0,
        &|w| pw(w) / w * split_transform(drive, w, t).1,
    );
    spec.separation().powi(2) * (power - cos_part * cos_part / (m * o1) - o2 / m * sin_part * sin_part)
}
