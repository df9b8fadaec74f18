//! Early-time decoherence of a two-coherent-state superposition in an Ohmic
//! bath with a Lorentzian cutoff f_ω² = Γ²/(ω² + Γ²).

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::numerics::{coth_half, integrate_trigonometric, Estimate, OscillatoryTerm, QuadratureSettings, Wave};
use crate::params::OscillatorSpec;

/// Both parts of the initial cat-state Wigner function at one phase-space point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WignerPoint {
    pub q: f64,
    pub p: f64,
    pub mixture: f64,
    pub interference: f64,
}

impl WignerPoint {
    pub fn total(&self) -> f64 {
        self.mixture + self.interference
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Prefactor (1 − e^{−MΩa²})⁻¹/π as printed.
    Printed,
    /// Prefactor rescaled so the phase-space integral is exactly 1.
    Numerical,
}

/// Which sign inside (1 ∓ e^{−MΩa²})⁻¹ normalizes the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationReport {
    /// ∫∫W with the printed prefactor.
    pub printed_integral: f64,
    /// ∫∫W with (1 + e^{−MΩa²})⁻¹ instead.
    pub plus_sign_integral: f64,
    pub plus_sign_normalizes: bool,
}

#[derive(Debug, Clone)]
pub struct WignerInitial {
    mass: f64,
    frequency: f64,
    separation: f64,
    prefactor: f64,
}

impl WignerInitial {
    pub fn new(spec: &OscillatorSpec, normalization: Normalization) -> Self {
        let x = spec.mass() * spec.frequency() * spec.separation().powi(2);
        let printed = 1.0 / (-(-x).exp_m1() * PI);
        let mut w = Self {
            mass: spec.mass(),
            frequency: spec.frequency(),
            separation: spec.separation(),
            prefactor: printed,
        };
        if normalization == Normalization::Numerical {
            w.prefactor = printed / w.grid_integral();
        }
        w
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn eval(&self, q: f64, p: f64) -> WignerPoint {
        let (m, w, a) = (self.mass, self.frequency, self.separation);
        let gauss = (-(p * p / m + m * w * w * q * q) / w).exp();
        let mix = 0.5 * ((-(m * w * (q - a).powi(2)) - p * p / (m * w)).exp() + (-(m * w * (q + a).powi(2)) - p * p / (m * w)).exp());
        WignerPoint {
            q,
            p,
            mixture: self.prefactor * mix,
            interference: self.prefactor * (2.0 * a * p).cos() * gauss,
        }
    }

    /// Fringe term damped by e^{−D}.
    pub fn evolved(&self, q: f64, p: f64, exponent: f64) -> WignerPoint {
        let mut w = self.eval(q, p);
        w.interference *= (-exponent).exp();
        w
    }

    /// Tensor trapezoid of W over ±8 standard deviations around both peaks.
    fn grid_integral(&self) -> f64 {
        let (m, w, a) = (self.mass, self.frequency, self.separation);
        let sq = (0.5 / (m * w)).sqrt();
        let sp = (0.5 * m * w).sqrt();
        let q_half = a + 8.0 * sq;
        let p_half = 8.0 * sp;
        let nq = 1601usize.max((2.0 * q_half / (0.05 * sq)).ceil() as usize | 1);
        let np = 1601usize.max((2.0 * p_half * 2.0 * a / 0.1).ceil() as usize | 1);
        let hq = 2.0 * q_half / (nq - 1) as f64;
        let hp = 2.0 * p_half / (np - 1) as f64;
        let weight = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        // both parts are separable products of a Q factor and a P factor
        let mut mix_q = 0.0;
        let mut int_q = 0.0;
        for i in 0..nq {
            let q = -q_half + hq * i as f64;
            let c = weight(i, nq);
            mix_q += c * 0.5 * ((-(m * w * (q - a).powi(2))).exp() + (-(m * w * (q + a).powi(2))).exp());
            int_q += c * (-(m * w * q * q)).exp();
        }
        let mut mix_p = 0.0;
        let mut int_p = 0.0;
        for j in 0..np {
            let p = -p_half + hp * j as f64;
            let c = weight(j, np);
            let g = (-(p * p) / (m * w)).exp();
            mix_p += c * g;
            int_p += c * g * (2.0 * a * p).cos();
        }
        self.prefactor * hq * hp * (mix_q * mix_p + int_q * int_p)
    }
}

pub fn wigner_initial(spec: &OscillatorSpec, q: f64, p: f64) -> WignerPoint {
    WignerInitial::new(spec, Normalization::Printed).eval(q, p)
}

pub fn wigner_normalization_report(spec: &OscillatorSpec) -> NormalizationReport {
    let printed = WignerInitial::new(spec, Normalization::Printed);
    let total = printed.grid_integral();
    let x = spec.mass() * spec.frequency() * spec.separation().powi(2);
    // (1 + e^{−x})⁻¹ / (1 − e^{−x})⁻¹
    let ratio = -(-x).exp_m1() / (1.0 + (-x).exp());
    let plus = total * ratio;
    NormalizationReport {
        printed_integral: total,
        plus_sign_integral: plus,
        plus_sign_normalizes: (plus - 1.0).abs() < (total - 1.0).abs(),
    }
}

fn thermal(spec: &OscillatorSpec, w: f64) -> f64 {
    if spec.temperature() == 0.0 {
        1.0
    } else {
        coth_half(w / spec.temperature()).unwrap_or(f64::INFINITY)
    }
}

/// D(t) = (8Mγa²/π) ∫₀^∞ dω/ω f_ω² coth(βω/2)(1 − cos ωt).
pub fn decoherence_exponent_ohmic(spec: &OscillatorSpec, t: f64, settings: &QuadratureSettings) -> Result<Estimate> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(domain("t must be non-negative"));
    }
    let a = spec.separation();
    let prefactor = 8.0 * spec.mass() * spec.dissipation() * a * a / PI;
    if t == 0.0 || prefactor == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0, converged: true });
    }
    let gamma_c = spec.cutoff();
    let g = |w: f64| gamma_c * gamma_c / (w * w + gamma_c * gamma_c) * thermal(spec, w) / w;
    let full = |w: f64| {
        let s = (0.5 * w * t).sin();
        2.0 * s * s * g(w)
    };
    let envelope = |w: f64| -g(w);
    let terms = [OscillatoryTerm { envelope: &envelope, frequency: t, wave: Wave::Cos }];
    let mut s = settings.clone().without_period().with_breakpoints([gamma_c, 1.0 / t]);
    if spec.temperature() > 0.0 {
        s.breakpoints.push(spec.temperature());
    }
    let est = integrate_trigonometric(full, g, &terms, &s)?;
    Ok(est.scaled(prefactor))
}

/// x − 1 + e^{−x}, accurate for small x.
fn ramp(x: f64) -> f64 {
    if x < 0.1 {
        ramp_series(x)
    } else {
        x + (-x).exp_m1()
    }
}

fn ramp_series(x: f64) -> f64 {
    let mut term = x * x / 2.0;
    let mut sum = 0.0;
    for n in 3..30 {
        sum += term;
        term *= -x / n as f64;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// High-temperature closed form D = 8MγTa²(t − (1 − e^{−Γt})/Γ).
pub fn decoherence_exponent_high_t(spec: &OscillatorSpec, t: f64) -> f64 {
    let a = spec.separation();
    let gamma_c = spec.cutoff();
    8.0 * spec.mass() * spec.dissipation() * spec.temperature() * a * a * ramp(gamma_c * t) / gamma_c
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Γτ_dec ≥ 10: D grows linearly and τ_dec applies.
    Linear,
    /// Γτ′_dec ≤ 0.1: D grows quadratically and τ′_dec applies.
    Quadratic,
    Crossover,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Timescales {
    pub tau_dec: f64,
    pub tau_dec_quadratic: f64,
    pub regime: Regime,
}

pub fn decoherence_timescales(spec: &OscillatorSpec) -> Result<Timescales> {
    let temp = spec.temperature();
    if temp <= 0.0 {
        return Err(domain("timescales need T > 0"));
    }
    let (m, g, a, gc) = (spec.mass(), spec.dissipation(), spec.separation(), spec.cutoff());
    if g <= 0.0 {
        return Err(domain("timescales need γ > 0"));
    }
    let tau_dec = 1.0 / (8.0 * m * g * a * a * temp);
    let tau_dec_quadratic = 1.0 / (2.0 * a * (m * g * gc * temp).sqrt());
    let regime = if gc * tau_dec >= 10.0 {
        Regime::Linear
    } else if gc * tau_dec_quadratic <= 0.1 {
        Regime::Quadratic
    } else {
        Regime::Crossover
    };
    Ok(Timescales { tau_dec, tau_dec_quadratic, regime })
}

/// Largest Ωt for which the first-order early-time result is used.
pub const EARLY_TIME_LIMIT: f64 = 0.1;

/// W at time t: mixture unchanged, fringes damped by e^{−D(t)}.
pub fn wigner_evolved(
    spec: &OscillatorSpec,
    q: f64,
    p: f64,
    t: f64,
    settings: &QuadratureSettings,
    allow_late: bool,
) -> Result<WignerPoint> {
    if spec.frequency() * t > EARLY_TIME_LIMIT && !allow_late {
        return Err(Error::Validity(format!(
            "Ωt = {} exceeds the early-time window {EARLY_TIME_LIMIT}",
            spec.frequency() * t
        )));
    }
    let d = decoherence_exponent_ohmic(spec, t, settings)?.require("ohmic decoherence exponent")?;
    Ok(WignerInitial::new(spec, Normalization::Printed).evolved(q, p, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_oscillator_spec;

    fn spec(t: f64, gamma_c: f64) -> OscillatorSpec {
        make_oscillator_spec(1.0, 1.0, 0.01, gamma_c, t, 1.0, false).unwrap()
    }

    #[test]
    fn high_t_reference_value() {
        let d = decoherence_exponent_high_t(&spec(100.0, 100.0), 0.1);
        let exact = 8.0 * 0.01 * 100.0 * (0.1 - (1.0 - (-10.0f64).exp()) / 100.0);
        assert!((d - exact).abs() < 1e-14);
        assert!((d - 0.720_003_632).abs() < 1e-9);
    }

    #[test]
    fn high_t_limits() {
        let s = spec(100.0, 100.0);
        let slope = (decoherence_exponent_high_t(&s, 10.001) - decoherence_exponent_high_t(&s, 10.0)) / 0.001;
        assert!((slope - 8.0 * 0.01 * 100.0).abs() < 1e-6);
        let t = 1e-5;
        let quad = 4.0 * 0.01 * 100.0 * 100.0 * t * t;
        assert!((decoherence_exponent_high_t(&s, t) / quad - 1.0).abs() < 1e-3);
    }

    #[test]
    fn ramp_is_continuous() {
        let x = 0.1;
        let series = ramp_series(x);
        let direct = x + (-x).exp_m1();
        assert!((series / direct - 1.0).abs() < 1e-13);
    }

    #[test]
    fn quadrature_starts_at_zero_and_matches_high_t() {
        let s = spec(100.0, 1.0);
        let q = QuadratureSettings::default();
        assert_eq!(decoherence_exponent_ohmic(&s, 0.0, &q).unwrap().value, 0.0);
        let d = decoherence_exponent_ohmic(&s, 2.0, &q).unwrap();
        assert!(d.converged);
        let closed = decoherence_exponent_high_t(&s, 2.0);
        assert!((d.value / closed - 1.0).abs() < 0.01);
    }

    #[test]
    fn zero_temperature_is_finite() {
        let s = spec(0.0, 10.0);
        let d = decoherence_exponent_ohmic(&s, 1.0, &QuadratureSettings::default()).unwrap();
        assert!(d.converged && d.value > 0.0);
    }

    #[test]
    fn timescales_reference_values() {
        let s = spec(100.0, 100.0);
        let ts = decoherence_timescales(&s).unwrap();
        assert!((ts.tau_dec - 0.125).abs() < 1e-15);
        assert!((ts.tau_dec_quadratic - 0.05).abs() < 1e-15);
        assert_eq!(ts.regime, Regime::Linear);
        assert!(decoherence_timescales(&spec(0.0, 100.0)).is_err());
    }

    #[test]
    fn printed_prefactor_does_not_normalize() {
        let s = make_oscillator_spec(1.0, 1.0, 0.01, 10.0, 1.0, 0.8, false).unwrap();
        let r = wigner_normalization_report(&s);
        let x: f64 = 0.64;
        let expected = (1.0 + (-x).exp()) / (1.0 - (-x).exp());
        assert!((r.printed_integral - expected).abs() < 1e-10);
        assert!((r.plus_sign_integral - 1.0).abs() < 1e-10);
        assert!(r.plus_sign_normalizes);
    }

    #[test]
    fn wigner_origin_and_parity() {
        let s = make_oscillator_spec(1.0, 2.0, 0.01, 10.0, 1.0, 0.7, false).unwrap();
        let w = wigner_initial(&s, 0.0, 0.0);
        let x = 2.0 * 0.49;
        assert!((w.interference / w.mixture - f64::exp(x)).abs() < 1e-12 * f64::exp(x));
        for (q, p) in [(0.3, 1.1), (-0.5, 0.2)] {
            let a = wigner_initial(&s, q, p);
            let b = wigner_initial(&s, q, -p);
            assert_eq!(a.mixture, b.mixture);
            assert_eq!(a.interference, b.interference);
        }
    }

    #[test]
    fn late_times_need_override() {
        let s = spec(10.0, 100.0);
        let q = QuadratureSettings::default();
        assert!(matches!(wigner_evolved(&s, 0.0, 0.0, 1.0, &q, false), Err(Error::Validity(_))));
        assert!(wigner_evolved(&s, 0.0, 0.0, 1.0, &q, true).is_ok());
        let w0 = wigner_evolved(&s, 0.2, 0.1, 0.0, &q, false).unwrap();
        assert_eq!(w0, wigner_initial(&s, 0.2, 0.1));
    }
}
