//! A particle coupled to a scalar field in n = 1 or 3 dimensions through a
//! spectral window f_k.
//!
//! Radial reductions use ∫dⁿk/(2π)ⁿ → c_n∫k^{n−1}dk with c₁ = 1/π and
//! c₃ = 1/(2π²).

mod master;
mod separation;

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, require_finite, Error, Result};
use crate::numerics::{
    integrate_semi_infinite, integrate_trigonometric, thermal_factor, Estimate, OscillatoryTerm, QuadratureSettings, Wave,
};
use crate::profile::{CouplingProfile, ProfileRole};

pub use master::{evolve_master, evolve_master_with, Hamiltonian, MasterCoefficients};
pub use separation::{
    decoherence_dl_high_t, decoherence_dl_numeric, decoherence_dl_zero_t, validate_closed_forms, CaseReport,
    ClosedForm, Thermal, ValidationPoint, ValidationReport, HIGH_T_RATIO, VALIDATION_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    dimension: u32,
    coupling: f64,
    beta: f64,
    window: CouplingProfile,
    quad: QuadratureSettings,
}

impl FieldSpec {
    /// `beta` may be `f64::INFINITY` (zero temperature).
    pub fn new(dimension: u32, coupling: f64, beta: f64, window: CouplingProfile) -> Result<Self> {
        if dimension != 1 && dimension != 3 {
            return Err(domain(format!("field dimension must be 1 or 3, got {dimension}")));
        }
        require_finite("g", coupling)?;
        if coupling <= 0.0 {
            return Err(domain("g must be positive"));
        }
        if beta.is_nan() || beta <= 0.0 {
            return Err(domain("β must be positive or infinite"));
        }
        if window.role() != ProfileRole::Spectral {
            return Err(domain("field coupling needs a spectral window"));
        }
        let quad = QuadratureSettings::default().with_tolerances(1e-300, 1e-10);
        Ok(Self { dimension, coupling, beta, window, quad })
    }

    /// Lorentzian window f_k² = Γ²/(k² + Γ²).
    pub fn lorentzian(dimension: u32, coupling: f64, beta: f64, cutoff: f64) -> Result<Self> {
        Self::new(dimension, coupling, beta, CouplingProfile::lorentzian(cutoff)?)
    }

    pub fn with_quadrature(mut self, quad: QuadratureSettings) -> Result<Self> {
        quad.validate()?;
        self.quad = quad;
        Ok(self)
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        let mut s = Self::new(self.dimension, self.coupling, beta, self.window.clone())?;
        s.quad = self.quad.clone();
        Ok(s)
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn window(&self) -> &CouplingProfile {
        &self.window
    }

    pub fn quadrature(&self) -> &QuadratureSettings {
        &self.quad
    }

    /// c_n in ∫dⁿk/(2π)ⁿ = c_n∫k^{n−1}dk for isotropic integrands.
    pub fn radial_measure(&self) -> f64 {
        if self.dimension == 1 {
            1.0 / PI
        } else {
            1.0 / (2.0 * PI * PI)
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![self.window.scale()];
        if self.beta.is_finite() {
            b.push(1.0 / self.beta);
        }
        b
    }
}

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Propagators of an interacting field, fixed by ω(k) and Λ(k).
#[derive(Clone)]
pub struct DampedPropagatorSpec {
    dispersion: Profile,
    damping: Profile,
    beta: f64,
}

impl fmt::Debug for DampedPropagatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DampedPropagatorSpec").field("beta", &self.beta).finish_non_exhaustive()
    }
}

impl DampedPropagatorSpec {
    pub fn new(
        dispersion: impl Fn(f64) -> f64 + Send + Sync + 'static,
        damping: impl Fn(f64) -> f64 + Send + Sync + 'static,
        beta: f64,
    ) -> Result<Self> {
        if beta.is_nan() || beta <= 0.0 {
            return Err(domain("β must be positive or infinite"));
        }
        Ok(Self { dispersion: Arc::new(dispersion), damping: Arc::new(damping), beta })
    }

    /// Massless dispersion ω = k with a constant damping rate.
    pub fn massless(damping: f64, beta: f64) -> Result<Self> {
        require_finite("Λ", damping)?;
        if damping < 0.0 {
            return Err(domain("Λ must be non-negative"));
        }
        Self::new(|k| k, move |_| damping, beta)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// (ω(k), Λ(k)), checked.
    pub fn modes(&self, k: f64) -> Result<(f64, f64)> {
        let (w, l) = ((self.dispersion)(k), (self.damping)(k));
        if !(w > 0.0) || !w.is_finite() {
            return Err(domain(format!("ω(k) must be positive at k = {k}, got {w}")));
        }
        if !(l >= 0.0) || !l.is_finite() {
            return Err(domain(format!("Λ(k) must be non-negative at k = {k}, got {l}")));
        }
        Ok((w, l))
    }

    /// sinh βω/(cosh βω − cos βΛ) and sin βΛ/(cosh βω − cos βΛ).
    fn thermal_weights(&self, w: f64, l: f64) -> Result<(f64, f64)> {
        let bw = self.beta * w;
        if self.beta.is_infinite() || bw > 700.0 {
            return Ok((1.0, 0.0));
        }
        let bl = self.beta * l;
        let denom = bw.cosh() - bl.cos();
        if denom <= 1e-12 {
            return Err(domain(format!("degenerate thermal denominator cosh βω − cos βΛ = {denom:e}")));
        }
        Ok((bw.sinh() / denom, bl.sin() / denom))
    }
}

/// (G_r, G_h) of the free massless field.
pub fn propagators_free(k: f64, dt: f64, beta: f64) -> Result<(f64, f64)> {
    require_finite("Δt", dt)?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(domain("k must be positive"));
    }
    if beta.is_nan() || beta <= 0.0 {
        return Err(domain("β must be positive or infinite"));
    }
    let x = k * dt;
    Ok((x.sin() / (2.0 * k), x.cos() * thermal_factor(beta, k) / (2.0 * k)))
}

/// (G_r, G_h) with damping.
pub fn propagators_damped(pspec: &DampedPropagatorSpec, k: f64, dt: f64) -> Result<(f64, f64)> {
    require_finite("Δt", dt)?;
    if !(k > 0.0) || !k.is_finite() {
        return Err(domain("k must be positive"));
    }
    let (w, l) = pspec.modes(k)?;
    let (a, b) = pspec.thermal_weights(w, l)?;
    let decay = (-l * dt.abs()).exp() / (2.0 * w);
    let gr = decay * (w * dt).sin();
    let gh = decay * (a * (w * dt).cos() + b * (w * dt.abs()).sin());
    Ok((gr, gh))
}

#[derive(Debug, Clone, Copy)]
pub enum Propagator<'a> {
    /// Free massless field at the spec's β.
    Free,
    Damped(&'a DampedPropagatorSpec),
}

/// Dissipation and noise kernels η(t), ν(t) in the dipole approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleKernels {
    pub eta: Estimate,
    pub nu: Estimate,
}

pub fn dipole_kernels(fspec: &FieldSpec, propagator: Propagator<'_>, t: f64) -> Result<DipoleKernels> {
    require_finite("t", t)?;
    let n = fspec.dimension as f64;
    let pref = fspec.coupling.powi(2) / (2.0 * n) * fspec.radial_measure();
    let mut settings = fspec.quad.clone().with_breakpoints(fspec.breakpoints());
    if let (Propagator::Free, true) = (propagator, t != 0.0) {
        settings = settings.with_period(2.0 * PI / t.abs());
    }
    let power = fspec.dimension as i32 + 1;
    let weight = |k: f64| powered_window(&fspec.window, k, power);
    let prop = |k: f64| -> (f64, f64) {
        if k <= 0.0 {
            return (0.0, 0.0);
        }
        let r = match propagator {
            Propagator::Free => propagators_free(k, t, fspec.beta),
            Propagator::Damped(p) => propagators_damped(p, k, t),
        };
        r.unwrap_or((f64::NAN, f64::NAN))
    };
    let diverged = |what: &str, e: Error| match e {
        Error::NonFinite { .. } => Error::Quadrature(format!("{what}({t}) diverges: {e}")),
        other => other,
    };
    let eta = integrate_semi_infinite(|k| weight(k) * prop(k).0, &settings).map_err(|e| diverged("η", e))?;
    let nu = integrate_semi_infinite(|k| weight(k) * prop(k).1, &settings).map_err(|e| diverged("ν", e))?;
    Ok(DipoleKernels { eta: eta.scaled(pref), nu: nu.scaled(pref) })
}

/// Local master-equation coefficients V_n(r), V_d(r) of the overdamped field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overdamped {
    pub v_n: f64,
    pub v_d: f64,
}

/// 1 − ⟨cos k⃗·r⃗⟩ over directions, with x = kr.
fn decoherence_average(n: u32, x: f64) -> f64 {
    if n == 1 {
        2.0 * (0.5 * x).sin().powi(2)
    } else {
        one_minus_sinc(x)
    }
}

/// ⟨(k⃗·r⃗) sin k⃗·r⃗⟩ over directions, with x = kr.
fn dissipation_average(n: u32, x: f64) -> f64 {
    if n == 1 {
        x * x.sin()
    } else if x < 0.1 {
        let x2 = x * x;
        x2 / 3.0 * (1.0 - x2 / 10.0 * (1.0 - x2 / 28.0 * (1.0 - x2 / 54.0)))
    } else {
        x.sin() / x - x.cos()
    }
}

/// k^p·f_k² without forming inf·0 at large k.
fn powered_window(window: &CouplingProfile, k: f64, p: i32) -> f64 {
    if let Some(gamma) = window.lorentzian_cutoff() {
        if k > gamma {
            let r = gamma / k;
            return gamma * gamma * k.powi(p - 2) / (1.0 + r * r);
        }
    }
    let f2 = window.window_sq(k);
    if f2 == 0.0 {
        0.0
    } else {
        f2 * k.powi(p)
    }
}

pub(crate) fn one_minus_sinc(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let x2 = x * x;
        x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        1.0 - x.sin() / x
    }
}

/// V_n is taken real (the decay rate) and V_d as the coefficient of i in
/// the printed k⃗·r⃗ e^{ik⃗·r⃗} integral, whose angular average is purely
/// imaginary.
pub fn overdamped_vn_vd(fspec: &FieldSpec, pspec: &DampedPropagatorSpec, r: f64) -> Result<Overdamped> {
    require_finite("r", r)?;
    if r < 0.0 {
        return Err(domain("r must be non-negative"));
    }
    let n = fspec.dimension;
    let pref = 0.5 * fspec.coupling.powi(2) * fspec.radial_measure();
    let settings = fspec.quad.clone().with_breakpoints(fspec.breakpoints());
    let modes = |k: f64| -> (f64, f64, f64) {
        let m = pspec.modes(k).and_then(|(w, l)| Ok((w, l, pspec.thermal_weights(w, l)?.0)));
        m.unwrap_or((f64::NAN, f64::NAN, f64::NAN))
    };
    let noise_weight = |k: f64| {
        if k <= 0.0 {
            return 0.0;
        }
        let (w, l, s) = modes(k);
        powered_window(&fspec.window, k, n as i32 - 1) / (l * w) * s
    };
    let damping_weight = |k: f64| {
        if k <= 0.0 {
            return 0.0;
        }
        powered_window(&fspec.window, k, n as i32 - 1) / modes(k).1.powi(3)
    };
    // the r → 0 limit also bounds ∫|integrand| of V_d for every r
    let share = if n == 1 { 1.0 } else { 1.0 / 3.0 };
    let v_d0 =
        integrate_semi_infinite(|k| share * k * k * damping_weight(k), &settings).and_then(|e| e.require("V_d(0)"))?;
    if r == 0.0 {
        return Ok(Overdamped { v_n: 0.0, v_d: pref * v_d0 });
    }

    let full_n = |k: f64| noise_weight(k) * decoherence_average(n, k * r);
    let neg = |k: f64| -noise_weight(k);
    let neg_over_kr = |k: f64| -noise_weight(k) / (k * r);
    let term = if n == 1 {
        OscillatoryTerm { envelope: &neg, frequency: r, wave: Wave::Cos }
    } else {
        OscillatoryTerm { envelope: &neg_over_kr, frequency: r, wave: Wave::Sin }
    };
    let v_n = integrate_trigonometric(full_n, noise_weight, &[term], &settings).and_then(|e| e.require("V_n"))?;

    let full_d = |k: f64| damping_weight(k) * dissipation_average(n, k * r) / (r * r);
    let k_over_r = |k: f64| damping_weight(k) * k / r;
    let over_kr3 = |k: f64| damping_weight(k) / (k * r.powi(3));
    let neg_over_r2 = |k: f64| -damping_weight(k) / (r * r);
    let terms = if n == 1 {
        vec![OscillatoryTerm { envelope: &k_over_r, frequency: r, wave: Wave::Sin }]
    } else {
        vec![
            OscillatoryTerm { envelope: &over_kr3, frequency: r, wave: Wave::Sin },
            OscillatoryTerm { envelope: &neg_over_r2, frequency: r, wave: Wave::Cos },
        ]
    };
    let d_settings = settings.clone().with_tolerances(settings.rel_tol * v_d0.abs(), settings.rel_tol);
    let v_d = integrate_trigonometric(full_d, |_| 0.0, &terms, &d_settings).and_then(|e| e.require("V_d"))?;
    Ok(Overdamped { v_n: pref * v_n, v_d: pref * v_d })
}

/// Power dissipated by a charge Q moving at speed v a height z above a
/// conductor of resistivity ρ_r, optionally under a semiconducting layer of
/// thickness b.
pub fn plate_power(charge: f64, resistivity: f64, speed: f64, height: f64, layer: Option<f64>) -> Result<f64> {
    for (name, x) in [("Q", charge), ("ρ_r", resistivity), ("v", speed), ("z", height)] {
        require_finite(name, x)?;
        if x <= 0.0 {
            return Err(domain(format!("{name} must be positive")));
        }
    }
    let p = charge * charge * resistivity * speed * speed / (16.0 * PI * height.powi(3));
    match layer {
        None => Ok(p),
        Some(b) => {
            require_finite("b", b)?;
            if b <= 0.0 || b >= height {
                return Err(domain("layer thickness must satisfy 0 < b < z"));
            }
            Ok(p * 2.0 * b / (3.0 * height))
        }
    }
}

pub(crate) fn lorentzian_cutoff(fspec: &FieldSpec) -> Result<f64> {
    fspec
        .window
        .lorentzian_cutoff()
        .ok_or_else(|| Error::Domain("closed forms need the Lorentzian window".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_propagators() {
        let (gr, gh) = propagators_free(2.0, 0.0, f64::INFINITY).unwrap();
        assert_eq!(gr, 0.0);
        assert_eq!(gh, 0.25);
        assert!(propagators_free(0.0, 1.0, 1.0).is_err());
        let (beta, k, dt): (f64, f64, f64) = (1e-3, 0.7, 1.3);
        let x = beta * k;
        let series = (dt * k).cos() / (2.0 * k) * (2.0 / x + x / 6.0 - x.powi(3) / 360.0);
        assert!((propagators_free(k, dt, beta).unwrap().1 / series - 1.0).abs() < 1e-12);
    }

    #[test]
    fn damped_reduces_to_free() {
        let p = DampedPropagatorSpec::massless(0.0, 0.8).unwrap();
        for (k, dt) in [(0.3, 1.0), (2.0, -0.7), (5.0, 3.0)] {
            let a = propagators_free(k, dt, 0.8).unwrap();
            let b = propagators_damped(&p, k, dt).unwrap();
            assert!((a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-13 * a.1.abs().max(1.0));
        }
    }

    #[test]
    fn damped_parity() {
        let p = DampedPropagatorSpec::new(|k| (k * k + 0.25).sqrt(), |k| 0.3 + 0.1 * k, 1.7).unwrap();
        for dt in [0.2, 1.1, 4.0] {
            let (a, b) = (propagators_damped(&p, 1.3, dt).unwrap(), propagators_damped(&p, 1.3, -dt).unwrap());
            assert_eq!(a.0, -b.0);
            assert_eq!(a.1, b.1);
        }
    }

    #[test]
    fn degenerate_denominator_is_reported() {
        let p = DampedPropagatorSpec::new(|_| 1e-9, |_| 0.0, 1.0).unwrap();
        assert!(propagators_damped(&p, 1.0, 0.5).is_err());
    }

    #[test]
    fn plate_scaling() {
        let p = plate_power(1.0, 2.0, 3.0, 0.5, None).unwrap();
        assert!((plate_power(1.0, 2.0, 3.0, 1.0, None).unwrap() * 8.0 / p - 1.0).abs() < 1e-15);
        assert!((plate_power(1.0, 2.0, 6.0, 0.5, None).unwrap() / (4.0 * p) - 1.0).abs() < 1e-15);
        let l = plate_power(1.0, 2.0, 3.0, 0.5, Some(0.1)).unwrap();
        let l2 = plate_power(1.0, 2.0, 3.0, 1.0, Some(0.1)).unwrap();
        assert!((l / l2 / 16.0 - 1.0).abs() < 1e-14);
        assert!(plate_power(1.0, 2.0, 3.0, 0.5, Some(0.5)).is_err());
        assert!(plate_power(0.0, 2.0, 3.0, 0.5, None).is_err());
    }

    #[test]
    fn series_branches_are_continuous() {
        for f in [one_minus_sinc as fn(f64) -> f64, |x| dissipation_average(3, x)] {
            let (a, b) = (f(0.1 - 1e-15), f(0.1 + 1e-15));
            assert!((a - b).abs() < 1e-15);
        }
    }
}
