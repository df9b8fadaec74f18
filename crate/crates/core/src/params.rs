//! Parameter records shared by the model modules.
//!
//! Everything is in natural units with ħ = k_B = 1: temperatures are
//! energies, rates are inverse times, and `β = 1/T`.

use std::f64::consts::PI;

use crate::curve::SampledCurve;
use crate::error::{domain, require_finite, Result};

pub const REGIME_MESSAGE: &str = "regime Γ≫Ω≫γ violated";

/// Brownian particle plus Ohmic bath with a Lorentzian cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorSpec {
    mass: f64,
    frequency: f64,
    dissipation: f64,
    cutoff: f64,
    temperature: f64,
    separation: f64,
    strict_regime: bool,
}

impl OscillatorSpec {
    pub fn new(
        mass: f64,
        frequency: f64,
        dissipation: f64,
        cutoff: f64,
        temperature: f64,
        separation: f64,
        strict_regime: bool,
    ) -> Result<Self> {
        for (name, v) in [
            ("M", mass),
            ("Ω", frequency),
            ("γ", dissipation),
            ("Γ", cutoff),
            ("T", temperature),
            ("a", separation),
        ] {
            require_finite(name, v)?;
        }
        if mass <= 0.0 {
            return Err(domain("M must be positive"));
        }
        if frequency <= 0.0 {
            return Err(domain("Ω must be positive"));
        }
        if cutoff <= 0.0 {
            return Err(domain("Γ must be positive"));
        }
        if dissipation < 0.0 {
            return Err(domain("γ must be non-negative"));
        }
        if temperature < 0.0 {
            return Err(domain("T must be non-negative"));
        }
        if separation <= 0.0 {
            return Err(domain("a must be positive"));
        }
        let spec = Self {
            mass,
            frequency,
            dissipation,
            cutoff,
            temperature,
            separation,
            strict_regime,
        };
        if strict_regime && !spec.strict_ratios_hold() {
            return Err(domain(REGIME_MESSAGE));
        }
        Ok(spec)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn dissipation(&self) -> f64 {
        self.dissipation
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn separation(&self) -> f64 {
        self.separation
    }

    pub fn strict_regime(&self) -> bool {
        self.strict_regime
    }

    /// Inverse temperature; infinite at T = 0.
    pub fn beta(&self) -> f64 {
        if self.temperature == 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.temperature
        }
    }

    /// g² = 4Mγ/π.
    pub fn coupling_squared(&self) -> f64 {
        4.0 * self.mass * self.dissipation / PI
    }

    pub fn coupling(&self) -> f64 {
        self.coupling_squared().sqrt()
    }

    pub fn with_cutoff(&self, cutoff: f64) -> Result<Self> {
        Self::new(
            self.mass,
            self.frequency,
            self.dissipation,
            cutoff,
            self.temperature,
            self.separation,
            self.strict_regime,
        )
    }

    pub fn with_frequency(&self, frequency: f64) -> Result<Self> {
        Self::new(
            self.mass,
            frequency,
            self.dissipation,
            self.cutoff,
            self.temperature,
            self.separation,
            self.strict_regime,
        )
    }

    pub fn with_separation(&self, separation: f64) -> Result<Self> {
        Self::new(
            self.mass,
            self.frequency,
            self.dissipation,
            self.cutoff,
            self.temperature,
            separation,
            self.strict_regime,
        )
    }

    fn strict_ratios_hold(&self) -> bool {
        self.cutoff >= 10.0 * self.frequency && self.frequency >= 10.0 * self.dissipation
    }

    /// Checks the ordering Γ > Ω > γ (and the strict ratios if enabled).
    pub fn require_weak_coupling_regime(&self) -> Result<()> {
        let ordered = self.cutoff > self.frequency && self.frequency > self.dissipation;
        if !ordered || (self.strict_regime && !self.strict_ratios_hold()) {
            return Err(domain(REGIME_MESSAGE));
        }
        Ok(())
    }
}

pub fn make_oscillator_spec(
    mass: f64,
    frequency: f64,
    dissipation: f64,
    cutoff: f64,
    temperature: f64,
    separation: f64,
    strict_regime: bool,
) -> Result<OscillatorSpec> {
    OscillatorSpec::new(mass, frequency, dissipation, cutoff, temperature, separation, strict_regime)
}

/// The c-number drive α(t), in units of frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum DriveProfile {
    /// α(t) = strength·δ(t), with the full weight of the delta inside [0, t].
    Delta { strength: f64 },
    /// α(t) = amplitude·sin(rate·t).
    Sine { amplitude: f64, rate: f64 },
    /// Tabulated α(t) starting at α(0) = 0.
    Sampled(SampledCurve),
}

impl DriveProfile {
    /// The instantaneous kick α = 2δ(t).
    pub fn kick() -> Self {
        DriveProfile::Delta { strength: 2.0 }
    }

    pub fn sine(amplitude: f64, rate: f64) -> Result<Self> {
        require_finite("amplitude", amplitude)?;
        require_finite("rate", rate)?;
        Ok(DriveProfile::Sine { amplitude, rate })
    }

    pub fn sampled(curve: SampledCurve) -> Result<Self> {
        if curve.start() != 0.0 {
            return Err(domain("sampled drive must start at t = 0"));
        }
        let peak = curve.values().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if curve.values()[0].abs() > 1e-12 * peak.max(f64::MIN_POSITIVE) {
            return Err(domain("sampled drive must satisfy α(0) = 0"));
        }
        Ok(DriveProfile::Sampled(curve))
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, DriveProfile::Delta { .. })
    }

    /// α(t) for the regular variants; `None` for the delta.
    pub fn value(&self, t: f64) -> Option<Result<f64>> {
        match self {
            DriveProfile::Delta { .. } => None,
            DriveProfile::Sine { amplitude, rate } => Some(Ok(amplitude * (rate * t).sin())),
            DriveProfile::Sampled(c) => Some(c.eval(t)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_strict_spec() {
        let s = make_oscillator_spec(1.0, 1.0, 0.001, 1000.0, 100.0, 1.0, true).unwrap();
        assert_eq!(s.cutoff(), 1000.0);
    }

    #[test]
    fn strict_regime_rejects_weak_ratios() {
        let e = make_oscillator_spec(1.0, 1.0, 0.5, 2.0, 1.0, 1.0, true).unwrap_err();
        assert_eq!(e.to_string(), REGIME_MESSAGE);
    }

    #[test]
    fn coupling_inverts_dissipation() {
        let s = make_oscillator_spec(1.0, 1.0, 0.001, 1000.0, 100.0, 1.0, true).unwrap();
        let g2 = s.coupling_squared();
        assert!((g2 - 1.2732395447351627e-3).abs() < 1e-18);
        assert!((g2 * PI / (4.0 * s.mass()) - 0.001).abs() < 1e-18);
    }

    #[test]
    fn invariant_violations_are_named() {
        let e = make_oscillator_spec(-1.0, 1.0, 0.0, 10.0, 0.0, 1.0, false).unwrap_err();
        assert!(e.to_string().contains("M"));
        let e = make_oscillator_spec(1.0, 1.0, 0.0, 10.0, -1.0, 1.0, false).unwrap_err();
        assert!(e.to_string().contains("T"));
        let e = make_oscillator_spec(1.0, 1.0, 0.0, 10.0, 0.0, 0.0, false).unwrap_err();
        assert!(e.to_string().contains("a"));
        assert!(make_oscillator_spec(1.0, f64::NAN, 0.0, 10.0, 0.0, 1.0, false).is_err());
    }

    #[test]
    fn non_strict_allows_any_ordering_until_driven_use() {
        let s = make_oscillator_spec(1.0, 1.0, 0.5, 2.0, 1.0, 1.0, false).unwrap();
        assert!(s.require_weak_coupling_regime().is_ok());
        let s = make_oscillator_spec(1.0, 5.0, 0.5, 2.0, 1.0, 1.0, false).unwrap();
        assert!(s.require_weak_coupling_regime().is_err());
    }

    #[test]
    fn sampled_drive_must_start_at_zero() {
        let c = SampledCurve::new(0.0, 0.1, vec![1.0, 0.5, 0.0]).unwrap();
        assert!(DriveProfile::sampled(c).is_err());
        let c = SampledCurve::new(0.0, 0.1, vec![0.0, 0.5, 1.0]).unwrap();
        assert!(DriveProfile::sampled(c).is_ok());
    }
}
