use std::f64::consts::PI;

use crate::curve::SampledCurve;
use crate::error::{domain, require_finite, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileRole {
    /// Spatial window f(y), normalized so that ∫f² dy = 1.
    Spatial,
    /// Momentum-space window f_k with f_0 = 1.
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileShape {
    /// f ∝ exp(−width·x²).
    Gaussian { width: f64 },
    /// f_k² = Γ²/(k² + Γ²); spectral role only.
    Lorentzian { cutoff: f64 },
    Sampled(SampledCurve),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CouplingProfile {
    shape: ProfileShape,
    role: ProfileRole,
    norm: f64,
}

const EDGE_DECAY: f64 = 1e-6;

impl CouplingProfile {
    pub fn gaussian(width: f64, role: ProfileRole) -> Result<Self> {
        require_finite("profile width", width)?;
        if width <= 0.0 {
            return Err(domain("profile width must be positive"));
        }
        let norm = match role {
            ProfileRole::Spatial => (2.0 * width / PI).powf(0.25),
            ProfileRole::Spectral => 1.0,
        };
        Ok(Self { shape: ProfileShape::Gaussian { width }, role, norm })
    }

    pub fn lorentzian(cutoff: f64) -> Result<Self> {
        require_finite("Γ", cutoff)?;
        if cutoff <= 0.0 {
            return Err(domain("Γ must be positive"));
        }
        Ok(Self {
            shape: ProfileShape::Lorentzian { cutoff },
            role: ProfileRole::Spectral,
            norm: 1.0,
        })
    }

    /// Tabulated profile. Spatial curves must decay at both edges and are
    /// rescaled to unit ∫f²; spectral curves are sampled on k ≥ 0 and
    /// vanish beyond the last sample.
    pub fn sampled(curve: SampledCurve, role: ProfileRole) -> Result<Self> {
        let v = curve.values();
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if peak == 0.0 {
            return Err(domain("sampled profile is identically zero"));
        }
        let norm = match role {
            ProfileRole::Spatial => {
                let (first, last) = (v[0].abs(), v[v.len() - 1].abs());
                if first > EDGE_DECAY * peak || last > EDGE_DECAY * peak {
                    return Err(domain("sampled spatial profile must decay below 1e-6 of its peak at the grid edges"));
                }
                // exact ∫f² of the piecewise-linear interpolant
                let h = curve.step();
                let sq: f64 = v.windows(2).map(|w| h / 3.0 * (w[0] * w[0] + w[0] * w[1] + w[1] * w[1])).sum();
                1.0 / sq.sqrt()
            }
            ProfileRole::Spectral => {
                if curve.start() < 0.0 {
                    return Err(domain("sampled spectral window must start at k >= 0"));
                }
                1.0
            }
        };
        Ok(Self { shape: ProfileShape::Sampled(curve), role, norm })
    }

    pub fn shape(&self) -> &ProfileShape {
        &self.shape
    }

    pub fn role(&self) -> ProfileRole {
        self.role
    }

    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// Normalized profile value f(x) (or f_k).
    pub fn value(&self, x: f64) -> f64 {
        let raw = match &self.shape {
            ProfileShape::Gaussian { width } => (-width * x * x).exp(),
            ProfileShape::Lorentzian { cutoff } => cutoff / (x * x + cutoff * cutoff).sqrt(),
            ProfileShape::Sampled(c) => c.eval_or_zero(x),
        };
        self.norm * raw
    }

    /// f_k², computed without a square root where possible.
    pub fn window_sq(&self, k: f64) -> f64 {
        match &self.shape {
            ProfileShape::Lorentzian { cutoff } => cutoff * cutoff / (k * k + cutoff * cutoff),
            ProfileShape::Gaussian { width } => self.norm * self.norm * (-2.0 * width * k * k).exp(),
            ProfileShape::Sampled(_) => {
                let f = self.value(k);
                f * f
            }
        }
    }

    /// Sampled support, if bounded.
    pub fn support(&self) -> Option<(f64, f64)> {
        match &self.shape {
            ProfileShape::Sampled(c) => Some((c.start(), c.end())),
            _ => None,
        }
    }

    /// The Lorentzian cutoff Γ, if this is a Lorentzian window.
    pub fn lorentzian_cutoff(&self) -> Option<f64> {
        match self.shape {
            ProfileShape::Lorentzian { cutoff } => Some(cutoff),
            _ => None,
        }
    }

    /// A natural scale for quadrature breakpoints.
    pub fn scale(&self) -> f64 {
        match &self.shape {
            ProfileShape::Gaussian { width } => 1.0 / width.sqrt(),
            ProfileShape::Lorentzian { cutoff } => *cutoff,
            ProfileShape::Sampled(c) => c.end().abs().max(c.step()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spatial_gaussian_has_unit_square_integral() {
        let p = CouplingProfile::gaussian(2.0, ProfileRole::Spatial).unwrap();
        let h = 1e-3;
        let s: f64 = (-8000..=8000).map(|i| p.value(i as f64 * h).powi(2) * h).sum();
        assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sampled_spatial_profile_is_normalized() {
        let c = SampledCurve::from_fn(-12.0, 12.0, 2001, |x| 3.0 * (-x * x).exp()).unwrap();
        let p = CouplingProfile::sampled(c, ProfileRole::Spatial).unwrap();
        let h = 24.0 / 2000.0;
        let s: f64 = (0..2000)
            .map(|i| {
                let (a, b) = (p.value(-12.0 + i as f64 * h), p.value(-12.0 + (i + 1) as f64 * h));
                h / 3.0 * (a * a + a * b + b * b)
            })
            .sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sampled_spatial_profile_must_decay() {
        let c = SampledCurve::from_fn(-1.0, 1.0, 11, |x| (-x * x).exp()).unwrap();
        assert!(CouplingProfile::sampled(c, ProfileRole::Spatial).is_err());
    }

    #[test]
    fn lorentzian_window() {
        let p = CouplingProfile::lorentzian(2.0).unwrap();
        assert_eq!(p.window_sq(0.0), 1.0);
        assert!((p.window_sq(2.0) - 0.5).abs() < 1e-15);
        assert!((p.value(2.0).powi(2) - 0.5).abs() < 1e-15);
    }
}
