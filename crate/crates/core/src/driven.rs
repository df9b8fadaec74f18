//! Cat states prepared by a finite-duration drive α(t): spectral weight of the
//! diagonalized particle-plus-bath modes, the four kernels r, s, y, z and the
//! drive-convolved decoherence exponent.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::curve::SampledCurve;
use crate::error::{domain, Error, Result};
use crate::numerics::{integrate_semi_infinite, integrate_trigonometric, Estimate, OscillatoryTerm, QuadratureSettings, Wave};
use crate::params::{DriveProfile, OscillatorSpec};

/// p²(ω) = g²ω⁴Γ² / (π(ω²+Γ²)[(ω²−Ω²+γ²)² + 4Ω²γ²]).
pub fn spectral_weight_p2(spec: &OscillatorSpec, w: f64) -> Result<f64> {
    if !(w > 0.0) || !w.is_finite() {
        return Err(domain("spectral weight needs ω > 0"));
    }
    Ok(raw_weight(spec, w))
}

fn raw_weight(spec: &OscillatorSpec, w: f64) -> f64 {
    let (om, g, gc) = (spec.frequency(), spec.dissipation(), spec.cutoff());
    let w2 = w * w;
    let detuning = w2 - om * om + g * g;
    spec.coupling_squared() * w2 * w2 * gc * gc
        / (PI * (w2 + gc * gc) * (detuning * detuning + 4.0 * om * om * g * g))
}

/// How the exponent is scaled by the cat separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentScaling {
    /// Every α enters as a·α, so the exponent carries a factor a².
    #[default]
    Repaired,
    /// The bare expression in α without the separation.
    AsPrinted,
}

/// r, s, y, z on a uniform grid over [0, t_max].
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSet {
    pub r: SampledCurve,
    pub s: SampledCurve,
    pub y: SampledCurve,
    pub z: SampledCurve,
    /// 1 − y computed directly, free of cancellation at short times.
    pub y_deficit: SampledCurve,
    pub omega1: f64,
    pub omega2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub r: f64,
    pub s: f64,
    pub y: f64,
    pub z: f64,
    pub y_deficit: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenExponent {
    pub value: f64,
    /// Set when the exponent came out negative; the value is kept as is.
    pub negative: bool,
    /// ∫∫α(t′)α(t″)u(|t′−t″|) with u = 1 − y, on the full square.
    pub double_integral: f64,
    /// The same integral as twice the lower triangle, iterated.
    pub double_integral_iterated: f64,
    pub y_convolution: f64,
    pub z_convolution: f64,
}

/// Spectral weight with the sum-rule normalization (1/M)∫p̃²/ω² = 1 and the
/// two derived frequencies.
#[derive(Debug, Clone)]
pub struct DrivenModel {
    spec: OscillatorSpec,
    settings: QuadratureSettings,
    scale: f64,
    omega1: f64,
    omega2: f64,
}

impl DrivenModel {
    pub fn new(spec: &OscillatorSpec, settings: &QuadratureSettings) -> Result<Self> {
        spec.require_weak_coupling_regime()?;
        if spec.dissipation() <= 0.0 {
            return Err(domain("driven kernels need γ > 0"));
        }
        let mut model = Self {
            spec: spec.clone(),
            settings: settings.clone().without_period(),
            scale: 1.0,
            omega1: 1.0,
            omega2: 1.0,
        };
        let m = spec.mass();
        let sum_rule = model.moment(-2, "spectral sum rule")?;
        model.scale = m / sum_rule;
        model.omega1 = model.scale * model.moment(-1, "Ω₁")? / m;
        model.omega2 = m / (model.scale * model.moment(-3, "Ω₂")?);
        Ok(model)
    }

    pub fn spec(&self) -> &OscillatorSpec {
        &self.spec
    }

    /// M / ∫p²/ω²: the factor applied to the printed weight.
    pub fn normalization_scale(&self) -> f64 {
        self.scale
    }

    pub fn frequencies(&self) -> (f64, f64) {
        (self.omega1, self.omega2)
    }

    pub fn weight(&self, w: f64) -> f64 {
        self.scale * raw_weight(&self.spec, w)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (om, g, gc) = (self.spec.frequency(), self.spec.dissipation(), self.spec.cutoff());
        let mut b = vec![om, 2.0 * om, 10.0 * om, gc];
        for k in [5.0, 50.0] {
            b.push(om + k * g);
            if om - k * g > 0.0 {
                b.push(om - k * g);
            }
        }
        b
    }

    fn moment(&self, power: i32, what: &str) -> Result<f64> {
        let s = self.settings.clone().with_breakpoints(self.breakpoints());
        let spec = &self.spec;
        integrate_semi_infinite(|w| raw_weight(spec, w) * w.powi(power), &s)?.require(what)
    }

    /// ∫p̃² ω^power dω for power −1, −2, −3.
    fn normalized_moment(&self, power: i32) -> f64 {
        let m = self.spec.mass();
        match power {
            -1 => m * self.omega1,
            -3 => m / self.omega2,
            _ => m,
        }
    }

    /// ∫p̃² ω^power trig(ωt) dω. The absolute tolerance is taken relative
    /// to the t = 0 moment, shrunk by Γt for the sine transforms that vanish
    /// at t = 0.
    fn transform(&self, power: i32, t: f64, cosine: bool) -> Result<Estimate> {
        let shrink = if cosine { 1.0 } else { (self.spec.cutoff() * t).min(1.0) };
        let abs_tol = self.settings.abs_tol.max(self.settings.rel_tol * shrink * self.normalized_moment(power));
        let mut s = self
            .settings
            .clone()
            .with_tolerances(abs_tol, self.settings.rel_tol)
            .with_breakpoints(self.breakpoints());
        if t > 0.0 {
            s = s.with_period(2.0 * PI / t);
        }
        let f = |w: f64| {
            let trig = if cosine { (w * t).cos() } else { (w * t).sin() };
            self.weight(w) * w.powi(power) * trig
        };
        integrate_semi_infinite(f, &s)
    }

    /// ∫p̃²/ω (1 − cos ωt) dω, integrated as 2 sin²(ωt/2) near the origin.
    fn cosine_deficit(&self, t: f64) -> Result<Estimate> {
        let g = |w: f64| self.weight(w) / w;
        let full = |w: f64| {
            let h = (0.5 * w * t).sin();
            2.0 * h * h * g(w)
        };
        let envelope = |w: f64| -g(w);
        let terms = [OscillatoryTerm { envelope: &envelope, frequency: t, wave: Wave::Cos }];
        let s = self.settings.clone().with_breakpoints(self.breakpoints());
        integrate_trigonometric(full, g, &terms, &s)
    }

    /// r, s, y, z and 1 − y at one time.
    pub fn kernel_values(&self, t: f64) -> Result<KernelSample> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(domain("kernel time must be non-negative"));
        }
        let m = self.spec.mass();
        let fail = |e: Error| match e {
            Error::Quadrature(msg) => Error::Quadrature(format!("kernel at t = {t}: {msg}")),
            other => other,
        };
        let get = |power: i32, cosine: bool, what: &str| -> Result<f64> {
            if t == 0.0 && !cosine {
                return Ok(0.0);
            }
            self.transform(power, t, cosine)?.require(what).map_err(fail)
        };
        let y_deficit = if t == 0.0 { 0.0 } else { self.cosine_deficit(t)?.require("1 − y").map_err(fail)? / (m * self.omega1) };
        Ok(KernelSample {
            r: get(-2, true, "r")? / m,
            s: get(-1, false, "s")? / (m * self.omega2),
            y: 1.0 - y_deficit,
            z: get(-2, false, "z")? / m,
            y_deficit,
        })
    }

    pub fn kernels(&self, t_max: f64, n_samples: usize) -> Result<KernelSet> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(domain("t_max must be positive"));
        }
        if n_samples < 64 {
            return Err(domain("kernels need at least 64 samples"));
        }
        let step = t_max / (n_samples - 1) as f64;
        let rows = (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let t = if i == n_samples - 1 { t_max } else { i as f64 * step };
                self.kernel_values(t)
            })
            .collect::<Result<Vec<_>>>()?;
        let column = |f: fn(&KernelSample) -> f64| SampledCurve::new(0.0, step, rows.iter().map(f).collect());
        Ok(KernelSet {
            r: column(|k| k.r)?,
            s: column(|k| k.s)?,
            y: column(|k| k.y)?,
            z: column(|k| k.z)?,
            y_deficit: column(|k| k.y_deficit)?,
            omega1: self.omega1,
            omega2: self.omega2,
        })
    }

    /// D_α(t) from kernels covering [0, t].
    ///
    /// With A = ∫α and u = 1 − y the y terms are rearranged as
    /// ∫∫ααy − (∫αy)² = 2A∫αu − ∫∫ααu − (∫αu)², which drops the A² pieces
    /// that cancel identically.
    pub fn exponent(
        &self,
        drive: &DriveProfile,
        kernels: &KernelSet,
        t: f64,
        scaling: ExponentScaling,
    ) -> Result<DrivenExponent> {
        let m = self.spec.mass();
        let a2 = match scaling {
            ExponentScaling::Repaired => self.spec.separation().powi(2),
            ExponentScaling::AsPrinted => 1.0,
        };
        let total = drive_integral(drive, &kernels.y_deficit, t)?;
        let uc = drive_convolution(drive, &kernels.y_deficit, t)?;
        let zc = drive_convolution(drive, &kernels.z, t)?;
        let (square, triangle) = self_convolution(drive, &kernels.y_deficit, t)?;
        let y_part = 2.0 * total * uc - square - uc * uc;
        let value = a2 * (m * kernels.omega1 * y_part - m * kernels.omega2 * zc * zc);
        let negative = value < 0.0;
        if negative {
            log::warn!("driven decoherence exponent is negative at t = {t}: {value}");
        }
        Ok(DrivenExponent {
            value,
            negative,
            double_integral: square,
            double_integral_iterated: triangle,
            y_convolution: total - uc,
            z_convolution: zc,
        })
    }
}

pub fn frequencies_omega12(spec: &OscillatorSpec) -> Result<(f64, f64)> {
    Ok(DrivenModel::new(spec, &QuadratureSettings::default())?.frequencies())
}

pub fn kernels(spec: &OscillatorSpec, t_max: f64, n_samples: usize) -> Result<KernelSet> {
    DrivenModel::new(spec, &QuadratureSettings::default())?.kernels(t_max, n_samples)
}

fn require_coverage(kernel: &SampledCurve, t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(domain("convolution time must be non-negative"));
    }
    if !kernel.contains(0.0) || !kernel.contains(t) {
        return Err(Error::Coverage(format!(
            "kernel covers [{}, {}], needed [0, {t}]",
            kernel.start(),
            kernel.end()
        )));
    }
    Ok(())
}

/// Trapezoid nodes on [0, t]: the kernel grid points below t, then t itself.
fn nodes(kernel: &SampledCurve, t: f64) -> Vec<(f64, f64)> {
    let h = kernel.step();
    let full = (t / h * (1.0 + 1e-12)).floor() as usize;
    let mut x: Vec<f64> = (0..=full).map(|j| (j as f64 * h).min(t)).collect();
    if t - x[full] > 1e-12 * h {
        x.push(t);
    }
    let n = x.len();
    let mut w = vec![0.0; n];
    for j in 0..n - 1 {
        let d = 0.5 * (x[j + 1] - x[j]);
        w[j] += d;
        w[j + 1] += d;
    }
    x.into_iter().zip(w).collect()
}

fn drive_samples(drive: &DriveProfile, xs: &[(f64, f64)]) -> Result<Vec<f64>> {
    xs.iter()
        .map(|&(x, _)| drive.value(x).expect("regular drive").map_err(coverage))
        .collect()
}

fn coverage(e: Error) -> Error {
    match e {
        Error::OutOfRange { x, lo, hi } => Error::Coverage(format!("drive covers [{lo}, {hi}], needed {x}")),
        other => other,
    }
}

/// ∫₀ᵗ α(t′)·kernel(t − t′) dt′; a delta of strength c gives c·kernel(t).
pub fn drive_convolution(drive: &DriveProfile, kernel: &SampledCurve, t: f64) -> Result<f64> {
    require_coverage(kernel, t)?;
    if let DriveProfile::Delta { strength } = drive {
        return Ok(strength * kernel.eval(t)?);
    }
    let xs = nodes(kernel, t);
    let alpha = drive_samples(drive, &xs)?;
    let mut sum = 0.0;
    for (&(x, w), a) in xs.iter().zip(&alpha) {
        sum += w * a * kernel.eval((t - x).max(0.0))?;
    }
    Ok(sum)
}

/// ∫α over [0, t] on the kernel's trapezoid nodes.
fn drive_integral(drive: &DriveProfile, kernel: &SampledCurve, t: f64) -> Result<f64> {
    require_coverage(kernel, t)?;
    if let DriveProfile::Delta { strength } = drive {
        return Ok(*strength);
    }
    let xs = nodes(kernel, t);
    let alpha = drive_samples(drive, &xs)?;
    Ok(xs.iter().zip(&alpha).map(|(&(_, w), a)| w * a).sum())
}

/// ∫∫α(t′)α(t″)k(|t′−t″|) over [0, t]², as a full-square tensor trapezoid and
/// as twice the iterated lower triangle.
fn self_convolution(drive: &DriveProfile, kernel: &SampledCurve, t: f64) -> Result<(f64, f64)> {
    require_coverage(kernel, t)?;
    if let DriveProfile::Delta { strength } = drive {
        let v = strength * strength * kernel.eval(0.0)?;
        return Ok((v, v));
    }
    let xs = nodes(kernel, t);
    let alpha = drive_samples(drive, &xs)?;
    let n = xs.len();
    let lag = |i: usize, j: usize| kernel.eval((xs[i].0 - xs[j].0).abs());
    let mut square = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += xs[j].1 * alpha[j] * lag(i, j)?;
        }
        square += xs[i].1 * alpha[i] * row;
    }
    let mut triangle = 0.0;
    for i in 1..n {
        let mut inner = 0.0;
        for j in 0..i {
            let d = 0.5 * (xs[j + 1].0 - xs[j].0);
            inner += d * (alpha[j] * lag(i, j)? + alpha[j + 1] * lag(i, j + 1)?);
        }
        triangle += xs[i].1 * alpha[i] * inner;
    }
    Ok((square, 2.0 * triangle))
}

/// Kernel samples per cutoff time 1/Γ used by `decoherence_exponent_driven`.
pub const KERNEL_DENSITY: f64 = 5.0;

/// D_α(t) with kernels resolved on the cutoff scale.
pub fn decoherence_exponent_driven(spec: &OscillatorSpec, drive: &DriveProfile, t: f64) -> Result<DrivenExponent> {
    let model = DrivenModel::new(spec, &QuadratureSettings::default())?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(domain("t must be non-negative"));
    }
    if t == 0.0 {
        return Ok(DrivenExponent {
            value: 0.0,
            negative: false,
            double_integral: 0.0,
            double_integral_iterated: 0.0,
            y_convolution: 0.0,
            z_convolution: 0.0,
        });
    }
    let n = if drive.is_delta() { 64 } else { 257usize.max((KERNEL_DENSITY * spec.cutoff() * t).ceil() as usize + 1) };
    let k = model.kernels(t, n)?;
    model.exponent(drive, &k, t, ExponentScaling::Repaired)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_oscillator_spec;

    fn spec() -> OscillatorSpec {
        make_oscillator_spec(1.0, 1.0, 1e-3, 1e3, 1.0, 1.0, true).unwrap()
    }

    #[test]
    fn weight_limits() {
        let s = spec();
        let w = 1e-3;
        let ratio = spectral_weight_p2(&s, w).unwrap() / spectral_weight_p2(&s, 2.0 * w).unwrap();
        assert!((ratio - 1.0 / 16.0).abs() < 1e-3);
        assert!(spectral_weight_p2(&s, 1.0).unwrap() > 10.0 * spectral_weight_p2(&s, 2.0).unwrap());
        let w = 1e5;
        let tail = s.coupling_squared() * 1e6 / (PI * w * w);
        assert!((spectral_weight_p2(&s, w).unwrap() / tail - 1.0).abs() < 1e-3);
        assert!(spectral_weight_p2(&s, 0.0).is_err());
    }

    #[test]
    fn normalization_is_close_to_pi() {
        let m = DrivenModel::new(&spec(), &QuadratureSettings::default()).unwrap();
        assert!((m.normalization_scale() / PI - 1.0).abs() < 1e-4);
        let (o1, o2) = m.frequencies();
        assert!(o1 > 1.0 && o2 > 0.0 && o2.is_finite());
    }

    #[test]
    fn endpoint_values() {
        let m = DrivenModel::new(&spec(), &QuadratureSettings::default()).unwrap();
        let k = m.kernel_values(0.0).unwrap();
        assert!((k.r - 1.0).abs() < 1e-8 && (k.y - 1.0).abs() < 1e-8);
        assert_eq!((k.s, k.z, k.y_deficit), (0.0, 0.0, 0.0));
    }

    #[test]
    fn delta_drive_reduces_to_kernels() {
        let m = DrivenModel::new(&spec(), &QuadratureSettings::default()).unwrap();
        let k = m.kernels(0.02, 64).unwrap();
        let t = 0.013;
        let d = m.exponent(&DriveProfile::kick(), &k, t, ExponentScaling::Repaired).unwrap();
        let (y, z) = (k.y.eval(t).unwrap(), k.z.eval(t).unwrap());
        let expected = 4.0 * (k.omega1 * (1.0 - y * y) - k.omega2 * z * z);
        assert!((d.value - expected).abs() < 1e-12 * expected.abs());
        let y_at = drive_convolution(&DriveProfile::kick(), &k.y, t).unwrap();
        assert_eq!(y_at, 2.0 * y);
    }

    #[test]
    fn separation_enters_squared() {
        let s = spec();
        let wide = s.with_separation(3.0).unwrap();
        let m1 = DrivenModel::new(&s, &QuadratureSettings::default()).unwrap();
        let m3 = DrivenModel::new(&wide, &QuadratureSettings::default()).unwrap();
        let k = m1.kernels(0.01, 64).unwrap();
        let d1 = m1.exponent(&DriveProfile::kick(), &k, 0.01, ExponentScaling::Repaired).unwrap();
        let d3 = m3.exponent(&DriveProfile::kick(), &k, 0.01, ExponentScaling::Repaired).unwrap();
        let bare = m3.exponent(&DriveProfile::kick(), &k, 0.01, ExponentScaling::AsPrinted).unwrap();
        assert!((d3.value / d1.value - 9.0).abs() < 1e-12);
        assert!((bare.value - d1.value).abs() < 1e-12 * d1.value);
    }

    #[test]
    fn convolution_analytic_cases() {
        let ones = SampledCurve::from_fn(0.0, 2.0, 2001, |_| 1.0).unwrap();
        let lam = 3.0;
        let t = 1.7;
        let v = drive_convolution(&DriveProfile::sine(1.0, lam).unwrap(), &ones, t).unwrap();
        let exact = (1.0 - (lam * t).cos()) / lam;
        assert!((v - exact).abs() < 1e-5);
        let zero = drive_convolution(&DriveProfile::sine(0.0, lam).unwrap(), &ones, t).unwrap();
        assert_eq!(zero, 0.0);
        assert!(matches!(
            drive_convolution(&DriveProfile::kick(), &ones, 3.0),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn zero_time_is_zero() {
        let d = decoherence_exponent_driven(&spec(), &DriveProfile::sine(1.0, 1.0).unwrap(), 0.0).unwrap();
        assert_eq!(d.value, 0.0);
    }
}
