//! Decoherence exponent D_L(t) for two branches held a fixed distance L
//! apart by the free massless field.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::{lorentzian_cutoff, one_minus_sinc, FieldSpec};
use crate::error::{domain, require_finite, Result};
use crate::numerics::{
    antisymmetric_ei, integrate_trigonometric, kappa, symmetric_ei, thermal_factor, Estimate, OscillatoryTerm, Wave,
    EULER_GAMMA,
};

fn check_times(t: f64, l: f64) -> Result<()> {
    require_finite("t", t)?;
    require_finite("L", l)?;
    if t < 0.0 || l < 0.0 {
        return Err(domain("t and L must be non-negative"));
    }
    Ok(())
}

/// D_L(t) by quadrature over k.
pub fn decoherence_dl_numeric(fspec: &FieldSpec, t: f64, l: f64) -> Result<Estimate> {
    check_times(t, l)?;
    if t == 0.0 || l == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0, converged: true });
    }
    let g2 = fspec.coupling().powi(2);
    let beta = fspec.beta();
    let window = fspec.window();
    let one_d = fspec.dimension() == 1;
    let weight = |k: f64| {
        let base = window.window_sq(k) * thermal_factor(beta, k);
        if one_d {
            2.0 * g2 / PI * base / k.powi(3)
        } else {
            g2 / (PI * PI) * base / k
        }
    };
    let full = |k: f64| {
        if k <= 0.0 {
            return 0.0;
        }
        let s = (0.5 * k * t).sin();
        let angular = if one_d { 2.0 * (0.5 * k * l).sin().powi(2) } else { one_minus_sinc(k * l) };
        weight(k) * s * s * angular
    };

    // sin²(kt/2)·A(kL) = smooth part + cosines (n = 1) or cosine and sines (n = 3)
    let neg_half = |k: f64| -0.5 * weight(k);
    let quarter = |k: f64| 0.25 * weight(k);
    let neg_half_l = |k: f64| -0.5 * weight(k) / (k * l);
    let quarter_l = |k: f64| 0.25 * weight(k) / (k * l);
    let terms = if one_d {
        [
            OscillatoryTerm { envelope: &neg_half, frequency: t, wave: Wave::Cos },
            OscillatoryTerm { envelope: &neg_half, frequency: l, wave: Wave::Cos },
            OscillatoryTerm { envelope: &quarter, frequency: t + l, wave: Wave::Cos },
            OscillatoryTerm { envelope: &quarter, frequency: t - l, wave: Wave::Cos },
        ]
    } else {
        [
            OscillatoryTerm { envelope: &neg_half, frequency: t, wave: Wave::Cos },
            OscillatoryTerm { envelope: &neg_half_l, frequency: l, wave: Wave::Sin },
            OscillatoryTerm { envelope: &quarter_l, frequency: l + t, wave: Wave::Sin },
            OscillatoryTerm { envelope: &quarter_l, frequency: l - t, wave: Wave::Sin },
        ]
    };
    // a zero-frequency cosine belongs to the smooth part
    let coincident = one_d && t == l;
    let smooth = |k: f64| if coincident { 0.75 * weight(k) } else { 0.5 * weight(k) };
    let settings = fspec.quadrature().clone().with_breakpoints([1.0 / t, 1.0 / l, window.scale()]);
    integrate_trigonometric(full, smooth, &terms, &settings)
}

/// Which version of a closed form to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// Checked against the quadrature.
    Corrected,
    /// Transcribed literally, for comparison.
    Printed,
}

/// Leading high-temperature form, T = 1/β ≫ Γ.
pub fn decoherence_dl_high_t(fspec: &FieldSpec, t: f64, l: f64, form: ClosedForm) -> Result<f64> {
    check_times(t, l)?;
    let gamma = lorentzian_cutoff(fspec)?;
    let (u, v) = (gamma * t, gamma * l);
    if u == 0.0 || v == 0.0 {
        return Ok(0.0);
    }
    let g2t = fspec.coupling().powi(2) * fspec.temperature();
    let product = (-u).exp_m1() * (-v).exp_m1();
    if fspec.dimension() == 1 {
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        let branch = 0.5 * a * a * (b - a / 3.0) - a + (-b).exp() * a.sinh();
        return Ok(g2t / gamma.powi(3) * (product + branch));
    }
    let scale = g2t / (2.0 * PI * gamma);
    match form {
        ClosedForm::Printed => {
            let branch = if u < v { u - (-v).exp() * u.sinh() } else { v - (-u).exp() * v.sinh() };
            Ok(scale * (-product + scale * branch))
        }
        ClosedForm::Corrected => {
            let psi = if v > u {
                u + (-u).exp_m1() - u * u / (2.0 * v) + (-v).exp() * (u.cosh() - 1.0) / v
            } else {
                0.5 * v + (-u).exp_m1() + (-(-v).exp_m1() - (-u).exp() * v.sinh()) / v
            };
            Ok(scale * psi)
        }
    }
}

/// s(x) = ½[e^{−x}Ei(x) − e^{x}Ei(−x)], extended as an odd function.
fn odd_antisymmetric_ei(x: f64) -> Result<f64> {
    if x == 0.0 {
        Ok(0.0)
    } else {
        Ok(x.signum() * antisymmetric_ei(x.abs())?)
    }
}

fn x_ln_x(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.abs().ln()
    }
}

/// Zero-temperature form in terms of κ_n.
pub fn decoherence_dl_zero_t(fspec: &FieldSpec, t: f64, l: f64, form: ClosedForm) -> Result<f64> {
    check_times(t, l)?;
    let gamma = lorentzian_cutoff(fspec)?;
    let n = fspec.dimension();
    let (u, v) = (gamma * t, gamma * l);
    let combination = kappa(n, u)? + kappa(n, v)? - 0.5 * kappa(n, u + v)? - 0.5 * kappa(n, (u - v).abs())?;
    let g2 = fspec.coupling().powi(2);
    match (form, n) {
        (ClosedForm::Printed, _) => Ok(combination),
        (ClosedForm::Corrected, 1) => Ok(g2 / (PI * gamma * gamma) * combination),
        (ClosedForm::Corrected, _) => {
            if u == 0.0 || v == 0.0 {
                return Ok(0.0);
            }
            if v < SMALL_SEPARATION * u.min(1.0) {
                return Ok(g2 / (2.0 * PI * PI) * small_separation_series(u, v)?);
            }
            let logs = 0.5 * (x_ln_x(v + u) + x_ln_x(v - u)) - x_ln_x(v);
            let s = odd_antisymmetric_ei(v)? - 0.5 * odd_antisymmetric_ei(v + u)? - 0.5 * odd_antisymmetric_ei(v - u)?;
            Ok(g2 / (2.0 * PI * PI) * (kappa(3, u)? - (logs - s) / v))
        }
    }
}

/// Below v = SMALL_SEPARATION·min(u, 1) the n = 3 zero-temperature form is
/// summed as a series in v, since the closed expression cancels to O(v²).
const SMALL_SEPARATION: f64 = 0.5;

/// Σ_{m odd ≥ 3} [H_m − C − ln v − F⁽ᵐ⁾(u)] v^{m−1}/m!, where F(x) = x ln x + s(x),
/// F‴ = −g and F⁽ᵐ⁾ = F⁽ᵐ⁻²⁾ + (m − 4)!/u^{m−3}.
fn small_separation_series(u: f64, v: f64) -> Result<f64> {
    let log_term = EULER_GAMMA + v.ln();
    let mut derivative = -symmetric_ei(u)?;
    let mut harmonic = 1.0 + 0.5 + 1.0 / 3.0;
    let mut power = v * v / 6.0; // v^{m−1}/m!
    let mut factorial = 1.0; // (m − 2)!
    let mut sum = 0.0;
    let mut m = 3.0;
    while m < 80.0 {
        let term = (harmonic - log_term - derivative) * power;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        // advance m → m + 2
        derivative += factorial / u.powf(m - 1.0);
        factorial *= (m - 1.0) * m;
        harmonic += 1.0 / (m + 1.0) + 1.0 / (m + 2.0);
        power *= v * v / ((m + 1.0) * (m + 2.0));
        m += 2.0;
    }
    Ok(sum)
}

/// Temperature regime of a validation case.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thermal {
    High,
    Zero,
}

impl Thermal {
    pub fn label(self) -> &'static str {
        match self {
            Thermal::High => "highT",
            Thermal::Zero => "zeroT",
        }
    }
}

/// T/Γ used for the high-temperature comparison.
pub const HIGH_T_RATIO: f64 = 1000.0;
/// Largest accepted relative deviation between a closed form and the quadrature.
pub const VALIDATION_TOLERANCE: f64 = 5e-3;
/// Points with D below this fraction of the case maximum are not compared.
const RELEVANCE_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationPoint {
    /// Γt.
    pub u: f64,
    /// ΓL.
    pub v: f64,
    pub numeric: f64,
    pub converged: bool,
    pub corrected: f64,
    pub printed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseReport {
    pub dimension: u32,
    pub thermal: Thermal,
    pub points: Vec<ValidationPoint>,
    pub max_rel_corrected: f64,
    pub max_rel_printed: f64,
    /// max |D(t, L) − D(L, t)| / max D of the quadrature.
    pub asymmetry: f64,
    pub all_converged: bool,
}

impl CaseReport {
    pub fn passes(&self) -> bool {
        self.all_converged && self.max_rel_corrected < VALIDATION_TOLERANCE
    }

    /// True when the printed form needed correcting.
    pub fn printed_discrepant(&self) -> bool {
        !(self.max_rel_printed < VALIDATION_TOLERANCE)
    }

    pub fn name(&self) -> String {
        format!("n{}_{}", self.dimension, self.thermal.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub cases: Vec<CaseReport>,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.cases.iter().all(CaseReport::passes)
    }

    /// One row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("case,Gamma_t,Gamma_L,D_numeric,D_corrected,D_printed,rel_corrected,rel_printed\n");
        for case in &self.cases {
            let peak = case.points.iter().fold(0.0f64, |m, p| m.max(p.numeric.abs()));
            for p in &case.points {
                let (rc, rp) = relative(p, peak);
                let _ = writeln!(
                    out,
                    "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    case.name(),
                    p.u,
                    p.v,
                    p.numeric,
                    p.corrected,
                    p.printed,
                    rc,
                    rp
                );
            }
        }
        out
    }

    /// `key: value` lines summarising each case.
    pub fn summary_lines(&self) -> Vec<String> {
        self.cases
            .iter()
            .map(|c| {
                format!(
                    "validation.{}: max_rel_corrected={:.3e} max_rel_printed={:.3e} asymmetry={:.3e} printed_discrepant={} pass={}",
                    c.name(),
                    c.max_rel_corrected,
                    c.max_rel_printed,
                    c.asymmetry,
                    c.printed_discrepant(),
                    c.passes()
                )
            })
            .collect()
    }
}

fn relative(p: &ValidationPoint, peak: f64) -> (f64, f64) {
    if p.numeric.abs() <= RELEVANCE_FLOOR * peak || p.numeric == 0.0 {
        return (0.0, 0.0);
    }
    ((p.corrected / p.numeric - 1.0).abs(), (p.printed / p.numeric - 1.0).abs())
}

/// Compare quadrature and closed forms on an `n × n` grid of (Γt, ΓL) ∈ [0, extent]²
/// for n ∈ {1, 3} at high and zero temperature.
pub fn validate_closed_forms(coupling: f64, cutoff: f64, extent: f64, n: usize) -> Result<ValidationReport> {
    if n < 2 {
        return Err(domain("validation grid needs at least two points per axis"));
    }
    let mut cases = Vec::new();
    for dimension in [1, 3] {
        for thermal in [Thermal::High, Thermal::Zero] {
            let beta = match thermal {
                Thermal::High => 1.0 / (HIGH_T_RATIO * cutoff),
                Thermal::Zero => f64::INFINITY,
            };
            let fspec = FieldSpec::lorentzian(dimension, coupling, beta, cutoff)?;
            cases.push(validate_case(&fspec, thermal, extent, n)?);
        }
    }
    Ok(ValidationReport { cases })
}

fn validate_case(fspec: &FieldSpec, thermal: Thermal, extent: f64, n: usize) -> Result<CaseReport> {
    let gamma = lorentzian_cutoff(fspec)?;
    let axis = |i: usize| extent * i as f64 / (n - 1) as f64;
    let nodes: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
    let points = nodes
        .par_iter()
        .map(|&(i, j)| {
            let (u, v) = (axis(i), axis(j));
            let (t, l) = (u / gamma, v / gamma);
            let est = decoherence_dl_numeric(fspec, t, l)?;
            let closed = |form| match thermal {
                Thermal::High => decoherence_dl_high_t(fspec, t, l, form),
                Thermal::Zero => decoherence_dl_zero_t(fspec, t, l, form),
            };
            Ok(ValidationPoint {
                u,
                v,
                numeric: est.value,
                converged: est.converged,
                corrected: closed(ClosedForm::Corrected)?,
                printed: closed(ClosedForm::Printed)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let peak = points.iter().fold(0.0f64, |m, p| m.max(p.numeric.abs()));
    let (mut rc, mut rp) = (0.0f64, 0.0f64);
    for p in &points {
        let (a, b) = relative(p, peak);
        rc = rc.max(a);
        rp = rp.max(b);
    }
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((points[i * n + j].numeric - points[j * n + i].numeric).abs());
        }
    }
    Ok(CaseReport {
        dimension: fspec.dimension(),
        thermal,
        all_converged: points.iter().all(|p| p.converged),
        points,
        max_rel_corrected: rc,
        max_rel_printed: rp,
        asymmetry: if peak > 0.0 { asym / peak } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u32, beta: f64) -> FieldSpec {
        FieldSpec::lorentzian(n, 1.0, beta, 1.0).unwrap()
    }

    #[test]
    fn vanishes_at_zero_time_or_separation() {
        for n in [1, 3] {
            let s = spec(n, 0.01);
            assert_eq!(decoherence_dl_numeric(&s, 0.0, 2.0).unwrap().value, 0.0);
            assert_eq!(decoherence_dl_numeric(&s, 2.0, 0.0).unwrap().value, 0.0);
            for form in [ClosedForm::Corrected, ClosedForm::Printed] {
                assert_eq!(decoherence_dl_high_t(&s, 0.0, 1.0, form).unwrap(), 0.0);
                assert!(decoherence_dl_zero_t(&s, 1.5, 0.0, form).unwrap().abs() < 1e-15);
            }
        }
    }

    #[test]
    fn high_t_branches_meet() {
        for n in [1, 3] {
            let s = spec(n, 0.01);
            let at = decoherence_dl_high_t(&s, 2.0, 2.0, ClosedForm::Corrected).unwrap();
            let below = decoherence_dl_high_t(&s, 2.0 - 1e-9, 2.0, ClosedForm::Corrected).unwrap();
            let above = decoherence_dl_high_t(&s, 2.0 + 1e-9, 2.0, ClosedForm::Corrected).unwrap();
            assert!((below - at).abs() < 1e-7 * at && (above - at).abs() < 1e-7 * at);
        }
    }

    #[test]
    fn one_dimensional_forms_are_symmetric() {
        let s = spec(1, 0.01);
        for (t, l) in [(0.5, 3.0), (2.0, 7.0)] {
            let a = decoherence_dl_high_t(&s, t, l, ClosedForm::Corrected).unwrap();
            let b = decoherence_dl_high_t(&s, l, t, ClosedForm::Corrected).unwrap();
            assert!((a - b).abs() < 1e-12 * a);
            let n = |t, l| decoherence_dl_numeric(&s, t, l).unwrap().value;
            assert!((n(t, l) / n(l, t) - 1.0).abs() < 1e-8);
        }
        let z = spec(1, f64::INFINITY);
        let a = decoherence_dl_zero_t(&z, 0.7, 4.0, ClosedForm::Corrected).unwrap();
        let b = decoherence_dl_zero_t(&z, 4.0, 0.7, ClosedForm::Corrected).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_separation_series_joins_the_closed_form() {
        let s = spec(3, f64::INFINITY);
        for u in [0.05, 0.7, 1.0, 4.0, 30.0] {
            let v = SMALL_SEPARATION * f64::min(u, 1.0);
            let direct = decoherence_dl_zero_t(&s, u, v * (1.0 + 1e-12), ClosedForm::Corrected).unwrap();
            let series = small_separation_series(u, v).unwrap() / (2.0 * PI * PI);
            assert!((series / direct - 1.0).abs() < 1e-9, "u = {u}: {series} vs {direct}");
        }
    }

    #[test]
    fn odd_extension() {
        assert_eq!(odd_antisymmetric_ei(0.0).unwrap(), 0.0);
        assert_eq!(odd_antisymmetric_ei(-2.0).unwrap(), -odd_antisymmetric_ei(2.0).unwrap());
    }
}
