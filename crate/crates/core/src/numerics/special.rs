//! Exponential integral and the derived functions used by the zero-temperature
//! field closed forms.

use crate::error::{domain, Result};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const SERIES_LIMIT: f64 = 30.0;
const KAPPA_SERIES_LIMIT: f64 = 2.0;

/// Σ_{n≥1} xⁿ/(n·n!)
fn ei_power_sum(x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    for n in 1..400 {
        let nf = n as f64;
        term *= x / nf;
        let add = term / nf;
        sum += add;
        if add.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

/// Σ_{n≥0} n!/xⁿ truncated at its smallest term (x large).
fn asymptotic_sum(x: f64, parity: Option<usize>) -> f64 {
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut n = 0usize;
    loop {
        if parity.is_none_or(|p| n % 2 == p) {
            sum += term;
        }
        let next = term * (n + 1) as f64 / x;
        if next >= term || next <= f64::EPSILON * sum.abs() * 0.01 {
            break;
        }
        term = next;
        n += 1;
    }
    sum
}

/// e^{y}·E₁(y) for y > 0, where E₁(y) = −Ei(−y).
pub fn exp_scaled_e1(y: f64) -> f64 {
    debug_assert!(y > 0.0);
    if y <= 1.0 {
        return y.exp() * (-EULER_GAMMA - y.ln() - ei_power_sum(-y));
    }
    // modified Lentz evaluation of the continued fraction
    let tiny = 1e-300;
    let mut b = y + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() <= f64::EPSILON {
            break;
        }
    }
    h
}

/// e^{−x}·Ei(x) for x > 0.
pub fn exp_scaled_ei(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= SERIES_LIMIT {
        (-x).exp() * (EULER_GAMMA + x.ln() + ei_power_sum(x))
    } else {
        asymptotic_sum(x, None) / x
    }
}

/// Ei(x), principal value for x > 0.
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if x == 0.0 || !x.is_finite() {
        return Err(domain("Ei is undefined at x = 0"));
    }
    if x > 0.0 {
        if x <= SERIES_LIMIT {
            Ok(EULER_GAMMA + x.ln() + ei_power_sum(x))
        } else {
            Ok(x.exp() / x * asymptotic_sum(x, None))
        }
    } else {
        let y = -x;
        if y <= 1.0 {
            Ok(EULER_GAMMA + y.ln() + ei_power_sum(x))
        } else {
            Ok(-(-y).exp() * exp_scaled_e1(y))
        }
    }
}

/// g(z) = ½[e^z Ei(−z) + e^{−z} Ei(z)].
pub fn symmetric_ei(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain("symmetric_ei requires z > 0"));
    }
    if z <= SERIES_LIMIT {
        Ok(0.5 * (exp_scaled_ei(z) - exp_scaled_e1(z)))
    } else {
        // odd terms of the two asymptotic series survive: Σ n!/z^{n+1}, n odd
        Ok(asymptotic_sum(z, Some(1)) / z)
    }
}

/// s(z) = ½[e^{−z} Ei(z) − e^z Ei(−z)], with s′ = −g.
pub fn antisymmetric_ei(z: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain("antisymmetric_ei requires z > 0"));
    }
    if z <= SERIES_LIMIT {
        Ok(0.5 * (exp_scaled_ei(z) + exp_scaled_e1(z)))
    } else {
        Ok(asymptotic_sum(z, Some(0)) / z)
    }
}

/// κ₁(z) = g − (1 + z²/2)(C + ln z) and κ₃(z) = C + ln z − g.
///
/// For small z both are evaluated from their power series
/// κ₃ = Σ_{m even} (H_m − C − ln z) z^m/m!, κ₁ = −¾z² − Σ_{m even ≥ 4} (H_m − C − ln z) z^m/m!.
pub fn kappa(n: u32, z: f64) -> Result<f64> {
    if n != 1 && n != 3 {
        return Err(domain(format!("kappa is defined for n = 1 or 3, got {n}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(domain("kappa requires z >= 0"));
    }
    let log_term = EULER_GAMMA + z.ln();
    if z <= KAPPA_SERIES_LIMIT {
        let z2 = z * z;
        let mut power = 1.0; // z^m/m!
        let mut harmonic = 0.0;
        let mut sum = 0.0; // Σ_{m even ≥ 4} (H_m − C − ln z) z^m/m!
        let mut leading = 0.0;
        for m in 1..=80usize {
            power *= z / m as f64;
            harmonic += 1.0 / m as f64;
            if m % 2 == 1 {
                continue;
            }
            let term = (harmonic - log_term) * power;
            if m == 2 {
                leading = term;
            } else {
                sum += term;
                if term.abs() <= 1e-18 * (sum.abs() + leading.abs()) {
                    break;
                }
            }
        }
        return Ok(if n == 3 { leading + sum } else { -0.75 * z2 - sum });
    }
    let g = symmetric_ei(z)?;
    Ok(if n == 3 { log_term - g } else { g - (1.0 + 0.5 * z * z) * log_term })
}

/// coth(x/2), stable at both ends.
pub fn coth_half(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(domain("coth_half requires x > 0"));
    }
    Ok(if x < 1e-4 {
        2.0 / x + x / 6.0
    } else if x > 40.0 {
        1.0
    } else {
        1.0 / (0.5 * x).tanh()
    })
}

/// coth(βk/2) with β = ∞ mapped to 1.
pub fn thermal_factor(beta: f64, k: f64) -> f64 {
    if beta.is_infinite() {
        1.0
    } else {
        coth_half(beta * k).unwrap_or(f64::INFINITY)
    }
}
