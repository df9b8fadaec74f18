//! Adaptive Dormand–Prince 5(4) integration, forward or backward in time.

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OdeSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// First trial step magnitude; defaults to 1% of the interval.
    pub initial_step: Option<f64>,
}

impl Default for OdeSettings {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-12, max_steps: 200_000, initial_step: None }
    }
}

impl OdeSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(domain("ODE tolerances must be positive"));
        }
        if self.max_steps == 0 {
            return Err(domain("ODE step budget must be positive"));
        }
        Ok(())
    }
}

// Local error target as a fraction of the requested tolerance, so that the
// accumulated global error stays within it for smooth problems.
const LOCAL_SAFETY: f64 = 0.05;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combine<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        *o += h * acc;
    }
    out
}

fn check<const N: usize>(t: f64, v: [f64; N]) -> Result<[f64; N]> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFinite { x: t })
    }
}

/// Integrates y′ = rhs(t, y) from (t0, y0) to t1; t1 < t0 runs backward.
pub fn integrate<const N: usize, F>(mut rhs: F, t0: f64, y0: [f64; N], t1: f64, settings: &OdeSettings) -> Result<[f64; N]>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    settings.validate()?;
    if !t0.is_finite() || !t1.is_finite() {
        return Err(domain("ODE interval must be finite"));
    }
    let span = t1 - t0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut h = settings.initial_step.map_or(0.01 * span.abs(), f64::abs).min(span.abs()) * dir;
    let mut t = t0;
    let mut y = check(t, y0)?;
    let mut k1 = check(t, rhs(t, &y))?;
    for _ in 0..settings.max_steps {
        let remaining = t1 - t;
        if remaining * dir <= 0.0 {
            return Ok(y);
        }
        let last = (h * dir) >= (remaining * dir);
        if last {
            h = remaining;
        }
        let k2 = check(t, rhs(t + C2 * h, &combine(&y, h, &[(A21, &k1)])))?;
        let k3 = check(t, rhs(t + C3 * h, &combine(&y, h, &[(A31, &k1), (A32, &k2)])))?;
        let k4 = check(t, rhs(t + C4 * h, &combine(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)])))?;
        let k5 = check(
            t,
            rhs(t + C5 * h, &combine(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)])),
        )?;
        let k6 = check(
            t,
            rhs(t + h, &combine(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)])),
        )?;
        let y_new = combine(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let t_new = if last { t1 } else { t + h };
        let k7 = check(t_new, rhs(t_new, &y_new))?;
        let mut err = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let scale = LOCAL_SAFETY * (settings.abs_tol + settings.rel_tol * y[i].abs().max(y_new[i].abs()));
            err += (e / scale).powi(2);
        }
        let err = (err / N as f64).sqrt();
        if err <= 1.0 {
            t = t_new;
            y = check(t, y_new)?;
            k1 = k7;
            let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).min(5.0) };
            h *= grow;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            if (h.abs()) < 1e-15 * t.abs().max(span.abs()) {
                return Err(Error::StepLimit { steps: settings.max_steps, t });
            }
        }
    }
    if (t1 - t) * dir <= 0.0 {
        return Ok(y);
    }
    Err(Error::StepLimit { steps: settings.max_steps, t })
}

/// y(t_query) for the scalar problem y′ = rhs(t, y) with y(t_end) given.
pub fn ode_solve_final<F>(mut rhs: F, y_at_t_end: f64, t_end: f64, t_query: f64, settings: &OdeSettings) -> Result<f64>
where
    F: FnMut(f64, f64) -> f64,
{
    let y = integrate(|t, y: &[f64; 1]| [rhs(t, y[0])], t_end, [y_at_t_end], t_query, settings)?;
    Ok(y[0])
}
