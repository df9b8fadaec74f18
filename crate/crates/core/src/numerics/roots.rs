use crate::error::{domain, Error, Result};

const MAX_ITER: usize = 200;

/// Brent's bracketed root finder.
pub fn shoot_scalar<F>(mut residual: F, lo: f64, hi: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(tol > 0.0) || !lo.is_finite() || !hi.is_finite() {
        return Err(domain("bracket must be finite and tolerance positive"));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (residual(a), residual(b));
    if !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NonFinite { x: if fa.is_finite() { b } else { a } });
    }
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange { lo, hi, f_lo: fa, f_hi: fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = residual(b);
        if !fb.is_finite() {
            return Err(Error::NonFinite { x: b });
        }
    }
    Err(Error::MaxIterations(MAX_ITER))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_root_of_two() {
        let r = shoot_scalar(|x| x * x - 2.0, 1.0, 2.0, 1e-14).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn linear_root() {
        let r = shoot_scalar(|x| x - 0.3, -5.0, 5.0, 1e-14).unwrap();
        assert!((r - 0.3).abs() < 1e-14);
    }

    #[test]
    fn root_on_bracket_edge() {
        assert_eq!(shoot_scalar(|x| x - 1.0, 1.0, 3.0, 1e-12).unwrap(), 1.0);
        assert_eq!(shoot_scalar(|x| x - 3.0, 1.0, 3.0, 1e-12).unwrap(), 3.0);
    }

    #[test]
    fn no_sign_change() {
        assert!(matches!(shoot_scalar(|x| x * x + 1.0, -1.0, 1.0, 1e-12), Err(Error::NoSignChange { .. })));
    }
}
