use crate::error::{domain, Error, Result};

/// Uniformly sampled scalar function, linearly interpolated between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCurve {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl SampledCurve {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !start.is_finite() || !step.is_finite() || step <= 0.0 {
            return Err(domain(format!("curve step must be positive and finite, got {step}")));
        }
        if values.len() < 2 {
            return Err(domain("curve needs at least 2 samples"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(domain(format!("curve sample {v} is not finite")));
        }
        Ok(Self { start, step, values })
    }

    /// Samples `f` at `n` points spanning `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || hi <= lo {
            return Err(domain("sampling needs n >= 2 and hi > lo"));
        }
        let step = (hi - lo) / (n - 1) as f64;
        let values = (0..n).map(|i| f(lo + step * i as f64)).collect();
        Self::new(lo, step, values)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * self.step;
        x >= self.start - slack && x <= self.end() + slack
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::OutOfRange { x, lo: self.start, hi: self.end() });
        }
        let last = self.values.len() - 1;
        let u = ((x - self.start) / self.step).max(0.0);
        let i = (u.floor() as usize).min(last - 1);
        let frac = (u - i as f64).clamp(0.0, 1.0);
        if frac == 0.0 {
            return Ok(self.values[i]);
        }
        if frac == 1.0 {
            return Ok(self.values[i + 1]);
        }
        Ok(self.values[i] + frac * (self.values[i + 1] - self.values[i]))
    }

    /// Like [`eval`](Self::eval) but zero outside the sampled range.
    pub fn eval_or_zero(&self, x: f64) -> f64 {
        self.eval(x).unwrap_or(0.0)
    }
}

pub fn curve_eval(curve: &SampledCurve, x: f64) -> Result<f64> {
    curve.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_linearly() {
        let c = SampledCurve::new(0.0, 1.0, vec![0.0, 2.0]).unwrap();
        assert_eq!(c.eval(0.5).unwrap(), 1.0);
        assert_eq!(c.eval(1.0).unwrap(), 2.0);
        assert!(matches!(c.eval(1.5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SampledCurve::new(0.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(SampledCurve::new(0.0, 1.0, vec![1.0]).is_err());
        assert!(SampledCurve::new(0.0, 1.0, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn interpolation_error_is_second_order() {
        let f = |x: f64| (1.3 * x).sin() + 0.2 * x * x;
        let probe: Vec<f64> = (0..97).map(|i| 0.013 + 0.0311 * i as f64).collect();
        let max_err = |n: usize| {
            let c = SampledCurve::from_fn(0.0, 3.0, n, f).unwrap();
            probe.iter().map(|&x| (c.eval(x).unwrap() - f(x)).abs()).fold(0.0, f64::max)
        };
        let coarse = max_err(33);
        let fine = max_err(65);
        assert!(coarse / fine >= 3.5, "ratio {}", coarse / fine);
    }
}
