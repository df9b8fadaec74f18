//! Uniform axes and the position-space density matrix ρ(x, x′).

use num_complex::Complex64;

use crate::error::{domain, require_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformAxis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl UniformAxis {
    pub fn new(start: f64, step: f64, len: usize) -> Result<Self> {
        require_finite("axis start", start)?;
        require_finite("axis step", step)?;
        if !(step > 0.0) {
            return Err(domain("axis step must be positive"));
        }
        if len < 2 {
            return Err(domain("axis needs at least two points"));
        }
        Ok(Self { start, step, len })
    }

    /// `len` points symmetric about zero.
    pub fn symmetric(half_width: f64, len: usize) -> Result<Self> {
        if len < 2 {
            return Err(domain("axis needs at least two points"));
        }
        let step = 2.0 * half_width / (len - 1) as f64;
        Self::new(-half_width, step, len)
    }

    pub fn at(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn end(&self) -> f64 {
        self.at(self.len - 1)
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = 1e-12 * self.step;
        x >= self.start - slack && x <= self.end() + slack
    }

    /// Index of the mirror node −x, when the axis is symmetric.
    pub fn mirror(&self, i: usize) -> Option<usize> {
        let j = self.len - 1 - i;
        ((self.at(i) + self.at(j)).abs() <= 1e-9 * self.step).then_some(j)
    }

    /// Cell index and fractional offset for linear interpolation.
    pub fn locate(&self, x: f64) -> Result<(usize, f64)> {
        if !self.contains(x) {
            return Err(Error::OutOfRange { x, lo: self.start, hi: self.end() });
        }
        let s = ((x - self.start) / self.step).clamp(0.0, (self.len - 1) as f64);
        let i = (s.floor() as usize).min(self.len - 2);
        Ok((i, s - i as f64))
    }
}

/// ρ(x, x′) on equal uniform axes, row-major in x.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub axis: UniformAxis,
    pub values: Vec<Complex64>,
    pub mass: f64,
    pub time: f64,
}

impl DensityGrid {
    pub fn new(axis: UniformAxis, values: Vec<Complex64>, mass: f64, time: f64) -> Result<Self> {
        if values.len() != axis.len * axis.len {
            return Err(domain("density values do not match the grid size"));
        }
        if !(mass > 0.0) {
            return Err(domain("M must be positive"));
        }
        Ok(Self { axis, values, mass, time })
    }

    pub fn from_fn(axis: UniformAxis, mass: f64, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(axis.len * axis.len);
        for i in 0..axis.len {
            for j in 0..axis.len {
                values.push(f(axis.at(i), axis.at(j)));
            }
        }
        Self::new(axis, values, mass, 0.0)
    }

    pub fn len(&self) -> usize {
        self.axis.len
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.axis.len + j]
    }

    /// Σᵢ ρ(xᵢ, xᵢ)·dx.
    pub fn trace(&self) -> Complex64 {
        let n = self.axis.len;
        (0..n).map(|i| self.values[i * n + i]).sum::<Complex64>() * self.axis.step
    }

    /// max |ρ(x, x′) − conj ρ(x′, x)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.axis.len;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }
}

/// A complex field on a (first, second) uniform grid, row-major in the first axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexGrid {
    pub first: UniformAxis,
    pub second: UniformAxis,
    pub values: Vec<Complex64>,
}

impl ComplexGrid {
    pub fn new(first: UniformAxis, second: UniformAxis, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != first.len * second.len {
            return Err(domain("grid values do not match the axes"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(domain("grid values must be finite"));
        }
        Ok(Self { first, second, values })
    }

    pub fn from_fn(first: UniformAxis, second: UniformAxis, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(first.len * second.len);
        for i in 0..first.len {
            for j in 0..second.len {
                values.push(f(first.at(i), second.at(j)));
            }
        }
        Self::new(first, second, values)
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.second.len + j]
    }

    /// Bilinear interpolation; errors outside the grid.
    pub fn eval(&self, a: f64, b: f64) -> Result<Complex64> {
        let (i, fa) = self.first.locate(a)?;
        let (j, fb) = self.second.locate(b)?;
        let v00 = self.get(i, j);
        let v01 = self.get(i, j + 1);
        let v10 = self.get(i + 1, j);
        let v11 = self.get(i + 1, j + 1);
        Ok(v00 * ((1.0 - fa) * (1.0 - fb)) + v01 * ((1.0 - fa) * fb) + v10 * (fa * (1.0 - fb)) + v11 * (fa * fb))
    }
}
