//! Local master equation of the overdamped field on a position grid,
//!
//! ∂ρ/∂t = −i[H(x) − H(x′)]ρ + (1/M)V_d(r)(x − x′)(∂_x − ∂_{x′})ρ − V_n(r)ρ,  r = |x − x′|,
//!
//! with centred differences, ρ = 0 beyond the grid, and classical RK4 steps.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{overdamped_vn_vd, DampedPropagatorSpec, FieldSpec};
use crate::error::{domain, require_finite, Error, Result};
use crate::grid::{DensityGrid, UniformAxis};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Hamiltonian {
    /// H = 0, leaving only the environment terms.
    None,
    /// H = p²/2M.
    Free,
    /// H = p²/2M + ½MΩ²x².
    Harmonic { frequency: f64 },
}

/// V_n and V_d sampled on the separation lattice r_m = m·dx.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterCoefficients {
    pub step: f64,
    pub v_n: Vec<f64>,
    pub v_d: Vec<f64>,
}

impl MasterCoefficients {
    pub fn from_fn(axis: &UniformAxis, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (v_n, v_d) = (0..axis.len).map(|m| f(m as f64 * axis.step)).unzip();
        Self::checked(axis.step, v_n, v_d)
    }

    pub fn overdamped(fspec: &FieldSpec, pspec: &DampedPropagatorSpec, axis: &UniformAxis) -> Result<Self> {
        let values = (0..axis.len)
            .into_par_iter()
            .map(|m| overdamped_vn_vd(fspec, pspec, m as f64 * axis.step))
            .collect::<Result<Vec<_>>>()?;
        Self::checked(axis.step, values.iter().map(|v| v.v_n).collect(), values.iter().map(|v| v.v_d).collect())
    }

    fn checked(step: f64, v_n: Vec<f64>, v_d: Vec<f64>) -> Result<Self> {
        if v_n.iter().chain(&v_d).any(|v| !v.is_finite()) {
            return Err(domain("master-equation coefficients must be finite"));
        }
        Ok(Self { step, v_n, v_d })
    }
}

/// Evolve with V_n, V_d computed from the overdamped field (n = 1 only).
pub fn evolve_master(
    grid: &DensityGrid,
    fspec: &FieldSpec,
    pspec: &DampedPropagatorSpec,
    hamiltonian: Hamiltonian,
    dt: f64,
    steps: usize,
) -> Result<DensityGrid> {
    if fspec.dimension() != 1 {
        return Err(domain("the grid master equation is one-dimensional"));
    }
    let coefficients = MasterCoefficients::overdamped(fspec, pspec, &grid.axis)?;
    evolve_master_with(grid, &coefficients, hamiltonian, dt, steps)
}

/// RK4 stays stable for |λ|·dt below about 2.8 on both axes.
const STABILITY_LIMIT: f64 = 2.5;

pub fn evolve_master_with(
    grid: &DensityGrid,
    coefficients: &MasterCoefficients,
    hamiltonian: Hamiltonian,
    dt: f64,
    steps: usize,
) -> Result<DensityGrid> {
    require_finite("dt", dt)?;
    if !(dt > 0.0) {
        return Err(domain("dt must be positive"));
    }
    let axis = grid.axis;
    if coefficients.v_n.len() < axis.len || coefficients.v_d.len() < axis.len {
        return Err(domain("coefficients do not cover the grid separations"));
    }
    if (coefficients.step - axis.step).abs() > 1e-12 * axis.step {
        return Err(domain("coefficient lattice does not match the grid step"));
    }
    let op = Operator::new(grid, coefficients, hamiltonian)?;
    let bound = op.spectral_bound();
    if bound * dt > STABILITY_LIMIT {
        return Err(Error::Stability(format!(
            "dt = {dt:e} exceeds {:e} (rate bound {bound:e})",
            STABILITY_LIMIT / bound
        )));
    }
    let mut rho = grid.values.clone();
    let len = rho.len();
    let zeros = vec![Complex64::default(); len];
    let (mut k1, mut k2, mut k3, mut k4, mut stage) =
        (zeros.clone(), zeros.clone(), zeros.clone(), zeros.clone(), zeros);
    let axpy = |out: &mut [Complex64], base: &[Complex64], k: &[Complex64], h: f64| {
        out.par_iter_mut().zip(base.par_iter().zip(k.par_iter())).for_each(|(o, (b, k))| *o = b + k * h);
    };
    for _ in 0..steps {
        op.apply(&rho, &mut k1);
        axpy(&mut stage, &rho, &k1, 0.5 * dt);
        op.apply(&stage, &mut k2);
        axpy(&mut stage, &rho, &k2, 0.5 * dt);
        op.apply(&stage, &mut k3);
        axpy(&mut stage, &rho, &k3, dt);
        op.apply(&stage, &mut k4);
        rho.par_iter_mut().enumerate().for_each(|(i, r)| {
            *r += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        });
    }
    DensityGrid::new(axis, rho, grid.mass, grid.time + dt * steps as f64)
}

struct Operator<'a> {
    axis: UniformAxis,
    mass: f64,
    kinetic: bool,
    potential: Vec<f64>,
    coefficients: &'a MasterCoefficients,
}

impl<'a> Operator<'a> {
    fn new(grid: &DensityGrid, coefficients: &'a MasterCoefficients, hamiltonian: Hamiltonian) -> Result<Self> {
        let axis = grid.axis;
        let potential = match hamiltonian {
            Hamiltonian::Harmonic { frequency } => {
                require_finite("Ω", frequency)?;
                (0..axis.len).map(|i| 0.5 * grid.mass * (frequency * axis.at(i)).powi(2)).collect()
            }
            _ => vec![0.0; axis.len],
        };
        Ok(Self { axis, mass: grid.mass, kinetic: hamiltonian != Hamiltonian::None, potential, coefficients })
    }

    fn spectral_bound(&self) -> f64 {
        let h = self.axis.step;
        let n = self.axis.len;
        let kinetic = if self.kinetic { 4.0 / (self.mass * h * h) } else { 0.0 };
        let (lo, hi) = self.potential.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let drift = (0..n).map(|m| (self.coefficients.v_d[m] * m as f64 * h).abs()).fold(0.0, f64::max);
        let decay = self.coefficients.v_n[..n].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        kinetic + (hi - lo) + 2.0 * drift / (self.mass * h) + decay
    }

    fn apply(&self, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.axis.len;
        let h = self.axis.step;
        let kin = Complex64::new(0.0, 0.5 / (self.mass * h * h));
        let at = |i: isize, j: isize| -> Complex64 {
            if i < 0 || j < 0 || i >= n as isize || j >= n as isize {
                Complex64::default()
            } else {
                rho[i as usize * n + j as usize]
            }
        };
        out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            let ii = i as isize;
            for (j, o) in row.iter_mut().enumerate() {
                let jj = j as isize;
                let c = at(ii, jj);
                let m = i.abs_diff(j);
                let mut v = -self.coefficients.v_n[m] * c;
                if self.kinetic {
                    let lap = at(ii + 1, jj) + at(ii - 1, jj) - at(ii, jj + 1) - at(ii, jj - 1);
                    v += kin * lap;
                }
                let dv = self.potential[i] - self.potential[j];
                if dv != 0.0 {
                    v += Complex64::new(0.0, -dv) * c;
                }
                let vd = self.coefficients.v_d[m];
                if vd != 0.0 && m != 0 {
                    let sep = (i as f64 - j as f64) * h;
                    let grad = at(ii + 1, jj) - at(ii - 1, jj) - at(ii, jj + 1) + at(ii, jj - 1);
                    v += grad * (vd * sep / (2.0 * h * self.mass));
                }
                *o = v;
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn packet(axis: UniformAxis) -> DensityGrid {
        let psi = |x: f64| Complex64::from_polar((-(x - 0.5).powi(2)).exp(), 0.8 * x);
        DensityGrid::from_fn(axis, 1.0, |x, y| psi(x) * psi(y).conj()).unwrap()
    }

    #[test]
    fn diagonal_is_untouched_by_decoherence() {
        let axis = UniformAxis::symmetric(6.0, 61).unwrap();
        let rho = packet(axis);
        let c = MasterCoefficients::from_fn(&axis, |r| (r * r, 0.0)).unwrap();
        let out = evolve_master_with(&rho, &c, Hamiltonian::None, 0.01, 50).unwrap();
        for i in 0..axis.len {
            assert_eq!(out.get(i, i), rho.get(i, i));
        }
        assert!((out.time - 0.5).abs() < 1e-15);
    }

    #[test]
    fn stability_is_checked_up_front() {
        let axis = UniformAxis::symmetric(6.0, 121).unwrap();
        let c = MasterCoefficients::from_fn(&axis, |_| (0.0, 0.0)).unwrap();
        let err = evolve_master_with(&packet(axis), &c, Hamiltonian::Free, 1.0, 1).unwrap_err();
        assert!(matches!(err, Error::Stability(_)));
    }
}
