//! Exact solution of the locally coupled "mattress" model through the Rengiw
//! function R(k, Δ), the Fourier transform of ρ in the centre coordinate Σ.
//!
//! Along characteristics M Δ̇ − 2μU′(Δ) = k, integrated backward from
//! Δ(t) = Δ_f, the propagated function is
//! R(k, Δ_f; t) = N(t)·exp[−4μT∫₀ᵗU(Δ)]·R(k, Δ(0); 0)·|∂Δ(0)/∂k|.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::curve::SampledCurve;
use crate::error::{domain, require_finite, Error, Result};
use crate::grid::{ComplexGrid, UniformAxis};
use crate::numerics::{ode_integrate, shoot_scalar, OdeSettings};
use crate::profile::{CouplingProfile, ProfileRole, ProfileShape};

/// Source of the overlap U(Δ) = ∫f(y)[f(y) − f(y − Δ)]dy.
#[derive(Debug, Clone, PartialEq)]
pub enum Overlap {
    Profile(CouplingProfile),
    /// U = ½u₂Δ², the linear reference model.
    Parabolic { curvature: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MattressSpec {
    mass: f64,
    coupling: f64,
    temperature: f64,
    overlap: Overlap,
    ode: OdeSettings,
}

impl MattressSpec {
    /// `coupling` is μ; the profile must be spatial (unit ∫f²).
    pub fn new(mass: f64, coupling: f64, temperature: f64, profile: CouplingProfile) -> Result<Self> {
        if profile.role() != ProfileRole::Spatial {
            return Err(domain("mattress coupling needs a spatial profile"));
        }
        if matches!(profile.shape(), ProfileShape::Lorentzian { .. }) {
            return Err(domain("Lorentzian windows are spectral only"));
        }
        Self::build(mass, coupling, temperature, Overlap::Profile(profile))
    }

    pub fn parabolic(mass: f64, coupling: f64, temperature: f64, curvature: f64) -> Result<Self> {
        require_finite("u₂", curvature)?;
        if curvature <= 0.0 {
            return Err(domain("u₂ must be positive"));
        }
        Self::build(mass, coupling, temperature, Overlap::Parabolic { curvature })
    }

    fn build(mass: f64, coupling: f64, temperature: f64, overlap: Overlap) -> Result<Self> {
        for (name, v) in [("M", mass), ("μ", coupling), ("T", temperature)] {
            require_finite(name, v)?;
        }
        if mass <= 0.0 {
            return Err(domain("M must be positive"));
        }
        if coupling < 0.0 {
            return Err(domain("μ must be non-negative"));
        }
        if temperature < 0.0 {
            return Err(domain("T must be non-negative"));
        }
        Ok(Self { mass, coupling, temperature, overlap, ode: OdeSettings::default() })
    }

    pub fn with_ode_settings(mut self, ode: OdeSettings) -> Result<Self> {
        ode.validate()?;
        self.ode = ode;
        Ok(self)
    }

    pub fn with_temperature(&self, temperature: f64) -> Result<Self> {
        let mut s = Self::build(self.mass, self.coupling, temperature, self.overlap.clone())?;
        s.ode = self.ode.clone();
        Ok(s)
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        let mut s = Self::build(self.mass, coupling, self.temperature, self.overlap.clone())?;
        s.ode = self.ode.clone();
        Ok(s)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn overlap(&self) -> &Overlap {
        &self.overlap
    }

    pub fn ode_settings(&self) -> &OdeSettings {
        &self.ode
    }

    /// U, U′ and U″ at Δ.
    fn derivatives(&self, d: f64) -> [f64; 3] {
        match &self.overlap {
            Overlap::Parabolic { curvature } => [0.5 * curvature * d * d, curvature * d, *curvature],
            Overlap::Profile(p) => match p.shape() {
                ProfileShape::Gaussian { width } => {
                    let e = (-0.5 * width * d * d).exp();
                    [-(-0.5 * width * d * d).exp_m1(), width * d * e, width * (1.0 - width * d * d) * e]
                }
                ProfileShape::Sampled(c) => {
                    let u = |x: f64| 1.0 - p.normalization().powi(2) * self_overlap(c, x);
                    let h = c.step();
                    let (m2, m1, z, p1, p2) = (u(d - 2.0 * h), u(d - h), u(d), u(d + h), u(d + 2.0 * h));
                    [
                        z,
                        (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h),
                        (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) / (12.0 * h * h),
                    ]
                }
                ProfileShape::Lorentzian { .. } => unreachable!("rejected at construction"),
            },
        }
    }

    /// Half-width of the default fixed-point search window.
    pub fn default_window(&self) -> f64 {
        match &self.overlap {
            Overlap::Parabolic { .. } => f64::INFINITY,
            Overlap::Profile(p) => match p.shape() {
                ProfileShape::Gaussian { width } => 10.0 / width.sqrt(),
                ProfileShape::Sampled(c) => 2.0 * (c.end() - c.start()),
                ProfileShape::Lorentzian { .. } => unreachable!("rejected at construction"),
            },
        }
    }
}

/// ∫f(y)f(y − Δ)dy for the piecewise-linear interpolant (Simpson on merged knots is exact).
fn self_overlap(c: &SampledCurve, d: f64) -> f64 {
    let lo = c.start().max(c.start() + d);
    let hi = c.end().min(c.end() + d);
    if hi <= lo {
        return 0.0;
    }
    let mut knots: Vec<f64> = Vec::with_capacity(2 * c.len() + 2);
    knots.push(lo);
    knots.push(hi);
    for i in 0..c.len() {
        for x in [c.abscissa(i), c.abscissa(i) + d] {
            if x > lo && x < hi {
                knots.push(x);
            }
        }
    }
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let g = |y: f64| c.eval_or_zero(y) * c.eval_or_zero(y - d);
    knots
        .windows(2)
        .map(|w| (w[1] - w[0]) / 6.0 * (g(w[0]) + 4.0 * g(0.5 * (w[0] + w[1])) + g(w[1])))
        .sum()
}

fn check_delta(d: f64) -> Result<f64> {
    require_finite("Δ", d)?;
    Ok(d)
}

pub fn overlap_u(spec: &MattressSpec, d: f64) -> Result<f64> {
    Ok(spec.derivatives(check_delta(d)?)[0])
}

pub fn overlap_du(spec: &MattressSpec, d: f64) -> Result<f64> {
    Ok(spec.derivatives(check_delta(d)?)[1])
}

pub fn overlap_d2u(spec: &MattressSpec, d: f64) -> Result<f64> {
    Ok(spec.derivatives(check_delta(d)?)[2])
}

fn check_times(t: f64, t_query: f64) -> Result<()> {
    require_finite("t", t)?;
    require_finite("t′", t_query)?;
    if !(t >= t_query && t_query >= 0.0) {
        return Err(domain("need t ≥ t′ ≥ 0"));
    }
    Ok(())
}

/// Δ(t′) on the characteristic through Δ(t) = Δ_f.
pub fn delta_trajectory(spec: &MattressSpec, k: f64, delta_f: f64, t: f64, t_query: f64) -> Result<f64> {
    check_times(t, t_query)?;
    require_finite("k", k)?;
    let (m, mu) = (spec.mass, spec.coupling);
    let y = ode_integrate(
        |_, y: &[f64; 1]| [(k + 2.0 * mu * spec.derivatives(y[0])[1]) / m],
        t,
        [check_delta(delta_f)?],
        t_query,
        &spec.ode,
    )?;
    Ok(y[0])
}

/// Everything gathered along one backward characteristic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Characteristic {
    pub delta0: f64,
    /// ∂Δ(0)/∂k.
    pub jacobian: f64,
    /// ∫₀ᵗ U(Δ(t′)) dt′.
    pub noise_integral: f64,
}

/// Backward sweep carrying Δ, W = (2μ/M)∫_τ^t U″, Z = ∫_τ^t e^{W}, and ∫_τ^t U,
/// so that ∂Δ(0)/∂k = −(1/M)e^{−W(0)}Z(0).
pub fn characteristic(spec: &MattressSpec, k: f64, delta_f: f64, t: f64) -> Result<Characteristic> {
    check_times(t, 0.0)?;
    require_finite("k", k)?;
    let (m, mu) = (spec.mass, spec.coupling);
    let c = 2.0 * mu / m;
    let y = ode_integrate(
        |_, y: &[f64; 4]| {
            let [u, du, d2u] = spec.derivatives(y[0]);
            [(k + 2.0 * mu * du) / m, -c * d2u, -y[1].exp(), -u]
        },
        t,
        [check_delta(delta_f)?, 0.0, 0.0, 0.0],
        0.0,
        &spec.ode,
    )?;
    Ok(Characteristic { delta0: y[0], jacobian: -(-y[1]).exp() * y[2] / m, noise_integral: y[3] })
}

pub fn jacobian_ddelta0_dk(spec: &MattressSpec, k: f64, delta_f: f64, t: f64) -> Result<f64> {
    Ok(characteristic(spec, k, delta_f, t)?.jacobian)
}

/// The constant K joining Δ(0) = Δ_i to Δ(t) = Δ_f.
pub fn shoot_k(spec: &MattressSpec, delta_f: f64, delta_i: f64, t: f64) -> Result<f64> {
    require_finite("Δ_f", delta_f)?;
    require_finite("Δ_i", delta_i)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("t must be positive"));
    }
    let residual = |k: f64| delta_trajectory(spec, k, delta_f, t, 0.0).map(|d| d - delta_i);
    let guess = spec.mass * (delta_f - delta_i) / t;
    let slope_scale = match &spec.overlap {
        Overlap::Parabolic { curvature } => 2.0 * spec.coupling * curvature * (delta_f.abs() + delta_i.abs()),
        Overlap::Profile(_) => 2.0 * spec.coupling * spec.derivatives(0.0)[2].abs().sqrt(),
    };
    let mut width = guess.abs().max(slope_scale).max(1e-3 * spec.mass / t).max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = (guess - width, guess + width);
    let (mut r_lo, mut r_hi) = (residual(lo)?, residual(hi)?);
    let mut tries = 0;
    // Δ(0) decreases with k, so a root needs r(lo) ≥ 0 ≥ r(hi)
    while r_lo < 0.0 || r_hi > 0.0 {
        tries += 1;
        if tries > 80 {
            return Err(Error::NoSignChange { lo, hi, f_lo: r_lo, f_hi: r_hi });
        }
        width *= 2.0;
        if r_lo < 0.0 {
            lo = guess - width;
            r_lo = residual(lo)?;
        }
        if r_hi > 0.0 {
            hi = guess + width;
            r_hi = residual(hi)?;
        }
    }
    let tol = 1e-14 * lo.abs().max(hi.abs()).max(spec.mass / t);
    let mut failure = None;
    let root = shoot_scalar(
        |k| match residual(k) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        lo,
        hi,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    root
}

/// N(t) = 2μU″(0) / (1 − e^{−(2μ/M)U″(0)t}), and M/t when μU″(0) = 0.
pub fn normalization_n(spec: &MattressSpec, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("t must be positive"));
    }
    let a = 2.0 * spec.coupling * spec.derivatives(0.0)[2];
    if a == 0.0 {
        return Ok(spec.mass / t);
    }
    Ok(a / -(-a * t / spec.mass).exp_m1())
}

/// R(k, Δ) sampled on (k, Δ) axes.
#[derive(Debug, Clone, PartialEq)]
pub struct RengiwGrid {
    pub grid: ComplexGrid,
}

impl RengiwGrid {
    pub fn new(k: UniformAxis, delta: UniformAxis, values: Vec<Complex64>) -> Result<Self> {
        Ok(Self { grid: ComplexGrid::new(k, delta, values)? })
    }

    pub fn from_fn(k: UniformAxis, delta: UniformAxis, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        Ok(Self { grid: ComplexGrid::from_fn(k, delta, f)? })
    }

    pub fn k_axis(&self) -> UniformAxis {
        self.grid.first
    }

    pub fn delta_axis(&self) -> UniformAxis {
        self.grid.second
    }

    pub fn get(&self, ik: usize, id: usize) -> Complex64 {
        self.grid.get(ik, id)
    }

    pub fn eval(&self, k: f64, d: f64) -> Result<Complex64> {
        self.grid.eval(k, d)
    }

    /// max |R(−k, −Δ) − conj R(k, Δ)|; needs both axes symmetric about zero.
    pub fn hermiticity_defect(&self) -> Result<f64> {
        let (ka, da) = (self.k_axis(), self.delta_axis());
        let mut worst = 0.0f64;
        for i in 0..ka.len {
            let mi = ka.mirror(i).ok_or_else(|| domain("k axis is not symmetric"))?;
            for j in 0..da.len {
                let mj = da.mirror(j).ok_or_else(|| domain("Δ axis is not symmetric"))?;
                worst = worst.max((self.get(mi, mj) - self.get(i, j).conj()).norm());
            }
        }
        Ok(worst)
    }
}

/// Propagated grid plus the per-node flag U″(Δ_f) > 2MT·U(Δ_f), where the
/// high-temperature premise of the model fails.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub rengiw: RengiwGrid,
    pub premise_violated: Vec<bool>,
}

impl Propagation {
    pub fn violations(&self) -> usize {
        self.premise_violated.iter().filter(|&&v| v).count()
    }
}

fn node_value(spec: &MattressSpec, r0: &RengiwGrid, n_t: f64, k: f64, d: f64, t: f64) -> Result<Complex64> {
    let ch = characteristic(spec, k, d, t)?;
    if !r0.delta_axis().contains(ch.delta0) {
        let ax = r0.delta_axis();
        return Err(Error::Coverage(format!(
            "node (k = {k}, Δ = {d}) maps to Δ(0) = {} outside [{}, {}]",
            ch.delta0,
            ax.start,
            ax.end()
        )));
    }
    let weight = (-4.0 * spec.coupling * spec.temperature * ch.noise_integral).exp();
    Ok(r0.eval(k, ch.delta0)? * (n_t * weight * ch.jacobian.abs()))
}

pub fn propagate_rengiw(spec: &MattressSpec, r0: &RengiwGrid, t: f64) -> Result<Propagation> {
    propagate_rengiw_onto(spec, r0, t, r0.delta_axis())
}

/// Propagation onto a different (usually narrower) Δ axis, since the
/// characteristics drift outward by about kt/M.
pub fn propagate_rengiw_onto(spec: &MattressSpec, r0: &RengiwGrid, t: f64, da: UniformAxis) -> Result<Propagation> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(domain("t must be positive"));
    }
    let ka = r0.k_axis();
    let n_t = normalization_n(spec, t)?;
    for (k, d) in [(ka.start, da.start), (ka.start, da.end()), (ka.end(), da.start), (ka.end(), da.end())] {
        node_value(spec, r0, n_t, k, d, t)?;
    }
    let nodes: Vec<(usize, usize)> = (0..ka.len).flat_map(|i| (0..da.len).map(move |j| (i, j))).collect();
    let values = nodes
        .par_iter()
        .map(|&(i, j)| node_value(spec, r0, n_t, ka.at(i), da.at(j), t))
        .collect::<Result<Vec<_>>>()?;
    let premise_violated = nodes
        .iter()
        .map(|&(_, j)| {
            let [u, _, d2u] = spec.derivatives(da.at(j));
            d2u > 2.0 * spec.mass * spec.temperature * u
        })
        .collect();
    Ok(Propagation { rengiw: RengiwGrid::new(ka, da, values)?, premise_violated })
}

/// ρ(Σ, Δ) on a centre-coordinate grid conjugate to the k axis.
#[derive(Debug, Clone, PartialEq)]
pub struct CentreDensity {
    /// Σ axis first, Δ axis second.
    pub grid: ComplexGrid,
}

impl CentreDensity {
    /// ρ(x, x′) = ρ(Σ = (x+x′)/2, Δ = x − x′), zero outside the sampled window.
    pub fn to_density(&self, axis: UniformAxis, mass: f64, time: f64) -> Result<crate::grid::DensityGrid> {
        let mut values = Vec::with_capacity(axis.len * axis.len);
        for i in 0..axis.len {
            for j in 0..axis.len {
                let (x, xp) = (axis.at(i), axis.at(j));
                values.push(self.grid.eval(0.5 * (x + xp), x - xp).unwrap_or(Complex64::new(0.0, 0.0)));
            }
        }
        crate::grid::DensityGrid::new(axis, values, mass, time)
    }
}

/// Σ_m = (m − (n−1)/2)·2π/(n·dk).
fn sigma_axis(k: UniformAxis) -> Result<UniformAxis> {
    let n = k.len;
    let ds = 2.0 * PI / (n as f64 * k.step);
    UniformAxis::new(-0.5 * (n - 1) as f64 * ds, ds, n)
}

/// ρ(Σ, Δ) = ∫dk/2π e^{ikΣ} R(k, Δ), as a DFT along k for each Δ.
pub fn rho_from_rengiw(r: &RengiwGrid) -> Result<CentreDensity> {
    let (ka, da) = (r.k_axis(), r.delta_axis());
    let n = ka.len;
    let sa = sigma_axis(ka)?;
    let centre = (n - 1) as f64 / 2.0;
    let fft = FftPlanner::new().plan_fft_inverse(n);
    let mut out = vec![Complex64::new(0.0, 0.0); n * da.len];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..da.len {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = r.get(i, j) * Complex64::from_polar(1.0, -2.0 * PI * i as f64 * centre / n as f64);
        }
        fft.process(&mut buf);
        for (m, b) in buf.iter().enumerate() {
            out[m * da.len + j] = b * Complex64::from_polar(ka.step / (2.0 * PI), ka.start * sa.at(m));
        }
    }
    Ok(CentreDensity { grid: ComplexGrid::new(sa, da, out)? })
}

/// Inverse of `rho_from_rengiw` onto the given k axis.
pub fn rengiw_from_rho(rho: &CentreDensity, k: UniformAxis) -> Result<RengiwGrid> {
    let (sa, da) = (rho.grid.first, rho.grid.second);
    let n = sa.len;
    if k.len != n || ((sigma_axis(k)?.step / sa.step) - 1.0).abs() > 1e-12 {
        return Err(domain("k axis is not conjugate to the Σ axis"));
    }
    let centre = (n - 1) as f64 / 2.0;
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut out = vec![Complex64::new(0.0, 0.0); n * da.len];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..da.len {
        for (m, b) in buf.iter_mut().enumerate() {
            *b = rho.grid.get(m, j) * Complex64::from_polar(1.0, -k.start * sa.at(m));
        }
        fft.process(&mut buf);
        for (i, b) in buf.iter().enumerate() {
            let phase = 2.0 * PI * i as f64 * centre / n as f64;
            out[i * da.len + j] = b * Complex64::from_polar(sa.step, phase);
        }
    }
    RengiwGrid::new(k, da, out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stability {
    Stable,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    pub delta: f64,
    pub stability: Stability,
}

/// Cells used by the fixed-point sign scan.
pub const SCAN_CELLS: usize = 4000;

/// Roots of 2μU′(Δ) + k = 0 in the default window.
pub fn fixed_points(spec: &MattressSpec, k: f64) -> Result<Vec<FixedPoint>> {
    fixed_points_in(spec, k, spec.default_window())
}

pub fn fixed_points_in(spec: &MattressSpec, k: f64, half_window: f64) -> Result<Vec<FixedPoint>> {
    require_finite("k", k)?;
    let mu = spec.coupling;
    let classify = |d: f64| {
        if spec.derivatives(d)[2] > 0.0 {
            Stability::Unstable
        } else {
            Stability::Stable
        }
    };
    if let Overlap::Parabolic { curvature } = spec.overlap {
        if mu == 0.0 {
            return Ok(Vec::new());
        }
        let d = -k / (2.0 * mu * curvature);
        return Ok(vec![FixedPoint { delta: d, stability: classify(d) }]);
    }
    if !(half_window > 0.0) || !half_window.is_finite() {
        return Err(domain("search window must be positive and finite"));
    }
    let f = |d: f64| 2.0 * mu * spec.derivatives(d)[1] + k;
    if mu == 0.0 {
        return Ok(if k == 0.0 { vec![FixedPoint { delta: 0.0, stability: Stability::Unstable }] } else { Vec::new() });
    }
    // 2μU′ → 0 far out, so f → k there
    if k != 0.0 && (f(-half_window).signum() != k.signum() || f(half_window).signum() != k.signum()) {
        return Err(Error::Domain(format!("fixed-point window ±{half_window} too small: a root lies beyond it")));
    }
    let h = 2.0 * half_window / SCAN_CELLS as f64;
    let xs: Vec<f64> = (0..=SCAN_CELLS).map(|i| -half_window + h * i as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut roots = Vec::new();
    for i in 0..SCAN_CELLS {
        let (a, b) = (vals[i], vals[i + 1]);
        let root = if a == 0.0 {
            Some(xs[i])
        } else if a * b < 0.0 {
            Some(shoot_scalar(f, xs[i], xs[i + 1], 1e-14 * half_window)?)
        } else {
            None
        };
        if let Some(r) = root {
            if i == 0 || i == SCAN_CELLS - 1 {
                return Err(Error::Domain(format!("fixed point at {r} sits on the window edge ±{half_window}")));
            }
            roots.push(r);
        }
    }
    if vals[SCAN_CELLS] == 0.0 {
        return Err(Error::Domain(format!("fixed point sits on the window edge ±{half_window}")));
    }
    Ok(roots.into_iter().map(|d| FixedPoint { delta: d, stability: classify(d) }).collect())
}
