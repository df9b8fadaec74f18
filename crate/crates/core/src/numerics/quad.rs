//! Adaptive Gauss–Kronrod quadrature on finite intervals and on [0, ∞).
//!
//! Semi-infinite integrals without a period hint are split at the
//! breakpoints and the tail beyond the last one is mapped onto (0, 1] by
//! x = c/s. With a period hint the axis is cut into half-period panels;
//! the partial sums are accelerated with the ε-algorithm, and at
//! checkpoints a mapped tail integral is attempted as a second route.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Maximum number of subintervals (or half-period panels).
    pub panel_budget: usize,
    /// Oscillation period of the integrand, if known.
    pub period: Option<f64>,
    /// Points where the integrand changes scale (peaks, cutoffs).
    pub breakpoints: Vec<f64>,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-10,
            panel_budget: 4000,
            period: None,
            breakpoints: Vec::new(),
        }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(domain("absolute tolerance must be positive"));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(domain("relative tolerance must be positive"));
        }
        if self.panel_budget < 16 {
            return Err(domain("panel budget must be at least 16"));
        }
        if let Some(p) = self.period {
            if !(p > 0.0 && p.is_finite()) {
                return Err(domain("period hint must be positive and finite"));
            }
        }
        if self.breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(domain("breakpoints must be finite"));
        }
        Ok(())
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = Some(period);
        self
    }

    pub fn without_period(mut self) -> Self {
        self.period = None;
        self
    }

    pub fn with_breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints.extend(points);
        self
    }

    pub fn with_tolerances(mut self, abs_tol: f64, rel_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self.rel_tol = rel_tol;
        self
    }

    fn sorted_breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut b: Vec<f64> = self.breakpoints.iter().copied().filter(|&x| x > lo && x < hi).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

/// Integral value with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    /// False when the requested tolerance was not met within budget.
    pub converged: bool,
}

impl Estimate {
    pub fn scaled(self, c: f64) -> Self {
        Self { value: c * self.value, error: c.abs() * self.error, converged: self.converged }
    }

    /// The value, or an error naming `context` if not converged.
    pub fn require(self, context: &str) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature(format!(
                "{context}: estimate {} with error {}",
                self.value, self.error
            )))
        }
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

fn sample<F: Fn(f64) -> f64 + ?Sized>(f: &F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFinite { x })
    }
}

/// 21-point Kronrod rule with the embedded 10-point Gauss error estimate.
fn gk21<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = sample(f, center)?;
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let (f1, f2) = (sample(f, center - dx)?, sample(f, center + dx)?);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_g += WG[j] * (f1 + f2);
        res_k += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let (f1, f2) = (sample(f, center - dx)?, sample(f, center + dx)?);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_k += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let h = half.abs();
    let result = res_k * half;
    res_abs *= h;
    res_asc *= h;
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((result, err))
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    kind: usize,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive bisection over a set of segments. `f(kind, x)` lets
/// different segments use different variable maps.
fn adaptive<F>(f: &F, init: &[(usize, f64, f64)], abs_tol: f64, rel_tol: f64, budget: usize) -> Result<Estimate>
where
    F: Fn(usize, f64) -> f64 + ?Sized,
{
    let mut heap = BinaryHeap::with_capacity(budget + 2);
    let mut finished: Vec<Segment> = Vec::new();
    for &(kind, a, b) in init {
        if a == b {
            continue;
        }
        let (value, error) = gk21(&|x| f(kind, x), a, b)?;
        heap.push(Segment { a, b, value, error, kind });
    }
    let totals = |heap: &BinaryHeap<Segment>, finished: &[Segment]| {
        let mut v = 0.0;
        let mut e = 0.0;
        for s in heap.iter().chain(finished.iter()) {
            v += s.value;
            e += s.error;
        }
        (v, e)
    };
    let (mut value, mut error) = totals(&heap, &finished);
    let mut since_resum = 0;
    loop {
        let tol = abs_tol.max(rel_tol * value.abs());
        if error <= tol {
            let (v, e) = totals(&heap, &finished);
            value = v;
            error = e;
            if error <= abs_tol.max(rel_tol * value.abs()) {
                return Ok(Estimate { value, error, converged: true });
            }
        }
        if heap.len() + finished.len() >= budget {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        let width = (worst.b - worst.a).abs();
        if width <= 1e-13 * worst.a.abs().max(worst.b.abs()) || mid == worst.a || mid == worst.b {
            finished.push(worst);
            continue;
        }
        let g = |x: f64| f(worst.kind, x);
        let (v1, e1) = gk21(&g, worst.a, mid)?;
        let (v2, e2) = gk21(&g, mid, worst.b)?;
        value += v1 + v2 - worst.value;
        error += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1, kind: worst.kind });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2, kind: worst.kind });
        since_resum += 1;
        if since_resum == 64 {
            let (v, e) = totals(&heap, &finished);
            value = v;
            error = e;
            since_resum = 0;
        }
    }
    let (value, error) = totals(&heap, &finished);
    let converged = error <= abs_tol.max(rel_tol * value.abs());
    Ok(Estimate { value, error, converged })
}

/// ∫_a^b f, splitting at any breakpoints inside the interval.
pub fn integrate_interval<F>(f: F, a: f64, b: f64, settings: &QuadratureSettings) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    settings.validate()?;
    if !a.is_finite() || !b.is_finite() {
        return Err(domain("finite interval required"));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0, converged: true });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut edges = vec![lo];
    edges.extend(settings.sorted_breakpoints(lo, hi));
    edges.push(hi);
    let init: Vec<_> = edges.windows(2).map(|w| (0usize, w[0], w[1])).collect();
    let est = adaptive(&|_, x| f(x), &init, settings.abs_tol, settings.rel_tol, settings.panel_budget)?;
    Ok(est.scaled(sign))
}

/// ∫_c^∞ f via x = c/s on s ∈ (0, 1].
fn mapped_tail<F>(f: &F, c: f64, abs_tol: f64, rel_tol: f64, budget: usize) -> Result<Estimate>
where
    F: Fn(f64) -> f64 + ?Sized,
{
    let g = |_: usize, s: f64| {
        let x = c / s;
        f(x) * (c / (s * s))
    };
    adaptive(&g, &[(0, 0.0, 1.0)], abs_tol, rel_tol, budget).map_err(|e| match e {
        Error::NonFinite { x } => Error::NonFinite { x: c / x },
        other => other,
    })
}

/// ∫_0^∞ f(x) dx.
///
/// Returns a flagged estimate (`converged = false`) when the budget runs
/// out; errors only on invalid settings or a non-finite sample.
pub fn integrate_semi_infinite<F>(f: F, settings: &QuadratureSettings) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    settings.validate()?;
    match settings.period {
        None => non_oscillatory(&f, settings),
        Some(p) => oscillatory(&f, 0.0, 0.5 * p, settings),
    }
}

fn non_oscillatory<F: Fn(f64) -> f64 + ?Sized>(f: &F, settings: &QuadratureSettings) -> Result<Estimate> {
    let bps = settings.sorted_breakpoints(0.0, f64::INFINITY);
    let c = bps.last().copied().unwrap_or(1.0);
    let mut init = Vec::with_capacity(bps.len() + 1);
    let mut lo = 0.0;
    for &b in &bps {
        init.push((0usize, lo, b));
        lo = b;
    }
    if bps.is_empty() {
        init.push((0, 0.0, c));
    }
    init.push((1, 0.0, 1.0));
    let g = |kind: usize, x: f64| {
        if kind == 0 {
            f(x)
        } else {
            let y = c / x;
            f(y) * (c / (x * x))
        }
    };
    adaptive(&g, &init, settings.abs_tol, settings.rel_tol, settings.panel_budget)
}

const PANEL_SEGMENTS: usize = 400;
const TAIL_SEGMENTS: usize = 300;
const WYNN_WINDOW: usize = 24;

fn oscillatory<F: Fn(f64) -> f64 + ?Sized>(
    f: &F,
    origin: f64,
    half: f64,
    settings: &QuadratureSettings,
) -> Result<Estimate> {
    let bps = settings.sorted_breakpoints(origin, f64::INFINITY);
    let last_bp = bps.last().map_or(0.0, |b| b - origin);
    let first_regular = ((last_bp / half).floor() as usize + 1).max(2);
    let mut sum = 0.0;
    let mut panel_error = 0.0;
    let mut panels_ok = true;
    let mut sums: Vec<f64> = Vec::new();
    let mut contributions: Vec<f64> = Vec::new();
    let mut estimates: Vec<f64> = Vec::new();
    let mut next_checkpoint = 4;

    for k in 1..=settings.panel_budget {
        let a = origin + (k - 1) as f64 * half;
        let b = origin + k as f64 * half;
        let mut edges = vec![a];
        edges.extend(bps.iter().copied().filter(|&x| x > a && x < b));
        edges.push(b);
        let init: Vec<_> = edges.windows(2).map(|w| (0usize, w[0], w[1])).collect();
        let panel = adaptive(
            &|_, x| f(x),
            &init,
            0.1 * settings.abs_tol,
            0.1 * settings.rel_tol,
            PANEL_SEGMENTS.max(init.len() + 1),
        )?;
        panels_ok &= panel.converged;
        sum += panel.value;
        panel_error += panel.error;
        if k < first_regular {
            continue;
        }
        sums.push(sum);
        contributions.push(panel.value);
        let window = &sums[sums.len().saturating_sub(WYNN_WINDOW)..];
        let estimate = wynn_epsilon(window);
        estimates.push(estimate);
        let tol = settings.abs_tol.max(settings.rel_tol * estimate.abs());
        let n = estimates.len();
        let spread = if n >= 3 {
            (estimate - estimates[n - 2]).abs() + (estimate - estimates[n - 3]).abs()
        } else {
            f64::INFINITY
        };
        // the ε-algorithm is only trusted on alternating panel sums
        let alternating = n >= 4 && contributions[n - 4..].windows(2).all(|w| w[0] * w[1] < 0.0);
        let settled = panel.value.abs() <= tol;
        let stable = spread <= tol && (alternating || settled);
        if stable || n == next_checkpoint {
            if n == next_checkpoint {
                next_checkpoint *= 2;
            }
            let tail = mapped_tail(f, b, 0.25 * tol, 0.0, TAIL_SEGMENTS)?;
            if tail.converged && panel_error + tail.error <= tol {
                return Ok(Estimate {
                    value: sum + tail.value,
                    error: panel_error + tail.error,
                    converged: panels_ok,
                });
            }
        }
        if stable && alternating {
            let error = spread + panel_error;
            return Ok(Estimate { value: estimate, error, converged: panels_ok && error <= 2.0 * tol });
        }
    }
    let value = estimates.last().copied().unwrap_or(sum);
    Ok(Estimate { value, error: f64::INFINITY, converged: false })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Wave {
    Cos,
    Sin,
}

/// One oscillatory component envelope(x)·wave(frequency·x).
pub struct OscillatoryTerm<'a> {
    pub envelope: &'a dyn Fn(f64) -> f64,
    pub frequency: f64,
    pub wave: Wave,
}

impl OscillatoryTerm<'_> {
    fn eval(&self, x: f64) -> f64 {
        let phase = self.frequency * x;
        let w = match self.wave {
            Wave::Cos => phase.cos(),
            Wave::Sin => phase.sin(),
        };
        (self.envelope)(x) * w
    }
}

const MAX_HEAD_HALF_PERIODS: f64 = 4000.0;

/// ∫_0^∞ f for f = smooth + Σ_j terms_j.
///
/// `full` must equal that sum; it is integrated directly on a head interval
/// [0, X] (where cancellations between the pieces matter), and beyond X the
/// smooth part is integrated through the mapped tail while each oscillatory
/// term gets its own half-period panels.
pub fn integrate_trigonometric<F, G>(
    full: F,
    smooth: G,
    terms: &[OscillatoryTerm<'_>],
    settings: &QuadratureSettings,
) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    settings.validate()?;
    let active: Vec<&OscillatoryTerm> = terms.iter().filter(|t| t.frequency != 0.0).collect();
    if active.is_empty() {
        return non_oscillatory(&full, &settings.clone().without_period());
    }
    let w_min = active.iter().map(|t| t.frequency.abs()).fold(f64::INFINITY, f64::min);
    let w_max = active.iter().map(|t| t.frequency.abs()).fold(0.0, f64::max);
    let last_bp = settings.sorted_breakpoints(0.0, f64::INFINITY).last().copied().unwrap_or(0.0);
    let resolved = MAX_HEAD_HALF_PERIODS * std::f64::consts::PI / w_max;
    let split = last_bp.max((std::f64::consts::PI / w_min).min(resolved)).max(std::f64::consts::PI / w_max);

    let half_max = std::f64::consts::PI / w_max;
    let pieces = (split / half_max).ceil().max(1.0) as usize;
    let mut edges: Vec<f64> = (0..=pieces).map(|i| split * i as f64 / pieces as f64).collect();
    edges.extend(settings.sorted_breakpoints(0.0, split));
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let init: Vec<_> = edges.windows(2).map(|w| (0usize, w[0], w[1])).collect();
    let parts = (active.len() + 2) as f64;
    let abs_part = settings.abs_tol / parts;
    let head = adaptive(&|_, x| full(x), &init, abs_part, settings.rel_tol, settings.panel_budget + 4 * init.len())?;

    let tail_smooth = mapped_tail(&smooth, split, abs_part, settings.rel_tol, settings.panel_budget)?;
    let mut value = head.value + tail_smooth.value;
    let mut error = head.error + tail_smooth.error;
    let sub = QuadratureSettings { abs_tol: abs_part, period: None, breakpoints: Vec::new(), ..settings.clone() };
    for term in active {
        let half = std::f64::consts::PI / term.frequency.abs();
        let est = oscillatory(&|x: f64| term.eval(x), split, half, &sub)?;
        value += est.value;
        error += est.error;
    }
    // judged on the total: a part that is tiny need not meet its own relative tolerance
    let converged = error <= settings.abs_tol.max(settings.rel_tol * value.abs());
    Ok(Estimate { value, error, converged })
}

/// Wynn's ε-algorithm; returns the last entry of the highest even column.
pub fn wynn_epsilon(seq: &[f64]) -> f64 {
    let n = seq.len();
    if n == 0 {
        return f64::NAN;
    }
    if n < 3 {
        return seq[n - 1];
    }
    let mut prev = vec![0.0; n + 1];
    let mut cur = seq.to_vec();
    let mut best = seq[n - 1];
    let mut column = 0usize;
    while cur.len() > 1 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let d = cur[j + 1] - cur[j];
            let scale = cur[j].abs().max(cur[j + 1].abs());
            if column.is_multiple_of(2) && d.abs() <= 4.0 * f64::EPSILON * scale {
                return cur[j + 1];
            }
            if d == 0.0 || !d.is_finite() {
                return best;
            }
            next.push(prev[j + 1] + 1.0 / d);
        }
        column += 1;
        prev = cur;
        cur = next;
        if column.is_multiple_of(2) {
            match cur.last() {
                Some(v) if v.is_finite() => best = *v,
                _ => return best,
            }
        }
    }
    best
}
