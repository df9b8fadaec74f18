use num_complex::Complex64;

use decolab_core::grid::UniformAxis;
use decolab_core::mattress::{
    characteristic, delta_trajectory, fixed_points, jacobian_ddelta0_dk, normalization_n, overlap_u, propagate_rengiw,
    propagate_rengiw_onto, rho_from_rengiw, shoot_k, MattressSpec, RengiwGrid, Stability,
};
use decolab_core::{CouplingProfile, ProfileRole};

const M: f64 = 1.3;
const MU: f64 = 0.8;
const U2: f64 = 1.7;

fn parabolic(t: f64) -> MattressSpec {
    MattressSpec::parabolic(M, MU, t, U2).unwrap()
}

fn gaussian(width: f64, temperature: f64) -> MattressSpec {
    MattressSpec::new(M, MU, temperature, CouplingProfile::gaussian(width, ProfileRole::Spatial).unwrap()).unwrap()
}

/// Closed-form characteristic of the linear model: (Δ(0), ∂Δ(0)/∂k, ∫₀ᵗU).
fn linear_oracle(k: f64, delta_f: f64, t: f64) -> (f64, f64, f64) {
    let lam = 2.0 * MU * U2 / M;
    let b = k / (2.0 * MU * U2);
    let a = delta_f + b;
    let e = (-lam * t).exp();
    let delta0 = a * e - b;
    let jac = (e - 1.0) / (2.0 * MU * U2);
    let integral = 0.5
        * U2
        * (a * a * (1.0 - (-2.0 * lam * t).exp()) / (2.0 * lam) - 2.0 * a * b * (1.0 - e) / lam + b * b * t);
    (delta0, jac, integral)
}

fn gaussian_state(sigma: f64, p0: f64) -> impl Fn(f64, f64) -> Complex64 {
    move |k, d| {
        Complex64::from_polar(
            (-0.5 * k * k * sigma * sigma - d * d / (8.0 * sigma * sigma) - 0.1 * k * d).exp(),
            p0 * d,
        )
    }
}

#[test]
fn linear_trajectory_matches_closed_form() {
    let s = parabolic(1.0);
    let lam = 2.0 * MU * U2 / M;
    for (k, df, t, tq) in [(0.3, 1.2, 2.0, 0.5), (-1.1, -0.4, 0.7, 0.0), (0.0, 2.0, 3.0, 1.0)] {
        let b = k / (2.0 * MU * U2);
        let exact = (df + b) * (lam * (tq - t)).exp() - b;
        let got = delta_trajectory(&s, k, df, t, tq).unwrap();
        assert!((got - exact).abs() < 1e-8, "{got} vs {exact}");
    }
}

#[test]
fn linear_shooting_and_jacobian() {
    let s = parabolic(1.0);
    let lam = 2.0 * MU * U2 / M;
    for (df, di, t) in [(1.0, -0.5, 1.5), (-2.0, 0.3, 0.4), (0.7, 0.7, 3.0)] {
        let e = (-lam * t).exp();
        let exact = 2.0 * MU * U2 * (di - df * e) / (e - 1.0);
        let k = shoot_k(&s, df, di, t).unwrap();
        assert!((k - exact).abs() < 1e-8 * exact.abs().max(1.0), "{k} vs {exact}");
        let ch = characteristic(&s, k, df, t).unwrap();
        let (d0, jac, integral) = linear_oracle(k, df, t);
        assert!((ch.delta0 - d0).abs() < 1e-8);
        assert!((ch.jacobian - jac).abs() < 1e-8);
        assert!((ch.noise_integral - integral).abs() < 1e-8 * integral.max(1.0));
    }
}

#[test]
fn linear_pipeline_matches_oracle() {
    let s = parabolic(0.9);
    let ka = UniformAxis::symmetric(1.5, 31).unwrap();
    let da = UniformAxis::symmetric(4.0, 81).unwrap();
    let r0 = RengiwGrid::from_fn(ka, da, gaussian_state(0.8, 0.6)).unwrap();
    let lam = 2.0 * MU * U2 / M;
    let t = 1.0 / lam;
    let out = propagate_rengiw(&s, &r0, t).unwrap();
    let n_t = normalization_n(&s, t).unwrap();
    let mut worst = 0.0f64;
    for i in 0..ka.len {
        for j in 0..da.len {
            let (k, d) = (ka.at(i), da.at(j));
            let (d0, jac, integral) = linear_oracle(k, d, t);
            let expected = r0.eval(k, d0).unwrap() * (n_t * jac.abs() * (-4.0 * MU * 0.9 * integral).exp());
            worst = worst.max((out.rengiw.get(i, j) - expected).norm());
        }
    }
    assert!(worst < 1e-6, "worst deviation {worst}");
}

#[test]
fn trace_is_preserved() {
    let ka = UniformAxis::symmetric(0.2, 11).unwrap();
    let da = UniformAxis::symmetric(4.0, 81).unwrap();
    let out_axis = UniformAxis::symmetric(2.0, 21).unwrap();
    let r0 = RengiwGrid::from_fn(ka, da, gaussian_state(1.0, 0.3)).unwrap();
    for s in [parabolic(2.0), gaussian(1.0, 2.0)] {
        let rate = 2.0 * MU * decolab_core::mattress::overlap_d2u(&s, 0.0).unwrap() / M;
        for t in [0.1 / rate, 1.0 / rate, 10.0 / rate] {
            let out = propagate_rengiw_onto(&s, &r0, t, out_axis).unwrap();
            let centre = out.rengiw.get(5, 10);
            assert!((centre - 1.0).norm() < 1e-6, "t = {t}: {centre}");
        }
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let s = gaussian(1.0, 1.0);
    let (k, df, t) = (0.2, 1.3, 1.5);
    let jac = jacobian_ddelta0_dk(&s, k, df, t).unwrap();
    let fd = |h: f64| {
        (delta_trajectory(&s, k + h, df, t, 0.0).unwrap() - delta_trajectory(&s, k - h, df, t, 0.0).unwrap()) / (2.0 * h)
    };
    let (e1, e2) = ((fd(1e-2) - jac).abs(), (fd(5e-3) - jac).abs());
    assert!(e1 < 1e-3 && e2 < e1);
    assert!((e1 / e2 - 4.0).abs() < 0.5, "error ratio {}", e1 / e2);
}

#[test]
fn hermiticity_survives_propagation() {
    let s = gaussian(0.8, 1.5);
    let ka = UniformAxis::symmetric(1.2, 13).unwrap();
    let da = UniformAxis::symmetric(4.0, 41).unwrap();
    let r0 = RengiwGrid::from_fn(ka, da, gaussian_state(0.9, 0.7)).unwrap();
    assert!(r0.hermiticity_defect().unwrap() < 1e-15);
    let out = propagate_rengiw_onto(&s, &r0, 0.8, UniformAxis::symmetric(2.5, 31).unwrap()).unwrap();
    assert!(out.rengiw.hermiticity_defect().unwrap() < 1e-8);
    assert!(out.violations() > 0);
}

#[test]
fn noise_integral_is_monotone_in_time() {
    let s = gaussian(1.0, 1.0);
    let mut last = 0.0;
    for i in 1..=20 {
        let v = characteristic(&s, 0.3, 1.1, 0.2 * i as f64).unwrap().noise_integral;
        assert!(v >= last);
        last = v;
    }
}

#[test]
fn high_temperature_destroys_coherence() {
    let ka = UniformAxis::symmetric(1.0, 5).unwrap();
    let da = UniformAxis::symmetric(5.0, 11).unwrap();
    let r0 = RengiwGrid::from_fn(ka, da, gaussian_state(1.0, 0.0)).unwrap();
    let out_axis = UniformAxis::symmetric(3.0, 7).unwrap();
    let mut last = f64::INFINITY;
    for temp in [1.0, 10.0, 100.0, 1000.0] {
        let out = propagate_rengiw_onto(&gaussian(1.0, temp), &r0, 1.0, out_axis).unwrap();
        let v = out.rengiw.get(2, 5).norm();
        assert!(v < last);
        last = v;
    }
    assert!(last < 1e-12);
}

#[test]
fn jacobian_grows_at_stable_point_and_saturates_at_origin() {
    let s = gaussian(1.0, 1.0);
    let k = 0.3 * 2.0 * MU * (-0.5f64).exp();
    let stable = fixed_points(&s, k).unwrap().into_iter().find(|p| p.stability == Stability::Stable).unwrap();
    let j = |t: f64| jacobian_ddelta0_dk(&s, k, stable.delta, t).unwrap().abs();
    assert!(j(4.0) > 2.0 * j(2.0) && j(2.0) > j(1.0));
    let o = |t: f64| jacobian_ddelta0_dk(&s, 0.0, 0.0, t).unwrap().abs();
    let limit = 1.0 / (2.0 * MU * 1.0);
    assert!((o(30.0) - limit).abs() < 1e-8 && o(30.0) > o(3.0));
}

#[test]
fn fixed_points_match_dense_scan() {
    let w = 1.3;
    let s = gaussian(w, 1.0);
    let fold = 2.0 * MU * (w / std::f64::consts::E).sqrt();
    let du = |d: f64| w * d * (-0.5 * w * d * d).exp();
    for i in 0..20 {
        let k = fold * (-1.6 + 3.2 * i as f64 / 19.0);
        let found = fixed_points(&s, k).unwrap();
        let n = 400_000;
        let half = 10.0 / w.sqrt();
        let mut brute = Vec::new();
        let f = |d: f64| 2.0 * MU * du(d) + k;
        for c in 0..n {
            let a = -half + 2.0 * half * c as f64 / n as f64;
            let b = -half + 2.0 * half * (c + 1) as f64 / n as f64;
            if f(a) == 0.0 || f(a) * f(b) < 0.0 {
                let mid = 0.5 * (a + b);
                let curvature = w * (1.0 - w * mid * mid);
                brute.push((mid, if curvature > 0.0 { Stability::Unstable } else { Stability::Stable }));
            }
        }
        assert_eq!(found.len(), brute.len(), "k = {k}");
        for (p, (d, st)) in found.iter().zip(&brute) {
            assert!((p.delta - d).abs() < 1e-4);
            assert_eq!(p.stability, *st);
        }
    }
}

#[test]
fn overlap_is_positive_away_from_origin() {
    let s = gaussian(0.7, 1.0);
    for i in 1..200 {
        let d = 0.05 * i as f64;
        assert!(overlap_u(&s, d).unwrap() > 0.0 && overlap_u(&s, -d).unwrap() > 0.0);
    }
}

#[test]
fn coverage_errors_name_the_node() {
    let s = parabolic(1.0);
    let ka = UniformAxis::symmetric(20.0, 5).unwrap();
    let da = UniformAxis::symmetric(1.0, 5).unwrap();
    let r0 = RengiwGrid::from_fn(ka, da, gaussian_state(1.0, 0.0)).unwrap();
    let err = propagate_rengiw(&s, &r0, 1.0).unwrap_err().to_string();
    assert!(err.contains("node"), "{err}");
}

#[test]
fn trace_of_centre_density() {
    let ka = UniformAxis::symmetric(10.0, 129).unwrap();
    let da = UniformAxis::symmetric(1.0, 3).unwrap();
    let r = RengiwGrid::from_fn(ka, da, gaussian_state(1.0, 0.0)).unwrap();
    let rho = rho_from_rengiw(&r).unwrap();
    let sum: Complex64 = (0..rho.grid.first.len).map(|m| rho.grid.get(m, 1)).sum();
    assert!((sum * rho.grid.first.step - r.get(64, 1)).norm() < 1e-12);
}
