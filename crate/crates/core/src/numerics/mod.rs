//! Quadrature, special functions, ODE integration and root finding.

pub mod ode;
pub mod quad;
pub mod roots;
pub mod special;

pub use ode::{integrate as ode_integrate, ode_solve_final, OdeSettings};
pub use quad::{
    integrate_interval, integrate_semi_infinite, integrate_trigonometric, wynn_epsilon, Estimate, OscillatoryTerm,
    QuadratureSettings, Wave,
};
pub use roots::shoot_scalar;
pub use special::{
    antisymmetric_ei, coth_half, exp_integral_ei, kappa, symmetric_ei, thermal_factor, EULER_GAMMA,
};
