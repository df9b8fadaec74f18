//! Decoherence exponents, kernels and reduced-density-matrix evolution for
//! four families of open quantum systems:
//!
//! * [`ohmic`]: a particle in an Ohmic bath with a Lorentzian cutoff,
//! * [`driven`]: an oscillator pushed into a cat state by a finite drive,
//! * [`mattress`]: a particle locally coupled to a nonlinear elastic medium,
//! * [`field`]: a dipole coupled to a scalar field in one or three dimensions.
//!
//! Natural units ħ = k_B = 1 are used throughout.

pub mod curve;
pub mod driven;
pub mod error;
pub mod field;
pub mod grid;
pub mod mattress;
pub mod numerics;
pub mod ohmic;
pub mod params;
pub mod profile;

pub use curve::{curve_eval, SampledCurve};
pub use error::{Error, Result};
pub use params::{make_oscillator_spec, DriveProfile, OscillatorSpec};
pub use profile::{CouplingProfile, ProfileRole, ProfileShape};
