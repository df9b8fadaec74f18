//! Parameter tables and per-point evaluation for each model family.

use std::collections::BTreeMap;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use decolab_core::driven::decoherence_exponent_driven;
use decolab_core::field::{
    decoherence_dl_high_t, decoherence_dl_numeric, decoherence_dl_zero_t, plate_power, ClosedForm, FieldSpec,
    HIGH_T_RATIO,
};
use decolab_core::mattress::{characteristic, fixed_points, overlap_u, MattressSpec, Stability};
use decolab_core::numerics::{OdeSettings, QuadratureSettings};
use decolab_core::ohmic::{decoherence_exponent_high_t, decoherence_exponent_ohmic};
use decolab_core::{CouplingProfile, DriveProfile, OscillatorSpec, ProfileRole};

use crate::config::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Ohmic,
    Driven,
    Mattress,
    Field,
    Plate,
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "ohmic" => Model::Ohmic,
            "driven" => Model::Driven,
            "mattress" => Model::Mattress,
            "field" => Model::Field,
            "plate" => Model::Plate,
            _ => return Err(format!("unknown model {s} (expected ohmic, driven, mattress, field or plate)")),
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamDef {
    pub name: &'static str,
    pub unit: &'static str,
    pub default: Option<&'static str>,
    pub text: bool,
}

const fn num(name: &'static str, unit: &'static str, default: Option<&'static str>) -> ParamDef {
    ParamDef { name, unit, default, text: false }
}

const fn text(name: &'static str, default: &'static str) -> ParamDef {
    ParamDef { name, unit: "", default: Some(default), text: true }
}

const OSCILLATOR: [ParamDef; 7] = [
    num("mass", "mass", Some("1")),
    num("frequency", "energy", Some("1")),
    num("gamma", "energy", None),
    num("cutoff", "energy", None),
    num("temperature", "energy", None),
    num("a", "length", Some("1")),
    num("t", "time", None),
];

const DRIVE: [ParamDef; 4] = [
    text("drive", "delta"),
    num("strength", "1", Some("2")),
    num("amplitude", "energy", Some("1")),
    num("rate", "energy", None),
];

const MATTRESS: [ParamDef; 9] = [
    num("mass", "mass", Some("1")),
    num("mu", "1", None),
    num("temperature", "energy", None),
    text("profile", "gaussian"),
    num("width", "1/length^2", Some("1")),
    num("curvature", "1/length^2", Some("1")),
    num("k", "1/length", Some("0")),
    num("delta", "length", None),
    num("t", "time", None),
];

const FIELD: [ParamDef; 6] = [
    num("n", "1", Some("3")),
    num("coupling", "1", Some("1")),
    num("cutoff", "energy", None),
    num("temperature", "energy", Some("0")),
    num("t", "time", None),
    num("L", "length", None),
];

const PLATE: [ParamDef; 5] = [
    num("Q", "charge", None),
    num("rho", "resistivity", None),
    num("v", "speed", None),
    num("z", "length", None),
    num("b", "length", None),
];

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Number(f64),
    Text(&'static str),
}

/// Closed form and quadrature at the same point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub closed: f64,
    pub numeric: f64,
}

#[derive(Debug, Clone, Default)]
pub struct PointOutput {
    pub rows: Vec<Vec<Cell>>,
    pub warnings: Vec<String>,
    pub comparison: Option<Comparison>,
}

impl PointOutput {
    fn row(cells: Vec<Cell>) -> Self {
        Self { rows: vec![cells], ..Self::default() }
    }

    fn warn(mut self, condition: bool, message: impl FnOnce() -> String) -> Self {
        if condition {
            self.warnings.push(message());
        }
        self
    }
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Ohmic => "ohmic",
            Model::Driven => "driven",
            Model::Mattress => "mattress",
            Model::Field => "field",
            Model::Plate => "plate",
        }
    }

    pub fn parameters(self) -> Vec<ParamDef> {
        match self {
            Model::Ohmic => OSCILLATOR.to_vec(),
            Model::Driven => OSCILLATOR.iter().chain(&DRIVE).copied().collect(),
            Model::Mattress => MATTRESS.to_vec(),
            Model::Field => FIELD.to_vec(),
            Model::Plate => PLATE.to_vec(),
        }
    }

    pub fn quantities(self) -> &'static [&'static str] {
        match self {
            Model::Ohmic => &["D", "D_highT"],
            Model::Driven => &["D"],
            Model::Mattress => &["characteristic", "overlap", "fixed_points"],
            Model::Field => &["D", "D_highT", "D_zeroT"],
            Model::Plate => &["P"],
        }
    }

    pub fn default_quantity(self) -> &'static str {
        self.quantities()[0]
    }

    /// Output columns of a quantity with their units.
    pub fn columns(self, quantity: &str) -> Vec<(&'static str, &'static str)> {
        match (self, quantity) {
            (Model::Mattress, "characteristic") => {
                vec![("delta0", "length"), ("jacobian", "length^2"), ("noise_integral", "time/length^2")]
            }
            (Model::Mattress, "overlap") => vec![("U", "1/length")],
            (Model::Mattress, _) => vec![("delta_fixed", "length"), ("stability", "label")],
            (Model::Plate, _) => vec![("P", "power")],
            _ => vec![("D", "1")],
        }
    }

    pub fn unit(self, param: &str) -> &'static str {
        self.parameters().iter().find(|d| d.name == param).map_or("", |d| d.unit)
    }
}

/// Numeric settings shared by every point of a run.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub quadrature: QuadratureSettings,
    pub ode: OdeSettings,
}

/// Parameters of one sweep point with the model defaults filled in.
pub struct Point<'a> {
    model: Model,
    values: &'a BTreeMap<String, Value>,
}

impl<'a> Point<'a> {
    pub fn new(model: Model, values: &'a BTreeMap<String, Value>) -> Self {
        Self { model, values }
    }

    fn lookup(&self, name: &str) -> Option<Value> {
        if let Some(v) = self.values.get(name) {
            return Some(v.clone());
        }
        let def = self.model.parameters().into_iter().find(|d| d.name == name)?;
        let raw = def.default?;
        Some(if def.text { Value::Text(raw.to_string()) } else { Value::Number(raw.parse().ok()?) })
    }

    fn number(&self, name: &str) -> Result<f64> {
        match self.lookup(name) {
            Some(Value::Number(x)) => Ok(x),
            Some(Value::Text(_)) => bail!("parameter {name} must be a number"),
            None => bail!("missing parameter {name} for model {}", self.model.name()),
        }
    }

    fn optional(&self, name: &str) -> Result<Option<f64>> {
        match self.lookup(name) {
            None => Ok(None),
            Some(_) => self.number(name).map(Some),
        }
    }

    fn text(&self, name: &str) -> Result<String> {
        match self.lookup(name) {
            Some(Value::Text(s)) => Ok(s),
            _ => bail!("missing parameter {name} for model {}", self.model.name()),
        }
    }

    fn oscillator(&self) -> Result<OscillatorSpec> {
        Ok(OscillatorSpec::new(
            self.number("mass")?,
            self.number("frequency")?,
            self.number("gamma")?,
            self.number("cutoff")?,
            self.number("temperature")?,
            self.number("a")?,
            false,
        )?)
    }

    fn mattress(&self, settings: &Settings) -> Result<MattressSpec> {
        let (mass, mu, temp) = (self.number("mass")?, self.number("mu")?, self.number("temperature")?);
        let spec = match self.text("profile")?.as_str() {
            "gaussian" => MattressSpec::new(
                mass,
                mu,
                temp,
                CouplingProfile::gaussian(self.number("width")?, ProfileRole::Spatial)?,
            )?,
            "parabolic" => MattressSpec::parabolic(mass, mu, temp, self.number("curvature")?)?,
            other => bail!("unknown profile {other} (expected gaussian or parabolic)"),
        };
        Ok(spec.with_ode_settings(settings.ode.clone())?)
    }

    fn field(&self, settings: &Settings) -> Result<FieldSpec> {
        let n = self.number("n")?;
        if n != 1.0 && n != 3.0 {
            bail!("field dimension n must be 1 or 3, got {n}");
        }
        let temp = self.number("temperature")?;
        let beta = if temp == 0.0 { f64::INFINITY } else { 1.0 / temp };
        Ok(FieldSpec::lorentzian(n as u32, self.number("coupling")?, beta, self.number("cutoff")?)?
            .with_quadrature(settings.quadrature.clone())?)
    }

    pub fn evaluate(&self, quantity: &str, settings: &Settings) -> Result<PointOutput> {
        self.compute(quantity, settings).with_context(|| format!("{} {quantity}", self.model.name()))
    }

    fn compute(&self, quantity: &str, settings: &Settings) -> Result<PointOutput> {
        match (self.model, quantity) {
            (Model::Ohmic, "D") => {
                let t = self.number("t")?;
                let e = decoherence_exponent_ohmic(&self.oscillator()?, t, &settings.quadrature)?;
                Ok(PointOutput::row(vec![Cell::Number(e.value)])
                    .warn(!e.converged, || format!("ohmic D at t = {t:e} not converged (error {:e})", e.error)))
            }
            (Model::Ohmic, _) => {
                Ok(PointOutput::row(vec![Cell::Number(decoherence_exponent_high_t(&self.oscillator()?, self.number("t")?))]))
            }
            (Model::Driven, _) => {
                let drive = match self.text("drive")?.as_str() {
                    "delta" => DriveProfile::Delta { strength: self.number("strength")? },
                    "sine" => {
                        let rate = match self.optional("rate")? {
                            Some(r) => r,
                            None => self.number("frequency")?,
                        };
                        DriveProfile::sine(self.number("amplitude")?, rate)?
                    }
                    other => bail!("unknown drive {other} (expected delta or sine)"),
                };
                let t = self.number("t")?;
                let d = decoherence_exponent_driven(&self.oscillator()?, &drive, t)?;
                Ok(PointOutput::row(vec![Cell::Number(d.value)])
                    .warn(d.negative, || format!("driven D is negative at t = {t:e}: {:e}", d.value)))
            }
            (Model::Mattress, "characteristic") => {
                let c = characteristic(&self.mattress(settings)?, self.number("k")?, self.number("delta")?, self.number("t")?)?;
                Ok(PointOutput::row(vec![Cell::Number(c.delta0), Cell::Number(c.jacobian), Cell::Number(c.noise_integral)]))
            }
            (Model::Mattress, "overlap") => {
                Ok(PointOutput::row(vec![Cell::Number(overlap_u(&self.mattress(settings)?, self.number("delta")?)?)]))
            }
            (Model::Mattress, _) => {
                let points = fixed_points(&self.mattress(settings)?, self.number("k")?)?;
                let rows = points
                    .iter()
                    .map(|p| {
                        let label = if p.stability == Stability::Stable { "stable" } else { "unstable" };
                        vec![Cell::Number(p.delta), Cell::Text(label)]
                    })
                    .collect();
                Ok(PointOutput { rows, ..PointOutput::default() })
            }
            (Model::Field, "D") => {
                let (t, l) = (self.number("t")?, self.number("L")?);
                let e = decoherence_dl_numeric(&self.field(settings)?, t, l)?;
                Ok(PointOutput::row(vec![Cell::Number(e.value)])
                    .warn(!e.converged, || format!("field D at (t, L) = ({t:e}, {l:e}) not converged"))
                    .warn(e.value < 0.0, || format!("field D is negative at (t, L) = ({t:e}, {l:e})")))
            }
            (Model::Field, which) => {
                let spec = self.field(settings)?;
                let (t, l) = (self.number("t")?, self.number("L")?);
                let hot = which == "D_highT";
                let closed = if hot {
                    decoherence_dl_high_t(&spec, t, l, ClosedForm::Corrected)?
                } else {
                    decoherence_dl_zero_t(&spec, t, l, ClosedForm::Corrected)?
                };
                let reference = if hot {
                    spec.clone()
                } else {
                    FieldSpec::lorentzian(spec.dimension(), spec.coupling(), f64::INFINITY, self.number("cutoff")?)?
                        .with_quadrature(settings.quadrature.clone())?
                };
                let numeric = decoherence_dl_numeric(&reference, t, l)?;
                let ratio = spec.temperature() / self.number("cutoff")?;
                let mut out = PointOutput::row(vec![Cell::Number(closed)])
                    .warn(hot && ratio < HIGH_T_RATIO, || {
                        format!("high-temperature form used at T/cutoff = {ratio:e} (below {HIGH_T_RATIO:e})")
                    })
                    .warn(!hot && ratio > 0.0, || format!("zero-temperature form used at T/cutoff = {ratio:e}"))
                    .warn(closed < 0.0, || format!("field D is negative at (t, L) = ({t:e}, {l:e})"));
                out.comparison = Some(Comparison { closed, numeric: numeric.value });
                Ok(out)
            }
            (Model::Plate, _) => {
                let p = plate_power(
                    self.number("Q")?,
                    self.number("rho")?,
                    self.number("v")?,
                    self.number("z")?,
                    self.optional("b")?,
                )?;
                Ok(PointOutput::row(vec![Cell::Number(p)]))
            }
        }
    }
}
