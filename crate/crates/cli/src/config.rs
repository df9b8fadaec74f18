//! Flat key=value run configuration.
//!
//! ```text
//! model = ohmic
//! quantities = D
//!
//! [ohmic]
//! gamma = 0.01
//! cutoff = 100
//! temperature = 1e4
//!
//! [sweep]
//! t = 0, 1, 101
//!
//! [quadrature]
//! rel_tol = 1e-10
//! ```
//!
//! Top-level keys come before any section. The parameter section must be
//! named after the model. `[sweep]` lines are `name = start, stop, count`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};

use crate::models::Model;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x:e}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl SweepAxis {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| if i + 1 == self.count { self.stop } else { self.start + step * i as f64 })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Overrides {
    pub quad_abs_tol: Option<f64>,
    pub quad_rel_tol: Option<f64>,
    pub panel_budget: Option<usize>,
    pub ode_abs_tol: Option<f64>,
    pub ode_rel_tol: Option<f64>,
    pub ode_max_steps: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: Model,
    pub quantities: Vec<String>,
    pub params: BTreeMap<String, Value>,
    pub sweep: Vec<SweepAxis>,
    pub out: Option<PathBuf>,
    pub overrides: Overrides,
    /// Every accepted assignment as (section.key, raw value), in file order.
    pub echo: Vec<(String, String)>,
}

fn number(line: usize, key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| anyhow!("line {line}: {key} = {raw:?} is not a number"))
}

fn count(line: usize, key: &str, raw: &str) -> Result<usize> {
    raw.parse::<usize>().map_err(|_| anyhow!("line {line}: {key} = {raw:?} is not a whole number"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut model = None;
        let mut quantities = None;
        let mut out = None;
        let mut section: Option<(usize, String)> = None;
        let mut raw_params = Vec::new();
        let mut raw_sweep = Vec::new();
        let mut overrides = Overrides::default();
        let mut echo = Vec::new();

        for (index, full) in text.lines().enumerate() {
            let line = index + 1;
            let content = full.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| anyhow!("line {line}: unterminated section header"))?;
                section = Some((line, name.trim().to_string()));
                continue;
            }
            let (key, value) =
                content.split_once('=').ok_or_else(|| anyhow!("line {line}: expected key = value, got {content:?}"))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                bail!("line {line}: empty key or value");
            }
            let scope = section.as_ref().map_or("", |(_, s)| s.as_str());
            echo.push((if scope.is_empty() { key.to_string() } else { format!("{scope}.{key}") }, value.to_string()));
            match scope {
                "" => match key {
                    "model" => model = Some(value.parse::<Model>().map_err(|e| anyhow!("line {line}: {e}"))?),
                    "quantities" => {
                        quantities = Some(value.split(',').map(|q| q.trim().to_string()).collect::<Vec<_>>())
                    }
                    "out" => out = Some(PathBuf::from(value)),
                    _ => bail!("line {line}: unknown top-level key {key}"),
                },
                "sweep" => raw_sweep.push((line, key.to_string(), value.to_string())),
                "quadrature" => match key {
                    "abs_tol" => overrides.quad_abs_tol = Some(number(line, key, value)?),
                    "rel_tol" => overrides.quad_rel_tol = Some(number(line, key, value)?),
                    "panel_budget" => overrides.panel_budget = Some(count(line, key, value)?),
                    _ => bail!("line {line}: unknown quadrature setting {key}"),
                },
                "ode" => match key {
                    "abs_tol" => overrides.ode_abs_tol = Some(number(line, key, value)?),
                    "rel_tol" => overrides.ode_rel_tol = Some(number(line, key, value)?),
                    "max_steps" => overrides.ode_max_steps = Some(count(line, key, value)?),
                    _ => bail!("line {line}: unknown ODE setting {key}"),
                },
                other => raw_params.push((line, other.to_string(), key.to_string(), value.to_string())),
            }
        }

        let model = model.ok_or_else(|| anyhow!("no model given (expected model = ohmic|driven|mattress|field|plate)"))?;
        let defs = model.parameters();
        let mut params = BTreeMap::new();
        for (line, scope, key, value) in raw_params {
            if scope != model.name() {
                bail!("line {line}: section [{scope}] does not match model {}", model.name());
            }
            let def = defs
                .iter()
                .find(|d| d.name == key)
                .ok_or_else(|| anyhow!("line {line}: unknown parameter {key} for model {}", model.name()))?;
            let parsed = if def.text { Value::Text(value) } else { Value::Number(number(line, &key, &value)?) };
            if params.insert(key.clone(), parsed).is_some() {
                bail!("line {line}: parameter {key} given twice");
            }
        }

        let mut sweep: Vec<SweepAxis> = Vec::new();
        for (line, key, value) in raw_sweep {
            match defs.iter().find(|d| d.name == key) {
                Some(d) if !d.text => {}
                Some(_) => bail!("line {line}: parameter {key} of model {} cannot be swept", model.name()),
                None => bail!("line {line}: unknown parameter {key} for model {}", model.name()),
            }
            if sweep.iter().any(|a| a.name == key) {
                bail!("line {line}: sweep axis {key} given twice");
            }
            let parts: Vec<&str> = value.split(',').map(str::trim).collect();
            let [start, stop, n] = parts[..] else {
                bail!("line {line}: sweep {key} must be start, stop, count");
            };
            let axis = SweepAxis {
                name: key.clone(),
                start: number(line, &key, start)?,
                stop: number(line, &key, stop)?,
                count: count(line, &key, n)?,
            };
            if axis.count == 0 || !axis.start.is_finite() || !axis.stop.is_finite() {
                bail!("line {line}: sweep {key} needs finite bounds and a positive count");
            }
            sweep.push(axis);
        }
        if sweep.len() > 2 {
            bail!("at most two sweep axes are supported, got {}", sweep.len());
        }

        let quantities = quantities.unwrap_or_else(|| vec![model.default_quantity().to_string()]);
        for q in &quantities {
            if !model.quantities().contains(&q.as_str()) {
                bail!("unknown quantity {q} for model {} (expected one of {})", model.name(), model.quantities().join(", "));
            }
        }

        Ok(Self { model, quantities, params, sweep, out, overrides, echo })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const OHMIC: &str = "model = ohmic\n[ohmic]\ngamma = 0.01\ncutoff = 100\ntemperature = 1e4\n[sweep]\nt = 0, 1, 101\n";

    #[test]
    fn parses_sections_and_sweeps() {
        let c = RunConfig::parse(OHMIC).unwrap();
        assert_eq!(c.model, Model::Ohmic);
        assert_eq!(c.quantities, vec!["D"]);
        assert_eq!(c.params["gamma"], Value::Number(0.01));
        let t = c.sweep[0].values();
        assert_eq!((t.len(), t[0], t[100]), (101, 0.0, 1.0));
    }

    #[test]
    fn unknown_key_names_model() {
        let err = RunConfig::parse(&OHMIC.replace("gamma =", "gamma2 =")).unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("unknown parameter gamma2 for model ohmic"), "{err}");
    }

    #[test]
    fn malformed_lines_are_located() {
        let err = RunConfig::parse("model = plate\n[plate]\nQ 1\n").unwrap_err().to_string();
        assert!(err.starts_with("line 3"), "{err}");
        let err = RunConfig::parse("model = plate\n[ohmic]\nQ = 1\n").unwrap_err().to_string();
        assert!(err.contains("does not match"), "{err}");
        let err = RunConfig::parse("model = plate\n[sweep]\nz = 1, 2\n").unwrap_err().to_string();
        assert!(err.contains("start, stop, count"), "{err}");
    }
}
