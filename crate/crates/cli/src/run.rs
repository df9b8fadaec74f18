//! `decolab run`: evaluate every requested quantity over the sweep grid.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{Context, Result};
use decolab_core::field::VALIDATION_TOLERANCE;
use rayon::prelude::*;

use crate::config::{RunConfig, Value};
use crate::models::{Cell, Comparison, Point, PointOutput, Settings};
use crate::output::{format_number, Manifest, Table};

/// Values below this fraction of the largest quadrature value are not compared.
const RELEVANCE_FLOOR: f64 = 1e-6;

pub fn settings(config: &RunConfig, tol: Option<f64>) -> Settings {
    let mut s = Settings::default();
    let o = &config.overrides;
    if let Some(x) = o.quad_abs_tol {
        s.quadrature.abs_tol = x;
    }
    if let Some(x) = tol.or(o.quad_rel_tol) {
        s.quadrature.rel_tol = x;
    }
    if let Some(x) = o.panel_budget {
        s.quadrature.panel_budget = x;
    }
    if let Some(x) = o.ode_abs_tol {
        s.ode.abs_tol = x;
    }
    if let Some(x) = tol.or(o.ode_rel_tol) {
        s.ode.rel_tol = x;
    }
    if let Some(x) = o.ode_max_steps {
        s.ode.max_steps = x;
    }
    s
}

/// Cartesian product of the sweep axes, first axis outermost.
fn grid(config: &RunConfig) -> Vec<(Vec<f64>, BTreeMap<String, Value>)> {
    let mut points = vec![(Vec::new(), config.params.clone())];
    for axis in &config.sweep {
        let values = axis.values();
        points = points
            .into_iter()
            .flat_map(|(coords, params)| {
                values.iter().map(move |&x| {
                    let mut p = params.clone();
                    p.insert(axis.name.clone(), Value::Number(x));
                    let mut c = coords.clone();
                    c.push(x);
                    (c, p)
                })
            })
            .collect();
    }
    points
}

fn max_discrepancy(comparisons: &[Comparison]) -> f64 {
    let scale = comparisons.iter().fold(0.0f64, |m, c| m.max(c.numeric.abs()));
    comparisons
        .iter()
        .filter(|c| c.numeric.abs() > RELEVANCE_FLOOR * scale)
        .map(|c| ((c.closed - c.numeric) / c.numeric).abs())
        .fold(0.0, f64::max)
}

pub fn execute(config: &RunConfig, config_path: &Path, out: &Path, tol: Option<f64>) -> Result<usize> {
    let settings = settings(config, tol);
    settings.quadrature.validate()?;
    settings.ode.validate()?;
    let model = config.model;
    let mut manifest = Manifest::new(out, "run");
    manifest.entry("config", config_path.display());
    for (k, v) in &config.echo {
        manifest.entry(format!("config.{k}"), v);
    }
    manifest.entry("settings.quadrature", format!("abs_tol={:e} rel_tol={:e} panel_budget={}", settings.quadrature.abs_tol, settings.quadrature.rel_tol, settings.quadrature.panel_budget));
    manifest.entry("settings.ode", format!("abs_tol={:e} rel_tol={:e} max_steps={}", settings.ode.abs_tol, settings.ode.rel_tol, settings.ode.max_steps));

    let points = grid(config);
    for quantity in &config.quantities {
        let results: Vec<PointOutput> = points
            .par_iter()
            .map(|(_, params)| Point::new(model, params).evaluate(quantity, &settings))
            .collect::<Result<_>>()?;
        let axes: Vec<&str> = config.sweep.iter().map(|a| a.name.as_str()).collect();
        let columns = model.columns(quantity);
        let mut table =
            Table::new(axes.iter().map(|s| s.to_string()).chain(columns.iter().map(|(c, _)| c.to_string())).collect());
        let units: Vec<String> =
            axes.iter().map(|a| model.unit(a)).chain(columns.iter().map(|(_, u)| *u)).map(str::to_string).collect();
        let mut comparisons = Vec::new();
        for ((coords, _), result) in points.iter().zip(results) {
            for row in result.rows {
                table.rows.push(coords.iter().map(|&x| Cell::Number(x)).chain(row).collect());
            }
            for w in result.warnings {
                manifest.warn(w);
            }
            comparisons.extend(result.comparison);
        }
        let file = format!("{}_{quantity}.csv", model.name());
        manifest.emit(&file, &table, &units).with_context(|| format!("writing {file}"))?;
        if !comparisons.is_empty() {
            let worst = max_discrepancy(&comparisons);
            manifest.entry(format!("validation.{quantity}.max_rel_vs_quadrature"), format_number(worst));
            if worst > VALIDATION_TOLERANCE {
                manifest.warn(format!("{quantity} differs from quadrature by {worst:e} (tolerance {VALIDATION_TOLERANCE:e})"));
            }
        }
    }
    manifest.finish()
}
