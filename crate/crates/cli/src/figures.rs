//! `decolab fig1` and `decolab fig2`: D_L(t) grids with axes in units of 1/Γ.

use std::path::Path;

use anyhow::{bail, Result};
use decolab_core::field::{
    decoherence_dl_high_t, decoherence_dl_numeric, decoherence_dl_zero_t, ClosedForm, FieldSpec, Thermal, HIGH_T_RATIO,
};
use decolab_core::numerics::QuadratureSettings;
use rayon::prelude::*;

use crate::models::Cell;
use crate::output::{format_number, Manifest, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Form {
    Corrected,
    Printed,
    Numeric,
}

#[derive(Debug, Clone)]
pub struct FigureOptions {
    pub coupling: f64,
    pub cutoff: f64,
    /// T/Γ for the high-temperature cases.
    pub temperature_ratio: f64,
    /// Largest Γt and ΓL.
    pub extent: f64,
    pub resolution: usize,
    pub form: Form,
    pub quadrature: QuadratureSettings,
}

impl FigureOptions {
    fn check(&self) -> Result<()> {
        if self.resolution < 2 {
            bail!("resolution must be at least 2");
        }
        if !(self.extent > 0.0 && self.extent.is_finite()) {
            bail!("extent must be positive");
        }
        if !(self.temperature_ratio > 0.0 && self.temperature_ratio.is_finite()) {
            bail!("temperature ratio must be positive");
        }
        self.quadrature.validate()?;
        Ok(())
    }

    fn axis(&self) -> Vec<f64> {
        let n = self.resolution;
        (0..n).map(|i| if i + 1 == n { self.extent } else { self.extent * i as f64 / (n - 1) as f64 }).collect()
    }

    fn spec(&self, n: u32, thermal: Thermal) -> Result<FieldSpec> {
        let beta = match thermal {
            Thermal::High => 1.0 / (self.temperature_ratio * self.cutoff),
            Thermal::Zero => f64::INFINITY,
        };
        Ok(FieldSpec::lorentzian(n, self.coupling, beta, self.cutoff)?.with_quadrature(self.quadrature.clone())?)
    }

    fn record(&self, manifest: &mut Manifest) {
        manifest.entry("figure.coupling", format_number(self.coupling));
        manifest.entry("figure.cutoff", format_number(self.cutoff));
        manifest.entry("figure.temperature_ratio", format_number(self.temperature_ratio));
        manifest.entry("figure.extent", format_number(self.extent));
        manifest.entry("figure.resolution", self.resolution);
        manifest.entry("figure.form", format!("{:?}", self.form).to_lowercase());
        manifest.entry("figure.units", "t and L in units of 1/cutoff, D dimensionless");
        if self.form == Form::Numeric {
            manifest.entry("figure.quadrature", format!("abs_tol={:e} rel_tol={:e}", self.quadrature.abs_tol, self.quadrature.rel_tol));
        }
    }
}

/// D at (Γt, ΓL) = (u, v).
fn exponent(spec: &FieldSpec, thermal: Thermal, form: Form, u: f64, v: f64) -> Result<f64> {
    let gamma = spec.window().lorentzian_cutoff().unwrap_or(1.0);
    let (t, l) = (u / gamma, v / gamma);
    let closed = match form {
        Form::Numeric => return Ok(decoherence_dl_numeric(spec, t, l)?.require("D_L")?),
        Form::Corrected => ClosedForm::Corrected,
        Form::Printed => ClosedForm::Printed,
    };
    Ok(match thermal {
        Thermal::High => decoherence_dl_high_t(spec, t, l, closed)?,
        Thermal::Zero => decoherence_dl_zero_t(spec, t, l, closed)?,
    })
}

pub fn fig1(options: &FigureOptions, out: &Path) -> Result<usize> {
    options.check()?;
    if options.temperature_ratio < HIGH_T_RATIO {
        bail!("fig1 is the high-temperature case and needs T/cutoff >= {HIGH_T_RATIO}");
    }
    let spec = options.spec(3, Thermal::High)?;
    let axis = options.axis();
    let n = axis.len();
    let values: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| exponent(&spec, Thermal::High, options.form, axis[idx / n], axis[idx % n]))
        .collect::<Result<_>>()?;

    let mut manifest = Manifest::new(out, "fig1");
    options.record(&mut manifest);
    manifest.entry("figure.case", "n3_highT");
    let mut table = Table::new(vec!["t".into(), "L".into(), "D".into()]);
    for (idx, &d) in values.iter().enumerate() {
        table.rows.push(vec![Cell::Number(axis[idx / n]), Cell::Number(axis[idx % n]), Cell::Number(d)]);
    }
    manifest.emit("fig1_D.csv", &table, &["1/cutoff".into(), "1/cutoff".into(), "1".into()])?;

    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let asymmetry = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).fold(0.0f64, |m, (i, j)| {
        m.max((values[i * n + j] - values[j * n + i]).abs())
    });
    manifest.entry("fig1.symmetric_pair_max_abs", format_number(asymmetry));
    manifest.entry("fig1.symmetric_pair_max_rel", format_number(if peak > 0.0 { asymmetry / peak } else { 0.0 }));
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    manifest.entry("fig1.min_D", format_number(min));
    if min < 0.0 {
        manifest.warn(format!("negative D on the fig1 grid (min {min:e})"));
    }
    if values[..n].iter().any(|&d| d != 0.0) {
        manifest.warn("D is not zero on the t = 0 row");
    }
    manifest.finish()
}

/// Slope of ln D against ln L over 0 < L ≤ `limit`.
pub fn onset_exponent(ls: &[f64], ds: &[f64], limit: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        ls.iter().zip(ds).filter(|(&l, &d)| l > 0.0 && l <= limit + 1e-12 && d > 0.0).map(|(l, d)| (l.ln(), d.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / k, pts.iter().map(|p| p.1).sum::<f64>() / k);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

pub const FIG2_TIMES: [f64; 3] = [1.0, 2.0, 3.0];
pub const ONSET_LIMIT: f64 = 0.2;
pub const ONSET_EXPONENT: f64 = 2.0;
pub const ONSET_TOLERANCE: f64 = 0.1;
pub const FLATTENING: (f64, f64) = (20.0, 40.0);
pub const FLATTENING_BAND: f64 = 0.01;

pub fn fig2(options: &FigureOptions, out: &Path) -> Result<usize> {
    options.check()?;
    let axis = options.axis();
    let mut manifest = Manifest::new(out, "fig2");
    options.record(&mut manifest);
    for n in [1u32, 3] {
        for thermal in [Thermal::High, Thermal::Zero] {
            let case = format!("n{n}_{}", thermal.label());
            let spec = options.spec(n, thermal)?;
            let columns: Vec<Vec<f64>> = FIG2_TIMES
                .iter()
                .map(|&m| axis.par_iter().map(|&l| exponent(&spec, thermal, options.form, m, l)).collect::<Result<Vec<_>>>())
                .collect::<Result<_>>()?;
            let mut table = Table::new(vec!["L".into(), "D_at_m1".into(), "D_at_m2".into(), "D_at_m3".into()]);
            for (i, &l) in axis.iter().enumerate() {
                table.rows.push(std::iter::once(l).chain(columns.iter().map(|c| c[i])).map(Cell::Number).collect());
            }
            let units = ["1/cutoff", "1", "1", "1"].map(String::from);
            manifest.emit(&format!("fig2_{case}.csv"), &table, &units)?;

            let disordered = (0..axis.len())
                .filter(|&i| {
                    let (a, b, c) = (columns[0][i], columns[1][i], columns[2][i]);
                    let slack = 1e-12 * c.abs().max(b.abs());
                    b < a - slack || c < b - slack
                })
                .count();
            manifest.entry(format!("fig2.{case}.ordering_violations"), disordered);
            if disordered > 0 {
                manifest.warn(format!("{case}: later-time curves fall below earlier ones at {disordered} points"));
            }
            if let Some(bad) = columns.iter().flatten().find(|d| **d < 0.0) {
                manifest.warn(format!("{case}: negative D ({bad:e})"));
            }
            for (m, column) in FIG2_TIMES.iter().zip(&columns) {
                match onset_exponent(&axis, column, ONSET_LIMIT) {
                    Some(p) => {
                        manifest.entry(format!("fig2.{case}.m{m}.onset_exponent"), format_number(p));
                        if (p - ONSET_EXPONENT).abs() > ONSET_TOLERANCE {
                            manifest.warn(format!("{case} at t = {m}/cutoff: small-L exponent {p:.4} outside 2 ± 0.1"));
                        }
                    }
                    None => manifest.entry(format!("fig2.{case}.m{m}.onset_exponent"), "n/a (fewer than two points in (0, 0.2])"),
                }
                if n == 3 && thermal == Thermal::High {
                    let find = |x: f64| axis.iter().position(|&l| (l - x).abs() < 1e-9 * x).map(|i| column[i]);
                    match (find(FLATTENING.0), find(FLATTENING.1)) {
                        (Some(a), Some(b)) => {
                            let r = a / b;
                            manifest.entry(format!("fig2.{case}.m{m}.flattening_ratio"), format_number(r));
                            if (r - 1.0).abs() > FLATTENING_BAND {
                                manifest.warn(format!("{case} at t = {m}/cutoff: D(20)/D(40) = {r:.4} outside [0.99, 1.01]"));
                            }
                        }
                        _ => manifest.entry(format!("fig2.{case}.m{m}.flattening_ratio"), "n/a (L = 20, 40 not on the grid)"),
                    }
                }
            }
        }
    }
    manifest.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn onset_fit_recovers_power() {
        let ls: Vec<f64> = (0..=10).map(|i| 0.02 * i as f64).collect();
        let ds: Vec<f64> = ls.iter().map(|l| 3.0 * l.powf(2.3)).collect();
        assert!((onset_exponent(&ls, &ds, 0.2).unwrap() - 2.3).abs() < 1e-12);
        assert!(onset_exponent(&ls[..2], &ds[..2], 0.2).is_none());
    }
}
