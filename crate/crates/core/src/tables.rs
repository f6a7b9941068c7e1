//! Reference tables of iteration counts over (ln LR+, prior) for a fixed
//! target PPV, plus the dense surface grid behind the 3-D plot.
//!
//! Cells hold the raw real-valued count; [`ReferenceTable::ceiled`] gives
//! the whole-test view.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ScreeningError};
use crate::sequential::{ceil_iterations, raw_iterations};

/// Row axis shared by the published tables.
pub const STANDARD_LOG_LR: [f64; 10] = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0];
/// Column axis shared by the published tables.
pub const STANDARD_PHI: [f64; 6] = [0.02, 0.05, 0.07, 0.1, 0.15, 0.2];
/// Targets of the four published tables, in order.
pub const STANDARD_TARGETS: [f64; 4] = [0.99, 0.95, 0.75, 0.50];

/// Bumped whenever any emitter changes its byte output.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTableSpec {
    pub target_rho: f64,
    pub log_lr_values: Vec<f64>,
    pub phi_values: Vec<f64>,
}

fn check_axis(name: &str, values: &[f64], valid: impl Fn(f64) -> bool) -> Result<()> {
    if values.is_empty() {
        return Err(ScreeningError::InvalidAxis(format!("{name} axis is empty")));
    }
    if let Some(&bad) = values.iter().find(|&&v| !valid(v)) {
        return Err(ScreeningError::InvalidAxis(format!(
            "{name} value {bad} is out of range"
        )));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ScreeningError::InvalidAxis(format!(
            "{name} axis must be strictly increasing"
        )));
    }
    Ok(())
}

fn check_target(target: f64) -> Result<()> {
    if target > 0.0 && target < 1.0 {
        Ok(())
    } else {
        Err(ScreeningError::InvalidTarget(target))
    }
}

fn valid_log_lr(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

fn valid_phi(v: f64) -> bool {
    v > 0.0 && v < 1.0
}

impl ReferenceTableSpec {
    pub fn new(target_rho: f64, log_lr_values: Vec<f64>, phi_values: Vec<f64>) -> Result<Self> {
        let spec = Self {
            target_rho,
            log_lr_values,
            phi_values,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// The published axes for `target_rho`.
    pub fn standard(target_rho: f64) -> Result<Self> {
        Self::new(target_rho, STANDARD_LOG_LR.to_vec(), STANDARD_PHI.to_vec())
    }

    pub fn validate(&self) -> Result<()> {
        check_target(self.target_rho)?;
        check_axis("ln LR+", &self.log_lr_values, valid_log_lr)?;
        check_axis("prior", &self.phi_values, valid_phi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTable {
    pub spec: ReferenceTableSpec,
    /// `cells[row][col]`: rows follow `log_lr_values`, columns `phi_values`.
    pub cells: Vec<Vec<f64>>,
}

/// One cell in long (record) form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRecord {
    pub log_lr: f64,
    pub phi: f64,
    pub raw_n: f64,
    /// Whole tests: 0 when the prior already meets the target, else at
    /// least 1.
    pub n_i: u64,
}

/// Whole-test count for a raw cell value.
pub fn ceiled_cell(raw_n: f64) -> u64 {
    if raw_n <= 0.0 {
        0
    } else {
        ceil_iterations(raw_n)
    }
}

pub fn generate_reference_table(spec: &ReferenceTableSpec) -> Result<ReferenceTable> {
    spec.validate()?;
    let cells = spec
        .log_lr_values
        .par_iter()
        .map(|&log_lr| {
            spec.phi_values
                .iter()
                .map(|&phi| raw_iterations(log_lr, phi, spec.target_rho))
                .collect()
        })
        .collect();
    Ok(ReferenceTable {
        spec: spec.clone(),
        cells,
    })
}

fn fmt_axis(v: f64) -> String {
    format!("{v}")
}

impl ReferenceTable {
    pub fn ceiled(&self) -> Vec<Vec<u64>> {
        self.cells
            .iter()
            .map(|row| row.iter().map(|&raw| ceiled_cell(raw)).collect())
            .collect()
    }

    pub fn records(&self) -> Vec<TableRecord> {
        let mut out =
            Vec::with_capacity(self.spec.log_lr_values.len() * self.spec.phi_values.len());
        for (row, &log_lr) in self.cells.iter().zip(&self.spec.log_lr_values) {
            for (&raw_n, &phi) in row.iter().zip(&self.spec.phi_values) {
                out.push(TableRecord {
                    log_lr,
                    phi,
                    raw_n,
                    n_i: ceiled_cell(raw_n),
                });
            }
        }
        out
    }

    /// Wide CSV: `ln_lr`, one raw column per prior, then one ceiled
    /// column per prior (`ceil_<phi>`). Raw values carry two decimals.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let phis = &self.spec.phi_values;
        let mut header = vec!["ln_lr".to_string()];
        header.extend(phis.iter().map(|&p| fmt_axis(p)));
        header.extend(phis.iter().map(|&p| format!("ceil_{}", fmt_axis(p))));
        w.write_record(&header).expect(IN_MEMORY);

        for ((row, ceiled), &log_lr) in self
            .cells
            .iter()
            .zip(self.ceiled())
            .zip(&self.spec.log_lr_values)
        {
            let mut rec = vec![format!("{log_lr:.2}")];
            rec.extend(row.iter().map(|v| format!("{v:.2}")));
            rec.extend(ceiled.iter().map(|v| v.to_string()));
            w.write_record(&rec).expect(IN_MEMORY);
        }
        let bytes = w.into_inner().expect(IN_MEMORY);
        String::from_utf8(bytes).expect("csv output is utf-8")
    }

    /// GitHub-flavoured Markdown: the raw table followed by the ceiled one.
    pub fn to_markdown(&self) -> String {
        let phis = &self.spec.phi_values;
        let mut out = String::new();
        let header = |out: &mut String| {
            out.push_str("| ln LR+ |");
            for &p in phis {
                let _ = write!(out, " {} |", fmt_axis(p));
            }
            out.push('\n');
            out.push_str("|---:|");
            for _ in phis {
                out.push_str("---:|");
            }
            out.push('\n');
        };

        let _ = writeln!(
            out,
            "Iterations to reach PPV {} (raw)\n",
            fmt_axis(self.spec.target_rho)
        );
        header(&mut out);
        for (row, &log_lr) in self.cells.iter().zip(&self.spec.log_lr_values) {
            let _ = write!(out, "| {log_lr:.2} |");
            for v in row {
                let _ = write!(out, " {v:.2} |");
            }
            out.push('\n');
        }

        out.push_str("\nWhole tests (ceiling)\n\n");
        header(&mut out);
        for (row, &log_lr) in self.ceiled().iter().zip(&self.spec.log_lr_values) {
            let _ = write!(out, "| {log_lr:.2} |");
            for v in row {
                let _ = write!(out, " {v} |");
            }
            out.push('\n');
        }
        out
    }

    /// JSON records at full precision.
    pub fn to_json(&self) -> String {
        let doc = serde_json::json!({
            "format_version": FORMAT_VERSION,
            "target_rho": self.spec.target_rho,
            "log_lr_values": self.spec.log_lr_values,
            "phi_values": self.spec.phi_values,
            "records": self.records(),
        });
        serde_json::to_string_pretty(&doc).expect("table serializes")
    }
}

const IN_MEMORY: &str = "writing csv to memory cannot fail";

/// Inclusive arithmetic range `start, start + step, ..., <= stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl AxisRange {
    pub fn single(v: f64) -> Self {
        Self {
            start: v,
            stop: v,
            step: 1.0,
        }
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        let Self { start, stop, step } = *self;
        if !(start.is_finite() && stop.is_finite() && step.is_finite())
            || step <= 0.0
            || stop < start
        {
            return Err(ScreeningError::InvalidAxis(format!(
                "range {start}..={stop} step {step} is empty or malformed"
            )));
        }
        // Slack absorbs representation error in `stop`, e.g. 0.1 * 3.
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        const MAX_POINTS: usize = 1_000_000;
        if count > MAX_POINTS {
            return Err(ScreeningError::InvalidAxis(format!(
                "range has {count} points, limit is {MAX_POINTS}"
            )));
        }
        Ok((0..count).map(|i| start + i as f64 * step).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub log_lr: f64,
    pub phi: f64,
    pub raw_n: f64,
}

/// Dense `(ln LR+, prior, raw_n)` lattice, rows by ln LR+ then prior.
pub fn surface_grid(
    target_rho: f64,
    log_lr_range: AxisRange,
    phi_range: AxisRange,
) -> Result<Vec<SurfacePoint>> {
    check_target(target_rho)?;
    let log_lrs = log_lr_range.values()?;
    let phis = phi_range.values()?;
    check_axis("ln LR+", &log_lrs, valid_log_lr)?;
    check_axis("prior", &phis, valid_phi)?;
    Ok(log_lrs
        .par_iter()
        .flat_map_iter(|&log_lr| {
            phis.iter().map(move |&phi| SurfacePoint {
                log_lr,
                phi,
                raw_n: raw_iterations(log_lr, phi, target_rho),
            })
        })
        .collect())
}

/// Whitespace-separated `log_lr phi raw_n` rows, the layout surface
/// plotters read directly. Blank line between ln LR+ rows.
pub fn surface_to_dat(points: &[SurfacePoint]) -> String {
    let mut out = String::new();
    let mut prev: Option<f64> = None;
    for p in points {
        if prev.is_some_and(|lr| lr != p.log_lr) {
            out.push('\n');
        }
        let _ = writeln!(out, "{} {} {}", p.log_lr, p.phi, p.raw_n);
        prev = Some(p.log_lr);
    }
    out
}

pub fn surface_to_csv(points: &[SurfacePoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["ln_lr", "phi", "raw_n", "n_i"])
        .expect(IN_MEMORY);
    for p in points {
        w.write_record([
            p.log_lr.to_string(),
            p.phi.to_string(),
            p.raw_n.to_string(),
            ceiled_cell(p.raw_n).to_string(),
        ])
        .expect(IN_MEMORY);
    }
    let bytes = w.into_inner().expect(IN_MEMORY);
    String::from_utf8(bytes).expect("csv output is utf-8")
}
