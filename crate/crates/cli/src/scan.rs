//! Parallel grid scans and their file outputs.

use std::io::{self, Write};

use derivex_core::exposure::{select_optimum, ExposureProblem, Optimum, ScanOutcome, ScanRecord};
use derivex_core::risk::RiskConstraint;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::format::number;

/// Rows whose `xi_best` deviates from `n_max * unit_xi` by more than this
/// are rejected at write time.
pub const RAY_TOLERANCE: f64 = 1e-9;

/// Same result as [`ExposureProblem::scan`], with grid nodes evaluated on
/// the rayon pool. Records keep grid order so the reduction is identical.
pub fn parallel_scan(
    problem: &ExposureProblem,
    resolution: usize,
    constraints: &[RiskConstraint],
) -> derivex_core::Result<ScanOutcome> {
    let grid = problem.grid(resolution, constraints)?;
    let records = (0..grid.len())
        .into_par_iter()
        .map(|i| problem.evaluate(&grid.direction(i), constraints))
        .collect::<derivex_core::Result<Vec<_>>>()?;
    let optimum = select_optimum(&records, problem.instruments());
    Ok(ScanOutcome { records, optimum })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRun {
    pub outcome: ScanOutcome,
    /// Grid optimum, refined when refinement iterations were requested.
    pub optimum: Optimum,
}

pub fn run_scan(
    problem: &ExposureProblem,
    constraints: &[RiskConstraint],
    resolution: usize,
    refine: usize,
    seed: u64,
) -> Result<ScanRun, CliError> {
    if problem.instruments() < 2 {
        return Err(CliError::TooFewInstruments(problem.instruments()));
    }
    let outcome = parallel_scan(problem, resolution, constraints)?;
    let optimum = problem.stochastic_refine(&outcome.optimum, constraints, refine, seed)?;
    Ok(ScanRun { outcome, optimum })
}

/// Column names for the per-node CSV.
pub fn scan_header(instruments: usize, constraints: &[RiskConstraint]) -> Vec<String> {
    let mut cols: Vec<String> = (1..instruments).map(|j| format!("alpha_{j}_deg")).collect();
    for (k, c) in constraints.iter().enumerate() {
        let order = c.order();
        let repeats = constraints[..k].iter().filter(|o| o.order() == order).count();
        if repeats == 0 {
            cols.push(format!("rho_{order}_unit"));
        } else {
            cols.push(format!("rho_{order}_unit_{}", repeats + 1));
        }
    }
    cols.extend(["n_max", "status", "xi_best"].map(String::from));
    cols
}

pub fn check_ray(record: &ScanRecord) -> Result<(), CliError> {
    let expected = if record.best_xi == 0.0 { 0.0 } else { record.exposure.n_max * record.unit_xi };
    if (record.best_xi - expected).abs() > RAY_TOLERANCE * expected.abs().max(1.0) {
        return Err(CliError::Consistency(format!(
            "xi_best {} differs from n_max * unit_xi {} at angles {:?}",
            record.best_xi,
            expected,
            record.direction.degrees()
        )));
    }
    if record.best_xi != 0.0 && !(record.exposure.admits_exposure() && record.unit_xi > 0.0) {
        return Err(CliError::Consistency("positive xi_best on a rejected direction".into()));
    }
    Ok(())
}

/// Writes one row per record; fails before writing a row that breaks the
/// ray identity.
pub fn write_scan_csv<W: Write>(
    mut w: W,
    instruments: usize,
    constraints: &[RiskConstraint],
    records: &[ScanRecord],
) -> Result<(), CliError> {
    let io = |e: io::Error| CliError::io("scan.csv", e);
    let header = scan_header(instruments, constraints).join(",");
    writeln!(w, "{header}").map_err(io)?;
    let mut line = String::new();
    for r in records {
        check_ray(r)?;
        line.clear();
        let fields = r
            .direction
            .degrees()
            .into_iter()
            .chain(r.unit_risks.iter().copied())
            .chain([r.exposure.n_max])
            .map(number);
        for (k, f) in fields.enumerate() {
            if k > 0 {
                line.push(',');
            }
            line.push_str(&f);
        }
        line.push(',');
        line.push_str(r.exposure.status.as_str());
        line.push(',');
        line.push_str(&number(r.best_xi));
        line.push('\n');
        w.write_all(line.as_bytes()).map_err(io)?;
    }
    Ok(())
}

/// `summary.json` contents.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub angles_deg: Vec<f64>,
    pub n: f64,
    pub quantities: Vec<f64>,
    pub xi: f64,
    pub binding_constraint: Option<usize>,
    pub status: String,
}

impl From<&Optimum> for Summary {
    fn from(o: &Optimum) -> Self {
        Self {
            angles_deg: o.direction.degrees(),
            n: o.n,
            quantities: o.quantities.quantities().to_vec(),
            xi: o.xi,
            binding_constraint: o.binding_constraint,
            status: o.status.as_str().to_string(),
        }
    }
}
