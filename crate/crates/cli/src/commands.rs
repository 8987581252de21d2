//! `price` and `scan` commands.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::CliError;
use crate::report::{density_table, price_report, PriceReport};
use crate::scan::{run_scan, write_scan_csv, ScanRun, Summary};
use crate::scenario::Scenario;

pub const SCAN_FILE: &str = "scan.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const DENSITY_FILE: &str = "densities.csv";
pub const PRICE_FILE: &str = "price.json";

/// Overrides for the search settings stored in the scenario.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScanOptions {
    pub resolution: Option<usize>,
    pub refine: Option<usize>,
    pub seed: Option<u64>,
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn write_densities(scenario: &Scenario, dir: &Path) -> Result<(), CliError> {
    let path = dir.join(DENSITY_FILE);
    let table = density_table(scenario);
    write_file(&path, |w| table.write_csv(w).map_err(|e| CliError::io(&path, e)))
}

/// Values every instrument; with `out`, also writes `price.json` and
/// `densities.csv` there.
pub fn cmd_price(scenario: &Scenario, out: Option<&Path>) -> Result<PriceReport, CliError> {
    let report = price_report(scenario);
    if let Some(dir) = out {
        create_dir(dir)?;
        let path = dir.join(PRICE_FILE);
        write_file(&path, |w| {
            serde_json::to_writer_pretty(&mut *w, &report)
                .map_err(|e| CliError::io(&path, e.into()))?;
            w.write_all(b"\n").map_err(|e| CliError::io(&path, e))
        })?;
        write_densities(scenario, dir)?;
    }
    Ok(report)
}

/// Scans the exposure directions and writes `scan.csv`, `summary.json` and
/// `densities.csv` into `out`.
pub fn cmd_scan(scenario: &Scenario, out: &Path, options: ScanOptions) -> Result<(ScanRun, Summary), CliError> {
    let n = scenario.instrument_count();
    if n < 2 {
        return Err(CliError::TooFewInstruments(n));
    }
    let resolution = options.resolution.unwrap_or(scenario.resolution);
    let refine = options.refine.unwrap_or(scenario.refine);
    let seed = options.seed.unwrap_or(scenario.seed);

    let problem = scenario.problem()?;
    let run = run_scan(&problem, &scenario.constraints, resolution, refine, seed)?;
    let summary = Summary::from(&run.optimum);

    create_dir(out)?;
    write_file(&out.join(SCAN_FILE), |w| {
        write_scan_csv(w, n, &scenario.constraints, &run.outcome.records)
    })?;
    let path = out.join(SUMMARY_FILE);
    write_file(&path, |w| {
        serde_json::to_writer_pretty(&mut *w, &summary).map_err(|e| CliError::io(&path, e.into()))?;
        w.write_all(b"\n").map_err(|e| CliError::io(&path, e))
    })?;
    write_densities(scenario, out)?;
    Ok((run, summary))
}
