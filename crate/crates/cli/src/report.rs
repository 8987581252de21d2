//! Valuation reports and tabulated densities.

use std::io::{self, Write};

use derivex_core::dist::LogReturnMixture;
use derivex_core::pricing::value_pair;
use serde::Serialize;

use crate::format::number;
use crate::scenario::Scenario;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstrumentValue {
    pub name: String,
    pub market_value: f64,
    pub subjective_value: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceReport {
    pub discount_factor: f64,
    pub instruments: Vec<InstrumentValue>,
}

/// Market and subjective value of every instrument in the scenario.
pub fn price_report(scenario: &Scenario) -> PriceReport {
    let implied = scenario.implied_grid();
    let subjective = scenario.subjective_grid();
    let instruments = scenario
        .instruments
        .iter()
        .map(|i| {
            let v = value_pair(&implied, &subjective, &i.payoff, &scenario.env);
            InstrumentValue {
                name: i.name.clone(),
                market_value: v.market_value,
                subjective_value: v.subjective_value,
                difference: v.difference(),
            }
        })
        .collect();
    PriceReport { discount_factor: scenario.env.discount(), instruments }
}

impl PriceReport {
    pub fn write_text<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "discount factor {:.10}", self.discount_factor)?;
        writeln!(w, "{:<20} {:>16} {:>16} {:>16}", "instrument", "market", "subjective", "difference")?;
        for i in &self.instruments {
            writeln!(
                w,
                "{:<20} {:>16.10} {:>16.10} {:>16.10}",
                i.name, i.market_value, i.subjective_value, i.difference
            )?;
        }
        Ok(())
    }
}

/// Both price densities on one log-uniform grid covering both views.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    pub x: Vec<f64>,
    pub implied: Vec<f64>,
    pub subjective: Vec<f64>,
}

pub fn density_table(scenario: &Scenario) -> DensityTable {
    let implied_grid = scenario.implied_grid();
    let subjective_grid = scenario.subjective_grid();
    let lo = implied_grid.nodes()[0].min(subjective_grid.nodes()[0]).ln();
    let hi = implied_grid.nodes()[implied_grid.len() - 1]
        .max(subjective_grid.nodes()[subjective_grid.len() - 1])
        .ln();
    let m = scenario.quad.log_return_nodes();
    let h = (hi - lo) / (m - 1) as f64;
    let x: Vec<f64> = (0..m).map(|i| (lo + h * i as f64).exp()).collect();

    let implied = LogReturnMixture::new(&scenario.implied, &scenario.quad);
    let subjective = LogReturnMixture::new(&scenario.subjective, &scenario.quad);
    DensityTable {
        implied: x.iter().map(|&v| implied.price_pdf(v)).collect(),
        subjective: x.iter().map(|&v| subjective.price_pdf(v)).collect(),
        x,
    }
}

impl DensityTable {
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(b"x,implied_pdf,subjective_pdf\n")?;
        for ((x, p), q) in self.x.iter().zip(&self.implied).zip(&self.subjective) {
            writeln!(w, "{},{},{}", number(*x), number(*p), number(*q))?;
        }
        Ok(())
    }
}
