//! Scenario files.
//!
//! A scenario is a TOML document; see `scenarios/README.md` for the schema.
//! Every value is checked against the model invariants and errors point at
//! the offending line.

use std::fs;
use std::ops::Range;
use std::path::Path;

use derivex_core::dist::{price_density_grid, DensityGrid, QuadratureSpec, ReturnModel, VarianceBelief};
use derivex_core::exposure::{AngleGrid, ExposureProblem, DEFAULT_EXPOSURE_CAP};
use derivex_core::pricing::{MarketEnv, Payoff};
use derivex_core::risk::RiskConstraint;
use serde::Deserialize;
use toml::Spanned;

use crate::error::ScenarioError;

/// One instrument of the scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    pub name: String,
    pub payoff: Payoff,
}

/// Validated inputs for pricing and exposure scans.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub implied: ReturnModel,
    pub subjective: ReturnModel,
    pub env: MarketEnv,
    pub instruments: Vec<Instrument>,
    pub constraints: Vec<RiskConstraint>,
    /// Nodes on the full-circle angle; see [`AngleGrid`].
    pub resolution: usize,
    pub quad: QuadratureSpec,
    pub n_cap: f64,
    pub seed: u64,
    /// Refinement iterations after the grid scan.
    pub refine: usize,
}

impl Scenario {
    pub fn instrument_count(&self) -> usize {
        self.instruments.len()
    }

    pub fn payoffs(&self) -> Vec<Payoff> {
        self.instruments.iter().map(|i| i.payoff.clone()).collect()
    }

    pub fn implied_grid(&self) -> DensityGrid {
        price_density_grid(&self.implied, &self.quad)
    }

    pub fn subjective_grid(&self) -> DensityGrid {
        price_density_grid(&self.subjective, &self.quad)
    }

    pub fn problem(&self) -> derivex_core::Result<ExposureProblem> {
        ExposureProblem::new(&self.implied_grid(), self.subjective_grid(), self.payoffs(), self.env)?
            .with_cap(self.n_cap)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    market: Spanned<RawMarket>,
    implied: Spanned<RawModel>,
    subjective: Spanned<RawModel>,
    instruments: Spanned<Vec<Spanned<RawInstrument>>>,
    constraints: Spanned<Vec<Spanned<RawConstraint>>>,
    #[serde(default)]
    search: RawSearch,
    #[serde(default)]
    quadrature: RawQuadrature,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarket {
    rate: Spanned<f64>,
    expiry: Spanned<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    mu: Spanned<f64>,
    alpha: Spanned<f64>,
    beta: Spanned<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstrument {
    name: Option<String>,
    kind: Spanned<String>,
    strike: Option<Spanned<f64>>,
    points: Option<Spanned<Vec<[f64; 2]>>>,
    left_slope: Option<f64>,
    right_slope: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConstraint {
    order: Spanned<i64>,
    bound: Spanned<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSearch {
    resolution: Option<Spanned<i64>>,
    n_cap: Option<Spanned<f64>>,
    seed: Option<Spanned<i64>>,
    refine: Option<Spanned<i64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    log_return_nodes: Option<Spanned<i64>>,
    log_return_halfwidth: Option<Spanned<f64>>,
    variance_nodes: Option<Spanned<i64>>,
    variance_halfwidth: Option<Spanned<f64>>,
}

/// Reads and validates a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path)
        .map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
    parse_scenario(&text)
}

/// Parses and validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    Validator { text }.scenario(raw)
}

struct Validator<'a> {
    text: &'a str,
}

impl Validator<'_> {
    fn line(&self, span: Range<usize>) -> usize {
        let end = span.start.min(self.text.len());
        self.text[..end].bytes().filter(|b| *b == b'\n').count() + 1
    }

    fn invalid<T>(&self, field: &str, span: Range<usize>, message: impl Into<String>) -> Result<T, ScenarioError> {
        Err(ScenarioError::Invalid {
            field: field.to_string(),
            line: self.line(span),
            message: message.into(),
        })
    }

    fn positive(&self, field: &str, v: &Spanned<f64>) -> Result<f64, ScenarioError> {
        let x = *v.get_ref();
        if x.is_finite() && x > 0.0 {
            Ok(x)
        } else {
            self.invalid(field, v.span(), format!("must be positive, got {x}"))
        }
    }

    fn count(&self, field: &str, v: &Spanned<i64>, min: i64) -> Result<usize, ScenarioError> {
        let x = *v.get_ref();
        if x >= min {
            Ok(x as usize)
        } else {
            self.invalid(field, v.span(), format!("must be at least {min}, got {x}"))
        }
    }

    fn model(&self, section: &str, raw: &Spanned<RawModel>) -> Result<ReturnModel, ScenarioError> {
        let m = raw.get_ref();
        let mu = self.positive(&format!("{section}.mu"), &m.mu)?;
        let alpha = self.positive(&format!("{section}.alpha"), &m.alpha)?;
        let beta = *m.beta.get_ref();
        if !(beta.is_finite() && beta >= 0.0) {
            return self.invalid(
                &format!("{section}.beta"),
                m.beta.span(),
                format!("must be non-negative, got {beta}"),
            );
        }
        let belief = VarianceBelief::new(alpha, beta).expect("checked above");
        Ok(ReturnModel::new(mu, belief).expect("checked above"))
    }

    fn instrument(&self, k: usize, raw: &Spanned<RawInstrument>) -> Result<Instrument, ScenarioError> {
        let field = |name: &str| format!("instruments[{k}].{name}");
        let i = raw.get_ref();
        let kind = i.kind.get_ref().as_str();
        let strike = || -> Result<f64, ScenarioError> {
            match &i.strike {
                Some(s) => self.positive(&field("strike"), s),
                None => self.invalid(&field("strike"), raw.span(), format!("{kind} needs a strike")),
            }
        };
        let default_name = |p: &Payoff| match p {
            Payoff::Call { strike } => format!("call {}%", strike * 100.0),
            Payoff::Put { strike } => format!("put {}%", strike * 100.0),
            Payoff::Cash => "cash".to_string(),
            Payoff::Forward => "forward".to_string(),
            Payoff::PiecewiseLinear(_) => format!("piecewise {k}"),
        };
        let payoff = match kind {
            "call" => Payoff::call(strike()?).expect("checked strike"),
            "put" => Payoff::put(strike()?).expect("checked strike"),
            "cash" => Payoff::Cash,
            "forward" => Payoff::Forward,
            "piecewise" => {
                let Some(points) = &i.points else {
                    return self.invalid(&field("points"), raw.span(), "piecewise payoff needs points");
                };
                let pts = points.get_ref().iter().map(|p| (p[0], p[1])).collect();
                match Payoff::piecewise(
                    pts,
                    i.left_slope.unwrap_or(0.0),
                    i.right_slope.unwrap_or(0.0),
                ) {
                    Ok(p) => p,
                    Err(e) => return self.invalid(&field("points"), points.span(), e.to_string()),
                }
            }
            other => {
                return self.invalid(
                    &field("kind"),
                    i.kind.span(),
                    format!("unknown kind `{other}` (expected call, put, cash, forward or piecewise)"),
                )
            }
        };
        let name = i.name.clone().unwrap_or_else(|| default_name(&payoff));
        Ok(Instrument { name, payoff })
    }

    fn constraint(&self, k: usize, raw: &Spanned<RawConstraint>) -> Result<RiskConstraint, ScenarioError> {
        let c = raw.get_ref();
        let order = *c.order.get_ref();
        if !(0..=u32::MAX as i64).contains(&order) {
            return self.invalid(
                &format!("constraints[{k}].order"),
                c.order.span(),
                format!("must be a non-negative integer, got {order}"),
            );
        }
        let bound = self.positive(&format!("constraints[{k}].bound"), &c.bound)?;
        if order == 0 && bound > 1.0 {
            return self.invalid(
                &format!("constraints[{k}].bound"),
                c.bound.span(),
                format!("a loss-probability bound must lie in (0, 1], got {bound}"),
            );
        }
        Ok(RiskConstraint::new(order as u32, bound).expect("checked above"))
    }

    fn scenario(&self, raw: RawScenario) -> Result<Scenario, ScenarioError> {
        let market = raw.market.get_ref();
        let rate = *market.rate.get_ref();
        if !rate.is_finite() {
            return self.invalid("market.rate", market.rate.span(), "must be finite");
        }
        let expiry = self.positive("market.expiry", &market.expiry)?;
        let env = MarketEnv::new(rate, expiry).expect("checked above");

        let implied = self.model("implied", &raw.implied)?;
        let subjective = self.model("subjective", &raw.subjective)?;

        if raw.instruments.get_ref().is_empty() {
            return self.invalid("instruments", raw.instruments.span(), "at least one instrument is required");
        }
        let instruments = raw
            .instruments
            .get_ref()
            .iter()
            .enumerate()
            .map(|(k, i)| self.instrument(k, i))
            .collect::<Result<Vec<_>, _>>()?;

        if raw.constraints.get_ref().is_empty() {
            return self.invalid("constraints", raw.constraints.span(), "at least one risk constraint is required");
        }
        let constraints = raw
            .constraints
            .get_ref()
            .iter()
            .enumerate()
            .map(|(k, c)| self.constraint(k, c))
            .collect::<Result<Vec<_>, _>>()?;

        let s = &raw.search;
        let resolution = match &s.resolution {
            Some(r) => self.count("search.resolution", r, AngleGrid::MIN_RESOLUTION as i64)?,
            None => AngleGrid::default_resolution(instruments.len()),
        };
        let n_cap = match &s.n_cap {
            Some(c) => self.positive("search.n_cap", c)?,
            None => DEFAULT_EXPOSURE_CAP,
        };
        let seed = match &s.seed {
            Some(v) => self.count("search.seed", v, 0)? as u64,
            None => 0,
        };
        let refine = match &s.refine {
            Some(v) => self.count("search.refine", v, 0)?,
            None if instruments.len() > 3 => 2000,
            None => 0,
        };

        let q = &raw.quadrature;
        let log_return_nodes = match &q.log_return_nodes {
            Some(v) => {
                let m = self.count("quadrature.log_return_nodes", v, 3)?;
                if m % 2 == 0 {
                    return self.invalid("quadrature.log_return_nodes", v.span(), format!("must be odd, got {m}"));
                }
                m
            }
            None => QuadratureSpec::DEFAULT_LOG_RETURN_NODES,
        };
        let log_return_halfwidth = match &q.log_return_halfwidth {
            Some(v) => self.positive("quadrature.log_return_halfwidth", v)?,
            None => QuadratureSpec::DEFAULT_LOG_RETURN_HALFWIDTH,
        };
        let variance_nodes = match &q.variance_nodes {
            Some(v) => self.count("quadrature.variance_nodes", v, 1)?,
            None => QuadratureSpec::DEFAULT_VARIANCE_NODES,
        };
        let variance_halfwidth = match &q.variance_halfwidth {
            Some(v) => self.positive("quadrature.variance_halfwidth", v)?,
            None => QuadratureSpec::DEFAULT_VARIANCE_HALFWIDTH,
        };
        let quad = QuadratureSpec::new(log_return_nodes, log_return_halfwidth, variance_nodes, variance_halfwidth)
            .expect("checked above");

        Ok(Scenario {
            implied,
            subjective,
            env,
            instruments,
            constraints,
            resolution,
            quad,
            n_cap,
            seed,
            refine,
        })
    }
}
