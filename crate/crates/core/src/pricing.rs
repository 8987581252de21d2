//! European payoffs and their valuation under a price density.

use alloc::vec::Vec;

use crate::dist::DensityGrid;
use crate::error::{Error, Result};

/// Payoff at expiry as a function of the final price (spot = 1).
#[derive(Debug, Clone, PartialEq)]
pub enum Payoff {
    Call { strike: f64 },
    Put { strike: f64 },
    /// One unit of currency.
    Cash,
    /// One unit of the asset.
    Forward,
    /// Linear interpolation between breakpoints, linear extrapolation with
    /// the given slopes outside them.
    PiecewiseLinear(PiecewiseLinear),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinear {
    points: Vec<(f64, f64)>,
    left_slope: f64,
    right_slope: f64,
}

impl PiecewiseLinear {
    pub fn new(points: Vec<(f64, f64)>, left_slope: f64, right_slope: f64) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Usage("piecewise-linear payoff needs at least one breakpoint"));
        }
        if !points.iter().all(|(x, v)| x.is_finite() && v.is_finite()) {
            return Err(Error::Domain("breakpoints must be finite"));
        }
        if !points.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(Error::Domain("breakpoints must be strictly increasing in x"));
        }
        if !(left_slope.is_finite() && right_slope.is_finite()) {
            return Err(Error::Domain("extrapolation slopes must be finite"));
        }
        Ok(Self { points, left_slope, right_slope })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn left_slope(&self) -> f64 {
        self.left_slope
    }

    pub fn right_slope(&self) -> f64 {
        self.right_slope
    }

    pub fn value(&self, x: f64) -> f64 {
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        if x <= first.0 {
            return first.1 + self.left_slope * (x - first.0);
        }
        if x >= last.0 {
            return last.1 + self.right_slope * (x - last.0);
        }
        // first index with points[i].0 > x; x lies strictly inside
        let i = self.points.partition_point(|p| p.0 <= x);
        let (x0, v0) = self.points[i - 1];
        let (x1, v1) = self.points[i];
        v0 + (v1 - v0) * (x - x0) / (x1 - x0)
    }
}

impl Payoff {
    pub fn call(strike: f64) -> Result<Self> {
        check_strike(strike)?;
        Ok(Payoff::Call { strike })
    }

    pub fn put(strike: f64) -> Result<Self> {
        check_strike(strike)?;
        Ok(Payoff::Put { strike })
    }

    pub fn piecewise(points: Vec<(f64, f64)>, left_slope: f64, right_slope: f64) -> Result<Self> {
        PiecewiseLinear::new(points, left_slope, right_slope).map(Payoff::PiecewiseLinear)
    }

    /// Payout at final price `x`.
    pub fn value(&self, x: f64) -> f64 {
        payoff_value(self, x)
    }
}

fn check_strike(strike: f64) -> Result<()> {
    if strike.is_finite() && strike > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain("strike must be positive"))
    }
}

pub fn payoff_value(payoff: &Payoff, x: f64) -> f64 {
    match payoff {
        Payoff::Call { strike } => (x - strike).max(0.0),
        Payoff::Put { strike } => (strike - x).max(0.0),
        Payoff::Cash => 1.0,
        Payoff::Forward => x,
        Payoff::PiecewiseLinear(p) => p.value(x),
    }
}

/// Continuously compounded rate and time to expiry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketEnv {
    rate: f64,
    expiry: f64,
}

impl MarketEnv {
    pub fn new(rate: f64, expiry: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Error::Domain("interest rate must be finite"));
        }
        if !(expiry.is_finite() && expiry > 0.0) {
            return Err(Error::Domain("time to expiry must be positive"));
        }
        Ok(Self { rate, expiry })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn expiry(&self) -> f64 {
        self.expiry
    }

    /// `e^{-rt}`
    pub fn discount(&self) -> f64 {
        libm::exp(-self.rate * self.expiry)
    }

    /// `e^{rt}`
    pub fn growth(&self) -> f64 {
        libm::exp(self.rate * self.expiry)
    }
}

/// Signed contract counts, one per instrument.
#[derive(Debug, Clone, PartialEq)]
pub struct Portfolio(Vec<f64>);

impl Portfolio {
    pub fn new(quantities: Vec<f64>) -> Result<Self> {
        if quantities.is_empty() {
            return Err(Error::Usage("portfolio needs at least one instrument"));
        }
        if !quantities.iter().all(|q| q.is_finite()) {
            return Err(Error::Domain("contract counts must be finite"));
        }
        Ok(Self(quantities))
    }

    pub fn zero(len: usize) -> Self {
        Self(alloc::vec![0.0; len])
    }

    pub fn quantities(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self(self.0.iter().map(|q| q * factor).collect())
    }

    /// Euclidean norm of the contract counts.
    pub fn radius(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, q| libm::hypot(acc, *q))
    }
}

/// Market (implied) and subjective value of one contract.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValuationPair {
    pub market_value: f64,
    pub subjective_value: f64,
}

impl ValuationPair {
    pub fn difference(&self) -> f64 {
        self.subjective_value - self.market_value
    }
}

/// `e^{-rt} * sum_i w_i p_i f(x_i)`.
pub fn instrument_value(density: &DensityGrid, payoff: &Payoff, env: &MarketEnv) -> f64 {
    env.discount() * density.expectation(|x| payoff_value(payoff, x))
}

/// Values one instrument under both the implied and the subjective density.
pub fn value_pair(
    implied: &DensityGrid,
    subjective: &DensityGrid,
    payoff: &Payoff,
    env: &MarketEnv,
) -> ValuationPair {
    ValuationPair {
        market_value: instrument_value(implied, payoff, env),
        subjective_value: instrument_value(subjective, payoff, env),
    }
}

fn check_lengths(valuations: &[ValuationPair], portfolio: &Portfolio) -> Result<()> {
    if valuations.len() != portfolio.len() {
        return Err(Error::LengthMismatch { expected: valuations.len(), actual: portfolio.len() });
    }
    Ok(())
}

/// `(sum n_i * market_i, sum n_i * subjective_i)`.
pub fn portfolio_values(valuations: &[ValuationPair], portfolio: &Portfolio) -> Result<(f64, f64)> {
    check_lengths(valuations, portfolio)?;
    Ok(valuations
        .iter()
        .zip(portfolio.quantities())
        .fold((0.0, 0.0), |(m, s), (v, n)| (m + n * v.market_value, s + n * v.subjective_value)))
}

/// Subjective minus market portfolio value.
///
/// Evaluated as the dot product of the counts with the per-contract
/// differences, so it is exactly zero when both views agree.
pub fn valuation_difference(valuations: &[ValuationPair], portfolio: &Portfolio) -> Result<f64> {
    check_lengths(valuations, portfolio)?;
    Ok(valuations
        .iter()
        .zip(portfolio.quantities())
        .map(|(v, n)| n * v.difference())
        .sum())
}
