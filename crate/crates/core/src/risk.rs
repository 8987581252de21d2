//! Profit/loss at expiry and the loss-moment risk measures.
//!
//! For a portfolio `n` the profit/loss at final price `x` is
//! `L(x) = sum_i n_i f_i(x) - e^{rt} * market_value(n)`. The risk measure of
//! order `j` is `rho_j = E[g(L)^j]` with `g(l) = max(-l, 0)` under the
//! subjective density; `rho_0` is the probability of a strict loss and
//! `rho_1` the expected loss. Since `L` is linear in `n`,
//! `rho_j(c*n) = c^j * rho_j(n)` for `c > 0`.
//!
//! The expectation is taken over the price grid rather than over an explicit
//! loss density, which avoids transforming densities where `L` is flat.

use alloc::vec::Vec;

use crate::dist::DensityGrid;
use crate::error::{Error, Result};
use crate::pricing::{payoff_value, MarketEnv, Payoff, Portfolio};

/// Upper bound on `rho_order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskConstraint {
    order: u32,
    bound: f64,
}

impl RiskConstraint {
    /// `bound` must be positive, and at most 1 for `order = 0`.
    pub fn new(order: u32, bound: f64) -> Result<Self> {
        if !(bound.is_finite() && bound > 0.0) {
            return Err(Error::Domain("risk bound must be positive"));
        }
        if order == 0 && bound > 1.0 {
            return Err(Error::Domain("loss-probability bound must lie in (0, 1]"));
        }
        Ok(Self { order, bound })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn is_satisfied_by(&self, rho: f64) -> bool {
        rho <= self.bound
    }
}

/// `g(l)^order` with `g(l) = max(-l, 0)`; order 0 is the indicator of a
/// strict loss (`H(0) = 0`).
pub fn loss_fn_g(l: f64, order: u32) -> f64 {
    match order {
        0 => {
            if l < 0.0 {
                1.0
            } else {
                0.0
            }
        }
        1 => (-l).max(0.0),
        j => libm::pow((-l).max(0.0), j as f64),
    }
}

/// Subjective price density, instrument payoffs and their market prices.
///
/// Payoffs are tabulated on the density nodes at construction, shifted by
/// the grown market price, so the loss of any portfolio at a node is a dot
/// product.
#[derive(Debug, Clone)]
pub struct LossModel {
    density: DensityGrid,
    payoffs: Vec<Payoff>,
    market_values: Vec<f64>,
    env: MarketEnv,
    masses: Vec<f64>,
    // node-major: excess[k * n + i] = f_i(x_k) - e^{rt} * market_i
    excess: Vec<f64>,
}

impl LossModel {
    pub fn new(
        subjective: DensityGrid,
        payoffs: Vec<Payoff>,
        market_values: Vec<f64>,
        env: MarketEnv,
    ) -> Result<Self> {
        if payoffs.is_empty() {
            return Err(Error::Usage("loss model needs at least one instrument"));
        }
        if market_values.len() != payoffs.len() {
            return Err(Error::LengthMismatch {
                expected: payoffs.len(),
                actual: market_values.len(),
            });
        }
        if !market_values.iter().all(|v| v.is_finite()) {
            return Err(Error::Domain("market values must be finite"));
        }
        let growth = env.growth();
        let n = payoffs.len();
        let mut excess = Vec::with_capacity(subjective.len() * n);
        for &x in subjective.nodes() {
            for (p, v) in payoffs.iter().zip(&market_values) {
                excess.push(payoff_value(p, x) - growth * v);
            }
        }
        let masses = subjective.masses().collect();
        Ok(Self { density: subjective, payoffs, market_values, env, masses, excess })
    }

    pub fn instruments(&self) -> usize {
        self.payoffs.len()
    }

    pub fn density(&self) -> &DensityGrid {
        &self.density
    }

    pub fn payoffs(&self) -> &[Payoff] {
        &self.payoffs
    }

    pub fn market_values(&self) -> &[f64] {
        &self.market_values
    }

    pub fn env(&self) -> &MarketEnv {
        &self.env
    }

    fn check(&self, portfolio: &Portfolio) -> Result<()> {
        if portfolio.len() != self.instruments() {
            return Err(Error::LengthMismatch {
                expected: self.instruments(),
                actual: portfolio.len(),
            });
        }
        Ok(())
    }

    /// Market value of the portfolio, `sum n_i * market_i`.
    pub fn market_pv(&self, portfolio: &Portfolio) -> Result<f64> {
        self.check(portfolio)?;
        Ok(portfolio.quantities().iter().zip(&self.market_values).map(|(n, v)| n * v).sum())
    }

    /// Profit/loss at expiry if the final price is `x`.
    pub fn loss_at(&self, x: f64, portfolio: &Portfolio) -> Result<f64> {
        let market_pv = self.market_pv(portfolio)?;
        let payout: f64 = portfolio
            .quantities()
            .iter()
            .zip(&self.payoffs)
            .map(|(n, p)| n * payoff_value(p, x))
            .sum();
        Ok(payout - self.env.growth() * market_pv)
    }

    /// `(mass, loss)` at every grid node. `quantities` must have one entry
    /// per instrument.
    pub fn loss_profile<'a>(&'a self, quantities: &'a [f64]) -> impl Iterator<Item = (f64, f64)> + 'a {
        debug_assert_eq!(quantities.len(), self.instruments());
        let n = self.instruments();
        self.masses.iter().zip(self.excess.chunks_exact(n)).map(move |(&m, row)| {
            let loss: f64 = row.iter().zip(quantities).map(|(e, q)| e * q).sum();
            (m, loss)
        })
    }

    /// `rho_order` for the portfolio.
    pub fn risk_measure(&self, order: u32, portfolio: &Portfolio) -> Result<f64> {
        self.check(portfolio)?;
        let mut out = [0.0];
        self.risk_measures_into(portfolio.quantities(), &[order], &mut out);
        Ok(out[0])
    }

    /// Several orders in one pass over the grid; `out[k]` receives
    /// `rho_{orders[k]}`.
    ///
    /// Order 1 carries an end correction at every break-even point: `|L|`
    /// has a slope jump there, which a plain node sum resolves only to
    /// `O(h^2)`. The correction assumes neighbouring nodes are equally
    /// spaced in the coordinate the masses were built on (true for
    /// [`price_density_grid`](crate::dist::price_density_grid)); higher
    /// orders are smooth enough without it, and order 0 is a plain count
    /// so that it is exactly scale-invariant.
    pub fn risk_measures_into(&self, quantities: &[f64], orders: &[u32], out: &mut [f64]) {
        assert_eq!(quantities.len(), self.instruments());
        assert_eq!(orders.len(), out.len());
        out.iter_mut().for_each(|o| *o = 0.0);
        let wants_first = orders.contains(&1);
        let last = self.masses.len() - 1;
        // per-node mass with the trapezoid end halving undone
        let full = |k: usize, m: f64| if k == 0 || k == last { 2.0 * m } else { m };
        let mut kink = 0.0;
        let mut prev = (0.0, 0.0);
        for (k, (m, l)) in self.loss_profile(quantities).enumerate() {
            if l < 0.0 {
                for (o, &j) in out.iter_mut().zip(orders) {
                    *o += m * loss_fn_g(l, j);
                }
            }
            let (pm, pl) = prev;
            if wants_first && k > 0 && (pl < 0.0) != (l < 0.0) {
                // zero crossing at fraction t of the cell; slope jump |dL| * p
                let t = pl / (pl - l);
                let mass = (1.0 - t) * full(k - 1, pm) + t * full(k, m);
                let b2 = t * t - t + 1.0 / 6.0;
                kink += 0.5 * (l - pl).abs() * mass * b2;
            }
            prev = (m, l);
        }
        for (o, &j) in out.iter_mut().zip(orders) {
            if j == 1 {
                *o = (*o + kink).max(0.0);
            }
        }
    }

    pub fn risk_measures(&self, orders: &[u32], portfolio: &Portfolio) -> Result<Vec<f64>> {
        self.check(portfolio)?;
        let mut out = alloc::vec![0.0; orders.len()];
        self.risk_measures_into(portfolio.quantities(), orders, &mut out);
        Ok(out)
    }
}

/// Free-function form of [`LossModel::loss_at`].
pub fn loss_at(x: f64, portfolio: &Portfolio, model: &LossModel) -> Result<f64> {
    model.loss_at(x, portfolio)
}

/// Free-function form of [`LossModel::risk_measure`].
pub fn risk_measure(order: u32, portfolio: &Portfolio, model: &LossModel) -> Result<f64> {
    model.risk_measure(order, portfolio)
}
