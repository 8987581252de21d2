//! Uncertain-variance log-return distributions.
//!
//! Conditional on its variance `s`, the log return over the horizon is normal
//! with mean `ln(mu) - s/2`, which keeps the gross mean return `E[e^l]` at
//! `mu` for every `s`. The variance itself is uncertain with a log-normal
//! belief (median `alpha`, log-standard-deviation `beta`); marginalizing over
//! it gives a fat-tailed log-return density that still has gross mean `mu`.
//!
//! Final prices are expressed as fractions of the current spot, `x = e^l`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre_on, trapezoid_on};

/// Log-normal belief about the variance of the log return over the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceBelief {
    alpha: f64,
    beta: f64,
}

impl VarianceBelief {
    /// `alpha` is the median variance, `beta` the standard deviation of
    /// `ln(variance)`. `beta = 0` means the variance is known to be `alpha`.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::Domain("variance scale alpha must be positive"));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::Domain("variance uncertainty beta must be non-negative"));
        }
        Ok(Self { alpha, beta })
    }

    /// Known variance `alpha`.
    pub fn known(alpha: f64) -> Result<Self> {
        Self::new(alpha, 0.0)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn is_degenerate(&self) -> bool {
        self.beta == 0.0
    }

    /// `gamma = exp(beta^2 / 2)`.
    pub fn gamma(&self) -> f64 {
        libm::exp(0.5 * self.beta * self.beta)
    }
}

/// Gross mean return `mu` together with a variance belief.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnModel {
    mu: f64,
    belief: VarianceBelief,
}

impl ReturnModel {
    pub fn new(mu: f64, belief: VarianceBelief) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::Domain("gross mean return mu must be positive"));
        }
        Ok(Self { mu, belief })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn belief(&self) -> VarianceBelief {
        self.belief
    }
}

/// Discretization of the log-return axis and of the variance mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    log_return_nodes: usize,
    log_return_halfwidth: f64,
    variance_nodes: usize,
    variance_halfwidth: f64,
}

impl QuadratureSpec {
    pub const DEFAULT_LOG_RETURN_NODES: usize = 2001;
    pub const DEFAULT_LOG_RETURN_HALFWIDTH: f64 = 10.0;
    pub const DEFAULT_VARIANCE_NODES: usize = 101;
    pub const DEFAULT_VARIANCE_HALFWIDTH: f64 = 8.0;

    /// `log_return_nodes` must be odd and at least 3, `variance_nodes` at
    /// least 1, both halfwidths positive.
    pub fn new(
        log_return_nodes: usize,
        log_return_halfwidth: f64,
        variance_nodes: usize,
        variance_halfwidth: f64,
    ) -> Result<Self> {
        if log_return_nodes < 3 || log_return_nodes.is_multiple_of(2) {
            return Err(Error::Domain("log_return_nodes must be odd and at least 3"));
        }
        if variance_nodes < 1 {
            return Err(Error::Domain("variance_nodes must be at least 1"));
        }
        if !(log_return_halfwidth.is_finite() && log_return_halfwidth > 0.0) {
            return Err(Error::Domain("log_return_halfwidth must be positive"));
        }
        if !(variance_halfwidth.is_finite() && variance_halfwidth > 0.0) {
            return Err(Error::Domain("variance_halfwidth must be positive"));
        }
        Ok(Self {
            log_return_nodes,
            log_return_halfwidth,
            variance_nodes,
            variance_halfwidth,
        })
    }

    pub fn log_return_nodes(&self) -> usize {
        self.log_return_nodes
    }

    pub fn log_return_halfwidth(&self) -> f64 {
        self.log_return_halfwidth
    }

    pub fn variance_nodes(&self) -> usize {
        self.variance_nodes
    }

    pub fn variance_halfwidth(&self) -> f64 {
        self.variance_halfwidth
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            log_return_nodes: Self::DEFAULT_LOG_RETURN_NODES,
            log_return_halfwidth: Self::DEFAULT_LOG_RETURN_HALFWIDTH,
            variance_nodes: Self::DEFAULT_VARIANCE_NODES,
            variance_halfwidth: Self::DEFAULT_VARIANCE_HALFWIDTH,
        }
    }
}

/// Discretized density of the final asset price (spot = 1).
///
/// Integrals are `sum_i weights[i] * density[i] * f(nodes[i])`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    density: Vec<f64>,
}

impl DensityGrid {
    /// Accepts a tabulated density. Nodes must be positive and strictly
    /// increasing, weights positive, density values non-negative.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Usage("density grid needs at least one node"));
        }
        if weights.len() != nodes.len() {
            return Err(Error::LengthMismatch { expected: nodes.len(), actual: weights.len() });
        }
        if density.len() != nodes.len() {
            return Err(Error::LengthMismatch { expected: nodes.len(), actual: density.len() });
        }
        if !nodes.iter().all(|x| x.is_finite() && *x > 0.0) {
            return Err(Error::Domain("grid nodes must be positive"));
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Domain("grid nodes must be strictly increasing"));
        }
        if !weights.iter().all(|w| w.is_finite() && *w > 0.0) {
            return Err(Error::Domain("quadrature weights must be positive"));
        }
        if !density.iter().all(|p| p.is_finite() && *p >= 0.0) {
            return Err(Error::Domain("density values must be non-negative"));
        }
        Ok(Self { nodes, weights, density })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Probability mass `w_i * p_i` carried by each node.
    pub fn masses(&self) -> impl Iterator<Item = f64> + '_ {
        self.weights.iter().zip(&self.density).map(|(w, p)| w * p)
    }

    /// `E[f(x)]` under the grid.
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(self.masses()).map(|(&x, m)| m * f(x)).sum()
    }

    /// Total mass; 1 up to quadrature error for a proper density.
    pub fn total_mass(&self) -> f64 {
        self.masses().sum()
    }
}

/// `ln(mu) - sigma2 / 2`: the log-mean that keeps the gross mean at `mu`.
pub fn log_mean_nu(mu: f64, sigma2: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain("mu must be positive"));
    }
    if !(sigma2 >= 0.0) {
        return Err(Error::Domain("variance must be non-negative"));
    }
    Ok(libm::log(mu) - 0.5 * sigma2)
}

/// Normal density of the log return with known variance `sigma2`.
pub fn conditional_logreturn_pdf(l: f64, mu: f64, sigma2: f64) -> Result<f64> {
    if !(sigma2 > 0.0) {
        return Err(Error::Domain("conditional density needs a positive variance"));
    }
    let nu = log_mean_nu(mu, sigma2)?;
    Ok(normal_pdf(l, nu, sigma2))
}

fn normal_pdf(l: f64, mean: f64, var: f64) -> f64 {
    let d = l - mean;
    libm::exp(-0.5 * d * d / var) / libm::sqrt(2.0 * PI * var)
}

/// Log-normal density of the variance under `belief`.
pub fn variance_pdf(sigma2: f64, belief: &VarianceBelief) -> Result<f64> {
    if belief.is_degenerate() {
        return Err(Error::DegenerateVariance);
    }
    if !(sigma2 > 0.0) {
        return Err(Error::Domain("variance must be positive"));
    }
    let b = belief.beta;
    let z = (libm::log(sigma2) - libm::log(belief.alpha)) / b;
    Ok(libm::exp(-0.5 * z * z) / (sigma2 * b * libm::sqrt(2.0 * PI)))
}

/// `(E[s], E[s^2])` for the variance `s`: `(alpha*gamma, alpha^2*gamma^4)`.
pub fn variance_moments(belief: &VarianceBelief) -> (f64, f64) {
    let a = belief.alpha;
    let g = belief.gamma();
    let g2 = g * g;
    (a * g, a * a * g2 * g2)
}

/// Closed-form mean and variance of the marginal log return.
///
/// Mean `ln(mu) - alpha*gamma/2`, variance
/// `alpha*gamma + alpha^2 gamma^2 (gamma^2 - 1) / 4`.
pub fn analytic_logreturn_stats(model: &ReturnModel) -> (f64, f64) {
    let a = model.belief.alpha;
    let g = model.belief.gamma();
    let lambda = libm::log(model.mu) - 0.5 * a * g;
    let xi = a * g + 0.25 * a * a * g * g * (g * g - 1.0);
    (lambda, xi)
}

/// The variance mixture discretized as a finite set of normal components.
///
/// Nodes are Gauss-Legendre points in `u = ln(variance)` over
/// `ln(alpha) +- h*beta`; weights are renormalized to sum to one so every
/// component keeps `E[e^l] = mu` and the mixture does too.
#[derive(Debug, Clone, PartialEq)]
pub struct LogReturnMixture {
    mu: f64,
    log_mu: f64,
    components: Vec<Component>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Component {
    weight: f64,
    mean: f64,
    var: f64,
    norm: f64,
}

impl Component {
    fn new(weight: f64, log_mu: f64, var: f64) -> Self {
        Self {
            weight,
            mean: log_mu - 0.5 * var,
            var,
            norm: weight / libm::sqrt(2.0 * PI * var),
        }
    }
}

impl LogReturnMixture {
    pub fn new(model: &ReturnModel, quad: &QuadratureSpec) -> Self {
        let belief = model.belief;
        let log_mu = libm::log(model.mu);
        let components = if belief.is_degenerate() {
            alloc::vec![Component::new(1.0, log_mu, belief.alpha)]
        } else {
            let center = libm::log(belief.alpha);
            let half = quad.variance_halfwidth * belief.beta;
            let rule = gauss_legendre_on(quad.variance_nodes, center - half, center + half);
            // Density of u = ln(s) is normal with mean ln(alpha), sd beta.
            let raw: Vec<(f64, f64)> = rule
                .iter()
                .map(|&(u, w)| (u, w * normal_pdf(u, center, belief.beta * belief.beta)))
                .collect();
            let total: f64 = raw.iter().map(|c| c.1).sum();
            raw.into_iter()
                .map(|(u, w)| Component::new(w / total, log_mu, libm::exp(u)))
                .collect()
        };
        Self { mu: model.mu, log_mu, components }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Number of normal components.
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// `(weight, variance)` of each component.
    pub fn components(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.components.iter().map(|c| (c.weight, c.var))
    }

    /// Mixture density at log return `l`.
    pub fn pdf(&self, l: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let d = l - c.mean;
                c.norm * libm::exp(-0.5 * d * d / c.var)
            })
            .sum()
    }

    /// Density of the final price `x = e^l`.
    pub fn price_pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        self.pdf(libm::log(x)) / x
    }

    /// Log of the gross mean return.
    pub fn log_mu(&self) -> f64 {
        self.log_mu
    }
}

/// Marginal log-return density at `l` for the uncertain-variance model.
///
/// Builds the mixture on every call; hold a [`LogReturnMixture`] when
/// evaluating many points.
pub fn marginal_logreturn_pdf(l: f64, model: &ReturnModel, quad: &QuadratureSpec) -> f64 {
    LogReturnMixture::new(model, quad).pdf(l)
}

/// Scale used to place the log-return grid.
///
/// `sqrt(xi*)` for the known-variance case, widened by `exp(1.5*beta)` so
/// the heavier tails of the variance mixture stay inside the grid.
pub fn effective_log_std(model: &ReturnModel) -> f64 {
    let (_, xi) = analytic_logreturn_stats(model);
    libm::sqrt(xi) * libm::exp(1.5 * model.belief.beta)
}

/// Final-price density on a grid uniform in log return, centred on the
/// analytic mean log return and spanning `k` effective standard deviations.
pub fn price_density_grid(model: &ReturnModel, quad: &QuadratureSpec) -> DensityGrid {
    let mixture = LogReturnMixture::new(model, quad);
    let (lambda, _) = analytic_logreturn_stats(model);
    let half = quad.log_return_halfwidth * effective_log_std(model);
    let rule = trapezoid_on(quad.log_return_nodes, lambda - half, lambda + half);

    let mut nodes = Vec::with_capacity(rule.len());
    let mut weights = Vec::with_capacity(rule.len());
    let mut density = Vec::with_capacity(rule.len());
    for (l, w) in rule {
        let x = libm::exp(l);
        nodes.push(x);
        // dx = x dl, p(x) = p(l) / x
        weights.push(w * x);
        density.push(mixture.pdf(l) / x);
    }
    DensityGrid { nodes, weights, density }
}
