//! Exposure directions, maximum feasible exposure and the direction search.
//!
//! A portfolio of `N` instruments is written as a radius `n` (Euclidean norm
//! of the contract counts) and `N - 1` hyperspherical angles:
//!
//! ```text
//! n_1 = n cos(a_1)
//! n_j = n cos(a_j) sin(a_1) ... sin(a_{j-1})
//! n_N = n sin(a_1) ... sin(a_{N-1})
//! ```
//!
//! with `a_j` in `[0, pi]` except the last angle, which covers `[0, 2 pi)`.
//! Along a fixed direction every `rho_j` grows like `n^j` and the valuation
//! difference like `n`, so each constraint caps the radius in closed form and
//! only the direction needs to be searched.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dist::DensityGrid;
use crate::error::{Error, Result};
use crate::pricing::{value_pair, MarketEnv, Payoff, Portfolio, ValuationPair};
use crate::risk::{LossModel, RiskConstraint};

/// Exposure angles in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Validates the canonical ranges: the last angle in `[0, 2 pi)`, the
    /// others in `[0, pi]`.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if let Some((last, polar)) = angles.split_last() {
            if !polar.iter().all(|a| (0.0..=PI).contains(a)) {
                return Err(Error::Domain("polar exposure angles must lie in [0, pi]"));
            }
            if !(0.0..TAU).contains(last) {
                return Err(Error::Domain("the last exposure angle must lie in [0, 2 pi)"));
            }
        }
        Ok(Self(angles))
    }

    /// From degrees, wrapping the last angle into `[0, 360)`.
    pub fn from_degrees(degrees: &[f64]) -> Result<Self> {
        let mut angles: Vec<f64> = degrees.iter().map(|d| d.to_radians()).collect();
        if let Some(last) = angles.last_mut() {
            let r = libm::fmod(*last, TAU);
            let r = if r < 0.0 { r + TAU } else { r };
            *last = if r >= TAU { 0.0 } else { r };
        }
        Self::new(angles)
    }

    /// The pole `(1, 0, ..., 0)` for `instruments` instruments.
    pub fn pole(instruments: usize) -> Self {
        Self(vec![0.0; instruments.saturating_sub(1)])
    }

    pub fn angles(&self) -> &[f64] {
        &self.0
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.0.iter().map(|a| a.to_degrees()).collect()
    }

    /// Number of instruments this direction spans.
    pub fn instruments(&self) -> usize {
        self.0.len() + 1
    }
}

/// Contract counts at radius `n` along `direction`.
pub fn to_cartesian(n: f64, direction: &Direction) -> Portfolio {
    let angles = direction.angles();
    let mut out = Vec::with_capacity(angles.len() + 1);
    let mut sin_prod = n;
    for &a in angles {
        out.push(sin_prod * libm::cos(a));
        sin_prod *= libm::sin(a);
    }
    out.push(sin_prod);
    Portfolio::new(out).expect("finite radius and angles give finite counts")
}

/// A portfolio in exposure coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalPoint {
    pub radius: f64,
    pub direction: Direction,
    /// Set for the zero portfolio, whose angles are arbitrary (reported as 0).
    pub degenerate: bool,
}

/// Inverse of [`to_cartesian`].
///
/// Each polar angle is `atan2(|tail|, n_j)` where `tail` is the remaining
/// sub-vector; the last angle is `atan2(n_N, n_{N-1})` wrapped to `[0, 2 pi)`.
pub fn from_cartesian(portfolio: &Portfolio) -> SphericalPoint {
    let q = portfolio.quantities();
    let dims = q.len();
    // suffix[j] = |(q_j, ..., q_N)|
    let mut suffix = vec![0.0; dims + 1];
    for j in (0..dims).rev() {
        suffix[j] = libm::hypot(suffix[j + 1], q[j]);
    }
    let radius = suffix[0];
    if radius == 0.0 {
        return SphericalPoint { radius, direction: Direction::pole(dims), degenerate: true };
    }
    let mut angles = Vec::with_capacity(dims.saturating_sub(1));
    if dims >= 2 {
        for j in 0..dims - 2 {
            angles.push(libm::atan2(suffix[j + 1], q[j]));
        }
        let last = libm::atan2(q[dims - 1], q[dims - 2]);
        let mut last = if last < 0.0 { last + TAU } else { last };
        if last >= TAU {
            last = 0.0;
        }
        angles.push(last);
    }
    SphericalPoint { radius, direction: Direction(angles), degenerate: false }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExposureStatus {
    Feasible,
    /// A loss-probability constraint is violated at every positive radius.
    Infeasible,
    /// No constraint limits the radius (or the limit exceeds the cap); the
    /// radius is set to the cap.
    UnboundedCapped,
}

impl ExposureStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExposureStatus::Feasible => "feasible",
            ExposureStatus::Infeasible => "infeasible",
            ExposureStatus::UnboundedCapped => "unbounded-capped",
        }
    }
}

/// Largest admissible radius along one direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibleExposure {
    pub status: ExposureStatus,
    pub n_max: f64,
    /// Index into the constraint list of the limiting (or violated) constraint.
    pub binding_constraint: Option<usize>,
}

impl FeasibleExposure {
    pub fn admits_exposure(&self) -> bool {
        self.status != ExposureStatus::Infeasible
    }
}

/// Default radius used for directions no constraint limits.
pub const DEFAULT_EXPOSURE_CAP: f64 = 1e6;

/// Maximum exposure from the risks of the unit portfolio along a direction.
///
/// `unit_risks[k]` is `rho_{constraints[k].order}` at radius 1. Any violated
/// order-0 constraint makes the direction infeasible since `rho_0` does not
/// depend on the radius. Otherwise the radius is
/// `min_k (bound_k / rho_k)^(1 / order_k)` over the remaining constraints.
pub fn max_exposure(
    unit_risks: &[f64],
    constraints: &[RiskConstraint],
    cap: f64,
) -> Result<FeasibleExposure> {
    if constraints.is_empty() {
        return Err(Error::Usage("at least one risk constraint is required"));
    }
    if unit_risks.len() != constraints.len() {
        return Err(Error::LengthMismatch { expected: constraints.len(), actual: unit_risks.len() });
    }
    for (k, (c, &rho)) in constraints.iter().zip(unit_risks).enumerate() {
        if c.order() == 0 && !c.is_satisfied_by(rho) {
            return Ok(FeasibleExposure {
                status: ExposureStatus::Infeasible,
                n_max: 0.0,
                binding_constraint: Some(k),
            });
        }
    }
    let mut best: Option<(f64, usize)> = None;
    for (k, (c, &rho)) in constraints.iter().zip(unit_risks).enumerate() {
        if c.order() == 0 || rho <= 0.0 {
            continue;
        }
        let ratio = c.bound() / rho;
        let n = match c.order() {
            1 => ratio,
            2 => libm::sqrt(ratio),
            j => libm::pow(ratio, 1.0 / j as f64),
        };
        if best.is_none_or(|(b, _)| n < b) {
            best = Some((n, k));
        }
    }
    Ok(match best {
        Some((n, k)) if n <= cap => FeasibleExposure {
            status: ExposureStatus::Feasible,
            n_max: n,
            binding_constraint: Some(k),
        },
        _ => FeasibleExposure {
            status: ExposureStatus::UnboundedCapped,
            n_max: cap,
            binding_constraint: None,
        },
    })
}

/// Evaluation of one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanRecord {
    pub direction: Direction,
    pub exposure: FeasibleExposure,
    /// `rho_j` of the unit portfolio, one per constraint.
    pub unit_risks: Vec<f64>,
    /// Valuation difference of the unit portfolio.
    pub unit_xi: f64,
    /// Valuation difference at `n_max`; 0 when the direction is infeasible
    /// or does not gain.
    pub best_xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimumStatus {
    Feasible,
    UnboundedCapped,
    /// No direction gains; the zero portfolio is optimal.
    Flat,
}

impl OptimumStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptimumStatus::Feasible => "feasible",
            OptimumStatus::UnboundedCapped => "unbounded-capped",
            OptimumStatus::Flat => "flat",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub direction: Direction,
    pub n: f64,
    pub quantities: Portfolio,
    pub xi: f64,
    pub status: OptimumStatus,
    pub binding_constraint: Option<usize>,
}

impl Optimum {
    /// The zero portfolio for `instruments` instruments.
    pub fn flat(instruments: usize) -> Self {
        Self {
            direction: Direction::pole(instruments),
            n: 0.0,
            quantities: Portfolio::zero(instruments),
            xi: 0.0,
            status: OptimumStatus::Flat,
            binding_constraint: None,
        }
    }

    /// Best portfolio along the record's ray; the zero portfolio when the
    /// ray does not gain.
    pub fn from_record(record: &ScanRecord) -> Self {
        if record.best_xi > 0.0 {
            let n = record.exposure.n_max;
            let status = match record.exposure.status {
                ExposureStatus::UnboundedCapped => OptimumStatus::UnboundedCapped,
                _ => OptimumStatus::Feasible,
            };
            Self {
                direction: record.direction.clone(),
                n,
                quantities: to_cartesian(n, &record.direction),
                xi: record.best_xi,
                status,
                binding_constraint: record.exposure.binding_constraint,
            }
        } else {
            Self::flat(record.direction.instruments())
        }
    }
}

/// Lexicographic comparison of angle vectors.
pub fn compare_angles(a: &Direction, b: &Direction) -> Ordering {
    for (x, y) in a.angles().iter().zip(b.angles()) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.angles().len().cmp(&b.angles().len())
}

/// `true` if `a` should be preferred over `b`: larger `best_xi`, ties to the
/// lexicographically smaller direction.
pub fn better_record(a: &ScanRecord, b: &ScanRecord) -> bool {
    match a.best_xi.total_cmp(&b.best_xi) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => compare_angles(&a.direction, &b.direction) == Ordering::Less,
    }
}

/// Picks the optimum from a set of records in any order.
pub fn select_optimum(records: &[ScanRecord], instruments: usize) -> Optimum {
    records
        .iter()
        .fold(None::<&ScanRecord>, |best, r| match best {
            Some(b) if !better_record(r, b) => Some(b),
            _ => Some(r),
        })
        .map(Optimum::from_record)
        .unwrap_or_else(|| Optimum::flat(instruments))
}

/// Uniform grid over the exposure angles.
///
/// `resolution` is the number of nodes on the last (full-circle) angle, with
/// spacing `2 pi / resolution`. Polar angles use `resolution / 2` steps of
/// `pi / (resolution / 2)` and include both poles. Nodes are enumerated in
/// lexicographic angle order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AngleGrid {
    instruments: usize,
    resolution: usize,
}

impl AngleGrid {
    pub const MIN_RESOLUTION: usize = 8;

    pub fn new(instruments: usize, resolution: usize) -> Result<Self> {
        if instruments < 2 {
            return Err(Error::Usage("exposure angles require at least two instruments"));
        }
        if resolution < Self::MIN_RESOLUTION {
            return Err(Error::Usage("grid resolution must be at least 8 per angle"));
        }
        Ok(Self { instruments, resolution })
    }

    /// Default resolution for a given instrument count.
    pub fn default_resolution(instruments: usize) -> usize {
        match instruments {
            0..=2 => 720,
            3 => 360,
            _ => 32,
        }
    }

    pub fn instruments(&self) -> usize {
        self.instruments
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    fn polar_steps(&self) -> usize {
        self.resolution / 2
    }

    /// Node counts per angle, first angle first.
    pub fn shape(&self) -> Vec<usize> {
        let mut shape = vec![self.polar_steps() + 1; self.instruments - 2];
        shape.push(self.resolution);
        shape
    }

    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn polar_angle(&self, k: usize) -> f64 {
        k as f64 * PI / self.polar_steps() as f64
    }

    pub fn azimuth_angle(&self, k: usize) -> f64 {
        k as f64 * TAU / self.resolution as f64
    }

    /// Direction of the node with flat index `index` (row-major, last angle
    /// fastest).
    pub fn direction(&self, index: usize) -> Direction {
        let shape = self.shape();
        let mut rem = index;
        let mut idx = vec![0usize; shape.len()];
        for (slot, &len) in idx.iter_mut().zip(&shape).rev() {
            *slot = rem % len;
            rem /= len;
        }
        let last = idx.len() - 1;
        let angles = idx
            .iter()
            .enumerate()
            .map(|(j, &k)| if j == last { self.azimuth_angle(k) } else { self.polar_angle(k) })
            .collect();
        Direction(angles)
    }

    pub fn directions(&self) -> impl Iterator<Item = Direction> + '_ {
        (0..self.len()).map(move |i| self.direction(i))
    }
}

/// Records for every grid node plus the selected optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanOutcome {
    pub records: Vec<ScanRecord>,
    pub optimum: Optimum,
}

/// Valuation differences and the subjective loss model for a fixed set of
/// instruments.
#[derive(Debug, Clone)]
pub struct ExposureProblem {
    valuations: Vec<ValuationPair>,
    unit_gain: Vec<f64>,
    loss: LossModel,
    cap: f64,
}

impl ExposureProblem {
    /// Values every payoff under both densities and builds the loss model
    /// on the subjective one.
    pub fn new(
        implied: &DensityGrid,
        subjective: DensityGrid,
        payoffs: Vec<Payoff>,
        env: MarketEnv,
    ) -> Result<Self> {
        let valuations: Vec<ValuationPair> =
            payoffs.iter().map(|p| value_pair(implied, &subjective, p, &env)).collect();
        let market = valuations.iter().map(|v| v.market_value).collect();
        let loss = LossModel::new(subjective, payoffs, market, env)?;
        Self::from_parts(valuations, loss)
    }

    pub fn from_parts(valuations: Vec<ValuationPair>, loss: LossModel) -> Result<Self> {
        if valuations.len() != loss.instruments() {
            return Err(Error::LengthMismatch {
                expected: loss.instruments(),
                actual: valuations.len(),
            });
        }
        let unit_gain = valuations.iter().map(|v| v.difference()).collect();
        Ok(Self { valuations, unit_gain, loss, cap: DEFAULT_EXPOSURE_CAP })
    }

    /// Radius reported for directions no constraint limits.
    pub fn with_cap(mut self, cap: f64) -> Result<Self> {
        if !(cap.is_finite() && cap > 0.0) {
            return Err(Error::Domain("exposure cap must be positive"));
        }
        self.cap = cap;
        Ok(self)
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn instruments(&self) -> usize {
        self.valuations.len()
    }

    pub fn valuations(&self) -> &[ValuationPair] {
        &self.valuations
    }

    pub fn loss_model(&self) -> &LossModel {
        &self.loss
    }

    fn check_direction(&self, direction: &Direction) -> Result<()> {
        if direction.instruments() != self.instruments() {
            return Err(Error::LengthMismatch {
                expected: self.instruments() - 1,
                actual: direction.angles().len(),
            });
        }
        Ok(())
    }

    /// Valuation difference of the unit portfolio along `direction`.
    pub fn unit_xi(&self, direction: &Direction) -> Result<f64> {
        self.check_direction(direction)?;
        Ok(self.dot_gain(to_cartesian(1.0, direction).quantities()))
    }

    fn dot_gain(&self, quantities: &[f64]) -> f64 {
        quantities.iter().zip(&self.unit_gain).map(|(n, d)| n * d).sum()
    }

    /// `rho_j` of the unit portfolio for each order.
    pub fn unit_risks(&self, direction: &Direction, orders: &[u32]) -> Result<Vec<f64>> {
        self.check_direction(direction)?;
        let unit = to_cartesian(1.0, direction);
        let mut out = vec![0.0; orders.len()];
        self.loss.risk_measures_into(unit.quantities(), orders, &mut out);
        Ok(out)
    }

    pub fn max_exposure(
        &self,
        direction: &Direction,
        constraints: &[RiskConstraint],
    ) -> Result<FeasibleExposure> {
        let orders: Vec<u32> = constraints.iter().map(|c| c.order()).collect();
        let risks = self.unit_risks(direction, &orders)?;
        max_exposure(&risks, constraints, self.cap)
    }

    /// Full evaluation of one direction.
    pub fn evaluate(
        &self,
        direction: &Direction,
        constraints: &[RiskConstraint],
    ) -> Result<ScanRecord> {
        self.check_direction(direction)?;
        let unit = to_cartesian(1.0, direction);
        let orders: Vec<u32> = constraints.iter().map(|c| c.order()).collect();
        let mut unit_risks = vec![0.0; orders.len()];
        self.loss.risk_measures_into(unit.quantities(), &orders, &mut unit_risks);
        let exposure = max_exposure(&unit_risks, constraints, self.cap)?;
        let unit_xi = self.dot_gain(unit.quantities());
        let best_xi = if exposure.admits_exposure() && unit_xi > 0.0 {
            exposure.n_max * unit_xi
        } else {
            0.0
        };
        Ok(ScanRecord { direction: direction.clone(), exposure, unit_risks, unit_xi, best_xi })
    }

    /// Evaluates every node of the grid and selects the optimum.
    pub fn scan(&self, resolution: usize, constraints: &[RiskConstraint]) -> Result<ScanOutcome> {
        let grid = self.grid(resolution, constraints)?;
        let records = grid
            .directions()
            .map(|d| self.evaluate(&d, constraints))
            .collect::<Result<Vec<_>>>()?;
        let optimum = select_optimum(&records, self.instruments());
        Ok(ScanOutcome { records, optimum })
    }

    /// Validated grid for a scan of this problem.
    pub fn grid(&self, resolution: usize, constraints: &[RiskConstraint]) -> Result<AngleGrid> {
        if constraints.is_empty() {
            return Err(Error::Usage("at least one risk constraint is required"));
        }
        AngleGrid::new(self.instruments(), resolution)
    }

    /// Seeded stochastic local search in angle space starting at `seed`.
    ///
    /// Each iteration perturbs every angle uniformly within the current step
    /// and keeps the candidate only if it improves the valuation difference.
    /// The step widens after a success and narrows after a failure. The
    /// result is never worse than the seed and depends only on the inputs
    /// and `rng_seed`.
    pub fn stochastic_refine(
        &self,
        seed: &Optimum,
        constraints: &[RiskConstraint],
        iterations: usize,
        rng_seed: u64,
    ) -> Result<Optimum> {
        self.check_direction(&seed.direction)?;
        if iterations == 0 {
            return Ok(seed.clone());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
        let mut current = seed.direction.clone();
        let mut current_xi = seed.xi;
        let mut best: Option<ScanRecord> = None;
        let mut step = PI / 16.0;
        for _ in 0..iterations {
            let trial: Vec<f64> = current
                .angles()
                .iter()
                .map(|a| a + rng.random_range(-step..=step))
                .collect();
            // round-trip through the counts to land back in canonical ranges
            let canonical = from_cartesian(&to_cartesian(1.0, &Direction(trial))).direction;
            let record = self.evaluate(&canonical, constraints)?;
            if record.best_xi > current_xi {
                current_xi = record.best_xi;
                current = canonical;
                best = Some(record);
                step = (step * 1.5).min(PI);
            } else {
                step = (step * 0.9).max(1e-12);
            }
        }
        Ok(match best {
            Some(r) => Optimum::from_record(&r),
            None => seed.clone(),
        })
    }
}
