use derivex_core::dist::{price_density_grid, QuadratureSpec, ReturnModel, VarianceBelief};
use derivex_core::exposure::{max_exposure, ExposureProblem};
use derivex_core::pricing::{instrument_value, valuation_difference, MarketEnv, Payoff, Portfolio};
use derivex_core::risk::{LossModel, RiskConstraint};
use proptest::prelude::*;
use std::sync::OnceLock;

fn env() -> MarketEnv {
    MarketEnv::new(0.02, 0.75).unwrap()
}

fn payoffs() -> Vec<Payoff> {
    vec![
        Payoff::call(1.05).unwrap(),
        Payoff::put(0.9).unwrap(),
        Payoff::piecewise(vec![(0.9, 0.0), (1.0, 0.1), (1.1, 0.0)], 0.0, 0.0).unwrap(),
    ]
}

fn problem() -> &'static ExposureProblem {
    static P: OnceLock<ExposureProblem> = OnceLock::new();
    P.get_or_init(|| {
        let quad = QuadratureSpec::default();
        let e = env();
        let implied = price_density_grid(
            &ReturnModel::new(e.growth(), VarianceBelief::new(0.03, 0.2).unwrap()).unwrap(),
            &quad,
        );
        let subjective = price_density_grid(
            &ReturnModel::new(1.04, VarianceBelief::new(0.035, 0.35).unwrap()).unwrap(),
            &quad,
        );
        ExposureProblem::new(&implied, subjective, payoffs(), e).unwrap()
    })
}

fn loss() -> &'static LossModel {
    problem().loss_model()
}

fn portfolio() -> impl Strategy<Value = Portfolio> {
    prop::collection::vec(-5.0..5.0f64, 3).prop_map(|q| Portfolio::new(q).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn risk_scales_with_the_order(n in portfolio(), lambda in 0.1..10.0f64, order in 0u32..4) {
        let base = loss().risk_measure(order, &n).unwrap();
        let scaled = loss().risk_measure(order, &n.scaled(lambda)).unwrap();
        if order == 0 {
            prop_assert_eq!(base, scaled);
        } else {
            let expect = lambda.powi(order as i32) * base;
            prop_assert!((scaled - expect).abs() <= 1e-9 * expect.abs().max(1e-300));
        }
    }

    #[test]
    fn valuation_difference_is_linear(a in portfolio(), b in portfolio(), s in -3.0..3.0f64) {
        let v = problem().valuations();
        let combo = Portfolio::new(
            a.quantities().iter().zip(b.quantities()).map(|(x, y)| x + s * y).collect(),
        ).unwrap();
        let lhs = valuation_difference(v, &combo).unwrap();
        let rhs = valuation_difference(v, &a).unwrap() + s * valuation_difference(v, &b).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12);
    }

    #[test]
    fn risks_stay_in_range(n in portfolio()) {
        let r = loss().risk_measures(&[0, 1, 2, 3], &n).unwrap();
        prop_assert!((0.0..=1.0).contains(&r[0]));
        prop_assert!(r.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn paying_more_never_lowers_risk(q in 0.1..5.0f64, premium_bump in 0.0..0.2f64, order in 0u32..4) {
        // a long position bought at a higher price loses more in every state
        let base = loss().market_values().to_vec();
        let mut dearer = base.clone();
        dearer[0] += premium_bump;
        let cheap = LossModel::new(loss().density().clone(), payoffs(), base, env()).unwrap();
        let dear = LossModel::new(loss().density().clone(), payoffs(), dearer, env()).unwrap();
        let n = Portfolio::new(vec![q, 0.0, 0.0]).unwrap();
        prop_assert!(dear.risk_measure(order, &n).unwrap() >= cheap.risk_measure(order, &n).unwrap());
    }

    #[test]
    fn tighter_bounds_never_allow_more(
        risks in prop::collection::vec(1e-4..1.0f64, 1..4),
        bounds in prop::collection::vec(0.01..1.0f64, 4),
        orders in prop::collection::vec(1u32..4, 4),
        shrink in 0.1..1.0f64,
    ) {
        let k = risks.len();
        let loose: Vec<_> = (0..k).map(|i| RiskConstraint::new(orders[i], bounds[i]).unwrap()).collect();
        let tight: Vec<_> = (0..k).map(|i| RiskConstraint::new(orders[i], bounds[i] * shrink).unwrap()).collect();
        let a = max_exposure(&risks, &loose, 1e6).unwrap();
        let b = max_exposure(&risks, &tight, 1e6).unwrap();
        prop_assert!(b.n_max <= a.n_max);
    }

    #[test]
    fn n_max_saturates_the_binding_constraint(
        angles in (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU),
        bound in 0.01..0.5f64,
        order in 1u32..4,
    ) {
        let d = derivex_core::exposure::Direction::new(vec![angles.0, angles.1]).unwrap();
        let c = [RiskConstraint::new(order, bound).unwrap()];
        let e = problem().max_exposure(&d, &c).unwrap();
        prop_assume!(e.binding_constraint.is_some());
        let at = loss().risk_measure(order, &derivex_core::exposure::to_cartesian(e.n_max, &d)).unwrap();
        prop_assert!((at - bound).abs() <= 1e-9 * bound);
    }
}

#[test]
fn cash_carries_no_risk_at_market_price() {
    let e = env();
    let g = loss().density().clone();
    let cash = Payoff::Cash;
    let v = instrument_value(&g, &cash, &e);
    let m = LossModel::new(g, vec![cash], vec![v], e).unwrap();
    for order in 0..4 {
        let r = m.risk_measure(order, &Portfolio::new(vec![3.0]).unwrap()).unwrap();
        assert!(r.abs() < 1e-12, "order {order}: {r}");
    }
}

#[test]
fn expected_loss_matches_change_of_variables() {
    use derivex_core::dist::LogReturnMixture;
    let quad = QuadratureSpec::default();
    let e = env();
    let model = ReturnModel::new(1.04, VarianceBelief::new(0.035, 0.35).unwrap()).unwrap();
    let mix = LogReturnMixture::new(&model, &quad);
    let grid = price_density_grid(&model, &quad);
    let premium = 0.97;
    let m = LossModel::new(grid, vec![Payoff::Forward], vec![premium], e).unwrap();
    let paid = premium * e.growth();

    for q in [0.5f64, 2.0, 10.0, -0.5, -2.0, -10.0] {
        // L = q (x - paid) is monotone; integrate |L| p_L over L < 0
        let (lo, hi) = if q > 0.0 { (-q * paid, 0.0) } else { (q * (40.0 - paid), 0.0) };
        let steps = 200_000;
        let h = (hi - lo) / steps as f64;
        let integrand = |l: f64| {
            let x = paid + l / q;
            if x <= 0.0 { 0.0 } else { -l * mix.price_pdf(x) / q.abs() }
        };
        let inner: f64 = (1..steps).map(|i| integrand(lo + h * i as f64)).sum();
        let oracle = (inner + 0.5 * (integrand(lo) + integrand(hi))) * h;
        let got = m.risk_measure(1, &Portfolio::new(vec![q]).unwrap()).unwrap();
        assert!((got - oracle).abs() <= 1e-6, "q={q}: {got} vs {oracle}");
    }
}
