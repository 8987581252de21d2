//! Fixed-node quadrature rules.

use alloc::vec::Vec;
use core::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
///
/// Roots of `P_n` are found by Newton iteration from the Tricomi initial
/// guess; weights are `2 / ((1 - x^2) P_n'(x)^2)`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let mut rule = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((-x, w));
    }
    // Mirror the negative half; the middle root of an odd rule is shared.
    let half = rule.len();
    let mirrored = if n % 2 == 1 { half - 1 } else { half };
    for i in (0..mirrored).rev() {
        let (x, w) = rule[i];
        rule.push((-x, w));
    }
    if n % 2 == 1 {
        rule[half - 1].0 = 0.0;
    }
    rule
}

/// Three-term recurrence for `P_n(x)` and `P_n'(x)`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    gauss_legendre(n)
        .into_iter()
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// Equally spaced nodes on `[a, b]` with composite trapezoid weights.
///
/// On a uniform grid the trapezoid rule converges geometrically for smooth
/// integrands that decay at both ends, which is the case for every density
/// in this crate.
pub fn trapezoid_on(m: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    assert!(m >= 2, "trapezoid rule needs at least two nodes");
    let h = (b - a) / (m - 1) as f64;
    (0..m)
        .map(|i| {
            let x = if i == m - 1 { b } else { a + h * i as f64 };
            let w = if i == 0 || i == m - 1 { 0.5 * h } else { h };
            (x, w)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_rules_match_tables() {
        let two = gauss_legendre(2);
        let r = 1.0 / libm::sqrt(3.0);
        assert!((two[0].0 + r).abs() < 1e-15 && (two[1].0 - r).abs() < 1e-15);
        assert!((two[0].1 - 1.0).abs() < 1e-15);

        let three = gauss_legendre(3);
        let r = libm::sqrt(0.6);
        assert!((three[0].0 + r).abs() < 1e-15);
        assert_eq!(three[1].0, 0.0);
        assert!((three[1].1 - 8.0 / 9.0).abs() < 1e-15);
        assert!((three[2].1 - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in [1usize, 4, 7, 20, 101] {
            let rule = gauss_legendre(n);
            assert_eq!(rule.len(), n);
            assert!(rule.windows(2).all(|w| w[0].0 < w[1].0));
            let deg = 2 * n - 1;
            for k in 0..=deg.min(40) {
                let approx: f64 = rule.iter().map(|&(x, w)| w * libm::pow(x, k as f64)).sum();
                let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} k={k}: {approx} vs {exact}");
            }
        }
    }

    #[test]
    fn mapped_rule_integrates_exponential() {
        let rule = gauss_legendre_on(20, 0.0, 2.0);
        let v: f64 = rule.iter().map(|&(x, w)| w * libm::exp(x)).sum();
        assert!((v - (libm::exp(2.0) - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_endpoints_and_weights() {
        let rule = trapezoid_on(5, -1.0, 1.0);
        assert_eq!(rule.first().unwrap().0, -1.0);
        assert_eq!(rule.last().unwrap().0, 1.0);
        let total: f64 = rule.iter().map(|p| p.1).sum();
        assert!((total - 2.0).abs() < 1e-15);
    }
}
