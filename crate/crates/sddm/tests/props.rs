//! Property-based invariants for the model, oracle, estimation, and
//! portfolio layers.

use proptest::prelude::*;
use sddm::error::Stock;
use sddm::estimate::{discretize, joint_table, ols, GrowthSample, Method};
use sddm::model::{GrowthDistribution, JointGrowthModel, StockSpec};
use sddm::oracle::{
    auto_horizon, enumerate_dividend_product, tail_bound, truncated_price_product,
};
use sddm::portfolio::{
    expected_utility, min_variance_weight, optimal_weight, portfolio_at, ReturnMoments,
};

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// Strictly increasing growth states in a range where all closed forms below
/// are guaranteed to converge for discount rates above 0.75.
fn growth_states(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-0.4..0.6f64, n).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        for i in 1..v.len() {
            if v[i] - v[i - 1] < 1e-3 {
                v[i] = v[i - 1] + 1e-3;
            }
        }
        v
    })
}

/// Positive cell weights normalized into a joint probability table.
fn joint_cells(n_a: usize, n_b: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    proptest::collection::vec(0.05..1.0f64, n_a * n_b).prop_map(move |w| {
        let total: f64 = w.iter().sum();
        (0..n_a)
            .map(|i| (0..n_b).map(|l| w[i * n_b + l] / total).collect())
            .collect()
    })
}

/// A two-stock model whose price variances and covariance all exist: with
/// states inside (-0.4, 0.61) the worst-case variance bound is cleared by any
/// discount rate above 0.75.
fn arb_model() -> impl Strategy<Value = JointGrowthModel<f64>> {
    (1usize..=3, 1usize..=3).prop_flat_map(|(n_a, n_b)| {
        (
            growth_states(n_a),
            growth_states(n_b),
            joint_cells(n_a, n_b),
            0.75..1.2f64,
            0.75..1.2f64,
            0.1..5.0f64,
            0.1..5.0f64,
        )
            .prop_map(|(sa, sb, cells, ka, kb, da, db)| {
                JointGrowthModel::from_joint_table(da, ka, sa, db, kb, sb, cells)
                    .expect("generated tables are valid")
            })
    })
}

/// A single stock whose price variance exists.
fn arb_stock() -> impl Strategy<Value = StockSpec<f64>> {
    (1usize..=3).prop_flat_map(|n| {
        (
            growth_states(n),
            proptest::collection::vec(0.05..1.0f64, n),
            0.75..1.2f64,
            0.1..5.0f64,
        )
            .prop_map(|(states, weights, k, d)| {
                let total: f64 = weights.iter().sum();
                let probs = weights.iter().map(|w| w / total).collect();
                let growth = GrowthDistribution::new(states, probs).unwrap();
                StockSpec::new(d, k, growth).expect("generated stocks are valid")
            })
    })
}

/// Valid return moments with correlation bounded away from +/-1; the optimal
/// weight denominator is then bounded away from zero.
fn arb_moments() -> impl Strategy<Value = ReturnMoments<f64>> {
    (
        -0.2..0.3f64,
        -0.2..0.3f64,
        1e-4..1.0f64,
        1e-4..1.0f64,
        -0.95..0.95f64,
    )
        .prop_map(|(ma, mb, va, vb, rho)| {
            ReturnMoments::new(ma, mb, va, vb, rho * (va * vb).sqrt()).unwrap()
        })
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
}

// ---------------------------------------------------------------------------
// Model and closed-form moment invariants
// ---------------------------------------------------------------------------

proptest! {
    /// Pairing a stock with itself must reproduce its own variance through
    /// the covariance formula.
    #[test]
    fn self_paired_covariance_equals_variance(s in arb_stock()) {
        let var = s.price_variance().unwrap();
        let m = JointGrowthModel::self_paired(s);
        let cov = m.price_covariance().unwrap();
        prop_assert!(rel_close(cov, var, 1e-10), "cov {cov} vs var {var}");
    }

    /// The price covariance carries the sign of the growth covariance.
    #[test]
    fn covariance_sign_matches_growth_covariance(m in arb_model()) {
        let g_cov = m.growth_covariance();
        let p_cov = m.price_covariance().unwrap();
        if g_cov == 0.0 {
            prop_assert!(p_cov.abs() < 1e-12);
        } else {
            prop_assert!(g_cov.signum() == p_cov.signum() || p_cov == 0.0);
        }
    }

    /// Stock accessors and the moment report agree with each other.
    #[test]
    fn price_moments_report_is_consistent(m in arb_model()) {
        let pm = m.price_moments();
        prop_assert!(pm.variance_exists_a && pm.variance_exists_b && pm.covariance_exists);
        prop_assert_eq!(pm.mean_a, m.stock_a().expected_price());
        prop_assert_eq!(pm.mean_b, m.stock_b().expected_price());
        prop_assert_eq!(pm.var_a.unwrap(), m.price_variance(Stock::A).unwrap());
        prop_assert_eq!(pm.var_b.unwrap(), m.price_variance(Stock::B).unwrap());
        prop_assert_eq!(pm.cov_ab.unwrap(), m.price_covariance().unwrap());
        let (va, vb) = (pm.var_a.unwrap(), pm.var_b.unwrap());
        if va > 0.0 && vb > 0.0 {
            let corr = pm.cov_ab.unwrap() / (va * vb).sqrt();
            prop_assert!((-1.0..=1.0).contains(&corr), "corr {corr}");
        } else {
            // A single-state stock prices deterministically.
            prop_assert_eq!(pm.cov_ab.unwrap(), 0.0);
        }
    }

    /// Models survive a JSON round trip bit-for-bit.
    #[test]
    fn model_json_round_trip(m in arb_model()) {
        let text = serde_json::to_string(&m).unwrap();
        let back: JointGrowthModel<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(m.cells_row_major(), back.cells_row_major());
        prop_assert_eq!(m.stock_a().growth().states(), back.stock_a().growth().states());
        prop_assert_eq!(m.stock_a().growth().probs(), back.stock_a().growth().probs());
        prop_assert_eq!(m.stock_b().growth().states(), back.stock_b().growth().states());
        prop_assert_eq!(m.stock_b().growth().probs(), back.stock_b().growth().probs());
        prop_assert_eq!(m.stock_a().current_dividend(), back.stock_a().current_dividend());
        prop_assert_eq!(m.stock_b().discount_rate(), back.stock_b().discount_rate());
    }

    /// A probability drift below the renormalization cutoff is absorbed.
    #[test]
    fn small_probability_drift_is_renormalized(
        weights in proptest::collection::vec(0.05..1.0f64, 3),
    ) {
        let total: f64 = weights.iter().sum();
        let mut probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
        probs[0] += 3e-10;
        let d = GrowthDistribution::new(vec![-0.1, 0.0, 0.1], probs).unwrap();
        let sum: f64 = d.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-14, "sum {sum}");
    }
}

// ---------------------------------------------------------------------------
// Oracle invariants
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Brute-force enumeration over joint growth sequences agrees with the
    /// closed-form dividend product expectation.
    #[test]
    fn enumeration_matches_closed_form(
        m in arb_model(),
        j in 1u32..=3,
        p in 1u32..=3,
    ) {
        let brute = enumerate_dividend_product(&m, j, p).unwrap();
        let closed = m.dividend_product_expectation(j, p);
        prop_assert!(rel_close(brute, closed, 1e-10), "brute {brute} vs closed {closed}");
    }

    /// The truncated series underestimates the closed form by no more than
    /// the analytic tail bound at the automatically selected horizon.
    #[test]
    fn truncation_sits_within_the_tail_bound(m in arb_model()) {
        let h = auto_horizon(&m, 1e-6).unwrap();
        let trunc = truncated_price_product(&m, h).unwrap();
        let pm = m.price_moments();
        let closed = pm.cov_ab.unwrap() + pm.mean_a * pm.mean_b;
        let bound = tail_bound(&m, h).unwrap();
        let gap = closed - trunc;
        prop_assert!(gap >= -1e-9 * closed.abs(), "series exceeded closed form: gap {gap}");
        prop_assert!(gap <= bound * (1.0 + 1e-9) + 1e-12, "gap {gap} above bound {bound}");
    }
}

// ---------------------------------------------------------------------------
// Estimation invariants
// ---------------------------------------------------------------------------

proptest! {
    /// Fitting noise-free data recovers the coefficients and R^2 = 1.
    #[test]
    fn ols_recovers_exact_lines(
        n in 3usize..30,
        a in -10.0..10.0f64,
        b in prop_oneof![-10.0..-1e-3f64, 1e-3..10.0f64],
        seed_xs in proptest::collection::vec(-50.0..50.0f64, 30),
    ) {
        let mut xs = seed_xs[..n].to_vec();
        xs.sort_by(f64::total_cmp);
        for i in 1..xs.len() {
            if xs[i] - xs[i - 1] < 1e-3 {
                xs[i] = xs[i - 1] + 1e-3;
            }
        }
        let ys: Vec<f64> = xs.iter().map(|x| a + b * x).collect();
        let r = ols(&ys, &xs).unwrap();
        prop_assert!((r.beta - b).abs() <= 1e-8 * b.abs().max(1.0), "beta {} vs {b}", r.beta);
        prop_assert!((r.alpha - a).abs() <= 1e-7 * a.abs().max(50.0 * b.abs()).max(1.0));
        prop_assert!(r.r_squared > 1.0 - 1e-9 && r.r_squared <= 1.0);
    }

    /// Fitted residuals are orthogonal to the regressor and sum to zero.
    #[test]
    fn ols_residuals_are_orthogonal(
        n in 3usize..30,
        a in -10.0..10.0f64,
        b in -10.0..10.0f64,
        seed_xs in proptest::collection::vec(-50.0..50.0f64, 30),
        noise in proptest::collection::vec(-0.5..0.5f64, 30),
    ) {
        let xs = distinct_sorted(&seed_xs[..n]);
        let ys: Vec<f64> = xs
            .iter()
            .zip(&noise[..n])
            .map(|(x, e)| a + b * x + e)
            .collect();
        let r = ols(&ys, &xs).unwrap();
        let residuals: Vec<f64> = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| y - r.alpha - r.beta * x)
            .collect();
        let sum: f64 = residuals.iter().sum();
        let dot: f64 = residuals.iter().zip(&xs).map(|(e, x)| e * x).sum();
        prop_assert!(sum.abs() < 1e-9 * n as f64, "residual sum {sum}");
        prop_assert!(dot.abs() < 1e-9 * n as f64 * 50.0, "residual dot {dot}");
        prop_assert!((0.0..=1.0).contains(&r.r_squared));
    }

    /// Two-state discretization conserves observations and orders states.
    #[test]
    fn discretize_conserves_years(
        n in 2usize..20,
        seed in proptest::collection::vec(-0.4..1.0f64, 20),
        method in prop_oneof![Just(Method::GeometricMean), Just(Method::Median)],
    ) {
        let rates = distinct_sorted(&seed[..n]);
        let pairs: Vec<(i32, f64)> = rates
            .iter()
            .enumerate()
            .map(|(i, &g)| (2000 + i as i32, g))
            .collect();
        let gs = GrowthSample::new(pairs).unwrap();
        match discretize(&gs, method) {
            Ok(law) => {
                prop_assert_eq!(
                    law.counts[0] + law.counts[1] + law.excluded_years.len(),
                    n
                );
                let states = law.distribution.states();
                prop_assert!(states[0] < states[1]);
                prop_assert!(states[0] < law.threshold && law.threshold <= states[1]);
                let kept = (law.counts[0] + law.counts[1]) as f64;
                prop_assert_eq!(law.distribution.probs()[0], law.counts[0] as f64 / kept);
                prop_assert_eq!(law.distribution.probs()[1], law.counts[1] as f64 / kept);
            }
            Err(e) => prop_assert!(
                matches!(e, sddm::EstimateError::EmptyBucket { .. }),
                "unexpected error {e}"
            ),
        }
    }

    /// Joint tables keep integer-exact probabilities and marginals.
    #[test]
    fn joint_table_probabilities_are_count_ratios(
        n in 4usize..14,
        ra in proptest::collection::vec(-0.4..1.0f64, 14),
        rb in proptest::collection::vec(-0.4..1.0f64, 14),
        method in prop_oneof![Just(Method::GeometricMean), Just(Method::Median)],
    ) {
        let mk = |seed: &[f64], extra_year: i32| {
            let rates = distinct_sorted(&seed[..n]);
            let mut pairs: Vec<(i32, f64)> = rates
                .iter()
                .enumerate()
                .map(|(i, &g)| (2000 + i as i32, g))
                .collect();
            pairs.push((extra_year, 0.123));
            GrowthSample::new(pairs).unwrap()
        };
        // Non-overlapping trailing years must be ignored by the alignment.
        let a = mk(&ra, 2100);
        let b = mk(&rb, 2101);
        match joint_table(&a, &b, method) {
            Ok(t) => {
                let total: usize = t.counts.iter().flatten().sum();
                prop_assert_eq!(total, t.years_used);
                prop_assert_eq!(t.years_used + t.dropped_years.len(), n);
                let denom = t.years_used as f64;
                for i in 0..2 {
                    for l in 0..2 {
                        prop_assert_eq!(t.probs[i][l], t.counts[i][l] as f64 / denom);
                    }
                    prop_assert_eq!(
                        t.prob_a[i],
                        (t.counts[i][0] + t.counts[i][1]) as f64 / denom
                    );
                    prop_assert_eq!(
                        t.prob_b[i],
                        (t.counts[0][i] + t.counts[1][i]) as f64 / denom
                    );
                }
                prop_assert!(t.states_a[0] < t.states_a[1]);
                prop_assert!(t.states_b[0] < t.states_b[1]);
                if method == Method::GeometricMean {
                    prop_assert!(t.dropped_years.is_empty());
                }
                // The assembled model reproduces the table's growth law (the
                // discount rate only needs to clear the largest mean growth).
                let model = t.to_model(1.0, 2.0, 1.0, 2.0).unwrap();
                prop_assert!(rel_close(model.growth_covariance(), t.growth_covariance, 1e-12));
            }
            Err(e) => prop_assert!(
                matches!(
                    e,
                    sddm::EstimateError::EmptyBucket { .. }
                        | sddm::EstimateError::NoOverlap { .. }
                ),
                "unexpected error {e}"
            ),
        }
    }
}

// ---------------------------------------------------------------------------
// Portfolio invariants
// ---------------------------------------------------------------------------

proptest! {
    /// The closed-form optimum is a global maximizer of expected utility.
    #[test]
    fn optimal_weight_beats_any_other(
        rm in arb_moments(),
        alpha in 0.01..100.0f64,
        other in -2.0..3.0f64,
    ) {
        let x = optimal_weight(&rm, alpha).unwrap();
        let best = expected_utility(&rm, x, alpha);
        let candidate = expected_utility(&rm, other, alpha);
        prop_assert!(best >= candidate - 1e-12 * best.abs().max(1.0));
        let result = portfolio_at(&rm, x, Some(alpha));
        prop_assert_eq!(result.x_b, 1.0 - result.x_a);
    }

    /// The minimum-variance weight minimizes portfolio variance.
    #[test]
    fn min_variance_weight_minimizes_variance(
        rm in arb_moments(),
        delta in prop_oneof![-0.5..-1e-6f64, 1e-6..0.5f64],
    ) {
        let x = min_variance_weight(&rm).unwrap();
        prop_assert!(rm.portfolio_variance(x) <= rm.portfolio_variance(x + delta));
    }

    /// The optimal weight moves monotonically with risk aversion, in the
    /// direction fixed by the sign of the mean-return spread.
    #[test]
    fn optimal_weight_is_monotone_in_alpha(
        rm in arb_moments(),
        a1 in 0.01..100.0f64,
        factor in 1.1..10.0f64,
    ) {
        let a2 = a1 * factor;
        let x1 = optimal_weight(&rm, a1).unwrap();
        let x2 = optimal_weight(&rm, a2).unwrap();
        let spread = rm.mean_a - rm.mean_b;
        if spread > 0.0 {
            prop_assert!(x1 >= x2 - 1e-12);
        } else if spread < 0.0 {
            prop_assert!(x1 <= x2 + 1e-12);
        } else {
            prop_assert!((x1 - x2).abs() < 1e-12);
        }
    }
}

/// Sorts and spreads values so that consecutive entries differ by at least
/// 1e-3 (used to keep regressors and growth samples away from exact ties).
fn distinct_sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    for i in 1..v.len() {
        if v[i] - v[i - 1] < 1e-3 {
            v[i] = v[i - 1] + 1e-3;
        }
    }
    v
}
