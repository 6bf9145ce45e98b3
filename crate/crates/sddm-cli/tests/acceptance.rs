//! Acceptance gate: one line per criterion, `PASS` or `FAIL` with details,
//! nonzero exit when anything fails. Criteria run in order and keep going
//! after a failure so the full scoreboard always prints.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sddm::estimate::{capm_rate, ols};
use sddm::model::JointGrowthModel;
use sddm::oracle::{
    auto_horizon, enumerate_dividend_product, mc_price_moments, tail_bound,
    truncated_price_product, SimConfig,
};
use sddm::portfolio::{
    alpha_sweep, expected_utility, min_variance_weight, optimal_weight, AlphaGrid, PriceBasis,
    ReturnMoments,
};
use std::time::Instant;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

fn fixture(name: &str) -> String {
    format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn load_model(name: &str) -> JointGrowthModel<f64> {
    let text = std::fs::read_to_string(fixture(name)).expect("fixture exists");
    serde_json::from_str(&text).expect("fixture model parses")
}

/// The two reference two-state joint growth tables, typed verbatim:
/// `(states_a, states_b, joint probabilities)`.
type Table = ([f64; 2], [f64; 2], [[f64; 2]; 2]);

const TABLE_A: Table = (
    [-0.05019, 0.07390],
    [-0.02627, 0.05100],
    [[0.25926, 0.18519], [0.22222, 0.33333]],
);
const TABLE_B: Table = (
    [0.0, 0.13810],
    [0.0, 0.08688],
    [[0.28, 0.24], [0.20, 0.28]],
);

fn table_model(t: &Table) -> JointGrowthModel<f64> {
    JointGrowthModel::from_joint_table(
        0.5,
        0.06631,
        t.0.to_vec(),
        1.24,
        0.07943,
        t.1.to_vec(),
        t.2.iter().map(|row| row.to_vec()).collect(),
    )
    .expect("reference tables are valid")
}

fn growth_correlation(m: &JointGrowthModel<f64>) -> f64 {
    m.growth_covariance()
        / (m.stock_a().growth_variance() * m.stock_b().growth_variance()).sqrt()
}

// Criterion 1 — growth-law reproduction from the two reference joint tables.
fn criterion_1() -> Result<String, String> {
    let expected = [(0.000434, 0.18232), (0.000365, 0.12179)];
    let mut got = Vec::new();
    for (table, (cov_pin, corr_pin)) in [&TABLE_A, &TABLE_B].into_iter().zip(expected) {
        let m = table_model(table);
        let cov = m.growth_covariance();
        let corr = growth_correlation(&m);
        ensure!(
            (cov - cov_pin).abs() <= 5e-6,
            "growth covariance {cov:.9} vs {cov_pin} (tol 5e-6)"
        );
        ensure!(
            (corr - corr_pin).abs() <= 1e-4,
            "growth correlation {corr:.7} vs {corr_pin} (tol 1e-4)"
        );
        got.push(format!("cov {cov:.3e} corr {corr:.5}"));
    }
    Ok(format!(
        "{} and {} (tolerances ±5e-6, ±1e-4)",
        got[0], got[1]
    ))
}

/// Two-point surrogate with the quoted headline parameters and the given
/// growth covariance.
fn headline_surrogate(cov: f64) -> JointGrowthModel<f64> {
    JointGrowthModel::from_moments(
        0.5, 0.06631, 0.02, 0.02431, 1.24, 0.07943, 0.0234, 0.01447, cov,
    )
    .expect("headline surrogate is valid")
}

// Criterion 2 — closed-form price moments from the quoted parameters.
fn criterion_2() -> Result<String, String> {
    let cov_a = table_model(&TABLE_A).growth_covariance();
    let cov_b = table_model(&TABLE_B).growth_covariance();
    let mut price_covs = Vec::new();
    for (cov_g, cov_pin) in [(cov_a, 1.11872), (cov_b, 0.93951)] {
        let m = headline_surrogate(cov_g);
        let pm = m.price_moments();
        ensure!(
            (pm.mean_a - 11.01).abs() <= 0.01 && (pm.mean_b - 22.65).abs() <= 0.01,
            "price means ({:.5}, {:.5}) vs (11.01, 22.65) ± 0.01",
            pm.mean_a,
            pm.mean_b
        );
        let (var_a, var_b) = (pm.var_a.unwrap(), pm.var_b.unwrap());
        ensure!(
            (var_a - 44.60).abs() <= 0.15 && (var_b - 79.86).abs() <= 0.15,
            "price variances ({var_a:.4}, {var_b:.4}) vs (44.60, 79.86) ± 0.15"
        );
        let cov_p = pm.cov_ab.unwrap();
        ensure!(
            (cov_p - cov_pin).abs() <= 0.02,
            "price covariance {cov_p:.5} vs {cov_pin} ± 0.02"
        );
        price_covs.push(format!("{cov_p:.5}"));
    }
    Ok(format!(
        "means/variances inside ±0.01/±0.15; covariances {} vs 1.11872 and {} vs 0.93951 (±0.02)",
        price_covs[0], price_covs[1]
    ))
}

fn sorted_states(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let mut states: Vec<f64> = (0..n).map(|_| rng.gen_range(-0.4..0.6)).collect();
        states.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        if states.windows(2).all(|w| w[1] - w[0] >= 1e-3) {
            return states;
        }
    }
}

/// A random valid model with up to three growth states per stock. Discount
/// rates far above every growth state keep all second moments existent.
fn random_model(rng: &mut ChaCha8Rng) -> JointGrowthModel<f64> {
    let n_a = rng.gen_range(1..=3);
    let n_b = rng.gen_range(1..=3);
    let states_a = sorted_states(rng, n_a);
    let states_b = sorted_states(rng, n_b);
    let mut probs: Vec<Vec<f64>> = (0..n_a)
        .map(|_| (0..n_b).map(|_| rng.gen_range(0.05..1.0)).collect())
        .collect();
    let total: f64 = probs.iter().flatten().sum();
    for row in &mut probs {
        for cell in row {
            *cell /= total;
        }
    }
    JointGrowthModel::from_joint_table(
        rng.gen_range(0.1..5.0),
        rng.gen_range(0.75..1.2),
        states_a,
        rng.gen_range(0.1..5.0),
        rng.gen_range(0.75..1.2),
        states_b,
        probs,
    )
    .expect("generated model is valid")
}

// Criterion 3 — enumeration equals the closed form; truncation sits within
// the tail bound at the automatic horizon.
fn criterion_3() -> Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20240917);
    let mut worst_rel = 0.0f64;
    for case in 0..200 {
        let m = random_model(&mut rng);
        for j in 0..=4u32 {
            for p in 0..=4u32 {
                let brute = enumerate_dividend_product(&m, j, p)
                    .map_err(|e| format!("case {case}: enumeration failed: {e}"))?;
                let closed = m.dividend_product_expectation(j, p);
                let rel = (brute - closed).abs() / closed.abs().max(f64::MIN_POSITIVE);
                worst_rel = worst_rel.max(rel);
                ensure!(
                    rel <= 1e-10,
                    "case {case}: E[d_A{j} d_B{p}] enumeration {brute:.12e} vs closed {closed:.12e} (rel {rel:.2e})"
                );
            }
        }

        let horizon = auto_horizon(&m, 1e-6).map_err(|e| format!("case {case}: {e}"))?;
        let truncated =
            truncated_price_product(&m, horizon).map_err(|e| format!("case {case}: {e}"))?;
        let limit = m.price_covariance().map_err(|e| format!("case {case}: {e}"))?
            + m.stock_a().expected_price() * m.stock_b().expected_price();
        let bound = tail_bound(&m, horizon).map_err(|e| format!("case {case}: {e}"))?;
        let gap = (limit - truncated).abs();
        ensure!(
            gap <= bound * (1.0 + 1e-9) + 1e-12 * limit.abs(),
            "case {case}: truncation gap {gap:.3e} exceeds tail bound {bound:.3e} at horizon {horizon}"
        );
    }
    Ok(format!(
        "200 models, j,p ≤ 4: worst enumeration mismatch {worst_rel:.2e} (tol 1e-10); truncation inside tail bound at auto horizon; {:.1}s",
        start.elapsed().as_secs_f64()
    ))
}

// Criterion 4 — Monte Carlo agreement with the closed forms over 100 seeds.
fn criterion_4() -> Result<String, String> {
    let start = Instant::now();
    let m = load_model("model_calibrated.json");
    let pm = m.price_moments();
    let closed = [
        pm.mean_a,
        pm.mean_b,
        pm.var_a.unwrap(),
        pm.var_b.unwrap(),
        pm.cov_ab.unwrap(),
    ];
    let horizon = auto_horizon(&m, 1e-9).map_err(|e| e.to_string())?;

    let estimate = |seed: u64| -> Result<[(f64, f64); 5], String> {
        let cfg = SimConfig {
            horizon,
            n_paths: 100_000,
            seed,
            antithetic: false,
        };
        let est = mc_price_moments(&m, &cfg).map_err(|e| e.to_string())?;
        Ok([
            (est.mean_a.value, est.mean_a.std_error),
            (est.mean_b.value, est.mean_b.std_error),
            (est.var_a.value, est.var_a.std_error),
            (est.var_b.value, est.var_b.std_error),
            (est.cov_ab.value, est.cov_ab.std_error),
        ])
    };

    let mut runs_inside = 0u32;
    let mut first: Option<[(f64, f64); 5]> = None;
    for seed in 0..100u64 {
        let est = estimate(seed)?;
        if seed == 0 {
            first = Some(est);
        }
        let inside = est
            .iter()
            .zip(closed)
            .all(|(&(value, se), truth)| (value - truth).abs() <= 4.0 * se);
        runs_inside += u32::from(inside);
    }
    ensure!(
        runs_inside >= 99,
        "only {runs_inside}/100 seeds put every closed-form moment inside 4 standard errors"
    );

    // Bit-identical reruns for a couple of seeds.
    for seed in [0u64, 57] {
        let a = estimate(seed)?;
        let b = estimate(seed)?;
        let reference = if seed == 0 { first.unwrap() } else { a };
        ensure!(
            a.iter().zip(&b).zip(&reference).all(|((x, y), r)| {
                x.0.to_bits() == y.0.to_bits()
                    && x.1.to_bits() == y.1.to_bits()
                    && x.0.to_bits() == r.0.to_bits()
            }),
            "seed {seed}: reruns are not bit-identical"
        );
    }
    Ok(format!(
        "{runs_inside}/100 seeds inside 4-SE bands for all five moments at horizon {horizon}; reruns bit-identical; {:.0}s",
        start.elapsed().as_secs_f64()
    ))
}

// Criterion 5 — reduction and sign properties plus the exit-code contract.
fn criterion_5() -> Result<String, String> {
    // Self-paired model: price covariance reduces to the price variance.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..25 {
        let stock = random_model(&mut rng).stock_a().clone();
        let var = stock.price_variance().map_err(|e| e.to_string())?;
        let m = JointGrowthModel::self_paired(stock);
        let cov = m.price_covariance().map_err(|e| e.to_string())?;
        ensure!(
            (cov - var).abs() <= 1e-10 * var.abs().max(1e-300),
            "case {case}: self-paired covariance {cov:.12e} vs variance {var:.12e}"
        );
    }

    // Signed sweep: the price covariance carries the growth covariance's sign
    // and grows with it on an admissible grid.
    let grid: Vec<f64> = (0..50).map(|i| -0.018 + 0.036 * i as f64 / 49.0).collect();
    let mut previous = f64::NEG_INFINITY;
    for (i, &cov_g) in grid.iter().enumerate() {
        let m = headline_surrogate(cov_g);
        let cov_p = m.price_covariance().map_err(|e| e.to_string())?;
        let model_cov_g = m.growth_covariance();
        ensure!(
            cov_p * model_cov_g > 0.0 || (model_cov_g.abs() < 1e-15 && cov_p.abs() < 1e-12),
            "grid {i}: price covariance {cov_p:.3e} does not match the sign of growth covariance {model_cov_g:.3e}"
        );
        ensure!(
            cov_p > previous,
            "grid {i}: price covariance {cov_p:.6e} not increasing (previous {previous:.6e})"
        );
        previous = cov_p;
    }

    // Violated existence condition surfaces as exit code 4 in the CLI.
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_sddm"))
        .args(["moments", &fixture("model_nonconvergent.json")])
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(
        out.status.code() == Some(4),
        "divergent-moment model exited with {:?}, expected 4",
        out.status.code()
    );
    Ok(
        "self-paired cov ≡ var (rel 1e-10); sign and monotonicity over a 50-point signed grid; \
         divergent model exits 4"
            .to_string(),
    )
}

// Criterion 6 — portfolio numbers from the quoted return-moment matrix.
fn criterion_6() -> Result<String, String> {
    let rm = ReturnMoments::<f64>::new(0.02, 0.0234, 0.4155, 0.1798, 0.0051)
        .expect("quoted moments are valid");
    let x_min = min_variance_weight(&rm).map_err(|e| e.to_string())?;
    ensure!(
        (x_min - 0.2985).abs() <= 1e-3 && ((1.0 - x_min) - 0.7015).abs() <= 1e-3,
        "minimum-variance weights ({x_min:.5}, {:.5}) vs (0.2985, 0.7015) ± 0.001",
        1.0 - x_min
    );
    let mean = rm.portfolio_mean(x_min);
    let variance = rm.portfolio_variance(x_min);
    ensure!(
        (mean - 0.0224).abs() <= 1e-4,
        "minimum-variance mean {mean:.6} vs 0.0224 ± 1e-4"
    );
    ensure!(
        (variance - 0.1276).abs() <= 1e-3,
        "minimum-variance variance {variance:.6} vs 0.1276 ± 1e-3"
    );

    // Closed-form optimum against a two-stage grid search.
    let grid_argmax = |alpha: f64| -> f64 {
        let (mut lo, mut hi) = (-1.0f64, 2.0f64);
        let mut best_x = lo;
        for _ in 0..2 {
            let n = 300_000usize;
            let step = (hi - lo) / n as f64;
            let mut best_u = f64::NEG_INFINITY;
            for i in 0..=n {
                let x = lo + step * i as f64;
                let u = expected_utility(&rm, x, alpha);
                if u > best_u {
                    best_u = u;
                    best_x = x;
                }
            }
            lo = best_x - 2.0 * step;
            hi = best_x + 2.0 * step;
        }
        best_x
    };
    let mut worst = 0.0f64;
    for alpha in [1.0, 2.0, 5.0, 10.0, 50.0, 1e6] {
        let closed = optimal_weight(&rm, alpha).map_err(|e| e.to_string())?;
        let searched = grid_argmax(alpha);
        let gap = (closed - searched).abs();
        worst = worst.max(gap);
        ensure!(
            gap <= 1e-6,
            "alpha {alpha}: closed-form weight {closed:.9} vs grid argmax {searched:.9} (gap {gap:.2e})"
        );
    }

    // The sweep's weight column rises monotonically toward the
    // minimum-variance weight.
    let sweep = alpha_sweep(&rm, &AlphaGrid::default()).map_err(|e| e.to_string())?;
    let xs: Vec<f64> = sweep.iter().map(|r| r.x_a).collect();
    ensure!(
        xs.windows(2).all(|w| w[1] > w[0]),
        "sweep weight column is not monotone"
    );
    let (first_gap, last_gap) = ((xs[0] - x_min).abs(), (xs[xs.len() - 1] - x_min).abs());
    ensure!(
        last_gap < first_gap && last_gap <= 1e-3,
        "sweep does not approach the minimum-variance weight: gaps {first_gap:.2e} → {last_gap:.2e}"
    );
    Ok(format!(
        "x_min ({x_min:.4}, {:.4}), mean {mean:.4}, variance {variance:.4}; grid argmax within {worst:.1e}; sweep monotone, final gap to x_min {last_gap:.1e}",
        1.0 - x_min
    ))
}

// Criterion 7 — one-period return moments from quoted intermediates, and
// the mean-return identity on an exact basis.
fn criterion_7() -> Result<String, String> {
    let quoted = PriceBasis::<f64>::from_parts(
        [0.5, 1.24],
        [0.06631, 0.07943],
        [0.02, 0.0234],
        [0.02431, 0.01447],
        0.000434,
        [11.01, 22.65],
        [44.60, 79.86],
        1.11872,
    )
    .map_err(|e| e.to_string())?;
    let rm = quoted.return_moments().map_err(|e| e.to_string())?;
    ensure!(
        (rm.var_a - 0.4155).abs() <= 2e-3,
        "return variance A {:.6} vs 0.4155 ± 2e-3",
        rm.var_a
    );
    ensure!(
        (rm.var_b - 0.1798).abs() <= 2e-3,
        "return variance B {:.6} vs 0.1798 ± 2e-3",
        rm.var_b
    );
    ensure!(
        (rm.cov_ab - 0.0051).abs() <= 5e-4,
        "return covariance {:.6} vs 0.0051 ± 5e-4",
        rm.cov_ab
    );

    // The identity E[r] = mean growth holds algebraically when the basis is
    // exact, i.e. computed from a model rather than rounded figures.
    let m = load_model("model_calibrated.json");
    let exact = PriceBasis::from_model(&m).map_err(|e| e.to_string())?;
    let rm_exact = exact.return_moments().map_err(|e| e.to_string())?;
    let (ga, gb) = (m.stock_a().mean_growth(), m.stock_b().mean_growth());
    ensure!(
        (rm_exact.mean_a - ga).abs() <= 1e-12 && (rm_exact.mean_b - gb).abs() <= 1e-12,
        "mean returns ({:.15}, {:.15}) vs mean growth ({ga:.15}, {gb:.15}) beyond 1e-12",
        rm_exact.mean_a,
        rm_exact.mean_b
    );
    Ok(format!(
        "Var[r] ({:.5}, {:.5}), Cov[r] {:.6} inside ±2e-3/±5e-4; exact-basis mean returns equal mean growth to 1e-12",
        rm.var_a, rm.var_b, rm.cov_ab
    ))
}

// Criterion 8 — OLS property substitute plus the discount-rate goldens.
fn criterion_8() -> Result<String, String> {
    // Exact recovery on noiseless lines.
    for (alpha, beta) in [(0.05, 1.99), (3.0, -0.7)] {
        let x: Vec<f64> = (0..40).map(|i| i as f64 / 4.0 - 3.0).collect();
        let y: Vec<f64> = x.iter().map(|&xi| alpha + beta * xi).collect();
        let fit = ols(&y, &x).map_err(|e| e.to_string())?;
        ensure!(
            (fit.alpha - alpha).abs() <= 1e-12 * alpha.abs().max(1.0)
                && (fit.beta - beta).abs() <= 1e-12 * beta.abs().max(1.0),
            "exact line ({alpha}, {beta}) recovered as ({}, {})",
            fit.alpha,
            fit.beta
        );
        ensure!(
            (0.0..=1.0).contains(&fit.r_squared) && fit.r_squared >= 1.0 - 1e-12,
            "noiseless R² = {}",
            fit.r_squared
        );
    }

    // Residual orthogonality on deterministic pseudo-noisy data.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for case in 0..20 {
        let n = rng.gen_range(10..200usize);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-20.0..20.0)).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| 0.4 - 1.3 * xi + rng.gen_range(-2.0..2.0))
            .collect();
        let fit = ols(&y, &x).map_err(|e| e.to_string())?;
        let residual_sum: f64 = y
            .iter()
            .zip(&x)
            .map(|(&yi, &xi)| yi - fit.alpha - fit.beta * xi)
            .sum();
        let residual_dot_x: f64 = y
            .iter()
            .zip(&x)
            .map(|(&yi, &xi)| (yi - fit.alpha - fit.beta * xi) * xi)
            .sum();
        let n_f = n as f64;
        ensure!(
            residual_sum.abs() < 1e-9 * n_f && residual_dot_x.abs() < 1e-9 * n_f * 20.0,
            "case {case}: residual sums ({residual_sum:.2e}, {residual_dot_x:.2e}) exceed 1e-9·n"
        );
        ensure!(
            (0.0..=1.0).contains(&fit.r_squared),
            "case {case}: R² {} outside [0, 1]",
            fit.r_squared
        );
    }

    // Discount-rate goldens from the quoted betas.
    let k_a = capm_rate(0.005, 0.9571, 0.06905);
    let k_b = capm_rate(0.005, 1.1621, 0.06905);
    ensure!(
        (k_a - 0.06631).abs() <= 1e-5 && (k_b - 0.07943).abs() <= 1e-5,
        "discount rates ({k_a:.6}, {k_b:.6}) vs (0.06631, 0.07943) ± 1e-5"
    );
    Ok(format!(
        "exact-line recovery at 1e-12, residual orthogonality < 1e-9·n, R² in [0,1]; discount rates ({k_a:.6}, {k_b:.6}) within 1e-5 of (6.631%, 7.943%)"
    ))
}

fn main() {
    // Keep panic spew off the scoreboard; failures surface via FAIL lines.
    std::panic::set_hook(Box::new(|_| {}));

    let criteria: [fn() -> Result<String, String>; 8] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
    ];
    let mut failures = 0;
    for (index, criterion) in criteria.iter().enumerate() {
        let number = index + 1;
        match std::panic::catch_unwind(criterion) {
            Ok(Ok(detail)) => println!("CRITERION {number}: PASS — {detail}"),
            Ok(Err(detail)) => {
                failures += 1;
                println!("CRITERION {number}: FAIL — {detail}");
            }
            Err(payload) => {
                failures += 1;
                let message = payload
                    .downcast_ref::<&str>()
                    .map(|s| s.to_string())
                    .or_else(|| payload.downcast_ref::<String>().cloned())
                    .unwrap_or_else(|| "panic with non-string payload".to_string());
                println!("CRITERION {number}: FAIL — panicked: {message}");
            }
        }
    }

    if failures == 0 {
        println!("acceptance: all 8 criteria passed");
    } else {
        println!("acceptance: {failures} of 8 criteria FAILED");
        std::process::exit(1);
    }
}
