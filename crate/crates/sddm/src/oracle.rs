//! Numeric cross-checks for the closed forms: exact enumeration of dividend
//! cross-moments, direct partial sums of the price-product series with a
//! geometric tail bound, and a deterministic parallel Monte Carlo.
//!
//! These implementations deliberately avoid the algebraic shortcuts of
//! [`crate::moments`]; agreement between the two layers is what the test
//! suites assert.
//!
//! # Determinism
//!
//! Simulation uses a counter-based generator keyed by `(seed, path index)`:
//! every path owns an independent, splittable stream, so results are
//! bit-identical for a given [`SimConfig`] regardless of how many threads
//! execute the paths.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OracleError, Stock};
use crate::model::JointGrowthModel;
use crate::scalar::Scalar;

/// Enumeration work limit: maximum number of growth-state sequences visited.
pub const ENUMERATION_LIMIT: f64 = 1e7;

/// Smallest path count for which 100-batch batch-means standard errors are
/// defined (each batch needs at least two paths).
pub const MIN_PATHS_FOR_MOMENTS: usize = 200;

const BATCHES: usize = 100;
const MAX_AUTO_HORIZON: u32 = 1_000_000;

/// Monte Carlo run parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Truncation length of the simulated price series (years), ≥ 1.
    pub horizon: u32,
    /// Number of simulated paths, ≥ 1.
    pub n_paths: usize,
    /// Seed for the counter-based generator.
    pub seed: u64,
    /// Pair each uniform draw `u` with `1 − u` on the companion path.
    #[serde(default)]
    pub antithetic: bool,
}

/// A Monte Carlo point estimate with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct MomentEstimate<T: Scalar = f64> {
    pub value: T,
    pub std_error: T,
    pub n_samples: usize,
}

/// Monte Carlo estimates of the five price moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct McPriceMoments<T: Scalar = f64> {
    pub mean_a: MomentEstimate<T>,
    pub mean_b: MomentEstimate<T>,
    pub var_a: MomentEstimate<T>,
    pub var_b: MomentEstimate<T>,
    pub cov_ab: MomentEstimate<T>,
}

/// Geometric ratios of the price-product series: the per-stock discounted
/// growth ratios and the discounted joint factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRatios<T: Scalar = f64> {
    /// `(1+ḡ_A)/(1+k_A)`, strictly inside `(0, 1)`.
    pub gamma_a: T,
    /// `(1+ḡ_B)/(1+k_B)`, strictly inside `(0, 1)`.
    pub gamma_b: T,
    /// `E[(1+g̃_A)(1+g̃_B)]/((1+k_A)(1+k_B))`, positive; `< 1` iff the price
    /// covariance exists.
    pub w: T,
}

impl<T: Scalar> SeriesRatios<T> {
    /// The dominant ratio `q = max(γ_A, γ_B, w)` controlling the series tail.
    #[inline]
    pub fn dominant(&self) -> T {
        self.gamma_a.max(self.gamma_b).max(self.w)
    }
}

/// Computes the geometric ratios of the price-product series for `m`.
pub fn series_ratios<T: Scalar>(m: &JointGrowthModel<T>) -> SeriesRatios<T> {
    let one = T::one();
    let ka1 = one + m.stock_a().discount_rate();
    let kb1 = one + m.stock_b().discount_rate();
    SeriesRatios {
        gamma_a: (one + m.stock_a().mean_growth()) / ka1,
        gamma_b: (one + m.stock_b().mean_growth()) / kb1,
        w: m.joint_growth_factor() / (ka1 * kb1),
    }
}

/// Exact `E[d̃_Aj · d̃_Bp]` by brute-force enumeration of every joint growth
/// sequence, with no use of the closed-form collapse.
///
/// The first `min(j, p)` years enumerate joint cells, the remaining
/// `|j − p|` years enumerate the longer stock's marginal states. Work is
/// bounded by `(n_A·n_B)^min(j,p) · max(n_A,n_B)^|j−p|` sequences and refused
/// above [`ENUMERATION_LIMIT`].
pub fn enumerate_dividend_product<T: Scalar>(
    m: &JointGrowthModel<T>,
    j: u32,
    p: u32,
) -> Result<T, OracleError> {
    let (n_a, n_b) = m.shape();
    let joint_years = j.min(p);
    let tail_years = j.abs_diff(p);
    let cells = ((n_a * n_b) as f64).powi(joint_years as i32)
        * (n_a.max(n_b) as f64).powi(tail_years as i32);
    if cells > ENUMERATION_LIMIT {
        return Err(OracleError::TooLarge {
            cells,
            limit: ENUMERATION_LIMIT,
        });
    }

    let one = T::one();
    let tail_stock = if j > p { Stock::A } else { Stock::B };
    let tail_growth = m.stock(tail_stock).growth();

    // Depth-first walk over (joint cell choices) x (tail state choices),
    // accumulating probability-weighted products of growth factors.
    fn joint_step<T: Scalar>(
        m: &JointGrowthModel<T>,
        depth_left: u32,
        tail_years: u32,
        tail_states: &[T],
        tail_probs: &[T],
        factor: T,
        prob: T,
        acc: &mut T,
    ) {
        if depth_left == 0 {
            tail_step(tail_years, tail_states, tail_probs, factor, prob, acc);
            return;
        }
        let (n_a, n_b) = m.shape();
        let one = T::one();
        for i in 0..n_a {
            let fa = one + m.stock_a().growth().states()[i];
            for l in 0..n_b {
                let fb = one + m.stock_b().growth().states()[l];
                joint_step(
                    m,
                    depth_left - 1,
                    tail_years,
                    tail_states,
                    tail_probs,
                    factor * fa * fb,
                    prob * m.cell(i, l),
                    acc,
                );
            }
        }
    }

    fn tail_step<T: Scalar>(
        depth_left: u32,
        states: &[T],
        probs: &[T],
        factor: T,
        prob: T,
        acc: &mut T,
    ) {
        if depth_left == 0 {
            *acc = *acc + prob * factor;
            return;
        }
        let one = T::one();
        for (s, q) in states.iter().zip(probs) {
            tail_step(depth_left - 1, states, probs, factor * (one + *s), prob * *q, acc);
        }
    }

    let mut acc = T::zero();
    joint_step(
        m,
        joint_years,
        tail_years,
        tail_growth.states(),
        tail_growth.probs(),
        one,
        one,
        &mut acc,
    );
    Ok(m.stock_a().current_dividend() * m.stock_b().current_dividend() * acc)
}

/// Partial double sum of `E[P̃_A P̃_B]` truncated at `horizon` years for both
/// stocks: `Σ_{j=1..H} Σ_{p=1..H} E[d̃_Aj d̃_Bp] / ((1+k_A)^j (1+k_B)^p)`.
///
/// Finite for every finite horizon, whether or not the full series converges.
pub fn truncated_price_product<T: Scalar>(
    m: &JointGrowthModel<T>,
    horizon: u32,
) -> Result<T, OracleError> {
    if horizon == 0 {
        return Err(OracleError::ZeroHorizon);
    }
    let r = series_ratios(m);
    let h = horizon as usize;

    // Group terms by the number of common years t = min(j, p): each term is
    // w^t times a power of the overhanging stock's discounted growth ratio.
    // Prefix sums over those ratios make the double sum a single pass.
    //   sum_b[n] = Σ_{u=0..n} γ_B^u   (overhang on B, including the diagonal)
    //   sum_a[n] = Σ_{u=1..n} γ_A^u   (overhang on A)
    let mut sum_b = Vec::with_capacity(h);
    let mut sum_a = Vec::with_capacity(h);
    let mut pow_b = T::one();
    let mut pow_a = T::one();
    let mut acc_b = T::one(); // u = 0 term
    let mut acc_a = T::zero();
    sum_b.push(acc_b);
    sum_a.push(acc_a);
    for _ in 1..h {
        pow_b = pow_b * r.gamma_b;
        acc_b = acc_b + pow_b;
        sum_b.push(acc_b);
        pow_a = pow_a * r.gamma_a;
        acc_a = acc_a + pow_a;
        sum_a.push(acc_a);
    }

    let mut total = T::zero();
    let mut w_pow = T::one();
    for t in 1..=h {
        w_pow = w_pow * r.w;
        let overhang = h - t;
        total = total + w_pow * (sum_b[overhang] + sum_a[overhang]);
    }
    Ok(m.stock_a().current_dividend() * m.stock_b().current_dividend() * total)
}

/// Upper bound on the remainder of the price-product series beyond `horizon`,
/// from geometric domination of the double sum by its dominant ratio `q`:
/// `R(H) ≤ d_A0 d_B0 (2·S₂ − S₁)` with
/// `S₁ = q^{H+1}/(1−q)` and `S₂ = q^{H+1}((H+1)(1−q)+q)/(1−q)²`.
///
/// Fails with [`OracleError::NonConvergent`] when `q ≥ 1`, which is exactly
/// the case where the price covariance does not exist.
pub fn tail_bound<T: Scalar>(m: &JointGrowthModel<T>, horizon: u32) -> Result<T, OracleError> {
    let q = series_ratios(m).dominant();
    if !(q < T::one()) {
        return Err(OracleError::NonConvergent { ratio: q.to64() });
    }
    let one = T::one();
    let h1 = T::from_u32(horizon + 1).expect("small integer converts");
    let q_pow = q.powf(h1);
    let one_minus = one - q;
    let s1 = q_pow / one_minus;
    let s2 = q_pow * (h1 * one_minus + q) / (one_minus * one_minus);
    let c = m.stock_a().current_dividend() * m.stock_b().current_dividend();
    Ok(c * (T::c(2.0) * s2 - s1))
}

/// Smallest horizon whose tail bound is below `epsilon` relative to the
/// closed-form `E[P̃_A P̃_B]`. The default tolerance used by callers is
/// `1e-9`.
///
/// Fails with [`OracleError::NonConvergent`] when the series diverges and
/// with [`OracleError::HorizonOverflow`] past 10⁶ years.
pub fn auto_horizon<T: Scalar>(m: &JointGrowthModel<T>, epsilon: f64) -> Result<u32, OracleError> {
    let q = series_ratios(m).dominant();
    if !(q < T::one()) {
        return Err(OracleError::NonConvergent { ratio: q.to64() });
    }
    // q < 1 guarantees the covariance exists, so the closed form is available
    // as the scale for the relative tolerance.
    let cov = m
        .price_covariance()
        .expect("q < 1 implies the covariance exists");
    let scale = (m.stock_a().expected_price() * m.stock_b().expected_price() + cov)
        .abs()
        .to64();
    let target = T::c(epsilon * scale);
    let mut horizon = 1u32;
    while tail_bound(m, horizon)? > target {
        horizon += 1;
        if horizon > MAX_AUTO_HORIZON {
            return Err(OracleError::HorizonOverflow {
                limit: MAX_AUTO_HORIZON,
                epsilon,
            });
        }
    }
    Ok(horizon)
}

/// Converts a raw 64-bit draw to a uniform in `[0, 1)` with 53-bit precision.
#[inline]
fn uniform_from_u64(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Flattened row-major cumulative distribution over joint cells, with the
/// per-cell growth factors, precomputed once per simulation.
struct CellTable<T> {
    cumulative: Vec<f64>,
    factor_a: Vec<T>,
    factor_b: Vec<T>,
}

impl<T: Scalar> CellTable<T> {
    fn build(m: &JointGrowthModel<T>) -> Self {
        let (n_a, n_b) = m.shape();
        let one = T::one();
        let mut cumulative = Vec::with_capacity(n_a * n_b);
        let mut factor_a = Vec::with_capacity(n_a * n_b);
        let mut factor_b = Vec::with_capacity(n_a * n_b);
        let mut running = 0.0f64;
        for i in 0..n_a {
            for l in 0..n_b {
                running += m.cell(i, l).to64();
                cumulative.push(running);
                factor_a.push(one + m.stock_a().growth().states()[i]);
                factor_b.push(one + m.stock_b().growth().states()[l]);
            }
        }
        CellTable {
            cumulative,
            factor_a,
            factor_b,
        }
    }

    /// Inverse-CDF lookup: first cell whose cumulative probability exceeds
    /// `u`; the last cell absorbs any rounding at the top.
    #[inline]
    fn pick(&self, u: f64) -> usize {
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.cumulative.len() - 1)
    }
}

/// Runs one path: the pair of truncated present values
/// `(Σ_{t=1..H} d_At/(1+k_A)^t, Σ_{t=1..H} d_Bt/(1+k_B)^t)`.
fn run_path<T: Scalar>(
    m: &JointGrowthModel<T>,
    table: &CellTable<T>,
    config: &SimConfig,
    path: usize,
) -> (T, T) {
    let (stream, flip) = if config.antithetic {
        ((path / 2) as u64, path % 2 == 1)
    } else {
        (path as u64, false)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);

    let one = T::one();
    let inv_a = one / (one + m.stock_a().discount_rate());
    let inv_b = one / (one + m.stock_b().discount_rate());
    let mut dividend_a = m.stock_a().current_dividend();
    let mut dividend_b = m.stock_b().current_dividend();
    let mut discount_a = one;
    let mut discount_b = one;
    let mut pv_a = T::zero();
    let mut pv_b = T::zero();
    for _ in 0..config.horizon {
        let mut u = uniform_from_u64(rng.next_u64());
        if flip {
            u = 1.0 - u;
        }
        let cell = table.pick(u);
        dividend_a = dividend_a * table.factor_a[cell];
        dividend_b = dividend_b * table.factor_b[cell];
        discount_a = discount_a * inv_a;
        discount_b = discount_b * inv_b;
        pv_a = pv_a + dividend_a * discount_a;
        pv_b = pv_b + dividend_b * discount_b;
    }
    (pv_a, pv_b)
}

/// Simulates `config.n_paths` joint dividend paths and returns each path's
/// truncated present-value pair, in path order.
///
/// Paths are independent streams of one counter-based generator keyed by
/// `(seed, path index)`; with `antithetic` on, paths `2m` and `2m+1` share
/// stream `m` and the odd path replaces every uniform `u` by `1 − u`. Output
/// is bit-identical across runs and thread counts.
pub fn simulate_joint_paths<T: Scalar>(
    m: &JointGrowthModel<T>,
    config: &SimConfig,
) -> Result<Vec<(T, T)>, OracleError> {
    if config.horizon == 0 {
        return Err(OracleError::ZeroHorizon);
    }
    if config.n_paths == 0 {
        return Err(OracleError::NoPaths {
            n_paths: config.n_paths,
        });
    }
    let table = CellTable::build(m);
    Ok((0..config.n_paths)
        .into_par_iter()
        .map(|path| run_path(m, &table, config, path))
        .collect())
}

/// Slices `n` items into 100 consecutive batches whose sizes differ by at
/// most one (the remainder spreads over the leading batches).
fn batch_ranges(n: usize) -> Vec<(usize, usize)> {
    let base = n / BATCHES;
    let remainder = n % BATCHES;
    let mut ranges = Vec::with_capacity(BATCHES);
    let mut start = 0;
    for b in 0..BATCHES {
        let len = base + usize::from(b < remainder);
        ranges.push((start, start + len));
        start += len;
    }
    ranges
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (denominator `n − 1`).
fn sample_variance(xs: &[f64], mean: f64) -> f64 {
    xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Sample covariance (denominator `n − 1`).
fn sample_covariance(xs: &[f64], ys: &[f64], mean_x: f64, mean_y: f64) -> f64 {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| (x - mean_x) * (y - mean_y))
        .sum::<f64>()
        / (xs.len() as f64 - 1.0)
}

/// Standard error of a batch-statistic vector: spread of the per-batch
/// statistics over the square root of the batch count.
fn batch_se(stats: &[f64]) -> f64 {
    let m = mean(stats);
    (sample_variance(stats, m) / stats.len() as f64).sqrt()
}

/// Monte Carlo estimates of the five price moments with standard errors.
///
/// Point values are full-sample statistics (variance and covariance with
/// denominator `n − 1`). Standard errors of the means are classic
/// `s/√n`; standard errors of the variance and covariance come from
/// 100-batch batch means, which is why at least
/// [`MIN_PATHS_FOR_MOMENTS`] paths are required (two per batch).
///
/// Aggregation runs in `f64` in fixed path order, so estimates inherit the
/// simulator's bit-level determinism.
pub fn mc_price_moments<T: Scalar>(
    m: &JointGrowthModel<T>,
    config: &SimConfig,
) -> Result<McPriceMoments<T>, OracleError> {
    if config.n_paths < MIN_PATHS_FOR_MOMENTS {
        return Err(OracleError::TooFewPaths {
            n_paths: config.n_paths,
            required: MIN_PATHS_FOR_MOMENTS,
        });
    }
    let paths = simulate_joint_paths(m, config)?;
    let n = paths.len();
    let a: Vec<f64> = paths.iter().map(|&(pa, _)| pa.to64()).collect();
    let b: Vec<f64> = paths.iter().map(|&(_, pb)| pb.to64()).collect();

    let mean_a = mean(&a);
    let mean_b = mean(&b);
    let var_a = sample_variance(&a, mean_a);
    let var_b = sample_variance(&b, mean_b);
    let cov_ab = sample_covariance(&a, &b, mean_a, mean_b);

    let se_mean_a = (var_a / n as f64).sqrt();
    let se_mean_b = (var_b / n as f64).sqrt();

    let ranges = batch_ranges(n);
    let mut batch_var_a = Vec::with_capacity(BATCHES);
    let mut batch_var_b = Vec::with_capacity(BATCHES);
    let mut batch_cov = Vec::with_capacity(BATCHES);
    for &(lo, hi) in &ranges {
        let xa = &a[lo..hi];
        let xb = &b[lo..hi];
        let ma = mean(xa);
        let mb = mean(xb);
        batch_var_a.push(sample_variance(xa, ma));
        batch_var_b.push(sample_variance(xb, mb));
        batch_cov.push(sample_covariance(xa, xb, ma, mb));
    }

    let estimate = |value: f64, se: f64| MomentEstimate {
        value: T::c(value),
        std_error: T::c(se),
        n_samples: n,
    };
    Ok(McPriceMoments {
        mean_a: estimate(mean_a, se_mean_a),
        mean_b: estimate(mean_b, se_mean_b),
        var_a: estimate(var_a, batch_se(&batch_var_a)),
        var_b: estimate(var_b, batch_se(&batch_var_b)),
        cov_ab: estimate(cov_ab, batch_se(&batch_cov)),
    })
}
