//! Statistical support: normal distribution helpers, Benjamini-Hochberg
//! correction, plain and weighted Pearson correlation, and a permutation
//! test over target-word re-partitions.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("p-value {0} outside [0, 1]")]
    InvalidPValue(f64),
    #[error("input lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("correlation undefined: {0} has zero variance")]
    ZeroVariance(&'static str),
    #[error("weights must be positive and finite, got {0}")]
    InvalidWeight(f64),
    #[error("quantile probability {0} outside (0, 1)")]
    InvalidQuantile(f64),
    #[error("number of permutations must be at least 1")]
    InvalidPermutations,
    #[error("target lists must be non-empty")]
    EmptyTargetList,
}

/// Standard normal CDF, accurate to a few ulps via the complementary error
/// function.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Two-sided tail probability of a standard normal z statistic,
/// `2 * (1 - Phi(|z|))`, computed without cancellation in the tails.
pub fn two_sided_p(z: f64) -> f64 {
    libm::erfc(z.abs() * FRAC_1_SQRT_2)
}

/// Standard normal quantile (inverse CDF).
///
/// Acklam's rational approximation polished with one Halley step against
/// [`normal_cdf`], giving close to full double precision across (0, 1).
pub fn normal_quantile(p: f64) -> Result<f64, StatsError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(StatsError::InvalidQuantile(p));
    }
    let x = acklam(p);
    // One Halley refinement step.
    let e = normal_cdf(x) - p;
    let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
    Ok(x - u / (1.0 + x * u / 2.0))
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Benjamini-Hochberg step-up adjustment.
///
/// Returns q-values in the input order: `q_(i) = min_{j >= i} p_(j) * m / j`
/// over the sorted p-values, capped at 1.
pub fn bh_adjust(p_values: &[f64]) -> Result<Vec<f64>, StatsError> {
    for &p in p_values {
        if !(0.0..=1.0).contains(&p) || p.is_nan() {
            return Err(StatsError::InvalidPValue(p));
        }
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| p_values[i].partial_cmp(&p_values[j]).expect("validated"));

    let mut q = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &idx) in order.iter().enumerate().rev() {
        // Division first: the rank-m factor is exactly 1.0, so q >= p holds
        // pointwise even at the last ulp.
        let candidate = p_values[idx] * (m as f64 / (rank + 1) as f64);
        running = running.min(candidate);
        q[idx] = running;
    }
    Ok(q)
}

/// A labelled set of p-values with their BH-adjusted q-values.
#[derive(Debug, Clone, PartialEq)]
pub struct PValueSet {
    entries: Vec<(String, f64, f64)>,
}

impl PValueSet {
    /// Adjusts `(label, p)` pairs jointly; entries keep their input order.
    pub fn adjust(items: Vec<(String, f64)>) -> Result<Self, StatsError> {
        let ps: Vec<f64> = items.iter().map(|(_, p)| *p).collect();
        let qs = bh_adjust(&ps)?;
        Ok(PValueSet {
            entries: items
                .into_iter()
                .zip(qs)
                .map(|((label, p), q)| (label, p, q))
                .collect(),
        })
    }

    /// Entries as `(label, p, q)` in input order.
    pub fn entries(&self) -> &[(String, f64, f64)] {
        &self.entries
    }
}

/// Product-moment correlation of two equal-length samples.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewPoints {
            min: 3,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mx;
        let dy = b - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(StatsError::ZeroVariance("y"));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Pearson correlation under per-point weights: means and covariances are
/// weighted, so high-variance points (small weights) lose influence. The
/// result is invariant under uniform rescaling of the weights.
pub fn weighted_pearson(x: &[f64], y: &[f64], w: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() != w.len() {
        return Err(StatsError::LengthMismatch(x.len(), w.len()));
    }
    if x.len() < 3 {
        return Err(StatsError::TooFewPoints {
            min: 3,
            got: x.len(),
        });
    }
    for &wi in w {
        if !wi.is_finite() || wi <= 0.0 {
            return Err(StatsError::InvalidWeight(wi));
        }
    }
    let wsum: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, wi)| a * wi).sum::<f64>() / wsum;
    let my = y.iter().zip(w).map(|(a, wi)| a * wi).sum::<f64>() / wsum;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for ((&a, &b), &wi) in x.iter().zip(y).zip(w) {
        let dx = a - mx;
        let dy = b - my;
        sxx += wi * dx * dx;
        syy += wi * dy * dy;
        sxy += wi * dx * dy;
    }
    if sxx == 0.0 {
        return Err(StatsError::ZeroVariance("x"));
    }
    if syy == 0.0 {
        return Err(StatsError::ZeroVariance("y"));
    }
    Ok(sxy / (sxx.sqrt() * syy.sqrt()))
}

/// Plain and weighted correlation of one study.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationResult {
    pub r: f64,
    pub weighted_r: Option<f64>,
    pub n: usize,
}

/// Computes [`pearson`] and, when weights are given, [`weighted_pearson`].
pub fn correlation_study(
    x: &[f64],
    y: &[f64],
    weights: Option<&[f64]>,
) -> Result<CorrelationResult, StatsError> {
    let r = pearson(x, y)?;
    let weighted_r = weights.map(|w| weighted_pearson(x, y, w)).transpose()?;
    Ok(CorrelationResult {
        r,
        weighted_r,
        n: x.len(),
    })
}

/// Outcome of a permutation test.
#[derive(Debug, Clone, PartialEq)]
pub struct PermutationResult {
    pub p_value: f64,
    pub observed: f64,
    /// Number of re-partitions evaluated.
    pub permutations: u64,
    /// True when all distinct re-partitions were enumerated; the p-value is
    /// then the exact permutation p-value with resolution 1/permutations.
    pub exact: bool,
}

/// Two-sided permutation test that re-partitions `a ∪ b` into sets of the
/// original sizes and asks how often `|bias_fn|` reaches the observed value.
///
/// When the number of distinct splits is at most `n_perm`, all of them are
/// enumerated and the exact p-value `b / M` is returned (the observed split
/// is among the `M`, so `p >= 1/M`). Otherwise `n_perm` splits are sampled
/// uniformly and the estimate `(b + 1) / (n_perm + 1)` is returned, which
/// never reports zero. Sampling derives per-iteration randomness from
/// `(seed, iteration)` only, so the result is independent of thread count.
pub fn permutation_test<T, F>(
    bias_fn: F,
    a: &[T],
    b: &[T],
    n_perm: u64,
    seed: u64,
) -> Result<PermutationResult, StatsError>
where
    T: Clone + Sync,
    F: Fn(&[T], &[T]) -> f64 + Sync,
{
    permutation_test_inner(bias_fn, a, b, n_perm, seed, true)
}

/// Sequential fallback of [`permutation_test`]; identical results.
pub fn permutation_test_seq<T, F>(
    bias_fn: F,
    a: &[T],
    b: &[T],
    n_perm: u64,
    seed: u64,
) -> Result<PermutationResult, StatsError>
where
    T: Clone + Sync,
    F: Fn(&[T], &[T]) -> f64 + Sync,
{
    permutation_test_inner(bias_fn, a, b, n_perm, seed, false)
}

fn permutation_test_inner<T, F>(
    bias_fn: F,
    a: &[T],
    b: &[T],
    n_perm: u64,
    seed: u64,
    parallel: bool,
) -> Result<PermutationResult, StatsError>
where
    T: Clone + Sync,
    F: Fn(&[T], &[T]) -> f64 + Sync,
{
    if n_perm == 0 {
        return Err(StatsError::InvalidPermutations);
    }
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptyTargetList);
    }
    let observed = bias_fn(a, b);
    let threshold = observed.abs();

    let pool: Vec<T> = a.iter().chain(b.iter()).cloned().collect();
    let n = pool.len();
    let k = a.len();

    if let Some(total) = n_choose_k_capped(n, k, n_perm as u128) {
        // Exact enumeration over all distinct splits.
        let mut hits: u64 = 0;
        let mut chosen_buf: Vec<T> = Vec::with_capacity(k);
        let mut rest_buf: Vec<T> = Vec::with_capacity(n - k);
        let mut mask = vec![false; n];
        use itertools::Itertools;
        for combo in (0..n).combinations(k) {
            mask.iter_mut().for_each(|m| *m = false);
            for &i in &combo {
                mask[i] = true;
            }
            chosen_buf.clear();
            rest_buf.clear();
            for (i, item) in pool.iter().enumerate() {
                if mask[i] {
                    chosen_buf.push(item.clone());
                } else {
                    rest_buf.push(item.clone());
                }
            }
            if bias_fn(&chosen_buf, &rest_buf).abs() >= threshold {
                hits += 1;
            }
        }
        let total = total as u64;
        return Ok(PermutationResult {
            p_value: hits as f64 / total as f64,
            observed,
            permutations: total,
            exact: true,
        });
    }

    let run_iteration = |i: u64| -> bool {
        let mut rng: rand_chacha::ChaCha8Rng =
            rand::SeedableRng::seed_from_u64(splitmix64(seed ^ splitmix64(i + 1)));
        let mut indices: Vec<usize> = (0..n).collect();
        for j in 0..k {
            let r = rand::Rng::random_range(&mut rng, j..n);
            indices.swap(j, r);
        }
        let chosen: Vec<T> = indices[..k].iter().map(|&i| pool[i].clone()).collect();
        let rest: Vec<T> = indices[k..].iter().map(|&i| pool[i].clone()).collect();
        bias_fn(&chosen, &rest).abs() >= threshold
    };

    let hits: u64 = if parallel {
        count_hits_parallel(n_perm, &run_iteration)
    } else {
        (0..n_perm).filter(|&i| run_iteration(i)).count() as u64
    };

    Ok(PermutationResult {
        p_value: (hits + 1) as f64 / (n_perm + 1) as f64,
        observed,
        permutations: n_perm,
        exact: false,
    })
}

#[cfg(feature = "parallel")]
fn count_hits_parallel<F: Fn(u64) -> bool + Sync>(n_perm: u64, run: &F) -> u64 {
    (0..n_perm).into_par_iter().filter(|&i| run(i)).count() as u64
}

#[cfg(not(feature = "parallel"))]
fn count_hits_parallel<F: Fn(u64) -> bool + Sync>(n_perm: u64, run: &F) -> u64 {
    (0..n_perm).filter(|&i| run(i)).count() as u64
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// `C(n, k)` unless it exceeds `cap` (or overflows), in which case `None`.
fn n_choose_k_capped(n: usize, k: usize, cap: u128) -> Option<u128> {
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c.checked_mul((n - k + i) as u128)? / i as u128;
        if c > cap {
            return None;
        }
    }
    Some(c)
}
