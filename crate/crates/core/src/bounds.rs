//! Closed-form bounds on the probability that weighted draws are all distinct.
//!
//! These serve two roles: the birthday estimators use the `1/sqrt(e)`
//! crossing as their stopping rule, and the test suites compare Monte Carlo
//! frequencies against them.

/// Product bounds on the probability that `k` weighted draws with
/// replacement are pairwise distinct, for arbitrary positive weights.
///
/// Returns `(lower, upper)`. The lower bound pairs the `j`-th draw with the
/// `j` heaviest weights, the upper bound with the `j` lightest.
pub fn distinct_product_bounds(weights: &[f64], k: usize) -> (f64, f64) {
    let mut sorted = weights.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    let n = sorted.len();
    if k > n {
        return (0.0, 0.0);
    }
    let (mut lower, mut upper) = (1.0, 1.0);
    let (mut light, mut heavy) = (0.0, 0.0);
    for j in 1..k {
        light += sorted[j - 1];
        heavy += sorted[n - j];
        lower *= (1.0 - heavy / total).max(0.0);
        upper *= (1.0 - light / total).max(0.0);
    }
    (lower, upper)
}

/// Exact probability that `k` weighted draws are pairwise distinct, by
/// dynamic programming over subsets. Exponential in `weights.len()`; only
/// for tiny inputs in tests.
pub fn distinct_exact(weights: &[f64], k: usize) -> f64 {
    let n = weights.len();
    assert!(n <= 20, "subset enumeration is limited to 20 weights");
    if k > n {
        return 0.0;
    }
    let total: f64 = weights.iter().sum();
    let mut prob = vec![0.0f64; 1 << n];
    prob[0] = 1.0;
    for mask in 0usize..(1 << n) {
        let pm = prob[mask];
        if pm == 0.0 || mask.count_ones() as usize >= k {
            continue;
        }
        for (j, w) in weights.iter().enumerate() {
            if mask & (1 << j) == 0 {
                prob[mask | (1 << j)] += pm * w / total;
            }
        }
    }
    (0usize..(1 << n))
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| prob[m])
        .sum()
}

/// Upper bound on the all-distinct probability when every weight lies
/// within a factor `1+delta` of the smallest: `exp(-(k-1)k / (2n(1+delta)))`.
pub fn pr_upper(n: f64, k: f64, delta: f64) -> f64 {
    (-(k - 1.0) * k / (2.0 * n * (1.0 + delta))).exp()
}

/// Matching lower bound,
/// `exp(-(1+delta)k^2/(2n) - 2(1+delta)^2 k^3 / (3 n^2))`.
/// Valid for `k < n / (2(1+delta))`.
pub fn pr_lower(n: f64, k: f64, delta: f64) -> f64 {
    let a = 1.0 + delta;
    (-a * k * k / (2.0 * n) - 2.0 * a * a * k.powi(3) / (3.0 * n * n)).exp()
}

/// Range of `k` where [`pr_lower`] is proven.
pub fn lower_bound_applies(n: f64, k: f64, delta: f64) -> bool {
    k < n / (2.0 * (1.0 + delta))
}

/// `(1/beta) e^(-beta k / 8)`, the tail expression that the adaptive
/// algorithm's `K0` is sized to push below `gamma0 / e`.
pub fn heavy_job_tail(beta: f64, k: f64) -> f64 {
    (-beta * k / 8.0).exp() / beta
}

/// Grid check of `heavy_job_tail(beta, k) <= gamma0 / e` for `beta` in
/// `[beta0, 1]` and `k` in `[k0, 10 k0]`. Returns the worst ratio of
/// tail to bound observed; the check passes when it is at most 1.
pub fn heavy_job_tail_grid(beta0: f64, k0: f64, gamma0: f64, steps: usize) -> f64 {
    let bound = gamma0 / std::f64::consts::E;
    let mut worst: f64 = 0.0;
    for a in 0..=steps {
        // geometric grid in beta, linear in k
        let beta = beta0 * (1.0 / beta0).powf(a as f64 / steps as f64);
        for b in 0..=steps {
            let k = k0 * (1.0 + 9.0 * b as f64 / steps as f64);
            worst = worst.max(heavy_job_tail(beta, k) / bound);
        }
    }
    worst
}
