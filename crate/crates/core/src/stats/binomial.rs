//! Exact sign test under a fair-coin null.

/// `P(X ≤ k)` for `X ~ Binomial(n, 1/2)`.
pub fn binomial_half_cdf(k: u64, n: u64) -> f64 {
    if k >= n {
        return 1.0;
    }
    if n <= 1000 {
        // 0.5^n is exact down to n = 1074; accumulate the pmf by recurrence
        let mut pmf = 0.5f64.powi(n as i32);
        let mut total = pmf;
        for i in 0..k {
            pmf *= (n - i) as f64 / (i + 1) as f64;
            total += pmf;
        }
        total.min(1.0)
    } else {
        let ln2 = std::f64::consts::LN_2;
        let mut lp = -(n as f64) * ln2;
        let mut terms = Vec::with_capacity(k as usize + 1);
        terms.push(lp);
        for i in 0..k {
            lp += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
            terms.push(lp);
        }
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = terms.iter().map(|t| (t - max).exp()).sum();
        (max + sum.ln()).exp().min(1.0)
    }
}

/// Two-sided exact sign test p-value from counts of positive and negative
/// differences (zero differences already excluded).
///
/// `p = min(1, 2·P(X ≤ min(pos, neg)))`; no informative pairs gives `p = 1`.
pub fn sign_test_p_value(positives: u64, negatives: u64) -> f64 {
    let n = positives + negatives;
    if n == 0 {
        return 1.0;
    }
    let k = positives.min(negatives);
    (2.0 * binomial_half_cdf(k, n)).min(1.0)
}
