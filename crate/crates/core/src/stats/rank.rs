//! Tie-aware ranking.
//!
//! Ranks are returned in a doubled, mean-centred integer form
//! `2·rank − (len + 1)`. Average ranks of tie groups are multiples of one
//! half, so this form is always integral and every downstream sum of
//! products is exact and independent of summation order.

use std::cmp::Ordering;

/// Largest input accepted by [`centered_double_ranks`]; keeps `Σ a²` in `i64`.
pub const MAX_RANK_LEN: usize = 1 << 20;

/// 1-based fractional ranks, ties sharing the mean of the positions they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    centered_double_ranks(values)
        .into_iter()
        .map(|a| (f64::from(a) + n + 1.0) / 2.0)
        .collect()
}

/// Doubled centred average ranks. Inputs must be free of NaN.
///
/// # Panics
/// If `values.len() > MAX_RANK_LEN` or a value is NaN.
pub fn centered_double_ranks(values: &[f64]) -> Vec<i32> {
    let n = values.len();
    assert!(n <= MAX_RANK_LEN, "rank input too long: {n}");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_unstable_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .expect("NaN passed to ranking")
    });

    let mut out = vec![0i32; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]].partial_cmp(&values[order[start]]) == Some(Ordering::Equal)
        {
            end += 1;
        }
        // positions start..end (0-based) share average 1-based rank (start + 1 + end) / 2
        let doubled = (start + end) as i64 - n as i64;
        for &idx in &order[start..end] {
            out[idx] = doubled as i32;
        }
        start = end;
    }
    out
}

/// `Σ a²` of a centred rank vector; zero exactly when every value ties.
pub fn rank_sum_squares(ranks: &[i32]) -> i64 {
    ranks.iter().map(|&a| i64::from(a) * i64::from(a)).sum()
}

/// `Σ a·b` of two centred rank vectors of equal length.
pub fn rank_dot(a: &[i32], b: &[i32]) -> i64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(&x, &y)| i64::from(x) * i64::from(y)).sum()
}
