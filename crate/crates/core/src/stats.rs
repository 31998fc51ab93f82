//! Small descriptive-statistics helpers shared by the estimators.

use alloc::vec::Vec;

pub fn mean(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        None
    } else {
        Some(v.iter().sum::<f64>() / v.len() as f64)
    }
}

/// Median; an even count gives the midpoint of the two central values.
pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    Some(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Quantile of ascending-sorted data by linear interpolation between order
/// statistics (Hyndman-Fan type 7): `h = (n - 1) p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Option<f64> {
    if sorted.is_empty() || !(0.0..=1.0).contains(&p) {
        return None;
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = h - lo as f64;
    Some(sorted[lo] + frac * (sorted[hi] - sorted[lo]))
}

/// Fixed-width histogram over `[lo, hi]`; values outside are clamped into
/// the edge bins. Returns bin counts.
pub fn histogram(v: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<usize> {
    let mut counts = alloc::vec![0usize; bins];
    if bins == 0 {
        return counts;
    }
    let width = (hi - lo) / bins as f64;
    for &x in v {
        let idx = if width > 0.0 {
            libm::floor((x - lo) / width)
        } else {
            0.0
        };
        let idx = if idx < 0.0 { 0 } else { (idx as usize).min(bins - 1) };
        counts[idx] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn type7_quantile() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let q = quantile_sorted(&v, 0.9).unwrap();
        assert!((q - 90.1).abs() < 1e-12);
        assert_eq!(quantile_sorted(&v, 0.0), Some(1.0));
        assert_eq!(quantile_sorted(&v, 1.0), Some(100.0));
    }

    #[test]
    fn histogram_clamps_edges() {
        let h = histogram(&[-5.0, 0.1, 0.5, 0.9, 7.0], 0.0, 1.0, 2);
        assert_eq!(h, alloc::vec![2, 3]);
    }
}
