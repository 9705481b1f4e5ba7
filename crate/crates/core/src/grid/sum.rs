const LEAF: usize = 16;

/// Pairwise (cascade) summation with a fixed split order, so results are
/// reproducible bit for bit.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sums_small_and_large() {
        assert_eq!(pairwise_sum(&[]), 0.0);
        assert_eq!(pairwise_sum(&[1.0, 2.0, 3.0]), 6.0);
        let v = vec![0.1; 1 << 16];
        assert!((pairwise_sum(&v) - 6553.6).abs() < 1e-9);
    }

    #[test]
    fn beats_naive_accumulation() {
        let v: Vec<f64> = (0..100_000).map(|i| 1.0 + 1e-10 * i as f64).collect();
        let exact = 100_000.0 + 1e-10 * (99_999.0 * 100_000.0 / 2.0);
        assert!((pairwise_sum(&v) - exact).abs() < 1e-9);
    }
}
