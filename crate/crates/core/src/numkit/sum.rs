//! Fixed-order reductions.
//!
//! Every quadrature sum in the crate goes through [`pairwise_sum`] so that the
//! association order depends only on the input length, never on how work was
//! split across threads.

use num_complex::Complex64;
use std::ops::Add;

const BLOCK: usize = 16;

/// Pairwise (cascade) summation with a fixed split point at `len / 2`.
pub fn pairwise_sum<T>(values: &[T]) -> T
where
    T: Copy + Add<Output = T> + Default,
{
    if values.len() <= BLOCK {
        let mut acc = T::default();
        for &v in values {
            acc = acc + v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Pairwise sum of `f(i)` for `i in 0..n` without materialising the terms.
pub fn pairwise_sum_by<F>(n: usize, f: &F) -> Complex64
where
    F: Fn(usize) -> Complex64,
{
    fn rec<F: Fn(usize) -> Complex64>(lo: usize, hi: usize, f: &F) -> Complex64 {
        if hi - lo <= BLOCK {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in lo..hi {
                acc += f(i);
            }
            return acc;
        }
        let mid = lo + (hi - lo) / 2;
        rec(lo, mid, f) + rec(mid, hi, f)
    }
    rec(0, n, f)
}

/// Combine an ordered list of partial results pairwise.
pub fn pairwise_reduce<T, F>(mut parts: Vec<T>, combine: F) -> Option<T>
where
    F: Fn(T, T) -> T,
{
    if parts.is_empty() {
        return None;
    }
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(combine(a, b)),
                None => next.push(a),
            }
        }
        parts = next;
    }
    parts.pop()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn by_index_agrees_with_slice() {
        let v: Vec<Complex64> = (0..777).map(|i| Complex64::new(i as f64, -(i as f64) * 0.5)).collect();
        assert_eq!(pairwise_sum(&v), pairwise_sum_by(v.len(), &|i| v[i]));
    }

    #[test]
    fn reduce_is_order_preserving() {
        let parts: Vec<String> = ["a", "b", "c", "d", "e"].iter().map(|s| s.to_string()).collect();
        let joined = pairwise_reduce(parts, |a, b| a + &b).unwrap();
        assert_eq!(joined, "abcde");
        assert!(pairwise_reduce(Vec::<f64>::new(), |a, b| a + b).is_none());
    }
}
