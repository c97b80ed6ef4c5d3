//! Row-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature these dispatch to rayon; without it they are
//! plain loops. Reductions always combine per-row partial results in row
//! order, so results are bit-identical between the two builds and across
//! thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Calls `f(row_index, row)` for every `row_len`-sized chunk of `data`.
pub fn for_each_row<F>(data: &mut [f64], row_len: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(row_len)
        .enumerate()
        .with_min_len(4)
        .for_each(|(i, row)| f(i, row));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(row_len)
        .enumerate()
        .for_each(|(i, row)| f(i, row));
}

/// Evaluates `f` on `0..n` and returns the results in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Deterministic sum of `f(i)` over `0..n`: partials are computed (possibly
/// in parallel) and then added left to right.
pub fn sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_range(n, f).into_iter().fold(0.0, |acc, x| acc + x)
}

/// Deterministic max of `f(i)` over `0..n` (0 for an empty range).
pub fn max_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    map_range(n, f).into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_visited_in_place() {
        let mut data = vec![0.0; 12];
        for_each_row(&mut data, 3, |i, row| {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (10 * i + j) as f64;
            }
        });
        assert_eq!(data[0], 0.0);
        assert_eq!(data[5], 12.0);
        assert_eq!(data[11], 32.0);
    }

    #[test]
    fn reductions_follow_index_order() {
        let xs: Vec<f64> = (0..1000).map(|i| 1.0 / (i as f64 + 1.0)).collect();
        let seq = xs.iter().fold(0.0, |a, x| a + x);
        assert_eq!(sum_range(xs.len(), |i| xs[i]), seq);
        assert_eq!(max_range(xs.len(), |i| xs[i]), 1.0);
        assert_eq!(max_range(0, |_| 1.0), 0.0);
    }
}
