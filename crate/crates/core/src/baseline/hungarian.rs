//! Minimum-cost one-to-one assignment (Hungarian algorithm, shortest
//! augmenting path formulation, O(n^3)).

use crate::error::{Error, Result};
use crate::real::Real;

use super::Correspondences;

/// Dense non-negative cost matrix.
#[derive(Clone, Debug)]
pub struct CostMatrix<R> {
    data: Vec<R>,
    rows: usize,
    cols: usize,
}

impl<R: Real> CostMatrix<R> {
    pub fn new(rows: usize, cols: usize, data: Vec<R>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, actual: data.len() });
        }
        if data.iter().any(|v| !v.is_finite() || *v < R::zero()) {
            return Err(Error::InvalidParameter(
                "cost matrix entries must be finite and non-negative".into(),
            ));
        }
        Ok(CostMatrix { data, rows, cols })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> R) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CostMatrix::new(rows, cols, data)
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> R {
        self.data[i * self.cols + j]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// Optimal assignment of rows to columns minimizing the total cost.
///
/// Rectangular instances are padded to square with a large constant cost;
/// padded pairs are dropped from the output, so `min(rows, cols)` pairs come
/// back. The returned total is the sum over the real pairs.
pub fn hungarian<R: Real>(cost: &CostMatrix<R>) -> Result<(Correspondences, R)> {
    if cost.rows == 0 || cost.cols == 0 {
        return Err(Error::EmptyInput("cost matrix"));
    }
    let n = cost.rows.max(cost.cols);
    let max_entry = cost
        .data
        .iter()
        .fold(R::zero(), |a, &b| a.max(b));
    let pad = max_entry + R::one();
    let at = |i: usize, j: usize| -> R {
        if i < cost.rows && j < cost.cols {
            cost.at(i, j)
        } else {
            pad
        }
    };

    // Shortest augmenting path with row/column potentials. Indices are
    // 1-based internally; column 0 is the virtual root.
    let inf = R::infinity();
    let mut u = vec![R::zero(); n + 1];
    let mut v = vec![R::zero(); n + 1];
    let mut match_col = vec![0usize; n + 1]; // column -> row (0 = unmatched)

    for row in 1..=n {
        let mut links = vec![0usize; n + 1];
        let mut mins = vec![inf; n + 1];
        let mut visited = vec![false; n + 1];
        let mut marked_col = 0usize;
        match_col[0] = row;

        loop {
            visited[marked_col] = true;
            let row_here = match_col[marked_col];
            let mut delta = inf;
            let mut next_col = 0usize;
            for col in 1..=n {
                if visited[col] {
                    continue;
                }
                let reduced = at(row_here - 1, col - 1) - u[row_here] - v[col];
                if reduced < mins[col] {
                    mins[col] = reduced;
                    links[col] = marked_col;
                }
                if mins[col] < delta {
                    delta = mins[col];
                    next_col = col;
                }
            }
            for col in 0..=n {
                if visited[col] {
                    u[match_col[col]] = u[match_col[col]] + delta;
                    v[col] = v[col] - delta;
                } else {
                    mins[col] = mins[col] - delta;
                }
            }
            marked_col = next_col;
            if match_col[marked_col] == 0 {
                break;
            }
        }

        // Augment along the path back to the root.
        while marked_col != 0 {
            let prev = links[marked_col];
            match_col[marked_col] = match_col[prev];
            marked_col = prev;
        }
    }

    let mut pairs = Vec::new();
    let mut total = R::zero();
    for col in 1..=n {
        let row = match_col[col];
        if row >= 1 && row - 1 < cost.rows && col - 1 < cost.cols {
            pairs.push((row - 1, col - 1));
            total = total + cost.at(row - 1, col - 1);
        }
    }
    pairs.sort_unstable();
    Ok((Correspondences { pairs }, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute_force(cost: &CostMatrix<f64>) -> f64 {
        // Exhaustive minimum over all permutations (square case).
        let n = cost.rows();
        let mut cols: Vec<usize> = (0..n).collect();
        let mut best = f64::INFINITY;
        permute(&mut cols, 0, &mut |perm| {
            let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost.at(i, j)).sum();
            if total < best {
                best = total;
            }
        });
        best
    }

    fn permute(v: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == v.len() {
            visit(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, visit);
            v.swap(k, i);
        }
    }

    #[test]
    fn two_by_two() {
        let cost = CostMatrix::new(2, 2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        let (c, total) = hungarian(&cost).unwrap();
        assert_eq!(c.pairs, vec![(0, 0), (1, 1)]);
        assert_eq!(total, 2.0);
    }

    #[test]
    fn diagonal_dominant_picks_the_diagonal() {
        let n = 6;
        let cost = CostMatrix::from_fn(n, n, |i, j| if i == j { 0.1 } else { 5.0 + i as f64 })
            .unwrap();
        let (c, total) = hungarian(&cost).unwrap();
        assert_eq!(c.pairs, (0..n).map(|i| (i, i)).collect::<Vec<_>>());
        assert!((total - 0.6).abs() < 1e-12);
        assert!(c.is_one_to_one());
    }

    #[test]
    fn matches_exhaustive_search_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for case in 0..100 {
            let n = 5;
            let cost = CostMatrix::from_fn(n, n, |_, _| rng.random_range(0.0..10.0)).unwrap();
            let (c, total) = hungarian(&cost).unwrap();
            let best = brute_force(&cost);
            assert!(
                (total - best).abs() < 1e-9,
                "case {case}: got {total}, optimum {best}"
            );
            assert!(c.is_one_to_one());
            assert_eq!(c.pairs.len(), n);
        }
    }

    #[test]
    fn rectangular_instances_pad_cleanly() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let rows = rng.random_range(2..6);
            let cols = rng.random_range(2..6);
            let cost = CostMatrix::from_fn(rows, cols, |_, _| rng.random_range(0.0..4.0)).unwrap();
            let (c, total) = hungarian(&cost).unwrap();
            assert_eq!(c.pairs.len(), rows.min(cols));
            assert!(c.is_one_to_one());
            let check: f64 = c.pairs.iter().map(|&(i, j)| cost.at(i, j)).sum();
            assert!((check - total).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let cost = CostMatrix::<f64>::new(0, 0, vec![]).unwrap();
        assert!(hungarian(&cost).is_err());
    }

    #[test]
    fn negative_costs_are_rejected() {
        assert!(CostMatrix::new(1, 1, vec![-1.0]).is_err());
        assert!(CostMatrix::new(1, 1, vec![f64::NAN]).is_err());
    }
}
