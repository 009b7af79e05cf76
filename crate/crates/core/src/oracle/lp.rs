//! Dense primal simplex for `max c·x  s.t.  A x <= b, x >= 0` with `b >= 0`.
//!
//! The slack basis is feasible because `b >= 0`, so there is no phase one.
//! Entering and leaving variables follow Bland's rule, which rules out
//! cycling on degenerate pivots.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_PIVOT_CAP: usize = 100_000;

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub objective: T,
    /// Optimal structural variables.
    pub primal: Vec<T>,
    /// Optimal multipliers of the `<=` rows.
    pub dual: Vec<T>,
    pub pivots: usize,
}

/// Solves the LP; `a` is `m` rows of `n` coefficients.
pub fn maximize<T: Scalar>(
    c: &[T],
    a: &[Vec<T>],
    b: &[T],
    pivot_cap: usize,
) -> Result<LpSolution<T>> {
    let n = c.len();
    let m = b.len();
    if a.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(
            "LP constraint matrix does not match c and b".into(),
        ));
    }
    if b.iter().any(|&x| x < T::zero()) {
        return Err(Error::Lp("right-hand side must be non-negative".into()));
    }
    let tol = T::lit(T::PIVOT_TOL);
    let width = n + m;
    let mut tab: Vec<Vec<T>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = Vec::with_capacity(width + 1);
            r.extend_from_slice(row);
            r.extend((0..m).map(|k| if k == i { T::one() } else { T::zero() }));
            r.push(b[i]);
            r
        })
        .collect();
    // reduced costs; objective value kept in the last slot, negated
    let mut obj: Vec<T> = c
        .iter()
        .copied()
        .chain((0..=m).map(|_| T::zero()))
        .collect();
    let mut basis: Vec<usize> = (n..width).collect();

    let mut pivots = 0;
    while let Some(enter) = (0..width).find(|&j| obj[j] > tol) {
        let mut leave: Option<(usize, T)> = None;
        for (i, row) in tab.iter().enumerate() {
            if row[enter] > tol {
                let ratio = row[width] / row[enter];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr || (ratio == lr && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((row_out, _)) = leave else {
            return Err(Error::Lp(format!(
                "unbounded in direction of variable {enter}"
            )));
        };
        pivots += 1;
        if pivots > pivot_cap {
            return Err(Error::Lp(format!("pivot cap {pivot_cap} exceeded")));
        }
        let p = tab[row_out][enter];
        for x in tab[row_out].iter_mut() {
            *x /= p;
        }
        tab[row_out][enter] = T::one();
        let pivot_row = tab[row_out].clone();
        for (i, row) in tab.iter_mut().enumerate() {
            if i == row_out {
                continue;
            }
            let f = row[enter];
            if f != T::zero() {
                for (x, &pr) in row.iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                }
                row[enter] = T::zero();
            }
        }
        let f = obj[enter];
        for (x, &pr) in obj.iter_mut().zip(&pivot_row) {
            *x -= f * pr;
        }
        obj[enter] = T::zero();
        basis[row_out] = enter;
    }

    let mut primal = vec![T::zero(); n];
    for (i, &v) in basis.iter().enumerate() {
        if v < n {
            primal[v] = tab[i][width];
        }
    }
    let dual = (0..m).map(|i| -obj[n + i]).collect();
    Ok(LpSolution {
        objective: -obj[width],
        primal,
        dual,
        pivots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn textbook_lp() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18  ->  (2, 6), 36
        let sol = maximize(
            &[3.0, 5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[4.0, 12.0, 18.0],
            DEFAULT_PIVOT_CAP,
        )
        .unwrap();
        assert_abs_diff_eq!(sol.objective, 36.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.primal[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.primal[1], 6.0, epsilon = 1e-12);
        // strong duality
        let by: f64 = sol
            .dual
            .iter()
            .zip([4.0, 12.0, 18.0])
            .map(|(y, b)| y * b)
            .sum();
        assert_abs_diff_eq!(by, 36.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_lp_terminates() {
        // classic cycling example (Beale) under Dantzig's rule
        let c = [0.75, -20.0, 0.5, -6.0];
        let a = vec![
            vec![0.25, -8.0, -1.0, 9.0],
            vec![0.5, -12.0, -0.5, 3.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ];
        let sol = maximize(&c, &a, &[0.0, 0.0, 1.0], DEFAULT_PIVOT_CAP).unwrap();
        assert_abs_diff_eq!(sol.objective, 1.25, epsilon = 1e-12);
        assert_abs_diff_eq!(sol.primal[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn unbounded_reported() {
        let err = maximize(&[1.0], &[vec![-1.0]], &[1.0], DEFAULT_PIVOT_CAP).unwrap_err();
        assert!(matches!(err, Error::Lp(_)));
    }
}
