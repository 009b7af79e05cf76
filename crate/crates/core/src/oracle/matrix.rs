//! Zero-sum matrix games and their LP solution.

use super::lp::{self, DEFAULT_PIVOT_CAP};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Payoff matrix for the row (maximizing) player.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGame<T> {
    rows: usize,
    cols: usize,
    payoff: Vec<T>,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
}

impl<T: Scalar> MatrixGame<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::Shape("empty payoff matrix".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Shape("ragged payoff matrix".into()));
        }
        if rows.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Invariant("non-finite payoff entry".into()));
        }
        Ok(Self::from_flat(r, c, rows.concat()))
    }

    pub(crate) fn from_flat(rows: usize, cols: usize, payoff: Vec<T>) -> Self {
        Self {
            rows,
            cols,
            payoff,
            row_labels: (0..rows).map(|i| format!("r{i}")).collect(),
            col_labels: (0..cols).map(|j| format!("c{j}")).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.payoff[i * self.cols + j]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            payoff: self.payoff.iter().map(|&x| f(x)).collect(),
            ..self.clone()
        }
    }

    /// The game seen by the column player as a maximizer: `-Mᵀ`.
    pub fn negated_transpose(&self) -> Self {
        let mut payoff = Vec::with_capacity(self.payoff.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                payoff.push(-self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            payoff,
            row_labels: self.col_labels.clone(),
            col_labels: self.row_labels.clone(),
        }
    }

    /// `min_j (xᵀM)_j`: what the row mixture guarantees.
    pub fn guarantee_row(&self, x: &[T]) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| x[i] * self.get(i, j)).sum::<T>())
            .fold(T::infinity(), T::min)
    }

    /// `max_i (My)_i`: what the column mixture concedes at most.
    pub fn guarantee_col(&self, y: &[T]) -> T {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * y[j]).sum::<T>())
            .fold(T::neg_infinity(), T::max)
    }

    pub fn expected(&self, x: &[T], y: &[T]) -> T {
        (0..self.rows)
            .map(|i| x[i] * (0..self.cols).map(|j| self.get(i, j) * y[j]).sum::<T>())
            .sum()
    }

    /// CSV dump: header of column labels, then one labelled row per strategy.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![String::new()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.rows {
            let mut rec = vec![self.row_labels[i].clone()];
            rec.extend((0..self.cols).map(|j| format!("{}", self.get(i, j))));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One LP orientation's result.
#[derive(Debug, Clone)]
pub struct LpMinimax<T> {
    pub value: T,
    pub row_strategy: Vec<T>,
    pub col_strategy: Vec<T>,
    pub pivots: usize,
}

/// The value LP `max v s.t. xᵀM >= v·1, x ∈ Δ`, solved through its
/// normalized form on the shifted matrix `P = M - min(M) + 1 > 0`:
/// `max Σy s.t. P y <= 1, y >= 0`. The column mixture is `y/Σy`, the row
/// mixture comes from the duals, and the value is `1/Σy + min(M) - 1`.
pub fn lp_minimax<T: Scalar>(game: &MatrixGame<T>, pivot_cap: usize) -> Result<LpMinimax<T>> {
    let lowest = game.payoff.iter().copied().fold(T::infinity(), T::min);
    let shift = T::one() - lowest;
    let a: Vec<Vec<T>> = (0..game.rows)
        .map(|i| (0..game.cols).map(|j| game.get(i, j) + shift).collect())
        .collect();
    let sol = lp::maximize(
        &vec![T::one(); game.cols],
        &a,
        &vec![T::one(); game.rows],
        pivot_cap,
    )?;
    if sol.objective <= T::zero() {
        return Err(Error::Lp(
            "value LP returned a non-positive objective".into(),
        ));
    }
    let normalize = |v: Vec<T>| {
        let clipped: Vec<T> = v.into_iter().map(|x| x.max(T::zero())).collect();
        let total: T = clipped.iter().copied().sum();
        clipped.into_iter().map(|x| x / total).collect::<Vec<_>>()
    };
    Ok(LpMinimax {
        value: T::one() / sol.objective - shift,
        row_strategy: normalize(sol.dual),
        col_strategy: normalize(sol.primal),
        pivots: sol.pivots,
    })
}

#[derive(Debug, Clone)]
pub struct MatrixSolution<T> {
    /// Game value (max-min orientation).
    pub value: T,
    /// Value from the max-min orientation (LP on `M`).
    pub maxmin: T,
    /// Value from the min-max orientation (LP on `-Mᵀ`, negated).
    pub minmax: T,
    pub row_strategy: Vec<T>,
    pub col_strategy: Vec<T>,
    /// `max_i (My)_i - min_j (xᵀM)_j` for the returned mixtures.
    pub duality_gap: T,
}

/// Solves both LP orientations. The row mixture is taken from the min-max
/// orientation (where agent one is the column player) and the column mixture
/// from the max-min orientation, so each certificate comes from its own LP.
pub fn solve_matrix_game<T: Scalar>(game: &MatrixGame<T>) -> Result<MatrixSolution<T>> {
    solve_matrix_game_capped(game, DEFAULT_PIVOT_CAP)
}

pub fn solve_matrix_game_capped<T: Scalar>(
    game: &MatrixGame<T>,
    pivot_cap: usize,
) -> Result<MatrixSolution<T>> {
    let primal = lp_minimax(game, pivot_cap)?;
    let mirrored = lp_minimax(&game.negated_transpose(), pivot_cap)?;
    let row_strategy = mirrored.col_strategy;
    let col_strategy = primal.col_strategy;
    let duality_gap = game.guarantee_col(&col_strategy) - game.guarantee_row(&row_strategy);
    Ok(MatrixSolution {
        value: primal.value,
        maxmin: primal.value,
        minmax: -mirrored.value,
        row_strategy,
        col_strategy,
        duality_gap,
    })
}
