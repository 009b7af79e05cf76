//! Independent ground truth: pure-policy flattening into matrix games and
//! an LP solver for them.

mod flatten;
pub mod lp;
mod matrix;

pub use flatten::{flatten_subgame, pure_policies, FlattenedSubgame};
pub use lp::DEFAULT_PIVOT_CAP;
pub use matrix::{
    lp_minimax, solve_matrix_game, solve_matrix_game_capped, LpMinimax, MatrixGame, MatrixSolution,
};
