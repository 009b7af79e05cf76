//! Normal-form flattening of the subgame that starts at a statistic.

use rayon::prelude::*;

use super::MatrixGame;
use crate::error::{Error, Result};
use crate::model::{enumerate_pure_partial_policies, Agent, PartialPolicy};
use crate::posg::{PlanTimeGame, Statistic};
use crate::scalar::Scalar;

/// Payoff matrix over pure partial policies, with the policies that index
/// its rows (agent one) and columns (agent two).
#[derive(Debug, Clone)]
pub struct FlattenedSubgame<T> {
    pub matrix: MatrixGame<T>,
    pub policies1: Vec<PartialPolicy<T>>,
    pub policies2: Vec<PartialPolicy<T>>,
}

/// Every pure partial policy of `agent` from `stage`, bounded by `cap`.
pub fn pure_policies<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    agent: Agent,
    stage: usize,
    cap: u128,
) -> Result<Vec<PartialPolicy<T>>> {
    Ok(enumerate_pure_partial_policies(game.model(), agent, stage, cap)?.collect())
}

/// Entry `(i, j)` is the exact expected return from `σ_t` onward under the
/// pure partial policies `(π1_i, π2_j)`.
pub fn flatten_subgame<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    sigma: &Statistic<T>,
) -> Result<FlattenedSubgame<T>> {
    game.check_statistic(sigma)?;
    let cap = game.caps().policies;
    let t = sigma.stage();
    let policies1 = pure_policies(game, Agent::One, t, cap)?;
    let policies2 = pure_policies(game, Agent::Two, t, cap)?;
    let cells = (policies1.len() as u128) * (policies2.len() as u128);
    if cells > cap {
        return Err(Error::TooLarge {
            what: format!("flattened subgame at stage {t}"),
            size: cells,
            cap,
        });
    }
    let payoff: Vec<T> = policies1
        .par_iter()
        .flat_map_iter(|p1| {
            policies2
                .iter()
                .map(move |p2| game.evaluate_unchecked(sigma, p1, p2))
        })
        .collect();
    let mut matrix = MatrixGame::from_flat(policies1.len(), policies2.len(), payoff);
    matrix.row_labels = (0..policies1.len()).map(|i| format!("pi1#{i}")).collect();
    matrix.col_labels = (0..policies2.len()).map(|j| format!("pi2#{j}")).collect();
    Ok(FlattenedSubgame {
        matrix,
        policies1,
        policies2,
    })
}
