//! Sequential layer: plan-time sufficient statistics, their update rule,
//! statistic-based Q/V values, rational rule extraction and ν-vectors.
//!
//! [`PlanTimeGame`] wraps a [`PosgModel`] together with its policy-independent
//! history table (state beliefs, observation probabilities and expected
//! rewards per joint AOH) so that repeated queries share that work.

mod dump;
mod eval;
mod history;
mod nu;
mod statistic;
mod value;

pub use dump::{write_statistic_csv, write_value_vector_csv};
pub use eval::Exploitability;
pub use history::StateBelief;
pub use statistic::Statistic;
pub use value::{RationalPolicies, SubgameSolution};

use crate::bg::decompose;
use crate::error::Result;
use crate::model::{Agent, BgFamily, PosgModel};
use crate::oracle::DEFAULT_PIVOT_CAP;
use crate::scalar::Scalar;
use history::HistoryTable;

/// Enumeration caps for the exact oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Pure partial policies per agent, and cells of a flattened matrix.
    pub policies: u128,
    /// Full histories summed by the ground-truth evaluator.
    pub histories: u128,
    pub pivots: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            policies: crate::model::DEFAULT_POLICY_CAP,
            histories: 10_000_000,
            pivots: DEFAULT_PIVOT_CAP,
        }
    }
}

/// Plan-time view of a finite zs-POSG.
#[derive(Debug, Clone)]
pub struct PlanTimeGame<'m, T> {
    model: &'m PosgModel<T>,
    histories: HistoryTable<T>,
    caps: Caps,
}

impl<'m, T: Scalar> PlanTimeGame<'m, T> {
    pub fn new(model: &'m PosgModel<T>) -> Self {
        Self::with_caps(model, Caps::default())
    }

    pub fn with_caps(model: &'m PosgModel<T>, caps: Caps) -> Self {
        Self {
            model,
            histories: HistoryTable::build(model),
            caps,
        }
    }

    pub fn model(&self) -> &'m PosgModel<T> {
        self.model
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    /// `Pr(s^t | θ^t, b0)` for every joint AOH at stage `t`.
    pub fn state_beliefs(&self, stage: usize) -> Result<StateBelief<T>> {
        self.model.check_stage(stage)?;
        Ok(self.histories.stage(stage).belief.clone())
    }

    /// `Σ_s Pr(s | θ, b0) R(s, a)`; zero for unreachable joint AOHs.
    pub fn expected_reward(&self, stage: usize, joint: usize, a1: usize, a2: usize) -> T {
        self.histories.reward(stage, joint, a1, a2)
    }

    /// `Pr(o1, o2 | θ, a)` for `stage < h - 1`.
    pub fn observation_prob(
        &self,
        stage: usize,
        joint: usize,
        a1: usize,
        a2: usize,
        o1: usize,
        o2: usize,
    ) -> T {
        self.histories.obs_prob(stage, joint, a1, a2, o1, o2)
    }

    pub fn is_reachable(&self, stage: usize, joint: usize) -> bool {
        self.histories.stage(stage).belief.is_reachable(joint)
    }

    /// The last stage as a family of Bayesian games: types are stage-`h-1`
    /// AOHs and `R(θ, a)` is the expected immediate reward.
    pub fn final_stage_family(&self) -> BgFamily<T> {
        let t = self.model.horizon() - 1;
        let labels = |agent| {
            crate::model::enumerate_aohs(self.model, agent, t)
                .expect("final stage is in range")
                .iter()
                .map(|a| a.label(self.model))
                .collect::<Vec<_>>()
        };
        let (n1, n2) = (
            self.model.aoh_count(Agent::One, t),
            self.model.aoh_count(Agent::Two, t),
        );
        let (na1, na2) = (
            self.model.num_actions(Agent::One),
            self.model.num_actions(Agent::Two),
        );
        let reward = (0..n1)
            .map(|i1| {
                (0..n2)
                    .map(|i2| {
                        (0..na1)
                            .map(|a1| {
                                (0..na2)
                                    .map(|a2| self.expected_reward(t, i1 * n2 + i2, a1, a2))
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        BgFamily::new(
            [labels(Agent::One), labels(Agent::Two)],
            [
                self.model.action_labels(Agent::One).to_vec(),
                self.model.action_labels(Agent::Two).to_vec(),
            ],
            reward,
        )
        .expect("final-stage family is well formed")
    }

    /// Best-response value `V^BR_i(σ, π_j) = σ_m,i · ν(σ_c,i, π_j)`.
    pub fn br_value_posg(
        &self,
        sigma: &Statistic<T>,
        opponent: &crate::model::PartialPolicy<T>,
        pivot: Agent,
    ) -> Result<T> {
        self.check_statistic(sigma)?;
        let mc = decompose(sigma.dist(), pivot);
        let nu = self.nu_vector(sigma.stage(), &mc.conditional, opponent)?;
        Ok(nu.dot(&mc.marginal))
    }
}
