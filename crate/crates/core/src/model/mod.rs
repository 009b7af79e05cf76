//! Combinatorial objects of both game classes: POSGs, Bayesian games,
//! action-observation histories (AOHs), decision rules and policies.

mod aoh;
mod bayesian;
pub mod io;
mod policy;

pub use aoh::{enumerate_aohs, joint_index, split_joint, Aoh, AohSpace};
pub use bayesian::{BayesianGame, BgFamily, JointDist};
pub use io::{extra_field, load_bg, load_game, load_posg, GameFile};
pub use policy::{
    enumerate_pure_partial_policies, pure_partial_policy_count, DecisionRule, JointRule,
    PartialPolicy, PastJointPolicy, PurePolicyIter, DEFAULT_POLICY_CAP,
};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One of the two agents. Agent one maximizes the reward, agent two minimizes it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Agent {
    One,
    Two,
}

impl Agent {
    pub const BOTH: [Agent; 2] = [Agent::One, Agent::Two];

    pub fn index(self) -> usize {
        match self {
            Agent::One => 0,
            Agent::Two => 1,
        }
    }

    pub fn other(self) -> Agent {
        match self {
            Agent::One => Agent::Two,
            Agent::Two => Agent::One,
        }
    }

    /// 1 or 2, as used in file formats and CLI flags.
    pub fn number(self) -> u8 {
        self.index() as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Agent> {
        match n {
            1 => Some(Agent::One),
            2 => Some(Agent::Two),
            _ => None,
        }
    }
}

/// A finite two-agent zero-sum POSG.
///
/// Tables are stored flat in row-major order of their documented index
/// order: `T[s][a1][a2][s']`, `O[a1][a2][s'][o1][o2]`, `R[s][a1][a2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosgModel<T> {
    horizon: usize,
    states: Vec<String>,
    actions: [Vec<String>; 2],
    observations: [Vec<String>; 2],
    transition: Vec<T>,
    observation_fn: Vec<T>,
    reward: Vec<T>,
    b0: Vec<T>,
}

/// Nested-table description of a POSG, validated by [`PosgModel::new`].
#[derive(Debug, Clone)]
pub struct PosgTables<T> {
    pub horizon: usize,
    pub states: Vec<String>,
    pub actions: [Vec<String>; 2],
    pub observations: [Vec<String>; 2],
    /// `[s][a1][a2][s']`
    pub transition: Vec<Vec<Vec<Vec<T>>>>,
    /// `[a1][a2][s'][o1][o2]`
    pub observation_fn: Vec<Vec<Vec<Vec<Vec<T>>>>>,
    /// `[s][a1][a2]`
    pub reward: Vec<Vec<Vec<T>>>,
    pub b0: Vec<T>,
}

fn check_len<U>(v: &[U], n: usize, path: &str) -> Result<()> {
    if v.len() != n {
        return Err(Error::Shape(format!(
            "{path} has length {} but expected {n}",
            v.len()
        )));
    }
    Ok(())
}

fn check_distribution<T: Scalar>(row: &[T], path: &str) -> Result<()> {
    if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < T::zero()) {
        return Err(Error::Invariant(format!("{path} has invalid entry {x}")));
    }
    let sum: T = row.iter().copied().sum();
    if (sum - T::one()).abs().as_f64() > T::PROB_TOL {
        return Err(Error::Invariant(format!(
            "{path} sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

pub(crate) fn validate_distribution<T: Scalar>(row: &[T], path: &str) -> Result<()> {
    check_distribution(row, path)
}

impl<T: Scalar> PosgModel<T> {
    /// Validates the nested tables and builds the model.
    pub fn new(tables: PosgTables<T>) -> Result<Self> {
        let PosgTables {
            horizon,
            states,
            actions,
            observations,
            transition,
            observation_fn,
            reward,
            b0,
        } = tables;
        if horizon == 0 {
            return Err(Error::Invariant("horizon must be at least 1".into()));
        }
        if states.is_empty() {
            return Err(Error::Invariant("state set is empty".into()));
        }
        for agent in Agent::BOTH {
            let i = agent.index();
            if actions[i].is_empty() {
                return Err(Error::Invariant(format!(
                    "agent {} has no actions",
                    agent.number()
                )));
            }
            if observations[i].is_empty() {
                return Err(Error::Invariant(format!(
                    "agent {} has no observations",
                    agent.number()
                )));
            }
        }
        let ns = states.len();
        let (na1, na2) = (actions[0].len(), actions[1].len());
        let (no1, no2) = (observations[0].len(), observations[1].len());

        check_len(&transition, ns, "transition")?;
        let mut flat_t = Vec::with_capacity(ns * na1 * na2 * ns);
        for (s, by_a1) in transition.iter().enumerate() {
            check_len(by_a1, na1, &format!("transition[{s}]"))?;
            for (a1, by_a2) in by_a1.iter().enumerate() {
                check_len(by_a2, na2, &format!("transition[{s}][{a1}]"))?;
                for (a2, row) in by_a2.iter().enumerate() {
                    check_len(row, ns, &format!("transition[{s}][{a1}][{a2}]"))?;
                    check_distribution(row, &format!("T[{s}][{a1}][{a2}]"))?;
                    flat_t.extend_from_slice(row);
                }
            }
        }

        check_len(&observation_fn, na1, "observation_fn")?;
        let mut flat_o = Vec::with_capacity(na1 * na2 * ns * no1 * no2);
        for (a1, by_a2) in observation_fn.iter().enumerate() {
            check_len(by_a2, na2, &format!("observation_fn[{a1}]"))?;
            for (a2, by_s) in by_a2.iter().enumerate() {
                check_len(by_s, ns, &format!("observation_fn[{a1}][{a2}]"))?;
                for (s, by_o1) in by_s.iter().enumerate() {
                    check_len(by_o1, no1, &format!("observation_fn[{a1}][{a2}][{s}]"))?;
                    let mut block = Vec::with_capacity(no1 * no2);
                    for (o1, row) in by_o1.iter().enumerate() {
                        check_len(row, no2, &format!("observation_fn[{a1}][{a2}][{s}][{o1}]"))?;
                        block.extend_from_slice(row);
                    }
                    check_distribution(&block, &format!("O[{a1}][{a2}][{s}]"))?;
                    flat_o.extend(block);
                }
            }
        }

        check_len(&reward, ns, "reward")?;
        let mut flat_r = Vec::with_capacity(ns * na1 * na2);
        for (s, by_a1) in reward.iter().enumerate() {
            check_len(by_a1, na1, &format!("reward[{s}]"))?;
            for (a1, row) in by_a1.iter().enumerate() {
                check_len(row, na2, &format!("reward[{s}][{a1}]"))?;
                if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                    return Err(Error::Invariant(format!(
                        "R[{s}][{a1}] has non-finite entry {x}"
                    )));
                }
                flat_r.extend_from_slice(row);
            }
        }

        check_len(&b0, ns, "b0")?;
        check_distribution(&b0, "b0")?;

        Ok(Self {
            horizon,
            states,
            actions,
            observations,
            transition: flat_t,
            observation_fn: flat_o,
            reward: flat_r,
            b0,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn action_labels(&self, agent: Agent) -> &[String] {
        &self.actions[agent.index()]
    }

    pub fn observation_labels(&self, agent: Agent) -> &[String] {
        &self.observations[agent.index()]
    }

    pub fn num_actions(&self, agent: Agent) -> usize {
        self.actions[agent.index()].len()
    }

    pub fn num_observations(&self, agent: Agent) -> usize {
        self.observations[agent.index()].len()
    }

    pub fn aoh_space(&self, agent: Agent) -> AohSpace {
        AohSpace::new(self.num_actions(agent), self.num_observations(agent))
    }

    /// Number of individual AOHs of `agent` at `stage`.
    pub fn aoh_count(&self, agent: Agent, stage: usize) -> usize {
        self.aoh_space(agent).count(stage)
    }

    /// Number of joint AOHs at `stage`.
    pub fn joint_aoh_count(&self, stage: usize) -> usize {
        self.aoh_count(Agent::One, stage) * self.aoh_count(Agent::Two, stage)
    }

    pub fn check_stage(&self, stage: usize) -> Result<()> {
        if stage >= self.horizon {
            return Err(Error::StageOutOfRange {
                stage,
                horizon: self.horizon,
            });
        }
        Ok(())
    }

    #[inline]
    pub fn transition(&self, s: usize, a1: usize, a2: usize, next: usize) -> T {
        let (na1, na2, ns) = (
            self.actions[0].len(),
            self.actions[1].len(),
            self.states.len(),
        );
        self.transition[((s * na1 + a1) * na2 + a2) * ns + next]
    }

    #[inline]
    pub fn observation(&self, a1: usize, a2: usize, next: usize, o1: usize, o2: usize) -> T {
        let (na2, ns) = (self.actions[1].len(), self.states.len());
        let (no1, no2) = (self.observations[0].len(), self.observations[1].len());
        self.observation_fn[(((a1 * na2 + a2) * ns + next) * no1 + o1) * no2 + o2]
    }

    #[inline]
    pub fn reward(&self, s: usize, a1: usize, a2: usize) -> T {
        let (na1, na2) = (self.actions[0].len(), self.actions[1].len());
        self.reward[(s * na1 + a1) * na2 + a2]
    }

    pub fn initial_belief(&self) -> &[T] {
        &self.b0
    }

    /// Back to nested tables, e.g. for serialization.
    pub fn tables(&self) -> PosgTables<T> {
        let ns = self.num_states();
        let (na1, na2) = (self.num_actions(Agent::One), self.num_actions(Agent::Two));
        let (no1, no2) = (
            self.num_observations(Agent::One),
            self.num_observations(Agent::Two),
        );
        PosgTables {
            horizon: self.horizon,
            states: self.states.clone(),
            actions: self.actions.clone(),
            observations: self.observations.clone(),
            transition: (0..ns)
                .map(|s| {
                    (0..na1)
                        .map(|a1| {
                            (0..na2)
                                .map(|a2| (0..ns).map(|n| self.transition(s, a1, a2, n)).collect())
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            observation_fn: (0..na1)
                .map(|a1| {
                    (0..na2)
                        .map(|a2| {
                            (0..ns)
                                .map(|n| {
                                    (0..no1)
                                        .map(|o1| {
                                            (0..no2)
                                                .map(|o2| self.observation(a1, a2, n, o1, o2))
                                                .collect()
                                        })
                                        .collect()
                                })
                                .collect()
                        })
                        .collect()
                })
                .collect(),
            reward: (0..ns)
                .map(|s| {
                    (0..na1)
                        .map(|a1| (0..na2).map(|a2| self.reward(s, a1, a2)).collect())
                        .collect()
                })
                .collect(),
            b0: self.b0.clone(),
        }
    }
}
