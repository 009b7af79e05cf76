//! One-shot zero-sum Bayesian games and families thereof.

use super::{validate_distribution, Agent};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A probability distribution over pairs `(i1, i2)`, stored agent-one-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist<T> {
    n1: usize,
    n2: usize,
    probs: Vec<T>,
}

impl<T: Scalar> JointDist<T> {
    /// Validates `probs` (length `n1 * n2`, agent-one-major) as a distribution.
    pub fn new(n1: usize, n2: usize, probs: Vec<T>) -> Result<Self> {
        if probs.len() != n1 * n2 {
            return Err(Error::Shape(format!(
                "joint distribution has {} entries, expected {}x{}",
                probs.len(),
                n1,
                n2
            )));
        }
        validate_distribution(&probs, "sigma")?;
        Ok(Self { n1, n2, probs })
    }

    /// Builds without validation; callers guarantee normalization.
    pub(crate) fn from_raw(n1: usize, n2: usize, probs: Vec<T>) -> Self {
        debug_assert_eq!(probs.len(), n1 * n2);
        Self { n1, n2, probs }
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let n1 = rows.len();
        let n2 = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n2) {
            return Err(Error::Shape("ragged joint distribution".into()));
        }
        Self::new(n1, n2, rows.concat())
    }

    pub fn point_mass(n1: usize, n2: usize, i1: usize, i2: usize) -> Self {
        let mut probs = vec![T::zero(); n1 * n2];
        probs[i1 * n2 + i2] = T::one();
        Self { n1, n2, probs }
    }

    pub fn product(p: &[T], q: &[T]) -> Self {
        let probs = p
            .iter()
            .flat_map(|&x| q.iter().map(move |&y| x * y))
            .collect();
        Self {
            n1: p.len(),
            n2: q.len(),
            probs,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    /// Number of outcomes on `agent`'s side.
    pub fn size(&self, agent: Agent) -> usize {
        match agent {
            Agent::One => self.n1,
            Agent::Two => self.n2,
        }
    }

    #[inline]
    pub fn get(&self, i1: usize, i2: usize) -> T {
        self.probs[i1 * self.n2 + i2]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.probs
    }

    /// Same distribution with the agents' roles swapped.
    pub fn transposed(&self) -> Self {
        let mut probs = Vec::with_capacity(self.probs.len());
        for i2 in 0..self.n2 {
            for i1 in 0..self.n1 {
                probs.push(self.get(i1, i2));
            }
        }
        Self {
            n1: self.n2,
            n2: self.n1,
            probs,
        }
    }
}

/// A family of zero-sum Bayesian games: everything but the type distribution.
///
/// Rewards are agent one's payoff, stored `[θ1][θ2][a1][a2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BgFamily<T> {
    types: [Vec<String>; 2],
    actions: [Vec<String>; 2],
    reward: Vec<T>,
}

impl<T: Scalar> BgFamily<T> {
    pub fn new(
        types: [Vec<String>; 2],
        actions: [Vec<String>; 2],
        reward: Vec<Vec<Vec<Vec<T>>>>,
    ) -> Result<Self> {
        for agent in Agent::BOTH {
            if types[agent.index()].is_empty() {
                return Err(Error::Invariant(format!(
                    "agent {} has no types",
                    agent.number()
                )));
            }
            if actions[agent.index()].is_empty() {
                return Err(Error::Invariant(format!(
                    "agent {} has no actions",
                    agent.number()
                )));
            }
        }
        let (nt1, nt2) = (types[0].len(), types[1].len());
        let (na1, na2) = (actions[0].len(), actions[1].len());
        let shape_err = |path: String, got: usize, want: usize| {
            Error::Shape(format!("{path} has length {got} but expected {want}"))
        };
        if reward.len() != nt1 {
            return Err(shape_err("reward".into(), reward.len(), nt1));
        }
        let mut flat = Vec::with_capacity(nt1 * nt2 * na1 * na2);
        for (t1, by_t2) in reward.iter().enumerate() {
            if by_t2.len() != nt2 {
                return Err(shape_err(format!("reward[{t1}]"), by_t2.len(), nt2));
            }
            for (t2, by_a1) in by_t2.iter().enumerate() {
                if by_a1.len() != na1 {
                    return Err(shape_err(format!("reward[{t1}][{t2}]"), by_a1.len(), na1));
                }
                for (a1, row) in by_a1.iter().enumerate() {
                    if row.len() != na2 {
                        return Err(shape_err(
                            format!("reward[{t1}][{t2}][{a1}]"),
                            row.len(),
                            na2,
                        ));
                    }
                    if let Some(x) = row.iter().find(|x| !x.is_finite()) {
                        return Err(Error::Invariant(format!(
                            "R[{t1}][{t2}][{a1}] has non-finite entry {x}"
                        )));
                    }
                    flat.extend_from_slice(row);
                }
            }
        }
        Ok(Self {
            types,
            actions,
            reward: flat,
        })
    }

    /// Builds from a flat `[θ1][θ2][a1][a2]` table with default labels.
    pub fn from_flat(
        num_types: [usize; 2],
        num_actions: [usize; 2],
        reward: Vec<T>,
    ) -> Result<Self> {
        let labels =
            |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
        let expected = num_types[0] * num_types[1] * num_actions[0] * num_actions[1];
        if reward.len() != expected {
            return Err(Error::Shape(format!(
                "reward has {} entries, expected {expected}",
                reward.len()
            )));
        }
        if num_types.contains(&0) || num_actions.contains(&0) {
            return Err(Error::Invariant("empty type or action set".into()));
        }
        Ok(Self {
            types: [labels("t", num_types[0]), labels("t", num_types[1])],
            actions: [labels("a", num_actions[0]), labels("a", num_actions[1])],
            reward,
        })
    }

    pub fn num_types(&self, agent: Agent) -> usize {
        self.types[agent.index()].len()
    }

    pub fn num_actions(&self, agent: Agent) -> usize {
        self.actions[agent.index()].len()
    }

    pub fn type_labels(&self, agent: Agent) -> &[String] {
        &self.types[agent.index()]
    }

    pub fn action_labels(&self, agent: Agent) -> &[String] {
        &self.actions[agent.index()]
    }

    #[inline]
    pub fn reward(&self, t1: usize, t2: usize, a1: usize, a2: usize) -> T {
        let (nt2, na1, na2) = (
            self.types[1].len(),
            self.actions[0].len(),
            self.actions[1].len(),
        );
        self.reward[((t1 * nt2 + t2) * na1 + a1) * na2 + a2]
    }

    /// Nested `[θ1][θ2][a1][a2]` reward table.
    pub fn reward_table(&self) -> Vec<Vec<Vec<Vec<T>>>> {
        let (nt1, nt2) = (self.types[0].len(), self.types[1].len());
        let (na1, na2) = (self.actions[0].len(), self.actions[1].len());
        (0..nt1)
            .map(|t1| {
                (0..nt2)
                    .map(|t2| {
                        (0..na1)
                            .map(|a1| (0..na2).map(|a2| self.reward(t1, t2, a1, a2)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Reward seen from the other agent: agents swapped, payoff negated.
    pub fn mirrored(&self) -> Self {
        let (nt1, nt2) = (self.types[0].len(), self.types[1].len());
        let (na1, na2) = (self.actions[0].len(), self.actions[1].len());
        let mut reward = Vec::with_capacity(self.reward.len());
        for t2 in 0..nt2 {
            for t1 in 0..nt1 {
                for a2 in 0..na2 {
                    for a1 in 0..na1 {
                        reward.push(-self.reward(t1, t2, a1, a2));
                    }
                }
            }
        }
        Self {
            types: [self.types[1].clone(), self.types[0].clone()],
            actions: [self.actions[1].clone(), self.actions[0].clone()],
            reward,
        }
    }

    pub fn check_sigma(&self, sigma: &JointDist<T>) -> Result<()> {
        if sigma.dims() != (self.num_types(Agent::One), self.num_types(Agent::Two)) {
            return Err(Error::Shape(format!(
                "sigma is {:?} but the family has {}x{} types",
                sigma.dims(),
                self.num_types(Agent::One),
                self.num_types(Agent::Two)
            )));
        }
        Ok(())
    }

    /// The member game `F(σ)`.
    pub fn with_sigma(&self, sigma: JointDist<T>) -> Result<BayesianGame<T>> {
        self.check_sigma(&sigma)?;
        Ok(BayesianGame {
            family: self.clone(),
            sigma,
        })
    }
}

/// A zero-sum Bayesian game: a family member with a fixed type distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianGame<T> {
    pub family: BgFamily<T>,
    pub sigma: JointDist<T>,
}

impl<T: Scalar> BayesianGame<T> {
    pub fn new(family: BgFamily<T>, sigma: JointDist<T>) -> Result<Self> {
        family.with_sigma(sigma)
    }
}
