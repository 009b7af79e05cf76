//! Individual action-observation histories and their global index order.
//!
//! A stage-`t` AOH `(a^0, o^1, ..., a^{t-1}, o^t)` is numbered as a base
//! `|A|·|O|` integer whose digits are the pairs `a·|O| + o`, earliest pair
//! most significant. That is lexicographic order with earlier stages first,
//! actions major and observations minor. Joint AOHs are numbered
//! agent-one-major: `i1 * n2 + i2`.

use super::{Agent, PosgModel};
use crate::error::Result;
use crate::scalar::Scalar;

/// Index arithmetic for one agent's AOHs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AohSpace {
    pub num_actions: usize,
    pub num_observations: usize,
}

impl AohSpace {
    pub fn new(num_actions: usize, num_observations: usize) -> Self {
        Self {
            num_actions,
            num_observations,
        }
    }

    pub fn branching(&self) -> usize {
        self.num_actions * self.num_observations
    }

    pub fn count(&self, stage: usize) -> usize {
        self.branching().pow(stage as u32)
    }

    /// Index of `(parent, action, observation)` one stage later.
    #[inline]
    pub fn child(&self, parent: usize, action: usize, observation: usize) -> usize {
        parent * self.branching() + action * self.num_observations + observation
    }

    /// Inverse of [`AohSpace::child`].
    #[inline]
    pub fn parent(&self, index: usize) -> (usize, usize, usize) {
        let digit = index % self.branching();
        (
            index / self.branching(),
            digit / self.num_observations,
            digit % self.num_observations,
        )
    }

    /// The `(action, observation)` pairs of AOH `index` at `stage`.
    pub fn decode(&self, stage: usize, mut index: usize) -> Vec<(usize, usize)> {
        let mut pairs = vec![(0, 0); stage];
        for slot in pairs.iter_mut().rev() {
            let (p, a, o) = self.parent(index);
            *slot = (a, o);
            index = p;
        }
        pairs
    }

    pub fn encode(&self, pairs: &[(usize, usize)]) -> usize {
        pairs.iter().fold(0, |acc, &(a, o)| self.child(acc, a, o))
    }

    /// The action this AOH took at `step` (`step < stage`).
    pub fn action_at(&self, stage: usize, index: usize, step: usize) -> usize {
        let digit = index / self.branching().pow((stage - 1 - step) as u32) % self.branching();
        digit / self.num_observations
    }
}

/// One agent's action-observation history.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Aoh {
    pub agent: Agent,
    pub stage: usize,
    /// `(a^k, o^{k+1})` for `k = 0..stage`.
    pub pairs: Vec<(usize, usize)>,
}

impl Aoh {
    /// Human-readable label, `root` for the empty history and
    /// `action/observation` pairs joined by `>` otherwise.
    pub fn label<T: Scalar>(&self, model: &PosgModel<T>) -> String {
        aoh_label(model, self.agent, &self.pairs)
    }
}

pub(crate) fn aoh_label<T: Scalar>(
    model: &PosgModel<T>,
    agent: Agent,
    pairs: &[(usize, usize)],
) -> String {
    if pairs.is_empty() {
        return "root".to_string();
    }
    let acts = model.action_labels(agent);
    let obs = model.observation_labels(agent);
    pairs
        .iter()
        .map(|&(a, o)| format!("{}/{}", acts[a], obs[o]))
        .collect::<Vec<_>>()
        .join(">")
}

/// All AOHs of `agent` at `stage`, in index order.
pub fn enumerate_aohs<T: Scalar>(
    model: &PosgModel<T>,
    agent: Agent,
    stage: usize,
) -> Result<Vec<Aoh>> {
    model.check_stage(stage)?;
    let space = model.aoh_space(agent);
    Ok((0..space.count(stage))
        .map(|i| Aoh {
            agent,
            stage,
            pairs: space.decode(stage, i),
        })
        .collect())
}

#[inline]
pub fn joint_index(i1: usize, i2: usize, n2: usize) -> usize {
    i1 * n2 + i2
}

#[inline]
pub fn split_joint(joint: usize, n2: usize) -> (usize, usize) {
    (joint / n2, joint % n2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stage_one_order() {
        let space = AohSpace::new(2, 2);
        let all: Vec<_> = (0..space.count(1)).map(|i| space.decode(1, i)).collect();
        assert_eq!(
            all,
            vec![vec![(0, 0)], vec![(0, 1)], vec![(1, 0)], vec![(1, 1)]]
        );
        assert_eq!(space.count(0), 1);
        assert_eq!(space.count(2), 16);
    }

    #[test]
    fn earlier_stage_is_most_significant() {
        let space = AohSpace::new(2, 2);
        assert_eq!(space.decode(2, 4), vec![(0, 1), (0, 0)]);
        assert_eq!(space.action_at(2, 11, 0), 1);
        assert_eq!(space.action_at(2, 11, 1), 1);
        assert_eq!(space.action_at(2, 4, 0), 0);
    }

    proptest! {
        #[test]
        fn encode_decode_roundtrip(na in 1usize..4, no in 1usize..4, stage in 0usize..4, seed in 0usize..10_000) {
            let space = AohSpace::new(na, no);
            let idx = seed % space.count(stage);
            let pairs = space.decode(stage, idx);
            prop_assert_eq!(space.encode(&pairs), idx);
            for (step, &(a, _)) in pairs.iter().enumerate() {
                prop_assert_eq!(space.action_at(stage, idx, step), a);
            }
        }
    }
}
