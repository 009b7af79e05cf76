//! Policy-independent quantities per joint AOH: `Pr(s | θ, b0)`,
//! `Pr(o | θ, a)` and the expected immediate reward `Σ_s Pr(s|θ) R(s, a)`.
//!
//! Conditioning on a joint AOH fixes every past action, so none of these
//! depend on the agents' policies.

use crate::model::{joint_index, split_joint, Agent, PosgModel};
use crate::scalar::Scalar;

/// Forward-filtered state beliefs for every joint AOH of one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBelief<T> {
    pub stage: usize,
    pub num_states: usize,
    beliefs: Vec<T>,
    reachable: Vec<bool>,
}

impl<T: Scalar> StateBelief<T> {
    /// `Pr(· | θ, b0)`; all zeros when `θ` is unreachable.
    pub fn row(&self, joint: usize) -> &[T] {
        &self.beliefs[joint * self.num_states..(joint + 1) * self.num_states]
    }

    pub fn is_reachable(&self, joint: usize) -> bool {
        self.reachable[joint]
    }

    pub fn len(&self) -> usize {
        self.reachable.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reachable.is_empty()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct StageTable<T> {
    pub belief: StateBelief<T>,
    /// `[joint][a1][a2]`
    rewards: Vec<T>,
    /// `[joint][a1][a2][o1][o2]`, empty at the last stage.
    obs_probs: Vec<T>,
}

#[derive(Debug, Clone)]
pub(crate) struct HistoryTable<T> {
    stages: Vec<StageTable<T>>,
    na: [usize; 2],
    no: [usize; 2],
}

impl<T: Scalar> HistoryTable<T> {
    pub fn build(model: &PosgModel<T>) -> Self {
        let ns = model.num_states();
        let na = [model.num_actions(Agent::One), model.num_actions(Agent::Two)];
        let no = [
            model.num_observations(Agent::One),
            model.num_observations(Agent::Two),
        ];
        let spaces = [model.aoh_space(Agent::One), model.aoh_space(Agent::Two)];
        let mut stages = Vec::with_capacity(model.horizon());
        let mut belief = StateBelief {
            stage: 0,
            num_states: ns,
            beliefs: model.initial_belief().to_vec(),
            reachable: vec![true],
        };
        for t in 0..model.horizon() {
            let n_joint = belief.len();
            let mut rewards = vec![T::zero(); n_joint * na[0] * na[1]];
            for j in 0..n_joint {
                if !belief.reachable[j] {
                    continue;
                }
                let b = belief.row(j);
                for a1 in 0..na[0] {
                    for a2 in 0..na[1] {
                        rewards[(j * na[0] + a1) * na[1] + a2] =
                            (0..ns).map(|s| b[s] * model.reward(s, a1, a2)).sum();
                    }
                }
            }
            let last = t + 1 == model.horizon();
            let mut obs_probs = Vec::new();
            let mut next = None;
            if !last {
                let n2 = model.aoh_count(Agent::Two, t);
                let n2_next = model.aoh_count(Agent::Two, t + 1);
                let n_next = model.joint_aoh_count(t + 1);
                let mut next_beliefs = vec![T::zero(); n_next * ns];
                let mut next_reach = vec![false; n_next];
                obs_probs = vec![T::zero(); n_joint * na[0] * na[1] * no[0] * no[1]];
                let mut unnorm = vec![T::zero(); ns];
                for j in 0..n_joint {
                    if !belief.reachable[j] {
                        continue;
                    }
                    let (i1, i2) = split_joint(j, n2);
                    let b = belief.row(j).to_vec();
                    for a1 in 0..na[0] {
                        for a2 in 0..na[1] {
                            for o1 in 0..no[0] {
                                for o2 in 0..no[1] {
                                    for (sn, u) in unnorm.iter_mut().enumerate() {
                                        let pred: T = (0..ns)
                                            .map(|s| b[s] * model.transition(s, a1, a2, sn))
                                            .sum();
                                        *u = pred * model.observation(a1, a2, sn, o1, o2);
                                    }
                                    let p: T = unnorm.iter().copied().sum();
                                    obs_probs[(((j * na[0] + a1) * na[1] + a2) * no[0] + o1)
                                        * no[1]
                                        + o2] = p;
                                    if p > T::zero() {
                                        let c = joint_index(
                                            spaces[0].child(i1, a1, o1),
                                            spaces[1].child(i2, a2, o2),
                                            n2_next,
                                        );
                                        next_reach[c] = true;
                                        for (dst, &u) in next_beliefs[c * ns..(c + 1) * ns]
                                            .iter_mut()
                                            .zip(&unnorm)
                                        {
                                            *dst = u / p;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                next = Some(StateBelief {
                    stage: t + 1,
                    num_states: ns,
                    beliefs: next_beliefs,
                    reachable: next_reach,
                });
            }
            let current = std::mem::replace(
                &mut belief,
                next.clone().unwrap_or_else(|| StateBelief {
                    stage: t + 1,
                    num_states: ns,
                    beliefs: Vec::new(),
                    reachable: Vec::new(),
                }),
            );
            stages.push(StageTable {
                belief: current,
                rewards,
                obs_probs,
            });
        }
        Self { stages, na, no }
    }

    pub fn stage(&self, t: usize) -> &StageTable<T> {
        &self.stages[t]
    }

    #[inline]
    pub fn reward(&self, t: usize, joint: usize, a1: usize, a2: usize) -> T {
        self.stages[t].rewards[(joint * self.na[0] + a1) * self.na[1] + a2]
    }

    #[inline]
    pub fn obs_prob(
        &self,
        t: usize,
        joint: usize,
        a1: usize,
        a2: usize,
        o1: usize,
        o2: usize,
    ) -> T {
        self.stages[t].obs_probs
            [(((joint * self.na[0] + a1) * self.na[1] + a2) * self.no[0] + o1) * self.no[1] + o2]
    }
}
