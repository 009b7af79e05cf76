//! Ground-truth expected returns by summation over state histories.

use rayon::prelude::*;

use super::{PlanTimeGame, Statistic};
use crate::error::{Error, Result};
use crate::model::{enumerate_pure_partial_policies, split_joint, Agent, PartialPolicy};
use crate::scalar::Scalar;

/// Best-response values against a joint policy, by pure-policy enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exploitability<T> {
    /// Agent one's best-response value against the given agent-two policy.
    pub br1: T,
    /// Agent two's best-response value against the given agent-one policy.
    pub br2: T,
    /// Value of the joint policy itself.
    pub value: T,
}

impl<T: Scalar> Exploitability<T> {
    /// `br1 - br2`; zero exactly at a saddle point.
    pub fn gap(&self) -> T {
        self.br1 - self.br2
    }
}

impl<'m, T: Scalar> PlanTimeGame<'m, T> {
    fn check_partial(&self, policy: &PartialPolicy<T>, agent: Agent, start: usize) -> Result<()> {
        if policy.agent() != agent || policy.start() != start {
            return Err(Error::Shape(format!(
                "expected a partial policy of agent {} from stage {start}, got agent {} from stage {}",
                agent.number(),
                policy.agent().number(),
                policy.start()
            )));
        }
        policy.check_domain(self.model)
    }

    /// Expected return from stage `t` given state `s` and AOH indices.
    fn rollout(
        &self,
        t: usize,
        s: usize,
        i1: usize,
        i2: usize,
        p1: &PartialPolicy<T>,
        p2: &PartialPolicy<T>,
    ) -> T {
        let m = self.model;
        let (r1, r2) = (p1.rule(t).row(i1), p2.rule(t).row(i2));
        let last = t + 1 == m.horizon();
        let (s1, s2) = (m.aoh_space(Agent::One), m.aoh_space(Agent::Two));
        let mut total = T::zero();
        for (a1, &d1) in r1.iter().enumerate() {
            if d1 == T::zero() {
                continue;
            }
            for (a2, &d2) in r2.iter().enumerate() {
                if d2 == T::zero() {
                    continue;
                }
                let mut v = m.reward(s, a1, a2);
                if !last {
                    for sn in 0..m.num_states() {
                        let pt = m.transition(s, a1, a2, sn);
                        if pt == T::zero() {
                            continue;
                        }
                        for o1 in 0..s1.num_observations {
                            for o2 in 0..s2.num_observations {
                                let po = m.observation(a1, a2, sn, o1, o2);
                                if po == T::zero() {
                                    continue;
                                }
                                v += pt
                                    * po
                                    * self.rollout(
                                        t + 1,
                                        sn,
                                        s1.child(i1, a1, o1),
                                        s2.child(i2, a2, o2),
                                        p1,
                                        p2,
                                    );
                            }
                        }
                    }
                }
                total += d1 * d2 * v;
            }
        }
        total
    }

    /// Number of full `(s, a, s', o, ...)` histories of the model.
    pub fn history_count(&self) -> u128 {
        let m = self.model;
        let step = (m.num_actions(Agent::One) * m.num_actions(Agent::Two)) as u128;
        let branch = (m.num_states()
            * m.num_observations(Agent::One)
            * m.num_observations(Agent::Two)) as u128;
        let mut count = m.num_states() as u128;
        for t in 0..m.horizon() {
            count = count.saturating_mul(step);
            if t + 1 < m.horizon() {
                count = count.saturating_mul(branch);
            }
        }
        count
    }

    /// Exact `E[Σ_t R(s^t, a^t)]` from `b0` under a full joint policy.
    pub fn evaluate_joint_policy(
        &self,
        one: &PartialPolicy<T>,
        two: &PartialPolicy<T>,
    ) -> Result<T> {
        self.check_partial(one, Agent::One, 0)?;
        self.check_partial(two, Agent::Two, 0)?;
        let size = self.history_count();
        if size > self.caps.histories {
            return Err(Error::TooLarge {
                what: "full-history evaluation".into(),
                size,
                cap: self.caps.histories,
            });
        }
        Ok(self
            .model
            .initial_belief()
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != T::zero())
            .map(|(s, &b)| b * self.rollout(0, s, 0, 0, one, two))
            .sum())
    }

    /// Exact expected return from stage `t` onward when joint AOHs are
    /// distributed by `σ_t` and the partial policies start at `t`.
    pub fn evaluate_from_statistic(
        &self,
        sigma: &Statistic<T>,
        one: &PartialPolicy<T>,
        two: &PartialPolicy<T>,
    ) -> Result<T> {
        self.check_statistic(sigma)?;
        let t = sigma.stage();
        self.check_partial(one, Agent::One, t)?;
        self.check_partial(two, Agent::Two, t)?;
        Ok(self.evaluate_unchecked(sigma, one, two))
    }

    pub(crate) fn evaluate_unchecked(
        &self,
        sigma: &Statistic<T>,
        one: &PartialPolicy<T>,
        two: &PartialPolicy<T>,
    ) -> T {
        let t = sigma.stage();
        let n2 = self.model.aoh_count(Agent::Two, t);
        let beliefs = &self.histories.stage(t).belief;
        sigma
            .as_slice()
            .iter()
            .enumerate()
            .filter(|&(j, &p)| p != T::zero() && beliefs.is_reachable(j))
            .map(|(j, &p)| {
                let (i1, i2) = split_joint(j, n2);
                let v: T = beliefs
                    .row(j)
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b != T::zero())
                    .map(|(s, &b)| b * self.rollout(t, s, i1, i2, one, two))
                    .sum();
                p * v
            })
            .sum()
    }

    /// Best responses of both agents against `(one, two)` from `σ_t`, by
    /// enumerating pure partial policies.
    pub fn exploitability(
        &self,
        sigma: &Statistic<T>,
        one: &PartialPolicy<T>,
        two: &PartialPolicy<T>,
    ) -> Result<Exploitability<T>> {
        let t = sigma.stage();
        let value = self.evaluate_from_statistic(sigma, one, two)?;
        let pure1: Vec<_> =
            enumerate_pure_partial_policies(self.model, Agent::One, t, self.caps.policies)?
                .collect();
        let pure2: Vec<_> =
            enumerate_pure_partial_policies(self.model, Agent::Two, t, self.caps.policies)?
                .collect();
        let br1 = pure1
            .par_iter()
            .map(|p| self.evaluate_unchecked(sigma, p, two))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(T::neg_infinity(), T::max);
        let br2 = pure2
            .par_iter()
            .map(|p| self.evaluate_unchecked(sigma, one, p))
            .collect::<Vec<_>>()
            .into_iter()
            .fold(T::infinity(), T::min);
        Ok(Exploitability { br1, br2, value })
    }
}
