//! Statistic-based values through the subgame oracle, and behavioral rules
//! recovered from its equilibrium mixtures.

use super::{PlanTimeGame, Statistic};
use crate::error::{Error, Result};
use crate::model::{Agent, DecisionRule, JointRule, PartialPolicy, PastJointPolicy};
use crate::oracle::{flatten_subgame, solve_matrix_game_capped, FlattenedSubgame, MatrixSolution};
use crate::scalar::Scalar;

/// A behavioral partial policy and the AOHs it never reaches.
type Extraction<T> = (PartialPolicy<T>, Vec<(usize, usize)>);

/// The flattened subgame at a statistic together with its LP solution.
#[derive(Debug, Clone)]
pub struct SubgameSolution<T> {
    pub stage: usize,
    pub value: T,
    pub flattened: FlattenedSubgame<T>,
    pub solution: MatrixSolution<T>,
}

/// Behavioral partial policies extracted from the equilibrium mixtures.
///
/// `unreached[i]` lists `(stage, aoh)` slots of agent `i + 1` whose
/// realization weight is zero; their rows are uniform.
#[derive(Debug, Clone)]
pub struct RationalPolicies<T> {
    pub one: PartialPolicy<T>,
    pub two: PartialPolicy<T>,
    pub unreached: [Vec<(usize, usize)>; 2],
}

impl<T: Scalar> RationalPolicies<T> {
    pub fn stage_rules(&self, stage: usize) -> JointRule<T> {
        JointRule {
            one: self.one.rule(stage).clone(),
            two: self.two.rule(stage).clone(),
        }
    }
}

impl<'m, T: Scalar> PlanTimeGame<'m, T> {
    /// Flattens the subgame at `σ_t` over pure partial policies and solves it.
    pub fn solve_subgame(&self, sigma: &Statistic<T>) -> Result<SubgameSolution<T>> {
        let flattened = flatten_subgame(self, sigma)?;
        let solution = solve_matrix_game_capped(&flattened.matrix, self.caps.pivots)?;
        Ok(SubgameSolution {
            stage: sigma.stage(),
            value: solution.value,
            flattened,
            solution,
        })
    }

    /// `V*_t(σ_t) = max_δ1 min_δ2 Q*_t(σ_t, δ)`.
    pub fn v_star(&self, sigma: &Statistic<T>) -> Result<T> {
        Ok(self.solve_subgame(sigma)?.value)
    }

    /// `Q*_t(σ_t, δ_t)`: the immediate expected reward, plus `V*_{t+1}` of the
    /// updated statistic before the last stage.
    pub fn q_star_statistic(&self, sigma: &Statistic<T>, rule: &JointRule<T>) -> Result<T> {
        let now = self.expected_immediate_reward(sigma, rule)?;
        if sigma.stage() + 1 == self.model.horizon() {
            return Ok(now);
        }
        let next = self.update_statistic(sigma, rule)?;
        Ok(now + self.v_star(&next)?)
    }

    /// `Q*_t(φ_t, δ_t)`, through the statistic the past joint policy induces.
    pub fn q_star_pjp(&self, pjp: &PastJointPolicy<T>, rule: &JointRule<T>) -> Result<T> {
        let sigma = self.statistic_from_pjp(pjp)?;
        self.q_star_statistic(&sigma, rule)
    }

    /// Rational stage-`t` rules at `σ_t`.
    pub fn rational_stage_rules(&self, sigma: &Statistic<T>) -> Result<JointRule<T>> {
        Ok(self.rational_policies(sigma)?.stage_rules(sigma.stage()))
    }

    /// Equilibrium partial policies from `σ_t`, in behavioral form.
    pub fn rational_policies(&self, sigma: &Statistic<T>) -> Result<RationalPolicies<T>> {
        let sol = self.solve_subgame(sigma)?;
        self.behavioral_from_solution(&sol)
    }

    pub fn behavioral_from_solution(
        &self,
        sol: &SubgameSolution<T>,
    ) -> Result<RationalPolicies<T>> {
        let (one, u1) = self.behavioral(
            Agent::One,
            sol.stage,
            &sol.flattened.policies1,
            &sol.solution.row_strategy,
        )?;
        let (two, u2) = self.behavioral(
            Agent::Two,
            sol.stage,
            &sol.flattened.policies2,
            &sol.solution.col_strategy,
        )?;
        Ok(RationalPolicies {
            one,
            two,
            unreached: [u1, u2],
        })
    }

    /// Realization-weight normalization of a mixture over pure partial
    /// policies: `δ(a | θ) = Σ_{π ~ θ, π(θ) = a} x_π / Σ_{π ~ θ} x_π`, where
    /// `π ~ θ` means `π` would have played every own action recorded in `θ`
    /// since the start stage.
    fn behavioral(
        &self,
        agent: Agent,
        start: usize,
        policies: &[PartialPolicy<T>],
        mixture: &[T],
    ) -> Result<Extraction<T>> {
        if policies.len() != mixture.len() {
            return Err(Error::Shape(
                "mixture length differs from the policy count".into(),
            ));
        }
        let m = self.model;
        let space = m.aoh_space(agent);
        let na = m.num_actions(agent);
        let h = m.horizon();
        let mut weights: Vec<Vec<T>> = (start..h)
            .map(|k| vec![T::zero(); m.aoh_count(agent, k) * na])
            .collect();
        for (pi, &x) in policies.iter().zip(mixture) {
            if x <= T::zero() {
                continue;
            }
            // consistent[k - start][idx]: pi reaches the stage-k AOH idx
            let mut consistent = vec![true; m.aoh_count(agent, start)];
            for k in start..h {
                let rule = pi.rule(k);
                let w = &mut weights[k - start];
                for (idx, &ok) in consistent.iter().enumerate() {
                    if ok {
                        w[idx * na + pure_action(rule, idx)] += x;
                    }
                }
                if k + 1 < h {
                    let mut next = vec![false; m.aoh_count(agent, k + 1)];
                    for (child, slot) in next.iter_mut().enumerate() {
                        let (parent, a, _) = space.parent(child);
                        *slot = consistent[parent] && pure_action(rule, parent) == a;
                    }
                    consistent = next;
                }
            }
        }
        let mut unreached = Vec::new();
        let uniform = T::one() / T::lit(na as f64);
        let rules = weights
            .into_iter()
            .enumerate()
            .map(|(offset, mut w)| {
                let k = start + offset;
                for (idx, row) in w.chunks_mut(na).enumerate() {
                    let total: T = row.iter().copied().sum();
                    if total > T::zero() {
                        row.iter_mut().for_each(|p| *p /= total);
                    } else {
                        row.iter_mut().for_each(|p| *p = uniform);
                        unreached.push((k, idx));
                    }
                }
                DecisionRule::from_raw(agent, k, na, w)
            })
            .collect();
        Ok((PartialPolicy::new(agent, start, rules)?, unreached))
    }
}

fn pure_action<T: Scalar>(rule: &DecisionRule<T>, row: usize) -> usize {
    rule.row(row)
        .iter()
        .position(|&p| p == T::one())
        .expect("pure rule rows are degenerate")
}
