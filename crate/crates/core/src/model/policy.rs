//! Decision rules and the policies assembled from them.

use super::{validate_distribution, Agent, PosgModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default cap on pure-policy enumeration sizes.
pub const DEFAULT_POLICY_CAP: u128 = 1_000_000;

/// A stochastic decision rule: one action distribution per stage-`t` AOH
/// (or per type, in a Bayesian game).
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionRule<T> {
    agent: Agent,
    stage: usize,
    num_actions: usize,
    probs: Vec<T>,
}

impl<T: Scalar> DecisionRule<T> {
    pub fn new(agent: Agent, stage: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        let num_actions = rows.first().map_or(0, Vec::len);
        if num_actions == 0 {
            return Err(Error::Shape("decision rule without rows or actions".into()));
        }
        let mut probs = Vec::with_capacity(rows.len() * num_actions);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != num_actions {
                return Err(Error::Shape(format!("decision rule row {i} is ragged")));
            }
            validate_distribution(
                row,
                &format!("rule(agent {}, stage {stage})[{i}]", agent.number()),
            )?;
            probs.extend_from_slice(row);
        }
        Ok(Self {
            agent,
            stage,
            num_actions,
            probs,
        })
    }

    pub fn uniform(agent: Agent, stage: usize, num_rows: usize, num_actions: usize) -> Self {
        let p = T::one() / T::lit(num_actions as f64);
        Self {
            agent,
            stage,
            num_actions,
            probs: vec![p; num_rows * num_actions],
        }
    }

    /// Pure rule: row `i` plays `actions[i]` with probability one.
    pub fn degenerate(agent: Agent, stage: usize, actions: &[usize], num_actions: usize) -> Self {
        let mut probs = vec![T::zero(); actions.len() * num_actions];
        for (i, &a) in actions.iter().enumerate() {
            probs[i * num_actions + a] = T::one();
        }
        Self {
            agent,
            stage,
            num_actions,
            probs,
        }
    }

    pub(crate) fn from_raw(agent: Agent, stage: usize, num_actions: usize, probs: Vec<T>) -> Self {
        debug_assert_eq!(probs.len() % num_actions, 0);
        Self {
            agent,
            stage,
            num_actions,
            probs,
        }
    }

    pub fn agent(&self) -> Agent {
        self.agent
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn num_rows(&self) -> usize {
        self.probs.len() / self.num_actions
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.probs[i * self.num_actions..(i + 1) * self.num_actions]
    }

    #[inline]
    pub fn prob(&self, i: usize, a: usize) -> T {
        self.probs[i * self.num_actions + a]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.probs.chunks(self.num_actions)
    }

    pub fn is_pure(&self) -> bool {
        self.rows()
            .all(|r| r.iter().filter(|&&p| p != T::zero()).count() == 1 && r.contains(&T::one()))
    }

    /// Checks that the rule's domain is exactly the agent's stage AOHs.
    pub fn check_domain(&self, model: &PosgModel<T>) -> Result<()> {
        let want_rows = model.aoh_count(self.agent, self.stage);
        let want_actions = model.num_actions(self.agent);
        if self.num_rows() != want_rows || self.num_actions != want_actions {
            return Err(Error::Shape(format!(
                "rule for agent {} stage {} is {}x{} but the model needs {}x{}",
                self.agent.number(),
                self.stage,
                self.num_rows(),
                self.num_actions,
                want_rows,
                want_actions
            )));
        }
        Ok(())
    }
}

/// Both agents' decision rules for one stage.
#[derive(Debug, Clone, PartialEq)]
pub struct JointRule<T> {
    pub one: DecisionRule<T>,
    pub two: DecisionRule<T>,
}

impl<T: Scalar> JointRule<T> {
    pub fn new(one: DecisionRule<T>, two: DecisionRule<T>) -> Result<Self> {
        if one.agent != Agent::One || two.agent != Agent::Two {
            return Err(Error::Shape("joint rule needs agent 1 then agent 2".into()));
        }
        if one.stage != two.stage {
            return Err(Error::Shape(format!(
                "joint rule mixes stages {} and {}",
                one.stage, two.stage
            )));
        }
        Ok(Self { one, two })
    }

    pub fn uniform(model: &PosgModel<T>, stage: usize) -> Self {
        let rule = |agent| {
            DecisionRule::uniform(
                agent,
                stage,
                model.aoh_count(agent, stage),
                model.num_actions(agent),
            )
        };
        Self {
            one: rule(Agent::One),
            two: rule(Agent::Two),
        }
    }

    pub fn stage(&self) -> usize {
        self.one.stage
    }

    pub fn get(&self, agent: Agent) -> &DecisionRule<T> {
        match agent {
            Agent::One => &self.one,
            Agent::Two => &self.two,
        }
    }

    pub fn check_domain(&self, model: &PosgModel<T>) -> Result<()> {
        self.one.check_domain(model)?;
        self.two.check_domain(model)
    }
}

/// Both agents' rules for stages `0..t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PastJointPolicy<T> {
    rules: Vec<JointRule<T>>,
}

impl<T: Scalar> PastJointPolicy<T> {
    pub fn empty() -> Self {
        Self { rules: Vec::new() }
    }

    pub fn new(rules: Vec<JointRule<T>>) -> Result<Self> {
        for (k, r) in rules.iter().enumerate() {
            if r.stage() != k {
                return Err(Error::Shape(format!(
                    "past joint policy entry {k} is for stage {}",
                    r.stage()
                )));
            }
        }
        Ok(Self { rules })
    }

    /// The stage this policy leads up to.
    pub fn stage(&self) -> usize {
        self.rules.len()
    }

    pub fn rules(&self) -> &[JointRule<T>] {
        &self.rules
    }

    pub fn extended(&self, rule: JointRule<T>) -> Result<Self> {
        let mut rules = self.rules.clone();
        rules.push(rule);
        Self::new(rules)
    }
}

/// One agent's rules for stages `start..h`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialPolicy<T> {
    agent: Agent,
    start: usize,
    rules: Vec<DecisionRule<T>>,
    pure: bool,
}

impl<T: Scalar> PartialPolicy<T> {
    pub fn new(agent: Agent, start: usize, rules: Vec<DecisionRule<T>>) -> Result<Self> {
        if rules.is_empty() {
            return Err(Error::Shape("partial policy without rules".into()));
        }
        for (k, r) in rules.iter().enumerate() {
            if r.agent != agent || r.stage != start + k {
                return Err(Error::Shape(format!(
                    "partial policy for agent {} from stage {start}: entry {k} is agent {} stage {}",
                    agent.number(),
                    r.agent.number(),
                    r.stage
                )));
            }
        }
        let pure = rules.iter().all(DecisionRule::is_pure);
        Ok(Self {
            agent,
            start,
            rules,
            pure,
        })
    }

    pub fn uniform(model: &PosgModel<T>, agent: Agent, start: usize) -> Self {
        let rules = (start..model.horizon())
            .map(|k| {
                DecisionRule::uniform(
                    agent,
                    k,
                    model.aoh_count(agent, k),
                    model.num_actions(agent),
                )
            })
            .collect();
        Self {
            agent,
            start,
            rules,
            pure: model.num_actions(agent) == 1,
        }
    }

    pub fn agent(&self) -> Agent {
        self.agent
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn is_pure(&self) -> bool {
        self.pure
    }

    pub fn rules(&self) -> &[DecisionRule<T>] {
        &self.rules
    }

    /// The rule used at absolute `stage`.
    #[inline]
    pub fn rule(&self, stage: usize) -> &DecisionRule<T> {
        &self.rules[stage - self.start]
    }

    pub fn check_domain(&self, model: &PosgModel<T>) -> Result<()> {
        if self.start + self.rules.len() != model.horizon() {
            return Err(Error::Shape(format!(
                "partial policy covers stages {}..{} but the horizon is {}",
                self.start,
                self.start + self.rules.len(),
                model.horizon()
            )));
        }
        self.rules.iter().try_for_each(|r| r.check_domain(model))
    }
}

/// `|A_i|^(Σ_{k=t}^{h-1} |AOH_i^k|)`, saturating at `u128::MAX`.
pub fn pure_partial_policy_count<T: Scalar>(
    model: &PosgModel<T>,
    agent: Agent,
    stage: usize,
) -> u128 {
    let slots: u128 = (stage..model.horizon())
        .map(|k| model.aoh_count(agent, k) as u128)
        .sum();
    let base = model.num_actions(agent) as u128;
    u32::try_from(slots)
        .ok()
        .and_then(|e| base.checked_pow(e))
        .unwrap_or(u128::MAX)
}

/// Every pure partial policy of `agent` from `stage`, each exactly once.
///
/// Policies are ordered as mixed-radix counters over the slots
/// `(stage, aoh)` in stage-then-index order, the first slot most significant.
pub fn enumerate_pure_partial_policies<T: Scalar>(
    model: &PosgModel<T>,
    agent: Agent,
    stage: usize,
    cap: u128,
) -> Result<PurePolicyIter<T>> {
    model.check_stage(stage)?;
    let size = pure_partial_policy_count(model, agent, stage);
    if size > cap {
        return Err(Error::TooLarge {
            what: format!(
                "pure partial policies of agent {} from stage {stage}",
                agent.number()
            ),
            size,
            cap,
        });
    }
    let shape: Vec<usize> = (stage..model.horizon())
        .map(|k| model.aoh_count(agent, k))
        .collect();
    let slots = shape.iter().sum();
    Ok(PurePolicyIter {
        agent,
        start: stage,
        num_actions: model.num_actions(agent),
        shape,
        digits: vec![0; slots],
        done: false,
        _scalar: std::marker::PhantomData,
    })
}

#[derive(Debug, Clone)]
pub struct PurePolicyIter<T> {
    agent: Agent,
    start: usize,
    num_actions: usize,
    shape: Vec<usize>,
    digits: Vec<usize>,
    done: bool,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Scalar> Iterator for PurePolicyIter<T> {
    type Item = PartialPolicy<T>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let mut offset = 0;
        let rules = self
            .shape
            .iter()
            .enumerate()
            .map(|(k, &n)| {
                let acts = &self.digits[offset..offset + n];
                offset += n;
                DecisionRule::degenerate(self.agent, self.start + k, acts, self.num_actions)
            })
            .collect();
        let policy = PartialPolicy {
            agent: self.agent,
            start: self.start,
            rules,
            pure: true,
        };
        // advance the counter, last slot fastest
        self.done = true;
        for d in self.digits.iter_mut().rev() {
            *d += 1;
            if *d < self.num_actions {
                self.done = false;
                break;
            }
            *d = 0;
        }
        Some(policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PosgTables;

    fn two_by_two(horizon: usize) -> PosgModel<f64> {
        PosgModel::new(PosgTables {
            horizon,
            states: vec!["s".into()],
            actions: [vec!["a".into(), "b".into()], vec!["a".into(), "b".into()]],
            observations: [vec!["x".into(), "y".into()], vec!["x".into(), "y".into()]],
            transition: vec![vec![vec![vec![1.0]; 2]; 2]],
            observation_fn: vec![vec![vec![vec![vec![0.25; 2]; 2]]; 2]; 2],
            reward: vec![vec![vec![0.0; 2]; 2]],
            b0: vec![1.0],
        })
        .unwrap()
    }

    #[test]
    fn pure_policy_counts() {
        let h1 = two_by_two(1);
        assert_eq!(
            enumerate_pure_partial_policies(&h1, Agent::One, 0, DEFAULT_POLICY_CAP)
                .unwrap()
                .count(),
            2
        );
        let h2 = two_by_two(2);
        assert_eq!(pure_partial_policy_count(&h2, Agent::One, 0), 32);
        let all: Vec<_> = enumerate_pure_partial_policies(&h2, Agent::Two, 0, DEFAULT_POLICY_CAP)
            .unwrap()
            .collect();
        assert_eq!(all.len(), 32);
        assert!(all.iter().all(PartialPolicy::is_pure));
        for i in 0..all.len() {
            for j in i + 1..all.len() {
                assert_ne!(all[i], all[j]);
            }
        }
        all[5].check_domain(&h2).unwrap();
    }

    #[test]
    fn cap_is_enforced() {
        let h2 = two_by_two(2);
        let err = enumerate_pure_partial_policies(&h2, Agent::One, 0, 31).unwrap_err();
        assert!(matches!(err, Error::TooLarge { size: 32, .. }));
    }

    #[test]
    fn rule_validation() {
        assert!(DecisionRule::new(Agent::One, 0, vec![vec![0.5, 0.4]]).is_err());
        let r = DecisionRule::new(Agent::One, 0, vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(r.is_pure());
        assert!(!DecisionRule::<f64>::uniform(Agent::One, 0, 1, 2).is_pure());
    }

    #[test]
    fn past_policy_stages_contiguous() {
        let m = two_by_two(2);
        let r0 = JointRule::uniform(&m, 0);
        let r1 = JointRule::uniform(&m, 1);
        assert!(PastJointPolicy::new(vec![r1.clone()]).is_err());
        let pjp = PastJointPolicy::new(vec![r0])
            .unwrap()
            .extended(r1)
            .unwrap();
        assert_eq!(pjp.stage(), 2);
    }
}
