use super::PlanTimeGame;
use crate::error::{Error, Result};
use crate::model::{
    joint_index, split_joint, Agent, DecisionRule, JointDist, JointRule, PastJointPolicy, PosgModel,
};
use crate::scalar::Scalar;

/// Plan-time sufficient statistic: a distribution over joint AOHs at a stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Statistic<T> {
    stage: usize,
    dist: JointDist<T>,
}

impl<T: Scalar> Statistic<T> {
    /// Point mass on the empty joint AOH.
    pub fn initial() -> Self {
        Self {
            stage: 0,
            dist: JointDist::point_mass(1, 1, 0, 0),
        }
    }

    /// Validates `dist` against the model's stage-`stage` AOH sets.
    pub fn new<M: Scalar>(model: &PosgModel<M>, stage: usize, dist: JointDist<T>) -> Result<Self> {
        model.check_stage(stage)?;
        let want = (
            model.aoh_count(Agent::One, stage),
            model.aoh_count(Agent::Two, stage),
        );
        if dist.dims() != want {
            return Err(Error::Shape(format!(
                "statistic for stage {stage} is {:?}, expected {:?}",
                dist.dims(),
                want
            )));
        }
        Ok(Self { stage, dist })
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn dist(&self) -> &JointDist<T> {
        &self.dist
    }

    pub fn as_slice(&self) -> &[T] {
        self.dist.as_slice()
    }
}

impl<'m, T: Scalar> PlanTimeGame<'m, T> {
    pub(crate) fn check_statistic(&self, sigma: &Statistic<T>) -> Result<()> {
        self.model.check_stage(sigma.stage)?;
        let want = (
            self.model.aoh_count(Agent::One, sigma.stage),
            self.model.aoh_count(Agent::Two, sigma.stage),
        );
        if sigma.dist.dims() != want {
            return Err(Error::Shape(format!(
                "statistic for stage {} is {:?}, expected {:?}",
                sigma.stage,
                sigma.dist.dims(),
                want
            )));
        }
        Ok(())
    }

    pub(crate) fn check_rule(&self, rule: &JointRule<T>, stage: usize) -> Result<()> {
        if rule.stage() != stage {
            return Err(Error::Shape(format!(
                "joint rule is for stage {} but the statistic is at stage {stage}",
                rule.stage()
            )));
        }
        rule.check_domain(self.model)
    }

    /// `σ_{t+1}(θ, a, o) = Pr(o | θ, a) δ(a | θ) σ_t(θ)`. No renormalization
    /// is applied; mass on unreachable joint AOHs does not propagate.
    pub fn update_statistic(
        &self,
        sigma: &Statistic<T>,
        rule: &JointRule<T>,
    ) -> Result<Statistic<T>> {
        self.check_statistic(sigma)?;
        let t = sigma.stage;
        if t + 1 >= self.model.horizon() {
            return Err(Error::StageOutOfRange {
                stage: t + 1,
                horizon: self.model.horizon(),
            });
        }
        self.check_rule(rule, t)?;
        let m = self.model;
        let (na1, na2) = (m.num_actions(Agent::One), m.num_actions(Agent::Two));
        let (no1, no2) = (
            m.num_observations(Agent::One),
            m.num_observations(Agent::Two),
        );
        let (s1, s2) = (m.aoh_space(Agent::One), m.aoh_space(Agent::Two));
        let n2 = m.aoh_count(Agent::Two, t);
        let (n1_next, n2_next) = (
            m.aoh_count(Agent::One, t + 1),
            m.aoh_count(Agent::Two, t + 1),
        );
        let mut next = vec![T::zero(); n1_next * n2_next];
        for (j, &p) in sigma.as_slice().iter().enumerate() {
            if p == T::zero() {
                continue;
            }
            let (i1, i2) = split_joint(j, n2);
            for a1 in 0..na1 {
                let d1 = rule.one.prob(i1, a1);
                if d1 == T::zero() {
                    continue;
                }
                for a2 in 0..na2 {
                    let d2 = rule.two.prob(i2, a2);
                    if d2 == T::zero() {
                        continue;
                    }
                    let w = p * d1 * d2;
                    for o1 in 0..no1 {
                        for o2 in 0..no2 {
                            let po = self.observation_prob(t, j, a1, a2, o1, o2);
                            if po == T::zero() {
                                continue;
                            }
                            let c =
                                joint_index(s1.child(i1, a1, o1), s2.child(i2, a2, o2), n2_next);
                            next[c] += po * w;
                        }
                    }
                }
            }
        }
        Ok(Statistic {
            stage: t + 1,
            dist: JointDist::from_raw(n1_next, n2_next, next),
        })
    }

    /// `σ_t = Pr(θ^t | b0, φ^t)`, by iterating the update rule from `σ_0`.
    pub fn statistic_from_pjp(&self, pjp: &PastJointPolicy<T>) -> Result<Statistic<T>> {
        if pjp.stage() >= self.model.horizon() {
            return Err(Error::StageOutOfRange {
                stage: pjp.stage(),
                horizon: self.model.horizon(),
            });
        }
        pjp.rules()
            .iter()
            .try_fold(Statistic::initial(), |sigma, rule| {
                self.update_statistic(&sigma, rule)
            })
    }

    /// `R(θ, δ) = Σ_a δ(a | θ) Σ_s Pr(s | θ, b0) R(s, a)`, with a flag that is
    /// `false` (and the value zero) for unreachable joint AOHs.
    pub fn immediate_reward(
        &self,
        stage: usize,
        joint: usize,
        rule: &JointRule<T>,
    ) -> Result<(T, bool)> {
        self.model.check_stage(stage)?;
        self.check_rule(rule, stage)?;
        if joint >= self.model.joint_aoh_count(stage) {
            return Err(Error::Shape(format!(
                "joint AOH {joint} out of range at stage {stage}"
            )));
        }
        if !self.is_reachable(stage, joint) {
            return Ok((T::zero(), false));
        }
        let n2 = self.model.aoh_count(Agent::Two, stage);
        let (i1, i2) = split_joint(joint, n2);
        Ok((
            self.rule_reward(stage, joint, i1, i2, &rule.one, &rule.two),
            true,
        ))
    }

    pub(crate) fn rule_reward(
        &self,
        stage: usize,
        joint: usize,
        i1: usize,
        i2: usize,
        one: &DecisionRule<T>,
        two: &DecisionRule<T>,
    ) -> T {
        let mut r = T::zero();
        for (a1, &d1) in one.row(i1).iter().enumerate() {
            if d1 == T::zero() {
                continue;
            }
            for (a2, &d2) in two.row(i2).iter().enumerate() {
                r += d1 * d2 * self.expected_reward(stage, joint, a1, a2);
            }
        }
        r
    }

    /// `Σ_θ σ(θ) R(θ, δ)`.
    pub fn expected_immediate_reward(
        &self,
        sigma: &Statistic<T>,
        rule: &JointRule<T>,
    ) -> Result<T> {
        self.check_statistic(sigma)?;
        self.check_rule(rule, sigma.stage)?;
        let n2 = self.model.aoh_count(Agent::Two, sigma.stage);
        Ok(sigma
            .as_slice()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p != T::zero())
            .map(|(j, &p)| {
                let (i1, i2) = split_joint(j, n2);
                p * self.rule_reward(sigma.stage, j, i1, i2, &rule.one, &rule.two)
            })
            .sum())
    }
}
