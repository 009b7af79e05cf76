//! Plan-time non-observable stochastic game: augmented states are joint AOHs,
//! actions are joint decision rules, and the only observation is `NULL`.
//!
//! The action space is a continuum, so transitions and rewards are exposed as
//! functions of a rule argument rather than tables.

use std::io::Write;

use crate::checks::{CheckReport, Verdict};
use crate::error::{Error, Result};
use crate::model::{enumerate_aohs, joint_index, split_joint, Agent, JointRule, PosgModel};
use crate::posg::{Caps, PlanTimeGame};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct NosgModel<'m, T> {
    game: PlanTimeGame<'m, T>,
    counts: Vec<usize>,
}

pub fn build_nosg<T: Scalar>(model: &PosgModel<T>, caps: Caps) -> Result<NosgModel<'_, T>> {
    let counts: Vec<usize> = (0..model.horizon())
        .map(|t| model.joint_aoh_count(t))
        .collect();
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    if total > caps.histories {
        return Err(Error::TooLarge {
            what: "augmented states".into(),
            size: total,
            cap: caps.histories,
        });
    }
    Ok(NosgModel {
        game: PlanTimeGame::with_caps(model, caps),
        counts,
    })
}

impl<'m, T: Scalar> NosgModel<'m, T> {
    pub fn source(&self) -> &'m PosgModel<T> {
        self.game.model()
    }

    pub fn horizon(&self) -> usize {
        self.counts.len()
    }

    /// Number of augmented states at `stage`.
    pub fn num_states(&self, stage: usize) -> usize {
        self.counts[stage]
    }

    /// Point mass on the empty joint AOH.
    pub fn initial_belief(&self) -> Vec<T> {
        vec![T::one()]
    }

    fn check_state(&self, stage: usize, s_dot: usize) -> Result<()> {
        self.source().check_stage(stage)?;
        if s_dot >= self.counts[stage] {
            return Err(Error::Shape(format!(
                "augmented state {s_dot} out of range at stage {stage} ({} states)",
                self.counts[stage]
            )));
        }
        Ok(())
    }

    /// `Ṫ(θ' | θ, δ) = Pr(o | θ, a) δ(a | θ)` over stage-`t+1` augmented states.
    /// Unreachable augmented states have no successors.
    pub fn transition(&self, stage: usize, s_dot: usize, rule: &JointRule<T>) -> Result<Vec<T>> {
        self.check_state(stage, s_dot)?;
        if stage + 1 >= self.horizon() {
            return Err(Error::StageOutOfRange {
                stage: stage + 1,
                horizon: self.horizon(),
            });
        }
        if rule.stage() != stage {
            return Err(Error::Shape(format!(
                "joint rule for stage {} used at stage {stage}",
                rule.stage()
            )));
        }
        rule.check_domain(self.source())?;
        Ok(self.successors(stage, s_dot, rule))
    }

    fn successors(&self, stage: usize, s_dot: usize, rule: &JointRule<T>) -> Vec<T> {
        let m = self.source();
        let (sp1, sp2) = (m.aoh_space(Agent::One), m.aoh_space(Agent::Two));
        let n2 = m.aoh_count(Agent::Two, stage);
        let n2_next = m.aoh_count(Agent::Two, stage + 1);
        let (i1, i2) = split_joint(s_dot, n2);
        let mut out = vec![T::zero(); self.counts[stage + 1]];
        for a1 in 0..m.num_actions(Agent::One) {
            for a2 in 0..m.num_actions(Agent::Two) {
                let d = rule.one.prob(i1, a1) * rule.two.prob(i2, a2);
                if d == T::zero() {
                    continue;
                }
                for o1 in 0..m.num_observations(Agent::One) {
                    for o2 in 0..m.num_observations(Agent::Two) {
                        let p = self.game.observation_prob(stage, s_dot, a1, a2, o1, o2);
                        out[joint_index(sp1.child(i1, a1, o1), sp2.child(i2, a2, o2), n2_next)] +=
                            d * p;
                    }
                }
            }
        }
        out
    }

    /// `Ṙ(θ, δ)`: the expected immediate reward of the source game.
    pub fn reward(&self, stage: usize, s_dot: usize, rule: &JointRule<T>) -> Result<T> {
        self.check_state(stage, s_dot)?;
        Ok(self.game.immediate_reward(stage, s_dot, rule)?.0)
    }

    /// Prediction step under the `NULL` observation: `b'(θ') = Σ_θ b(θ) Ṫ(θ' | θ, δ)`.
    pub fn belief_update(&self, stage: usize, belief: &[T], rule: &JointRule<T>) -> Result<Vec<T>> {
        self.source().check_stage(stage)?;
        if belief.len() != self.counts[stage] {
            return Err(Error::Shape(format!(
                "belief has {} entries, stage {stage} has {} augmented states",
                belief.len(),
                self.counts[stage]
            )));
        }
        let mut next = vec![T::zero(); self.counts.get(stage + 1).copied().unwrap_or(0)];
        for (s_dot, &b) in belief.iter().enumerate() {
            if b == T::zero() {
                continue;
            }
            for (dst, p) in next.iter_mut().zip(self.transition(stage, s_dot, rule)?) {
                *dst += b * p;
            }
        }
        Ok(next)
    }

    /// `Σ_t Σ_θ b_t(θ) Ṙ(θ, δ_t)` for a full sequence `δ^0 .. δ^{h-1}`.
    pub fn evaluate(&self, rules: &[JointRule<T>]) -> Result<T> {
        if rules.len() != self.horizon() {
            return Err(Error::Shape(format!(
                "rule sequence has {} stages, the horizon is {}",
                rules.len(),
                self.horizon()
            )));
        }
        let mut belief = self.initial_belief();
        let mut total = T::zero();
        for (t, rule) in rules.iter().enumerate() {
            for (s_dot, &b) in belief.iter().enumerate() {
                if b != T::zero() {
                    total += b * self.reward(t, s_dot, rule)?;
                }
            }
            if t + 1 < self.horizon() {
                belief = self.belief_update(t, &belief, rule)?;
            }
        }
        Ok(total)
    }

    /// Structural facts: one shared `NULL` observation emitted with
    /// probability one, finite per-stage augmented-state counts matching the
    /// AOH products, and successor distributions summing to one from every
    /// reachable augmented state (under uniform rules).
    pub fn check_sosg_property(&self) -> CheckReport {
        let m = self.source();
        let mut items = Vec::new();
        let mut notes = vec![
            "observation set {NULL}, |O| = 1, emitted with probability 1 to both agents"
                .to_string(),
        ];
        for t in 0..self.horizon() {
            let expected = m.aoh_count(Agent::One, t) * m.aoh_count(Agent::Two, t);
            items.push((
                if expected == self.counts[t] { 0.0 } else { 1.0 },
                0.0,
                format!(
                    "stage {t} augmented-state count {} != {expected}",
                    self.counts[t]
                ),
            ));
            notes.push(format!("stage {t}: {} augmented states", self.counts[t]));
            if t + 1 < self.horizon() {
                let rule = JointRule::uniform(m, t);
                for s_dot in 0..self.counts[t] {
                    if !self.game.is_reachable(t, s_dot) {
                        continue;
                    }
                    let total: T = self.successors(t, s_dot, &rule).into_iter().sum();
                    items.push((
                        (total - T::one()).abs().as_f64(),
                        1e-9,
                        format!("stage {t} augmented state {s_dot} successor mass"),
                    ));
                }
            }
        }
        notes.push(format!(
            "actions: joint decision rules, products of per-AOH simplices (closed and bounded); horizon {}",
            self.horizon()
        ));
        notes.push("mutual observation of actions is an equilibrium-knowledge argument, not checked at runtime".into());
        let mut report = CheckReport::from_violations("sosg_property", items);
        report.notes = notes;
        debug_assert!(report.verdict != Verdict::Inconclusive);
        report
    }

    /// CSV with columns `stage,index,aoh_label_1,aoh_label_2`.
    pub fn write_state_map<W: Write>(&self, out: W) -> Result<()> {
        let m = self.source();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["stage", "index", "aoh_label_1", "aoh_label_2"])?;
        for t in 0..self.horizon() {
            let l1 = enumerate_aohs(m, Agent::One, t)?;
            let l2 = enumerate_aohs(m, Agent::Two, t)?;
            for (i1, a1) in l1.iter().enumerate() {
                for (i2, a2) in l2.iter().enumerate() {
                    w.write_record([
                        t.to_string(),
                        joint_index(i1, i2, l2.len()).to_string(),
                        a1.label(m),
                        a2.label(m),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}
