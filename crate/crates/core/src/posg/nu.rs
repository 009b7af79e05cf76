//! Best-response value vectors over the pivot agent's AOHs.
//!
//! The stage-`t+1` conditional for a child AOH `θi' = (θi, ai, oi)` is built
//! branchwise: `σ_c(θj' | θi') ∝ σ_c(θj | θi) π_j(aj | θj) Pr(oi, oj | θ, a)`.
//! The normalizer is `Pr(oi | θi, ai)`, so children with zero mass carry a
//! zero weight and get a uniform (flagged) conditional row.

use super::PlanTimeGame;
use crate::bg::{Conditional, ValueVector};
use crate::error::{Error, Result};
use crate::model::{joint_index, Agent, PartialPolicy};
use crate::scalar::Scalar;

impl<'m, T: Scalar> PlanTimeGame<'m, T> {
    /// `ν_t(θi) = opt_ai [ Σ_θj σ_c(θj|θi) Σ_aj π_j(aj|θj) R(θ, a)
    ///                     + Σ_oi Pr(oi | θi, ai) ν_{t+1}(θi, ai, oi) ]`,
    /// with `opt = max` for pivot one and `min` for pivot two. Ties go to the
    /// lowest action index.
    pub fn nu_vector(
        &self,
        stage: usize,
        conditional: &Conditional<T>,
        opponent: &PartialPolicy<T>,
    ) -> Result<ValueVector<T>> {
        self.model.check_stage(stage)?;
        let pivot = conditional.pivot();
        let opp = pivot.other();
        if opponent.agent() != opp || opponent.start() != stage {
            return Err(Error::Shape(format!(
                "ν-vector for pivot {} at stage {stage} needs an agent-{} partial policy from stage {stage}",
                pivot.number(),
                opp.number()
            )));
        }
        opponent.check_domain(self.model)?;
        let want = (
            self.model.aoh_count(pivot, stage),
            self.model.aoh_count(opp, stage),
        );
        if (conditional.num_pivot(), conditional.num_opponent()) != want {
            return Err(Error::Shape(format!(
                "conditional at stage {stage} is {}x{}, expected {}x{}",
                conditional.num_pivot(),
                conditional.num_opponent(),
                want.0,
                want.1
            )));
        }
        let values = self.nu_rec(stage, conditional, opponent);
        Ok(ValueVector {
            pivot,
            stage: Some(stage),
            values,
            provenance: format!(
                "nu-vector(pivot {}, stage {stage}, fixed opponent partial policy)",
                pivot.number()
            ),
        })
    }

    fn nu_rec(&self, t: usize, cond: &Conditional<T>, opponent: &PartialPolicy<T>) -> Vec<T> {
        let m = self.model;
        let pivot = cond.pivot();
        let opp = pivot.other();
        let (np, nj) = (cond.num_pivot(), cond.num_opponent());
        let (nap, naj) = (m.num_actions(pivot), m.num_actions(opp));
        let (nop, noj) = (m.num_observations(pivot), m.num_observations(opp));
        let n2 = m.aoh_count(Agent::Two, t);
        let joint = |ip: usize, ij: usize| match pivot {
            Agent::One => ip * n2 + ij,
            Agent::Two => ij * n2 + ip,
        };
        let ordered = |ap: usize, aj: usize| match pivot {
            Agent::One => (ap, aj),
            Agent::Two => (aj, ap),
        };
        let rule = opponent.rule(t);
        let last = t + 1 == m.horizon();

        // Immediate term q[ip][ap].
        let mut q = vec![T::zero(); np * nap];
        for ip in 0..np {
            for ap in 0..nap {
                let mut acc = T::zero();
                for ij in 0..nj {
                    let c = cond.get(ip, ij);
                    if c == T::zero() {
                        continue;
                    }
                    let j = joint(ip, ij);
                    let mut inner = T::zero();
                    for aj in 0..naj {
                        let d = rule.prob(ij, aj);
                        if d == T::zero() {
                            continue;
                        }
                        let (a1, a2) = ordered(ap, aj);
                        inner += d * self.expected_reward(t, j, a1, a2);
                    }
                    acc += c * inner;
                }
                q[ip * nap + ap] = acc;
            }
        }

        if !last {
            let (sp, sj) = (m.aoh_space(pivot), m.aoh_space(opp));
            let (np_next, nj_next) = (m.aoh_count(pivot, t + 1), m.aoh_count(opp, t + 1));
            let mut rows = vec![T::zero(); np_next * nj_next];
            let mut mass = vec![T::zero(); np_next];
            for ip in 0..np {
                for ij in 0..nj {
                    let c = cond.get(ip, ij);
                    if c == T::zero() {
                        continue;
                    }
                    let j = joint(ip, ij);
                    for aj in 0..naj {
                        let d = rule.prob(ij, aj);
                        if d == T::zero() {
                            continue;
                        }
                        for ap in 0..nap {
                            let (a1, a2) = ordered(ap, aj);
                            for op in 0..nop {
                                let child_p = sp.child(ip, ap, op);
                                for oj in 0..noj {
                                    let (o1, o2) = ordered(op, oj);
                                    let po = self.observation_prob(t, j, a1, a2, o1, o2);
                                    if po == T::zero() {
                                        continue;
                                    }
                                    let w = c * d * po;
                                    rows[joint_index(child_p, sj.child(ij, aj, oj), nj_next)] += w;
                                    mass[child_p] += w;
                                }
                            }
                        }
                    }
                }
            }
            let uniform = T::one() / T::lit(nj_next as f64);
            let mut unconstrained = vec![false; np_next];
            for (k, &w) in mass.iter().enumerate() {
                let row = &mut rows[k * nj_next..(k + 1) * nj_next];
                if w > T::zero() {
                    row.iter_mut().for_each(|x| *x /= w);
                } else {
                    row.iter_mut().for_each(|x| *x = uniform);
                    unconstrained[k] = true;
                }
            }
            let next_cond = Conditional::from_parts(pivot, nj_next, rows, unconstrained);
            let next = self.nu_rec(t + 1, &next_cond, opponent);
            for ip in 0..np {
                for ap in 0..nap {
                    let mut fut = T::zero();
                    for op in 0..nop {
                        let child = sp.child(ip, ap, op);
                        if mass[child] != T::zero() {
                            fut += mass[child] * next[child];
                        }
                    }
                    q[ip * nap + ap] += fut;
                }
            }
        }

        (0..np)
            .map(|ip| {
                let row = &q[ip * nap..(ip + 1) * nap];
                row[1..].iter().fold(row[0], |best, &x| match pivot {
                    Agent::One if x > best => x,
                    Agent::Two if x < best => x,
                    _ => best,
                })
            })
            .collect()
    }
}
