//! One-shot layer: Bayesian-game values, the maxmin LP, marginal/conditional
//! decomposition of type distributions, and best-response value vectors.

use crate::error::{Error, Result};
use crate::model::{Agent, BayesianGame, BgFamily, DecisionRule, JointDist};
use crate::oracle::lp;
use crate::scalar::{dot, Scalar};

/// Opponent-given-pivot conditional `σ_c,i(θ_j | θ_i)`, one row per pivot
/// type. Rows whose pivot type has zero marginal are uniform and flagged.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditional<T> {
    pivot: Agent,
    num_opponent: usize,
    rows: Vec<T>,
    unconstrained: Vec<bool>,
}

impl<T: Scalar> Conditional<T> {
    /// Validates every row as a distribution.
    pub fn new(pivot: Agent, rows: Vec<Vec<T>>) -> Result<Self> {
        let num_opponent = rows.first().map_or(0, Vec::len);
        if num_opponent == 0 || rows.iter().any(|r| r.len() != num_opponent) {
            return Err(Error::Shape(
                "conditional rows must be non-empty and rectangular".into(),
            ));
        }
        for (i, r) in rows.iter().enumerate() {
            crate::model::validate_distribution(r, &format!("conditional[{i}]"))?;
        }
        Ok(Self {
            pivot,
            num_opponent,
            unconstrained: vec![false; rows.len()],
            rows: rows.concat(),
        })
    }

    pub fn pivot(&self) -> Agent {
        self.pivot
    }

    pub fn num_pivot(&self) -> usize {
        self.unconstrained.len()
    }

    pub fn num_opponent(&self) -> usize {
        self.num_opponent
    }

    #[inline]
    pub fn get(&self, pivot_type: usize, opponent_type: usize) -> T {
        self.rows[pivot_type * self.num_opponent + opponent_type]
    }

    pub fn row(&self, pivot_type: usize) -> &[T] {
        &self.rows[pivot_type * self.num_opponent..(pivot_type + 1) * self.num_opponent]
    }

    pub fn is_unconstrained(&self, pivot_type: usize) -> bool {
        self.unconstrained[pivot_type]
    }

    pub(crate) fn from_parts(
        pivot: Agent,
        num_opponent: usize,
        rows: Vec<T>,
        unconstrained: Vec<bool>,
    ) -> Self {
        Self {
            pivot,
            num_opponent,
            rows,
            unconstrained,
        }
    }
}

/// `σ = σ_m,i · σ_c,i` for a pivot agent `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalConditional<T> {
    pub marginal: Vec<T>,
    pub conditional: Conditional<T>,
}

impl<T: Scalar> MarginalConditional<T> {
    pub fn pivot(&self) -> Agent {
        self.conditional.pivot
    }
}

/// Splits `σ` into the pivot agent's marginal and the opponent conditional.
pub fn decompose<T: Scalar>(sigma: &JointDist<T>, pivot: Agent) -> MarginalConditional<T> {
    let oriented = match pivot {
        Agent::One => sigma.clone(),
        Agent::Two => sigma.transposed(),
    };
    let (np, no) = oriented.dims();
    let mut marginal = Vec::with_capacity(np);
    let mut rows = Vec::with_capacity(np * no);
    let mut unconstrained = Vec::with_capacity(np);
    let uniform = T::one() / T::lit(no as f64);
    for i in 0..np {
        let row = &oriented.as_slice()[i * no..(i + 1) * no];
        let m: T = row.iter().copied().sum();
        marginal.push(m);
        if m > T::zero() {
            rows.extend(row.iter().map(|&x| x / m));
            unconstrained.push(false);
        } else {
            rows.extend(std::iter::repeat_n(uniform, no));
            unconstrained.push(true);
        }
    }
    MarginalConditional {
        marginal,
        conditional: Conditional::from_parts(pivot, no, rows, unconstrained),
    }
}

/// `σ(θ) = σ_m,i(θ_i) σ_c,i(θ_j | θ_i)`, returned agent-one-major.
pub fn recompose<T: Scalar>(mc: &MarginalConditional<T>) -> JointDist<T> {
    let c = &mc.conditional;
    let (np, no) = (c.num_pivot(), c.num_opponent());
    let probs = (0..np)
        .flat_map(|i| (0..no).map(move |j| mc.marginal[i] * c.get(i, j)))
        .collect();
    let oriented = JointDist::from_raw(np, no, probs);
    match c.pivot {
        Agent::One => oriented,
        Agent::Two => oriented.transposed(),
    }
}

/// Real vector indexed by the pivot agent's types or AOHs.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueVector<T> {
    pub pivot: Agent,
    /// `None` in the one-shot layer.
    pub stage: Option<usize>,
    pub values: Vec<T>,
    pub provenance: String,
}

impl<T: Scalar> ValueVector<T> {
    /// Inner product with a pivot-agent marginal.
    pub fn dot(&self, marginal: &[T]) -> T {
        dot(&self.values, marginal)
    }
}

fn check_rule<T: Scalar>(family: &BgFamily<T>, rule: &DecisionRule<T>, agent: Agent) -> Result<()> {
    if rule.num_rows() != family.num_types(agent) || rule.num_actions() != family.num_actions(agent)
    {
        return Err(Error::Shape(format!(
            "rule for agent {} is {}x{}, game needs {}x{}",
            agent.number(),
            rule.num_rows(),
            rule.num_actions(),
            family.num_types(agent),
            family.num_actions(agent)
        )));
    }
    Ok(())
}

/// `Q_BG(δ) = Σ_θ σ(θ) Σ_a δ1(a1|θ1) δ2(a2|θ2) R(θ, a)`.
pub fn q_bg<T: Scalar>(
    game: &BayesianGame<T>,
    rule1: &DecisionRule<T>,
    rule2: &DecisionRule<T>,
) -> Result<T> {
    let f = &game.family;
    check_rule(f, rule1, Agent::One)?;
    check_rule(f, rule2, Agent::Two)?;
    let mut total = T::zero();
    for t1 in 0..f.num_types(Agent::One) {
        for t2 in 0..f.num_types(Agent::Two) {
            let p = game.sigma.get(t1, t2);
            if p == T::zero() {
                continue;
            }
            let mut inner = T::zero();
            for a1 in 0..f.num_actions(Agent::One) {
                let d1 = rule1.prob(t1, a1);
                if d1 == T::zero() {
                    continue;
                }
                for a2 in 0..f.num_actions(Agent::Two) {
                    inner += d1 * rule2.prob(t2, a2) * f.reward(t1, t2, a1, a2);
                }
            }
            total += p * inner;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone)]
pub struct BgSolution<T> {
    pub value: T,
    pub maxmin: T,
    pub minmax: T,
    pub rule1: DecisionRule<T>,
    pub rule2: DecisionRule<T>,
}

/// Maxmin LP over agent one's behavioral rule, one free value `u(θ2)` per
/// opponent type:
///
/// ```text
/// max Σ_θ2 u(θ2)
///  s.t. u(θ2) <= Σ_{θ1,a1} σ(θ1,θ2) δ1(a1|θ1) R(θ1,θ2,a1,a2)   for all (θ2, a2)
///       Σ_a1 δ1(a1|θ1) = 1                                     for all θ1
/// ```
///
/// Rewards are shifted to be at least one, which makes `u >= 0` harmless
/// and lets the simplex rows relax to `<= 1` (rows renormalized afterwards).
fn maxmin_lp<T: Scalar>(
    family: &BgFamily<T>,
    sigma: &JointDist<T>,
) -> Result<(T, DecisionRule<T>)> {
    let (nt1, nt2) = (family.num_types(Agent::One), family.num_types(Agent::Two));
    let (na1, na2) = (
        family.num_actions(Agent::One),
        family.num_actions(Agent::Two),
    );
    let lowest = (0..nt1)
        .flat_map(|t1| {
            (0..nt2).flat_map(move |t2| {
                (0..na1).flat_map(move |a1| (0..na2).map(move |a2| (t1, t2, a1, a2)))
            })
        })
        .map(|(t1, t2, a1, a2)| family.reward(t1, t2, a1, a2))
        .fold(T::infinity(), T::min);
    let shift = T::one() - lowest;
    let nx = nt1 * na1;
    let nvars = nx + nt2;
    let mut a = Vec::with_capacity(nt2 * na2 + nt1);
    let mut b = Vec::with_capacity(nt2 * na2 + nt1);
    for t2 in 0..nt2 {
        for a2 in 0..na2 {
            let mut row = vec![T::zero(); nvars];
            for t1 in 0..nt1 {
                let p = sigma.get(t1, t2);
                for a1 in 0..na1 {
                    row[t1 * na1 + a1] = -(p * (family.reward(t1, t2, a1, a2) + shift));
                }
            }
            row[nx + t2] = T::one();
            a.push(row);
            b.push(T::zero());
        }
    }
    for t1 in 0..nt1 {
        let mut row = vec![T::zero(); nvars];
        for a1 in 0..na1 {
            row[t1 * na1 + a1] = T::one();
        }
        a.push(row);
        b.push(T::one());
    }
    let mut c = vec![T::zero(); nvars];
    for x in c.iter_mut().skip(nx) {
        *x = T::one();
    }
    let sol = lp::maximize(&c, &a, &b, lp::DEFAULT_PIVOT_CAP)
        .map_err(|e| Error::Lp(format!("Bayesian-game maxmin LP: {e}")))?;
    let total_mass: T = sigma.as_slice().iter().copied().sum();
    let value = sol.objective - shift * total_mass;
    let mut rows = Vec::with_capacity(nt1);
    for t1 in 0..nt1 {
        let raw: Vec<T> = sol.primal[t1 * na1..(t1 + 1) * na1]
            .iter()
            .map(|&x| x.max(T::zero()))
            .collect();
        let s: T = raw.iter().copied().sum();
        rows.push(if s > T::lit(T::PIVOT_TOL) {
            raw.into_iter().map(|x| x / s).collect()
        } else {
            vec![T::one() / T::lit(na1 as f64); na1]
        });
    }
    Ok((
        value,
        DecisionRule::from_raw(Agent::One, 0, na1, rows.concat()),
    ))
}

/// Value and a rational rule pair. Both LP orientations are solved: the
/// max-min one for agent one's rule and the mirrored game for agent two's.
pub fn solve_bg<T: Scalar>(game: &BayesianGame<T>) -> Result<BgSolution<T>> {
    let (maxmin, rule1) = maxmin_lp(&game.family, &game.sigma)?;
    let (neg_minmax, mirrored_rule) = maxmin_lp(&game.family.mirrored(), &game.sigma.transposed())?;
    let rule2 = DecisionRule::from_raw(
        Agent::Two,
        0,
        mirrored_rule.num_actions(),
        mirrored_rule.rows().flatten().copied().collect(),
    );
    Ok(BgSolution {
        value: maxmin,
        maxmin,
        minmax: -neg_minmax,
        rule1,
        rule2,
    })
}

/// `V*_F(σ)`: the value of the family member `F(σ)`.
pub fn family_value<T: Scalar>(family: &BgFamily<T>, sigma: &JointDist<T>) -> Result<T> {
    family.check_sigma(sigma)?;
    let (v, _) = maxmin_lp(family, sigma)?;
    Ok(v)
}

/// Best-response value vector for the pivot against a fixed opponent rule.
///
/// Pivot one: `r(θ1) = max_a1 Σ_θ2 σ_c(θ2|θ1) Σ_a2 δ2(a2|θ2) R(θ,a)`.
/// Pivot two takes the minimum over `a2` instead. Ties go to the lowest
/// action index.
pub fn r_vector<T: Scalar>(
    family: &BgFamily<T>,
    conditional: &Conditional<T>,
    opponent_rule: &DecisionRule<T>,
) -> Result<ValueVector<T>> {
    let pivot = conditional.pivot();
    let opp = pivot.other();
    check_rule(family, opponent_rule, opp)?;
    if conditional.num_pivot() != family.num_types(pivot)
        || conditional.num_opponent() != family.num_types(opp)
    {
        return Err(Error::Shape(
            "conditional does not match the family's type sets".into(),
        ));
    }
    let values = (0..family.num_types(pivot))
        .map(|ti| {
            let mut best: Option<T> = None;
            for ai in 0..family.num_actions(pivot) {
                let mut q = T::zero();
                for tj in 0..family.num_types(opp) {
                    let c = conditional.get(ti, tj);
                    if c == T::zero() {
                        continue;
                    }
                    let mut inner = T::zero();
                    for aj in 0..family.num_actions(opp) {
                        let d = opponent_rule.prob(tj, aj);
                        if d == T::zero() {
                            continue;
                        }
                        let r = match pivot {
                            Agent::One => family.reward(ti, tj, ai, aj),
                            Agent::Two => family.reward(tj, ti, aj, ai),
                        };
                        inner += d * r;
                    }
                    q += c * inner;
                }
                best = Some(match (best, pivot) {
                    (None, _) => q,
                    (Some(b), Agent::One) => {
                        if q > b {
                            q
                        } else {
                            b
                        }
                    }
                    (Some(b), Agent::Two) => {
                        if q < b {
                            q
                        } else {
                            b
                        }
                    }
                });
            }
            best.expect("at least one action")
        })
        .collect();
    Ok(ValueVector {
        pivot,
        stage: None,
        values,
        provenance: format!("r-vector(pivot {}, fixed opponent rule)", pivot.number()),
    })
}

/// `V^BR_i(σ, δ_j) = σ_m,i · r(σ_c,i, δ_j)`.
pub fn br_value_bg<T: Scalar>(
    family: &BgFamily<T>,
    sigma: &JointDist<T>,
    opponent_rule: &DecisionRule<T>,
    pivot: Agent,
) -> Result<T> {
    family.check_sigma(sigma)?;
    let mc = decompose(sigma, pivot);
    let r = r_vector(family, &mc.conditional, opponent_rule)?;
    Ok(r.dot(&mc.marginal))
}

/// Every pure decision rule of `agent` in the family, lowest index first.
pub fn pure_rules<T: Scalar>(family: &BgFamily<T>, agent: Agent) -> Vec<DecisionRule<T>> {
    let (nt, na) = (family.num_types(agent), family.num_actions(agent));
    let count = na.pow(nt as u32);
    (0..count)
        .map(|mut k| {
            let mut acts = vec![0; nt];
            for slot in acts.iter_mut().rev() {
                *slot = k % na;
                k /= na;
            }
            DecisionRule::degenerate(agent, 0, &acts, na)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Lcg64;
    use approx::assert_abs_diff_eq;

    fn pennies() -> BayesianGame<f64> {
        let fam = BgFamily::from_flat([1, 1], [2, 2], vec![1.0, -1.0, -1.0, 1.0]).unwrap();
        fam.with_sigma(JointDist::point_mass(1, 1, 0, 0)).unwrap()
    }

    fn random_game(rng: &mut Lcg64, nt: [usize; 2], na: [usize; 2]) -> BayesianGame<f64> {
        let n = nt[0] * nt[1] * na[0] * na[1];
        let fam =
            BgFamily::from_flat(nt, na, (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()).unwrap();
        let sigma = JointDist::new(nt[0], nt[1], rng.simplex(nt[0] * nt[1])).unwrap();
        fam.with_sigma(sigma).unwrap()
    }

    fn random_rule(rng: &mut Lcg64, agent: Agent, rows: usize, na: usize) -> DecisionRule<f64> {
        DecisionRule::new(agent, 0, (0..rows).map(|_| rng.simplex(na)).collect()).unwrap()
    }

    #[test]
    fn pennies_value_and_rules() {
        let g = pennies();
        let s = solve_bg(&g).unwrap();
        assert_abs_diff_eq!(s.value, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.rule1.prob(0, 0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.rule2.prob(0, 1), 0.5, epsilon = 1e-12);
        let u = DecisionRule::uniform(Agent::One, 0, 1, 2);
        let u2 = DecisionRule::uniform(Agent::Two, 0, 1, 2);
        assert_eq!(q_bg(&g, &u, &u2).unwrap(), 0.0);
    }

    #[test]
    fn constant_reward_game() {
        let fam = BgFamily::from_flat([2, 2], [2, 3], vec![0.75f64; 24]).unwrap();
        let g = fam
            .with_sigma(JointDist::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap())
            .unwrap();
        let s = solve_bg(&g).unwrap();
        assert_abs_diff_eq!(s.value, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(s.minmax, 0.75, epsilon = 1e-12);
        let c = decompose(&g.sigma, Agent::One).conditional;
        let r = r_vector(&fam, &c, &DecisionRule::uniform(Agent::Two, 0, 2, 3)).unwrap();
        assert!(r.values.iter().all(|v| (v - 0.75).abs() < 1e-15));
    }

    #[test]
    fn point_mass_degenerate_q_is_cell() {
        let mut rng = Lcg64::new(3);
        let g = random_game(&mut rng, [2, 3], [2, 2]);
        let g = g
            .family
            .with_sigma(JointDist::point_mass(2, 3, 1, 2))
            .unwrap();
        let d1 = DecisionRule::degenerate(Agent::One, 0, &[0, 1], 2);
        let d2 = DecisionRule::degenerate(Agent::Two, 0, &[0, 0, 1], 2);
        assert_eq!(q_bg(&g, &d1, &d2).unwrap(), g.family.reward(1, 2, 1, 1));
    }

    #[test]
    fn q_bg_matches_nested_loop_sum() {
        let mut rng = Lcg64::new(11);
        let g = random_game(&mut rng, [2, 2], [2, 2]);
        let d1 = random_rule(&mut rng, Agent::One, 2, 2);
        let d2 = random_rule(&mut rng, Agent::Two, 2, 2);
        let mut brute = 0.0;
        for t1 in 0..2 {
            for t2 in 0..2 {
                for a1 in 0..2 {
                    for a2 in 0..2 {
                        brute += g.sigma.get(t1, t2)
                            * d1.prob(t1, a1)
                            * d2.prob(t2, a2)
                            * g.family.reward(t1, t2, a1, a2);
                    }
                }
            }
        }
        assert_abs_diff_eq!(q_bg(&g, &d1, &d2).unwrap(), brute, epsilon = 1e-14);
    }

    #[test]
    fn decompose_product_and_point_mass() {
        let p = [0.25, 0.75];
        let q = [0.5, 0.3, 0.2];
        let mc = decompose(&JointDist::product(&p, &q), Agent::One);
        assert_eq!(mc.marginal, p.to_vec());
        for i in 0..2 {
            for j in 0..3 {
                assert_abs_diff_eq!(mc.conditional.get(i, j), q[j], epsilon = 1e-15);
            }
        }
        let pm = decompose(&JointDist::<f64>::point_mass(2, 3, 1, 0), Agent::One);
        assert_eq!(pm.marginal, vec![0.0, 1.0]);
        assert!(pm.conditional.is_unconstrained(0));
        assert!(!pm.conditional.is_unconstrained(1));
        assert_eq!(pm.conditional.row(1), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn recompose_inverts_decompose() {
        let mut rng = Lcg64::new(99);
        let sigma = JointDist::new(3, 3, rng.simplex::<f64>(9)).unwrap();
        for pivot in Agent::BOTH {
            let back = recompose(&decompose(&sigma, pivot));
            assert!(crate::scalar::max_abs_diff(back.as_slice(), sigma.as_slice()) <= 1e-12);
        }
    }

    #[test]
    fn r_vector_point_mass_is_column_max() {
        let mut rng = Lcg64::new(8);
        let g = random_game(&mut rng, [2, 2], [3, 2]);
        let c = Conditional::new(Agent::One, vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let d2 = DecisionRule::degenerate(Agent::Two, 0, &[0, 1], 2);
        let r = r_vector(&g.family, &c, &d2).unwrap();
        for t1 in 0..2 {
            let best = (0..3)
                .map(|a1| g.family.reward(t1, 1, a1, 1))
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(r.values[t1], best);
        }
    }

    #[test]
    fn br_value_matches_pure_rule_enumeration() {
        let mut rng = Lcg64::new(21);
        for _ in 0..5 {
            let g = random_game(&mut rng, [2, 2], [2, 3]);
            let d2 = random_rule(&mut rng, Agent::Two, 2, 3);
            let d1 = random_rule(&mut rng, Agent::One, 2, 2);
            let enum1 = pure_rules(&g.family, Agent::One)
                .iter()
                .map(|p| q_bg(&g, p, &d2).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            let enum2 = pure_rules(&g.family, Agent::Two)
                .iter()
                .map(|p| q_bg(&g, &d1, p).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(
                br_value_bg(&g.family, &g.sigma, &d2, Agent::One).unwrap(),
                enum1,
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(
                br_value_bg(&g.family, &g.sigma, &d1, Agent::Two).unwrap(),
                enum2,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn pennies_br_values() {
        let g = pennies();
        let u2 = DecisionRule::uniform(Agent::Two, 0, 1, 2);
        assert_eq!(
            br_value_bg(&g.family, &g.sigma, &u2, Agent::One).unwrap(),
            0.0
        );
        let heads = DecisionRule::degenerate(Agent::Two, 0, &[0], 2);
        assert_eq!(
            br_value_bg(&g.family, &g.sigma, &heads, Agent::One).unwrap(),
            1.0
        );
    }

    #[test]
    fn saddle_point_rules_are_mutual_best_responses() {
        let mut rng = Lcg64::new(4);
        for _ in 0..10 {
            let g = random_game(&mut rng, [3, 2], [3, 3]);
            let s = solve_bg(&g).unwrap();
            assert!((s.maxmin - s.minmax).abs() <= 1e-9);
            let br1 = br_value_bg(&g.family, &g.sigma, &s.rule2, Agent::One).unwrap();
            let br2 = br_value_bg(&g.family, &g.sigma, &s.rule1, Agent::Two).unwrap();
            assert!((br1 - s.value).abs() <= 1e-9, "{br1} vs {}", s.value);
            assert!((br2 - s.value).abs() <= 1e-9, "{br2} vs {}", s.value);
        }
    }
}
