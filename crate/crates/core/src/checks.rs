//! Property sweeps over the value structure, with line-oriented verdicts.
//!
//! A slice fixes the opponent conditional and moves the pivot marginal
//! along a segment. Best-response values must be affine along it, the
//! equilibrium value concave (pivot one) or convex (pivot two), and the
//! value must coincide with the lower (upper) envelope of the opponents'
//! linear forms.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;

use crate::bg::{
    br_value_bg, decompose, family_value, pure_rules, r_vector, recompose, solve_bg, Conditional,
    MarginalConditional, ValueVector,
};
use crate::error::{Error, Result};
use crate::model::{
    validate_distribution, Agent, BgFamily, DecisionRule, JointDist, JointRule, PartialPolicy,
    PastJointPolicy,
};
use crate::oracle::pure_policies;
use crate::posg::{PlanTimeGame, Statistic};
use crate::rng::Lcg64;
use crate::scalar::Scalar;

pub const LINEARITY_TOL: f64 = 1e-9;
pub const MIDPOINT_SLACK: f64 = 1e-7;
pub const ENVELOPE_TOL: f64 = 1e-6;
pub const SUFFICIENCY_TOL: f64 = 1e-9;
pub const COLLISION_TOL: f64 = 1e-12;
pub const EQUIVALENCE_TOL: f64 = 1e-9;
/// Minimum Q difference a sufficiency negative control must show.
pub const CONTROL_GAP: f64 = 1e-3;
/// Probability step of the rule grid used by the collision search.
pub const COLLISION_STEP: f64 = 0.25;
pub const COLLISION_CAP: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

/// Outcome of one check. A failing report always names an offending instance.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub instances: usize,
    pub max_violation: f64,
    pub verdict: Verdict,
    pub offending: Option<String>,
    pub notes: Vec<String>,
}

impl CheckReport {
    /// Builds a report from `(violation, tolerance, descriptor)` triples; the
    /// worst instance is the one exceeding its tolerance by the largest ratio,
    /// or the largest violation when none fails.
    pub fn from_violations(name: impl Into<String>, items: Vec<(f64, f64, String)>) -> Self {
        let instances = items.len();
        let max_violation = items.iter().map(|x| x.0).fold(0.0, f64::max);
        let worst = items
            .iter()
            .filter(|(v, tol, _)| v.is_nan() || v > tol)
            .max_by(|a, b| (a.0 / a.1).total_cmp(&(b.0 / b.1)));
        let verdict = if worst.is_some() {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        Self {
            name: name.into(),
            instances,
            max_violation,
            verdict,
            offending: worst.map(|w| w.2.clone()),
            notes: Vec::new(),
        }
    }

    pub fn inconclusive(name: impl Into<String>, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            instances: 0,
            max_violation: 0.0,
            verdict: Verdict::Inconclusive,
            offending: None,
            notes: vec![note.into()],
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    /// Wraps a check run on a planted violation: the control passes when the
    /// underlying check fails.
    pub fn control(raw: CheckReport) -> Self {
        let verdict = match raw.verdict {
            Verdict::Fail => Verdict::Pass,
            Verdict::Pass => Verdict::Fail,
            Verdict::Inconclusive => Verdict::Inconclusive,
        };
        let offending = match verdict {
            Verdict::Fail => Some(format!(
                "planted violation not detected ({} passed)",
                raw.name
            )),
            _ => None,
        };
        Self {
            name: format!("control.{}", raw.name),
            instances: raw.instances,
            max_violation: raw.max_violation,
            verdict,
            offending,
            notes: raw.notes,
        }
    }

    /// Report line followed by indented offending-instance and note lines.
    pub fn render(&self) -> String {
        let mut s = self.to_string();
        if let Some(o) = &self.offending {
            s.push_str(&format!("\n  offending: {o}"));
        }
        for n in &self.notes {
            s.push_str(&format!("\n  note: {n}"));
        }
        s
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "CHECK {} instances={} max_violation={:.11e} verdict={}",
            self.name, self.instances, self.max_violation, self.verdict
        )
    }
}

/// A segment in the pivot agent's marginal space with the conditional held fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSpec<T> {
    pub stage: usize,
    pub conditional: Conditional<T>,
    pub m0: Vec<T>,
    pub m1: Vec<T>,
    pub grid: usize,
}

impl<T: Scalar> SliceSpec<T> {
    pub fn new(
        stage: usize,
        conditional: Conditional<T>,
        m0: Vec<T>,
        m1: Vec<T>,
        grid: usize,
    ) -> Result<Self> {
        if grid < 3 {
            return Err(Error::Invariant(format!(
                "slice grid must have at least 3 points, got {grid}"
            )));
        }
        for (m, name) in [(&m0, "m0"), (&m1, "m1")] {
            if m.len() != conditional.num_pivot() {
                return Err(Error::Shape(format!(
                    "slice endpoint {name} has {} entries, the pivot has {} AOHs",
                    m.len(),
                    conditional.num_pivot()
                )));
            }
            validate_distribution(m, name)?;
        }
        Ok(Self {
            stage,
            conditional,
            m0,
            m1,
            grid,
        })
    }

    /// Random conditional (from a random joint distribution) and endpoints.
    pub fn random(
        rng: &mut Lcg64,
        stage: usize,
        pivot: Agent,
        dims: (usize, usize),
        grid: usize,
    ) -> Result<Self> {
        let sigma = JointDist::new(dims.0, dims.1, rng.simplex(dims.0 * dims.1))?;
        let conditional = decompose(&sigma, pivot).conditional;
        let np = conditional.num_pivot();
        let (m0, m1) = (rng.simplex(np), rng.simplex(np));
        Self::new(stage, conditional, m0, m1, grid)
    }

    pub fn pivot(&self) -> Agent {
        self.conditional.pivot()
    }

    pub fn lambda(&self, k: usize) -> T {
        T::lit(k as f64) / T::lit((self.grid - 1) as f64)
    }

    pub fn marginal(&self, k: usize) -> Vec<T> {
        let l = self.lambda(k);
        self.m0
            .iter()
            .zip(&self.m1)
            .map(|(&a, &b)| (T::one() - l) * a + l * b)
            .collect()
    }

    pub fn statistic(&self, k: usize) -> JointDist<T> {
        recompose(&MarginalConditional {
            marginal: self.marginal(k),
            conditional: self.conditional.clone(),
        })
    }

    pub fn describe(&self, k: usize) -> String {
        format!(
            "stage={} pivot={} lambda={:.6}",
            self.stage,
            self.pivot().number(),
            self.lambda(k).as_f64()
        )
    }
}

/// A fixed opponent: a one-shot rule or a partial policy.
#[derive(Debug, Clone, PartialEq)]
pub enum Opponent<T> {
    Rule(DecisionRule<T>),
    Partial(PartialPolicy<T>),
}

/// Value and one equilibrium opponent for each pivot.
#[derive(Debug, Clone)]
pub struct SolvedPoint<T> {
    pub value: T,
    /// `against[i]`: the equilibrium policy of the opponent of agent `i + 1`.
    pub against: [Opponent<T>; 2],
}

/// What a slice is taken of: a Bayesian-game family, or one stage of a POSG.
#[derive(Clone, Copy)]
pub enum Target<'a, 'm, T> {
    Family(&'a BgFamily<T>),
    Posg {
        game: &'a PlanTimeGame<'m, T>,
        stage: usize,
    },
}

impl<'a, 'm, T: Scalar> Target<'a, 'm, T> {
    pub fn stage(&self) -> usize {
        match self {
            Target::Family(_) => 0,
            Target::Posg { stage, .. } => *stage,
        }
    }

    /// Types (family) or stage AOHs (POSG) of `agent`.
    pub fn count(&self, agent: Agent) -> usize {
        match self {
            Target::Family(f) => f.num_types(agent),
            Target::Posg { game, stage } => game.model().aoh_count(agent, *stage),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.count(Agent::One), self.count(Agent::Two))
    }

    fn statistic(&self, sigma: &JointDist<T>) -> Result<Statistic<T>> {
        match self {
            Target::Family(_) => Err(Error::Shape("a family has no stage statistic".into())),
            Target::Posg { game, stage } => Statistic::new(game.model(), *stage, sigma.clone()),
        }
    }

    pub fn value(&self, sigma: &JointDist<T>) -> Result<T> {
        match self {
            Target::Family(f) => family_value(f, sigma),
            Target::Posg { game, .. } => game.v_star(&self.statistic(sigma)?),
        }
    }

    pub fn solve(&self, sigma: &JointDist<T>) -> Result<SolvedPoint<T>> {
        match self {
            Target::Family(f) => {
                let s = solve_bg(&f.with_sigma(sigma.clone())?)?;
                Ok(SolvedPoint {
                    value: s.value,
                    against: [Opponent::Rule(s.rule2), Opponent::Rule(s.rule1)],
                })
            }
            Target::Posg { game, .. } => {
                let sigma = self.statistic(sigma)?;
                let sol = game.solve_subgame(&sigma)?;
                let rp = game.behavioral_from_solution(&sol)?;
                Ok(SolvedPoint {
                    value: sol.value,
                    against: [Opponent::Partial(rp.two), Opponent::Partial(rp.one)],
                })
            }
        }
    }

    pub fn br_value(
        &self,
        sigma: &JointDist<T>,
        opponent: &Opponent<T>,
        pivot: Agent,
    ) -> Result<T> {
        match (self, opponent) {
            (Target::Family(f), Opponent::Rule(r)) => br_value_bg(f, sigma, r, pivot),
            (Target::Posg { game, .. }, Opponent::Partial(p)) => {
                game.br_value_posg(&self.statistic(sigma)?, p, pivot)
            }
            _ => Err(Error::Shape(
                "opponent kind does not match the slice target".into(),
            )),
        }
    }

    /// `r`-vector (family) or `ν`-vector (POSG) for a fixed conditional.
    pub fn linear_form(
        &self,
        conditional: &Conditional<T>,
        opponent: &Opponent<T>,
    ) -> Result<ValueVector<T>> {
        match (self, opponent) {
            (Target::Family(f), Opponent::Rule(r)) => r_vector(f, conditional, r),
            (Target::Posg { game, stage }, Opponent::Partial(p)) => {
                game.nu_vector(*stage, conditional, p)
            }
            _ => Err(Error::Shape(
                "opponent kind does not match the slice target".into(),
            )),
        }
    }

    /// Every pure policy of `agent`.
    pub fn pure_opponents(&self, agent: Agent) -> Result<Vec<Opponent<T>>> {
        match self {
            Target::Family(f) => Ok(pure_rules(f, agent)
                .into_iter()
                .map(Opponent::Rule)
                .collect()),
            Target::Posg { game, stage } => {
                Ok(pure_policies(game, agent, *stage, game.caps().policies)?
                    .into_iter()
                    .map(Opponent::Partial)
                    .collect())
            }
        }
    }

    pub fn random_opponent(&self, rng: &mut Lcg64, agent: Agent) -> Opponent<T> {
        match self {
            Target::Family(f) => {
                let rows = (0..f.num_types(agent))
                    .map(|_| rng.simplex(f.num_actions(agent)))
                    .collect();
                Opponent::Rule(DecisionRule::new(agent, 0, rows).expect("simplex rows"))
            }
            Target::Posg { game, stage } => {
                let m = game.model();
                let rules = (*stage..m.horizon())
                    .map(|k| {
                        let rows = (0..m.aoh_count(agent, k))
                            .map(|_| rng.simplex(m.num_actions(agent)))
                            .collect();
                        DecisionRule::new(agent, k, rows).expect("simplex rows")
                    })
                    .collect();
                Opponent::Partial(
                    PartialPolicy::new(agent, *stage, rules).expect("contiguous stages"),
                )
            }
        }
    }

    pub fn random_slice(&self, rng: &mut Lcg64, pivot: Agent, grid: usize) -> Result<SliceSpec<T>> {
        SliceSpec::random(rng, self.stage(), pivot, self.dims(), grid)
    }
}

fn check_slice_target<T: Scalar>(target: &Target<'_, '_, T>, slice: &SliceSpec<T>) -> Result<()> {
    let pivot = slice.pivot();
    if slice.stage != target.stage()
        || slice.conditional.num_pivot() != target.count(pivot)
        || slice.conditional.num_opponent() != target.count(pivot.other())
    {
        return Err(Error::Shape(
            "slice does not match the target's stage or AOH sets".into(),
        ));
    }
    Ok(())
}

fn grid_values<T: Scalar>(
    slice: &SliceSpec<T>,
    f: impl Fn(&JointDist<T>) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    (0..slice.grid)
        .into_par_iter()
        .map(|k| f(&slice.statistic(k)))
        .collect()
}

fn chord_items<T: Scalar>(
    slice: &SliceSpec<T>,
    values: &[T],
    what: &str,
) -> Vec<(f64, f64, String)> {
    let n = values.len();
    let (f0, f1) = (values[0].as_f64(), values[n - 1].as_f64());
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let l = slice.lambda(k).as_f64();
            let chord = (1.0 - l) * f0 + l * f1;
            (
                (v.as_f64() - chord).abs(),
                LINEARITY_TOL,
                format!("{} {what} deviates from the chord", slice.describe(k)),
            )
        })
        .collect()
}

/// Best-response value along the slice is affine, and equals the marginal's
/// inner product with the linear form of the opponent.
pub fn check_br_linearity<T: Scalar>(
    target: &Target<'_, '_, T>,
    slice: &SliceSpec<T>,
    opponent: &Opponent<T>,
) -> Result<CheckReport> {
    check_slice_target(target, slice)?;
    let pivot = slice.pivot();
    let values = grid_values(slice, |s| target.br_value(s, opponent, pivot))?;
    let form = target.linear_form(&slice.conditional, opponent)?;
    let mut items = chord_items(slice, &values, "br value");
    for (k, v) in values.iter().enumerate() {
        items.push((
            (v.as_f64() - form.dot(&slice.marginal(k)).as_f64()).abs(),
            LINEARITY_TOL,
            format!(
                "{} br value differs from the linear-form inner product",
                slice.describe(k)
            ),
        ));
    }
    Ok(CheckReport::from_violations("br_linearity", items))
}

/// The linearity sweep with the equilibrium value substituted for the
/// best-response value. Fails whenever the slice crosses a kink.
pub fn check_linearity_of_value<T: Scalar>(
    target: &Target<'_, '_, T>,
    slice: &SliceSpec<T>,
) -> Result<CheckReport> {
    check_slice_target(target, slice)?;
    let values = grid_values(slice, |s| target.value(s))?;
    Ok(
        CheckReport::from_violations("br_linearity", chord_items(slice, &values, "value"))
            .with_note("equilibrium value substituted for the best-response value"),
    )
}

fn midpoint_items<T: Scalar>(
    slice: &SliceSpec<T>,
    values: &[T],
    pivot: Agent,
) -> Vec<(f64, f64, String)> {
    values
        .windows(3)
        .enumerate()
        .map(|(k, w)| {
            let (a, m, b) = (w[0].as_f64(), w[1].as_f64(), w[2].as_f64());
            let avg = 0.5 * (a + b);
            let excess = match pivot {
                Agent::One => avg - m,
                Agent::Two => m - avg,
            };
            let shape = if pivot == Agent::One {
                "concavity"
            } else {
                "convexity"
            };
            (
                excess.max(0.0),
                MIDPOINT_SLACK,
                format!("{} midpoint {shape}", slice.describe(k + 1)),
            )
        })
        .collect()
}

/// Midpoint concavity (pivot one) or convexity (pivot two) of the value along
/// the slice, plus the envelope identity: every opponent's linear form bounds
/// the value from the right side, and the equilibrium opponent's form attains it.
pub fn check_concavity_convexity<T: Scalar>(
    target: &Target<'_, '_, T>,
    slice: &SliceSpec<T>,
) -> Result<CheckReport> {
    check_slice_target(target, slice)?;
    let pivot = slice.pivot();
    let points: Vec<SolvedPoint<T>> = (0..slice.grid)
        .into_par_iter()
        .map(|k| target.solve(&slice.statistic(k)))
        .collect::<Result<_>>()?;
    let values: Vec<T> = points.iter().map(|p| p.value).collect();
    let mut items = midpoint_items(slice, &values, pivot);

    let forms = target
        .pure_opponents(pivot.other())?
        .par_iter()
        .map(|o| target.linear_form(&slice.conditional, o))
        .collect::<Result<Vec<_>>>()?;
    for (k, p) in points.iter().enumerate() {
        let m = slice.marginal(k);
        let v = p.value.as_f64();
        let bound = envelope_of(&forms, &m, pivot);
        let wrong_side = match pivot {
            Agent::One => v - bound,
            Agent::Two => bound - v,
        };
        items.push((
            wrong_side.max(0.0),
            ENVELOPE_TOL,
            format!(
                "{} a pure opponent form is on the wrong side of the value",
                slice.describe(k)
            ),
        ));
        let attained = target
            .linear_form(&slice.conditional, &p.against[pivot.index()])?
            .dot(&m)
            .as_f64();
        items.push((
            (attained - v).abs(),
            ENVELOPE_TOL,
            format!(
                "{} equilibrium opponent form does not attain the value",
                slice.describe(k)
            ),
        ));
    }
    let name = if pivot == Agent::One {
        "concavity"
    } else {
        "convexity"
    };
    Ok(CheckReport::from_violations(name, items)
        .with_note("envelope over pure policies used as a one-sided bound; the equilibrium opponent attains the value"))
}

fn envelope_of<T: Scalar>(forms: &[ValueVector<T>], marginal: &[T], pivot: Agent) -> f64 {
    let vals = forms.iter().map(|f| f.dot(marginal).as_f64());
    match pivot {
        Agent::One => vals.fold(f64::INFINITY, f64::min),
        Agent::Two => vals.fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Per grid point, the minimum (pivot one) or maximum (pivot two) over pure
/// opponent policies of the linear forms.
pub fn pure_envelope<T: Scalar>(
    target: &Target<'_, '_, T>,
    slice: &SliceSpec<T>,
) -> Result<Vec<f64>> {
    check_slice_target(target, slice)?;
    let pivot = slice.pivot();
    let forms = target
        .pure_opponents(pivot.other())?
        .par_iter()
        .map(|o| target.linear_form(&slice.conditional, o))
        .collect::<Result<Vec<_>>>()?;
    Ok((0..slice.grid)
        .map(|k| envelope_of(&forms, &slice.marginal(k), pivot))
        .collect())
}

/// Equality of the value with the pure-policy envelope at every grid point.
pub fn check_pure_envelope<T: Scalar>(
    target: &Target<'_, '_, T>,
    slice: &SliceSpec<T>,
) -> Result<CheckReport> {
    let env = pure_envelope(target, slice)?;
    let values = grid_values(slice, |s| target.value(s))?;
    let items = values
        .iter()
        .zip(&env)
        .enumerate()
        .map(|(k, (v, e))| {
            (
                (v.as_f64() - e).abs(),
                ENVELOPE_TOL,
                format!(
                    "{} value differs from the envelope over pure policies",
                    slice.describe(k)
                ),
            )
        })
        .collect();
    Ok(CheckReport::from_violations("envelope_pure", items)
        .with_note("envelope over pure policies"))
}

/// Finds a slice on which the value is not affine.
pub fn find_kinked_slice<T: Scalar>(
    target: &Target<'_, '_, T>,
    rng: &mut Lcg64,
    pivot: Agent,
    grid: usize,
    tries: usize,
) -> Result<Option<SliceSpec<T>>> {
    for _ in 0..tries {
        let slice = target.random_slice(rng, pivot, grid)?;
        let values = grid_values(&slice, |s| target.value(s))?;
        if chord_items(&slice, &values, "value")
            .iter()
            .any(|x| x.0 > 1e-6)
        {
            return Ok(Some(slice));
        }
    }
    Ok(None)
}

/// Distinct past joint policies inducing the same statistic.
#[derive(Debug, Clone)]
pub struct CollisionSearch<T> {
    pub stage: usize,
    pub searched: usize,
    pub pairs: Vec<(PastJointPolicy<T>, PastJointPolicy<T>)>,
    /// The first and last enumerated policies, kept as a negative control.
    pub extremes: Option<(PastJointPolicy<T>, PastJointPolicy<T>)>,
}

/// Grid points of the probability simplex with step `1/steps`, lowest
/// lexicographic first.
fn simplex_grid<T: Scalar>(dim: usize, steps: usize) -> Vec<Vec<T>> {
    fn rec(dim: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if dim == 1 {
            cur.push(left);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(dim - 1, left - k, cur, out);
            cur.pop();
        }
    }
    let mut raw = Vec::new();
    rec(dim, steps, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|v| {
            v.into_iter()
                .map(|k| T::lit(k as f64) / T::lit(steps as f64))
                .collect()
        })
        .collect()
}

/// Enumerates past joint policies for stages `0..stage` over a rule grid of
/// step [`COLLISION_STEP`] (at most `cap` of them, as a mixed-radix counter with
/// the last AOH row fastest) and buckets the induced statistics by rounding
/// to 1e-10.
pub fn find_collisions<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    stage: usize,
    cap: usize,
) -> Result<CollisionSearch<T>> {
    let m = game.model();
    m.check_stage(stage)?;
    let steps = (1.0 / COLLISION_STEP).round() as usize;
    let grids = [
        simplex_grid::<T>(m.num_actions(Agent::One), steps),
        simplex_grid::<T>(m.num_actions(Agent::Two), steps),
    ];
    // slot = (stage, agent, row)
    let slots: Vec<(usize, Agent, usize)> = (0..stage)
        .flat_map(|k| {
            Agent::BOTH
                .into_iter()
                .flat_map(move |a| (0..m.aoh_count(a, k)).map(move |r| (k, a, r)))
        })
        .collect();
    let build = |digits: &[usize]| -> Result<PastJointPolicy<T>> {
        let mut rules = Vec::with_capacity(stage);
        let mut it = slots.iter().zip(digits);
        for k in 0..stage {
            let mut rows: [Vec<Vec<T>>; 2] = [Vec::new(), Vec::new()];
            for a in Agent::BOTH {
                for _ in 0..m.aoh_count(a, k) {
                    let (&(_, agent, _), &d) = it.next().expect("slot per row");
                    rows[agent.index()].push(grids[agent.index()][d].clone());
                }
            }
            let [r1, r2] = rows;
            rules.push(JointRule::new(
                DecisionRule::new(Agent::One, k, r1)?,
                DecisionRule::new(Agent::Two, k, r2)?,
            )?);
        }
        PastJointPolicy::new(rules)
    };
    let radix: Vec<usize> = slots.iter().map(|s| grids[s.1.index()].len()).collect();
    let mut digits = vec![0usize; slots.len()];
    let mut buckets: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let mut policies = Vec::new();
    let mut stats = Vec::new();
    loop {
        let pjp = build(&digits)?;
        let sigma = game.statistic_from_pjp(&pjp)?;
        let key = sigma
            .as_slice()
            .iter()
            .map(|x| (x.as_f64() * 1e10).round() as i64)
            .collect();
        buckets.entry(key).or_default().push(policies.len());
        policies.push(pjp);
        stats.push(sigma);
        if policies.len() >= cap {
            break;
        }
        // increment, last slot fastest
        let mut i = digits.len();
        let mut carried = true;
        while carried && i > 0 {
            i -= 1;
            digits[i] += 1;
            carried = digits[i] == radix[i];
            if carried {
                digits[i] = 0;
            }
        }
        if carried {
            break;
        }
    }
    let mut groups: Vec<&Vec<usize>> = buckets.values().filter(|v| v.len() > 1).collect();
    groups.sort();
    let mut pairs = Vec::new();
    for g in groups {
        let (a, b) = (g[0], g[1]);
        let diff = stats[a]
            .as_slice()
            .iter()
            .zip(stats[b].as_slice())
            .map(|(x, y)| (*x - *y).abs().as_f64())
            .fold(0.0, f64::max);
        if diff <= COLLISION_TOL {
            pairs.push((policies[a].clone(), policies[b].clone()));
        }
    }
    if stage == 0 {
        // only the empty past joint policy exists; compare it with itself
        pairs.push((policies[0].clone(), policies[0].clone()));
    }
    let extremes =
        (policies.len() > 1).then(|| (policies[0].clone(), policies[policies.len() - 1].clone()));
    Ok(CollisionSearch {
        stage,
        searched: policies.len(),
        pairs,
        extremes,
    })
}

/// `samples x samples` stage-`stage` joint rules from independent seeded rule draws.
fn sampled_rules<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    stage: usize,
    samples: usize,
    rng: &mut Lcg64,
) -> Vec<JointRule<T>> {
    let m = game.model();
    let draw = |rng: &mut Lcg64, agent: Agent| {
        let rows = (0..m.aoh_count(agent, stage))
            .map(|_| rng.simplex(m.num_actions(agent)))
            .collect();
        DecisionRule::new(agent, stage, rows).expect("simplex rows")
    };
    let ones: Vec<_> = (0..samples).map(|_| draw(rng, Agent::One)).collect();
    let twos: Vec<_> = (0..samples).map(|_| draw(rng, Agent::Two)).collect();
    ones.iter()
        .flat_map(|a| {
            twos.iter()
                .map(move |b| JointRule::new(a.clone(), b.clone()).expect("same stage"))
        })
        .collect()
}

fn q_differences<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    pairs: &[(PastJointPolicy<T>, PastJointPolicy<T>)],
    rules: &[JointRule<T>],
) -> Result<Vec<(f64, usize, usize)>> {
    pairs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(p, (a, b))| {
            rules.iter().enumerate().map(move |(r, rule)| {
                let qa = game.q_star_pjp(a, rule)?;
                let qb = game.q_star_pjp(b, rule)?;
                Ok(((qa - qb).abs().as_f64(), p, r))
            })
        })
        .collect()
}

/// Q agreement across colliding past joint policies over a
/// `samples x samples` grid of sampled stage rules. No collisions yields an
/// inconclusive report.
pub fn check_sufficiency<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    search: &CollisionSearch<T>,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    if search.pairs.is_empty() {
        return Ok(CheckReport::inconclusive(
            "sufficiency",
            format!(
                "no statistic collision among {} past joint policies at stage {}",
                search.searched, search.stage
            ),
        ));
    }
    let rules = sampled_rules(game, search.stage, samples, &mut Lcg64::new(seed));
    let items = q_differences(game, &search.pairs, &rules)?
        .into_iter()
        .map(|(d, p, r)| {
            (
                d,
                SUFFICIENCY_TOL,
                format!("stage={} collision pair {p} rule sample {r}", search.stage),
            )
        })
        .collect();
    Ok(
        CheckReport::from_violations("sufficiency", items).with_note(format!(
            "{} collision pairs among {} past joint policies",
            search.pairs.len(),
            search.searched
        )),
    )
}

/// Q difference between two past joint policies with different statistics;
/// passes when the difference exceeds [`CONTROL_GAP`] for some sampled rule.
pub fn sufficiency_control<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    search: &CollisionSearch<T>,
    samples: usize,
    seed: u64,
) -> Result<CheckReport> {
    let Some(pair) = &search.extremes else {
        return Ok(CheckReport::inconclusive(
            "control.sufficiency",
            "fewer than two past joint policies",
        ));
    };
    let rules = sampled_rules(game, search.stage, samples, &mut Lcg64::new(seed));
    let diffs = q_differences(game, std::slice::from_ref(pair), &rules)?;
    let largest = diffs.iter().map(|d| d.0).fold(0.0, f64::max);
    let verdict = if largest > CONTROL_GAP {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(CheckReport {
        name: "control.sufficiency".into(),
        instances: diffs.len(),
        max_violation: largest,
        verdict,
        offending: (verdict == Verdict::Fail).then(|| {
            format!(
                "Q difference {largest:.3e} between distinct statistics is below {CONTROL_GAP:e}"
            )
        }),
        notes: vec!["first and last enumerated past joint policies".into()],
    })
}

/// Seeded final-stage statistics: a point mass, the uniform distribution over
/// reachable joint AOHs and `random` draws from the simplex.
pub fn final_stage_samples<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    random: usize,
    seed: u64,
) -> Result<Vec<Statistic<T>>> {
    let m = game.model();
    let t = m.horizon() - 1;
    let (n1, n2) = (m.aoh_count(Agent::One, t), m.aoh_count(Agent::Two, t));
    let mut out = vec![Statistic::new(m, t, JointDist::point_mass(n1, n2, 0, 0))?];
    let reach: Vec<bool> = (0..n1 * n2).map(|j| game.is_reachable(t, j)).collect();
    let count = reach.iter().filter(|&&r| r).count();
    if count > 0 {
        let p = T::one() / T::lit(count as f64);
        let probs = reach
            .iter()
            .map(|&r| if r { p } else { T::zero() })
            .collect();
        out.push(Statistic::new(m, t, JointDist::new(n1, n2, probs)?)?);
    }
    let mut rng = Lcg64::new(seed);
    for _ in 0..random {
        out.push(Statistic::new(
            m,
            t,
            JointDist::new(n1, n2, rng.simplex(n1 * n2))?,
        )?);
    }
    Ok(out)
}

/// `v*(σ)` against the value of the final-stage Bayesian-game family at `σ`.
pub fn check_final_stage_equivalence<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    sigmas: &[Statistic<T>],
) -> Result<CheckReport> {
    let family = game.final_stage_family();
    let items = sigmas
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let v = game.v_star(s)?;
            let f = family_value(&family, s.dist())?;
            Ok((
                (v - f).abs().as_f64(),
                EQUIVALENCE_TOL,
                format!("statistic sample {k}"),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::from_violations(
        "final_stage_equivalence",
        items,
    ))
}

/// The equivalence sweep against the family evaluated at the product of the
/// statistic's marginals. Fails whenever a sample is correlated enough to matter.
pub fn final_stage_control<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    sigmas: &[Statistic<T>],
) -> Result<CheckReport> {
    let family = game.final_stage_family();
    let items = sigmas
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let v = game.v_star(s)?;
            let p1 = decompose(s.dist(), Agent::One).marginal;
            let p2 = decompose(s.dist(), Agent::Two).marginal;
            let f = family_value(&family, &JointDist::product(&p1, &p2))?;
            Ok((
                (v - f).abs().as_f64(),
                EQUIVALENCE_TOL,
                format!("statistic sample {k}"),
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CheckReport::control(
        CheckReport::from_violations("final_stage_equivalence", items)
            .with_note("family evaluated at the product of marginals"),
    ))
}

/// The midpoint sweep applied to the negated value on a kinked slice.
pub fn concavity_control<T: Scalar>(
    target: &Target<'_, '_, T>,
    slice: &SliceSpec<T>,
) -> Result<CheckReport> {
    check_slice_target(target, slice)?;
    let pivot = slice.pivot();
    let values: Vec<T> = grid_values(slice, |s| target.value(s))?
        .into_iter()
        .map(|v| -v)
        .collect();
    let name = if pivot == Agent::One {
        "concavity"
    } else {
        "convexity"
    };
    Ok(CheckReport::control(
        CheckReport::from_violations(name, midpoint_items(slice, &values, pivot))
            .with_note("value negated"),
    ))
}
