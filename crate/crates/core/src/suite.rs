//! The full verification run behind `posgkit verify`: every structural check
//! on a game file, each with a negative control, rendered as report lines.
//!
//! Each check draws from its own generator derived from the run seed, and
//! grid evaluations are collected in index order, so the text is identical
//! for a given seed regardless of thread count.

use crate::bg::solve_bg;
use crate::checks::{
    check_br_linearity, check_concavity_convexity, check_final_stage_equivalence,
    check_linearity_of_value, check_sufficiency, concavity_control, final_stage_control,
    final_stage_samples, find_collisions, find_kinked_slice, sufficiency_control, CheckReport,
    Target, Verdict, COLLISION_CAP,
};
use crate::error::Result;
use crate::model::{
    Agent, BayesianGame, BgFamily, GameFile, JointRule, PartialPolicy, PosgModel, PosgTables,
};
use crate::nosg::build_nosg;
use crate::posg::{Caps, PlanTimeGame, Statistic};
use crate::rng::Lcg64;
use crate::scalar::Scalar;

/// Marker value of the `plant` key that substitutes the equilibrium value for
/// the best-response value in the linearity check.
pub const PLANT_BR_LINEARITY_VSTAR: &str = "br-linearity-vstar";

/// Slice and sampling sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub grid: usize,
    pub segments: usize,
    pub pure_opponents: usize,
    pub final_samples: usize,
    pub rule_samples: usize,
    pub nosg_sequences: usize,
    pub caps: Caps,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            grid: 11,
            segments: 10,
            pure_opponents: 5,
            final_samples: 20,
            rule_samples: 5,
            nosg_sequences: 20,
            caps: Caps::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub header: String,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn inconclusive(&self) -> usize {
        self.checks
            .iter()
            .filter(|c| c.verdict == Verdict::Inconclusive)
            .count()
    }

    /// Header, one block per check and a summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header);
        out.push('\n');
        for c in &self.checks {
            out.push_str(&c.render());
            out.push('\n');
        }
        let count = |v| self.checks.iter().filter(|c| c.verdict == v).count();
        if self.inconclusive() > 0 {
            out.push_str(&format!(
                "WARNING {} check(s) inconclusive\n",
                self.inconclusive()
            ));
        }
        out.push_str(&format!(
            "SUMMARY checks={} pass={} fail={} inconclusive={}\n",
            self.checks.len(),
            count(Verdict::Pass),
            count(Verdict::Fail),
            count(Verdict::Inconclusive)
        ));
        out
    }
}

/// Merges reports of one check over several instances into a single line.
pub fn merge(name: impl Into<String>, parts: Vec<CheckReport>) -> CheckReport {
    let name = name.into();
    let instances = parts.iter().map(|p| p.instances).sum();
    let max_violation = parts.iter().map(|p| p.max_violation).fold(0.0, f64::max);
    let failed = parts.iter().find(|p| p.verdict == Verdict::Fail);
    let verdict = if failed.is_some() {
        Verdict::Fail
    } else if parts.iter().all(|p| p.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    let mut notes: Vec<String> = Vec::new();
    for n in parts.iter().flat_map(|p| &p.notes) {
        if !notes.contains(n) {
            notes.push(n.clone());
        }
    }
    CheckReport {
        name,
        instances,
        max_violation,
        verdict,
        offending: failed.and_then(|f| f.offending.clone()),
        notes,
    }
}

fn rng_for(seed: u64, salt: u64) -> Lcg64 {
    Lcg64::new(seed).fork(salt)
}

fn pivot_name(p: Agent) -> &'static str {
    match p {
        Agent::One => "p1",
        Agent::Two => "p2",
    }
}

/// Evenly spaced picks from `items`, at most `k`.
fn spread<O: Clone>(items: &[O], k: usize) -> Vec<O> {
    if items.len() <= k {
        return items.to_vec();
    }
    (0..k)
        .map(|i| items[i * (items.len() - 1) / (k - 1).max(1)].clone())
        .collect()
}

fn slice_checks<T: Scalar>(
    target: &Target<'_, '_, T>,
    label: &str,
    cfg: &SuiteConfig,
    salt: u64,
) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for pivot in Agent::BOTH {
        let mut rng = rng_for(cfg.seed, salt + pivot.index() as u64);
        let pure = target.pure_opponents(pivot.other())?;
        let mut lin = Vec::new();
        let mut shape = Vec::new();
        for _ in 0..cfg.segments {
            let slice = target.random_slice(&mut rng, pivot, cfg.grid)?;
            let mut opponents = spread(&pure, cfg.pure_opponents);
            opponents.push(target.random_opponent(&mut rng, pivot.other()));
            for o in &opponents {
                lin.push(check_br_linearity(target, &slice, o)?);
            }
            shape.push(check_concavity_convexity(target, &slice)?);
        }
        let shape_name = if pivot == Agent::One {
            "concavity"
        } else {
            "convexity"
        };
        out.push(merge(
            format!("br_linearity.{label}.{}", pivot_name(pivot)),
            lin,
        ));
        out.push(merge(
            format!("{shape_name}.{label}.{}", pivot_name(pivot)),
            shape,
        ));
    }
    Ok(out)
}

/// Controls on the first target (among `targets`) that has a kinked slice.
fn slice_controls<T: Scalar>(
    targets: &[(Target<'_, '_, T>, String)],
    cfg: &SuiteConfig,
) -> Result<Vec<CheckReport>> {
    let mut rng = rng_for(cfg.seed, 900);
    for (target, label) in targets {
        if let Some(slice) = find_kinked_slice(target, &mut rng, Agent::One, cfg.grid, 50)? {
            let note = format!("kinked slice on {label}");
            return Ok(vec![
                CheckReport::control(check_linearity_of_value(target, &slice)?)
                    .with_note(note.clone()),
                concavity_control(target, &slice)?.with_note(note),
            ]);
        }
    }
    Ok(vec![
        CheckReport::inconclusive("control.br_linearity", "no kinked slice found"),
        CheckReport::inconclusive("control.concavity", "no kinked slice found"),
    ])
}

/// A small Bayesian-game family whose value has kinks, used for the slice
/// controls when the game under test has none (e.g. one type per agent).
pub fn control_family() -> BgFamily<f64> {
    BgFamily::from_flat(
        [2, 2],
        [2, 2],
        vec![
            1.0, -1.0, -1.0, 1.0, //
            2.0, 0.0, -1.0, 0.5, //
            0.0, 1.5, 1.0, -2.0, //
            -0.5, 1.0, 2.0, 0.0,
        ],
    )
    .expect("control family is well formed")
}

/// A two-stage game with action-independent observations, used for the
/// sufficiency control when the game under test has a single stage.
pub fn control_posg() -> PosgModel<f64> {
    let obs = |sn: usize| -> Vec<Vec<f64>> {
        (0..2)
            .map(|o1| {
                (0..2)
                    .map(|o2| if o1 == sn { 0.7 } else { 0.3 } * if o2 == sn { 0.6 } else { 0.4 })
                    .collect()
            })
            .collect()
    };
    let names = |a: &str, b: &str| vec![a.to_string(), b.to_string()];
    PosgModel::new(PosgTables {
        horizon: 2,
        states: names("left", "right"),
        actions: [names("push", "pull"), names("hold", "shove")],
        observations: [
            names("ping-left", "ping-right"),
            names("echo-left", "echo-right"),
        ],
        transition: (0..2)
            .map(|s| {
                (0..2)
                    .map(|_| {
                        (0..2)
                            .map(|_| {
                                if s == 0 {
                                    vec![0.8, 0.2]
                                } else {
                                    vec![0.3, 0.7]
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        observation_fn: (0..2)
            .map(|_| (0..2).map(|_| (0..2).map(obs).collect()).collect())
            .collect(),
        reward: vec![
            vec![vec![1.0, -1.0], vec![-0.5, 2.0]],
            vec![vec![-2.0, 0.5], vec![1.5, -1.0]],
        ],
        b0: vec![0.6, 0.4],
    })
    .expect("control game is well formed")
}

fn sufficiency_checks<T: Scalar>(
    game: &PlanTimeGame<'_, T>,
    cfg: &SuiteConfig,
) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    let mut control = None;
    for t in 0..game.model().horizon() {
        let search = find_collisions(game, t, COLLISION_CAP)?;
        let mut r =
            check_sufficiency(game, &search, cfg.rule_samples, cfg.seed ^ (100 + t as u64))?;
        r.name = format!("sufficiency.t{t}");
        out.push(r);
        if t > 0 && control.is_none() {
            control = Some(sufficiency_control(
                game,
                &search,
                cfg.rule_samples,
                cfg.seed ^ 200,
            )?);
        }
    }
    let control = match control {
        Some(c) if c.verdict == Verdict::Pass => c,
        _ => {
            let m = control_posg();
            let g = PlanTimeGame::new(&m);
            let search = find_collisions(&g, 1, COLLISION_CAP)?;
            sufficiency_control(&g, &search, cfg.rule_samples, cfg.seed ^ 200)?
                .with_note("built-in two-stage control game")
        }
    };
    out.push(control);
    Ok(out)
}

/// Structural property, value identity and belief identity of the NOSG reduction.
pub fn nosg_reports<T: Scalar>(
    model: &PosgModel<T>,
    cfg: &SuiteConfig,
) -> Result<Vec<CheckReport>> {
    let nosg = build_nosg(model, cfg.caps)?;
    let game = PlanTimeGame::with_caps(model, cfg.caps);
    let mut rng = rng_for(cfg.seed, 300);
    let h = model.horizon();
    let mut value_items = Vec::new();
    let mut belief_items = Vec::new();
    for k in 0..cfg.nosg_sequences {
        let rules: Vec<JointRule<T>> = (0..h)
            .map(|t| {
                let draw = |rng: &mut Lcg64, a: Agent| {
                    let rows = (0..model.aoh_count(a, t))
                        .map(|_| rng.simplex(model.num_actions(a)))
                        .collect();
                    crate::model::DecisionRule::new(a, t, rows).expect("simplex rows")
                };
                let one = draw(&mut rng, Agent::One);
                let two = draw(&mut rng, Agent::Two);
                JointRule { one, two }
            })
            .collect();
        let split = |a: Agent| {
            PartialPolicy::new(a, 0, rules.iter().map(|r| r.get(a).clone()).collect())
                .expect("contiguous stages")
        };
        let direct = game.evaluate_joint_policy(&split(Agent::One), &split(Agent::Two))?;
        let via_nosg = nosg.evaluate(&rules)?;
        value_items.push((
            (direct - via_nosg).abs().as_f64(),
            1e-9,
            format!("rule sequence {k}"),
        ));
        let mut belief = nosg.initial_belief();
        let mut sigma = Statistic::initial();
        for (t, rule) in rules.iter().enumerate().take(h.saturating_sub(1)) {
            belief = nosg.belief_update(t, &belief, rule)?;
            sigma = game.update_statistic(&sigma, rule)?;
            let diff = belief
                .iter()
                .zip(sigma.as_slice())
                .map(|(a, b)| (*a - *b).abs().as_f64())
                .fold(0.0, f64::max);
            belief_items.push((diff, 1e-12, format!("rule sequence {k} stage {}", t + 1)));
        }
    }
    let mut belief = CheckReport::from_violations("nosg_belief_identity", belief_items);
    if h == 1 {
        belief = belief.with_note("single stage: the only belief is the initial point mass");
    }
    Ok(vec![
        nosg.check_sosg_property(),
        CheckReport::from_violations("nosg_value_identity", value_items),
        belief,
    ])
}

fn rationality_check<T: Scalar>(game: &PlanTimeGame<'_, T>) -> Result<CheckReport> {
    let sigma = Statistic::initial();
    let sol = game.solve_subgame(&sigma)?;
    let rp = game.behavioral_from_solution(&sol)?;
    let ex = game.exploitability(&sigma, &rp.one, &rp.two)?;
    let br1 = game.br_value_posg(&sigma, &rp.two, Agent::One)?;
    let br2 = game.br_value_posg(&sigma, &rp.one, Agent::Two)?;
    let tol = crate::checks::ENVELOPE_TOL;
    Ok(CheckReport::from_violations(
        "rationality",
        vec![
            (
                ex.gap().max(T::zero()).as_f64(),
                tol,
                "exploitability of the extracted joint policy".into(),
            ),
            (
                (br1 - sol.value).abs().as_f64(),
                tol,
                "agent-one best response differs from v*".into(),
            ),
            (
                (br2 - sol.value).abs().as_f64(),
                tol,
                "agent-two best response differs from v*".into(),
            ),
        ],
    ))
}

/// Runs every check on a POSG.
pub fn run_posg<T: Scalar>(
    model: &PosgModel<T>,
    plant: Option<&str>,
    cfg: &SuiteConfig,
) -> Result<SuiteReport> {
    let game = PlanTimeGame::with_caps(model, cfg.caps);
    let h = model.horizon();
    let header = format!(
        "GAME kind=posg horizon={h} states={} actions={}x{} observations={}x{} seed={}",
        model.num_states(),
        model.num_actions(Agent::One),
        model.num_actions(Agent::Two),
        model.num_observations(Agent::One),
        model.num_observations(Agent::Two),
        cfg.seed
    );
    let mut checks = Vec::new();
    let targets: Vec<_> = (0..h)
        .map(|t| {
            (
                Target::Posg {
                    game: &game,
                    stage: t,
                },
                format!("t{t}"),
            )
        })
        .collect();
    for (k, (target, label)) in targets.iter().enumerate() {
        checks.extend(slice_checks(target, label, cfg, 10 * k as u64)?);
    }
    checks.extend(sufficiency_checks(&game, cfg)?);
    let samples = final_stage_samples(&game, cfg.final_samples, cfg.seed ^ 400)?;
    checks.push(check_final_stage_equivalence(&game, &samples)?);
    checks.extend(nosg_reports(model, cfg)?);
    checks.push(rationality_check(&game)?);

    let mut controls = slice_controls(&targets.iter().rev().cloned().collect::<Vec<_>>(), cfg)?;
    if controls.iter().any(|c| c.verdict == Verdict::Inconclusive) {
        let fam = control_family();
        controls = slice_controls(
            &[(Target::Family(&fam), "built-in control family".into())],
            cfg,
        )?;
    }
    checks.extend(controls);
    let mut fc = final_stage_control(&game, &samples)?;
    if fc.verdict != Verdict::Pass {
        let m = control_posg();
        let g = PlanTimeGame::new(&m);
        fc = final_stage_control(
            &g,
            &final_stage_samples(&g, cfg.final_samples, cfg.seed ^ 400)?,
        )?
        .with_note("built-in two-stage control game");
    }
    checks.push(fc);

    if plant == Some(PLANT_BR_LINEARITY_VSTAR) {
        checks.push(planted_linearity(&targets, cfg)?);
    }
    Ok(SuiteReport { header, checks })
}

/// The linearity check with the value substituted, on a kinked slice: a
/// deliberate failure.
fn planted_linearity<T: Scalar>(
    targets: &[(Target<'_, '_, T>, String)],
    cfg: &SuiteConfig,
) -> Result<CheckReport> {
    let mut rng = rng_for(cfg.seed, 950);
    for (target, label) in targets.iter().rev() {
        if let Some(slice) = find_kinked_slice(target, &mut rng, Agent::One, cfg.grid, 50)? {
            let mut r =
                check_linearity_of_value(target, &slice)?.with_note(format!("planted on {label}"));
            r.name = format!("br_linearity.{label}.planted");
            return Ok(r);
        }
    }
    Ok(CheckReport::inconclusive(
        "br_linearity.planted",
        "no kinked slice found",
    ))
}

/// Runs the one-shot checks on a Bayesian game.
pub fn run_bg<T: Scalar>(
    game: &BayesianGame<T>,
    plant: Option<&str>,
    cfg: &SuiteConfig,
) -> Result<SuiteReport> {
    let f = &game.family;
    let header = format!(
        "GAME kind=bg types={}x{} actions={}x{} seed={}",
        f.num_types(Agent::One),
        f.num_types(Agent::Two),
        f.num_actions(Agent::One),
        f.num_actions(Agent::Two),
        cfg.seed
    );
    let mut checks = Vec::new();
    let sol = solve_bg(game)?;
    checks.push(CheckReport::from_violations(
        "minimax_duality",
        vec![(
            (sol.maxmin - sol.minmax).abs().as_f64(),
            1e-6,
            "maxmin differs from minmax".into(),
        )],
    ));
    let target = Target::Family(f);
    checks.extend(slice_checks(&target, "bg", cfg, 0)?);
    let mut controls = slice_controls(&[(target, "bg".into())], cfg)?;
    if controls.iter().any(|c| c.verdict == Verdict::Inconclusive) {
        let fam = control_family();
        controls = slice_controls(
            &[(Target::Family(&fam), "built-in control family".into())],
            cfg,
        )?;
    }
    checks.extend(controls);
    if plant == Some(PLANT_BR_LINEARITY_VSTAR) {
        checks.push(planted_linearity(&[(target, "bg".into())], cfg)?);
    }
    Ok(SuiteReport { header, checks })
}

pub fn run<T: Scalar>(
    file: &GameFile<T>,
    plant: Option<&str>,
    cfg: &SuiteConfig,
) -> Result<SuiteReport> {
    match file {
        GameFile::Posg(m) => run_posg(m, plant, cfg),
        GameFile::Bg(g) => run_bg(g, plant, cfg),
    }
}
