#![allow(dead_code)]

use posgkit_core::model::{load_posg, Agent, DecisionRule, PartialPolicy, PosgModel, PosgTables};
use posgkit_core::rng::Lcg64;

pub fn fixture_path(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> PosgModel<f64> {
    let bytes = std::fs::read(fixture_path(name)).unwrap();
    load_posg(&bytes).unwrap()
}

pub fn with_horizon(model: &PosgModel<f64>, horizon: usize) -> PosgModel<f64> {
    PosgModel::new(PosgTables {
        horizon,
        ..model.tables()
    })
    .unwrap()
}

pub fn random_rule(
    rng: &mut Lcg64,
    model: &PosgModel<f64>,
    agent: Agent,
    stage: usize,
) -> DecisionRule<f64> {
    let rows = (0..model.aoh_count(agent, stage))
        .map(|_| rng.simplex(model.num_actions(agent)))
        .collect();
    DecisionRule::new(agent, stage, rows).unwrap()
}

pub fn random_partial(
    rng: &mut Lcg64,
    model: &PosgModel<f64>,
    agent: Agent,
    start: usize,
) -> PartialPolicy<f64> {
    let rules = (start..model.horizon())
        .map(|k| random_rule(rng, model, agent, k))
        .collect();
    PartialPolicy::new(agent, start, rules).unwrap()
}

/// One fully specified history prefix: state, both AOH indices, probability.
#[derive(Clone, Copy, Debug)]
pub struct Path {
    pub prob: f64,
    pub state: usize,
    pub aoh: [usize; 2],
}

/// Forward enumeration of every state/action/observation path, stage by
/// stage, independent of the library's recursive evaluator and belief table.
/// Returns the per-stage path lists (before acting) and the accumulated
/// expected reward.
pub fn forward_paths(
    model: &PosgModel<f64>,
    start: usize,
    init: Vec<Path>,
    one: &PartialPolicy<f64>,
    two: &PartialPolicy<f64>,
) -> (Vec<Vec<Path>>, f64) {
    let spaces = [model.aoh_space(Agent::One), model.aoh_space(Agent::Two)];
    let mut stages = vec![init];
    let mut total = 0.0;
    for t in start..model.horizon() {
        let mut next = Vec::new();
        for p in stages.last().unwrap() {
            for a1 in 0..model.num_actions(Agent::One) {
                for a2 in 0..model.num_actions(Agent::Two) {
                    let w =
                        p.prob * one.rule(t).prob(p.aoh[0], a1) * two.rule(t).prob(p.aoh[1], a2);
                    if w == 0.0 {
                        continue;
                    }
                    total += w * model.reward(p.state, a1, a2);
                    if t + 1 == model.horizon() {
                        continue;
                    }
                    for sn in 0..model.num_states() {
                        for o1 in 0..model.num_observations(Agent::One) {
                            for o2 in 0..model.num_observations(Agent::Two) {
                                let q = w
                                    * model.transition(p.state, a1, a2, sn)
                                    * model.observation(a1, a2, sn, o1, o2);
                                if q > 0.0 {
                                    next.push(Path {
                                        prob: q,
                                        state: sn,
                                        aoh: [
                                            spaces[0].child(p.aoh[0], a1, o1),
                                            spaces[1].child(p.aoh[1], a2, o2),
                                        ],
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        if t + 1 < model.horizon() {
            stages.push(next);
        }
    }
    (stages, total)
}

pub fn initial_paths(model: &PosgModel<f64>) -> Vec<Path> {
    model
        .initial_belief()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b > 0.0)
        .map(|(s, &b)| Path {
            prob: b,
            state: s,
            aoh: [0, 0],
        })
        .collect()
}

pub fn brute_return(
    model: &PosgModel<f64>,
    one: &PartialPolicy<f64>,
    two: &PartialPolicy<f64>,
) -> f64 {
    forward_paths(model, 0, initial_paths(model), one, two).1
}

/// Joint distribution over (joint AOH, state) at the last enumerated stage.
pub fn joint_state_mass(model: &PosgModel<f64>, stage: usize, paths: &[Path]) -> Vec<Vec<f64>> {
    let n2 = model.aoh_count(Agent::Two, stage);
    let mut out = vec![vec![0.0; model.num_states()]; model.joint_aoh_count(stage)];
    for p in paths {
        out[p.aoh[0] * n2 + p.aoh[1]][p.state] += p.prob;
    }
    out
}

pub fn prefix_policy(
    agent: Agent,
    prefix: &[DecisionRule<f64>],
    tail: &PartialPolicy<f64>,
) -> PartialPolicy<f64> {
    let rules = prefix
        .iter()
        .cloned()
        .chain(tail.rules().iter().cloned())
        .collect();
    PartialPolicy::new(agent, 0, rules).unwrap()
}
