//! JSON game files.
//!
//! POSG files carry `horizon`, `states`, `actions`, `observations`,
//! `transition[s][a1][a2][s']`, `observation_fn[a1][a2][s'][o1][o2]`,
//! `reward[s][a1][a2]` (or `reward[s][a1][a2][s']`, collapsed on load to
//! `Σ_s' T(s'|s,a) R(s,a,s')`) and `b0`. Bayesian-game files carry `types`,
//! `actions`, `reward[θ1][θ2][a1][a2]` and `sigma[θ1][θ2]`. Unknown keys are
//! ignored.

use serde::{Deserialize, Serialize};

use super::{Agent, BayesianGame, BgFamily, JointDist, PosgModel, PosgTables};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Deserialize, Serialize)]
#[serde(untagged)]
enum RawReward {
    Immediate(Vec<Vec<Vec<f64>>>),
    WithNextState(Vec<Vec<Vec<Vec<f64>>>>),
}

#[derive(Debug, Deserialize, Serialize)]
struct RawPosg {
    horizon: usize,
    states: Vec<String>,
    actions: Vec<Vec<String>>,
    observations: Vec<Vec<String>>,
    transition: Vec<Vec<Vec<Vec<f64>>>>,
    observation_fn: Vec<Vec<Vec<Vec<Vec<f64>>>>>,
    reward: RawReward,
    b0: Vec<f64>,
}

#[derive(Debug, Deserialize, Serialize)]
struct RawBg {
    types: Vec<Vec<String>>,
    actions: Vec<Vec<String>>,
    reward: Vec<Vec<Vec<Vec<f64>>>>,
    sigma: Vec<Vec<f64>>,
}

/// Either kind of game file.
#[derive(Debug, Clone)]
pub enum GameFile<T> {
    Posg(PosgModel<T>),
    Bg(BayesianGame<T>),
}

fn parse<'de, R: Deserialize<'de>>(bytes: &'de [u8]) -> Result<R> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    serde_path_to_error::deserialize(&mut de).map_err(|e| Error::Parse {
        path: match e.path().to_string().as_str() {
            "." => "<root>".to_string(),
            p => p.to_string(),
        },
        message: e.into_inner().to_string(),
    })
}

fn pair(v: Vec<Vec<String>>, field: &str) -> Result<[Vec<String>; 2]> {
    <[Vec<String>; 2]>::try_from(v).map_err(|v| Error::Parse {
        path: field.to_string(),
        message: format!("expected one list per agent (2), got {}", v.len()),
    })
}

fn conv<T: Scalar>(x: f64) -> T {
    T::lit(x)
}

fn conv3<T: Scalar>(v: Vec<Vec<Vec<f64>>>) -> Vec<Vec<Vec<T>>> {
    v.into_iter()
        .map(|a| {
            a.into_iter()
                .map(|b| b.into_iter().map(conv).collect())
                .collect()
        })
        .collect()
}

fn conv4<T: Scalar>(v: Vec<Vec<Vec<Vec<f64>>>>) -> Vec<Vec<Vec<Vec<T>>>> {
    v.into_iter().map(conv3).collect()
}

/// Parses and validates a POSG game file.
pub fn load_posg<T: Scalar>(bytes: &[u8]) -> Result<PosgModel<T>> {
    let raw: RawPosg = parse(bytes)?;
    let transition = conv4(raw.transition);
    let reward = match raw.reward {
        RawReward::Immediate(r) => conv3(r),
        RawReward::WithNextState(r) => {
            let r = conv4::<T>(r);
            let mut out = Vec::with_capacity(r.len());
            for (s, by_a1) in r.iter().enumerate() {
                let mut rows = Vec::with_capacity(by_a1.len());
                for (a1, by_a2) in by_a1.iter().enumerate() {
                    let mut row = Vec::with_capacity(by_a2.len());
                    for (a2, by_next) in by_a2.iter().enumerate() {
                        let t_row = transition
                            .get(s)
                            .and_then(|x| x.get(a1))
                            .and_then(|x| x.get(a2))
                            .filter(|x| x.len() == by_next.len())
                            .ok_or_else(|| {
                                Error::Shape(format!(
                                    "reward[{s}][{a1}][{a2}] does not match transition"
                                ))
                            })?;
                        row.push(t_row.iter().zip(by_next).map(|(&p, &x)| p * x).sum());
                    }
                    rows.push(row);
                }
                out.push(rows);
            }
            out
        }
    };
    PosgModel::new(PosgTables {
        horizon: raw.horizon,
        states: raw.states,
        actions: pair(raw.actions, "actions")?,
        observations: pair(raw.observations, "observations")?,
        transition,
        observation_fn: raw.observation_fn.into_iter().map(conv4).collect(),
        reward,
        b0: raw.b0.into_iter().map(conv).collect(),
    })
}

/// Parses and validates a Bayesian-game file.
pub fn load_bg<T: Scalar>(bytes: &[u8]) -> Result<BayesianGame<T>> {
    let raw: RawBg = parse(bytes)?;
    let family = BgFamily::new(
        pair(raw.types, "types")?,
        pair(raw.actions, "actions")?,
        conv4(raw.reward),
    )?;
    let rows: Vec<Vec<T>> = raw
        .sigma
        .into_iter()
        .map(|r| r.into_iter().map(conv).collect())
        .collect();
    let (n1, n2) = (family.num_types(Agent::One), family.num_types(Agent::Two));
    if rows.len() != n1 || rows.iter().any(|r| r.len() != n2) {
        return Err(Error::Shape(format!("sigma must be {n1}x{n2}")));
    }
    let sigma = JointDist::from_rows(&rows)?;
    BayesianGame::new(family, sigma)
}

/// Loads either file kind; `horizon` marks a POSG, `types` a Bayesian game.
pub fn load_game<T: Scalar>(bytes: &[u8]) -> Result<GameFile<T>> {
    let probe: serde_json::Value = parse(bytes)?;
    if probe.get("horizon").is_some() {
        load_posg(bytes).map(GameFile::Posg)
    } else if probe.get("types").is_some() {
        load_bg(bytes).map(GameFile::Bg)
    } else {
        Err(Error::Parse {
            path: "<root>".into(),
            message: "neither a POSG (`horizon`) nor a Bayesian game (`types`)".into(),
        })
    }
}

/// Optional string field outside the model schema, e.g. `plant`.
pub fn extra_field(bytes: &[u8], key: &str) -> Option<String> {
    let v: serde_json::Value = serde_json::from_slice(bytes).ok()?;
    v.get(key)?.as_str().map(str::to_string)
}

fn back3<T: Scalar>(v: Vec<Vec<Vec<T>>>) -> Vec<Vec<Vec<f64>>> {
    v.into_iter()
        .map(|a| {
            a.into_iter()
                .map(|b| b.into_iter().map(Scalar::as_f64).collect())
                .collect()
        })
        .collect()
}

fn back4<T: Scalar>(v: Vec<Vec<Vec<Vec<T>>>>) -> Vec<Vec<Vec<Vec<f64>>>> {
    v.into_iter().map(back3).collect()
}

pub fn posg_to_json<T: Scalar>(model: &PosgModel<T>) -> String {
    let t = model.tables();
    let raw = RawPosg {
        horizon: t.horizon,
        states: t.states,
        actions: t.actions.to_vec(),
        observations: t.observations.to_vec(),
        transition: back4(t.transition),
        observation_fn: t.observation_fn.into_iter().map(back4).collect(),
        reward: RawReward::Immediate(back3(t.reward)),
        b0: t.b0.into_iter().map(Scalar::as_f64).collect(),
    };
    serde_json::to_string_pretty(&raw).expect("game serializes")
}

pub fn bg_to_json<T: Scalar>(game: &BayesianGame<T>) -> String {
    let f = &game.family;
    let (n1, n2) = game.sigma.dims();
    let raw = RawBg {
        types: vec![
            f.type_labels(Agent::One).to_vec(),
            f.type_labels(Agent::Two).to_vec(),
        ],
        actions: vec![
            f.action_labels(Agent::One).to_vec(),
            f.action_labels(Agent::Two).to_vec(),
        ],
        reward: back4(f.reward_table()),
        sigma: (0..n1)
            .map(|i| (0..n2).map(|j| game.sigma.get(i, j).as_f64()).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&raw).expect("game serializes")
}
