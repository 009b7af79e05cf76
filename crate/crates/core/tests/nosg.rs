mod common;

use approx::assert_abs_diff_eq;
use common::*;
use posgkit_core::checks::Verdict;
use posgkit_core::model::{
    Agent, DecisionRule, JointRule, PartialPolicy, PastJointPolicy, PosgModel, PosgTables,
};
use posgkit_core::nosg::build_nosg;
use posgkit_core::posg::{Caps, PlanTimeGame, Statistic};
use posgkit_core::rng::Lcg64;

fn random_joint(rng: &mut Lcg64, m: &PosgModel<f64>, t: usize) -> JointRule<f64> {
    JointRule::new(
        random_rule(rng, m, Agent::One, t),
        random_rule(rng, m, Agent::Two, t),
    )
    .unwrap()
}

fn split(rules: &[JointRule<f64>], agent: Agent) -> PartialPolicy<f64> {
    PartialPolicy::new(
        agent,
        0,
        rules.iter().map(|r| r.get(agent).clone()).collect(),
    )
    .unwrap()
}

#[test]
fn augmented_state_counts() {
    let mp = fixture("matching_pennies.json");
    let n = build_nosg(&mp, Caps::default()).unwrap();
    assert_eq!((n.horizon(), n.num_states(0)), (1, 1));
    assert_eq!(n.initial_belief(), vec![1.0]);

    let t = fixture("competitive_tiger.json");
    let n = build_nosg(&t, Caps::default()).unwrap();
    assert_eq!(n.num_states(0) + n.num_states(1), 1 + 16);
    for k in 0..2 {
        assert_eq!(n.num_states(k), 4usize.pow(k as u32) * 4usize.pow(k as u32));
    }
    let tight = Caps {
        histories: 5,
        ..Caps::default()
    };
    assert!(build_nosg(&t, tight).is_err());
}

#[test]
fn deterministic_transition_is_a_point_mass() {
    let mut tables = fixture("competitive_tiger.json").tables();
    tables.transition = vec![vec![vec![vec![1.0, 0.0]; 2]; 2]; 2];
    tables.observation_fn = (0..2)
        .map(|_| {
            (0..2)
                .map(|_| {
                    (0..2)
                        .map(|sn| {
                            vec![
                                vec![if sn == 0 { 1.0 } else { 0.0 }, 0.0],
                                vec![0.0, if sn == 1 { 1.0 } else { 0.0 }],
                            ]
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    tables.b0 = vec![1.0, 0.0];
    let m = PosgModel::new(PosgTables { ..tables }).unwrap();
    let n = build_nosg(&m, Caps::default()).unwrap();
    let rule = JointRule::new(
        DecisionRule::degenerate(Agent::One, 0, &[1], 2),
        DecisionRule::degenerate(Agent::Two, 0, &[0], 2),
    )
    .unwrap();
    let next = n.transition(0, 0, &rule).unwrap();
    let hit = m.aoh_space(Agent::One).child(0, 1, 0) * 4 + m.aoh_space(Agent::Two).child(0, 0, 0);
    for (j, &p) in next.iter().enumerate() {
        assert_eq!(p, if j == hit { 1.0 } else { 0.0 });
    }
    assert!(n.transition(1, 0, &JointRule::uniform(&m, 1)).is_err());
}

#[test]
fn transitions_agree_with_the_statistic_update() {
    let m = fixture("competitive_tiger.json");
    let n = build_nosg(&m, Caps::default()).unwrap();
    let g = PlanTimeGame::new(&m);
    let mut rng = Lcg64::new(14);
    let r0 = random_joint(&mut rng, &m, 0);
    let next = n.transition(0, 0, &r0).unwrap();
    assert_abs_diff_eq!(next.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    let sigma = g.update_statistic(&Statistic::initial(), &r0).unwrap();
    for (a, b) in next.iter().zip(sigma.as_slice()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
    assert_eq!(n.belief_update(0, &n.initial_belief(), &r0).unwrap(), next);
}

#[test]
fn two_step_beliefs_equal_pjp_statistics() {
    let m = with_horizon(&fixture("ai_obs.json"), 3);
    let n = build_nosg(&m, Caps::default()).unwrap();
    let g = PlanTimeGame::new(&m);
    let mut rng = Lcg64::new(15);
    let rules: Vec<_> = (0..2).map(|t| random_joint(&mut rng, &m, t)).collect();
    let b1 = n.belief_update(0, &n.initial_belief(), &rules[0]).unwrap();
    let b2 = n.belief_update(1, &b1, &rules[1]).unwrap();
    let sigma = g
        .statistic_from_pjp(&PastJointPolicy::new(rules).unwrap())
        .unwrap();
    for (a, b) in b2.iter().zip(sigma.as_slice()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
    assert!(n.belief_update(1, &b2, &JointRule::uniform(&m, 1)).is_err());
}

#[test]
fn evaluation_examples() {
    let mp = fixture("matching_pennies.json");
    let n = build_nosg(&mp, Caps::default()).unwrap();
    assert_eq!(n.evaluate(&[JointRule::uniform(&mp, 0)]).unwrap(), 0.0);

    let c = with_horizon(&fixture("constant_reward.json"), 3);
    let n = build_nosg(&c, Caps::default()).unwrap();
    let rules: Vec<_> = (0..3).map(|t| JointRule::uniform(&c, t)).collect();
    assert_abs_diff_eq!(n.evaluate(&rules).unwrap(), 4.5, epsilon = 1e-12);
    assert!(n.evaluate(&rules[..2]).is_err());
}

#[test]
fn evaluation_matches_the_source_game() {
    let m = fixture("competitive_tiger.json");
    let n = build_nosg(&m, Caps::default()).unwrap();
    let mut rng = Lcg64::new(16);
    for _ in 0..10 {
        let rules: Vec<_> = (0..2).map(|t| random_joint(&mut rng, &m, t)).collect();
        let want = brute_return(&m, &split(&rules, Agent::One), &split(&rules, Agent::Two));
        assert_abs_diff_eq!(n.evaluate(&rules).unwrap(), want, epsilon = 1e-9);
    }
}

#[test]
fn sosg_property_report() {
    let m = fixture("competitive_tiger.json");
    let n = build_nosg(&m, Caps::default()).unwrap();
    let r = n.check_sosg_property();
    assert_eq!(r.verdict, Verdict::Pass);
    let text = r.render();
    assert!(text.contains("|O| = 1"));
    assert!(text.contains("stage 0: 1 augmented states"));
    assert!(text.contains("stage 1: 16 augmented states"));
}

#[test]
fn state_map_csv() {
    let m = fixture("competitive_tiger.json");
    let n = build_nosg(&m, Caps::default()).unwrap();
    let mut buf = Vec::new();
    n.write_state_map(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "stage,index,aoh_label_1,aoh_label_2");
    assert_eq!(lines[1], "0,0,root,root");
    assert_eq!(lines.len(), 1 + 17);
    assert_eq!(lines[2], "1,0,guess-left/hear-left,block-left/saw-left");
}
