mod common;

use approx::assert_abs_diff_eq;
use common::*;
use posgkit_core::bg::{decompose, family_value, q_bg, r_vector};
use posgkit_core::model::{
    enumerate_pure_partial_policies, Agent, DecisionRule, JointDist, JointRule, PartialPolicy,
    PastJointPolicy, PosgModel, PosgTables,
};
use posgkit_core::oracle::{solve_matrix_game, MatrixGame};
use posgkit_core::posg::{PlanTimeGame, Statistic};
use posgkit_core::rng::Lcg64;

fn uniform_joint(model: &PosgModel<f64>, stage: usize) -> JointRule<f64> {
    JointRule::uniform(model, stage)
}

fn random_joint(rng: &mut Lcg64, model: &PosgModel<f64>, stage: usize) -> JointRule<f64> {
    JointRule::new(
        random_rule(rng, model, Agent::One, stage),
        random_rule(rng, model, Agent::Two, stage),
    )
    .unwrap()
}

fn random_statistic(rng: &mut Lcg64, model: &PosgModel<f64>, stage: usize) -> Statistic<f64> {
    let (n1, n2) = (
        model.aoh_count(Agent::One, stage),
        model.aoh_count(Agent::Two, stage),
    );
    Statistic::new(
        model,
        stage,
        JointDist::new(n1, n2, rng.simplex(n1 * n2)).unwrap(),
    )
    .unwrap()
}

fn pure(model: &PosgModel<f64>, agent: Agent, stage: usize) -> Vec<PartialPolicy<f64>> {
    enumerate_pure_partial_policies(model, agent, stage, 1 << 20)
        .unwrap()
        .collect()
}

/// Deterministic chain: the state records agent one's last action and each
/// agent observes it exactly.
fn deterministic_model() -> PosgModel<f64> {
    let t = |a1: usize| {
        if a1 == 0 {
            vec![1.0, 0.0]
        } else {
            vec![0.0, 1.0]
        }
    };
    PosgModel::new(PosgTables {
        horizon: 2,
        states: vec!["x".into(), "y".into()],
        actions: [vec!["l".into(), "r".into()], vec!["l".into(), "r".into()]],
        observations: [vec!["x".into(), "y".into()], vec!["x".into(), "y".into()]],
        transition: (0..2)
            .map(|_| (0..2).map(|a1| (0..2).map(|_| t(a1)).collect()).collect())
            .collect(),
        observation_fn: (0..2)
            .map(|_| {
                (0..2)
                    .map(|_| {
                        (0..2)
                            .map(|sn| {
                                (0..2)
                                    .map(|o1| {
                                        (0..2)
                                            .map(|o2| if o1 == sn && o2 == sn { 1.0 } else { 0.0 })
                                            .collect()
                                    })
                                    .collect()
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect(),
        reward: vec![
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            vec![vec![5.0, 6.0], vec![7.0, 8.0]],
        ],
        b0: vec![1.0, 0.0],
    })
    .unwrap()
}

#[test]
fn one_state_beliefs_are_trivial() {
    let m = fixture("matching_pennies.json");
    let g = PlanTimeGame::new(&m);
    let b = g.state_beliefs(0).unwrap();
    assert_eq!(b.row(0), &[1.0]);
}

#[test]
fn stage_zero_beliefs_equal_b0() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let b = g.state_beliefs(0).unwrap();
    assert_eq!(b.len(), 1);
    assert_eq!(b.row(0), m.initial_belief());
}

#[test]
fn tiger_beliefs_match_path_filter() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    // any full-support policy reaches every joint AOH; beliefs do not depend on it
    let u1 = PartialPolicy::uniform(&m, Agent::One, 0);
    let u2 = PartialPolicy::uniform(&m, Agent::Two, 0);
    let (paths, _) = forward_paths(&m, 0, initial_paths(&m), &u1, &u2);
    let mass = joint_state_mass(&m, 1, &paths[1]);
    let b = g.state_beliefs(1).unwrap();
    for (j, row) in mass.iter().enumerate() {
        let z: f64 = row.iter().sum();
        assert!(z > 0.0 && b.is_reachable(j));
        for s in 0..m.num_states() {
            assert_abs_diff_eq!(b.row(j)[s], row[s] / z, epsilon = 1e-12);
        }
    }
}

#[test]
fn empty_pjp_gives_point_mass() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let s = g.statistic_from_pjp(&PastJointPolicy::empty()).unwrap();
    assert_eq!(s.stage(), 0);
    assert_eq!(s.as_slice(), &[1.0]);
}

#[test]
fn uniform_stage_zero_statistic_matches_forward_sum() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let pjp = PastJointPolicy::new(vec![uniform_joint(&m, 0)]).unwrap();
    let sigma = g.statistic_from_pjp(&pjp).unwrap();
    let u1 = PartialPolicy::uniform(&m, Agent::One, 0);
    let u2 = PartialPolicy::uniform(&m, Agent::Two, 0);
    let (paths, _) = forward_paths(&m, 0, initial_paths(&m), &u1, &u2);
    let mass = joint_state_mass(&m, 1, &paths[1]);
    for (j, row) in mass.iter().enumerate() {
        assert_abs_diff_eq!(
            sigma.as_slice()[j],
            row.iter().sum::<f64>(),
            epsilon = 1e-12
        );
    }
    assert_abs_diff_eq!(sigma.as_slice().iter().sum::<f64>(), 1.0, epsilon = 1e-9);
}

#[test]
fn deterministic_model_gives_point_mass() {
    let m = deterministic_model();
    let g = PlanTimeGame::new(&m);
    let rule = JointRule::new(
        DecisionRule::degenerate(Agent::One, 0, &[1], 2),
        DecisionRule::degenerate(Agent::Two, 0, &[0], 2),
    )
    .unwrap();
    let sigma = g.update_statistic(&Statistic::initial(), &rule).unwrap();
    let space1 = m.aoh_space(Agent::One);
    let space2 = m.aoh_space(Agent::Two);
    let hit = space1.child(0, 1, 1) * m.aoh_count(Agent::Two, 1) + space2.child(0, 0, 1);
    for (j, &p) in sigma.as_slice().iter().enumerate() {
        assert_eq!(p, if j == hit { 1.0 } else { 0.0 });
    }
}

#[test]
fn update_sums_to_one_and_matches_pjp_path() {
    let m = with_horizon(&fixture("ai_obs.json"), 3);
    let g = PlanTimeGame::new(&m);
    let mut rng = Lcg64::new(11);
    let r0 = random_joint(&mut rng, &m, 0);
    let r1 = random_joint(&mut rng, &m, 1);
    let s1 = g.update_statistic(&Statistic::initial(), &r0).unwrap();
    let s2 = g.update_statistic(&s1, &r1).unwrap();
    assert_abs_diff_eq!(s2.as_slice().iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    let via_pjp = g
        .statistic_from_pjp(&PastJointPolicy::new(vec![r0, r1]).unwrap())
        .unwrap();
    for (a, b) in s2.as_slice().iter().zip(via_pjp.as_slice()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
    assert!(g.update_statistic(&s2, &uniform_joint(&m, 2)).is_err());
}

#[test]
fn immediate_reward_examples() {
    let mp = fixture("matching_pennies.json");
    let g = PlanTimeGame::new(&mp);
    let (r, reachable) = g.immediate_reward(0, 0, &uniform_joint(&mp, 0)).unwrap();
    assert!(reachable);
    assert_eq!(r, 0.0);
    let rule = JointRule::new(
        DecisionRule::degenerate(Agent::One, 0, &[0], 2),
        DecisionRule::degenerate(Agent::Two, 0, &[1], 2),
    )
    .unwrap();
    assert_eq!(g.immediate_reward(0, 0, &rule).unwrap().0, -1.0);
}

#[test]
fn tiger_immediate_reward_matches_state_sequences() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let mut rng = Lcg64::new(3);
    let rule = random_joint(&mut rng, &m, 1);
    let u1 = PartialPolicy::uniform(&m, Agent::One, 0);
    let u2 = PartialPolicy::uniform(&m, Agent::Two, 0);
    let (paths, _) = forward_paths(&m, 0, initial_paths(&m), &u1, &u2);
    let mass = joint_state_mass(&m, 1, &paths[1]);
    let n2 = m.aoh_count(Agent::Two, 1);
    for (j, row) in mass.iter().enumerate() {
        let z: f64 = row.iter().sum();
        let (i1, i2) = (j / n2, j % n2);
        let mut want = 0.0;
        for a1 in 0..2 {
            for a2 in 0..2 {
                for s in 0..2 {
                    want += rule.one.prob(i1, a1) * rule.two.prob(i2, a2) * row[s] / z
                        * m.reward(s, a1, a2);
                }
            }
        }
        let (got, ok) = g.immediate_reward(1, j, &rule).unwrap();
        assert!(ok);
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
    }
}

#[test]
fn evaluate_examples() {
    let c = with_horizon(&fixture("constant_reward.json"), 3);
    let g = PlanTimeGame::new(&c);
    let v = g
        .evaluate_joint_policy(
            &PartialPolicy::uniform(&c, Agent::One, 0),
            &PartialPolicy::uniform(&c, Agent::Two, 0),
        )
        .unwrap();
    assert_abs_diff_eq!(v, 4.5, epsilon = 1e-12);

    let mp = fixture("matching_pennies.json");
    let g = PlanTimeGame::new(&mp);
    let v = g
        .evaluate_joint_policy(
            &PartialPolicy::uniform(&mp, Agent::One, 0),
            &PartialPolicy::uniform(&mp, Agent::Two, 0),
        )
        .unwrap();
    assert_eq!(v, 0.0);
}

#[test]
fn tiger_evaluation_matches_history_major_sum() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let p1 = pure(&m, Agent::One, 0);
    let p2 = pure(&m, Agent::Two, 0);
    for (a, b) in [(0, 0), (5, 17), (31, 9), (12, 30)] {
        assert_abs_diff_eq!(
            g.evaluate_joint_policy(&p1[a], &p2[b]).unwrap(),
            brute_return(&m, &p1[a], &p2[b]),
            epsilon = 1e-12
        );
    }
    let mut rng = Lcg64::new(8);
    for _ in 0..5 {
        let (a, b) = (
            random_partial(&mut rng, &m, Agent::One, 0),
            random_partial(&mut rng, &m, Agent::Two, 0),
        );
        assert_abs_diff_eq!(
            g.evaluate_joint_policy(&a, &b).unwrap(),
            brute_return(&m, &a, &b),
            epsilon = 1e-12
        );
    }
}

#[test]
fn history_cap_is_enforced() {
    let m = fixture("competitive_tiger.json");
    let caps = posgkit_core::posg::Caps {
        histories: 10,
        ..Default::default()
    };
    let g = PlanTimeGame::with_caps(&m, caps);
    let err = g
        .evaluate_joint_policy(
            &PartialPolicy::uniform(&m, Agent::One, 0),
            &PartialPolicy::uniform(&m, Agent::Two, 0),
        )
        .unwrap_err();
    assert!(matches!(err, posgkit_core::Error::TooLarge { .. }));
}

#[test]
fn final_stage_nu_is_the_r_vector() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let fam = g.final_stage_family();
    let mut rng = Lcg64::new(21);
    for pivot in Agent::BOTH {
        let sigma = random_statistic(&mut rng, &m, 1);
        let mc = decompose(sigma.dist(), pivot);
        let opp = random_partial(&mut rng, &m, pivot.other(), 1);
        let nu = g.nu_vector(1, &mc.conditional, &opp).unwrap();
        let r = r_vector(&fam, &mc.conditional, opp.rule(1)).unwrap();
        for (a, b) in nu.values.iter().zip(&r.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}

#[test]
fn constant_reward_nu_is_two_c() {
    let m = fixture("constant_reward.json");
    let g = PlanTimeGame::new(&m);
    let mc = decompose(Statistic::<f64>::initial().dist(), Agent::One);
    let nu = g
        .nu_vector(
            0,
            &mc.conditional,
            &PartialPolicy::uniform(&m, Agent::Two, 0),
        )
        .unwrap();
    assert_eq!(nu.values.len(), 1);
    assert_abs_diff_eq!(nu.values[0], 3.0, epsilon = 1e-12);
}

#[test]
fn br_value_matches_pure_enumeration() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let mut rng = Lcg64::new(4);
    for stage in 0..2 {
        for _ in 0..3 {
            let sigma = if stage == 0 {
                Statistic::initial()
            } else {
                random_statistic(&mut rng, &m, 1)
            };
            let opp2 = random_partial(&mut rng, &m, Agent::Two, stage);
            let opp1 = random_partial(&mut rng, &m, Agent::One, stage);
            let best1 = pure(&m, Agent::One, stage)
                .iter()
                .map(|p| g.evaluate_from_statistic(&sigma, p, &opp2).unwrap())
                .fold(f64::NEG_INFINITY, f64::max);
            let best2 = pure(&m, Agent::Two, stage)
                .iter()
                .map(|p| g.evaluate_from_statistic(&sigma, &opp1, p).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert_abs_diff_eq!(
                g.br_value_posg(&sigma, &opp2, Agent::One).unwrap(),
                best1,
                epsilon = 1e-9
            );
            assert_abs_diff_eq!(
                g.br_value_posg(&sigma, &opp1, Agent::Two).unwrap(),
                best2,
                epsilon = 1e-9
            );
        }
    }
}

#[test]
fn matching_pennies_br_values() {
    let m = fixture("matching_pennies.json");
    let g = PlanTimeGame::new(&m);
    let sigma = Statistic::initial();
    let u2 = PartialPolicy::uniform(&m, Agent::Two, 0);
    assert_abs_diff_eq!(
        g.br_value_posg(&sigma, &u2, Agent::One).unwrap(),
        0.0,
        epsilon = 1e-12
    );
    let heads = PartialPolicy::new(
        Agent::Two,
        0,
        vec![DecisionRule::degenerate(Agent::Two, 0, &[0], 2)],
    )
    .unwrap();
    assert_abs_diff_eq!(
        g.br_value_posg(&sigma, &heads, Agent::One).unwrap(),
        1.0,
        epsilon = 1e-12
    );
}

#[test]
fn v_star_examples() {
    let mp = fixture("matching_pennies.json");
    assert_abs_diff_eq!(
        PlanTimeGame::new(&mp)
            .v_star(&Statistic::initial())
            .unwrap(),
        0.0,
        epsilon = 1e-9
    );

    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let fam = g.final_stage_family();
    let mut rng = Lcg64::new(6);
    for _ in 0..5 {
        let sigma = random_statistic(&mut rng, &m, 1);
        assert_abs_diff_eq!(
            g.v_star(&sigma).unwrap(),
            family_value(&fam, sigma.dist()).unwrap(),
            epsilon = 1e-9
        );
    }
}

#[test]
fn tiger_v_star_matches_full_game_flatten() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let p1 = pure(&m, Agent::One, 0);
    let p2 = pure(&m, Agent::Two, 0);
    let rows = p1
        .iter()
        .map(|a| p2.iter().map(|b| brute_return(&m, a, b)).collect())
        .collect();
    let want = solve_matrix_game(&MatrixGame::new(rows).unwrap())
        .unwrap()
        .value;
    assert_abs_diff_eq!(
        g.v_star(&Statistic::initial()).unwrap(),
        want,
        epsilon = 1e-9
    );
}

#[test]
fn q_star_final_stage_is_q_bg() {
    let m = fixture("matching_pennies.json");
    let g = PlanTimeGame::new(&m);
    let rule = uniform_joint(&m, 0);
    assert_abs_diff_eq!(
        g.q_star_statistic(&Statistic::initial(), &rule).unwrap(),
        0.0,
        epsilon = 1e-12
    );

    let t = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&t);
    let fam = g.final_stage_family();
    let mut rng = Lcg64::new(9);
    let sigma = random_statistic(&mut rng, &t, 1);
    let rule = random_joint(&mut rng, &t, 1);
    let game = fam.with_sigma(sigma.dist().clone()).unwrap();
    let want = q_bg(
        &game,
        &DecisionRule::new(
            Agent::One,
            0,
            rule.one.rows().map(<[f64]>::to_vec).collect(),
        )
        .unwrap(),
        &DecisionRule::new(
            Agent::Two,
            0,
            rule.two.rows().map(<[f64]>::to_vec).collect(),
        )
        .unwrap(),
    )
    .unwrap();
    assert_abs_diff_eq!(
        g.q_star_statistic(&sigma, &rule).unwrap(),
        want,
        epsilon = 1e-12
    );
}

#[test]
fn tiger_q_star_matches_fixed_prefix_oracle() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let mut rng = Lcg64::new(12);
    for _ in 0..3 {
        let d0 = random_joint(&mut rng, &m, 0);
        let tails1 = pure(&m, Agent::One, 1);
        let tails2 = pure(&m, Agent::Two, 1);
        let rows = tails1
            .iter()
            .map(|a| {
                let full1 = prefix_policy(Agent::One, std::slice::from_ref(&d0.one), a);
                tails2
                    .iter()
                    .map(|b| {
                        brute_return(
                            &m,
                            &full1,
                            &prefix_policy(Agent::Two, std::slice::from_ref(&d0.two), b),
                        )
                    })
                    .collect()
            })
            .collect();
        let want = solve_matrix_game(&MatrixGame::new(rows).unwrap())
            .unwrap()
            .value;
        let got = g.q_star_statistic(&Statistic::initial(), &d0).unwrap();
        assert_abs_diff_eq!(got, want, epsilon = 1e-9);
        let via_pjp = g.q_star_pjp(&PastJointPolicy::empty(), &d0).unwrap();
        assert_abs_diff_eq!(got, via_pjp, epsilon = 1e-12);
    }
}

#[test]
fn rational_rules_matching_pennies_are_uniform() {
    let m = fixture("matching_pennies.json");
    let g = PlanTimeGame::new(&m);
    let rule = g.rational_stage_rules(&Statistic::initial()).unwrap();
    for p in rule.one.row(0).iter().chain(rule.two.row(0)) {
        assert_abs_diff_eq!(*p, 0.5, epsilon = 1e-9);
    }
}

#[test]
fn rational_rules_follow_dominance() {
    let mut tables = fixture("matching_pennies.json").tables();
    tables.reward = vec![vec![vec![3.0, 2.0], vec![1.0, 0.0]]];
    let m = PosgModel::new(tables).unwrap();
    let g = PlanTimeGame::new(&m);
    let rule = g.rational_stage_rules(&Statistic::initial()).unwrap();
    assert_eq!(rule.one.row(0), &[1.0, 0.0]);
    assert_eq!(rule.two.row(0), &[0.0, 1.0]);
}

#[test]
fn tiger_rational_policies_are_unexploitable() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let sigma = Statistic::initial();
    let rp = g.rational_policies(&sigma).unwrap();
    let ex = g.exploitability(&sigma, &rp.one, &rp.two).unwrap();
    let v = g.v_star(&sigma).unwrap();
    assert!(ex.gap() <= 1e-6, "gap {}", ex.gap());
    assert!(ex.br2 - 1e-6 <= v && v <= ex.br1 + 1e-6);
    assert_abs_diff_eq!(ex.value, v, epsilon = 1e-6);
    // saddle consistency through the ν-vector path
    assert_abs_diff_eq!(
        g.br_value_posg(&sigma, &rp.two, Agent::One).unwrap(),
        v,
        epsilon = 1e-6
    );
    assert_abs_diff_eq!(
        g.br_value_posg(&sigma, &rp.one, Agent::Two).unwrap(),
        v,
        epsilon = 1e-6
    );
}

#[test]
fn f32_pipeline_runs() {
    let bytes = std::fs::read(fixture_path("competitive_tiger.json")).unwrap();
    let m32: PosgModel<f32> = posgkit_core::model::load_posg(&bytes).unwrap();
    let v32 = PlanTimeGame::new(&m32)
        .v_star(&Statistic::initial())
        .unwrap();
    let m = fixture("competitive_tiger.json");
    let v64 = PlanTimeGame::new(&m).v_star(&Statistic::initial()).unwrap();
    assert!((v32 as f64 - v64).abs() < 1e-4);
}
