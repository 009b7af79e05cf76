mod common;

use approx::assert_abs_diff_eq;
use common::*;
use posgkit_core::model::{Agent, JointRule, PartialPolicy, PastJointPolicy};
use posgkit_core::oracle::{
    flatten_subgame, lp_minimax, solve_matrix_game, MatrixGame, DEFAULT_PIVOT_CAP,
};
use posgkit_core::posg::{Caps, PlanTimeGame, Statistic};
use posgkit_core::rng::Lcg64;

fn random_matrix(rng: &mut Lcg64, r: usize, c: usize) -> MatrixGame<f64> {
    MatrixGame::new(
        (0..r)
            .map(|_| (0..c).map(|_| rng.uniform(-3.0, 3.0)).collect())
            .collect(),
    )
    .unwrap()
}

#[test]
fn flatten_matching_pennies() {
    let m = fixture("matching_pennies.json");
    let g = PlanTimeGame::new(&m);
    let f = flatten_subgame(&g, &Statistic::initial()).unwrap();
    assert_eq!((f.matrix.rows(), f.matrix.cols()), (2, 2));
    assert_eq!(
        [
            f.matrix.get(0, 0),
            f.matrix.get(0, 1),
            f.matrix.get(1, 0),
            f.matrix.get(1, 1)
        ],
        [1.0, -1.0, -1.0, 1.0]
    );
}

#[test]
fn flatten_constant_reward_is_constant() {
    let m = fixture("constant_reward.json");
    let g = PlanTimeGame::new(&m);
    let f = flatten_subgame(&g, &Statistic::initial()).unwrap();
    for i in 0..f.matrix.rows() {
        for j in 0..f.matrix.cols() {
            assert_abs_diff_eq!(f.matrix.get(i, j), 3.0, epsilon = 1e-12);
        }
    }
}

#[test]
fn tiger_stage_one_cells_match_path_summation() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::new(&m);
    let sigma = g
        .statistic_from_pjp(&PastJointPolicy::new(vec![JointRule::uniform(&m, 0)]).unwrap())
        .unwrap();
    let f = flatten_subgame(&g, &sigma).unwrap();
    assert_eq!((f.matrix.rows(), f.matrix.cols()), (16, 16));
    let (paths, _) = forward_paths(
        &m,
        0,
        initial_paths(&m),
        &PartialPolicy::uniform(&m, Agent::One, 0),
        &PartialPolicy::uniform(&m, Agent::Two, 0),
    );
    for (i, j) in [(0, 0), (7, 11), (15, 3)] {
        let (_, want) = forward_paths(&m, 1, paths[1].clone(), &f.policies1[i], &f.policies2[j]);
        assert_abs_diff_eq!(f.matrix.get(i, j), want, epsilon = 1e-12);
    }
}

#[test]
fn flatten_cap_is_enforced() {
    let m = fixture("competitive_tiger.json");
    let g = PlanTimeGame::with_caps(
        &m,
        Caps {
            policies: 100,
            ..Caps::default()
        },
    );
    assert!(matches!(
        flatten_subgame(&g, &Statistic::initial()),
        Err(posgkit_core::Error::TooLarge { .. })
    ));
}

#[test]
fn self_duality_sweep() {
    let mut rng = Lcg64::new(50);
    for k in 0..50 {
        let g = random_matrix(&mut rng, 1 + k % 6, 1 + (k * 7) % 5);
        let s = solve_matrix_game(&g).unwrap();
        assert!((s.maxmin - s.minmax).abs() <= 1e-9);
        assert!(s.duality_gap.abs() <= 1e-9);
        // best-response certificate
        assert!(g.guarantee_row(&s.row_strategy) >= s.value - 1e-9);
        assert!(g.guarantee_col(&s.col_strategy) <= s.value + 1e-9);
    }
}

#[test]
fn scale_and_shift_equivariance() {
    let mut rng = Lcg64::new(51);
    for _ in 0..10 {
        let g = random_matrix(&mut rng, 4, 3);
        let v = solve_matrix_game(&g).unwrap().value;
        let (alpha, c) = (rng.uniform(0.1, 5.0), rng.uniform(-4.0, 4.0));
        let w = solve_matrix_game(&g.map(|x| alpha * x + c)).unwrap().value;
        assert_abs_diff_eq!(w, alpha * v + c, epsilon = 1e-9);
    }
}

#[test]
fn lp_minimax_matches_pure_bounds() {
    let mut rng = Lcg64::new(52);
    let g = random_matrix(&mut rng, 3, 3);
    let s = lp_minimax(&g, DEFAULT_PIVOT_CAP).unwrap();
    let lower = (0..3)
        .map(|i| (0..3).map(|j| g.get(i, j)).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max);
    let upper = (0..3)
        .map(|j| {
            (0..3)
                .map(|i| g.get(i, j))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    assert!(lower - 1e-12 <= s.value && s.value <= upper + 1e-12);
    assert!(lp_minimax(&g, 0).is_err());
}
