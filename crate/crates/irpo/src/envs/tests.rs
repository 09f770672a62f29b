use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::rollout::NoIntrinsic;
use super::*;

fn corridor3() -> GridSpec {
    load_grid("S.G", 50, 0.99).unwrap()
}

// ------------------------------------------------------------------ load_grid

#[test]
fn open_room_loads() {
    let spec = load_grid("S..\n...\n..G", 10, 0.9).unwrap();
    assert_eq!((spec.width, spec.height), (3, 3));
    assert_eq!(spec.start, (0, 0));
    assert_eq!(spec.goal, (2, 2));
    assert_eq!(spec.free_cells().len(), 9);
}

#[test]
fn enclosed_goal_is_rejected() {
    let text = "S....\n.###.\n.#G#.\n.###.\n.....";
    let err = load_grid(text, 10, 0.9).unwrap_err();
    match err {
        GridError::InvalidMap(v) => {
            assert!(v.iter().any(|m| m.contains("unreachable")), "{v:?}")
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn fourrooms_layout_has_104_free_cells() {
    let spec = maps::load_builtin("fourrooms").unwrap();
    assert_eq!(spec.free_cells().len(), 104);
    assert_eq!((spec.width, spec.height), (13, 13));
    assert_eq!(spec.horizon, 100);
    assert_eq!(spec.gamma, 0.99);
}

#[test]
fn shipped_mazes_load() {
    for name in ["maze-v1", "maze-v2"] {
        let spec = maps::load_builtin(name).unwrap();
        assert_eq!(spec.horizon, 300);
        assert!(spec.free_cells().len() > 50);
    }
}

#[test]
fn map_errors_are_collected_together() {
    // Ragged row, duplicate S, and no G at all.
    let text = "S..\n..\nS..";
    let err = load_grid(text, 10, 0.9).unwrap_err();
    match err {
        GridError::InvalidMap(v) => {
            assert!(v.iter().any(|m| m.contains("ragged")), "{v:?}");
            assert!(v.iter().any(|m| m.contains("duplicate start")), "{v:?}");
            assert!(v.iter().any(|m| m.contains("missing goal")), "{v:?}");
        }
        other => panic!("unexpected error {other:?}"),
    }
}

#[test]
fn parameter_ranges_are_validated() {
    assert!(matches!(
        load_grid("S.G", 0, 0.9),
        Err(GridError::BadParams(_))
    ));
    assert!(matches!(
        load_grid("S.G", 10, 1.0),
        Err(GridError::BadParams(_))
    ));
}

// ----------------------------------------------------------------------- step

#[test]
fn entering_goal_pays_one_and_terminates() {
    let spec = corridor3();
    let state = GridState {
        agent: (1, 0),
        goal: (2, 0),
        t: 3,
    };
    let (next, reward, terminal) = step(&spec, &state, Action::Right).unwrap();
    assert_eq!(next.agent, (2, 0));
    assert_eq!(reward, 1.0);
    assert!(terminal);
}

#[test]
fn walls_and_boundaries_block_motion() {
    let spec = corridor3();
    let state = spec.initial_state();
    let (next, reward, terminal) = step(&spec, &state, Action::Up).unwrap();
    assert_eq!(next.agent, spec.start);
    assert_eq!(reward, 0.0);
    assert!(!terminal);
}

#[test]
fn horizon_truncates_without_reward() {
    let spec = load_grid("S.G", 5, 0.99).unwrap();
    let state = GridState {
        agent: (0, 0),
        goal: (2, 0),
        t: 4,
    };
    let (next, reward, terminal) = step(&spec, &state, Action::Left).unwrap();
    assert_eq!(reward, 0.0);
    assert!(terminal);
    assert_eq!(next.t, 5);
}

#[test]
fn stepping_after_terminal_is_a_contract_violation() {
    let spec = corridor3();
    let at_goal = GridState {
        agent: (2, 0),
        goal: (2, 0),
        t: 2,
    };
    assert!(matches!(
        step(&spec, &at_goal, Action::Left),
        Err(GridError::StepAfterTerminal { at_goal: true, .. })
    ));
}

// -------------------------------------------------------------------- rollout

/// A policy with overwhelming preference for one action.
fn fixed_action_policy(action: usize) -> impl Fn(&[f64]) -> Vec<f64> {
    move |_: &[f64]| {
        let mut logits = vec![-60.0; 4];
        logits[action] = 60.0;
        logits
    }
}

#[test]
fn straight_walk_reaches_goal_with_discounted_return() {
    let spec = corridor3();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut samples = 0;
    let traj = rollout(
        &spec,
        &fixed_action_policy(Action::Right as usize),
        &NoIntrinsic,
        &mut rng,
        &mut samples,
    )
    .unwrap();
    assert_eq!(traj.len(), 2);
    assert_eq!(samples, 2);
    assert!(traj.reached_goal());
    let expect = 0.99f64.powi(1);
    assert!((traj.discounted_return(0.99) - expect).abs() <= 1e-12);
}

#[test]
fn uniform_policy_rarely_solves_large_maze() {
    let spec = maps::load_builtin("maze-v2").unwrap();
    let uniform = |_: &[f64]| vec![0.0; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut samples = 0;
    let mut successes = 0;
    for _ in 0..1000 {
        let traj = rollout(&spec, &uniform, &NoIntrinsic, &mut rng, &mut samples).unwrap();
        if traj.reached_goal() {
            successes += 1;
        }
    }
    assert!(
        (successes as f64) / 1000.0 < 0.05,
        "reach probability {successes}/1000"
    );
}

#[test]
fn empty_intrinsic_set_yields_empty_vectors() {
    let spec = corridor3();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut samples = 0;
    let traj = rollout(
        &spec,
        &fixed_action_policy(Action::Right as usize),
        &NoIntrinsic,
        &mut rng,
        &mut samples,
    )
    .unwrap();
    assert!(traj.transitions.iter().all(|t| t.intrinsic_rewards.is_empty()));
}

// ------------------------------------------------------------------ invariants

#[test]
fn reward_is_sparse_exactly_at_goal_entries() {
    for name in ["fourrooms", "maze-v1", "maze-v2"] {
        let spec = maps::load_builtin(name).unwrap();
        let mut positive = 0;
        let mut expected = 0;
        for (x, y) in spec.free_cells() {
            if (x, y) == spec.goal {
                continue; // terminal cell; no steps originate here
            }
            for action in Action::ALL {
                let state = GridState {
                    agent: (x, y),
                    goal: spec.goal,
                    t: 0,
                };
                let (next, reward, _) = step(&spec, &state, action).unwrap();
                if reward > 0.0 {
                    positive += 1;
                    assert_eq!(next.agent, spec.goal);
                }
                if next.agent == spec.goal {
                    expected += 1;
                }
            }
        }
        assert_eq!(positive, expected, "{name}: rewards only on goal entry");
        assert!(positive > 0);
    }
}

#[test]
fn rollouts_respect_horizon_and_walls() {
    let spec = maps::load_builtin("fourrooms").unwrap();
    let uniform = |_: &[f64]| vec![0.0; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut samples = 0;
    for _ in 0..200 {
        let traj = rollout(&spec, &uniform, &NoIntrinsic, &mut rng, &mut samples).unwrap();
        assert!(traj.len() <= spec.horizon);
        for t in &traj.transitions {
            let cell = spec.cell_of_obs(&t.obs);
            assert!(spec.is_free(cell.0, cell.1), "agent on a wall at {cell:?}");
        }
        assert!(traj.transitions[traj.len() - 1].terminal);
    }
}

// ------------------------------------------------------------------- quad_eval

#[test]
fn quad_eval_examples() {
    let origin = QuadraticObjective::new(vec![0.0, 0.0]);
    let (v, g) = quad_eval(&origin, &[0.0, 0.0]).unwrap();
    assert_eq!((v, g), (0.0, vec![0.0, 0.0]));

    let below = QuadraticObjective::new(vec![0.0, -2.0]);
    let (v, g) = quad_eval(&below, &[0.0, 0.0]).unwrap();
    assert_eq!(v, -4.0);
    assert_eq!(g, vec![0.0, -4.0]);

    let corner = QuadraticObjective::new(vec![2.0, 2.0]);
    let (v, g) = quad_eval(&corner, &[1.0, 1.0]).unwrap();
    assert_eq!(v, -2.0);
    assert_eq!(g, vec![2.0, 2.0]);

    assert!(quad_eval(&corner, &[1.0]).is_err());
}

#[test]
fn quad_gradient_matches_finite_differences() {
    let obj = QuadraticObjective::new(vec![0.7, -1.2, 3.0]);
    let theta = [0.1, 0.2, -0.5];
    let (_, grad) = quad_eval(&obj, &theta).unwrap();
    let h = 1e-6;
    for i in 0..3 {
        let mut plus = theta;
        plus[i] += h;
        let mut minus = theta;
        minus[i] -= h;
        let fd = (quad_eval(&obj, &plus).unwrap().0 - quad_eval(&obj, &minus).unwrap().0)
            / (2.0 * h);
        assert!((fd - grad[i]).abs() <= 1e-9, "{} vs {}", fd, grad[i]);
    }
}

#[test]
fn quad_tape_agrees_with_closed_form() {
    let obj = QuadraticObjective::new(vec![0.0, -2.0]);
    let theta = crate::numerics::ParamVector::new(vec![0.3, 0.4]).unwrap();
    let tape = obj.tape(&theta).unwrap();
    let (value, grad) = quad_eval(&obj, theta.as_slice()).unwrap();
    assert!((tape.output_value()[0] - value).abs() <= 1e-15);
    let g = tape.grad_scalar().unwrap();
    for (a, b) in g.as_slice().iter().zip(grad.iter()) {
        assert!((a - b).abs() <= 1e-15);
    }
}
