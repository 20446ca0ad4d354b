use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use robolearn::perception::DiscreteState;
use robolearn::qcore::QTable;
use robolearn::tasks::{
    action_specs, apply_action, is_bad_decision, new_table, reward_for, reward_for_label, step_prey, Action,
    ExperimentConfig, Experiment, PreyMode, PreyPolicy, Task,
};
use robolearn::worldsim::{builtin_map, step_prey_kinematics, WorldState, ACTION_DT};

// Reward tables transcribed by hand, one row per state label.
const OBSTACLE_REWARDS: [(&str, f64); 7] = [
    ("Object Front", -1.0),
    ("Object Left", -1.0),
    ("Object Right", -1.0),
    ("Object Back Left", -1.0),
    ("Object Back Right", -1.0),
    ("Object Back Left & Back Right", -1.0),
    ("Nothing Detected", 1.0),
];

const FORAGING_REWARDS: [(&str, f64); 12] = [
    ("Target Far Left", 5.0),
    ("Target Far Center", 5.0),
    ("Target Far Right", 5.0),
    ("Target Close Left", 10.0),
    ("Target Close Center", 10.0),
    ("Target Close Right", 10.0),
    ("Object Front", -10.0),
    ("Object Left", -10.0),
    ("Object Right", -10.0),
    ("Nothing Detected but last seen Left", -1.0),
    ("Nothing Detected but last seen Right", -1.0),
    ("Nothing Detected", -5.0),
];

const PREDATOR_REWARDS: [(&str, f64); 12] = [
    ("Target Far Left", 5.0),
    ("Target Far Center", 5.0),
    ("Target Far Right", 5.0),
    ("Target Close Left", 10.0),
    ("Target Close Center", 20.0),
    ("Target Close Right", 10.0),
    ("Object Front", -10.0),
    ("Object Left", -10.0),
    ("Object Right", -10.0),
    ("Nothing Detected but last seen Left", -10.0),
    ("Nothing Detected but last seen Right", -10.0),
    ("Nothing Detected", -10.0),
];

fn table_for(task: Task) -> &'static [(&'static str, f64)] {
    match task {
        Task::ObstacleAvoidance => &OBSTACLE_REWARDS,
        Task::Foraging => &FORAGING_REWARDS,
        Task::PredatorPrey => &PREDATOR_REWARDS,
    }
}

#[test]
fn reward_tables_are_exact() {
    let mut checked = 0;
    for task in Task::ALL {
        let rows = table_for(task);
        let mut labels: Vec<_> = rows.iter().map(|(l, _)| *l).collect();
        let mut expected_labels = task.state_labels();
        labels.sort_unstable();
        expected_labels.sort_unstable();
        assert_eq!(labels, expected_labels, "{task} state set");
        for &(label, r) in rows {
            assert_eq!(reward_for_label(task, label).unwrap(), r, "{task} / {label}");
            let state = DiscreteState::from_label(label).unwrap();
            assert_eq!(reward_for(task, state).unwrap(), r);
            checked += 1;
        }
    }
    assert_eq!(checked, 31);
    assert!(reward_for_label(Task::ObstacleAvoidance, "Target Far Left").is_err());
    assert!(reward_for_label(Task::Foraging, "Object Back Left").is_err());
    assert!(reward_for_label(Task::PredatorPrey, "nothing detected").is_err());
}

#[test]
fn bad_decisions_match_table() {
    use Action::*;
    use DiscreteState::*;
    let bad: [(DiscreteState, &[Action]); 6] = [
        (ObjectLeft, &[UpLeft, BackLeft]),
        (ObjectRight, &[UpRight, BackRight]),
        (ObjectFront, &[Forwards, UpLeft, UpRight]),
        (ObjectBackLeft, &[Backwards, BackLeft]),
        (ObjectBackRight, &[Backwards, BackRight]),
        (ObjectBackLeftAndBackRight, &[Backwards, BackLeft, BackRight]),
    ];
    for &state in Task::ObstacleAvoidance.states() {
        for &action in Task::ObstacleAvoidance.actions() {
            let expected = bad.iter().any(|(s, acts)| *s == state && acts.contains(&action));
            assert_eq!(is_bad_decision(state, action), expected, "{} / {}", state.label(), action.label());
            assert_eq!(is_bad_decision(state.mirrored(), action.mirrored()), expected, "mirror of {}", state.label());
        }
    }
}

#[test]
fn spin_actions_go_forwards_about_half_the_time() {
    let specs = action_specs(Task::PredatorPrey, None).unwrap();
    for spec in specs.iter().filter(|s| s.action.is_stochastic()) {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 10_000;
        let forwards = (0..n).filter(|_| apply_action(spec, &mut rng) == (1.0, 1.0)).count();
        let rate = forwards as f64 / n as f64;
        assert!((rate - 0.5).abs() <= 0.02, "{}: {rate}", spec.label());
    }
    // fixed actions never touch the stream
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let before = rng.clone();
    for spec in specs.iter().filter(|s| !s.action.is_stochastic()) {
        assert_eq!(apply_action(spec, &mut rng), spec.action.default_command());
    }
    assert_eq!(rng, before);
}

fn prey_trajectory(seed: u64, mode: PreyMode, steps: usize) -> Vec<(f64, f64, f64)> {
    let mut w = WorldState::new(Arc::new(builtin_map("walls").unwrap())).with_prey();
    let policy = PreyPolicy { mode, ..PreyPolicy::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let prey = w.prey.unwrap();
        let d = step_prey(&prey, &w.robot, w.map.edges(), w.body.radius, &policy, &mut rng);
        step_prey_kinematics(&mut w, d.left, d.right, ACTION_DT);
        let p = w.prey.unwrap().pose;
        out.push((p.x, p.y, p.heading));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn prey_is_deterministic_per_seed(seed: u64, flee: bool) {
        let mode = if flee { PreyMode::Flee } else { PreyMode::Wander };
        let a = prey_trajectory(seed, mode, 300);
        let b = prey_trajectory(seed, mode, 300);
        prop_assert_eq!(a, b);
    }
}

fn short(task: Task, epochs: usize, steps: usize, seed: u64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_task(task);
    let mut hp = cfg.hyperparams();
    hp.epochs = epochs;
    hp.steps_per_epoch = steps;
    cfg.hyperparams = Some(hp);
    cfg.seed = seed;
    cfg
}

fn values(t: &QTable) -> Vec<u64> {
    t.rows().flatten().map(|v| v.to_bits()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn epochs_are_internally_consistent(task_n in 1u8..=3, seed in 0u64..1000, steps in 20usize..200) {
        let task = Task::try_from(task_n).unwrap();
        let cfg = short(task, 3, steps, seed);
        let mut exp = Experiment::from_config(cfg.clone(), None).unwrap().with_step_log(true);
        let mut table = new_table(task);
        for o in exp.train(&mut table).unwrap() {
            let m = &o.metrics;
            prop_assert_eq!(o.log.len() as u64, m.steps_used);
            prop_assert!(m.steps_used as usize <= steps);
            if task != Task::Foraging {
                prop_assert_eq!(m.steps_used as usize, steps);
            }
            let total: f64 = o.log.iter().map(|s| s.reward).sum();
            prop_assert!((total - m.cumulative_reward).abs() < 1e-9);
            for s in &o.log {
                prop_assert_eq!(reward_for(task, s.next_state).unwrap(), s.reward);
            }
            // consecutive transitions chain
            for pair in o.log.windows(2) {
                prop_assert_eq!(pair[0].next_state, pair[1].state);
                prop_assert!(!pair[0].terminal);
            }
            let bad = o.log.iter().filter(|s| is_bad_decision(s.state, s.action)).count() as u64;
            prop_assert_eq!(bad, m.bad_decisions);
            if task == Task::Foraging {
                let ended_early = o.log.last().is_some_and(|s| s.terminal);
                prop_assert_eq!(ended_early, m.food_collected as usize >= cfg.food_goal);
            } else {
                prop_assert!(o.log.iter().all(|s| !s.terminal));
            }
        }
    }

    #[test]
    fn evaluation_is_repeatable_and_read_only(task_n in 1u8..=3, seed in 0u64..1000) {
        let task = Task::try_from(task_n).unwrap();
        let cfg = short(task, 2, 150, seed);
        let mut exp = Experiment::from_config(cfg.clone(), None).unwrap();
        let mut table = new_table(task);
        exp.train(&mut table).unwrap();
        let before = values(&table);
        let a = robolearn::tasks::evaluate(&cfg, &table, 2, None).unwrap();
        let b = robolearn::tasks::evaluate(&cfg, &table, 2, None).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(values(&table), before);
        let maps = cfg.map_names().len();
        prop_assert_eq!(a.len(), 2 * maps);
    }
}

#[test]
fn foraging_stops_at_the_goal() {
    // an easy goal is met long before the step budget
    let mut hits = 0;
    for seed in 0..10 {
        let mut cfg = short(Task::Foraging, 1, 3000, seed);
        cfg.food_goal = 1;
        let mut exp = Experiment::from_config(cfg, None).unwrap().with_step_log(true);
        let mut table = new_table(Task::Foraging);
        let o = exp.run_epoch(&mut table, 0, 0, 1.0, true).unwrap();
        if o.metrics.food_collected >= 1 {
            hits += 1;
            assert!(o.log.last().unwrap().terminal);
            assert!((o.metrics.steps_used as usize) < 3000);
            assert_eq!(o.metrics.avg_steps_per_food, Some(o.metrics.steps_used as f64 / o.metrics.food_collected as f64));
        }
    }
    assert!(hits > 0, "random driving never reached a single food item");
}

#[test]
fn curriculum_restarts_exploration_per_map() {
    let mut cfg = short(Task::ObstacleAvoidance, 5, 30, 4);
    cfg.maps = Some(vec!["walls".into(), "obstacles".into(), "maze".into()]);
    cfg.map = None;
    let mut exp = Experiment::from_config(cfg, None).unwrap();
    let mut table = new_table(Task::ObstacleAvoidance);
    let out = exp.train(&mut table).unwrap();
    assert_eq!(out.len(), 15);
    let names = ["walls", "obstacles", "maze"];
    for (i, o) in out.iter().enumerate() {
        assert_eq!(o.metrics.epoch_index, i);
        assert_eq!(o.metrics.sub_environment.as_deref(), Some(names[i / 5]));
    }
    for i in [0, 5, 10] {
        assert_eq!(out[i].epsilon, 0.6);
    }
    for w in out.chunks(5) {
        assert!(w.windows(2).all(|p| p[1].epsilon <= p[0].epsilon));
    }
}
