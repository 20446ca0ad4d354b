use std::path::Path;
use std::sync::Arc;

use super::{action_specs, apply_action, load_map, reward_for, step_prey, ActionSpec, ExperimentConfig, Task};
use crate::error::{Error, Result};
use crate::metrics::{EpochMetrics, MetricsRecorder, StepEvents, StepRecord};
use crate::perception::{
    detect_blobs_with, discretize_task1, discretize_task2, discretize_task3, DiscreteState, PerceptionMemory,
};
use crate::qcore::{epsilon_for_epoch, q_update_indexed, select_action, QTable};
use crate::rng::RunStreams;
use crate::worldsim::{
    place_food, read_ir, read_ir_noisy, render_camera, step_kinematics, step_prey_kinematics, ColorLabel,
    IrReadings, WorldMap, WorldState, ACTION_DT,
};

/// All-zero table over the states and actions of `task`.
pub fn new_table(task: Task) -> QTable {
    QTable::zeros(&task.state_labels(), &task.action_labels()).expect("task label sets are non-empty and unique")
}

/// One transition of an epoch, kept when step logging is on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub state: DiscreteState,
    pub action: super::Action,
    pub reward: f64,
    pub next_state: DiscreteState,
    pub terminal: bool,
}

#[derive(Debug, Clone)]
pub struct EpochOutcome {
    pub metrics: EpochMetrics,
    /// Exploration rate the epoch ran with.
    pub epsilon: f64,
    /// Empty unless step logging was enabled.
    pub log: Vec<StepLog>,
}

/// A configured run: maps, action commands and the run's random streams.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    maps: Vec<(String, Arc<WorldMap>)>,
    specs: Vec<ActionSpec>,
    streams: RunStreams,
    record_log: bool,
}

impl Experiment {
    /// Uses already-parsed maps, named as they should appear in the metrics.
    pub fn new(config: ExperimentConfig, maps: Vec<(String, WorldMap)>) -> Result<Self> {
        config
            .validate()
            .map_err(|error| Error::Config {
                source_name: "experiment".into(),
                error,
            })?;
        if maps.is_empty() {
            return Err(Error::Configuration("at least one map is required".into()));
        }
        if config.task == Task::PredatorPrey {
            if let Some((name, _)) = maps.iter().find(|(_, m)| m.prey_start.is_none()) {
                return Err(Error::Configuration(format!("map `{name}` has no prey_start")));
            }
        }
        let specs = action_specs(config.task, config.actions.as_ref())?;
        let streams = RunStreams::new(config.seed);
        Ok(Self {
            config,
            maps: maps.into_iter().map(|(n, m)| (n, Arc::new(m))).collect(),
            specs,
            streams,
            record_log: false,
        })
    }

    /// Loads the configured maps (built-in names or paths relative to `base`).
    pub fn from_config(config: ExperimentConfig, base: Option<&Path>) -> Result<Self> {
        let maps = config
            .map_names()
            .into_iter()
            .map(|name| load_map(&name, base).map(|(m, _)| (name, m)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(config, maps)
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn maps(&self) -> impl Iterator<Item = (&str, &WorldMap)> {
        self.maps.iter().map(|(n, m)| (n.as_str(), m.as_ref()))
    }

    pub fn with_step_log(mut self, on: bool) -> Self {
        self.record_log = on;
        self
    }

    fn tag(&self, map_index: usize) -> Option<String> {
        (self.config.task == Task::ObstacleAvoidance || self.maps.len() > 1).then(|| self.maps[map_index].0.clone())
    }

    /// Checks that `table` covers exactly this task's states and actions and
    /// returns, per task state, its row and, per table column, its action.
    fn bind(&self, table: &QTable) -> Result<(Vec<usize>, Vec<ActionSpec>)> {
        let task = self.config.task;
        if table.num_states() != task.states().len() || table.num_actions() != task.actions().len() {
            return Err(Error::Configuration(format!(
                "Q-table is {}x{}, {task} needs {}x{}",
                table.num_states(),
                table.num_actions(),
                task.states().len(),
                task.actions().len()
            )));
        }
        let rows = task
            .states()
            .iter()
            .map(|s| table.state_index(s.label()))
            .collect::<Result<Vec<_>>>()?;
        let cols = table
            .actions()
            .iter()
            .map(|label| {
                self.specs
                    .iter()
                    .find(|s| s.label() == label)
                    .copied()
                    .ok_or_else(|| Error::UnknownAction(label.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((rows, cols))
    }

    fn sense(&mut self, world: &WorldState) -> IrReadings {
        if self.config.ir_noise {
            read_ir_noisy(world, self.config.ir_noise_amplitude, &mut self.streams.environment)
        } else {
            read_ir(world)
        }
    }

    fn observe(&mut self, world: &WorldState, mem: PerceptionMemory) -> Result<(IrReadings, DiscreteState, PerceptionMemory)> {
        let ir = self.sense(world);
        let cfg = &self.config.perception;
        let (state, mem) = match self.config.task {
            Task::ObstacleAvoidance => (discretize_task1(&ir, cfg)?, mem),
            Task::Foraging => {
                let blobs = detect_blobs_with(&render_camera(world), ColorLabel::Green, cfg.min_blob_pixels);
                discretize_task2(&ir, &blobs, mem, cfg)?
            }
            Task::PredatorPrey => {
                let blobs = detect_blobs_with(&render_camera(world), ColorLabel::Red, cfg.min_blob_pixels);
                discretize_task3(&ir, &blobs, mem, cfg)?
            }
        };
        Ok((ir, state, mem))
    }

    fn reset_world(&mut self, map_index: usize) -> Result<WorldState> {
        let map = Arc::clone(&self.maps[map_index].1);
        let mut world = WorldState::new(Arc::clone(&map));
        match self.config.task {
            Task::Foraging => {
                let food = place_food(&map, self.config.food_count, &mut self.streams.food)?;
                world = world.with_food(&food);
            }
            Task::PredatorPrey => world = world.with_prey(),
            Task::ObstacleAvoidance => {}
        }
        Ok(world)
    }

    /// Runs one epoch on map `map_index`. With `learn` off the table is only
    /// read.
    pub fn run_epoch(
        &mut self,
        table: &mut QTable,
        map_index: usize,
        epoch_index: usize,
        epsilon: f64,
        learn: bool,
    ) -> Result<EpochOutcome> {
        let (rows, cols) = self.bind(table)?;
        let task = self.config.task;
        let hp = self.config.hyperparams();
        let row_of = |s: DiscreteState| rows[task.states().iter().position(|&t| t == s).expect("state belongs to task")];

        let mut world = self.reset_world(map_index)?;
        let mut recorder = MetricsRecorder::new(task, epoch_index, self.tag(map_index), self.config.crash_threshold);
        let mut log = Vec::new();
        let (_, mut state, mut mem) = self.observe(&world, PerceptionMemory::default())?;
        let mut eaten_total = 0usize;
        let mut was_caught = world.prey_gap().is_some_and(|g| g < self.config.catch_distance);

        for step in 0..hp.steps_per_epoch {
            let fault = |detail: String| Error::NumericFault {
                epoch: epoch_index,
                step,
                detail,
            };
            let col = select_action(table, row_of(state), epsilon, &mut self.streams.policy)?;
            let spec = cols[col];
            let (left, right) = apply_action(&spec, &mut self.streams.policy);
            step_kinematics(&mut world, left, right, ACTION_DT);

            let mut events = StepEvents::default();
            if task == Task::Foraging {
                events.food_eaten = world.eat_touching_food();
                eaten_total += events.food_eaten as usize;
            }
            if let Some(prey) = world.prey {
                let d = step_prey(
                    &prey,
                    &world.robot,
                    world.map.edges(),
                    world.body.radius,
                    &self.config.prey,
                    &mut self.streams.prey,
                );
                step_prey_kinematics(&mut world, d.left, d.right, ACTION_DT);
                let close = world.prey_gap().is_some_and(|g| g < self.config.catch_distance);
                events.caught = close && !was_caught;
                was_caught = close;
                if !world.prey.is_some_and(|p| p.pose.is_finite()) {
                    return Err(fault(format!("prey pose became non-finite: {:?}", world.prey)));
                }
            }
            world.tick += 1;
            if !world.robot.is_finite() {
                return Err(fault(format!("robot pose became non-finite: {:?}", world.robot)));
            }

            let (ir, next_state, next_mem) = self.observe(&world, mem)?;
            let reward = reward_for(task, next_state)?;
            let terminal = task == Task::Foraging && eaten_total >= self.config.food_goal;
            if learn {
                let v = q_update_indexed(
                    table,
                    row_of(state),
                    col,
                    reward,
                    row_of(next_state),
                    terminal,
                    hp.alpha,
                    hp.gamma,
                )?;
                if !v.is_finite() {
                    return Err(fault(format!("Q value became {v}")));
                }
            }
            recorder.record_step(&StepRecord {
                state,
                action: spec.action,
                reward,
                next_state,
                ir: &ir,
                events,
            });
            if self.record_log {
                log.push(StepLog {
                    state,
                    action: spec.action,
                    reward,
                    next_state,
                    terminal,
                });
            }
            state = next_state;
            mem = next_mem;
            if terminal {
                break;
            }
        }
        Ok(EpochOutcome {
            metrics: recorder.finalize(),
            epsilon,
            log,
        })
    }

    /// Trains over every map in order, restarting the epsilon schedule on
    /// each map and carrying the table across.
    pub fn train(&mut self, table: &mut QTable) -> Result<Vec<EpochOutcome>> {
        let schedule = self.epsilon_schedule()?;
        let mut out = Vec::with_capacity(schedule.len());
        for (index, (map_index, eps)) in schedule.into_iter().enumerate() {
            out.push(self.run_epoch(table, map_index, index, eps, true)?);
        }
        Ok(out)
    }

    /// (map index, epsilon) for every training epoch in order.
    pub fn epsilon_schedule(&self) -> Result<Vec<(usize, f64)>> {
        let hp = self.config.hyperparams();
        let mut out = Vec::with_capacity(self.maps.len() * hp.epochs);
        for map_index in 0..self.maps.len() {
            for i in 0..hp.epochs {
                out.push((map_index, epsilon_for_epoch(&hp, i)?));
            }
        }
        Ok(out)
    }

    /// Greedy episodes with no learning, `episodes` per map.
    pub fn evaluate(&mut self, table: &QTable, episodes: usize) -> Result<Vec<EpochOutcome>> {
        let mut scratch = table.clone();
        let mut out = Vec::with_capacity(self.maps.len() * episodes);
        for map_index in 0..self.maps.len() {
            for _ in 0..episodes {
                let index = out.len();
                out.push(self.run_epoch(&mut scratch, map_index, index, 0.0, false)?);
            }
        }
        Ok(out)
    }
}

/// Trains `config` from `table` (or a zero table) and returns the final
/// table and one record per epoch.
pub fn train(config: &ExperimentConfig, table: Option<QTable>, base: Option<&Path>) -> Result<(QTable, Vec<EpochMetrics>)> {
    let mut exp = Experiment::from_config(config.clone(), base)?;
    let mut table = table.unwrap_or_else(|| new_table(config.task));
    let outcomes = exp.train(&mut table)?;
    Ok((table, outcomes.into_iter().map(|o| o.metrics).collect()))
}

/// Walls, then obstacles, then maze, one table carried throughout.
pub fn run_curriculum_task1(config: &ExperimentConfig, seed: u64) -> Result<(QTable, Vec<EpochMetrics>)> {
    let mut cfg = config.clone();
    cfg.task = Task::ObstacleAvoidance;
    cfg.seed = seed;
    cfg.maps = Some(vec!["walls".into(), "obstacles".into(), "maze".into()]);
    cfg.map = None;
    train(&cfg, None, None)
}

/// Greedy evaluation of `table` with fresh streams from the config seed.
pub fn evaluate(config: &ExperimentConfig, table: &QTable, episodes: usize, base: Option<&Path>) -> Result<Vec<EpochMetrics>> {
    if episodes == 0 {
        return Err(Error::Input("episodes must be positive".into()));
    }
    let mut exp = Experiment::from_config(config.clone(), base)?;
    Ok(exp.evaluate(table, episodes)?.into_iter().map(|o| o.metrics).collect())
}
