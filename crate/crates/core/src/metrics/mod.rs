//! Per-epoch counters behind every chart, with CSV and SVG writers.

mod chart;
mod table;

use std::path::Path;

use crate::error::{Error, Result};
use crate::perception::DiscreteState;
use crate::tasks::{is_bad_decision, Action, Task};
use crate::worldsim::IrReadings;

pub use chart::{chart_specs, render_chart, render_charts, ChartSpec};
pub use table::{csv_string, parse_csv, read_csv, write_csv, CSV_HEADER};

/// Counters for one epoch (or one evaluation episode).
#[derive(Debug, Clone, PartialEq)]
pub struct EpochMetrics {
    pub task: Task,
    pub epoch_index: usize,
    /// Map name, set only for the multi-map curriculum.
    pub sub_environment: Option<String>,
    pub cumulative_reward: f64,
    pub crashes: u64,
    pub bad_decisions: u64,
    pub food_collected: u64,
    pub steps_used: u64,
    pub avg_steps_per_food: Option<f64>,
    pub prey_seen_steps: u64,
    pub prey_seen_close_steps: u64,
    pub max_consecutive_seen: u64,
    pub catches: u64,
}

/// Things that happened during one step besides the state change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepEvents {
    pub food_eaten: u32,
    /// The predator closed to within the catch distance this step.
    pub caught: bool,
}

/// One step as seen by the recorder.
#[derive(Debug, Clone, Copy)]
pub struct StepRecord<'a> {
    /// State the action was chosen in.
    pub state: DiscreteState,
    pub action: Action,
    pub reward: f64,
    /// State observed after the action.
    pub next_state: DiscreteState,
    /// IR readings observed after the action.
    pub ir: &'a IrReadings,
    pub events: StepEvents,
}

/// Accumulates [`EpochMetrics`] step by step.
#[derive(Debug, Clone)]
pub struct MetricsRecorder {
    metrics: EpochMetrics,
    crash_threshold: f64,
    consecutive: u64,
}

impl MetricsRecorder {
    pub fn new(task: Task, epoch_index: usize, sub_environment: Option<String>, crash_threshold: f64) -> Self {
        Self {
            metrics: EpochMetrics {
                task,
                epoch_index,
                sub_environment,
                cumulative_reward: 0.0,
                crashes: 0,
                bad_decisions: 0,
                food_collected: 0,
                steps_used: 0,
                avg_steps_per_food: None,
                prey_seen_steps: 0,
                prey_seen_close_steps: 0,
                max_consecutive_seen: 0,
                catches: 0,
            },
            crash_threshold,
            consecutive: 0,
        }
    }

    pub fn record_step(&mut self, step: &StepRecord<'_>) {
        let m = &mut self.metrics;
        m.steps_used += 1;
        m.cumulative_reward += step.reward;
        if step.ir.iter().any(|&r| r >= self.crash_threshold) {
            m.crashes += 1;
        }
        if is_bad_decision(step.state, step.action) {
            m.bad_decisions += 1;
        }
        m.food_collected += u64::from(step.events.food_eaten);
        if m.task == Task::PredatorPrey {
            if step.next_state.is_target() {
                m.prey_seen_steps += 1;
                self.consecutive += 1;
                m.max_consecutive_seen = m.max_consecutive_seen.max(self.consecutive);
            } else {
                self.consecutive = 0;
            }
            if step.next_state.is_close_target() {
                m.prey_seen_close_steps += 1;
            }
            if step.events.caught {
                m.catches += 1;
            }
        }
    }

    pub fn current(&self) -> &EpochMetrics {
        &self.metrics
    }

    pub fn finalize(self) -> EpochMetrics {
        let mut m = self.metrics;
        m.avg_steps_per_food = (m.food_collected > 0).then(|| m.steps_used as f64 / m.food_collected as f64);
        m
    }
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_file_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use DiscreteState::*;

    fn step(state: DiscreteState, action: Action, next: DiscreteState, ir: &IrReadings) -> StepRecord<'_> {
        StepRecord {
            state,
            action,
            reward: 1.0,
            next_state: next,
            ir,
            events: StepEvents::default(),
        }
    }

    #[test]
    fn bad_decision_counted() {
        let ir = [0.0; 8];
        let mut rec = MetricsRecorder::new(Task::ObstacleAvoidance, 0, None, 0.95);
        rec.record_step(&step(ObjectLeft, Action::UpLeft, ObjectLeft, &ir));
        rec.record_step(&step(ObjectLeft, Action::UpRight, NothingDetected, &ir));
        assert_eq!(rec.current().bad_decisions, 1);
    }

    #[test]
    fn crash_threshold() {
        let mut ir = [0.0; 8];
        ir[6] = 0.97;
        let mut rec = MetricsRecorder::new(Task::ObstacleAvoidance, 0, None, 0.95);
        rec.record_step(&step(NothingDetected, Action::Forwards, ObjectBackLeft, &ir));
        ir[6] = 0.94;
        rec.record_step(&step(NothingDetected, Action::Forwards, ObjectBackLeft, &ir));
        assert_eq!(rec.current().crashes, 1);
    }

    #[test]
    fn consecutive_sightings() {
        let ir = [0.0; 8];
        let mut rec = MetricsRecorder::new(Task::PredatorPrey, 0, None, 0.95);
        let seq = [
            NothingDetected,
            NothingDetected,
            TargetFarLeft,
            TargetCloseCenter,
            TargetFarCenter,
            NothingLastSeenLeft,
            TargetFarLeft,
        ];
        for s in seq {
            rec.record_step(&step(NothingDetected, Action::Forwards, s, &ir));
        }
        let m = rec.finalize();
        assert_eq!(m.max_consecutive_seen, 3);
        assert_eq!(m.prey_seen_steps, 4);
        assert_eq!(m.prey_seen_close_steps, 1);
    }

    #[test]
    fn average_steps_per_food() {
        let ir = [0.0; 8];
        let mut rec = MetricsRecorder::new(Task::Foraging, 0, None, 0.95);
        for i in 0..620 {
            let mut s = step(NothingDetected, Action::Forwards, NothingDetected, &ir);
            s.events.food_eaten = u32::from(i % 100 == 99);
            rec.record_step(&s);
        }
        let m = rec.finalize();
        assert_eq!(m.food_collected, 6);
        assert!((m.avg_steps_per_food.unwrap() - 103.333_333_333_333_33).abs() < 1e-9);
        assert_eq!(m.prey_seen_steps, 0);

        let empty = MetricsRecorder::new(Task::Foraging, 0, None, 0.95).finalize();
        assert_eq!(empty.avg_steps_per_food, None);
    }
}
