//! The three experiments: action sets, reward tables, configuration, the
//! scripted prey and the training/evaluation loops.

mod config;
mod prey;
mod runner;

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perception::{DiscreteState, TARGET_TASK_STATES, TASK1_STATES};

pub use config::{builtin_preset, builtin_preset_names, load_map, ExperimentConfig};
pub use prey::{step_prey, PreyDecision, PreyMode, PreyPolicy};
pub use runner::{evaluate, new_table, run_curriculum_task1, train, EpochOutcome, Experiment, StepLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Task {
    ObstacleAvoidance,
    Foraging,
    PredatorPrey,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::ObstacleAvoidance, Task::Foraging, Task::PredatorPrey];

    pub fn number(self) -> u8 {
        match self {
            Task::ObstacleAvoidance => 1,
            Task::Foraging => 2,
            Task::PredatorPrey => 3,
        }
    }

    pub fn states(self) -> &'static [DiscreteState] {
        match self {
            Task::ObstacleAvoidance => &TASK1_STATES,
            Task::Foraging | Task::PredatorPrey => &TARGET_TASK_STATES,
        }
    }

    pub fn actions(self) -> &'static [Action] {
        use Action::*;
        match self {
            Task::ObstacleAvoidance | Task::Foraging => &[Forwards, UpLeft, UpRight, BackLeft, BackRight, Backwards],
            Task::PredatorPrey => &[
                Forwards,
                UpLeft,
                UpRight,
                Backwards,
                TurnClockwiseOrForwards,
                TurnCounterClockwiseOrForwards,
            ],
        }
    }

    pub fn state_labels(self) -> Vec<&'static str> {
        self.states().iter().map(|s| s.label()).collect()
    }

    pub fn action_labels(self) -> Vec<&'static str> {
        self.actions().iter().map(|a| a.label()).collect()
    }
}

impl TryFrom<u8> for Task {
    type Error = String;
    fn try_from(n: u8) -> Result<Self, String> {
        match n {
            1 => Ok(Task::ObstacleAvoidance),
            2 => Ok(Task::Foraging),
            3 => Ok(Task::PredatorPrey),
            other => Err(format!("task must be 1, 2 or 3, got {other}")),
        }
    }
}

impl From<Task> for u8 {
    fn from(t: Task) -> u8 {
        t.number()
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "task{}", self.number())
    }
}

/// Every named motion across the three tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Forwards,
    UpLeft,
    UpRight,
    BackLeft,
    BackRight,
    Backwards,
    TurnClockwiseOrForwards,
    TurnCounterClockwiseOrForwards,
}

impl Action {
    pub fn label(self) -> &'static str {
        match self {
            Action::Forwards => "Forwards",
            Action::UpLeft => "Up Left",
            Action::UpRight => "Up Right",
            Action::BackLeft => "Back Left",
            Action::BackRight => "Back Right",
            Action::Backwards => "Backwards",
            Action::TurnClockwiseOrForwards => "Turn Around Axis (Clockwise) or Forwards",
            Action::TurnCounterClockwiseOrForwards => "Turn Around Axis (Counter-Clockwise) or Forwards",
        }
    }

    pub fn from_label(label: &str) -> Option<Self> {
        use Action::*;
        [
            Forwards,
            UpLeft,
            UpRight,
            BackLeft,
            BackRight,
            Backwards,
            TurnClockwiseOrForwards,
            TurnCounterClockwiseOrForwards,
        ]
        .into_iter()
        .find(|a| a.label() == label)
    }

    /// Default normalized (left, right) wheel speeds.
    pub fn default_command(self) -> (f64, f64) {
        match self {
            Action::Forwards => (1.0, 1.0),
            Action::UpLeft => (0.3, 1.0),
            Action::UpRight => (1.0, 0.3),
            Action::BackLeft => (-0.3, -1.0),
            Action::BackRight => (-1.0, -0.3),
            Action::Backwards => (-1.0, -1.0),
            Action::TurnClockwiseOrForwards => (1.0, -1.0),
            Action::TurnCounterClockwiseOrForwards => (-1.0, 1.0),
        }
    }

    /// Whether the command is replaced by the forwards command half the time.
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            Action::TurnClockwiseOrForwards | Action::TurnCounterClockwiseOrForwards
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WheelCommand {
    Fixed(f64, f64),
    /// The spin command or, with probability 1/2, the forwards command.
    SpinOrForwards { spin: (f64, f64), forwards: (f64, f64) },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionSpec {
    pub action: Action,
    pub command: WheelCommand,
}

impl ActionSpec {
    pub fn label(&self) -> &'static str {
        self.action.label()
    }
}

/// Builds the action specs of `task`, applying per-label overrides.
pub fn action_specs(task: Task, overrides: Option<&BTreeMap<String, [f64; 2]>>) -> Result<Vec<ActionSpec>> {
    if let Some(map) = overrides {
        if let Some(unknown) = map.keys().find(|k| !task.actions().iter().any(|a| a.label() == k.as_str())) {
            return Err(Error::UnknownAction(unknown.clone()));
        }
        if let Some((k, _)) = map.iter().find(|(_, v)| v.iter().any(|s| !(-1.0..=1.0).contains(s))) {
            return Err(Error::Configuration(format!(
                "action `{k}` wheel speeds must lie in [-1, 1]"
            )));
        }
    }
    let command_of = |a: Action| -> (f64, f64) {
        overrides
            .and_then(|m| m.get(a.label()))
            .map(|v| (v[0], v[1]))
            .unwrap_or_else(|| a.default_command())
    };
    let forwards = command_of(Action::Forwards);
    Ok(task
        .actions()
        .iter()
        .map(|&action| ActionSpec {
            action,
            command: if action.is_stochastic() {
                WheelCommand::SpinOrForwards {
                    spin: command_of(action),
                    forwards,
                }
            } else {
                let (l, r) = command_of(action);
                WheelCommand::Fixed(l, r)
            },
        })
        .collect())
}

/// Resolves an action to a wheel command, drawing from `rng` only for the
/// stochastic actions.
pub fn apply_action<R: Rng + ?Sized>(spec: &ActionSpec, rng: &mut R) -> (f64, f64) {
    match spec.command {
        WheelCommand::Fixed(l, r) => (l, r),
        WheelCommand::SpinOrForwards { spin, forwards } => {
            if rng.random_bool(0.5) {
                forwards
            } else {
                spin
            }
        }
    }
}

/// Reward for arriving in `state` during `task`.
pub fn reward_for(task: Task, state: DiscreteState) -> Result<f64> {
    use DiscreteState::*;
    if !task.states().contains(&state) {
        return Err(Error::UnknownState(state.label().to_owned()));
    }
    let r = match (task, state) {
        (Task::ObstacleAvoidance, NothingDetected) => 1.0,
        (Task::ObstacleAvoidance, _) => -1.0,

        (Task::Foraging, TargetFarLeft | TargetFarCenter | TargetFarRight) => 5.0,
        (Task::Foraging, TargetCloseLeft | TargetCloseCenter | TargetCloseRight) => 10.0,
        (Task::Foraging, ObjectFront | ObjectLeft | ObjectRight) => -10.0,
        (Task::Foraging, NothingLastSeenLeft | NothingLastSeenRight) => -1.0,
        (Task::Foraging, _) => -5.0,

        (Task::PredatorPrey, TargetFarLeft | TargetFarCenter | TargetFarRight) => 5.0,
        (Task::PredatorPrey, TargetCloseLeft | TargetCloseRight) => 10.0,
        (Task::PredatorPrey, TargetCloseCenter) => 20.0,
        (Task::PredatorPrey, _) => -10.0,
    };
    Ok(r)
}

/// Label-addressed form of [`reward_for`].
pub fn reward_for_label(task: Task, label: &str) -> Result<f64> {
    let state = DiscreteState::from_label(label).ok_or_else(|| Error::UnknownState(label.to_owned()))?;
    reward_for(task, state)
}

/// True when `action` taken in `state` turns the robot toward the detected
/// object.
pub fn is_bad_decision(state: DiscreteState, action: Action) -> bool {
    use Action::*;
    use DiscreteState::*;
    match state {
        ObjectLeft => matches!(action, UpLeft | BackLeft),
        ObjectRight => matches!(action, UpRight | BackRight),
        ObjectFront => matches!(action, Forwards | UpLeft | UpRight),
        ObjectBackLeft => matches!(action, Backwards | BackLeft),
        ObjectBackRight => matches!(action, Backwards | BackRight),
        ObjectBackLeftAndBackRight => matches!(action, Backwards | BackLeft | BackRight),
        _ => false,
    }
}

impl Action {
    /// The motion seen in a left-right mirrored world.
    pub fn mirrored(self) -> Self {
        use Action::*;
        match self {
            UpLeft => UpRight,
            UpRight => UpLeft,
            BackLeft => BackRight,
            BackRight => BackLeft,
            TurnClockwiseOrForwards => TurnCounterClockwiseOrForwards,
            TurnCounterClockwiseOrForwards => TurnClockwiseOrForwards,
            other => other,
        }
    }
}
