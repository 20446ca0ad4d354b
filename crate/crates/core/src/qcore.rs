//! Tabular Q-learning: the Q-table controller, the temporal-difference
//! update, epsilon-greedy action selection, the per-epoch epsilon schedule
//! and versioned JSON persistence used to carry a table between maps.

use std::collections::HashSet;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result, TableParseError};

/// Version written to, and required from, every Q-table file.
pub const FORMAT_VERSION: i64 = 1;

/// State-by-action matrix of action values.
///
/// Rows follow `states`, columns follow `actions`; values are stored
/// row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    states: Vec<String>,
    actions: Vec<String>,
    values: Vec<f64>,
}

impl QTable {
    /// An all-zero table over the given labels.
    pub fn zeros<S, A>(states: &[S], actions: &[A]) -> Result<Self>
    where
        S: AsRef<str>,
        A: AsRef<str>,
    {
        let states: Vec<String> = states.iter().map(|s| s.as_ref().to_owned()).collect();
        let actions: Vec<String> = actions.iter().map(|a| a.as_ref().to_owned()).collect();
        check_labels("state", &states)?;
        check_labels("action", &actions)?;
        if states.is_empty() || actions.is_empty() {
            return Err(Error::Input(
                "a q-table needs at least one state and one action".into(),
            ));
        }
        let values = vec![0.0; states.len() * actions.len()];
        Ok(Self {
            states,
            actions,
            values,
        })
    }

    /// Builds a table from explicit rows. Fails on shape mismatch, duplicate
    /// labels or non-finite values.
    pub fn from_rows(states: Vec<String>, actions: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let mut table = Self::zeros(&states, &actions)?;
        if rows.len() != states.len() {
            return Err(TableParseError::Dimension {
                location: "values".into(),
                expected: states.len(),
                found: rows.len(),
            }
            .into());
        }
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != actions.len() {
                return Err(TableParseError::Dimension {
                    location: format!("values[{i}]"),
                    expected: actions.len(),
                    found: row.len(),
                }
                .into());
            }
            for (j, v) in row.into_iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::Input(format!("non-finite value at values[{i}][{j}]")));
                }
                table.set(i, j, v);
            }
        }
        Ok(table)
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.states
            .iter()
            .position(|s| s == label)
            .ok_or_else(|| Error::UnknownState(label.to_owned()))
    }

    pub fn action_index(&self, label: &str) -> Result<usize> {
        self.actions
            .iter()
            .position(|a| a == label)
            .ok_or_else(|| Error::UnknownAction(label.to_owned()))
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.actions.len() + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        let n = self.actions.len();
        self.values[state * n + action] = value;
    }

    pub fn row(&self, state: usize) -> &[f64] {
        let n = self.actions.len();
        &self.values[state * n..(state + 1) * n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.actions.len())
    }

    /// Largest action value in `state`.
    pub fn max_value(&self, state: usize) -> f64 {
        self.row(state).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the largest action value; ties go to the lowest index.
    pub fn greedy_action(&self, state: usize) -> usize {
        let row = self.row(state);
        let mut best = 0;
        for (i, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = i;
            }
        }
        best
    }

    /// True when every label and value matches bit for bit.
    pub fn bit_eq(&self, other: &Self) -> bool {
        self.states == other.states
            && self.actions == other.actions
            && self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

fn check_labels(kind: &'static str, labels: &[String]) -> Result<(), TableParseError> {
    let mut seen = HashSet::new();
    for (index, label) in labels.iter().enumerate() {
        if !seen.insert(label.as_str()) {
            return Err(TableParseError::DuplicateLabel {
                kind,
                label: label.clone(),
                index,
            });
        }
    }
    Ok(())
}

/// Learning parameters for one task.
///
/// `epochs` counts epochs per map; the obstacle-avoidance curriculum runs
/// this many epochs on each of its three maps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_floor: f64,
    pub epsilon_decrement: f64,
    pub epochs: usize,
    #[serde(rename = "steps")]
    pub steps_per_epoch: usize,
}

impl Hyperparams {
    /// Obstacle avoidance: 0.6 down to 0.1, 5 epochs per map, 1000 steps.
    pub fn obstacle_avoidance() -> Self {
        Self {
            alpha: 0.1,
            gamma: 0.9,
            epsilon_start: 0.6,
            epsilon_floor: 0.1,
            epsilon_decrement: 0.1,
            epochs: 5,
            steps_per_epoch: 1000,
        }
    }

    /// Foraging: 1.0 down to 0.1, 10 epochs, 1000 steps.
    pub fn foraging() -> Self {
        Self {
            epsilon_start: 1.0,
            epochs: 10,
            ..Self::obstacle_avoidance()
        }
    }

    /// Predator-prey: 1.0 down to 0.1, 10 epochs, 500 steps.
    pub fn predator_prey() -> Self {
        Self {
            steps_per_epoch: 500,
            ..Self::foraging()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Input(format!("hyperparams: {msg}")));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad("alpha must lie in (0, 1]");
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.epsilon_start) || !(0.0..=1.0).contains(&self.epsilon_floor) {
            return bad("epsilon_start and epsilon_floor must lie in [0, 1]");
        }
        if self.epsilon_floor > self.epsilon_start {
            return bad("epsilon_floor exceeds epsilon_start");
        }
        if !(self.epsilon_decrement >= 0.0 && self.epsilon_decrement.is_finite()) {
            return bad("epsilon_decrement must be a non-negative number");
        }
        if self.epochs == 0 || self.steps_per_epoch == 0 {
            return bad("epochs and steps must be positive");
        }
        Ok(())
    }
}

/// Exploration rate for `epoch_index`: a linear decrement clamped at the floor.
pub fn epsilon_for_epoch(schedule: &Hyperparams, epoch_index: usize) -> Result<f64> {
    if epoch_index >= schedule.epochs {
        return Err(Error::Input(format!(
            "epoch index {epoch_index} out of range for {} epochs",
            schedule.epochs
        )));
    }
    let raw = schedule.epsilon_start - epoch_index as f64 * schedule.epsilon_decrement;
    Ok(raw.max(schedule.epsilon_floor))
}

/// One observed transition, addressed by label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionRecord<'a> {
    pub state: &'a str,
    pub action: &'a str,
    pub reward: f64,
    pub next_state: &'a str,
    pub terminal: bool,
}

fn check_rates(alpha: f64, gamma: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Input(format!("alpha {alpha} outside (0, 1]")));
    }
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Input(format!("gamma {gamma} outside [0, 1)")));
    }
    Ok(())
}

/// Applies one Q-learning update and returns the new value of Q(s, a).
///
/// Q(s,a) <- (1 - alpha) * Q(s,a) + alpha * (r + gamma * max_a' Q(s',a')),
/// with the bootstrap term taken as zero when `rec.terminal` is set.
pub fn q_update(table: &mut QTable, rec: &TransitionRecord<'_>, alpha: f64, gamma: f64) -> Result<f64> {
    let s = table.state_index(rec.state)?;
    let a = table.action_index(rec.action)?;
    let next = table.state_index(rec.next_state)?;
    q_update_indexed(table, s, a, rec.reward, next, rec.terminal, alpha, gamma)
}

/// Index-addressed form of [`q_update`] used inside the training loop.
#[allow(clippy::too_many_arguments)]
pub fn q_update_indexed(
    table: &mut QTable,
    state: usize,
    action: usize,
    reward: f64,
    next_state: usize,
    terminal: bool,
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    check_rates(alpha, gamma)?;
    if !reward.is_finite() {
        return Err(Error::Input(format!("non-finite reward {reward}")));
    }
    if state >= table.num_states() || next_state >= table.num_states() {
        return Err(Error::Input("state index out of range".into()));
    }
    if action >= table.num_actions() {
        return Err(Error::Input("action index out of range".into()));
    }
    let bootstrap = if terminal { 0.0 } else { table.max_value(next_state) };
    let old = table.get(state, action);
    let new = (1.0 - alpha) * old + alpha * (reward + gamma * bootstrap);
    table.set(state, action, new);
    Ok(new)
}

/// Epsilon-greedy choice over the row of `state`.
///
/// With `epsilon == 0` no random numbers are drawn.
pub fn select_action<R: Rng + ?Sized>(table: &QTable, state: usize, epsilon: f64, rng: &mut R) -> Result<usize> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Input(format!("epsilon {epsilon} outside [0, 1]")));
    }
    if state >= table.num_states() {
        return Err(Error::Input("state index out of range".into()));
    }
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        return Ok(rng.random_range(0..table.num_actions()));
    }
    Ok(table.greedy_action(state))
}

/// Label-addressed form of [`select_action`].
pub fn select_action_labeled<'t, R: Rng + ?Sized>(
    table: &'t QTable,
    state: &str,
    epsilon: f64,
    rng: &mut R,
) -> Result<&'t str> {
    let s = table.state_index(state)?;
    let a = select_action(table, s, epsilon, rng)?;
    Ok(&table.actions[a])
}

#[derive(Serialize)]
struct TableFileRef<'a> {
    version: i64,
    states: &'a [String],
    actions: &'a [String],
    values: Vec<&'a [f64]>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    #[allow(dead_code)]
    version: i64,
    states: Vec<String>,
    actions: Vec<String>,
    values: Vec<Vec<f64>>,
}

/// Serializes `table` as a version-1 JSON document.
pub fn qtable_to_string(table: &QTable) -> String {
    let doc = TableFileRef {
        version: FORMAT_VERSION,
        states: &table.states,
        actions: &table.actions,
        values: table.rows().collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("q-table serialization is infallible");
    out.push('\n');
    out
}

pub fn save_qtable<W: Write>(table: &QTable, mut dest: W) -> std::io::Result<()> {
    dest.write_all(qtable_to_string(table).as_bytes())
}

fn syntax(err: serde_json::Error) -> TableParseError {
    TableParseError::Syntax {
        line: err.line(),
        column: err.column(),
        message: err.to_string(),
    }
}

/// Parses a Q-table document. Nothing is returned unless the whole document
/// is valid.
pub fn qtable_from_str(text: &str) -> Result<QTable> {
    let doc: Value = serde_json::from_str(text).map_err(syntax)?;
    match doc.get("version").and_then(Value::as_i64) {
        Some(FORMAT_VERSION) => {}
        Some(found) => {
            return Err(TableParseError::Version {
                found,
                expected: FORMAT_VERSION,
            }
            .into())
        }
        None => {
            return Err(TableParseError::Syntax {
                line: 1,
                column: 1,
                message: "missing integer field `version`".into(),
            }
            .into())
        }
    }
    let file: TableFile = serde_json::from_str(text).map_err(syntax)?;
    check_labels("state", &file.states)?;
    check_labels("action", &file.actions)?;
    QTable::from_rows(file.states, file.actions, file.values)
}

pub fn load_qtable<R: Read>(mut source: R) -> Result<QTable> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| Error::io("<q-table>", e))?;
    qtable_from_str(&text)
}
