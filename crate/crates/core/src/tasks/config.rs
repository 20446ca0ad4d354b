use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{PreyPolicy, Task};
use crate::error::{DocumentError, Error, Result};
use crate::perception::PerceptionConfig;
use crate::qcore::Hyperparams;
use crate::worldsim::{builtin_map_source, parse_map, WorldMap};

const TASK1_JSON: &str = include_str!("../../assets/presets/task1.json");
const TASK2_JSON: &str = include_str!("../../assets/presets/task2.json");
const TASK3_JSON: &str = include_str!("../../assets/presets/task3.json");

pub fn builtin_preset_names() -> [&'static str; 3] {
    ["task1.json", "task2.json", "task3.json"]
}

/// Raw JSON of a packaged preset, looked up by file name with or without
/// the `.json` suffix.
pub fn builtin_preset(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".json") {
        "task1" => Some(TASK1_JSON),
        "task2" => Some(TASK2_JSON),
        "task3" => Some(TASK3_JSON),
        _ => None,
    }
}

fn default_food_count() -> usize {
    7
}
fn default_food_goal() -> usize {
    6
}
fn default_catch_distance() -> f64 {
    0.13
}
fn default_crash_threshold() -> f64 {
    0.95
}
fn default_ir_noise() -> f64 {
    0.02
}

/// One experiment as read from a config file. After [`resolve`] every
/// optional field that has a default is filled in.
///
/// [`resolve`]: ExperimentConfig::resolve
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Task,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyperparams: Option<Hyperparams>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_food_count")]
    pub food_count: usize,
    #[serde(default = "default_food_goal")]
    pub food_goal: usize,
    /// Body-to-body gap below which the predator counts a catch, meters.
    #[serde(default = "default_catch_distance")]
    pub catch_distance: f64,
    #[serde(default)]
    pub perception: PerceptionConfig,
    #[serde(default)]
    pub prey: PreyPolicy,
    #[serde(default = "default_crash_threshold")]
    pub crash_threshold: f64,
    #[serde(default)]
    pub ir_noise: bool,
    #[serde(default = "default_ir_noise")]
    pub ir_noise_amplitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub actions: Option<BTreeMap<String, [f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qtable_in: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qtable_out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics_out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for `task` with nothing overridden.
    pub fn for_task(task: Task) -> Self {
        Self {
            task,
            map: None,
            maps: None,
            hyperparams: None,
            seed: 0,
            food_count: default_food_count(),
            food_goal: default_food_goal(),
            catch_distance: default_catch_distance(),
            perception: PerceptionConfig::default(),
            prey: PreyPolicy::default(),
            crash_threshold: default_crash_threshold(),
            ir_noise: false,
            ir_noise_amplitude: default_ir_noise(),
            actions: None,
            qtable_in: None,
            qtable_out: None,
            metrics_out: None,
        }
        .resolve()
    }

    pub fn from_json(source_name: &str, text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config {
            source_name: source_name.to_owned(),
            error: DocumentError::Syntax {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            },
        })?;
        let cfg = cfg.resolve();
        cfg.validate().map_err(|error| Error::Config {
            source_name: source_name.to_owned(),
            error,
        })?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serialization is infallible");
        s.push('\n');
        s
    }

    /// Fills the map list and hyperparameters from the task defaults.
    pub fn resolve(mut self) -> Self {
        if self.maps.is_none() {
            self.maps = Some(match self.map.take() {
                Some(m) => vec![m],
                None => default_maps(self.task),
            });
        }
        self.map = None;
        if self.hyperparams.is_none() {
            self.hyperparams = Some(match self.task {
                Task::ObstacleAvoidance => Hyperparams::obstacle_avoidance(),
                Task::Foraging => Hyperparams::foraging(),
                Task::PredatorPrey => Hyperparams::predator_prey(),
            });
        }
        self
    }

    pub fn map_names(&self) -> Vec<String> {
        match (&self.maps, &self.map) {
            (Some(m), _) => m.clone(),
            (None, Some(m)) => vec![m.clone()],
            (None, None) => default_maps(self.task),
        }
    }

    pub fn hyperparams(&self) -> Hyperparams {
        self.hyperparams.unwrap_or_else(|| self.clone().resolve().hyperparams.unwrap())
    }

    pub fn validate(&self) -> Result<(), DocumentError> {
        let invalid = |field: &str, message: String| DocumentError::Invalid {
            field: field.to_owned(),
            message,
        };
        self.hyperparams()
            .validate()
            .map_err(|e| invalid("hyperparams", e.to_string()))?;
        if self.map_names().is_empty() {
            return Err(invalid("maps", "at least one map is required".into()));
        }
        if self.food_goal > self.food_count {
            return Err(invalid(
                "food_goal",
                format!("{} exceeds food_count {}", self.food_goal, self.food_count),
            ));
        }
        if !(self.catch_distance >= 0.0 && self.catch_distance.is_finite()) {
            return Err(invalid("catch_distance", "must be a non-negative number".into()));
        }
        if !(self.crash_threshold > 0.0 && self.crash_threshold <= 1.0) {
            return Err(invalid("crash_threshold", "must lie in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.ir_noise_amplitude) {
            return Err(invalid("ir_noise_amplitude", "must lie in [0, 1]".into()));
        }
        let p = &self.perception;
        if !(0.0 < p.left_boundary && p.left_boundary <= p.right_boundary && p.right_boundary < 1.0) {
            return Err(invalid("perception", "side boundaries must satisfy 0 < left <= right < 1".into()));
        }
        if !(p.detect_threshold > 0.0 && p.detect_threshold <= 1.0) {
            return Err(invalid("perception.detect_threshold", "must lie in (0, 1]".into()));
        }
        self.prey
            .validate()
            .map_err(|m| invalid("prey", m))?;
        Ok(())
    }
}

fn default_maps(task: Task) -> Vec<String> {
    match task {
        Task::ObstacleAvoidance => vec!["walls".into(), "obstacles".into(), "maze".into()],
        Task::Foraging | Task::PredatorPrey => vec!["walls".into()],
    }
}

/// Loads a map by built-in name or file path, returning the parsed map and
/// its source text. Relative paths resolve against `base`.
pub fn load_map(spec: &str, base: Option<&Path>) -> Result<(WorldMap, String)> {
    let text = match builtin_map_source(spec) {
        Some(src) => src.to_owned(),
        None => {
            let path = match base {
                Some(b) if Path::new(spec).is_relative() => b.join(spec),
                _ => PathBuf::from(spec),
            };
            std::fs::read_to_string(&path).map_err(|e| Error::io(path, e))?
        }
    };
    let map = parse_map(&text).map_err(|error| Error::Map {
        source_name: spec.to_owned(),
        error,
    })?;
    Ok((map, text))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for name in builtin_preset_names() {
            let cfg = ExperimentConfig::from_json(name, builtin_preset(name).unwrap()).unwrap();
            assert!(cfg.maps.is_some());
        }
    }

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json("t", r#"{"task": 2}"#).unwrap();
        assert_eq!(cfg.food_count, 7);
        assert_eq!(cfg.food_goal, 6);
        assert_eq!(cfg.hyperparams.unwrap(), Hyperparams::foraging());
        assert_eq!(cfg.map_names(), ["walls"]);
        let again = ExperimentConfig::from_json("t", &cfg.to_json()).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn bad_configs() {
        assert!(matches!(
            ExperimentConfig::from_json("t", r#"{"task": 2, "food_goal": 9}"#),
            Err(Error::Config { error: DocumentError::Invalid { .. }, .. })
        ));
        assert!(matches!(
            ExperimentConfig::from_json("t", r#"{"task": 5}"#),
            Err(Error::Config { error: DocumentError::Syntax { .. }, .. })
        ));
        assert!(ExperimentConfig::from_json("t", r#"{"task": 1, "bogus": 1}"#).is_err());
    }

    #[test]
    fn map_lookup() {
        let (map, _) = load_map("maze", None).unwrap();
        assert_eq!(map.name, "maze");
        assert!(matches!(load_map("no/such/map.json", None), Err(Error::Io { .. })));
    }
}
