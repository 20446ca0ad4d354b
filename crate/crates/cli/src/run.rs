use std::path::{Path, PathBuf};

use robolearn::metrics::{csv_string, render_charts, write_file_atomic, EpochMetrics};
use robolearn::qcore::{qtable_from_str, qtable_to_string, QTable};
use robolearn::tasks::{new_table, ExperimentConfig, Experiment};
use robolearn::worldsim::builtin_map_source;

use crate::manifest::{manifest_path_for, sha256_hex, Checksum, Manifest, OutputPaths, RunKind, MANIFEST_VERSION};
use crate::CliError;

/// A fully resolved run: config with absolute map paths, the chosen seed
/// and where each artifact goes.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub kind: RunKind,
    pub config: ExperimentConfig,
    pub episodes: usize,
    pub qtable_in: Option<PathBuf>,
    pub metrics_csv: PathBuf,
    pub qtable_out: Option<PathBuf>,
}

pub struct RunResult {
    pub records: Vec<EpochMetrics>,
    pub manifest_path: PathBuf,
}

/// Built-in map names stay as they are; anything else becomes an absolute
/// path so the manifest can be replayed from any directory.
pub fn canonical_map_specs(names: &[String], base: &Path) -> Result<Vec<String>, CliError> {
    names
        .iter()
        .map(|name| {
            if builtin_map_source(name).is_some() {
                return Ok(name.clone());
            }
            let p = base.join(name);
            std::fs::canonicalize(&p)
                .map(|p| p.to_string_lossy().into_owned())
                .map_err(|e| CliError::Runtime(format!("map {}: {e}", p.display())))
        })
        .collect()
}

fn map_checksums(names: &[String]) -> Result<Vec<Checksum>, CliError> {
    names
        .iter()
        .map(|name| {
            let text = match builtin_map_source(name) {
                Some(src) => src.to_owned(),
                None => std::fs::read_to_string(name).map_err(|e| CliError::Runtime(format!("map {name}: {e}")))?,
            };
            Ok(Checksum {
                name: name.clone(),
                sha256: sha256_hex(text.as_bytes()),
            })
        })
        .collect()
}

fn read_table(path: &Path) -> Result<(QTable, Checksum), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    let table = qtable_from_str(&text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    Ok((
        table,
        Checksum {
            name: path.to_string_lossy().into_owned(),
            sha256: sha256_hex(text.as_bytes()),
        },
    ))
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))
        }
        _ => Ok(()),
    }
}

/// Runs `spec` and writes its CSV, charts, Q-table (train only) and manifest.
pub fn execute(spec: &RunSpec) -> Result<RunResult, CliError> {
    let names = spec.config.map_names();
    let maps = map_checksums(&names)?;
    let loaded = spec.qtable_in.as_deref().map(read_table).transpose()?;
    let mut exp = Experiment::from_config(spec.config.clone(), None)?;

    let (records, trained) = match spec.kind {
        RunKind::Train => {
            let mut table = match &loaded {
                Some((t, _)) => t.clone(),
                None => new_table(spec.config.task),
            };
            let outcomes = exp.train(&mut table)?;
            (outcomes.into_iter().map(|o| o.metrics).collect::<Vec<_>>(), Some(table))
        }
        RunKind::Eval => {
            let (table, _) = loaded
                .as_ref()
                .ok_or_else(|| CliError::Usage("eval needs --qtable-in".into()))?;
            let outcomes = exp.evaluate(table, spec.episodes)?;
            (outcomes.into_iter().map(|o| o.metrics).collect(), None)
        }
    };

    ensure_parent(&spec.metrics_csv)?;
    let csv = csv_string(&records)?;
    write_file_atomic(&spec.metrics_csv, csv.as_bytes())?;
    let dir = spec.metrics_csv.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let stem = spec.metrics_csv.file_stem().and_then(|s| s.to_str()).unwrap_or("metrics");
    let charts = render_charts(&records, spec.config.task, dir, stem)?;

    let qtable = match (trained, &spec.qtable_out) {
        (Some(table), Some(path)) => {
            ensure_parent(path)?;
            write_file_atomic(path, qtable_to_string(&table).as_bytes())?;
            Some(path.clone())
        }
        _ => None,
    };

    let manifest = Manifest {
        format_version: MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        command: spec.kind,
        seed: spec.config.seed,
        episodes: (spec.kind == RunKind::Eval).then_some(spec.episodes),
        config: spec.config.clone(),
        maps,
        qtable_in: loaded.map(|(_, c)| c),
        outputs: OutputPaths {
            metrics_csv: spec.metrics_csv.clone(),
            qtable,
            charts,
        },
    };
    let manifest_path = manifest_path_for(&spec.metrics_csv);
    write_file_atomic(&manifest_path, manifest.to_json().as_bytes())?;
    Ok(RunResult { records, manifest_path })
}

/// First line where two texts differ, 1-based, or `None` when equal.
pub fn first_difference(a: &str, b: &str) -> Option<usize> {
    let mut la = a.lines();
    let mut lb = b.lines();
    let mut n = 0;
    loop {
        n += 1;
        match (la.next(), lb.next()) {
            (None, None) => return if a == b { None } else { Some(n) },
            (x, y) if x != y => return Some(n),
            _ => {}
        }
    }
}

/// Re-executes a manifest in a scratch directory and compares outputs.
pub fn replay(path: &Path) -> Result<String, CliError> {
    let manifest = Manifest::load(path)?;
    let mut config = manifest.config.clone();
    config.seed = manifest.seed;

    let current = map_checksums(&config.map_names())?;
    for (old, new) in manifest.maps.iter().zip(&current) {
        if old != new {
            return Err(CliError::Runtime(format!("map `{}` changed since the run (checksum mismatch)", old.name)));
        }
    }
    let qtable_in = match &manifest.qtable_in {
        Some(c) => {
            let p = PathBuf::from(&c.name);
            let (_, now) = read_table(&p)?;
            if now.sha256 != c.sha256 {
                return Err(CliError::Runtime(format!("input Q-table {} changed since the run", c.name)));
            }
            Some(p)
        }
        None => None,
    };

    let scratch = tempfile::tempdir().map_err(|e| CliError::Runtime(format!("temporary directory: {e}")))?;
    let spec = RunSpec {
        kind: manifest.command,
        config,
        episodes: manifest.episodes.unwrap_or(1),
        qtable_in,
        metrics_csv: scratch.path().join("metrics.csv"),
        qtable_out: manifest.outputs.qtable.as_ref().map(|_| scratch.path().join("qtable.json")),
    };
    execute(&spec)?;

    let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())));
    let original = read(&manifest.outputs.metrics_csv)?;
    let rerun = read(&spec.metrics_csv)?;
    if let Some(line) = first_difference(&original, &rerun) {
        let row = line.saturating_sub(1);
        return Err(CliError::Runtime(format!(
            "replay diverged: metrics differ first at data row {row} (line {line})\n  recorded: {}\n  replayed: {}",
            original.lines().nth(line - 1).unwrap_or("<missing>"),
            rerun.lines().nth(line - 1).unwrap_or("<missing>")
        )));
    }
    if let (Some(orig), Some(new)) = (&manifest.outputs.qtable, &spec.qtable_out) {
        if read(orig)?.as_bytes() != read(new)?.as_bytes() {
            return Err(CliError::Runtime("replay diverged: Q-table differs".into()));
        }
    }
    Ok(format!(
        "replay of {} matches ({} rows)",
        path.display(),
        rerun.lines().count().saturating_sub(1)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn difference_lines() {
        assert_eq!(first_difference("a\nb\n", "a\nb\n"), None);
        assert_eq!(first_difference("a\nb\n", "a\nc\n"), Some(2));
        assert_eq!(first_difference("a\n", "a\nb\n"), Some(2));
    }
}
