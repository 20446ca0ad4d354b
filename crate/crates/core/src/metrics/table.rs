use std::path::Path;

use super::{write_file_atomic, EpochMetrics};
use crate::error::{Error, Result};
use crate::tasks::Task;

pub const CSV_HEADER: [&str; 13] = [
    "task",
    "sub_env",
    "epoch",
    "cum_reward",
    "crashes",
    "bad_decisions",
    "food_collected",
    "steps_used",
    "avg_steps_per_food",
    "prey_seen",
    "prey_seen_close",
    "max_consecutive",
    "catches",
];

fn row(m: &EpochMetrics) -> [String; 13] {
    [
        m.task.number().to_string(),
        m.sub_environment.clone().unwrap_or_default(),
        m.epoch_index.to_string(),
        m.cumulative_reward.to_string(),
        m.crashes.to_string(),
        m.bad_decisions.to_string(),
        m.food_collected.to_string(),
        m.steps_used.to_string(),
        m.avg_steps_per_food.map(|v| v.to_string()).unwrap_or_default(),
        m.prey_seen_steps.to_string(),
        m.prey_seen_close_steps.to_string(),
        m.max_consecutive_seen.to_string(),
        m.catches.to_string(),
    ]
}

/// Renders the metrics table. `f64` fields use the shortest decimal form
/// that reads back to the same value.
pub fn csv_string(records: &[EpochMetrics]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::Input("no metrics records to write".into()));
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Csv(e.to_string());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for m in records {
        w.write_record(row(m)).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes the metrics table atomically. Nothing is created for an empty list.
pub fn write_csv(records: &[EpochMetrics], dest: &Path) -> Result<()> {
    let text = csv_string(records)?;
    write_file_atomic(dest, text.as_bytes())
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| {
        Error::Csv(format!(
            "line {line}: cannot parse `{}` value `{raw}`",
            CSV_HEADER[idx]
        ))
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<EpochMetrics>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Csv(e.to_string()))?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Csv("unexpected header".into()));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        let task_no: u8 = field(&rec, 0, line)?;
        let task = Task::try_from(task_no).map_err(|e| Error::Csv(format!("line {line}: {e}")))?;
        let sub_env = rec.get(1).unwrap_or("");
        let avg = rec.get(8).unwrap_or("");
        out.push(EpochMetrics {
            task,
            sub_environment: (!sub_env.is_empty()).then(|| sub_env.to_owned()),
            epoch_index: field(&rec, 2, line)?,
            cumulative_reward: field(&rec, 3, line)?,
            crashes: field(&rec, 4, line)?,
            bad_decisions: field(&rec, 5, line)?,
            food_collected: field(&rec, 6, line)?,
            steps_used: field(&rec, 7, line)?,
            avg_steps_per_food: if avg.is_empty() { None } else { Some(field(&rec, 8, line)?) },
            prey_seen_steps: field(&rec, 9, line)?,
            prey_seen_close_steps: field(&rec, 10, line)?,
            max_consecutive_seen: field(&rec, 11, line)?,
            catches: field(&rec, 12, line)?,
        });
    }
    Ok(out)
}

pub fn read_csv(path: &Path) -> Result<Vec<EpochMetrics>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(i: usize) -> EpochMetrics {
        EpochMetrics {
            task: Task::ObstacleAvoidance,
            epoch_index: i,
            sub_environment: Some("walls".into()),
            cumulative_reward: -12.5 + i as f64 * 0.1,
            crashes: 3,
            bad_decisions: 7,
            food_collected: 0,
            steps_used: 1000,
            avg_steps_per_food: None,
            prey_seen_steps: 0,
            prey_seen_close_steps: 0,
            max_consecutive_seen: 0,
            catches: 0,
        }
    }

    #[test]
    fn header_is_fixed() {
        let text = csv_string(&[sample(0)]).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "task,sub_env,epoch,cum_reward,crashes,bad_decisions,food_collected,steps_used,avg_steps_per_food,prey_seen,prey_seen_close,max_consecutive,catches"
        );
        assert_eq!(text.lines().nth(1).unwrap(), "1,walls,0,-12.5,3,7,0,1000,,0,0,0,0");
    }

    #[test]
    fn fifteen_rows() {
        let recs: Vec<_> = (0..15).map(sample).collect();
        let text = csv_string(&recs).unwrap();
        assert_eq!(text.lines().count(), 16);
        assert_eq!(parse_csv(&text).unwrap(), recs);
    }

    #[test]
    fn empty_records_create_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        assert!(write_csv(&[], &path).is_err());
        assert!(!path.exists());
    }

    #[test]
    fn repeated_writes_identical() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.csv");
        let b = dir.path().join("b.csv");
        let recs: Vec<_> = (0..4).map(sample).collect();
        write_csv(&recs, &a).unwrap();
        write_csv(&recs, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }
}
