use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{write_file_atomic, EpochMetrics};
use crate::error::{Error, Result};
use crate::tasks::Task;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 50.0;
const MARGIN_BOTTOM: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// One figure: which value to plot and how to label it.
#[derive(Debug, Clone, Copy)]
pub struct ChartSpec {
    /// File-name suffix.
    pub key: &'static str,
    pub title: &'static str,
    pub y_label: &'static str,
    pub value: fn(&EpochMetrics) -> Option<f64>,
}

/// The figures produced for `task`.
pub fn chart_specs(task: Task) -> Vec<ChartSpec> {
    let cum = |m: &EpochMetrics| Some(m.cumulative_reward);
    match task {
        Task::ObstacleAvoidance => vec![
            ChartSpec {
                key: "crashes",
                title: "Number of crashes per epoch for each of the three maps",
                y_label: "Crashes",
                value: |m| Some(m.crashes as f64),
            },
            ChartSpec {
                key: "bad_decisions",
                title: "Number of wrong actions per epoch for each of the three maps",
                y_label: "Wrong actions",
                value: |m| Some(m.bad_decisions as f64),
            },
            ChartSpec {
                key: "cum_reward",
                title: "Cumulative reward during obstacle avoidance task",
                y_label: "Cumulative reward",
                value: cum,
            },
        ],
        Task::Foraging => vec![
            ChartSpec {
                key: "cum_reward",
                title: "Cumulative reward during food foraging task",
                y_label: "Cumulative reward",
                value: cum,
            },
            ChartSpec {
                key: "food_collected",
                title: "Number of food collected in each epoch",
                y_label: "Food collected",
                value: |m| Some(m.food_collected as f64),
            },
            ChartSpec {
                key: "avg_steps_per_food",
                title: "Average time needed to collect a food",
                y_label: "Steps per food",
                value: |m| m.avg_steps_per_food,
            },
        ],
        Task::PredatorPrey => vec![
            ChartSpec {
                key: "prey_seen",
                title: "How many time steps the prey was seen",
                y_label: "Steps with prey in view",
                value: |m| Some(m.prey_seen_steps as f64),
            },
            ChartSpec {
                key: "prey_seen_close",
                title: "How many time steps the prey was seen closely",
                y_label: "Steps with prey close",
                value: |m| Some(m.prey_seen_close_steps as f64),
            },
            ChartSpec {
                key: "max_consecutive",
                title: "Prey seen consecutively per epoch",
                y_label: "Longest sighting streak",
                value: |m| Some(m.max_consecutive_seen as f64),
            },
            ChartSpec {
                key: "cum_reward",
                title: "Cumulative reward in the predator-prey task",
                y_label: "Cumulative reward",
                value: cum,
            },
        ],
    }
}

struct Series<'a> {
    name: String,
    points: Vec<(f64, f64)>,
    _records: &'a [EpochMetrics],
}

/// Splits records into consecutive runs sharing a sub-environment.
fn series<'a>(records: &'a [EpochMetrics], spec: &ChartSpec) -> Vec<Series<'a>> {
    let mut out: Vec<Series<'a>> = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let env = &records[start].sub_environment;
        let end = records[start..]
            .iter()
            .position(|m| &m.sub_environment != env)
            .map_or(records.len(), |p| start + p);
        let group = &records[start..end];
        let points = group
            .iter()
            .enumerate()
            .filter_map(|(i, m)| (spec.value)(m).map(|v| ((i + 1) as f64, v)))
            .collect();
        out.push(Series {
            name: env.clone().unwrap_or_else(|| "run".into()),
            points,
            _records: group,
        });
        start = end;
    }
    out
}

fn nice_step(range: f64) -> f64 {
    let raw = range / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders one line chart as SVG text.
pub fn render_chart(records: &[EpochMetrics], spec: &ChartSpec) -> String {
    let all = series(records, spec);
    let values: Vec<f64> = all.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if values.is_empty() {
        lo = 0.0;
        hi = 1.0;
    }
    if lo > 0.0 {
        lo = 0.0;
    }
    if hi < 0.0 {
        hi = 0.0;
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let step = nice_step(hi - lo);
    let y_min = (lo / step).floor() * step;
    let y_max = (hi / step).ceil() * step;
    let x_max = all.iter().map(|s| s.points.len()).max().unwrap_or(1).max(2) as f64;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + (x - 1.0) / (x_max - 1.0) * plot_w;
    let sy = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="28" font-size="16" text-anchor="middle">{}</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        escape(spec.title)
    );

    // grid and y ticks
    let ticks = ((y_max - y_min) / step).round() as i64;
    for k in 0..=ticks {
        let v = y_min + k as f64 * step;
        let y = sy(v);
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN_LEFT:.1}" y1="{y:.2}" x2="{:.1}" y2="{y:.2}" stroke="#e0e0e0"/>"##,
            MARGIN_LEFT + plot_w
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"#,
            MARGIN_LEFT - 8.0,
            y + 4.0,
            format_tick(v, step)
        );
    }
    for x in 1..=x_max as usize {
        let px = sx(x as f64);
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.1}" font-size="12" text-anchor="middle">{x}</text>"#,
            MARGIN_TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN_LEFT:.1}" y="{MARGIN_TOP:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">Epoch</text>"#,
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{:.1}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.1})">{}</text>"#,
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape(spec.y_label)
    );

    for (i, s) in all.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            pts.join(" ")
        );
        for &(x, y) in &s.points {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = MARGIN_TOP + 20.0 + i as f64 * 20.0;
        let lx = MARGIN_LEFT + plot_w + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-size="12">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(v: f64, step: f64) -> String {
    if step >= 1.0 {
        format!("{}", v.round() as i64)
    } else {
        let digits = (-step.log10().floor()) as usize;
        format!("{v:.digits$}")
    }
}

/// Writes one SVG per chart of `task` into `dir` as `<stem>_<key>.svg`.
pub fn render_charts(records: &[EpochMetrics], task: Task, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        return Err(Error::Input("no metrics records to chart".into()));
    }
    let mut written = Vec::new();
    for spec in chart_specs(task) {
        let path = dir.join(format!("{stem}_{}.svg", spec.key));
        write_file_atomic(&path, render_chart(records, &spec).as_bytes())?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: usize, env: &str, reward: f64) -> EpochMetrics {
        EpochMetrics {
            task: Task::ObstacleAvoidance,
            epoch_index: i,
            sub_environment: Some(env.into()),
            cumulative_reward: reward,
            crashes: i as u64,
            bad_decisions: 2,
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
    fn one_series_per_map() {
        let recs: Vec<_> = (0..6)
            .map(|i| rec(i, if i < 3 { "walls" } else { "maze" }, i as f64 * 10.0 - 20.0))
            .collect();
        let svg = render_chart(&recs, &chart_specs(Task::ObstacleAvoidance)[2]);
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains(">walls<") && svg.contains(">maze<"));
        assert!(svg.contains("Cumulative reward during obstacle avoidance task"));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn charts_are_deterministic() {
        let recs: Vec<_> = (0..5).map(|i| rec(i, "walls", -3.25 * i as f64)).collect();
        let dir = tempfile::tempdir().unwrap();
        let a = render_charts(&recs, Task::ObstacleAvoidance, dir.path(), "a").unwrap();
        let b = render_charts(&recs, Task::ObstacleAvoidance, dir.path(), "b").unwrap();
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }

    #[test]
    fn missing_values_are_skipped() {
        let mut recs: Vec<_> = (0..3).map(|i| rec(i, "walls", 0.0)).collect();
        for r in &mut recs {
            r.task = Task::Foraging;
            r.sub_environment = None;
        }
        recs[1].avg_steps_per_food = Some(120.0);
        let svg = render_chart(&recs, &chart_specs(Task::Foraging)[2]);
        assert_eq!(svg.matches("<circle").count(), 1);
    }
}
