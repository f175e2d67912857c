use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use starbf_core::controllers::Scheme;
use starbf_core::env::RisMode;

use crate::error::{Error, Result};
use crate::train::RunRecord;

/// Column order of `metrics.csv`.
pub const CSV_HEADER: [&str; 8] = ["scheme", "ris_mode", "elements", "seed", "episode", "reward", "power_w", "satisfied"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scheme: Scheme,
    pub ris_mode: RisMode,
    pub elements: usize,
    pub seed: u64,
    pub episodes: usize,
    /// Mean of the first 10% of episodes.
    pub initial_reward: f64,
    /// Mean of the last 10% of episodes.
    pub converged_reward: f64,
    pub converged_power: f64,
    pub converged_satisfied: f64,
    pub actor_params: usize,
    pub critic_params: usize,
    pub dqn_params: Option<usize>,
    pub multiplies_per_step: usize,
    pub wall_clock_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub runs: Vec<RunSummary>,
}

impl From<&RunRecord> for RunSummary {
    fn from(r: &RunRecord) -> Self {
        Self {
            scheme: r.scheme,
            ris_mode: r.ris_mode,
            elements: r.elements,
            seed: r.seed,
            episodes: r.episodes(),
            initial_reward: r.initial_reward(),
            converged_reward: r.converged_reward(),
            converged_power: r.converged_power(),
            converged_satisfied: r.converged_satisfied(),
            actor_params: r.actor_params,
            critic_params: r.critic_params,
            dqn_params: r.dqn_params,
            multiplies_per_step: r.multiplies_per_step,
            wall_clock_s: r.wall_clock_s,
        }
    }
}

/// Writes `metrics.csv`, `summary.json`, `reward.svg` and `power.svg`.
///
/// The CSV has one row per (run, episode) in record order, with no
/// wall-clock column, so it is a pure function of config and seeds.
pub fn emit_outputs(records: &[RunRecord], outdir: &Path) -> Result<Summary> {
    if records.is_empty() {
        return Err(Error::config("records", "nothing to write"));
    }
    std::fs::create_dir_all(outdir).map_err(|e| Error::io(outdir, e))?;

    let csv_path = outdir.join("metrics.csv");
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(CSV_HEADER)?;
    for r in records {
        for e in 0..r.episodes() {
            w.write_record([
                r.scheme.name().to_string(),
                r.ris_mode.name().to_string(),
                r.elements.to_string(),
                r.seed.to_string(),
                (e + 1).to_string(),
                r.rewards[e].to_string(),
                r.powers[e].to_string(),
                r.satisfied[e].to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;

    let summary = Summary {
        runs: records.iter().map(RunSummary::from).collect(),
    };
    write(outdir, "summary.json", serde_json::to_string_pretty(&summary)? + "\n")?;

    let series = |f: fn(&RunRecord) -> &Vec<f64>| -> Vec<(String, Vec<f64>)> {
        records.iter().map(|r| (format!("{} seed {}", r.label(), r.seed), f(r).clone())).collect()
    };
    write(outdir, "reward.svg", render_svg("Mean reward per episode", "reward", &series(|r| &r.rewards)))?;
    write(outdir, "power.svg", render_svg("Mean transmit power per episode", "power (W)", &series(|r| &r.powers)))?;
    Ok(summary)
}

fn write(dir: &Path, name: &str, text: String) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| Error::io(path, e))
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

/// Line chart, one polyline per series. The x axis is the episode number
/// (1-based), the y axis spans the data range of all series.
pub fn render_svg(title: &str, y_label: &str, series: &[(String, Vec<f64>)]) -> String {
    let (width, height) = (760.0, 440.0);
    let (left, right, top, bottom) = (70.0, 230.0, 40.0, 50.0);
    let (pw, ph) = (width - left - right, height - top - bottom);

    let len = series.iter().map(|(_, v)| v.len()).max().unwrap_or(0).max(1);
    let finite = series.iter().flat_map(|(_, v)| v.iter().copied()).filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !(lo <= hi) {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo, hi) = (lo - 1.0, hi + 1.0);
    }
    let x = |i: usize| left + if len > 1 { i as f64 / (len - 1) as f64 * pw } else { pw / 2.0 };
    let y = |v: f64| top + (hi - v) / (hi - lo) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let yy = y(v);
        let _ = writeln!(
            s,
            r##"<line x1="{left}" y1="{yy:.2}" x2="{}" y2="{yy:.2}" stroke="#dddddd"/>"##,
            left + pw
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{:.2}" font-family="sans-serif" font-size="11" text-anchor="end">{}</text>"#,
            left - 6.0,
            yy + 4.0,
            tick(v)
        );
    }
    for k in 0..=4 {
        let i = (len - 1) * k / 4;
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{}" font-family="sans-serif" font-size="11" text-anchor="middle">{}</text>"#,
            x(i),
            top + ph + 16.0,
            i + 1
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">episode</text>"#,
        left + pw / 2.0,
        height - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        top + ph / 2.0,
        top + ph / 2.0,
        escape(y_label)
    );
    for (n, (label, values)) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let points: Vec<String> = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_finite())
            .map(|(i, &v)| format!("{:.2},{:.2}", x(i), y(v)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"><title>{}</title></polyline>"#,
            points.join(" "),
            escape(label)
        );
        let ly = top + 12.0 + 14.0 * n as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="10">{}</text>"#,
            lx + 24.0,
            ly + 3.5,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}
