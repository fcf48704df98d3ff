//! Trajectory, report, plot and gains files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::OutputError;
use crate::model::CountryId;
use crate::scenarios::diagnostics::{named_series, COUNTRY_FIELDS};
use crate::scenarios::{BlockingReport, GainsTable, ScenarioOutcome};
use crate::solver::Trajectory;

use super::config::OutputFormat;

/// One date column, ten per country, then e and z.
pub const TRAJECTORY_COLUMNS: usize = 1 + 2 * COUNTRY_FIELDS.len() + 2;

pub fn trajectory_header() -> Vec<String> {
    let mut h = vec!["t".to_string()];
    for c in CountryId::BOTH {
        h.extend(COUNTRY_FIELDS.iter().map(|(name, _)| format!("{name}_{}", c.label())));
    }
    h.push("e".into());
    h.push("z".into());
    h
}

/// Twelve significant digits.
pub fn format_value(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn trajectory_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    let series = named_series(traj);
    (0..traj.horizon)
        .map(|t| std::iter::once(t as f64).chain(series.iter().map(|(_, x)| x[t])).collect())
        .collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io { path: path.to_path_buf(), source }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), OutputError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(trajectory_header()).expect("in-memory write");
    for (t, row) in trajectory_rows(traj).iter().enumerate() {
        let cells = std::iter::once(t.to_string()).chain(row[1..].iter().map(|v| format_value(*v)));
        w.write_record(cells).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

#[derive(Serialize)]
struct JsonTrajectory<'a> {
    columns: &'a [String],
    rows: &'a [Vec<f64>],
}

pub fn trajectory_json(traj: &Trajectory) -> String {
    let columns = trajectory_header();
    let rows = trajectory_rows(traj);
    to_json_string(&JsonTrajectory { columns: &columns, rows: &rows })
}

pub fn write_trajectory(traj: &Trajectory, path: &Path, format: OutputFormat) -> Result<(), OutputError> {
    let text = match format {
        OutputFormat::Csv => trajectory_csv(traj),
        OutputFormat::Json => trajectory_json(traj),
    };
    write_text(path, &text)
}

/// Reads back a trajectory file written by [`write_trajectory`].
pub fn read_trajectory(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), OutputError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let bad = |message: String| OutputError::Malformed { path: path.to_path_buf(), message };
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        let columns = v["columns"]
            .as_array()
            .ok_or_else(|| bad("missing columns".into()))?
            .iter()
            .map(|c| c.as_str().map(str::to_string).ok_or_else(|| bad("column names must be strings".into())))
            .collect::<Result<Vec<_>, _>>()?;
        let rows = v["rows"]
            .as_array()
            .ok_or_else(|| bad("missing rows".into()))?
            .iter()
            .map(|r| {
                r.as_array()
                    .ok_or_else(|| bad("rows must be arrays".into()))?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| bad("non-numeric cell".into())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        return Ok((columns, rows));
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = reader.headers().map_err(|e| bad(e.to_string()))?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let row = record
            .iter()
            .map(|c| c.parse::<f64>().map_err(|e| bad(format!("row {}: {e}", k + 1))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Writes `<var>.dat` files holding `t value` lines.
pub fn write_plot_data(traj: &Trajectory, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    let mut files = Vec::new();
    for (name, x) in named_series(traj) {
        let mut text = format!("# t {name}\n");
        for (t, v) in x.iter().enumerate() {
            let _ = writeln!(text, "{t} {}", format_value(*v));
        }
        let path = dir.join(format!("{name}.dat"));
        write_text(&path, &text)?;
        files.push(path);
    }
    Ok(files)
}

#[derive(Serialize)]
struct JsonReport<'a> {
    scenario: &'a crate::scenarios::Scenario,
    diagnostics: &'a crate::scenarios::DiagnosticsReport,
    iterations: Option<usize>,
    joint_loss: Option<f64>,
    bargaining: Option<&'a crate::game::BargainingOutcome>,
}

pub fn report_json(outcome: &ScenarioOutcome) -> String {
    let eq = outcome.equilibrium.as_ref();
    to_json_string(&JsonReport {
        scenario: &outcome.scenario,
        diagnostics: &outcome.report,
        iterations: eq.map(|e| e.diagnostics.iterations),
        joint_loss: eq.map(|e| e.joint_loss),
        bargaining: eq.and_then(|e| e.bargaining.as_ref()),
    })
}

pub fn report_text(outcome: &ScenarioOutcome) -> String {
    let s = &outcome.scenario;
    let r = &outcome.report;
    let mut t = String::new();
    let _ = writeln!(t, "scenario   {}", s.name);
    let _ = writeln!(t, "regime     {}{}", s.regime.label(), s.regime.dominant().map(|d| format!(" (dominant {})", d.label())).unwrap_or_default());
    let _ = writeln!(t, "mode       {:?}, independence {}", s.policy_mode, s.independence);
    let _ = writeln!(t, "shock      {:?}", s.shock);
    let _ = writeln!(t, "horizon    {}", s.horizon);
    if let Some(e) = &r.error {
        let _ = writeln!(t, "error      {e}");
        return t;
    }
    let st = &r.stability;
    let _ = writeln!(
        t,
        "stability  {:?}: {} unstable roots, {} jumps, spectral radius {:.6}",
        st.classification, st.n_unstable, st.n_jump, st.spectral_radius()
    );
    let conv = match r.converged.date {
        Some(d) => format!("yes, from date {d}"),
        None => "no".into(),
    };
    let _ = writeln!(t, "converged  {conv} (tolerance {:.0e}){}", r.converged.tolerance, if r.explosive { ", explosive" } else { "" });
    let _ = writeln!(t, "debt gap   home {:.4e}, foreign {:.4e}", r.debt_gap[0], r.debt_gap[1]);
    if !r.losses.is_empty() {
        let _ = writeln!(t, "\nlosses");
        for l in &r.losses {
            let _ = writeln!(t, "  {:<24} {:.6e}", l.name, l.loss);
        }
    }
    let _ = writeln!(t, "\n{:<12} {:>13} {:>13}  reversal", "variable", "short run", "long run");
    for p in &r.sign_pattern {
        let _ = writeln!(t, "{:<12} {:>13.4e} {:>13.4e}  {}", p.variable, p.impact, p.long_run, if p.reversal { "yes" } else { "" });
    }
    t
}

/// Files written for one scenario, relative to the output directory.
pub fn write_outcome(outcome: &ScenarioOutcome, out: &Path, stem: &str, format: OutputFormat, plot: bool) -> Result<Vec<PathBuf>, OutputError> {
    let dir = out.join(stem);
    let mut files = Vec::new();
    if let Some(traj) = &outcome.trajectory {
        let path = dir.join(format!("trajectory.{}", format.extension()));
        write_trajectory(traj, &path, format)?;
        files.push(path);
        if plot {
            files.extend(write_plot_data(traj, &dir.join("plot"))?);
        }
    }
    let json = dir.join("diagnostics.json");
    write_text(&json, &report_json(outcome))?;
    files.push(json);
    let text = dir.join("report.txt");
    write_text(&text, &report_text(outcome))?;
    files.push(text);
    Ok(files.into_iter().map(|p| p.strip_prefix(out).map(Path::to_path_buf).unwrap_or(p)).collect())
}

pub fn gains_csv(table: &GainsTable) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["independence", "name", "nash", "cooperative", "relative_gain"]).expect("in-memory write");
    for r in &table.relative {
        let cells = [r.independence.to_string(), r.name.clone(), format_value(r.nash), format_value(r.cooperative), format_value(r.gain)];
        w.write_record(&cells).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

#[derive(Serialize)]
struct JsonGains<'a> {
    table: &'a GainsTable,
    blocking: Option<&'a BlockingReport>,
    blocking_error: Option<&'a str>,
}

pub fn write_gains(
    table: &GainsTable,
    blocking: Option<&Result<BlockingReport, String>>,
    out: &Path,
    stem: &str,
) -> Result<Vec<PathBuf>, OutputError> {
    let dir = out.join("gains");
    let csv = dir.join(format!("{stem}.csv"));
    write_text(&csv, &gains_csv(table))?;
    let json = dir.join(format!("{stem}.json"));
    let (ok, err) = match blocking {
        Some(Ok(b)) => (Some(b), None),
        Some(Err(e)) => (None, Some(e.as_str())),
        None => (None, None),
    };
    write_text(&json, &to_json_string(&JsonGains { table, blocking: ok, blocking_error: err }))?;
    Ok([csv, json].into_iter().map(|p| p.strip_prefix(out).map(Path::to_path_buf).unwrap_or(p)).collect())
}
