use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::OutputError;
use crate::model::Calibration;
use crate::scenarios::{cooperation_gains, run_scenario, sign_suite, sm_blocking_probe, SignCheck};

use super::config::{file_stem, OutputFormat, RunConfig};
use super::output::{to_json_string, write_gains, write_outcome, write_text};

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub out: PathBuf,
    /// Assert the sign suite; only binding under the default calibration.
    pub check: bool,
    pub format: OutputFormat,
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioEntry {
    pub name: String,
    pub files: Vec<PathBuf>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainsEntry {
    pub scenario: String,
    pub files: Vec<PathBuf>,
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteEntry {
    /// False when a user calibration makes the checks report-only.
    pub asserted: bool,
    pub checks: Vec<SignCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatchSummary {
    pub exit_code: i32,
    pub scenarios: Vec<ScenarioEntry>,
    pub gains: Vec<GainsEntry>,
    pub suite: Option<SuiteEntry>,
    pub manifest: PathBuf,
}

impl BatchSummary {
    /// One line per failure, for the terminal.
    pub fn error_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .scenarios
            .iter()
            .filter_map(|s| s.error.as_ref().map(|e| format!("{}: {e}", s.name)))
            .collect();
        for g in &self.gains {
            lines.extend(g.errors.iter().map(|e| format!("gains {}: {e}", g.scenario)));
        }
        if let Some(suite) = self.suite.as_ref().filter(|s| s.asserted) {
            lines.extend(suite.checks.iter().filter(|c| !c.passed).map(|c| format!("check ({}) failed: {}", c.label, c.detail)));
        }
        lines
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    /// Kept on its own line so the rest can be compared byte for byte.
    generated_unix: u64,
    config: &'a RunConfig,
    format: OutputFormat,
    scenarios: &'a [ScenarioEntry],
    gains: &'a [GainsEntry],
    suite: Option<&'a SuiteEntry>,
    exit_code: i32,
}

pub const MANIFEST_NAME: &str = "manifest.json";

fn execute(config: &RunConfig, opts: &BatchOptions) -> Result<(Vec<ScenarioEntry>, Vec<GainsEntry>, Option<SuiteEntry>), OutputError> {
    let out = &opts.out;
    let plot = config.output.plot_data;
    let scenarios: Vec<ScenarioEntry> = config
        .scenarios
        .par_iter()
        .map(|s| {
            let outcome = run_scenario(s);
            let stem = file_stem(&s.name);
            match write_outcome(&outcome, out, &stem, opts.format, plot) {
                Ok(files) => ScenarioEntry { name: s.name.clone(), files, error: outcome.report.error.clone() },
                Err(e) => ScenarioEntry { name: s.name.clone(), files: Vec::new(), error: Some(e.to_string()) },
            }
        })
        .collect();

    let gains: Vec<GainsEntry> = config
        .gains
        .par_iter()
        .map(|g| {
            let s = config.scenario(&g.scenario).expect("validated gains request");
            let table = cooperation_gains(s);
            let blocking = g.blocking_probe.then(|| sm_blocking_probe(s).map_err(|e| e.to_string()));
            let mut errors: Vec<String> = table
                .cells
                .iter()
                .filter_map(|c| c.error.as_ref().map(|e| format!("{:?} (independence {}): {e}", c.mode, c.independence)))
                .collect();
            if let Some(Err(e)) = &blocking {
                errors.push(format!("blocking probe: {e}"));
            }
            match write_gains(&table, blocking.as_ref(), out, &file_stem(&g.scenario)) {
                Ok(files) => GainsEntry { scenario: g.scenario.clone(), files, errors },
                Err(e) => {
                    errors.push(e.to_string());
                    GainsEntry { scenario: g.scenario.clone(), files: Vec::new(), errors }
                }
            }
        })
        .collect();

    let suite = opts.check.then(|| SuiteEntry {
        asserted: config.calibration == Calibration::default(),
        checks: sign_suite(&config.calibration),
    });
    Ok((scenarios, gains, suite))
}

/// Runs every scenario and gains request, then writes the manifest.
///
/// Individual failures are recorded and reflected in the exit code; only
/// a failure to write the manifest itself aborts.
pub fn run_batch(config: &RunConfig, opts: &BatchOptions) -> Result<BatchSummary, OutputError> {
    std::fs::create_dir_all(&opts.out).map_err(|source| OutputError::Io { path: opts.out.clone(), source })?;
    let (scenarios, gains, suite) = match opts.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build().map_err(|e| OutputError::Io {
                path: opts.out.clone(),
                source: std::io::Error::other(e),
            })?;
            pool.install(|| execute(config, opts))?
        }
        None => execute(config, opts)?,
    };
    let mut summary = BatchSummary { exit_code: 0, scenarios, gains, suite, manifest: opts.out.join(MANIFEST_NAME) };
    summary.exit_code = if summary.error_lines().is_empty() { 0 } else { 1 };
    let generated_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = Manifest {
        generated_unix,
        config,
        format: opts.format,
        scenarios: &summary.scenarios,
        gains: &summary.gains,
        suite: summary.suite.as_ref(),
        exit_code: summary.exit_code,
    };
    write_text(&summary.manifest, &to_json_string(&manifest))?;
    Ok(summary)
}

/// Manifest text with the timestamp line removed.
pub fn manifest_without_timestamp(path: &Path) -> Result<String, OutputError> {
    let text = std::fs::read_to_string(path).map_err(|source| OutputError::Io { path: path.to_path_buf(), source })?;
    Ok(text.lines().filter(|l| !l.trim_start().starts_with("\"generated_unix\"")).collect::<Vec<_>>().join("\n"))
}
