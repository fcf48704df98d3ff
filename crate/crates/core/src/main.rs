use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use policy_game::io::{parse_config, run_batch, BatchOptions, OutputFormat, RunConfig};
use policy_game::model::{steady_state, Calibration, CountryId, WorldState};
use policy_game::scenarios::{scenario_model, sign_suite, Shock};
use policy_game::solver::{classify_matrix, PolicyRule};

#[derive(Parser)]
#[command(name = "policy-game", version, about = "Two-country monetary and fiscal policy games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario in a config file and write outputs.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Horizon for every scenario.
        #[arg(long)]
        horizon: Option<usize>,
        /// Fail on sign-suite violations (binding under default calibration).
        #[arg(long)]
        check: bool,
        #[arg(long, value_enum)]
        format: Option<Format>,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Run the sign suite under the default calibration, or a config's.
    Check {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print long-run positions for each scenario's debt targets.
    Steady { config: PathBuf },
    /// Print the passive-policy spectrum of each scenario.
    Spectrum {
        config: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
    },
}

fn load(path: &PathBuf, horizon: Option<usize>) -> Result<RunConfig, String> {
    let config = parse_config(path).map_err(|e| e.to_string())?;
    let config = match horizon {
        Some(h) => config.with_horizon(h),
        None => config,
    };
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Run { config, out, horizon, check, format, jobs } => {
            let cfg = load(&config, horizon)?;
            let format = match format {
                Some(Format::Csv) => OutputFormat::Csv,
                Some(Format::Json) => OutputFormat::Json,
                None => cfg.output.format,
            };
            let opts = BatchOptions { out: out.unwrap_or_else(|| cfg.output.dir.clone()), check, format, jobs };
            let summary = run_batch(&cfg, &opts).map_err(|e| e.to_string())?;
            for s in &summary.scenarios {
                println!("{:<40} {}", s.name, if s.error.is_some() { "error" } else { "ok" });
            }
            if let Some(suite) = &summary.suite {
                for c in &suite.checks {
                    println!("check ({}) {}: {}", c.label, if c.passed { "pass" } else { "FAIL" }, c.detail);
                }
                if !suite.asserted {
                    println!("checks reported only: calibration differs from the defaults");
                }
            }
            for line in summary.error_lines() {
                eprintln!("{line}");
            }
            println!("manifest {}", summary.manifest.display());
            Ok(ExitCode::from(summary.exit_code as u8))
        }
        Command::Check { config } => {
            let calib = match config {
                Some(path) => load(&path, None)?.calibration,
                None => Calibration::default(),
            };
            let asserted = calib == Calibration::default();
            let checks = sign_suite(&calib);
            for c in &checks {
                println!("({}) {} {}\n    {}", c.label, if c.passed { "pass" } else { "FAIL" }, c.description, c.detail);
            }
            let failed = checks.iter().any(|c| !c.passed);
            if !asserted {
                println!("checks reported only: calibration differs from the defaults");
            }
            Ok(if failed && asserted { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
        Command::Steady { config } => {
            let cfg = load(&config, None)?;
            for s in &cfg.scenarios {
                let b = s.calibration.b_bar;
                let mut targets = [b, b];
                if let Shock::DebtTarget { country, delta } = s.shock {
                    targets[country as usize] -= delta;
                }
                match steady_state(&s.calibration, s.regime, targets) {
                    Ok(w) => print_steady(&s.name, &w),
                    Err(e) => println!("{}: {e}", s.name),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Spectrum { config, horizon } => {
            let cfg = load(&config, horizon)?;
            for s in &cfg.scenarios {
                let report = scenario_model(s).map_err(|e| e.to_string()).and_then(|m| {
                    let a = PolicyRule::passive(&m).closed_loop(&m).map_err(|e| e.to_string())?;
                    classify_matrix(&a, m.n_jump, s.solver.unit_circle_tol).map_err(|e| e.to_string())
                });
                match report {
                    Ok(r) => {
                        let top: Vec<String> = r.eigenvalues.iter().take(6).map(|m| format!("{m:.6}")).collect();
                        println!(
                            "{:<40} {:?}: {} unstable, {} jumps; largest moduli {}",
                            s.name, r.classification, r.n_unstable, r.n_jump, top.join(" ")
                        );
                    }
                    Err(e) => println!("{:<40} error: {e}", s.name),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_steady(name: &str, w: &WorldState) {
    println!("{name}");
    for c in CountryId::BOTH {
        let s = w.country(c);
        println!("  {:<8} r {:+.6}  b {:.6}  f {:+.6}  w {:.6}  g {:+.6}", c.label(), s.r_real, s.b, s.f, s.w, s.g);
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
