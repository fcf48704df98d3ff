//! Run configuration in TOML.
//!
//! The raw file is read into mirror structs that reject unknown keys, then
//! folded into a [`RunConfig`] with every default filled in, so that the
//! echo written to the manifest is self-contained.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::game::{LossDefaults, PlayerId, PolicyMode};
use crate::model::{BehaviorSpec, Calibration, Consumer, CountryId, Expectations, Indexation, RegimeSpec};
use crate::scenarios::{
    BargainingSides, BargainingSpec, Scenario, Shock, SolverSettings, DEFAULT_HORIZON,
};
use crate::scenarios::scenario::{
    DEMAND_SHOCK_PERIODS, DEMAND_SHOCK_SIZE, INFLATION_SHOCK_PERIODS, INFLATION_SHOCK_SIZE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: OutputFormat,
    /// Also write two-column per-variable series for plotting.
    pub plot_data: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: OutputFormat::Csv, plot_data: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsRequest {
    pub scenario: String,
    #[serde(default)]
    pub blocking_probe: bool,
}

/// Fully materialised configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub calibration: Calibration,
    pub losses: LossDefaults,
    pub tolerances: SolverSettings,
    pub output: OutputConfig,
    /// Reserved; every computation is deterministic.
    pub seed: Option<u64>,
    pub scenarios: Vec<Scenario>,
    pub gains: Vec<GainsRequest>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            calibration: Calibration::default(),
            losses: LossDefaults::default(),
            tolerances: SolverSettings::default(),
            output: OutputConfig::default(),
            seed: None,
            scenarios: Vec::new(),
            gains: Vec::new(),
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    calibration: Calibration,
    #[serde(default)]
    losses: LossDefaults,
    #[serde(default)]
    tolerances: SolverSettings,
    #[serde(default)]
    output: OutputConfig,
    seed: Option<u64>,
    #[serde(default)]
    scenario: Vec<RawScenario>,
    #[serde(default)]
    gains: Vec<GainsRequest>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawRegime {
    Flexible,
    Emu,
    SingleMarket,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ShockKind {
    Baseline,
    DebtTarget,
    Demand,
    Inflation,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShock {
    kind: ShockKind,
    country: Option<CountryId>,
    delta: Option<f64>,
    size: Option<f64>,
    duration: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBehavior {
    consumer: Option<Consumer>,
    expectations: Option<Expectations>,
    /// Indexation degree; absent means the calibrated value.
    indexation: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    shock: RawShock,
    regime: RawRegime,
    dominant: Option<CountryId>,
    #[serde(default)]
    behavior: RawBehavior,
    policy_mode: PolicyMode,
    independence: Option<bool>,
    horizon: Option<usize>,
    #[serde(default)]
    passive_players: Vec<PlayerId>,
    stackelberg_leader: Option<PlayerId>,
    bargaining: Option<BargainingSpec>,
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Validation(msg.into())
}

fn shock_of(name: &str, raw: &RawShock) -> Result<Shock, ConfigError> {
    let country = || raw.country.ok_or_else(|| invalid(format!("scenario {name}: shock needs a country")));
    let unused = |field: &str, present: bool| {
        if present {
            Err(invalid(format!("scenario {name}: shock field {field} does not apply to this kind")))
        } else {
            Ok(())
        }
    };
    Ok(match raw.kind {
        ShockKind::Baseline => {
            unused("country", raw.country.is_some())?;
            unused("delta", raw.delta.is_some())?;
            unused("size", raw.size.is_some())?;
            unused("duration", raw.duration.is_some())?;
            Shock::Baseline
        }
        ShockKind::DebtTarget => {
            unused("size", raw.size.is_some())?;
            unused("duration", raw.duration.is_some())?;
            let delta = raw.delta.ok_or_else(|| invalid(format!("scenario {name}: debt_target shock needs delta")))?;
            Shock::DebtTarget { country: country()?, delta }
        }
        ShockKind::Demand => {
            unused("delta", raw.delta.is_some())?;
            Shock::Demand {
                country: country()?,
                size: raw.size.unwrap_or(DEMAND_SHOCK_SIZE),
                duration: raw.duration.unwrap_or(DEMAND_SHOCK_PERIODS),
            }
        }
        ShockKind::Inflation => {
            unused("delta", raw.delta.is_some())?;
            Shock::Inflation {
                country: country()?,
                size: raw.size.unwrap_or(INFLATION_SHOCK_SIZE),
                duration: raw.duration.unwrap_or(INFLATION_SHOCK_PERIODS),
            }
        }
    })
}

fn scenario_of(raw: RawScenario, top: &RawConfig) -> Result<Scenario, ConfigError> {
    let name = raw.name.clone();
    let regime = match (raw.regime, raw.dominant) {
        (RawRegime::Flexible, None) => RegimeSpec::Flexible,
        (RawRegime::Emu, None) => RegimeSpec::Emu,
        (RawRegime::SingleMarket, Some(dominant)) => RegimeSpec::SingleMarket { dominant },
        (RawRegime::SingleMarket, None) => {
            return Err(invalid(format!("scenario {name}: single_market needs a dominant country")))
        }
        (_, Some(_)) => return Err(invalid(format!("scenario {name}: dominant applies to single_market only"))),
    };
    let defaults = BehaviorSpec::default();
    let indexation = match raw.behavior.indexation {
        None => Indexation::Full,
        Some(t) if (0.0..=1.0).contains(&t) => Indexation::Partial(t),
        Some(t) => return Err(invalid(format!("scenario {name}: indexation {t} violates 0 <= indexation <= 1"))),
    };
    let behavior = BehaviorSpec {
        consumer: raw.behavior.consumer.unwrap_or(defaults.consumer),
        expectations: raw.behavior.expectations.unwrap_or(defaults.expectations),
        indexation,
    };
    let mut s = Scenario::new(name.clone(), shock_of(&name, &raw.shock)?, regime, behavior, raw.policy_mode);
    s.independence = raw.independence.unwrap_or(true);
    s.horizon = raw.horizon.unwrap_or(DEFAULT_HORIZON);
    s.calibration = top.calibration;
    s.losses = top.losses;
    s.solver = top.tolerances;
    s.passive_players = raw.passive_players;
    s.stackelberg_leader = raw.stackelberg_leader;
    s.bargaining = raw.bargaining.unwrap_or_default();
    Ok(s)
}

/// Characters safe in a file name; scenario names become directory names.
pub fn file_stem(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

impl RunConfig {
    /// Checks every invariant; no scenario runs unless all pass.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.calibration.validate().map_err(|e| invalid(e.to_string()))?;
        let weights = [self.losses.government, self.losses.central_bank];
        if !weights.iter().all(|w| w.is_valid()) {
            return Err(invalid("loss weights must be finite and non-negative"));
        }
        let mut stems = BTreeSet::new();
        for s in &self.scenarios {
            if s.name.trim().is_empty() {
                return Err(invalid("scenario names must be non-empty"));
            }
            if !stems.insert(file_stem(&s.name)) {
                return Err(invalid(format!("duplicate scenario name {}", s.name)));
            }
            s.validate().map_err(|e| invalid(e.to_string()))?;
            for id in s.passive_players.iter().chain(&s.stackelberg_leader) {
                if !plays_in(*id, s.regime) {
                    return Err(invalid(format!("scenario {}: {} is not a player in {}", s.name, id.label(), s.regime.label())));
                }
            }
            if let BargainingSides::Custom { first, second } = &s.bargaining.sides {
                if first.is_empty() || second.is_empty() || first.iter().any(|p| second.contains(p)) {
                    return Err(invalid(format!("scenario {}: bargaining sides must be non-empty and disjoint", s.name)));
                }
            }
        }
        for g in &self.gains {
            if !self.scenarios.iter().any(|s| s.name == g.scenario) {
                return Err(invalid(format!("gains request names unknown scenario {}", g.scenario)));
            }
        }
        Ok(())
    }

    /// Overrides the horizon of every scenario.
    pub fn with_horizon(mut self, horizon: usize) -> Self {
        for s in &mut self.scenarios {
            s.horizon = horizon;
        }
        self
    }

    pub fn scenario(&self, name: &str) -> Option<&Scenario> {
        self.scenarios.iter().find(|s| s.name == name)
    }
}

fn plays_in(id: PlayerId, regime: RegimeSpec) -> bool {
    match (id, regime) {
        (PlayerId::GovHome | PlayerId::GovForeign, _) => true,
        (PlayerId::CbUnion, r) => r == RegimeSpec::Emu,
        (PlayerId::CbHome | PlayerId::CbForeign, RegimeSpec::Flexible) => true,
        (PlayerId::CbHome | PlayerId::CbForeign, RegimeSpec::Emu) => false,
        (id, RegimeSpec::SingleMarket { dominant }) => id.country() == Some(dominant),
    }
}

/// Parses and validates configuration text; `path` is used in messages.
pub fn parse_config_str(text: &str, path: &Path) -> Result<RunConfig, ConfigError> {
    let mut raw: RawConfig =
        toml::from_str(text).map_err(|e| ConfigError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    let scenarios = std::mem::take(&mut raw.scenario)
        .into_iter()
        .map(|s| scenario_of(s, &raw))
        .collect::<Result<Vec<_>, _>>()?;
    let config = RunConfig {
        calibration: raw.calibration,
        losses: raw.losses,
        tolerances: raw.tolerances,
        output: raw.output,
        seed: raw.seed,
        scenarios,
        gains: raw.gains,
    };
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
    parse_config_str(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config_str(text, Path::new("test.toml"))
    }

    #[test]
    fn empty_config_is_all_defaults() {
        let c = parse("").unwrap();
        assert_eq!(c, RunConfig::default());
    }

    #[test]
    fn calibration_override_is_echoed() {
        let c = parse("[calibration]\nb_bar = 0.30\nkappa = 0.25\n").unwrap();
        assert_eq!(c.calibration.b_bar, 0.30);
        assert_eq!(c.calibration.kappa, 0.25);
        assert_eq!(c.calibration.c, Calibration::default().c);
    }

    #[test]
    fn bad_propensity_names_field_and_bound() {
        let err = parse("[calibration]\nc = 1.5\n").unwrap_err().to_string();
        assert!(err.contains("c violates 0 < c < 1"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse("[calibration]\nkapa = 0.2\n").unwrap_err().to_string();
        assert!(err.contains("kapa"), "{err}");
        let err = parse("colour = 1\n").unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn parse_error_carries_position() {
        let err = parse("[calibration\n").unwrap_err().to_string();
        assert!(err.contains("test.toml") && err.contains("line 1"), "{err}");
    }

    #[test]
    fn scenario_round_trip() {
        let text = r#"
[[scenario]]
name = "sm"
regime = "single_market"
dominant = "foreign"
policy_mode = "nash"
passive_players = ["gov_home"]
shock = { kind = "debt_target", country = "home", delta = 0.03 }
behavior = { consumer = "ricardian", indexation = 0.5 }

[[gains]]
scenario = "sm"
blocking_probe = true
"#;
        let c = parse(text).unwrap();
        let s = &c.scenarios[0];
        assert_eq!(s.regime, RegimeSpec::SingleMarket { dominant: CountryId::Foreign });
        assert_eq!(s.shock, Shock::DebtTarget { country: CountryId::Home, delta: 0.03 });
        assert_eq!(s.behavior.consumer, Consumer::Ricardian);
        assert_eq!(s.behavior.indexation, Indexation::Partial(0.5));
        assert_eq!(s.passive_players, vec![PlayerId::GovHome]);
        assert!(c.gains[0].blocking_probe);
    }

    #[test]
    fn invariants_checked_before_running() {
        let stack = "[[scenario]]\nname = \"s\"\nregime = \"emu\"\npolicy_mode = \"stackelberg\"\nshock = { kind = \"baseline\" }\n";
        assert!(parse(stack).unwrap_err().to_string().contains("Single Market"));
        let sm = "[[scenario]]\nname = \"s\"\nregime = \"single_market\"\npolicy_mode = \"nash\"\nshock = { kind = \"baseline\" }\n";
        assert!(parse(sm).unwrap_err().to_string().contains("dominant"));
        let cut = "[[scenario]]\nname = \"s\"\nregime = \"emu\"\npolicy_mode = \"nash\"\nshock = { kind = \"debt_target\", country = \"home\", delta = 0.4 }\n";
        assert!(parse(cut).unwrap_err().to_string().contains("b_bar"));
        let gains = "[[gains]]\nscenario = \"missing\"\n";
        assert!(parse(gains).unwrap_err().to_string().contains("missing"));
        let dup = format!("{}{}", stack.replace("stackelberg", "nash"), stack.replace("stackelberg", "nash"));
        assert!(parse(&dup).unwrap_err().to_string().contains("duplicate"));
    }
}
