use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountryId {
    Home,
    Foreign,
}

impl CountryId {
    pub const BOTH: [CountryId; 2] = [CountryId::Home, CountryId::Foreign];

    pub fn other(self) -> CountryId {
        match self {
            CountryId::Home => CountryId::Foreign,
            CountryId::Foreign => CountryId::Home,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CountryId::Home => "home",
            CountryId::Foreign => "foreign",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Consumer {
    /// Debt interest counts as private income.
    Keynesian,
    /// Debt is netted against the taxes that will service it.
    Ricardian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectations {
    Rational,
    Backward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indexation {
    /// Use the calibration's indexation degree.
    Full,
    Partial(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorSpec {
    pub consumer: Consumer,
    pub expectations: Expectations,
    pub indexation: Indexation,
}

impl Default for BehaviorSpec {
    fn default() -> Self {
        Self {
            consumer: Consumer::Keynesian,
            expectations: Expectations::Rational,
            indexation: Indexation::Full,
        }
    }
}

impl BehaviorSpec {
    pub fn indexation_degree(&self, calibrated: f64) -> f64 {
        match self.indexation {
            Indexation::Full => calibrated,
            Indexation::Partial(theta) => theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeSpec {
    Flexible,
    Emu,
    SingleMarket { dominant: CountryId },
}

impl RegimeSpec {
    pub fn dominant(&self) -> Option<CountryId> {
        match self {
            RegimeSpec::SingleMarket { dominant } => Some(*dominant),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            RegimeSpec::Flexible => "flexible",
            RegimeSpec::Emu => "emu",
            RegimeSpec::SingleMarket { .. } => "single_market",
        }
    }
}

/// Levels for one country at one date.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CountryState {
    pub y: f64,
    pub p: f64,
    pub pi: f64,
    pub b: f64,
    pub f: f64,
    pub w: f64,
    pub g: f64,
    pub tau: f64,
    pub i_nom: f64,
    pub r_real: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub home: CountryState,
    pub foreign: CountryState,
    /// Log nominal exchange rate, home currency per unit of foreign.
    pub e: f64,
    /// Log real exchange rate, `e + p_foreign - p_home`.
    pub z: f64,
}

impl WorldState {
    pub fn country(&self, id: CountryId) -> &CountryState {
        match id {
            CountryId::Home => &self.home,
            CountryId::Foreign => &self.foreign,
        }
    }

    pub fn country_mut(&mut self, id: CountryId) -> &mut CountryState {
        match id {
            CountryId::Home => &mut self.home,
            CountryId::Foreign => &mut self.foreign,
        }
    }

    /// Real exchange rate seen from `id`: positive means `id` is competitive.
    pub fn signed_z(&self, id: CountryId) -> f64 {
        match id {
            CountryId::Home => self.z,
            CountryId::Foreign => -self.z,
        }
    }
}
