use serde::{Deserialize, Serialize};

use super::loss::{LossScope, LossSpec, LossWeights, Objective};
use crate::error::GameError;
use crate::model::{CountryId, InstrumentId, RegimeSpec, StateSpaceModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayerId {
    GovHome,
    GovForeign,
    CbHome,
    CbForeign,
    CbUnion,
}

impl PlayerId {
    pub fn government(c: CountryId) -> Self {
        match c {
            CountryId::Home => PlayerId::GovHome,
            CountryId::Foreign => PlayerId::GovForeign,
        }
    }

    pub fn central_bank(c: CountryId) -> Self {
        match c {
            CountryId::Home => PlayerId::CbHome,
            CountryId::Foreign => PlayerId::CbForeign,
        }
    }

    pub fn country(&self) -> Option<CountryId> {
        match self {
            PlayerId::GovHome | PlayerId::CbHome => Some(CountryId::Home),
            PlayerId::GovForeign | PlayerId::CbForeign => Some(CountryId::Foreign),
            PlayerId::CbUnion => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            PlayerId::GovHome => "gov_home",
            PlayerId::GovForeign => "gov_foreign",
            PlayerId::CbHome => "cb_home",
            PlayerId::CbForeign => "cb_foreign",
            PlayerId::CbUnion => "cb_union",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerSpec {
    pub id: PlayerId,
    /// Reporting name; differs from the id label when bodies are merged.
    pub name: String,
    pub instruments: Vec<InstrumentId>,
    pub active: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Player {
    pub spec: PlayerSpec,
    pub loss: Objective,
}

impl Player {
    pub fn new(id: PlayerId, instruments: Vec<InstrumentId>, loss: impl Into<Objective>) -> Self {
        Self {
            spec: PlayerSpec { id, name: id.label().to_string(), instruments, active: true },
            loss: loss.into(),
        }
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }
}

/// Loss weights used when building the default cast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossDefaults {
    pub government: LossWeights,
    pub central_bank: LossWeights,
}

impl Default for LossDefaults {
    fn default() -> Self {
        Self { government: LossWeights::government(), central_bank: LossWeights::central_bank() }
    }
}

/// The standard cast for the model's regime, in slot order.
///
/// With `independence` off each central bank is folded into its
/// government, which then minimises the sum of both losses. A union
/// central bank cannot be folded into one government; it instead adds the
/// average government loss to its own.
pub fn default_players(
    model: &StateSpaceModel,
    defaults: &LossDefaults,
    independence: bool,
) -> Vec<Player> {
    let discount = model.calib.discount;
    let spec = |scope, weights| LossSpec { scope, weights, discount };
    let gov_loss = |c| spec(LossScope::Country(c), defaults.government);
    let slots = [model.country_of(0), model.country_of(1)];
    let mut govs: Vec<Player> = slots
        .iter()
        .map(|&c| Player::new(PlayerId::government(c), vec![InstrumentId::Spending(c)], gov_loss(c)))
        .collect();
    let mut banks = Vec::new();
    match model.regime {
        RegimeSpec::Flexible => {
            for &c in &slots {
                banks.push(Player::new(
                    PlayerId::central_bank(c),
                    vec![InstrumentId::NominalRate(c)],
                    spec(LossScope::Country(c), defaults.central_bank),
                ));
            }
        }
        RegimeSpec::Emu => {
            let own = spec(LossScope::Union, defaults.central_bank);
            let loss = if independence {
                Objective::from(own)
            } else {
                Objective { terms: vec![(1.0, own), (0.5, gov_loss(slots[0])), (0.5, gov_loss(slots[1]))] }
            };
            let mut p = Player::new(PlayerId::CbUnion, vec![InstrumentId::UnionRate], loss);
            if !independence {
                p.spec.name = "cb_union+govs".into();
            }
            return govs.into_iter().chain([p]).collect();
        }
        RegimeSpec::SingleMarket { dominant } => {
            banks.push(Player::new(
                PlayerId::central_bank(dominant),
                vec![InstrumentId::DominantRate],
                spec(LossScope::Country(dominant), defaults.central_bank),
            ));
        }
    }
    if independence {
        govs.extend(banks);
        return govs;
    }
    for bank in banks {
        let c = bank.spec.id.country().expect("national bank");
        let gov = govs.iter_mut().find(|g| g.spec.id == PlayerId::government(c)).expect("government");
        gov.spec.instruments.extend(bank.spec.instruments);
        gov.spec.name = format!("{}+{}", gov.spec.name, bank.spec.name);
        gov.loss = Objective::combine(&[(1.0, &gov.loss), (1.0, &bank.loss)]);
    }
    govs
}

/// Checks ownership: instruments exist and no instrument has two active owners.
pub fn validate_players(model: &StateSpaceModel, players: &[Player]) -> Result<(), GameError> {
    let mut owner = vec![None; model.n_inst()];
    for (i, p) in players.iter().enumerate() {
        if p.loss.discount().is_none() {
            return Err(GameError::InvalidPlayers(format!("{} mixes discount factors", p.name())));
        }
        for (_, s) in &p.loss.terms {
            if !s.weights.is_valid() || !(s.discount > 0.0 && s.discount < 1.0) {
                return Err(GameError::InvalidPlayers(format!("{} has an invalid loss", p.name())));
            }
        }
        for id in &p.spec.instruments {
            let k = model
                .instrument_index(*id)
                .ok_or_else(|| GameError::InvalidPlayers(format!("{} is not an instrument of this regime", id.label())))?;
            if p.spec.active {
                if let Some(j) = owner[k] {
                    let other: &Player = &players[j];
                    return Err(GameError::InvalidPlayers(format!(
                        "{} is owned by both {} and {}",
                        id.label(),
                        other.name(),
                        p.name()
                    )));
                }
                owner[k] = Some(i);
            }
        }
    }
    Ok(())
}
