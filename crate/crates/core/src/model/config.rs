use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::calendar::{is_peak, month_index};
use crate::error::{Error, Result};
use crate::scenario::{FuturesProduct, PpaContract, Technology};

/// Capital cost and lifetime of one asset class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Asset {
    /// Overnight cost per unit of capacity, €.
    pub capex: f64,
    pub lifetime_years: u32,
    /// Upper bound on installed capacity.
    pub max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Efficiencies {
    /// MWh H2 per MWh of electricity.
    pub electrolyzer: f64,
    pub storage_in: f64,
    pub storage_out: f64,
    /// Fraction of stored hydrogen lost per hour.
    pub storage_loss_per_hour: f64,
    /// State of charge at the first hour, as a fraction of installed energy.
    pub initial_soc: f64,
}

impl Default for Efficiencies {
    fn default() -> Self {
        Self {
            electrolyzer: 0.56,
            storage_in: 1.0,
            storage_out: 1.0,
            storage_loss_per_hour: 0.0,
            initial_soc: 0.5,
        }
    }
}

/// Unserved hydrogen penalty, €/MWh-H2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Penalties {
    pub optimize: f64,
    pub test: f64,
}

impl Default for Penalties {
    fn default() -> Self {
        Self {
            optimize: 10_000.0,
            test: 1_000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Risk {
    /// CVaR confidence level.
    pub alpha: f64,
    /// Weight of CVaR against the expectation.
    pub beta: f64,
}

impl Default for Risk {
    fn default() -> Self {
        Self { alpha: 0.9, beta: 0.0 }
    }
}

/// How hours map to network tariff time slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SlotRule {
    /// One slot for every hour.
    Flat,
    /// Four slots: winter peak, winter off-peak, summer peak, summer off-peak.
    /// Winter runs November to March.
    SeasonPeak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TariffSlot {
    pub name: String,
    /// €/MW/year of subscribed power.
    #[serde(default)]
    pub subscription_cost: f64,
    /// €/MWh drawn through the connection.
    #[serde(default)]
    pub energy_charge: f64,
    /// Upper bound on subscribed power, MW.
    #[serde(default = "default_bound_mw")]
    pub max_mw: f64,
}

fn default_bound_mw() -> f64 {
    1_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkTariff {
    pub rule: SlotRule,
    pub slots: Vec<TariffSlot>,
}

impl Default for NetworkTariff {
    fn default() -> Self {
        let slot = |name: &str| TariffSlot {
            name: name.into(),
            subscription_cost: 0.0,
            energy_charge: 0.0,
            max_mw: default_bound_mw(),
        };
        Self {
            rule: SlotRule::SeasonPeak,
            slots: vec![
                slot("winter_peak"),
                slot("winter_offpeak"),
                slot("summer_peak"),
                slot("summer_offpeak"),
            ],
        }
    }
}

impl NetworkTariff {
    fn expected_slots(&self) -> usize {
        match self.rule {
            SlotRule::Flat => 1,
            SlotRule::SeasonPeak => 4,
        }
    }

    /// Slot index for every hour of the horizon (0-based entries).
    pub fn slot_map(&self, horizon: usize) -> Vec<usize> {
        match self.rule {
            SlotRule::Flat => vec![0; horizon],
            SlotRule::SeasonPeak => month_index(horizon)
                .into_iter()
                .enumerate()
                .map(|(i, m)| {
                    let winter = matches!(m, 10 | 11 | 0 | 1 | 2);
                    let peak = is_peak(i + 1);
                    match (winter, peak) {
                        (true, true) => 0,
                        (true, false) => 1,
                        (false, true) => 2,
                        (false, false) => 3,
                    }
                })
                .collect(),
        }
    }
}

/// Every cost, efficiency and bound of the plant model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantConfig {
    pub electrolyzer: Asset,
    pub storage_energy: Asset,
    pub storage_power: Asset,
    pub network: Asset,
    pub discount_rate: f64,
    pub efficiency: Efficiencies,
    pub ppa: Vec<PpaContract>,
    /// Priced futures products offered to the optimiser.
    pub futures: Vec<FuturesProduct>,
    /// Upper bound on each futures purchase, MWh.
    pub futures_max_mwh: f64,
    /// Exchange fee on every futures MWh, €/MWh. Also breaks ties between
    /// futures bought and resold at the price they were valued at.
    pub futures_fee: f64,
    pub penalties: Penalties,
    /// Paid per MWh-H2 of certified-green production, €.
    pub subsidy: f64,
    /// Minimum certified-green share of yearly production.
    pub rfnbo_min: f64,
    pub tariff: NetworkTariff,
    pub risk: Risk,
    /// kg H2 per MWh H2.
    pub h2_mass: f64,
    pub no_arbitrage: bool,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            electrolyzer: Asset {
                capex: 1.7e6,
                lifetime_years: 13,
                max: 1_000.0,
            },
            storage_energy: Asset {
                capex: 75_000.0,
                lifetime_years: 25,
                max: 100_000.0,
            },
            storage_power: Asset {
                capex: 50_000.0,
                lifetime_years: 25,
                max: 1_000.0,
            },
            network: Asset {
                capex: 75_000.0,
                lifetime_years: 25,
                max: 1_000.0,
            },
            discount_rate: 0.05,
            efficiency: Efficiencies::default(),
            ppa: Vec::new(),
            futures: Vec::new(),
            futures_max_mwh: 1.0e6,
            futures_fee: 0.01,
            penalties: Penalties::default(),
            subsidy: 0.0,
            rfnbo_min: 0.0,
            tariff: NetworkTariff::default(),
            risk: Risk::default(),
            h2_mass: 33.33,
            no_arbitrage: false,
        }
    }
}

/// Equivalent annual cost of `capex` repaid over `lifetime` years at `rate`.
/// A zero rate gives straight-line `capex / lifetime`.
pub fn annualize_capex(capex: f64, lifetime: u32, rate: f64) -> Result<f64> {
    if lifetime < 1 {
        return Err(Error::Config("asset lifetime must be at least one year".into()));
    }
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::Config(format!("discount rate must be non-negative, got {rate}")));
    }
    if rate == 0.0 {
        return Ok(capex / f64::from(lifetime));
    }
    let g = (1.0 + rate).powi(lifetime as i32);
    Ok(capex * rate * g / (g - 1.0))
}

/// Annualised €/unit/year of each asset class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnualCosts {
    pub electrolyzer: f64,
    pub storage_energy: f64,
    pub storage_power: f64,
    pub network: f64,
}

impl PlantConfig {
    pub fn annual_costs(&self) -> Result<AnnualCosts> {
        let a = |x: &Asset| annualize_capex(x.capex, x.lifetime_years, self.discount_rate);
        Ok(AnnualCosts {
            electrolyzer: a(&self.electrolyzer)?,
            storage_energy: a(&self.storage_energy)?,
            storage_power: a(&self.storage_power)?,
            network: a(&self.network)?,
        })
    }

    pub fn penalty(&self, phase: super::Phase) -> f64 {
        match phase {
            super::Phase::Optimize => self.penalties.optimize,
            super::Phase::Test => self.penalties.test,
        }
    }

    pub fn parks(&self) -> impl Iterator<Item = &str> {
        self.ppa.iter().map(|p| p.park.as_str())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        for (name, a) in [
            ("electrolyzer", &self.electrolyzer),
            ("storage_energy", &self.storage_energy),
            ("storage_power", &self.storage_power),
            ("network", &self.network),
        ] {
            if !(a.capex >= 0.0 && a.capex.is_finite()) || !(a.max >= 0.0 && a.max.is_finite()) {
                return bad(format!("{name}: capex and max must be finite and non-negative"));
            }
            if a.lifetime_years < 1 {
                return bad(format!("{name}: lifetime must be at least one year"));
            }
        }
        if !(self.discount_rate >= 0.0 && self.discount_rate.is_finite()) {
            return bad(format!("discount rate {} must be non-negative", self.discount_rate));
        }
        let e = &self.efficiency;
        for (name, v) in [
            ("electrolyzer", e.electrolyzer),
            ("storage_in", e.storage_in),
            ("storage_out", e.storage_out),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("efficiency {name} = {v} outside (0, 1]"));
            }
        }
        if !(0.0..1.0).contains(&e.storage_loss_per_hour) {
            return bad(format!("storage loss {} outside [0, 1)", e.storage_loss_per_hour));
        }
        if !(0.0..=1.0).contains(&e.initial_soc) {
            return bad(format!("initial state of charge {} outside [0, 1]", e.initial_soc));
        }
        let mut seen = BTreeSet::new();
        for p in &self.ppa {
            p.validate()?;
            if !seen.insert(p.park.as_str()) {
                return bad(format!("duplicate ppa park {}", p.park));
            }
        }
        let mut seen = BTreeSet::new();
        for f in &self.futures {
            if !seen.insert(f.id()) {
                return bad(format!("duplicate futures product {}", f.id()));
            }
            if !(f.price.is_finite() && f.price >= 0.0) {
                return bad(format!("futures {}: price {} must be non-negative", f.id(), f.price));
            }
        }
        if !(self.futures_fee >= 0.0 && self.futures_fee.is_finite()) {
            return bad("futures_fee must be finite and non-negative".into());
        }
        if !(self.futures_max_mwh >= 0.0 && self.futures_max_mwh.is_finite()) {
            return bad("futures_max_mwh must be finite and non-negative".into());
        }
        if !(self.penalties.optimize >= 0.0 && self.penalties.test >= 0.0) {
            return bad("curtailment penalties must be non-negative".into());
        }
        if !(self.subsidy >= 0.0 && self.subsidy.is_finite()) {
            return bad(format!("subsidy {} must be non-negative", self.subsidy));
        }
        if !(0.0..=1.0).contains(&self.rfnbo_min) {
            return bad(format!("rfnbo_min {} outside [0, 1]", self.rfnbo_min));
        }
        if !(0.0..1.0).contains(&self.risk.alpha) {
            return bad(format!("CVaR alpha {} outside [0, 1)", self.risk.alpha));
        }
        if !(0.0..=1.0).contains(&self.risk.beta) {
            return bad(format!("risk weight beta {} outside [0, 1]", self.risk.beta));
        }
        if !(self.h2_mass > 0.0) {
            return bad("h2_mass must be positive".into());
        }
        if self.tariff.slots.len() != self.tariff.expected_slots() {
            return bad(format!(
                "tariff rule {:?} needs {} slots, {} given",
                self.tariff.rule,
                self.tariff.expected_slots(),
                self.tariff.slots.len()
            ));
        }
        for s in &self.tariff.slots {
            if !(s.subscription_cost >= 0.0 && s.energy_charge >= 0.0 && s.max_mw >= 0.0) {
                return bad(format!("tariff slot {}: costs and bound must be non-negative", s.name));
            }
        }
        Ok(())
    }

    /// Check futures windows against a horizon.
    pub fn validate_for_horizon(&self, horizon: usize) -> Result<()> {
        for f in &self.futures {
            f.validate(horizon)?;
        }
        Ok(())
    }

    /// Case-study PPA contracts, each bounded at `max_mwp`.
    pub fn case_study_ppas(max_mwp: f64) -> Vec<PpaContract> {
        CASE_STUDY_PARKS
            .iter()
            .map(|p| PpaContract {
                park: p.park.into(),
                technology: p.technology,
                price: p.price,
                max_mwp,
            })
            .collect()
    }
}

/// Reference data of the case-study parks.
pub struct ParkReference {
    pub park: &'static str,
    pub technology: Technology,
    pub price: f64,
    pub cf_min: f64,
    pub cf_mean: f64,
    pub cf_max: f64,
}

pub const CASE_STUDY_PARKS: [ParkReference; 9] = [
    ParkReference { park: "le_mans_solar", technology: Technology::Solar, price: 71.0, cf_min: 0.145, cf_mean: 0.150, cf_max: 0.162 },
    ParkReference { park: "calais_solar", technology: Technology::Solar, price: 72.0, cf_min: 0.142, cf_mean: 0.148, cf_max: 0.154 },
    ParkReference { park: "strasbourg_solar", technology: Technology::Solar, price: 68.0, cf_min: 0.147, cf_mean: 0.153, cf_max: 0.162 },
    ParkReference { park: "albi_solar", technology: Technology::Solar, price: 66.0, cf_min: 0.160, cf_mean: 0.168, cf_max: 0.175 },
    ParkReference { park: "orleans_wind", technology: Technology::Wind, price: 70.0, cf_min: 0.255, cf_mean: 0.277, cf_max: 0.314 },
    ParkReference { park: "le_mans_wind", technology: Technology::Wind, price: 69.0, cf_min: 0.271, cf_mean: 0.293, cf_max: 0.327 },
    ParkReference { park: "calais_wind", technology: Technology::Wind, price: 65.0, cf_min: 0.409, cf_mean: 0.427, cf_max: 0.465 },
    ParkReference { park: "strasbourg_wind", technology: Technology::Wind, price: 80.0, cf_min: 0.151, cf_mean: 0.169, cf_max: 0.195 },
    ParkReference { park: "albi_wind", technology: Technology::Wind, price: 78.0, cf_min: 0.246, cf_mean: 0.258, cf_max: 0.265 },
];
