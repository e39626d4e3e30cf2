use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PlantConfig;
use crate::error::{Error, Result};
use crate::scenario::LoadProfile;

/// First-stage decisions: equipment capacities and hedging volumes.
///
/// Serialised with the model's symbol names as keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DesignDecisions {
    /// MW of electrical input.
    #[serde(rename = "x_ez_p")]
    pub electrolyzer_mw: f64,
    /// MWh-H2.
    #[serde(rename = "x_hs_e")]
    pub storage_mwh: f64,
    /// MW-H2.
    #[serde(rename = "x_hs_p")]
    pub storage_mw: f64,
    #[serde(rename = "x_nw_p")]
    pub network_mw: f64,
    /// Baseload volume per delivery period, MWh.
    #[serde(rename = "x_baf")]
    pub baseload_mwh: BTreeMap<String, f64>,
    /// Peakload volume per delivery period, MWh.
    #[serde(rename = "x_pkf")]
    pub peakload_mwh: BTreeMap<String, f64>,
    /// Subscribed network power per tariff slot, MW.
    #[serde(rename = "x_nw_sub")]
    pub subscription_mw: BTreeMap<String, f64>,
    /// Contracted peak power per park, MWp.
    #[serde(rename = "x_ppa")]
    pub ppa_mwp: BTreeMap<String, f64>,
}

impl DesignDecisions {
    /// All-zero design keyed by the products, slots and parks of `cfg`.
    pub fn zeros(cfg: &PlantConfig) -> Self {
        let futures = |p: LoadProfile| {
            cfg.futures
                .iter()
                .filter(|f| f.profile == p)
                .map(|f| (f.period.to_string(), 0.0))
                .collect()
        };
        Self {
            baseload_mwh: futures(LoadProfile::Baseload),
            peakload_mwh: futures(LoadProfile::Peakload),
            subscription_mw: cfg.tariff.slots.iter().map(|s| (s.name.clone(), 0.0)).collect(),
            ppa_mwp: cfg.parks().map(|p| (p.to_string(), 0.0)).collect(),
            ..Default::default()
        }
    }

    /// Volume purchased of a futures product, keyed by period and profile.
    pub fn futures_mwh(&self, period: &str, profile: LoadProfile) -> Option<f64> {
        match profile {
            LoadProfile::Baseload => self.baseload_mwh.get(period).copied(),
            LoadProfile::Peakload => self.peakload_mwh.get(period).copied(),
        }
    }

    pub fn total_futures_mwh(&self) -> f64 {
        self.baseload_mwh.values().sum::<f64>() + self.peakload_mwh.values().sum::<f64>()
    }

    /// Require the keys to match the products, slots and parks of `cfg`.
    pub fn check_against(&self, cfg: &PlantConfig) -> Result<()> {
        let mismatch = |what: &str, have: Vec<&String>, want: Vec<String>| -> Result<()> {
            let have: Vec<String> = have.into_iter().cloned().collect();
            if have != want {
                return Err(Error::Schema(format!(
                    "design {what} {have:?} do not match the configuration {want:?}"
                )));
            }
            Ok(())
        };
        let futures = |p: LoadProfile| {
            let mut v: Vec<String> = cfg
                .futures
                .iter()
                .filter(|f| f.profile == p)
                .map(|f| f.period.to_string())
                .collect();
            v.sort();
            v
        };
        mismatch("baseload periods", self.baseload_mwh.keys().collect(), futures(LoadProfile::Baseload))?;
        mismatch("peakload periods", self.peakload_mwh.keys().collect(), futures(LoadProfile::Peakload))?;
        let mut slots: Vec<String> = cfg.tariff.slots.iter().map(|s| s.name.clone()).collect();
        slots.sort();
        mismatch("tariff slots", self.subscription_mw.keys().collect(), slots)?;
        let mut parks: Vec<String> = cfg.parks().map(str::to_string).collect();
        parks.sort();
        mismatch("ppa parks", self.ppa_mwp.keys().collect(), parks)?;
        let all = [self.electrolyzer_mw, self.storage_mwh, self.storage_mw, self.network_mw]
            .into_iter()
            .chain(self.baseload_mwh.values().copied())
            .chain(self.peakload_mwh.values().copied())
            .chain(self.subscription_mw.values().copied())
            .chain(self.ppa_mwp.values().copied());
        for v in all {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Range(format!("design value {v} must be finite and non-negative")));
            }
        }
        Ok(())
    }
}

/// Annualised design cost: equipment, futures and network subscriptions, €/year.
pub fn design_cost(cfg: &PlantConfig, design: &DesignDecisions) -> Result<f64> {
    design.check_against(cfg)?;
    let a = cfg.annual_costs()?;
    let mut cost = design.electrolyzer_mw * a.electrolyzer
        + design.storage_mwh * a.storage_energy
        + design.storage_mw * a.storage_power
        + design.network_mw * a.network;
    for f in &cfg.futures {
        let v = design.futures_mwh(f.period.as_str(), f.profile).unwrap_or(0.0);
        cost += v * (f.price + cfg.futures_fee);
    }
    for s in &cfg.tariff.slots {
        cost += design.subscription_mw[&s.name] * s.subscription_cost;
    }
    Ok(cost)
}
