use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::HourlySeries;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Technology {
    Solar,
    Wind,
}

impl fmt::Display for Technology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Technology::Solar => "solar",
            Technology::Wind => "wind",
        })
    }
}

/// Pay-as-produced power purchase agreement with a single renewable park.
/// All available energy is paid at `price`, dispatched or curtailed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpaContract {
    /// Key into each scenario's availability map.
    pub park: String,
    pub technology: Technology,
    /// €/MWh.
    pub price: f64,
    /// Upper bound on contracted peak power, MWp.
    pub max_mwp: f64,
}

impl PpaContract {
    pub fn validate(&self) -> Result<()> {
        if !(self.price > 0.0 && self.price.is_finite()) {
            return Err(Error::Config(format!(
                "ppa {}: price must be positive, got {}",
                self.park, self.price
            )));
        }
        if !(self.max_mwp > 0.0) {
            return Err(Error::Config(format!(
                "ppa {}: peak-power bound must be positive, got {}",
                self.park, self.max_mwp
            )));
        }
        Ok(())
    }
}

/// Spread of yearly capacity factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacityFactorStats {
    pub min: f64,
    pub mean: f64,
    pub max: f64,
}

/// Per-year capacity factor is the mean availability; returns min/mean/max
/// across years.
pub fn ppa_capacity_stats(availability_by_year: &BTreeMap<i32, HourlySeries>) -> Result<CapacityFactorStats> {
    if availability_by_year.is_empty() {
        return Err(Error::Degenerate("no availability years".into()));
    }
    let cfs: Vec<f64> = availability_by_year.values().map(HourlySeries::mean).collect();
    Ok(CapacityFactorStats {
        min: cfs.iter().copied().fold(f64::INFINITY, f64::min),
        mean: cfs.iter().sum::<f64>() / cfs.len() as f64,
        max: cfs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}
