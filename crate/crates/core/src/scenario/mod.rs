//! Hourly scenario data: series, scenarios, scenario sets, and the
//! operations that build them (CSV ingestion, even/odd splitting, price
//! synthesis, demand profiles, futures pricing, PPA statistics).

mod demand;
mod futures;
mod generate;
mod io;
mod ppa;
mod synth;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use demand::{seasonal_demand, standard_demand, DEFAULT_SEASONAL_MULTIPLIERS};
pub use futures::{
    arbitrage_free_futures_prices, default_futures_shapes, delivery_indicator, FuturesPeriod,
    FuturesProduct, LoadProfile,
};
pub use generate::{HistoryGenerator, ParkProfile};
pub use io::{
    load_scenario_csv, load_scenario_dir, load_scenario_pool, load_set_dir, write_scenario_dir,
    write_series_csv,
};
pub use ppa::{ppa_capacity_stats, CapacityFactorStats, PpaContract, Technology};
pub use synth::{
    average_scenario, decompose_day_ahead, renormalize_set_mean, split_even_odd,
    synthesize_day_ahead, PriceDecomposition, SynthesisKnobs,
};

/// Physical unit carried by an [`HourlySeries`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    /// Day-ahead price, €/MWh.
    EurPerMwh,
    /// PPA availability as a fraction of peak power, in `[0, 1]`.
    Availability,
    /// Hydrogen flow, MW of H2 (MWh-H2 per hour).
    MwH2,
}

impl Unit {
    pub fn as_str(&self) -> &'static str {
        match self {
            Unit::EurPerMwh => "eur_per_mwh",
            Unit::Availability => "availability",
            Unit::MwH2 => "mw_h2",
        }
    }

    fn check(&self, h: usize, v: f64) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::Range(format!("hour {}: non-finite value", h + 1)));
        }
        match self {
            Unit::Availability if !(0.0..=1.0).contains(&v) => Err(Error::Range(format!(
                "hour {}: availability {v} outside [0, 1]",
                h + 1
            ))),
            Unit::MwH2 if v < 0.0 => Err(Error::Range(format!(
                "hour {}: negative hydrogen demand {v}",
                h + 1
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A validated hourly series. Values are stored 0-based; hour `h` of the
/// public 1-based convention lives at index `h - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HourlySeries {
    unit: Unit,
    values: Vec<f64>,
}

impl HourlySeries {
    pub fn new(unit: Unit, values: Vec<f64>) -> Result<Self> {
        for (h, &v) in values.iter().enumerate() {
            unit.check(h, v)?;
        }
        Ok(Self { unit, values })
    }

    pub fn constant(unit: Unit, value: f64, len: usize) -> Result<Self> {
        Self::new(unit, vec![value; len])
    }

    pub fn unit(&self) -> Unit {
        self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.sum() / self.values.len() as f64
    }

    /// Multiply every value by `factor`, re-validating the result.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.unit, self.values.iter().map(|v| v * factor).collect())
    }

    pub(crate) fn require_unit(&self, unit: Unit, what: &str) -> Result<()> {
        if self.unit != unit {
            return Err(Error::Schema(format!(
                "{what}: expected a {unit} series, got {}",
                self.unit
            )));
        }
        Ok(())
    }
}

/// Where a scenario came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSource {
    Year(i32),
    Synthetic(String),
}

impl ScenarioSource {
    /// Parse a scenario directory name: a leading 4-digit year counts as a
    /// historical year only if the name is exactly that year.
    pub fn from_label(label: &str) -> Self {
        match label.parse::<i32>() {
            Ok(y) => ScenarioSource::Year(y),
            Err(_) => ScenarioSource::Synthetic(label.to_string()),
        }
    }
}

/// One realisation of the uncertain inputs over the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub label: String,
    pub source: ScenarioSource,
    pub day_ahead: HourlySeries,
    pub ppa_availability: BTreeMap<String, HourlySeries>,
    pub demand: HourlySeries,
}

impl Scenario {
    pub fn new(
        label: impl Into<String>,
        source: ScenarioSource,
        day_ahead: HourlySeries,
        ppa_availability: BTreeMap<String, HourlySeries>,
        demand: HourlySeries,
    ) -> Result<Self> {
        let label = label.into();
        day_ahead.require_unit(Unit::EurPerMwh, &format!("{label}: day-ahead"))?;
        demand.require_unit(Unit::MwH2, &format!("{label}: demand"))?;
        let horizon = day_ahead.len();
        if horizon == 0 {
            return Err(Error::Schema(format!("{label}: empty horizon")));
        }
        if demand.len() != horizon {
            return Err(Error::Schema(format!(
                "{label}: demand has {} hours, day-ahead has {horizon}",
                demand.len()
            )));
        }
        for (park, series) in &ppa_availability {
            series.require_unit(Unit::Availability, &format!("{label}: ppa {park}"))?;
            if series.len() != horizon {
                return Err(Error::Schema(format!(
                    "{label}: ppa {park} has {} hours, day-ahead has {horizon}",
                    series.len()
                )));
            }
        }
        Ok(Self {
            label,
            source,
            day_ahead,
            ppa_availability,
            demand,
        })
    }

    pub fn horizon(&self) -> usize {
        self.day_ahead.len()
    }

    pub fn parks(&self) -> impl Iterator<Item = &str> {
        self.ppa_availability.keys().map(String::as_str)
    }

    pub fn availability(&self, park: &str) -> Result<&HourlySeries> {
        self.ppa_availability
            .get(park)
            .ok_or_else(|| Error::Schema(format!("{}: no availability for park {park}", self.label)))
    }

    /// Replace the demand series, keeping everything else.
    pub fn with_demand(&self, label: impl Into<String>, demand: HourlySeries) -> Result<Self> {
        Scenario::new(
            label,
            self.source.clone(),
            self.day_ahead.clone(),
            self.ppa_availability.clone(),
            demand,
        )
    }
}

/// A weighted collection of scenarios sharing one horizon and park set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub id: String,
    scenarios: Vec<Scenario>,
    probabilities: Vec<f64>,
}

impl ScenarioSet {
    /// Equiprobable set.
    pub fn new(id: impl Into<String>, scenarios: Vec<Scenario>) -> Result<Self> {
        let n = scenarios.len();
        let p = if n == 0 { Vec::new() } else { vec![1.0 / n as f64; n] };
        Self::with_probabilities(id, scenarios, p)
    }

    pub fn with_probabilities(
        id: impl Into<String>,
        scenarios: Vec<Scenario>,
        probabilities: Vec<f64>,
    ) -> Result<Self> {
        let id = id.into();
        let first = scenarios
            .first()
            .ok_or_else(|| Error::Schema(format!("scenario set {id} is empty")))?;
        if probabilities.len() != scenarios.len() {
            return Err(Error::Schema(format!(
                "scenario set {id}: {} probabilities for {} scenarios",
                probabilities.len(),
                scenarios.len()
            )));
        }
        if probabilities.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Range(format!(
                "scenario set {id}: probabilities must be finite and non-negative"
            )));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Range(format!(
                "scenario set {id}: probabilities sum to {total}, expected 1"
            )));
        }
        let horizon = first.horizon();
        let parks: Vec<&str> = first.parks().collect();
        for s in &scenarios[1..] {
            if s.horizon() != horizon {
                return Err(Error::Schema(format!(
                    "scenario set {id}: {} has horizon {}, {} has {horizon}",
                    s.label,
                    s.horizon(),
                    first.label
                )));
            }
            if !s.parks().eq(parks.iter().copied()) {
                return Err(Error::Schema(format!(
                    "scenario set {id}: {} and {} have different PPA parks",
                    s.label, first.label
                )));
            }
        }
        Ok(Self {
            id,
            scenarios,
            probabilities,
        })
    }

    pub fn scenarios(&self) -> &[Scenario] {
        &self.scenarios
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn horizon(&self) -> usize {
        self.scenarios[0].horizon()
    }

    pub fn parks(&self) -> Vec<String> {
        self.scenarios[0].parks().map(str::to_string).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Scenario, f64)> {
        self.scenarios.iter().zip(self.probabilities.iter().copied())
    }

    /// Probability-weighted mean of the day-ahead price over all hours.
    pub fn grand_mean_price(&self) -> f64 {
        self.iter().map(|(s, p)| p * s.day_ahead.mean()).sum()
    }

    /// True when at least two scenarios carry different demand series.
    pub fn has_mixed_demand(&self) -> bool {
        let first = &self.scenarios[0].demand;
        self.scenarios[1..].iter().any(|s| &s.demand != first)
    }

    /// Require every park in `parks` to be present.
    pub fn require_parks<'a>(&self, parks: impl IntoIterator<Item = &'a str>) -> Result<()> {
        let have = &self.scenarios[0].ppa_availability;
        for park in parks {
            if !have.contains_key(park) {
                return Err(Error::Schema(format!(
                    "scenario set {}: missing availability for park {park}",
                    self.id
                )));
            }
        }
        Ok(())
    }

    /// Stable content digest: labels, probabilities and every value.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.id.as_bytes());
        for (s, p) in self.iter() {
            h.update(s.label.as_bytes());
            h.update(p.to_le_bytes());
            for v in s.day_ahead.values() {
                h.update(v.to_le_bytes());
            }
            for (park, series) in &s.ppa_availability {
                h.update(park.as_bytes());
                for v in series.values() {
                    h.update(v.to_le_bytes());
                }
            }
            for v in s.demand.values() {
                h.update(v.to_le_bytes());
            }
        }
        short_hex(&h.finalize())
    }
}

pub(crate) fn short_hex(bytes: &[u8]) -> String {
    bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    pub fn flat_scenario(label: &str, price: f64, avail: &[(&str, f64)], demand: f64, h: usize) -> Scenario {
        let ppa = avail
            .iter()
            .map(|(p, a)| (p.to_string(), HourlySeries::constant(Unit::Availability, *a, h).unwrap()))
            .collect();
        Scenario::new(
            label,
            ScenarioSource::from_label(label),
            HourlySeries::constant(Unit::EurPerMwh, price, h).unwrap(),
            ppa,
            HourlySeries::constant(Unit::MwH2, demand, h).unwrap(),
        )
        .unwrap()
    }

    pub fn hourly_scenario(label: &str, price: &[f64], avail: &[(&str, &[f64])], demand: &[f64]) -> Scenario {
        let ppa = avail
            .iter()
            .map(|(p, a)| (p.to_string(), HourlySeries::new(Unit::Availability, a.to_vec()).unwrap()))
            .collect();
        Scenario::new(
            label,
            ScenarioSource::from_label(label),
            HourlySeries::new(Unit::EurPerMwh, price.to_vec()).unwrap(),
            ppa,
            HourlySeries::new(Unit::MwH2, demand.to_vec()).unwrap(),
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::flat_scenario;
    use super::*;

    #[test]
    fn series_rejects_out_of_range() {
        assert!(matches!(
            HourlySeries::new(Unit::Availability, vec![0.2, 1.2]),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            HourlySeries::new(Unit::MwH2, vec![-1.0]),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            HourlySeries::new(Unit::EurPerMwh, vec![f64::NAN]),
            Err(Error::Range(_))
        ));
        // negative prices are legitimate
        assert!(HourlySeries::new(Unit::EurPerMwh, vec![-20.0]).is_ok());
    }

    #[test]
    fn set_defaults_to_uniform() {
        let set = ScenarioSet::new(
            "s",
            vec![flat_scenario("a", 1.0, &[], 1.0, 4), flat_scenario("b", 2.0, &[], 1.0, 4)],
        )
        .unwrap();
        assert_eq!(set.probabilities(), &[0.5, 0.5]);
        assert!((set.grand_mean_price() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn set_rejects_bad_probabilities() {
        let sc = vec![flat_scenario("a", 1.0, &[], 1.0, 4), flat_scenario("b", 2.0, &[], 1.0, 4)];
        assert!(ScenarioSet::with_probabilities("s", sc.clone(), vec![0.5, 0.6]).is_err());
        assert!(ScenarioSet::with_probabilities("s", sc, vec![1.5, -0.5]).is_err());
    }

    #[test]
    fn set_rejects_inconsistent_parks_and_horizons() {
        let a = flat_scenario("a", 1.0, &[("x", 0.5)], 1.0, 4);
        let b = flat_scenario("b", 1.0, &[("y", 0.5)], 1.0, 4);
        assert!(matches!(ScenarioSet::new("s", vec![a.clone(), b]), Err(Error::Schema(_))));
        let c = flat_scenario("c", 1.0, &[("x", 0.5)], 1.0, 5);
        assert!(matches!(ScenarioSet::new("s", vec![a, c]), Err(Error::Schema(_))));
        assert!(matches!(ScenarioSet::new("s", vec![]), Err(Error::Schema(_))));
    }

    #[test]
    fn source_from_label() {
        assert_eq!(ScenarioSource::from_label("2014"), ScenarioSource::Year(2014));
        assert_eq!(
            ScenarioSource::from_label("2014-s1"),
            ScenarioSource::Synthetic("2014-s1".into())
        );
    }
}
