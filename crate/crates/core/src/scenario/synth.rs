use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{HourlySeries, Scenario, ScenarioSet, ScenarioSource, Unit};
use crate::calendar::{day_month_blocks, month_bounds};
use crate::error::{Error, Result};

/// Multipliers applied to the three components of a price decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthesisKnobs {
    /// Scales the yearly average price.
    pub mean_scale: f64,
    /// Scales the month-to-month deviations.
    pub seasonal_scale: f64,
    /// Scales the within-day deviations.
    pub daily_spread_scale: f64,
}

impl Default for SynthesisKnobs {
    fn default() -> Self {
        Self {
            mean_scale: 1.0,
            seasonal_scale: 1.0,
            daily_spread_scale: 1.0,
        }
    }
}

impl SynthesisKnobs {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mean_scale > 0.0
            && self.seasonal_scale >= 0.0
            && self.daily_spread_scale >= 0.0
            && [self.mean_scale, self.seasonal_scale, self.daily_spread_scale]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Range(format!("invalid synthesis knobs {self:?}")))
        }
    }
}

/// Additive split `price = mean + monthly + daily + within_day`.
///
/// `monthly[h]` is the deviation of hour h's month mean from the yearly
/// mean. `daily[h]` is the mean of the remaining residual over the
/// day-within-month block holding h, and `within_day[h]` is what is left.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceDecomposition {
    pub mean: f64,
    pub monthly: Vec<f64>,
    pub daily: Vec<f64>,
    pub within_day: Vec<f64>,
}

impl PriceDecomposition {
    pub fn recompose(&self, knobs: &SynthesisKnobs) -> Vec<f64> {
        (0..self.monthly.len())
            .map(|i| {
                knobs.mean_scale * self.mean
                    + knobs.seasonal_scale * self.monthly[i]
                    + knobs.daily_spread_scale * self.within_day[i]
                    + self.daily[i]
            })
            .collect()
    }
}

pub fn decompose_day_ahead(base: &HourlySeries) -> Result<PriceDecomposition> {
    base.require_unit(Unit::EurPerMwh, "price decomposition")?;
    let v = base.values();
    let n = v.len();
    if n == 0 {
        return Err(Error::Degenerate("empty price series".into()));
    }
    let mean = base.mean();
    let bounds = month_bounds(n);
    let mut monthly = vec![0.0; n];
    for m in 0..12 {
        let r = bounds[m]..bounds[m + 1];
        if r.is_empty() {
            continue;
        }
        let mm = v[r.clone()].iter().sum::<f64>() / r.len() as f64;
        monthly[r].iter_mut().for_each(|x| *x = mm - mean);
    }
    let mut daily = vec![0.0; n];
    let mut within_day = vec![0.0; n];
    for block in day_month_blocks(n) {
        let resid = |i: usize| v[i] - mean - monthly[i];
        let dm = block.clone().map(resid).sum::<f64>() / block.len() as f64;
        for i in block {
            daily[i] = dm;
            within_day[i] = resid(i) - dm;
        }
    }
    Ok(PriceDecomposition {
        mean,
        monthly,
        daily,
        within_day,
    })
}

/// Rescale the yearly level, seasonality amplitude and daily spread of a
/// day-ahead price series.
pub fn synthesize_day_ahead(base: &HourlySeries, knobs: &SynthesisKnobs) -> Result<HourlySeries> {
    knobs.validate()?;
    let parts = decompose_day_ahead(base)?;
    HourlySeries::new(Unit::EurPerMwh, parts.recompose(knobs))
}

/// Scale every day-ahead series by one common factor so that the
/// probability-weighted grand mean equals `target_mean`.
pub fn renormalize_set_mean(set: &ScenarioSet, target_mean: f64) -> Result<ScenarioSet> {
    if !(target_mean > 0.0 && target_mean.is_finite()) {
        return Err(Error::Range(format!(
            "target mean price must be positive, got {target_mean}"
        )));
    }
    let current = set.grand_mean_price();
    if !(current > 0.0) {
        return Err(Error::Degenerate(format!(
            "scenario set {}: grand mean price {current} cannot be rescaled",
            set.id
        )));
    }
    let factor = target_mean / current;
    let scenarios = set
        .scenarios()
        .iter()
        .map(|s| {
            Ok(Scenario {
                day_ahead: s.day_ahead.scaled(factor)?,
                ..s.clone()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ScenarioSet::with_probabilities(set.id.clone(), scenarios, set.probabilities().to_vec())
}

/// Hour-by-hour probability-weighted mean of every series in the set.
pub fn average_scenario(set: &ScenarioSet) -> Result<Scenario> {
    if set.len() == 1 {
        return Ok(set.scenarios()[0].clone());
    }
    let h = set.horizon();
    let avg = |get: &dyn Fn(&Scenario) -> &HourlySeries, unit: Unit| -> Result<HourlySeries> {
        let mut acc = vec![0.0; h];
        for (s, p) in set.iter() {
            for (a, v) in acc.iter_mut().zip(get(s).values()) {
                *a += p * v;
            }
        }
        if unit == Unit::Availability {
            // rounding can push a weighted mean of ones just past 1
            acc.iter_mut().for_each(|a| *a = a.clamp(0.0, 1.0));
        }
        HourlySeries::new(unit, acc)
    };
    let first = &set.scenarios()[0];
    let mut ppa = BTreeMap::new();
    for park in first.parks() {
        for s in set.scenarios() {
            s.availability(park)?;
        }
        let park_owned = park.to_string();
        ppa.insert(
            park_owned.clone(),
            avg(&|s: &Scenario| &s.ppa_availability[&park_owned], Unit::Availability)?,
        );
    }
    Scenario::new(
        format!("{}-average", set.id),
        ScenarioSource::Synthetic("average".into()),
        avg(&|s: &Scenario| &s.day_ahead, Unit::EurPerMwh)?,
        ppa,
        avg(&|s: &Scenario| &s.demand, Unit::MwH2)?,
    )
}

/// Even years go in-sample, odd years out-of-sample, each equiprobable.
pub fn split_even_odd(
    scenarios_by_year: &BTreeMap<i32, Scenario>,
) -> Result<(ScenarioSet, ScenarioSet)> {
    let (even, odd): (Vec<_>, Vec<_>) = scenarios_by_year
        .iter()
        .partition(|(y, _)| y.rem_euclid(2) == 0);
    if even.is_empty() {
        return Err(Error::Split("no even year for the in-sample set".into()));
    }
    if odd.is_empty() {
        return Err(Error::Split("no odd year for the out-of-sample set".into()));
    }
    let collect = |v: Vec<(&i32, &Scenario)>| v.into_iter().map(|(_, s)| s.clone()).collect();
    Ok((
        ScenarioSet::new("in_sample", collect(even))?,
        ScenarioSet::new("out_of_sample", collect(odd))?,
    ))
}
