//! Seeded stand-in for a decade of historical market and weather data.
//!
//! The generator is deliberately simple: it only has to produce series with
//! the right units, plausible shapes (seasonal and daily price cycles,
//! diurnal solar output, persistent wind) and yearly capacity factors inside
//! a configured range. Real data drops in through the CSV layout instead.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{HourlySeries, Scenario, ScenarioSource, Technology, Unit};
use crate::error::{Error, Result};

/// Capacity-factor envelope of one renewable park.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParkProfile {
    pub park: String,
    pub technology: Technology,
    pub cf_min: f64,
    pub cf_mean: f64,
    pub cf_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryGenerator {
    pub seed: u64,
    pub horizon: usize,
    pub first_year: i32,
    pub last_year: i32,
    /// Target long-run mean of the day-ahead price, €/MWh.
    pub mean_price: f64,
    pub parks: Vec<ParkProfile>,
}

impl HistoryGenerator {
    /// One scenario per year, each carrying `demand`.
    pub fn generate(&self, demand: &HourlySeries) -> Result<BTreeMap<i32, Scenario>> {
        if self.first_year > self.last_year {
            return Err(Error::Config(format!(
                "empty year range {}..={}",
                self.first_year, self.last_year
            )));
        }
        if demand.len() != self.horizon {
            return Err(Error::Schema(format!(
                "demand has {} hours, generator horizon is {}",
                demand.len(),
                self.horizon
            )));
        }
        for p in &self.parks {
            if !(0.0 < p.cf_min && p.cf_min <= p.cf_mean && p.cf_mean <= p.cf_max && p.cf_max < 1.0) {
                return Err(Error::Config(format!(
                    "park {}: capacity factors must satisfy 0 < min <= mean <= max < 1",
                    p.park
                )));
            }
        }
        let years: Vec<i32> = (self.first_year..=self.last_year).collect();
        // each park's yearly targets spread evenly over its envelope, in a
        // seeded random year order
        let mut order_rng = ChaCha8Rng::seed_from_u64(self.seed);
        order_rng.set_stream(u64::MAX);
        let ranks: Vec<Vec<usize>> = self
            .parks
            .iter()
            .map(|_| {
                let mut r: Vec<usize> = (0..years.len()).collect();
                r.shuffle(&mut order_rng);
                r
            })
            .collect();
        let mut out = BTreeMap::new();
        for (k, &year) in years.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(year as u64);
            let day_ahead = self.prices(&mut rng)?;
            let mut ppa = BTreeMap::new();
            for (p, rank) in self.parks.iter().zip(&ranks) {
                let pos = (rank[k] as f64 + rng.gen::<f64>()) / years.len() as f64;
                let target = if pos < 0.5 {
                    p.cf_min + (p.cf_mean - p.cf_min) * 2.0 * pos
                } else {
                    p.cf_mean + (p.cf_max - p.cf_mean) * (2.0 * pos - 1.0)
                };
                let shape = match p.technology {
                    Technology::Solar => self.solar_shape(&mut rng),
                    Technology::Wind => self.wind_shape(&mut rng),
                };
                ppa.insert(p.park.clone(), fit_capacity_factor(shape, target)?);
            }
            out.insert(
                year,
                Scenario::new(
                    year.to_string(),
                    ScenarioSource::Year(year),
                    day_ahead,
                    ppa,
                    demand.clone(),
                )?,
            );
        }
        Ok(out)
    }

    fn season(&self, i: usize) -> f64 {
        // 1 in mid-January, -1 in mid-July
        (2.0 * PI * (i as f64 / self.horizon as f64 - 15.0 / 365.0)).cos()
    }

    fn prices(&self, rng: &mut ChaCha8Rng) -> Result<HourlySeries> {
        let shock: f64 = Normal::new(0.0, 1.0).unwrap().sample(rng);
        let level = self.mean_price * (1.0 + 0.25 * shock).max(0.35);
        let amp_season = 0.15 * level * (0.5 + rng.gen::<f64>());
        let amp_day = 0.18 * level * (0.6 + 0.8 * rng.gen::<f64>());
        let noise = Normal::new(0.0, 0.08 * level).unwrap();
        let mut ar = 0.0;
        let values = (0..self.horizon)
            .map(|i| {
                let hod = ((i + 1) % 24) as f64;
                // morning and evening peaks, midday dip, night trough
                let daily = 0.8 * (2.0 * PI * (hod - 8.0) / 24.0).sin().max(-0.6)
                    + 0.5 * (-(hod - 19.0).powi(2) / 4.0).exp()
                    - 0.3 * (-(hod - 13.0).powi(2) / 6.0).exp();
                ar = 0.9 * ar + noise.sample(rng);
                let spike = if rng.gen::<f64>() < 0.002 { level * rng.gen::<f64>() * 2.0 } else { 0.0 };
                level + amp_season * self.season(i) + amp_day * daily + ar + spike
            })
            .collect();
        HourlySeries::new(Unit::EurPerMwh, values)
    }

    fn solar_shape(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut cloud = 1.0;
        (0..self.horizon)
            .map(|i| {
                let hod = ((i + 1) % 24) as f64;
                if i % 24 == 0 {
                    cloud = 0.3 + 0.7 * rng.gen::<f64>().sqrt();
                }
                let day_len = 12.0 - 4.0 * self.season(i);
                let sunrise = 12.5 - day_len / 2.0;
                let x = (hod - sunrise) / day_len;
                let elevation = if (0.0..=1.0).contains(&x) { (PI * x).sin() } else { 0.0 };
                let summer = 0.75 - 0.25 * self.season(i);
                elevation * summer * cloud
            })
            .collect()
    }

    fn wind_shape(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let eps = Normal::new(0.0, 1.0).unwrap();
        let phi: f64 = 0.97;
        let mut x = eps.sample(rng);
        (0..self.horizon)
            .map(|i| {
                x = phi * x + (1.0 - phi * phi).sqrt() * eps.sample(rng);
                let speed = (1.0 + 0.15 * self.season(i) + 0.55 * x).max(0.25);
                speed.powi(3).min(2.5)
            })
            .collect()
    }
}

/// Scale a non-negative shape so that, after clipping to [0, 1], its mean is `target`.
fn fit_capacity_factor(shape: Vec<f64>, target: f64) -> Result<HourlySeries> {
    let mean = |v: &[f64], s: f64| v.iter().map(|x| (x * s).min(1.0)).sum::<f64>() / v.len() as f64;
    let raw_mean = mean(&shape, 1.0);
    if !(raw_mean > 0.0) {
        return Err(Error::Degenerate("availability shape is identically zero".into()));
    }
    // clipped mean is monotone in the scale; bisect
    let (mut lo, mut hi) = (0.0, target / raw_mean);
    while mean(&shape, hi) < target {
        hi *= 2.0;
        if hi > 1e9 {
            return Err(Error::Degenerate(format!("cannot reach capacity factor {target}")));
        }
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mean(&shape, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    HourlySeries::new(Unit::Availability, shape.iter().map(|x| (x * hi).min(1.0)).collect())
}
