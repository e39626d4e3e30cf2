use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ScenarioSet;
use crate::calendar::{peak_indicator, quarter_windows};
use crate::error::{Error, Result};

/// Delivery period of a futures product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FuturesPeriod {
    #[serde(rename = "y")]
    Year,
    #[serde(rename = "q1")]
    Q1,
    #[serde(rename = "q2")]
    Q2,
    #[serde(rename = "q3")]
    Q3,
    #[serde(rename = "q4")]
    Q4,
}

impl FuturesPeriod {
    pub const ALL: [FuturesPeriod; 5] = [
        FuturesPeriod::Year,
        FuturesPeriod::Q1,
        FuturesPeriod::Q2,
        FuturesPeriod::Q3,
        FuturesPeriod::Q4,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FuturesPeriod::Year => "y",
            FuturesPeriod::Q1 => "q1",
            FuturesPeriod::Q2 => "q2",
            FuturesPeriod::Q3 => "q3",
            FuturesPeriod::Q4 => "q4",
        }
    }

    /// Half-open 1-based window `[start, end)` for this period.
    pub fn window(&self, horizon: usize) -> (usize, usize) {
        let q = quarter_windows(horizon);
        match self {
            FuturesPeriod::Year => (1, horizon + 1),
            FuturesPeriod::Q1 => q[0],
            FuturesPeriod::Q2 => q[1],
            FuturesPeriod::Q3 => q[2],
            FuturesPeriod::Q4 => q[3],
        }
    }
}

impl fmt::Display for FuturesPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FuturesPeriod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FuturesPeriod::ALL
            .into_iter()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown futures period {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoadProfile {
    /// Constant power over every hour of the window.
    Baseload,
    /// Constant power over the 08:00-20:00 hours of the window only.
    Peakload,
}

impl LoadProfile {
    pub fn as_str(&self) -> &'static str {
        match self {
            LoadProfile::Baseload => "baseload",
            LoadProfile::Peakload => "peakload",
        }
    }
}

/// A block-energy futures contract with a half-open delivery window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuturesProduct {
    pub period: FuturesPeriod,
    pub profile: LoadProfile,
    /// First delivery hour (1-based, inclusive).
    pub h_start: usize,
    /// One past the last delivery hour.
    pub h_end: usize,
    /// €/MWh.
    pub price: f64,
}

impl FuturesProduct {
    pub fn new(period: FuturesPeriod, profile: LoadProfile, horizon: usize, price: f64) -> Self {
        let (h_start, h_end) = period.window(horizon);
        Self {
            period,
            profile,
            h_start,
            h_end,
            price,
        }
    }

    /// Stable identifier such as `baf_q1` or `pkf_y`.
    pub fn id(&self) -> String {
        let prefix = match self.profile {
            LoadProfile::Baseload => "baf",
            LoadProfile::Peakload => "pkf",
        };
        format!("{prefix}_{}", self.period)
    }

    /// Window length in hours.
    pub fn window_hours(&self) -> usize {
        self.h_end - self.h_start
    }

    /// Delivered power (MW) per MWh purchased, at hour `h`.
    ///
    /// Baseload spreads the volume evenly over the window; peakload delivers
    /// over half the window hours, during peak hours only.
    pub fn delivery_rate(&self, h: usize) -> f64 {
        if delivery_indicator(self, h) == 0 {
            return 0.0;
        }
        let hq = self.window_hours() as f64;
        match self.profile {
            LoadProfile::Baseload => 1.0 / hq,
            LoadProfile::Peakload => f64::from(peak_indicator(h)) / (hq / 2.0),
        }
    }

    pub fn validate(&self, horizon: usize) -> Result<()> {
        if !(1 <= self.h_start && self.h_start < self.h_end && self.h_end <= horizon + 1) {
            return Err(Error::Config(format!(
                "futures {}: window [{}, {}) outside 1..={horizon}",
                self.id(),
                self.h_start,
                self.h_end
            )));
        }
        if !self.price.is_finite() || self.price < 0.0 {
            return Err(Error::Config(format!(
                "futures {}: price {} must be finite and non-negative",
                self.id(),
                self.price
            )));
        }
        Ok(())
    }
}

/// 1 iff hour `h` lies in `[h_start, h_end)`.
pub fn delivery_indicator(product: &FuturesProduct, h: usize) -> u8 {
    u8::from((product.h_start..product.h_end).contains(&h))
}

/// Year and quarter products in both profiles, unpriced.
pub fn default_futures_shapes(horizon: usize) -> Vec<FuturesProduct> {
    let mut out = Vec::with_capacity(10);
    for period in FuturesPeriod::ALL {
        for profile in [LoadProfile::Baseload, LoadProfile::Peakload] {
            out.push(FuturesProduct::new(period, profile, horizon, 0.0));
        }
    }
    out
}

/// Price every shape at the probability-weighted mean day-ahead price over
/// its delivery hours (peak hours only for peakload).
pub fn arbitrage_free_futures_prices(
    set: &ScenarioSet,
    products: &[FuturesProduct],
) -> Result<Vec<FuturesProduct>> {
    let horizon = set.horizon();
    products
        .iter()
        .map(|shape| {
            shape.validate(horizon)?;
            let hours: Vec<usize> = (shape.h_start..shape.h_end)
                .filter(|&h| shape.profile == LoadProfile::Baseload || peak_indicator(h) == 1)
                .collect();
            if hours.is_empty() {
                return Err(Error::Degenerate(format!(
                    "futures {}: no delivery hours in [{}, {})",
                    shape.id(),
                    shape.h_start,
                    shape.h_end
                )));
            }
            let mut total = 0.0;
            for (sc, p) in set.iter() {
                let prices = sc.day_ahead.values();
                let sum: f64 = hours.iter().map(|&h| prices[h - 1]).sum();
                total += p * sum / hours.len() as f64;
            }
            Ok(FuturesProduct {
                price: total,
                ..shape.clone()
            })
        })
        .collect()
}
