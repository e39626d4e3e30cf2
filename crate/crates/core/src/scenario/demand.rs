use super::{HourlySeries, Unit};
use crate::calendar::month_index;
use crate::error::{Error, Result};

/// Default monthly demand multipliers, January first. March peaks at +24 %
/// and August bottoms at -60 %; the day-weighted sum is zero so the
/// full-year March and August ratios survive renormalisation unchanged.
pub const DEFAULT_SEASONAL_MULTIPLIERS: [f64; 12] = [
    0.15, 0.19, 0.24, 0.20, 0.10, -0.15, -0.40, -0.60, -0.15, 0.10, 0.15, 0.19,
];

fn check_annual(annual_h2: f64) -> Result<()> {
    if !annual_h2.is_finite() || annual_h2 < 0.0 {
        return Err(Error::Range(format!(
            "annual hydrogen demand must be finite and non-negative, got {annual_h2}"
        )));
    }
    Ok(())
}

/// Flat offtake of `annual_h2` MWh-H2 spread evenly over `horizon` hours.
pub fn standard_demand(annual_h2: f64, horizon: usize) -> Result<HourlySeries> {
    check_annual(annual_h2)?;
    if horizon == 0 {
        return Err(Error::Degenerate("zero-hour horizon".into()));
    }
    HourlySeries::constant(Unit::MwH2, annual_h2 / horizon as f64, horizon)
}

/// Month-by-month flat profile `(1 + multiplier) * annual / H`, rescaled so
/// the series sums to `annual_h2`.
pub fn seasonal_demand(
    annual_h2: f64,
    monthly_multipliers: &[f64; 12],
    horizon: usize,
) -> Result<HourlySeries> {
    check_annual(annual_h2)?;
    if horizon == 0 {
        return Err(Error::Degenerate("zero-hour horizon".into()));
    }
    if let Some((m, v)) = monthly_multipliers
        .iter()
        .enumerate()
        .find(|(_, &v)| !v.is_finite() || v <= -1.0)
    {
        return Err(Error::Range(format!(
            "month {}: multiplier {v} would make demand non-positive",
            m + 1
        )));
    }
    let flat = annual_h2 / horizon as f64;
    let raw: Vec<f64> = month_index(horizon)
        .into_iter()
        .map(|m| (1.0 + monthly_multipliers[m]) * flat)
        .collect();
    let total: f64 = raw.iter().sum();
    let factor = if total > 0.0 { annual_h2 / total } else { 0.0 };
    HourlySeries::new(Unit::MwH2, raw.into_iter().map(|v| v * factor).collect())
}
