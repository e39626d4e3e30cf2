//! Build a synthetic ten-year history, stretch one year's prices into new
//! scenarios, split the years even/odd and price futures on each half.
//!
//!     cargo run --example scenario_synthesis

use std::collections::BTreeMap;

use h2plan::scenario::{
    arbitrage_free_futures_prices, decompose_day_ahead, default_futures_shapes, ppa_capacity_stats,
    renormalize_set_mean, split_even_odd, standard_demand, synthesize_day_ahead, HistoryGenerator, ParkProfile,
    Scenario, ScenarioSet, ScenarioSource, SynthesisKnobs, Technology,
};

fn main() -> h2plan::Result<()> {
    let horizon = 192;
    let demand = standard_demand(400.0, horizon)?;
    let history = HistoryGenerator {
        seed: 11,
        horizon,
        first_year: 2013,
        last_year: 2022,
        mean_price: 70.0,
        parks: vec![
            ParkProfile {
                park: "albi_solar".into(),
                technology: Technology::Solar,
                cf_min: 0.160,
                cf_mean: 0.168,
                cf_max: 0.175,
            },
            ParkProfile {
                park: "calais_wind".into(),
                technology: Technology::Wind,
                cf_min: 0.409,
                cf_mean: 0.427,
                cf_max: 0.465,
            },
        ],
    }
    .generate(&demand)?;

    println!("year  mean price  solar CF  wind CF");
    for (year, s) in &history {
        println!(
            "{year}  {:>10.2}  {:>8.3}  {:>7.3}",
            s.day_ahead.mean(),
            s.availability("albi_solar")?.mean(),
            s.availability("calais_wind")?.mean()
        );
    }
    let solar: BTreeMap<i32, _> = history
        .iter()
        .map(|(y, s)| (*y, s.ppa_availability["albi_solar"].clone()))
        .collect();
    let cf = ppa_capacity_stats(&solar)?;
    println!("solar CF min/mean/max: {:.3} / {:.3} / {:.3}", cf.min, cf.mean, cf.max);

    // price decomposition of one year and two stretched variants
    let base = &history[&2014];
    let parts = decompose_day_ahead(&base.day_ahead)?;
    let spread = |v: &[f64]| v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min);
    println!(
        "\n2014: mean {:.2}, monthly range {:.2}, within-day range {:.2}",
        parts.mean,
        spread(&parts.monthly),
        spread(&parts.within_day)
    );
    let mut extra = Vec::new();
    for (k, knobs) in [
        SynthesisKnobs { mean_scale: 1.3, seasonal_scale: 1.0, daily_spread_scale: 1.5 },
        SynthesisKnobs { mean_scale: 0.8, seasonal_scale: 2.0, daily_spread_scale: 0.5 },
    ]
    .iter()
    .enumerate()
    {
        let prices = synthesize_day_ahead(&base.day_ahead, knobs)?;
        println!("  variant {}: {knobs:?} -> mean {:.2}", k + 1, prices.mean());
        let label = format!("syn{}-2014", k + 1);
        extra.push(Scenario::new(
            label.clone(),
            ScenarioSource::Synthetic(label),
            prices,
            base.ppa_availability.clone(),
            base.demand.clone(),
        )?);
    }

    let (even, odd) = split_even_odd(&history)?;
    let pool = ScenarioSet::new("all", history.values().cloned().collect())?;
    let mut in_sample: Vec<Scenario> = even.scenarios().to_vec();
    in_sample.extend(extra);
    let in_sample = renormalize_set_mean(&ScenarioSet::new("in_sample", in_sample)?, pool.grand_mean_price())?;
    println!(
        "\nin-sample: {} scenarios, mean {:.2}; out-of-sample: {} scenarios, mean {:.2}",
        in_sample.len(),
        in_sample.grand_mean_price(),
        odd.len(),
        odd.grand_mean_price()
    );

    println!("\nproduct  in-sample  out-of-sample  window");
    let shapes = default_futures_shapes(horizon);
    let a = arbitrage_free_futures_prices(&in_sample, &shapes)?;
    let b = arbitrage_free_futures_prices(&odd, &shapes)?;
    for (x, y) in a.iter().zip(&b) {
        println!("{:<7}  {:>9.2}  {:>13.2}  [{}, {})", x.id(), x.price, y.price, x.h_start, x.h_end);
    }
    Ok(())
}
