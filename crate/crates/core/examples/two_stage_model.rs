//! Assemble the two-stage program on a hand-made two-scenario day, solve
//! it, and dump the LP as text.
//!
//!     cargo run --example two_stage_model [-- out.lp]

use std::collections::BTreeMap;

use h2plan::lp::SolverOptions;
use h2plan::model::{assemble_two_stage, Phase, PlantConfig};
use h2plan::scenario::{
    arbitrage_free_futures_prices, default_futures_shapes, HourlySeries, LoadProfile, PpaContract, Scenario, ScenarioSet,
    ScenarioSource, Technology, Unit,
};

fn day(label: &str, level: f64, sun: f64) -> h2plan::Result<Scenario> {
    let price: Vec<f64> = (0..24)
        .map(|h| level + 25.0 * (std::f64::consts::PI * (h as f64 - 6.0) / 12.0).sin())
        .collect();
    let solar: Vec<f64> = (0..24)
        .map(|h| if (7..19).contains(&h) { sun * (std::f64::consts::PI * (h as f64 - 7.0) / 12.0).sin() } else { 0.0 })
        .collect();
    Scenario::new(
        label,
        ScenarioSource::Synthetic(label.into()),
        HourlySeries::new(Unit::EurPerMwh, price)?,
        BTreeMap::from([("solar".to_string(), HourlySeries::new(Unit::Availability, solar)?)]),
        HourlySeries::constant(Unit::MwH2, 1.0, 24)?,
    )
}

fn main() -> h2plan::Result<()> {
    let set = ScenarioSet::new("toy", vec![day("calm", 60.0, 0.9)?, day("tight", 110.0, 0.4)?])?;
    // one day standing for a year: scale capital costs accordingly
    let f = 24.0 / 8760.0;
    let mut cfg = PlantConfig {
        ppa: vec![PpaContract {
            park: "solar".into(),
            technology: Technology::Solar,
            price: 55.0,
            max_mwp: 20.0,
        }],
        // a 24-hour quarter window holds no peak hours: baseload only
        futures: arbitrage_free_futures_prices(
            &set,
            &default_futures_shapes(24)
                .into_iter()
                .filter(|f| f.profile == LoadProfile::Baseload)
                .collect::<Vec<_>>(),
        )?,
        ..PlantConfig::default()
    };
    for a in [&mut cfg.electrolyzer, &mut cfg.storage_energy, &mut cfg.storage_power, &mut cfg.network] {
        a.capex *= f;
    }
    cfg.risk.beta = 0.5;

    let model = assemble_two_stage(&cfg, &set, Phase::Optimize)?;
    println!(
        "{} columns, {} rows, {} nonzeros",
        model.lp.num_columns(),
        model.lp.num_rows(),
        model.lp.num_nonzeros()
    );
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, model.lp.to_text()).map_err(|e| h2plan::Error::Config(format!("{path}: {e}")))?;
        println!("LP written to {path}");
    }

    let (out, sol) = model.solve(&SolverOptions::default())?;
    println!("solver: {:?} in {} iterations", sol.status, sol.stats.iterations);
    let d = &out.design;
    println!(
        "electrolyser {:.3} MW, storage {:.3} MWh / {:.3} MW, grid {:.3} MW, solar PPA {:.3} MWp",
        d.electrolyzer_mw, d.storage_mwh, d.storage_mw, d.network_mw, d.ppa_mwp["solar"]
    );
    println!("futures bought: {:.3} MWh", d.total_futures_mwh());
    println!(
        "design {:.2} €, expected operation {:.2} €, CVaR {:.2} €, objective {:.2} €",
        out.design_cost, out.expected_op_cost, out.cvar_op_cost, out.objective
    );
    for (t, cost) in out.traces.iter().zip(&out.op_costs) {
        let sum = |v: &[f64]| v.iter().sum::<f64>();
        println!(
            "  {:<6} cost {:>8.2} €  bought {:>6.2} MWh  sold {:>6.2} MWh  unserved {:.3} MWh-H2",
            t.label,
            cost,
            sum(&t.da_buy),
            sum(&t.da_sell),
            sum(&t.hd_curt)
        );
    }
    Ok(())
}
