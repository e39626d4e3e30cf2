//! Optimise one design on the in-sample set, then dispatch it on every
//! held-out scenario and print the LCOH distribution.
//!
//!     cargo run --example out_of_sample_dispatch

use std::path::Path;

use h2plan::cli::Run;
use h2plan::policy::{solve_policy, PolicyOptions, PolicySpec, UncertaintyTags};
use h2plan::simulation::{run_test_set, DispatchOptions};

fn main() -> h2plan::Result<()> {
    let run = Run::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/desk_study/config.toml"))?;
    let history = run.history()?;
    let in_sample = run.scenario_set("in_sample", &history)?;
    let test_set = run.scenario_set("test_set_1", &history)?;

    let spec = PolicySpec::stochastic(0.9, false, UncertaintyTags::MARKET);
    let solution = solve_policy(
        &spec,
        &in_sample,
        &run.plant_for(&in_sample)?,
        &PolicyOptions {
            solver: run.solver(),
            ..Default::default()
        },
    )?;
    let report = run_test_set(
        &solution.label,
        &solution.design,
        &test_set,
        &run.plant_for(&test_set)?,
        &DispatchOptions::default(),
    )?;

    println!("{} on {} ({} scenarios)", report.policy, report.test_set, report.scenarios.len());
    println!("scenario      LCOH €/kg  load factor  green share  unserved MWh-H2");
    for r in &report.scenarios {
        println!(
            "{:<12}  {:>9.3}  {:>11.3}  {:>11.3}  {:>15.4}",
            r.label,
            r.lcoh,
            r.load_factor,
            r.rfnbo_share.unwrap_or(0.0),
            r.curtailed_mwh_h2
        );
    }
    println!("mean {:.3} €/kg, worst {:.3} €/kg", report.mean_lcoh, report.worst_lcoh);
    Ok(())
}
