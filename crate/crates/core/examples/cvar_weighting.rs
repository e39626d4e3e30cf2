//! Sweep the risk weight on the desk-study in-sample set and watch the
//! expected operating cost trade against its worst-decile mean.
//!
//!     cargo run --example cvar_weighting

use std::path::Path;

use h2plan::cli::Run;
use h2plan::policy::{solve_policy, PolicyOptions, PolicySpec, UncertaintyTags};

fn main() -> h2plan::Result<()> {
    let run = Run::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/desk_study/config.toml"))?;
    let history = run.history()?;
    let set = run.scenario_set("in_sample", &history)?;
    let plant = run.plant_for(&set)?;
    let opts = PolicyOptions {
        solver: run.solver(),
        ..Default::default()
    };

    println!(" beta  design €   E[op] €   CVaR €  electrolyser MW  PPA MWp");
    for beta in [0.0, 0.3, 0.6, 0.9, 1.0] {
        let s = solve_policy(&PolicySpec::stochastic(beta, false, UncertaintyTags::MARKET), &set, &plant, &opts)?;
        let ppa: f64 = s.design.ppa_mwp.values().sum();
        println!(
            "{beta:>5.1}  {:>8.0}  {:>8.0}  {:>7.0}  {:>15.3}  {:>7.2}",
            s.in_sample.design_cost, s.in_sample.expected_op_cost, s.in_sample.cvar_op_cost, s.design.electrolyzer_mw, ppa
        );
    }
    Ok(())
}
