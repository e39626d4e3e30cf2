//! Out-of-sample testing of a fixed design.
//!
//! Each test scenario is a fresh single-scenario dispatch LP with every
//! design column pinned, resale allowed and the test curtailment penalty.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::SolverOptions;
use crate::model::{
    assemble_two_stage, design_cost, evaluate_operational_cost, DesignDecisions, DispatchTrace, Phase, PlantConfig,
};
use crate::persist::{write_atomic, write_json};
use crate::policy::config_hash;
use crate::scenario::{HourlySeries, Scenario, ScenarioSet};

#[derive(Debug, Clone, Default)]
pub struct DispatchOptions {
    pub solver: SolverOptions,
    /// Keep the hourly trace in each result.
    pub keep_trace: bool,
    /// Worker threads for [`run_test_set`]; `None` uses the global pool.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchResult {
    pub label: String,
    /// Operating cost, €.
    pub op_cost: f64,
    /// €/kg.
    pub lcoh: f64,
    pub day_ahead_bought_mwh: f64,
    pub day_ahead_sold_mwh: f64,
    /// PPA energy paid for, dispatched or not, MWh.
    pub ppa_paid_mwh: f64,
    pub ppa_curtailed_mwh: f64,
    pub network_mwh: f64,
    pub demand_mwh_h2: f64,
    pub curtailed_mwh_h2: f64,
    pub production_mwh_h2: f64,
    pub green_mwh_h2: f64,
    /// Mean electrolyser loading over the horizon, 0 without an electrolyser.
    pub load_factor: f64,
    /// Green share of production; absent when nothing was produced.
    pub rfnbo_share: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<DispatchTrace>,
}

/// Levelised cost of hydrogen, €/kg: total cost over contracted demand.
pub fn lcoh(design_cost: f64, op_cost: f64, demand: &HourlySeries, h2_mass: f64) -> Result<f64> {
    let total = demand.sum();
    if !(total > 0.0) || !(h2_mass > 0.0) {
        return Err(Error::Degenerate(format!(
            "levelised cost needs positive demand and mass factor, got {total} MWh and {h2_mass} kg/MWh"
        )));
    }
    Ok((design_cost + op_cost) / (h2_mass * total))
}

/// Dispatch `design` on one scenario.
pub fn dispatch(
    design: &DesignDecisions,
    scenario: &Scenario,
    cfg: &PlantConfig,
    opts: &DispatchOptions,
) -> Result<DispatchResult> {
    let fixed_cost = design_cost(cfg, design)?;
    dispatch_with_cost(design, fixed_cost, scenario, cfg, opts)
}

fn dispatch_with_cost(
    design: &DesignDecisions,
    fixed_cost: f64,
    scenario: &Scenario,
    cfg: &PlantConfig,
    opts: &DispatchOptions,
) -> Result<DispatchResult> {
    let mut cfg = cfg.clone();
    cfg.risk.beta = 0.0;
    let set = ScenarioSet::new(scenario.label.clone(), vec![scenario.clone()])?;
    let mut model = assemble_two_stage(&cfg, &set, Phase::Test)?;
    model.fix_design(design)?;
    let (outcome, _) = model
        .solve(&opts.solver)
        .map_err(|e| e.with_context(format!("dispatch of {}", scenario.label)))?;
    let trace = outcome.traces.into_iter().next().expect("one scenario");
    let op_cost = evaluate_operational_cost(&cfg, scenario, design, &trace, Phase::Test)?;
    let eta = cfg.efficiency.electrolyzer;
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let mut ppa_paid = 0.0;
    for c in &cfg.ppa {
        ppa_paid += design.ppa_mwp[&c.park] * scenario.availability(&c.park)?.sum();
    }
    let production = eta * sum(&trace.ez_in);
    let green = sum(&trace.green);
    let horizon = scenario.horizon() as f64;
    let load_factor = if design.electrolyzer_mw > 0.0 {
        (sum(&trace.ez_in) / (horizon * design.electrolyzer_mw)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(DispatchResult {
        label: scenario.label.clone(),
        op_cost,
        lcoh: lcoh(fixed_cost, op_cost, &scenario.demand, cfg.h2_mass)?,
        day_ahead_bought_mwh: sum(&trace.da_buy),
        day_ahead_sold_mwh: sum(&trace.da_sell),
        ppa_paid_mwh: ppa_paid,
        ppa_curtailed_mwh: sum(&trace.ppa_curt),
        network_mwh: sum(&trace.nw),
        demand_mwh_h2: scenario.demand.sum(),
        curtailed_mwh_h2: sum(&trace.hd_curt),
        production_mwh_h2: production,
        green_mwh_h2: green,
        load_factor,
        rfnbo_share: (production > 0.0).then(|| (green / production).clamp(0.0, 1.0)),
        trace: opts.keep_trace.then_some(trace),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    /// Label of the tested design.
    pub policy: String,
    pub test_set: String,
    pub test_set_hash: String,
    pub config_hash: String,
    pub design: DesignDecisions,
    pub design_cost: f64,
    pub mean_lcoh: f64,
    pub worst_lcoh: f64,
    pub scenarios: Vec<DispatchResult>,
}

impl TestReport {
    pub fn lcoh_values(&self) -> Vec<f64> {
        self.scenarios.iter().map(|s| s.lcoh).collect()
    }

    /// One row per scenario: label, operating cost, LCOH, load factor, green share.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Serde(e.to_string());
        w.write_record(["scenario", "op_cost_eur", "lcoh_eur_per_kg", "load_factor", "rfnbo_share"])
            .map_err(err)?;
        for s in &self.scenarios {
            w.write_record([
                s.label.clone(),
                s.op_cost.to_string(),
                s.lcoh.to_string(),
                s.load_factor.to_string(),
                s.rfnbo_share.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .map_err(err)?;
        }
        w.into_inner().map_err(|e| Error::Serde(e.to_string()))
    }

    /// Write `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        write_json(&dir.join(format!("{stem}.json")), self)?;
        write_atomic(&dir.join(format!("{stem}.csv")), &self.to_csv()?)
    }
}

/// Dispatch `design` on every scenario of `test_set`. Scenarios run in
/// parallel; the report keeps the set's order.
pub fn run_test_set(
    policy: &str,
    design: &DesignDecisions,
    test_set: &ScenarioSet,
    cfg: &PlantConfig,
    opts: &DispatchOptions,
) -> Result<TestReport> {
    if test_set.is_empty() {
        return Err(Error::Config(format!("test set {} is empty", test_set.id)));
    }
    test_set.require_parks(cfg.parks())?;
    let fixed_cost = design_cost(cfg, design)?;
    let work = || -> Vec<Result<DispatchResult>> {
        test_set
            .scenarios()
            .par_iter()
            .map(|s| dispatch_with_cost(design, fixed_cost, s, cfg, opts))
            .collect()
    };
    let results = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    let scenarios = results.into_iter().collect::<Result<Vec<_>>>()?;
    let (mean_lcoh, worst_lcoh) = summarize(&scenarios);
    Ok(TestReport {
        policy: policy.to_string(),
        test_set: test_set.id.clone(),
        test_set_hash: test_set.content_hash(),
        config_hash: config_hash(cfg)?,
        design: design.clone(),
        design_cost: fixed_cost,
        mean_lcoh,
        worst_lcoh,
        scenarios,
    })
}

fn summarize(results: &[DispatchResult]) -> (f64, f64) {
    let n = results.len() as f64;
    let mean = results.iter().map(|r| r.lcoh).sum::<f64>() / n;
    let worst = results.iter().map(|r| r.lcoh).fold(f64::NEG_INFINITY, f64::max);
    (mean, worst)
}
