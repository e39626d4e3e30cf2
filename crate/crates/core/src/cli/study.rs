//! Study orchestration: optimise every entry of a roster, test it, then
//! evaluate the roster's metrics.

use std::collections::BTreeMap;
use std::path::Path;

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Run;
use super::{policy_options, slug};
use crate::error::{Error, Result};
use crate::metrics::{hedge_ratio, metrics_csv, policy_delta, MetricSpec, PolicyDelta};
use crate::persist::{write_atomic, write_json};
use crate::policy::{solve_policy, PolicySolution, PolicySpec, UncertaintyTags};
use crate::scenario::ScenarioSet;
use crate::simulation::{run_test_set, DispatchOptions, TestReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    /// Five policies on the single-profile sets.
    Part1,
    /// Demand-aware policies on the mixed-demand sets.
    Part2,
    /// The risk-averse stochastic policy under three subsidy contexts.
    Prospective,
}

impl StudyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            StudyKind::Part1 => "part1",
            StudyKind::Part2 => "part2",
            StudyKind::Prospective => "prospective",
        }
    }
}

/// Subsidy context of a prospective entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Context {
    pub name: String,
    pub subsidy: f64,
    pub rfnbo_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyEntry {
    /// Unique within the study; equals the policy label outside the
    /// prospective study.
    pub name: String,
    pub policy: String,
    pub context: Option<Context>,
    pub in_sample: String,
    pub test_set: String,
    pub error: Option<String>,
    pub solution: Option<PolicySolution>,
    pub report: Option<TestReport>,
    pub hedge_ratio: Option<f64>,
    pub rfnbo_share_mean: Option<f64>,
    pub rfnbo_share_lowest: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: StudyKind,
    pub version: String,
    pub config_hash: String,
    pub entries: Vec<StudyEntry>,
    pub metrics: Vec<PolicyDelta>,
    /// Metrics not evaluated because an entry failed.
    pub skipped_metrics: Vec<String>,
}

impl StudyReport {
    pub fn failed(&self) -> bool {
        self.entries.iter().any(|e| e.error.is_some())
    }

    /// One row per entry for bar plots of mean and worst LCOH.
    pub fn plot_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let err = |e: csv::Error| Error::Serde(e.to_string());
        w.write_record([
            "entry",
            "policy",
            "context",
            "test_set",
            "mean_lcoh",
            "worst_lcoh",
            "rfnbo_share_mean",
            "rfnbo_share_lowest",
        ])
        .map_err(err)?;
        let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
        for e in &self.entries {
            w.write_record([
                e.name.clone(),
                e.policy.clone(),
                e.context.as_ref().map(|c| c.name.clone()).unwrap_or_default(),
                e.test_set.clone(),
                opt(e.report.as_ref().map(|r| r.mean_lcoh)),
                opt(e.report.as_ref().map(|r| r.worst_lcoh)),
                opt(e.rfnbo_share_mean),
                opt(e.rfnbo_share_lowest),
            ])
            .map_err(err)?;
        }
        w.into_inner().map_err(|e| Error::Serde(e.to_string()))
    }
}

struct Plan {
    name: String,
    spec: PolicySpec,
    context: Option<Context>,
    in_sample: String,
    test_set: String,
}

fn roster(run: &Run, kind: StudyKind) -> (Vec<Plan>, Vec<MetricSpec>) {
    let s = &run.config.study;
    let plan = |spec: PolicySpec, test_set: &str, context: Option<Context>| {
        let name = match &context {
            Some(c) => format!("{} [{}]", spec.label(), c.name),
            None => spec.label(),
        };
        Plan {
            name,
            in_sample: run.in_sample_for(&spec).to_string(),
            spec,
            context,
            test_set: test_set.to_string(),
        }
    };
    let market = UncertaintyTags::MARKET;
    match kind {
        StudyKind::Part1 => {
            let plans = vec![
                plan(PolicySpec::average_scenario(), &s.test_set_1, None),
                plan(PolicySpec::pessimistic_expert(false), &s.test_set_1, None),
                plan(PolicySpec::stochastic(0.0, true, market), &s.test_set_1, None),
                plan(PolicySpec::stochastic(0.9, false, market), &s.test_set_1, None),
                plan(PolicySpec::stochastic(0.9, true, market), &s.test_set_1, None),
            ];
            let l: Vec<String> = plans.iter().map(|p| p.name.clone()).collect();
            let metrics = vec![
                MetricSpec::new("VSS (risk-neutral)", &l[0], &l[2]),
                MetricSpec::new("VSS (risk-averse)", &l[1], &l[3]),
                MetricSpec::new("VRAS (deterministic)", &l[0], &l[1]),
                MetricSpec::new("VRAS (stochastic)", &l[2], &l[3]),
                MetricSpec::new("VAES", &l[4], &l[3]),
            ];
            (plans, metrics)
        }
        StudyKind::Part2 => {
            let plans = vec![
                plan(PolicySpec::pessimistic_expert(true), &s.test_set_2, None),
                plan(PolicySpec::stochastic(0.9, false, market), &s.test_set_2, None),
                plan(
                    PolicySpec::stochastic(0.9, false, UncertaintyTags::MARKET_AND_DEMAND),
                    &s.test_set_2,
                    None,
                ),
            ];
            let l: Vec<String> = plans.iter().map(|p| p.name.clone()).collect();
            let metrics = vec![
                MetricSpec::new("VSS", &l[0], &l[2]),
                MetricSpec::new("VS-Dem", &l[1], &l[2]),
            ];
            (plans, metrics)
        }
        StudyKind::Prospective => {
            let contexts = [("A", 0.0, 0.0), ("B", s.subsidy, 0.0), ("C", s.subsidy, 1.0)];
            let plans = contexts
                .iter()
                .map(|&(name, subsidy, rfnbo_min)| {
                    plan(
                        PolicySpec::stochastic(0.9, false, market),
                        &s.test_set_1,
                        Some(Context {
                            name: name.into(),
                            subsidy,
                            rfnbo_min,
                        }),
                    )
                })
                .collect();
            (plans, Vec::new())
        }
    }
}

fn execute(run: &Run, plan: &Plan, sets: &BTreeMap<String, ScenarioSet>) -> Result<(PolicySolution, TestReport)> {
    let with_context = |set: &ScenarioSet| -> Result<_> {
        let mut plant = run.plant_for(set)?;
        if let Some(c) = &plan.context {
            plant.subsidy = c.subsidy;
            plant.rfnbo_min = c.rfnbo_min;
        }
        Ok(plant)
    };
    let in_sample = &sets[&plan.in_sample];
    let test_set = &sets[&plan.test_set];
    let solution = solve_policy(&plan.spec, in_sample, &with_context(in_sample)?, &policy_options(run))?;
    info!("optimised {}", plan.name);
    let opts = DispatchOptions {
        solver: run.solver(),
        keep_trace: false,
        jobs: None,
    };
    let report = run_test_set(&plan.name, &solution.design, test_set, &with_context(test_set)?, &opts)?;
    info!("tested {} on {}", plan.name, plan.test_set);
    Ok((solution, report))
}

/// Run `kind` and write its artefacts under `<out>/<study>/`.
pub fn run_study(run: &Run, kind: StudyKind, out: &Path) -> Result<StudyReport> {
    let (plans, metric_specs) = roster(run, kind);
    let history = run.history()?;
    let mut sets = BTreeMap::new();
    for p in &plans {
        for name in [&p.in_sample, &p.test_set] {
            if !sets.contains_key(name) {
                sets.insert(name.clone(), run.scenario_set(name, &history)?);
            }
        }
    }
    let results: Vec<Result<(PolicySolution, TestReport)>> =
        plans.par_iter().map(|p| execute(run, p, &sets)).collect();

    let mut entries = Vec::with_capacity(plans.len());
    for (plan, result) in plans.iter().zip(results) {
        let mut entry = StudyEntry {
            name: plan.name.clone(),
            policy: plan.spec.label(),
            context: plan.context.clone(),
            in_sample: plan.in_sample.clone(),
            test_set: plan.test_set.clone(),
            error: None,
            solution: None,
            report: None,
            hedge_ratio: None,
            rfnbo_share_mean: None,
            rfnbo_share_lowest: None,
        };
        match result {
            Ok((solution, report)) => {
                let shares: Vec<f64> = report.scenarios.iter().filter_map(|s| s.rfnbo_share).collect();
                if !shares.is_empty() {
                    entry.rfnbo_share_mean = Some(shares.iter().sum::<f64>() / shares.len() as f64);
                    entry.rfnbo_share_lowest = Some(shares.iter().copied().fold(f64::INFINITY, f64::min));
                }
                entry.hedge_ratio = hedge_ratio(&solution).ok();
                entry.solution = Some(solution);
                entry.report = Some(report);
            }
            Err(e) => {
                log::warn!("{} failed: {e}", plan.name);
                entry.error = Some(e.to_string());
            }
        }
        entries.push(entry);
    }

    let mut metrics = Vec::new();
    let mut skipped_metrics = Vec::new();
    let report_of = |name: &str| entries.iter().find(|e| e.name == name).and_then(|e| e.report.as_ref());
    for m in &metric_specs {
        match (report_of(&m.baseline), report_of(&m.candidate)) {
            (Some(a), Some(b)) => metrics.push(policy_delta(a, b, &m.name, false)?),
            _ => skipped_metrics.push(m.name.clone()),
        }
    }

    let report = StudyReport {
        study: kind,
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: run.hash.clone(),
        entries,
        metrics,
        skipped_metrics,
    };
    write_study(&report, &out.join(kind.as_str()))?;
    Ok(report)
}

fn write_study(report: &StudyReport, dir: &Path) -> Result<()> {
    for e in &report.entries {
        let stem = slug(&e.name);
        if let Some(s) = &e.solution {
            write_json(&dir.join("solutions").join(format!("{stem}.json")), s)?;
        }
        if let Some(r) = &e.report {
            r.write(&dir.join("reports"), &format!("{stem}__{}", slug(&e.test_set)))?;
        }
    }
    write_json(&dir.join("metrics.json"), &report.metrics)?;
    write_atomic(&dir.join("metrics.csv"), &metrics_csv(&report.metrics)?)?;
    write_atomic(&dir.join("plot.csv"), &report.plot_csv()?)?;
    write_json(&dir.join("study.json"), report)
}
