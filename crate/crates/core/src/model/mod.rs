//! The two-stage planning model.
//!
//! First-stage columns (equipment, futures, subscriptions, PPA capacity) are
//! shared by every scenario. Each scenario adds an hourly dispatch block:
//!
//! | symbol      | meaning                                        | bounds            |
//! |-------------|------------------------------------------------|-------------------|
//! | `da_buy`    | energy bought on the day-ahead market, MWh     | `>= 0`            |
//! | `da_sell`   | energy resold on the day-ahead market, MWh     | `>= 0`            |
//! | `ez_in`     | electrolyser input, MW                         | `<= ez`           |
//! | `hs_in`     | hydrogen into storage, MW-H2                   | `<= hs_p`         |
//! | `hs_out`    | hydrogen out of storage, MW-H2                 | `<= hs_p`         |
//! | `hd_curt`   | unserved hydrogen demand, MW-H2                | `<= demand`       |
//! | `nw`        | power through the grid connection, MW          | `<= nw_p`, `<= sub_i` |
//! | `green`     | certified-green hydrogen, MWh-H2               | see below         |
//! | `soc`       | storage level at the start of the hour, MWh-H2 | `<= hs_e`         |
//! | `ppa_out`   | PPA energy used, all parks, MWh                | `>= 0`            |
//! | `ppa_curt`  | PPA energy curtailed, all parks, MWh           | `>= 0`            |
//!
//! plus one closing `soc` column after the last hour. Column count is
//! `4 + F + I + A` design columns (futures products, tariff slots, parks),
//! `S * (11 H + 1)` dispatch columns and `1 + S` CVaR auxiliaries.
//!
//! PPA output is aggregated across parks: with take-or-pay pricing only the
//! total used energy affects costs and balances.

mod config;
mod design;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use config::{
    annualize_capex, AnnualCosts, Asset, Efficiencies, NetworkTariff, ParkReference, Penalties,
    PlantConfig, Risk, SlotRule, TariffSlot, CASE_STUDY_PARKS,
};
pub use design::{design_cost, DesignDecisions};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, Sense, Solution, SolverOptions, Tag};
use crate::scenario::{LoadProfile, Scenario, ScenarioSet};

const INF: f64 = f64::INFINITY;

/// Optimisation builds plans, testing replays them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Optimize,
    Test,
}

/// Affine expression `constant + Σ coef * x[col]`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CostExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl CostExpr {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: Vec::new(),
            constant: c,
        }
    }

    pub fn add(&mut self, col: usize, coef: f64) {
        if coef != 0.0 {
            self.terms.push((col, coef));
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignColumns {
    pub electrolyzer: usize,
    pub storage_energy: usize,
    pub storage_power: usize,
    pub network: usize,
    /// One per `cfg.futures` entry.
    pub futures: Vec<usize>,
    /// One per tariff slot.
    pub subscriptions: Vec<usize>,
    /// One per `cfg.ppa` entry.
    pub ppa: Vec<usize>,
}

/// Hourly dispatch columns of one scenario (index `h - 1` for hour `h`).
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioColumns {
    pub da_buy: Vec<usize>,
    pub da_sell: Vec<usize>,
    pub ez_in: Vec<usize>,
    pub hs_in: Vec<usize>,
    pub hs_out: Vec<usize>,
    pub hd_curt: Vec<usize>,
    pub nw: Vec<usize>,
    pub green: Vec<usize>,
    /// `H + 1` entries; the last is the closing level.
    pub soc: Vec<usize>,
    pub ppa_out: Vec<usize>,
    pub ppa_curt: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvarColumns {
    pub eta: usize,
    pub zeta_first: usize,
}

pub fn register_design(lp: &mut LinearProgram, cfg: &PlantConfig) -> DesignColumns {
    let e = &cfg.electrolyzer;
    DesignColumns {
        electrolyzer: lp.add_column(Tag::new("ez_p"), 0.0, e.max, 0.0),
        storage_energy: lp.add_column(Tag::new("hs_e"), 0.0, cfg.storage_energy.max, 0.0),
        storage_power: lp.add_column(Tag::new("hs_p"), 0.0, cfg.storage_power.max, 0.0),
        network: lp.add_column(Tag::new("nw_p"), 0.0, cfg.network.max, 0.0),
        futures: (0..cfg.futures.len())
            .map(|k| lp.add_column(Tag::new("futures").item(k), 0.0, cfg.futures_max_mwh, 0.0))
            .collect(),
        subscriptions: cfg
            .tariff
            .slots
            .iter()
            .enumerate()
            .map(|(k, s)| lp.add_column(Tag::new("nw_sub").item(k), 0.0, s.max_mw, 0.0))
            .collect(),
        ppa: cfg
            .ppa
            .iter()
            .enumerate()
            .map(|(k, p)| lp.add_column(Tag::new("ppa_p").item(k), 0.0, p.max_mwp, 0.0))
            .collect(),
    }
}

fn check_scenario(scenario: &Scenario, cfg: &PlantConfig) -> Result<()> {
    let h = scenario.horizon();
    for f in &cfg.futures {
        if f.h_end > h + 1 {
            return Err(Error::Schema(format!(
                "futures {} ends at hour {} beyond the {h}-hour horizon of {}",
                f.id(),
                f.h_end - 1,
                scenario.label
            )));
        }
    }
    for p in cfg.parks() {
        scenario.availability(p)?;
    }
    Ok(())
}

/// Dispatch columns and operating constraints of scenario `s`: equipment
/// limits, hydrogen, electricity and market balances, PPA split, storage
/// recursion and subscription cover.
pub fn build_stage_constraints(
    lp: &mut LinearProgram,
    scenario: &Scenario,
    s: usize,
    cfg: &PlantConfig,
    d: &DesignColumns,
) -> Result<ScenarioColumns> {
    check_scenario(scenario, cfg)?;
    let horizon = scenario.horizon();
    let demand = scenario.demand.values();
    let mut c = ScenarioColumns {
        da_buy: Vec::with_capacity(horizon),
        da_sell: Vec::with_capacity(horizon),
        ez_in: Vec::with_capacity(horizon),
        hs_in: Vec::with_capacity(horizon),
        hs_out: Vec::with_capacity(horizon),
        hd_curt: Vec::with_capacity(horizon),
        nw: Vec::with_capacity(horizon),
        green: Vec::with_capacity(horizon),
        soc: Vec::with_capacity(horizon + 1),
        ppa_out: Vec::with_capacity(horizon),
        ppa_curt: Vec::with_capacity(horizon),
    };
    for h in 1..=horizon {
        let t = |sym: &'static str| Tag::new(sym).scenario(s).hour(h);
        c.da_buy.push(lp.add_column(t("da_buy"), 0.0, INF, 0.0));
        c.da_sell.push(lp.add_column(t("da_sell"), 0.0, INF, 0.0));
        c.ez_in.push(lp.add_column(t("ez_in"), 0.0, INF, 0.0));
        c.hs_in.push(lp.add_column(t("hs_in"), 0.0, INF, 0.0));
        c.hs_out.push(lp.add_column(t("hs_out"), 0.0, INF, 0.0));
        c.hd_curt.push(lp.add_column(t("hd_curt"), 0.0, demand[h - 1], 0.0));
        c.nw.push(lp.add_column(t("nw"), 0.0, INF, 0.0));
        c.green.push(lp.add_column(t("green"), 0.0, INF, 0.0));
        c.soc.push(lp.add_column(t("soc"), 0.0, INF, 0.0));
        c.ppa_out.push(lp.add_column(t("ppa_out"), 0.0, INF, 0.0));
        c.ppa_curt.push(lp.add_column(t("ppa_curt"), 0.0, INF, 0.0));
    }
    c.soc.push(lp.add_column(Tag::new("soc").scenario(s).hour(horizon + 1), 0.0, INF, 0.0));

    let eff = &cfg.efficiency;
    let availability: Vec<&[f64]> = cfg
        .ppa
        .iter()
        .map(|p| scenario.availability(&p.park).map(|a| a.values()))
        .collect::<Result<_>>()?;
    let slots = cfg.tariff.slot_map(horizon);
    for h in 1..=horizon {
        let i = h - 1;
        let t = |sym: &'static str| Tag::new(sym).scenario(s).hour(h);
        lp.add_row(t("cap_ez"), vec![(c.ez_in[i], 1.0), (d.electrolyzer, -1.0)], Sense::Le, 0.0);
        lp.add_row(t("cap_hs_in"), vec![(c.hs_in[i], 1.0), (d.storage_power, -1.0)], Sense::Le, 0.0);
        lp.add_row(t("cap_hs_out"), vec![(c.hs_out[i], 1.0), (d.storage_power, -1.0)], Sense::Le, 0.0);
        lp.add_row(t("cap_nw"), vec![(c.nw[i], 1.0), (d.network, -1.0)], Sense::Le, 0.0);
        lp.add_row(t("cap_soc"), vec![(c.soc[i], 1.0), (d.storage_energy, -1.0)], Sense::Le, 0.0);

        let mut split = vec![(c.ppa_out[i], 1.0), (c.ppa_curt[i], 1.0)];
        for (k, a) in availability.iter().enumerate() {
            split.push((d.ppa[k], -a[i]));
        }
        lp.add_row(t("ppa_split"), split, Sense::Eq, 0.0);

        lp.add_row(
            t("h2_balance"),
            vec![
                (c.ez_in[i], eff.electrolyzer),
                (c.hs_out[i], 1.0),
                (c.hs_in[i], -1.0),
                (c.hd_curt[i], 1.0),
            ],
            Sense::Eq,
            demand[i],
        );
        lp.add_row(t("elec_balance"), vec![(c.nw[i], 1.0), (c.ez_in[i], -1.0)], Sense::Eq, 0.0);

        let mut market = vec![
            (c.da_buy[i], 1.0),
            (c.ppa_out[i], 1.0),
            (c.da_sell[i], -1.0),
            (c.nw[i], -1.0),
        ];
        for (k, f) in cfg.futures.iter().enumerate() {
            let rate = f.delivery_rate(h);
            if rate != 0.0 {
                market.push((d.futures[k], rate));
            }
        }
        lp.add_row(t("market_balance"), market, Sense::Eq, 0.0);

        lp.add_row(
            t("soc_step"),
            vec![
                (c.soc[i + 1], 1.0),
                (c.soc[i], -(1.0 - eff.storage_loss_per_hour)),
                (c.hs_in[i], -eff.storage_in),
                (c.hs_out[i], 1.0 / eff.storage_out),
            ],
            Sense::Eq,
            0.0,
        );
        lp.add_row(
            t("subscription"),
            vec![(c.nw[i], 1.0), (d.subscriptions[slots[i]], -1.0)],
            Sense::Le,
            0.0,
        );
    }
    lp.add_row(
        Tag::new("cap_soc").scenario(s).hour(horizon + 1),
        vec![(c.soc[horizon], 1.0), (d.storage_energy, -1.0)],
        Sense::Le,
        0.0,
    );
    lp.add_row(
        Tag::new("soc_initial").scenario(s),
        vec![(c.soc[0], 1.0), (d.storage_energy, -eff.initial_soc)],
        Sense::Eq,
        0.0,
    );
    lp.add_row(
        Tag::new("soc_terminal").scenario(s),
        vec![(c.soc[horizon], 1.0), (c.soc[0], -1.0)],
        Sense::Ge,
        0.0,
    );
    Ok(c)
}

/// Green-hydrogen eligibility: hourly caps by PPA-powered and total
/// production, plus the minimum yearly share when `rfnbo_min > 0`.
pub fn build_rfnbo(lp: &mut LinearProgram, s: usize, cfg: &PlantConfig, c: &ScenarioColumns) {
    let eta = cfg.efficiency.electrolyzer;
    for i in 0..c.green.len() {
        let t = |sym: &'static str| Tag::new(sym).scenario(s).hour(i + 1);
        lp.add_row(t("green_ppa"), vec![(c.green[i], 1.0), (c.ppa_out[i], -eta)], Sense::Le, 0.0);
        lp.add_row(t("green_prod"), vec![(c.green[i], 1.0), (c.ez_in[i], -eta)], Sense::Le, 0.0);
    }
    if cfg.rfnbo_min > 0.0 {
        let mut row: Vec<(usize, f64)> = c.green.iter().map(|&j| (j, 1.0)).collect();
        row.extend(c.ez_in.iter().map(|&j| (j, -cfg.rfnbo_min * eta)));
        lp.add_row(Tag::new("green_min").scenario(s), row, Sense::Ge, 0.0);
    }
}

/// Forbid day-ahead resale.
pub fn apply_no_arbitrage(lp: &mut LinearProgram, blocks: &[ScenarioColumns]) {
    for c in blocks {
        for &j in &c.da_sell {
            lp.fix(j, 0.0);
        }
    }
}

/// Annualised design cost as an expression over the design columns.
pub fn build_design_cost(cfg: &PlantConfig, d: &DesignColumns) -> Result<CostExpr> {
    let a = cfg.annual_costs()?;
    let mut e = CostExpr::default();
    e.add(d.electrolyzer, a.electrolyzer);
    e.add(d.storage_energy, a.storage_energy);
    e.add(d.storage_power, a.storage_power);
    e.add(d.network, a.network);
    for (k, f) in cfg.futures.iter().enumerate() {
        e.add(d.futures[k], f.price + cfg.futures_fee);
    }
    for (k, s) in cfg.tariff.slots.iter().enumerate() {
        e.add(d.subscriptions[k], s.subscription_cost);
    }
    Ok(e)
}

/// Operating cost of one scenario: net day-ahead purchases, take-or-pay PPA
/// energy, unserved-demand penalty, network energy charges, minus the
/// green-hydrogen subsidy.
pub fn build_operational_cost(
    scenario: &Scenario,
    cfg: &PlantConfig,
    d: &DesignColumns,
    c: &ScenarioColumns,
    phase: Phase,
) -> Result<CostExpr> {
    let price = scenario.day_ahead.values();
    let penalty = cfg.penalty(phase);
    let slots = cfg.tariff.slot_map(scenario.horizon());
    let mut e = CostExpr::default();
    for i in 0..scenario.horizon() {
        e.add(c.da_buy[i], price[i]);
        e.add(c.da_sell[i], -price[i]);
        e.add(c.hd_curt[i], penalty);
        e.add(c.nw[i], cfg.tariff.slots[slots[i]].energy_charge);
        e.add(c.green[i], -cfg.subsidy);
    }
    for (k, p) in cfg.ppa.iter().enumerate() {
        let energy = scenario.availability(&p.park)?.sum();
        e.add(d.ppa[k], energy * p.price);
    }
    Ok(e)
}

/// Install `J^d + (1-β) Σ p_s J_s + β (η + Σ p_s ζ_s / (1-α))` with
/// `ζ_s >= J_s - η`. At `β = 0` the auxiliaries are pinned to zero and the
/// tail rows are left out.
pub fn add_cvar_objective(
    lp: &mut LinearProgram,
    design_cost: &CostExpr,
    costs: &[CostExpr],
    probabilities: &[f64],
    beta: f64,
    alpha: f64,
) -> Result<CvarColumns> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Config(format!("CVaR alpha {alpha} outside [0, 1)")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Config(format!("risk weight beta {beta} outside [0, 1]")));
    }
    if costs.len() != probabilities.len() {
        return Err(Error::Schema(format!(
            "{} cost expressions for {} probabilities",
            costs.len(),
            probabilities.len()
        )));
    }
    let active = beta > 0.0;
    let (lo, hi) = if active { (-INF, INF) } else { (0.0, 0.0) };
    let eta = lp.add_column(Tag::new("cvar_eta"), lo, hi, 0.0);
    let zeta_first = lp.num_columns();
    for s in 0..costs.len() {
        lp.add_column(Tag::new("cvar_zeta").scenario(s), 0.0, if active { INF } else { 0.0 }, 0.0);
    }
    for &(j, a) in &design_cost.terms {
        lp.add_objective(j, a);
    }
    lp.offset += design_cost.constant;
    for (s, (cost, &p)) in costs.iter().zip(probabilities).enumerate() {
        let w = (1.0 - beta) * p;
        for &(j, a) in &cost.terms {
            lp.add_objective(j, w * a);
        }
        lp.offset += w * cost.constant;
        if active {
            lp.add_objective(zeta_first + s, beta * p / (1.0 - alpha));
            let mut row: Vec<(usize, f64)> = vec![(zeta_first + s, 1.0), (eta, 1.0)];
            row.extend(cost.terms.iter().map(|&(j, a)| (j, -a)));
            lp.add_row(Tag::new("cvar_tail").scenario(s), row, Sense::Ge, cost.constant);
        }
    }
    if active {
        lp.add_objective(eta, beta);
    }
    Ok(CvarColumns { eta, zeta_first })
}

/// Conditional value-at-risk of a discrete cost distribution: the mean of
/// the worst `1 - α` probability mass.
pub fn cvar(costs: &[f64], probabilities: &[f64], alpha: f64) -> f64 {
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[b].total_cmp(&costs[a]).then(a.cmp(&b)));
    let tail = 1.0 - alpha;
    let mut left = tail;
    let mut acc = 0.0;
    for k in order {
        if left <= 0.0 {
            break;
        }
        let take = probabilities[k].min(left);
        acc += take * costs[k];
        left -= take;
    }
    acc / tail
}

/// An assembled deterministic-equivalent program with its column maps.
#[derive(Debug, Clone)]
pub struct TwoStageModel {
    pub lp: LinearProgram,
    pub design: DesignColumns,
    pub blocks: Vec<ScenarioColumns>,
    pub design_cost: CostExpr,
    pub op_costs: Vec<CostExpr>,
    pub cvar: CvarColumns,
    pub phase: Phase,
    pub config: PlantConfig,
    pub probabilities: Vec<f64>,
    pub labels: Vec<String>,
    pub no_arbitrage: bool,
}

/// Build the full two-stage program. Resale is forbidden only when
/// `cfg.no_arbitrage` is set and `phase` is [`Phase::Optimize`].
pub fn assemble_two_stage(cfg: &PlantConfig, set: &ScenarioSet, phase: Phase) -> Result<TwoStageModel> {
    cfg.validate()?;
    set.require_parks(cfg.parks())?;
    let mut lp = LinearProgram::new();
    let design = register_design(&mut lp, cfg);
    let mut blocks = Vec::with_capacity(set.len());
    for (s, sc) in set.scenarios().iter().enumerate() {
        let c = build_stage_constraints(&mut lp, sc, s, cfg, &design)?;
        build_rfnbo(&mut lp, s, cfg, &c);
        blocks.push(c);
    }
    let no_arbitrage = cfg.no_arbitrage && phase == Phase::Optimize;
    if no_arbitrage {
        apply_no_arbitrage(&mut lp, &blocks);
    }
    let design_cost = build_design_cost(cfg, &design)?;
    let op_costs = set
        .scenarios()
        .iter()
        .zip(&blocks)
        .map(|(sc, c)| build_operational_cost(sc, cfg, &design, c, phase))
        .collect::<Result<Vec<_>>>()?;
    let cvar = add_cvar_objective(
        &mut lp,
        &design_cost,
        &op_costs,
        set.probabilities(),
        cfg.risk.beta,
        cfg.risk.alpha,
    )?;
    Ok(TwoStageModel {
        lp,
        design,
        blocks,
        design_cost,
        op_costs,
        cvar,
        phase,
        config: cfg.clone(),
        probabilities: set.probabilities().to_vec(),
        labels: set.scenarios().iter().map(|s| s.label.clone()).collect(),
        no_arbitrage,
    })
}

/// Hourly operating trace of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchTrace {
    pub label: String,
    pub da_buy: Vec<f64>,
    pub da_sell: Vec<f64>,
    pub ez_in: Vec<f64>,
    pub hs_in: Vec<f64>,
    pub hs_out: Vec<f64>,
    pub hd_curt: Vec<f64>,
    pub nw: Vec<f64>,
    pub green: Vec<f64>,
    pub soc: Vec<f64>,
    pub ppa_out: Vec<f64>,
    pub ppa_curt: Vec<f64>,
}

impl DispatchTrace {
    /// Net simultaneous buying and selling, and credit every eligible MWh
    /// as green. Neither change alters feasibility; the first leaves the
    /// cost unchanged and the second can only lower it.
    pub fn canonicalize(&mut self, electrolyzer_eff: f64) {
        for i in 0..self.da_buy.len() {
            let both = self.da_buy[i].min(self.da_sell[i]);
            if both > 0.0 {
                self.da_buy[i] -= both;
                self.da_sell[i] -= both;
            }
            self.green[i] = electrolyzer_eff * self.ppa_out[i].min(self.ez_in[i]).max(0.0);
        }
    }
}

/// Operating cost of `trace` under `scenario` and `design`, recomputed
/// independently of any LP.
pub fn evaluate_operational_cost(
    cfg: &PlantConfig,
    scenario: &Scenario,
    design: &DesignDecisions,
    trace: &DispatchTrace,
    phase: Phase,
) -> Result<f64> {
    let price = scenario.day_ahead.values();
    let slots = cfg.tariff.slot_map(scenario.horizon());
    let penalty = cfg.penalty(phase);
    let mut cost = 0.0;
    for i in 0..scenario.horizon() {
        cost += (trace.da_buy[i] - trace.da_sell[i]) * price[i]
            + trace.hd_curt[i] * penalty
            + trace.nw[i] * cfg.tariff.slots[slots[i]].energy_charge
            - trace.green[i] * cfg.subsidy;
    }
    for p in &cfg.ppa {
        let mwp = design.ppa_mwp.get(&p.park).copied().unwrap_or(0.0);
        cost += mwp * scenario.availability(&p.park)?.sum() * p.price;
    }
    Ok(cost)
}

/// Solved two-stage program in model terms.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStageOutcome {
    pub design: DesignDecisions,
    pub traces: Vec<DispatchTrace>,
    pub design_cost: f64,
    pub op_costs: Vec<f64>,
    pub expected_op_cost: f64,
    pub cvar_op_cost: f64,
    /// `J^d + (1-β) E[J] + β CVaR[J]` on the reported solution.
    pub objective: f64,
    /// Objective value reported by the LP.
    pub lp_objective: f64,
}

/// Design values below this are reported as zero.
const SNAP: f64 = 1e-7;

fn snap(v: f64) -> f64 {
    if v.abs() < SNAP {
        0.0
    } else {
        v
    }
}

impl TwoStageModel {
    /// Pin every design column to `design`.
    pub fn fix_design(&mut self, design: &DesignDecisions) -> Result<()> {
        design.check_against(&self.config)?;
        let d = &self.design;
        self.lp.fix(d.electrolyzer, design.electrolyzer_mw);
        self.lp.fix(d.storage_energy, design.storage_mwh);
        self.lp.fix(d.storage_power, design.storage_mw);
        self.lp.fix(d.network, design.network_mw);
        for (k, f) in self.config.futures.iter().enumerate() {
            let v = design.futures_mwh(f.period.as_str(), f.profile).unwrap_or(0.0);
            self.lp.fix(d.futures[k], v);
        }
        for (k, s) in self.config.tariff.slots.iter().enumerate() {
            self.lp.fix(d.subscriptions[k], design.subscription_mw[&s.name]);
        }
        for (k, p) in self.config.ppa.iter().enumerate() {
            self.lp.fix(d.ppa[k], design.ppa_mwp[&p.park]);
        }
        Ok(())
    }

    /// Pin the contracted capacity of the named parks.
    pub fn fix_ppa(&mut self, mwp: &BTreeMap<String, f64>) -> Result<()> {
        for (park, &v) in mwp {
            let k = self
                .config
                .ppa
                .iter()
                .position(|p| &p.park == park)
                .ok_or_else(|| Error::Schema(format!("no ppa contract for park {park}")))?;
            self.lp.fix(self.design.ppa[k], v);
        }
        Ok(())
    }

    pub fn solve(&self, opts: &SolverOptions) -> Result<(TwoStageOutcome, Solution)> {
        let sol = lp::solve(&self.lp, opts)?.require_optimal(&self.lp)?;
        let outcome = self.extract(&sol)?;
        Ok((outcome, sol))
    }

    /// Read a solution back into model terms, canonicalise it and recompute
    /// every cost from the reported values.
    pub fn extract(&self, sol: &Solution) -> Result<TwoStageOutcome> {
        let x = &sol.x;
        let cfg = &self.config;
        let d = &self.design;
        let network_mw = snap(x[d.network]);
        let mut design = DesignDecisions {
            electrolyzer_mw: snap(x[d.electrolyzer]),
            storage_mwh: snap(x[d.storage_energy]),
            storage_mw: snap(x[d.storage_power]),
            network_mw,
            ..Default::default()
        };
        for (k, f) in cfg.futures.iter().enumerate() {
            let map = match f.profile {
                LoadProfile::Baseload => &mut design.baseload_mwh,
                LoadProfile::Peakload => &mut design.peakload_mwh,
            };
            map.insert(f.period.to_string(), snap(x[d.futures[k]]));
        }
        for (k, s) in cfg.tariff.slots.iter().enumerate() {
            let col = d.subscriptions[k];
            let lp_col = self.lp.column(col);
            // free subscriptions are indeterminate; report the connection size
            let v = if s.subscription_cost == 0.0 && lp_col.lo != lp_col.hi {
                network_mw.min(s.max_mw)
            } else {
                snap(x[col])
            };
            design.subscription_mw.insert(s.name.clone(), v);
        }
        for (k, p) in cfg.ppa.iter().enumerate() {
            design.ppa_mwp.insert(p.park.clone(), snap(x[d.ppa[k]]));
        }

        let mut xc = x.clone();
        xc[d.electrolyzer] = design.electrolyzer_mw;
        xc[d.storage_energy] = design.storage_mwh;
        xc[d.storage_power] = design.storage_mw;
        xc[d.network] = design.network_mw;
        for (k, f) in cfg.futures.iter().enumerate() {
            xc[d.futures[k]] = design.futures_mwh(f.period.as_str(), f.profile).unwrap_or(0.0);
        }
        for (k, s) in cfg.tariff.slots.iter().enumerate() {
            xc[d.subscriptions[k]] = design.subscription_mw[&s.name];
        }
        for (k, p) in cfg.ppa.iter().enumerate() {
            xc[d.ppa[k]] = design.ppa_mwp[&p.park];
        }
        let mut traces = Vec::with_capacity(self.blocks.len());
        for (c, label) in self.blocks.iter().zip(&self.labels) {
            let get = |cols: &[usize]| cols.iter().map(|&j| x[j]).collect::<Vec<f64>>();
            let mut t = DispatchTrace {
                label: label.clone(),
                da_buy: get(&c.da_buy),
                da_sell: get(&c.da_sell),
                ez_in: get(&c.ez_in),
                hs_in: get(&c.hs_in),
                hs_out: get(&c.hs_out),
                hd_curt: get(&c.hd_curt),
                nw: get(&c.nw),
                green: get(&c.green),
                soc: get(&c.soc),
                ppa_out: get(&c.ppa_out),
                ppa_curt: get(&c.ppa_curt),
            };
            t.canonicalize(cfg.efficiency.electrolyzer);
            for i in 0..t.da_buy.len() {
                xc[c.da_buy[i]] = t.da_buy[i];
                xc[c.da_sell[i]] = t.da_sell[i];
                xc[c.green[i]] = t.green[i];
            }
            traces.push(t);
        }
        let design_cost = self.design_cost.eval(&xc);
        let op_costs: Vec<f64> = self.op_costs.iter().map(|e| e.eval(&xc)).collect();
        let expected: f64 = op_costs.iter().zip(&self.probabilities).map(|(c, p)| c * p).sum();
        let tail = cvar(&op_costs, &self.probabilities, cfg.risk.alpha);
        let beta = cfg.risk.beta;
        Ok(TwoStageOutcome {
            design,
            traces,
            design_cost,
            expected_op_cost: expected,
            cvar_op_cost: tail,
            objective: design_cost + (1.0 - beta) * expected + beta * tail,
            op_costs,
            lp_objective: sol.objective,
        })
    }
}

/// Composite objective `J^d + (1-β) E[J] + β CVaR_α[J]`.
pub fn composite_objective(design_cost: f64, op_costs: &[f64], probabilities: &[f64], beta: f64, alpha: f64) -> f64 {
    let expected: f64 = op_costs.iter().zip(probabilities).map(|(c, p)| c * p).sum();
    design_cost + (1.0 - beta) * expected + beta * cvar(op_costs, probabilities, alpha)
}
