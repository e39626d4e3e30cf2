//! Planning policies and their labels.
//!
//! | label                | in-sample input               | resale | risk weight |
//! |----------------------|-------------------------------|--------|-------------|
//! | `D_AS(NA)`           | one average scenario          | no     | 0           |
//! | `D_PE`, `D_PE(A.dem)`| average scenario, fixed PPAs  | yes    | 0           |
//! | `S_β<b>[(NA)](tags)` | every in-sample scenario      | flag   | `b`         |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::SolverOptions;
use crate::model::{assemble_two_stage, DesignDecisions, Phase, PlantConfig, TwoStageModel, TwoStageOutcome};
use crate::persist::json_hash;
use crate::scenario::{average_scenario, HourlySeries, PpaContract, ScenarioSet, Technology, Unit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    AverageScenario,
    PessimisticExpert,
    Stochastic,
}

/// Which inputs vary across the in-sample scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UncertaintyTags {
    pub day_ahead: bool,
    pub ppa: bool,
    pub demand: bool,
}

impl UncertaintyTags {
    pub const MARKET: Self = Self {
        day_ahead: true,
        ppa: true,
        demand: false,
    };
    pub const MARKET_AND_DEMAND: Self = Self {
        day_ahead: true,
        ppa: true,
        demand: true,
    };

    fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.day_ahead {
            v.push("da");
        }
        if self.ppa {
            v.push("p");
        }
        if self.demand {
            v.push("dem");
        }
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub beta: f64,
    pub no_arbitrage: bool,
    pub tags: UncertaintyTags,
    pub demand_averaging: bool,
}

impl PolicySpec {
    pub fn average_scenario() -> Self {
        Self {
            kind: PolicyKind::AverageScenario,
            beta: 0.0,
            no_arbitrage: true,
            tags: UncertaintyTags::default(),
            demand_averaging: false,
        }
    }

    pub fn pessimistic_expert(demand_averaging: bool) -> Self {
        Self {
            kind: PolicyKind::PessimisticExpert,
            beta: 0.0,
            no_arbitrage: false,
            tags: UncertaintyTags::default(),
            demand_averaging,
        }
    }

    pub fn stochastic(beta: f64, no_arbitrage: bool, tags: UncertaintyTags) -> Self {
        Self {
            kind: PolicyKind::Stochastic,
            beta,
            no_arbitrage,
            tags,
            demand_averaging: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PolicyKind::AverageScenario if !self.no_arbitrage => {
                Err(Error::Policy("the average-scenario policy always forbids resale".into()))
            }
            PolicyKind::PessimisticExpert if self.no_arbitrage => {
                Err(Error::Policy("the pessimistic-expert policy always allows resale".into()))
            }
            PolicyKind::AverageScenario | PolicyKind::PessimisticExpert if self.beta != 0.0 => {
                Err(Error::Policy("deterministic policies are risk neutral".into()))
            }
            PolicyKind::Stochastic if !(0.0..=1.0).contains(&self.beta) => {
                Err(Error::Policy(format!("risk weight {} outside [0, 1]", self.beta)))
            }
            PolicyKind::Stochastic if self.tags == UncertaintyTags::default() => {
                Err(Error::Policy("a stochastic policy needs at least one uncertainty tag".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            PolicyKind::AverageScenario => "D_AS(NA)".into(),
            PolicyKind::PessimisticExpert if self.demand_averaging => "D_PE(A.dem)".into(),
            PolicyKind::PessimisticExpert => "D_PE".into(),
            PolicyKind::Stochastic => {
                let na = if self.no_arbitrage { "(NA)" } else { "" };
                format!("S_β{}{na}({})", self.beta, self.tags.names().join(","))
            }
        }
    }

    /// Parse a label. `S_b0.9` and `S_beta0.9` are accepted for `S_β0.9`.
    pub fn parse(label: &str) -> Result<Self> {
        let bad = || Error::Policy(format!("unrecognised policy label {label:?}"));
        match label {
            "D_AS(NA)" => return Ok(Self::average_scenario()),
            "D_PE" => return Ok(Self::pessimistic_expert(false)),
            "D_PE(A.dem)" => return Ok(Self::pessimistic_expert(true)),
            _ => {}
        }
        let rest = label.strip_prefix("S_").ok_or_else(bad)?;
        let rest = ["β", "beta", "b"]
            .iter()
            .find_map(|p| rest.strip_prefix(p))
            .ok_or_else(bad)?;
        let open = rest.find('(').ok_or_else(bad)?;
        let beta: f64 = rest[..open].parse().map_err(|_| bad())?;
        let mut rest = &rest[open..];
        let no_arbitrage = match rest.strip_prefix("(NA)") {
            Some(r) => {
                rest = r;
                true
            }
            None => false,
        };
        let inner = rest.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let mut tags = UncertaintyTags::default();
        for t in inner.split(',') {
            let slot = match t.trim() {
                "da" => &mut tags.day_ahead,
                "p" => &mut tags.ppa,
                "dem" => &mut tags.demand,
                _ => return Err(bad()),
            };
            if *slot {
                return Err(bad());
            }
            *slot = true;
        }
        let spec = Self::stochastic(beta, no_arbitrage, tags);
        spec.validate()?;
        Ok(spec)
    }
}

impl fmt::Display for PolicySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for PolicySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

/// Split the yearly electricity need evenly between the cheapest solar and
/// the cheapest wind contract, sized on each park's mean capacity factor.
/// Every other park gets zero.
pub fn pessimistic_expert_ppa_sizing(
    ppas: &[(PpaContract, f64)],
    annual_electrical_mwh: f64,
    horizon: usize,
) -> Result<BTreeMap<String, f64>> {
    if !(annual_electrical_mwh >= 0.0 && annual_electrical_mwh.is_finite()) {
        return Err(Error::Range(format!("annual electricity {annual_electrical_mwh} MWh")));
    }
    let cheapest = |tech: Technology| {
        ppas.iter()
            .filter(|(c, _)| c.technology == tech)
            .fold(None::<&(PpaContract, f64)>, |best, cand| match best {
                Some(b) if b.0.price <= cand.0.price => Some(b),
                _ => Some(cand),
            })
            .ok_or_else(|| Error::Policy(format!("no {tech:?} contract available for the expert sizing")))
    };
    let solar = cheapest(Technology::Solar)?;
    let wind = cheapest(Technology::Wind)?;
    let mut out: BTreeMap<String, f64> = ppas.iter().map(|(c, _)| (c.park.clone(), 0.0)).collect();
    for (contract, cf) in [solar, wind] {
        if annual_electrical_mwh == 0.0 {
            continue;
        }
        if !(*cf > 0.0) {
            return Err(Error::Degenerate(format!("park {} has zero capacity factor", contract.park)));
        }
        let mwp = 0.5 * annual_electrical_mwh / (cf * horizon as f64);
        out.insert(contract.park.clone(), mwp);
    }
    Ok(out)
}

/// Tunables of [`solve_policy`].
#[derive(Debug, Clone, Default)]
pub struct PolicyOptions {
    /// Yearly electricity the expert hedges, MWh. Defaults to total
    /// in-sample demand divided by the electrolyser efficiency.
    pub expert_annual_electrical_mwh: Option<f64>,
    pub solver: SolverOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// Annualised design cost, €.
    pub design_cost: f64,
    pub expected_op_cost: f64,
    /// Mean of the worst `1 - α` tail of operating costs.
    pub cvar_op_cost: f64,
    /// Weighted objective at the policy's own risk weight.
    pub objective: f64,
}

/// Per-scenario aggregates of the in-sample dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InSampleScenario {
    pub label: String,
    pub probability: f64,
    pub op_cost: f64,
    /// PPA energy available (paid), MWh.
    pub ppa_available_mwh: f64,
    pub network_mwh: f64,
    pub day_ahead_sold_mwh: f64,
    pub green_mwh_h2: f64,
    pub production_mwh_h2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub scenario_set: String,
    pub scenario_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySolution {
    pub label: String,
    pub spec: PolicySpec,
    pub design: DesignDecisions,
    pub in_sample: CostBreakdown,
    pub scenarios: Vec<InSampleScenario>,
    pub provenance: Provenance,
}

impl PolicySolution {
    /// Total futures volume plus expected paid PPA energy, MWh.
    pub fn expected_hedged_mwh(&self) -> f64 {
        self.design.total_futures_mwh()
            + self
                .scenarios
                .iter()
                .map(|s| s.probability * s.ppa_available_mwh)
                .sum::<f64>()
    }

    pub fn expected_network_mwh(&self) -> f64 {
        self.scenarios.iter().map(|s| s.probability * s.network_mwh).sum()
    }
}

/// Short digest identifying a plant configuration.
pub fn config_hash(cfg: &PlantConfig) -> Result<String> {
    json_hash(cfg)
}

/// The single-scenario input of the deterministic policies.
fn deterministic_input(spec: &PolicySpec, set: &ScenarioSet) -> Result<ScenarioSet> {
    let mut avg = average_scenario(set)?;
    if spec.demand_averaging {
        // equal weight per distinct profile, not per scenario
        let mut profiles: Vec<&HourlySeries> = Vec::new();
        for s in set.scenarios() {
            if !profiles.contains(&&s.demand) {
                profiles.push(&s.demand);
            }
        }
        let h = set.horizon();
        let n = profiles.len() as f64;
        let mean: Vec<f64> = (0..h).map(|i| profiles.iter().map(|p| p.values()[i]).sum::<f64>() / n).collect();
        avg = avg.with_demand(format!("{}-average-demand", set.id), HourlySeries::new(Unit::MwH2, mean)?)?;
    }
    ScenarioSet::new(format!("{}-average", set.id), vec![avg])
}

fn check_tags(spec: &PolicySpec, set: &ScenarioSet) -> Result<()> {
    let mixed = set.has_mixed_demand();
    let demand_aware = match spec.kind {
        PolicyKind::Stochastic => spec.tags.demand,
        PolicyKind::PessimisticExpert => spec.demand_averaging,
        PolicyKind::AverageScenario => return Ok(()),
    };
    if demand_aware && !mixed {
        return Err(Error::Policy(format!(
            "{} needs in-sample scenarios with more than one demand profile; {} has one",
            spec.label(),
            set.id
        )));
    }
    if !demand_aware && mixed {
        return Err(Error::Policy(format!(
            "{} ignores demand uncertainty but {} mixes demand profiles",
            spec.label(),
            set.id
        )));
    }
    Ok(())
}

/// The model a policy solves and the scenario set it was built on, with the
/// expert's PPA sizing pinned where it applies.
pub fn policy_model(
    spec: &PolicySpec,
    in_sample: &ScenarioSet,
    cfg: &PlantConfig,
    opts: &PolicyOptions,
) -> Result<(TwoStageModel, ScenarioSet)> {
    spec.validate()?;
    check_tags(spec, in_sample)?;
    let label = spec.label();
    let mut cfg = cfg.clone();
    cfg.risk.beta = spec.beta;
    cfg.no_arbitrage = spec.no_arbitrage;
    let set = match spec.kind {
        PolicyKind::Stochastic => in_sample.clone(),
        _ => deterministic_input(spec, in_sample)?,
    };
    let mut model = assemble_two_stage(&cfg, &set, Phase::Optimize)?;
    if spec.kind == PolicyKind::PessimisticExpert {
        let avg = &set.scenarios()[0];
        let ppas = cfg
            .ppa
            .iter()
            .map(|c| Ok((c.clone(), avg.availability(&c.park)?.mean())))
            .collect::<Result<Vec<_>>>()?;
        let annual = match opts.expert_annual_electrical_mwh {
            Some(v) => v,
            None => avg.demand.sum() / cfg.efficiency.electrolyzer,
        };
        let sizing = pessimistic_expert_ppa_sizing(&ppas, annual, set.horizon())?;
        for (park, &mwp) in &sizing {
            let bound = cfg.ppa.iter().find(|c| &c.park == park).map(|c| c.max_mwp).unwrap_or(0.0);
            if mwp > bound {
                return Err(Error::Policy(format!(
                    "{label}: expert sizing {mwp:.3} MWp for {park} exceeds its {bound} MWp bound"
                )));
            }
        }
        model.fix_ppa(&sizing)?;
    }
    Ok((model, set))
}

/// Optimise the design for `spec` on the in-sample set.
pub fn solve_policy(
    spec: &PolicySpec,
    in_sample: &ScenarioSet,
    cfg: &PlantConfig,
    opts: &PolicyOptions,
) -> Result<PolicySolution> {
    let label = spec.label();
    let (model, set) = policy_model(spec, in_sample, cfg, opts)?;
    let cfg = model.config.clone();
    let (outcome, _) = model.solve(&opts.solver).map_err(|e| e.with_context(label.clone()))?;
    Ok(PolicySolution {
        label,
        spec: *spec,
        scenarios: in_sample_summary(&cfg, &set, &outcome)?,
        in_sample: CostBreakdown {
            design_cost: outcome.design_cost,
            expected_op_cost: outcome.expected_op_cost,
            cvar_op_cost: outcome.cvar_op_cost,
            objective: outcome.objective,
        },
        design: outcome.design,
        provenance: Provenance {
            config_hash: config_hash(&cfg_without_policy(&cfg))?,
            scenario_set: in_sample.id.clone(),
            scenario_hash: in_sample.content_hash(),
        },
    })
}

/// The configuration with the policy-owned fields reset, so every policy
/// solved from one configuration records the same hash.
fn cfg_without_policy(cfg: &PlantConfig) -> PlantConfig {
    let mut c = cfg.clone();
    let base = PlantConfig::default();
    c.risk.beta = base.risk.beta;
    c.no_arbitrage = base.no_arbitrage;
    c
}

fn in_sample_summary(cfg: &PlantConfig, set: &ScenarioSet, out: &TwoStageOutcome) -> Result<Vec<InSampleScenario>> {
    let eta = cfg.efficiency.electrolyzer;
    set.iter()
        .zip(&out.traces)
        .zip(&out.op_costs)
        .map(|(((sc, p), t), &cost)| {
            let mut ppa = 0.0;
            for c in &cfg.ppa {
                ppa += out.design.ppa_mwp[&c.park] * sc.availability(&c.park)?.sum();
            }
            Ok(InSampleScenario {
                label: sc.label.clone(),
                probability: p,
                op_cost: cost,
                ppa_available_mwh: ppa,
                network_mwh: t.nw.iter().sum(),
                day_ahead_sold_mwh: t.da_sell.iter().sum(),
                green_mwh_h2: t.green.iter().sum(),
                production_mwh_h2: eta * t.ez_in.iter().sum::<f64>(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::testutil::flat_scenario;

    fn contract(park: &str, technology: Technology, price: f64) -> PpaContract {
        PpaContract {
            park: park.into(),
            technology,
            price,
            max_mwp: 100.0,
        }
    }

    #[test]
    fn labels_round_trip() {
        let specs = [
            PolicySpec::average_scenario(),
            PolicySpec::pessimistic_expert(false),
            PolicySpec::pessimistic_expert(true),
            PolicySpec::stochastic(0.0, true, UncertaintyTags::MARKET),
            PolicySpec::stochastic(0.9, false, UncertaintyTags::MARKET),
            PolicySpec::stochastic(0.9, true, UncertaintyTags::MARKET),
            PolicySpec::stochastic(0.9, false, UncertaintyTags::MARKET_AND_DEMAND),
        ];
        let labels: Vec<String> = specs.iter().map(PolicySpec::label).collect();
        assert_eq!(
            labels,
            [
                "D_AS(NA)",
                "D_PE",
                "D_PE(A.dem)",
                "S_β0(NA)(da,p)",
                "S_β0.9(da,p)",
                "S_β0.9(NA)(da,p)",
                "S_β0.9(da,p,dem)"
            ]
        );
        for (s, l) in specs.iter().zip(&labels) {
            assert_eq!(&PolicySpec::parse(l).unwrap(), s);
        }
        assert_eq!(PolicySpec::parse("S_b0.9(da,p)").unwrap(), specs[4]);
        assert_eq!(PolicySpec::parse("S_beta0(NA)(da,p)").unwrap(), specs[3]);
        for bad in ["S_β0.9", "S_β2(da)", "D_XX", "S_β0.9(da,da)", "S_β0.9()"] {
            assert!(PolicySpec::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn expert_sizing() {
        let ppas = vec![
            (contract("albi_solar", Technology::Solar, 66.0), 0.168),
            (contract("orleans_solar", Technology::Solar, 68.0), 0.15),
            (contract("calais_wind", Technology::Wind, 70.0), 0.427),
        ];
        let s = pessimistic_expert_ppa_sizing(&ppas, 34_000.0, 8760).unwrap();
        assert!((s["albi_solar"] - 17_000.0 / (0.168 * 8760.0)).abs() < 1e-9);
        assert!((s["calais_wind"] - 17_000.0 / (0.427 * 8760.0)).abs() < 1e-9);
        assert_eq!(s["orleans_solar"], 0.0);
        let zero = pessimistic_expert_ppa_sizing(&ppas, 0.0, 8760).unwrap();
        assert!(zero.values().all(|&v| v == 0.0));
        assert!(matches!(
            pessimistic_expert_ppa_sizing(&ppas[..2], 1.0, 8760),
            Err(Error::Policy(_))
        ));
    }

    #[test]
    fn one_scenario_stochastic_matches_deterministic() {
        let mut cfg = PlantConfig::default();
        cfg.electrolyzer.capex = 2000.0;
        cfg.network.capex = 200.0;
        let set = ScenarioSet::new("t", vec![flat_scenario("s", 40.0, &[], 0.3, 6)]).unwrap();
        let opts = PolicyOptions::default();
        let s = solve_policy(&PolicySpec::stochastic(0.0, true, UncertaintyTags::MARKET), &set, &cfg, &opts).unwrap();
        let d = solve_policy(&PolicySpec::average_scenario(), &set, &cfg, &opts).unwrap();
        assert!((s.design.electrolyzer_mw - d.design.electrolyzer_mw).abs() < 1e-6);
        assert!((s.design.network_mw - d.design.network_mw).abs() < 1e-6);
        assert!((s.in_sample.objective - d.in_sample.objective).abs() < 1e-6 * d.in_sample.objective);
        assert!(d.scenarios.iter().all(|s| s.day_ahead_sold_mwh == 0.0));
        assert_eq!(s.provenance.config_hash, d.provenance.config_hash);
    }

    #[test]
    fn demand_tag_must_match_set() {
        let cfg = PlantConfig::default();
        let set = ScenarioSet::new("t", vec![flat_scenario("s", 40.0, &[], 0.3, 6)]).unwrap();
        let spec = PolicySpec::stochastic(0.9, false, UncertaintyTags::MARKET_AND_DEMAND);
        assert!(matches!(
            solve_policy(&spec, &set, &cfg, &PolicyOptions::default()),
            Err(Error::Policy(_))
        ));
    }
}
