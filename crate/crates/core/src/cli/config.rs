//! Run configuration: plant parameters, scenario sources, named sets and
//! futures pricing, read from one TOML document.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::SolverOptions;
use crate::model::PlantConfig;
use crate::persist::json_hash;
use crate::policy::{PolicyKind, PolicySpec};
use crate::scenario::{
    arbitrage_free_futures_prices, load_scenario_pool, load_set_dir, renormalize_set_mean, seasonal_demand,
    split_even_odd, standard_demand, synthesize_day_ahead, FuturesPeriod, FuturesProduct, HistoryGenerator,
    HourlySeries, LoadProfile, ParkProfile, Scenario, ScenarioSet, ScenarioSource, SynthesisKnobs,
    DEFAULT_SEASONAL_MULTIPLIERS,
};

fn default_horizon() -> usize {
    crate::calendar::HOURS_PER_YEAR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    /// Seed of the synthetic history generator.
    #[serde(default)]
    pub seed: u64,
    /// Default output directory, relative to the config file.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub plant: PlantConfig,
    #[serde(default)]
    pub demand: DemandConfig,
    /// Yearly scenario pool the sets are built from; optional when every
    /// set is loaded from its own directory.
    #[serde(default)]
    pub history: Option<HistorySource>,
    #[serde(default)]
    pub futures: FuturesConfig,
    pub sets: BTreeMap<String, SetDef>,
    #[serde(default)]
    pub study: StudyConfig,
    /// Yearly electricity the pessimistic expert hedges, MWh.
    #[serde(default)]
    pub expert_annual_electrical_mwh: Option<f64>,
    #[serde(default)]
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemandConfig {
    /// Hydrogen offtake over the horizon, MWh-H2.
    pub annual_mwh_h2: f64,
    pub seasonal_multipliers: [f64; 12],
}

impl Default for DemandConfig {
    fn default() -> Self {
        Self {
            annual_mwh_h2: 18_000.0,
            seasonal_multipliers: DEFAULT_SEASONAL_MULTIPLIERS,
        }
    }
}

/// Where the yearly scenarios come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum HistorySource {
    /// `<dir>/<year>/{day_ahead.csv, demand.csv, ppa_<park>.csv}`.
    Directory { dir: PathBuf },
    /// Seeded synthetic years.
    Synthetic {
        first_year: i32,
        last_year: i32,
        mean_price: f64,
        parks: Vec<ParkProfile>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuturesPricing {
    /// Mean day-ahead price of the set the design is optimised or tested on.
    ArbitrageFree,
    /// Prices given in `futures.prices`.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FuturesConfig {
    pub pricing: FuturesPricing,
    /// Product ids such as `baf_y` or `pkf_q3`.
    pub products: Vec<String>,
    #[serde(default)]
    pub prices: BTreeMap<String, f64>,
}

impl Default for FuturesConfig {
    fn default() -> Self {
        let products = FuturesPeriod::ALL
            .iter()
            .flat_map(|p| [format!("baf_{p}"), format!("pkf_{p}")])
            .collect();
        Self {
            pricing: FuturesPricing::ArbitrageFree,
            products,
            prices: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YearFilter {
    Even,
    Odd,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandProfile {
    Standard,
    Seasonal,
    /// The series stored with each scenario.
    Recorded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandDef {
    pub profile: DemandProfile,
    /// Use only the first `count` base scenarios with this profile.
    #[serde(default)]
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticDef {
    /// Historical base year; must pass the set's year filter.
    pub year: i32,
    #[serde(default = "one")]
    pub mean_scale: f64,
    #[serde(default = "one")]
    pub seasonal_scale: f64,
    #[serde(default = "one")]
    pub daily_spread_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl SyntheticDef {
    pub fn knobs(&self) -> SynthesisKnobs {
        SynthesisKnobs {
            mean_scale: self.mean_scale,
            seasonal_scale: self.seasonal_scale,
            daily_spread_scale: self.daily_spread_scale,
        }
    }
}

fn yes() -> bool {
    true
}

fn standard_only() -> Vec<DemandDef> {
    vec![DemandDef {
        profile: DemandProfile::Standard,
        count: None,
    }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetDef {
    /// Load a prepared set from `<dir>/<label>/...` instead of building one.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "all_years")]
    pub years: YearFilter,
    #[serde(default)]
    pub synthetic: Vec<SyntheticDef>,
    #[serde(default = "standard_only")]
    pub demand: Vec<DemandDef>,
    /// Rescale prices to the mean of the whole history.
    #[serde(default = "yes")]
    pub renormalize: bool,
    #[serde(default)]
    pub probabilities: Option<Vec<f64>>,
}

fn all_years() -> YearFilter {
    YearFilter::All
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    /// In-sample set with one demand profile.
    pub in_sample: String,
    /// In-sample set mixing demand profiles.
    pub in_sample_mixed: String,
    pub test_set_1: String,
    pub test_set_2: String,
    /// Green-hydrogen subsidy of contexts B and C, €/MWh-H2.
    pub subsidy: f64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            in_sample: "in_sample".into(),
            in_sample_mixed: "in_sample_mixed".into(),
            test_set_1: "test_set_1".into(),
            test_set_2: "test_set_2".into(),
            subsidy: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub max_iterations: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        Self {
            feasibility_tol: d.feasibility_tol,
            optimality_tol: d.optimality_tol,
            max_iterations: d.max_iterations,
        }
    }
}

/// Parse `baf_y` / `pkf_q2` into a period and profile.
pub fn parse_product_id(id: &str) -> Result<(FuturesPeriod, LoadProfile)> {
    let bad = || Error::Config(format!("unknown futures product {id:?}"));
    let (kind, period) = id.split_once('_').ok_or_else(bad)?;
    let profile = match kind {
        "baf" => LoadProfile::Baseload,
        "pkf" => LoadProfile::Peakload,
        _ => return Err(bad()),
    };
    Ok((period.parse().map_err(|_| bad())?, profile))
}

/// A loaded run configuration with paths resolved against its file.
#[derive(Debug, Clone)]
pub struct Run {
    pub config: RunConfig,
    pub base_dir: PathBuf,
    pub hash: String,
}

impl Run {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::new(config, base_dir)
    }

    pub fn new(config: RunConfig, base_dir: PathBuf) -> Result<Self> {
        let hash = json_hash(&config)?;
        let run = Self { config, base_dir, hash };
        run.validate()?;
        Ok(run)
    }

    fn validate(&self) -> Result<()> {
        let c = &self.config;
        if c.horizon < 24 {
            return Err(Error::Config(format!("horizon must be at least 24 hours, got {}", c.horizon)));
        }
        if !c.plant.futures.is_empty() {
            return Err(Error::Config(
                "list futures products under [futures], not [plant.futures]".into(),
            ));
        }
        c.plant.validate()?;
        for id in &c.futures.products {
            parse_product_id(id)?;
            if c.futures.pricing == FuturesPricing::Fixed && !c.futures.prices.contains_key(id) {
                return Err(Error::Config(format!("fixed futures pricing needs a price for {id}")));
            }
        }
        for (name, set) in &c.sets {
            if set.demand.is_empty() {
                return Err(Error::Config(format!("set {name}: no demand profile")));
            }
            for s in &set.synthetic {
                s.knobs().validate()?;
            }
        }
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self, flag: Option<&Path>) -> PathBuf {
        match (flag, &self.config.output_dir) {
            (Some(p), _) => p.to_path_buf(),
            (None, Some(p)) => self.resolve(p),
            (None, None) => self.base_dir.join("out"),
        }
    }

    pub fn solver(&self) -> SolverOptions {
        let s = &self.config.solver;
        SolverOptions {
            feasibility_tol: s.feasibility_tol,
            optimality_tol: s.optimality_tol,
            max_iterations: s.max_iterations,
            ..SolverOptions::default()
        }
    }

    fn demand(&self, profile: DemandProfile) -> Result<Option<HourlySeries>> {
        let d = &self.config.demand;
        Ok(match profile {
            DemandProfile::Standard => Some(standard_demand(d.annual_mwh_h2, self.config.horizon)?),
            DemandProfile::Seasonal => Some(seasonal_demand(
                d.annual_mwh_h2,
                &d.seasonal_multipliers,
                self.config.horizon,
            )?),
            DemandProfile::Recorded => None,
        })
    }

    /// Every historical year, carrying the standard demand unless the data
    /// records its own.
    pub fn history(&self) -> Result<BTreeMap<i32, Scenario>> {
        let standard = self.demand(DemandProfile::Standard)?.expect("standard profile");
        match &self.config.history {
            None => Ok(BTreeMap::new()),
            Some(HistorySource::Directory { dir }) => {
                let pool = load_scenario_pool(&self.resolve(dir), self.config.horizon, Some(&standard))?;
                if pool.is_empty() {
                    return Err(Error::Config(format!("no yearly scenarios in {}", dir.display())));
                }
                Ok(pool)
            }
            Some(HistorySource::Synthetic {
                first_year,
                last_year,
                mean_price,
                parks,
            }) => HistoryGenerator {
                seed: self.config.seed,
                horizon: self.config.horizon,
                first_year: *first_year,
                last_year: *last_year,
                mean_price: *mean_price,
                parks: parks.clone(),
            }
            .generate(&standard),
        }
    }

    pub fn set_names(&self) -> Vec<String> {
        self.config.sets.keys().cloned().collect()
    }

    /// Build the named scenario set.
    pub fn scenario_set(&self, name: &str, history: &BTreeMap<i32, Scenario>) -> Result<ScenarioSet> {
        let def = self
            .config
            .sets
            .get(name)
            .ok_or_else(|| Error::Config(format!("no scenario set named {name:?} in the configuration")))?;
        if let Some(dir) = &def.dir {
            let set = load_set_dir(&self.resolve(dir), name, self.config.horizon)?;
            return match &def.probabilities {
                Some(p) => ScenarioSet::with_probabilities(name, set.scenarios().to_vec(), p.clone()),
                None => Ok(set),
            };
        }
        if history.is_empty() {
            return Err(Error::Config(format!("set {name}: no `dir` and no [history] to build it from")));
        }
        let (even, odd) = split_even_odd(history)?;
        let years: Vec<&Scenario> = match def.years {
            YearFilter::Even => even.scenarios().iter().collect(),
            YearFilter::Odd => odd.scenarios().iter().collect(),
            YearFilter::All => history.values().collect(),
        };
        let mut base: Vec<Scenario> = years.iter().map(|s| (*s).clone()).collect();
        for (k, syn) in def.synthetic.iter().enumerate() {
            let src = years
                .iter()
                .find(|s| s.source == ScenarioSource::Year(syn.year))
                .ok_or_else(|| {
                    Error::Config(format!("set {name}: synthetic base year {} is not in the set", syn.year))
                })?;
            let label = format!("syn{}-{}", k + 1, syn.year);
            base.push(Scenario::new(
                label.clone(),
                ScenarioSource::Synthetic(label),
                synthesize_day_ahead(&src.day_ahead, &syn.knobs())?,
                src.ppa_availability.clone(),
                src.demand.clone(),
            )?);
        }
        let tagged = def.demand.len() > 1;
        let mut scenarios = Vec::new();
        for d in &def.demand {
            let series = self.demand(d.profile)?;
            let take = d.count.unwrap_or(base.len());
            if take > base.len() {
                return Err(Error::Config(format!(
                    "set {name}: asks for {take} {:?} scenarios but only {} exist",
                    d.profile,
                    base.len()
                )));
            }
            for s in &base[..take] {
                let label = if tagged {
                    format!("{}-{}", s.label, profile_tag(d.profile))
                } else {
                    s.label.clone()
                };
                scenarios.push(match &series {
                    Some(series) => s.with_demand(label, series.clone())?,
                    None => s.with_demand(label, s.demand.clone())?,
                });
            }
        }
        let set = match &def.probabilities {
            Some(p) => ScenarioSet::with_probabilities(name, scenarios, p.clone())?,
            None => ScenarioSet::new(name, scenarios)?,
        };
        if def.renormalize {
            let all = ScenarioSet::new("history", history.values().cloned().collect())?;
            renormalize_set_mean(&set, all.grand_mean_price())
        } else {
            Ok(set)
        }
    }

    /// The plant configuration with futures priced on `set`.
    pub fn plant_for(&self, set: &ScenarioSet) -> Result<PlantConfig> {
        let c = &self.config;
        let mut shapes = Vec::with_capacity(c.futures.products.len());
        for id in &c.futures.products {
            let (period, profile) = parse_product_id(id)?;
            let price = c.futures.prices.get(id).copied().unwrap_or(0.0);
            shapes.push(FuturesProduct::new(period, profile, c.horizon, price));
        }
        let mut plant = c.plant.clone();
        plant.futures = match c.futures.pricing {
            FuturesPricing::Fixed => shapes,
            FuturesPricing::ArbitrageFree => arbitrage_free_futures_prices(set, &shapes)?,
        };
        plant.validate_for_horizon(c.horizon)?;
        Ok(plant)
    }

    /// In-sample set a policy is optimised on: the mixed-demand set for
    /// demand-aware policies, the single-profile set otherwise.
    pub fn in_sample_for(&self, spec: &PolicySpec) -> &str {
        let s = &self.config.study;
        let demand_aware = match spec.kind {
            PolicyKind::Stochastic => spec.tags.demand,
            PolicyKind::PessimisticExpert => spec.demand_averaging,
            PolicyKind::AverageScenario => false,
        };
        if demand_aware {
            &s.in_sample_mixed
        } else {
            &s.in_sample
        }
    }
}

fn profile_tag(p: DemandProfile) -> &'static str {
    match p {
        DemandProfile::Standard => "std",
        DemandProfile::Seasonal => "seas",
        DemandProfile::Recorded => "rec",
    }
}
