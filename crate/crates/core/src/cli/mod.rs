//! Batch front-end: `optimize`, `test`, `compare`, `study` and
//! `synth-scenarios`.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 solver
//! failure, 3 study finished with failed entries.

mod config;
mod study;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::metrics::{all_pairs, metrics_csv, metrics_table, MetricSpec};
use crate::persist::{read_json, write_atomic, write_json};
use crate::policy::{policy_model, solve_policy, PolicyOptions, PolicySolution, PolicySpec};
use crate::scenario::write_scenario_dir;
use crate::simulation::{run_test_set, DispatchOptions, TestReport};

pub use config::{
    parse_product_id, DemandConfig, DemandDef, DemandProfile, FuturesConfig, FuturesPricing, HistorySource, Run,
    RunConfig, SetDef, SolverConfig, StudyConfig, SyntheticDef, YearFilter,
};
pub use study::{run_study, StudyEntry, StudyKind, StudyReport};

/// Environment variable naming the default run configuration.
pub const CONFIG_ENV: &str = "H2PLAN_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "h2plan", version, about = "Hydrogen plant sizing and hedging under uncertainty")]
pub struct Cli {
    /// Run configuration (TOML).
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to the configuration's `output_dir`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimise one policy and write its solution.
    Optimize {
        /// Policy label, e.g. `S_β0.9(da,p)` or `S_b0.9(da,p)`.
        #[arg(long)]
        policy: String,
        /// In-sample set; defaults by the policy's demand handling.
        #[arg(long)]
        set: Option<String>,
        /// Also write the assembled LP as plain text.
        #[arg(long)]
        export_lp: Option<PathBuf>,
    },
    /// Dispatch a solution on a test set and write the report.
    Test {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        test_set: String,
        /// Keep hourly traces in the JSON report.
        #[arg(long)]
        traces: bool,
    },
    /// Relative LCOH deltas between test reports.
    Compare {
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        /// `NAME=BASELINE:CANDIDATE`; every pair when omitted.
        #[arg(long)]
        metric: Vec<String>,
        /// Accept reports built from different configurations.
        #[arg(long)]
        force: bool,
    },
    /// Run a whole study.
    Study {
        #[arg(value_enum)]
        study: StudyArg,
    },
    /// Write the configured scenario sets as CSV directories.
    SynthScenarios {
        /// Sets to write; all when omitted.
        #[arg(long)]
        set: Vec<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StudyArg {
    Part1,
    Part2,
    Prospective,
}

impl From<StudyArg> for StudyKind {
    fn from(a: StudyArg) -> Self {
        match a {
            StudyArg::Part1 => StudyKind::Part1,
            StudyArg::Part2 => StudyKind::Part2,
            StudyArg::Prospective => StudyKind::Prospective,
        }
    }
}

/// File-name form of a policy label.
pub fn slug(label: &str) -> String {
    let mut out = String::new();
    for c in label.chars() {
        match c {
            'β' => out.push('b'),
            c if c.is_ascii_alphanumeric() || c == '.' || c == '-' => out.push(c),
            _ if out.ends_with('_') => {}
            _ => out.push('_'),
        }
    }
    out.trim_end_matches('_').to_string()
}

fn load_run(cli: &Cli) -> Result<Run> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config(format!("no configuration: pass --config or set {CONFIG_ENV}")))?;
    if !path.is_file() {
        return Err(Error::Config(format!("configuration file not found: {}", path.display())));
    }
    Run::load(path)
}

pub fn policy_options(run: &Run) -> PolicyOptions {
    PolicyOptions {
        expert_annual_electrical_mwh: run.config.expert_annual_electrical_mwh,
        solver: run.solver(),
    }
}

fn optimize(cli: &Cli, policy: &str, set: Option<&str>, export_lp: Option<&Path>) -> Result<i32> {
    let run = load_run(cli)?;
    let spec = PolicySpec::parse(policy)?;
    let name = set.unwrap_or_else(|| run.in_sample_for(&spec)).to_string();
    let history = run.history()?;
    let in_sample = run.scenario_set(&name, &history)?;
    let plant = run.plant_for(&in_sample)?;
    let opts = policy_options(&run);
    if let Some(path) = export_lp {
        let (model, _) = policy_model(&spec, &in_sample, &plant, &opts)?;
        write_atomic(path, model.lp.to_text().as_bytes())?;
    }
    let solution = solve_policy(&spec, &in_sample, &plant, &opts)?;
    let path = run
        .output_dir(cli.out.as_deref())
        .join("solutions")
        .join(format!("{}.json", slug(&solution.label)));
    write_json(&path, &solution)?;
    println!("{}", path.display());
    Ok(0)
}

fn test(cli: &Cli, solution: &Path, test_set: &str, traces: bool) -> Result<i32> {
    let run = load_run(cli)?;
    let solution: PolicySolution = read_json(solution)?;
    let history = run.history()?;
    let set = run.scenario_set(test_set, &history)?;
    let plant = run.plant_for(&set)?;
    solution.design.check_against(&plant)?;
    let opts = DispatchOptions {
        solver: run.solver(),
        keep_trace: traces,
        jobs: None,
    };
    let report = run_test_set(&solution.label, &solution.design, &set, &plant, &opts)?;
    let dir = run.output_dir(cli.out.as_deref()).join("reports");
    let stem = format!("{}__{}", slug(&report.policy), slug(test_set));
    report.write(&dir, &stem)?;
    println!(
        "{}: mean LCOH {:.4} €/kg, worst {:.4} €/kg -> {}",
        report.policy,
        report.mean_lcoh,
        report.worst_lcoh,
        dir.join(format!("{stem}.json")).display()
    );
    Ok(0)
}

fn compare(cli: &Cli, reports: &[PathBuf], metrics: &[String], force: bool) -> Result<i32> {
    let reports = reports.iter().map(|p| read_json(p)).collect::<Result<Vec<TestReport>>>()?;
    let specs = if metrics.is_empty() {
        all_pairs(&reports)
    } else {
        metrics.iter().map(|m| MetricSpec::parse(m)).collect::<Result<Vec<_>>>()?
    };
    let rows = metrics_table(&reports, &specs, force)?;
    let out = match (&cli.out, &cli.config) {
        (Some(o), _) => o.clone(),
        (None, Some(_)) => load_run(cli)?.output_dir(None),
        (None, None) => PathBuf::from("out"),
    };
    write_json(&out.join("metrics.json"), &rows)?;
    write_atomic(&out.join("metrics.csv"), &metrics_csv(&rows)?)?;
    for r in &rows {
        println!(
            "{:<24} {:>16} -> {:<18} mean {:>7.2}%  worst {:>7.2}%",
            r.metric,
            r.baseline,
            r.candidate,
            100.0 * r.mean_delta,
            100.0 * r.worst_delta
        );
    }
    Ok(0)
}

fn synth_scenarios(cli: &Cli, sets: &[String]) -> Result<i32> {
    let run = load_run(cli)?;
    let history = run.history()?;
    let names = if sets.is_empty() { run.set_names() } else { sets.to_vec() };
    let root = run.output_dir(cli.out.as_deref()).join("scenarios");
    for name in &names {
        let set = run.scenario_set(name, &history)?;
        for s in set.scenarios() {
            write_scenario_dir(&root.join(name).join(&s.label), s)?;
        }
        println!("{name}: {} scenarios -> {}", set.len(), root.join(name).display());
    }
    Ok(0)
}

fn study(cli: &Cli, which: StudyKind) -> Result<i32> {
    let run = load_run(cli)?;
    let out = run.output_dir(cli.out.as_deref());
    let report = run_study(&run, which, &out)?;
    for e in &report.entries {
        match (&e.report, &e.error) {
            (Some(r), _) => println!(
                "{:<28} {:<12} mean {:>8.4}  worst {:>8.4}",
                e.name, e.test_set, r.mean_lcoh, r.worst_lcoh
            ),
            (None, Some(err)) => println!("{:<28} FAILED: {err}", e.name),
            (None, None) => {}
        }
    }
    for m in &report.metrics {
        println!(
            "{:<24} mean {:>7.2}%  worst {:>7.2}%",
            m.metric,
            100.0 * m.mean_delta,
            100.0 * m.worst_delta
        );
    }
    Ok(if report.failed() { 3 } else { 0 })
}

/// Execute a parsed command line and return its exit code.
pub fn run(cli: &Cli) -> Result<i32> {
    if let Some(n) = cli.jobs {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match &cli.command {
        Command::Optimize { policy, set, export_lp } => optimize(cli, policy, set.as_deref(), export_lp.as_deref()),
        Command::Test {
            solution,
            test_set,
            traces,
        } => test(cli, solution, test_set, *traces),
        Command::Compare { reports, metric, force } => compare(cli, reports, metric, *force),
        Command::Study { study: s } => study(cli, (*s).into()),
        Command::SynthScenarios { set } => synth_scenarios(cli, set),
    }
}

/// Process entry point.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs() {
        assert_eq!(slug("S_β0.9(da,p)"), "S_b0.9_da_p");
        assert_eq!(slug("S_β0(NA)(da,p)"), "S_b0_NA_da_p");
        assert_eq!(slug("D_PE(A.dem)"), "D_PE_A.dem");
        assert_eq!(slug("test_set_1"), "test_set_1");
    }

    #[test]
    fn parses_command_lines() {
        let c = Cli::try_parse_from(["h2plan", "--config", "c.toml", "optimize", "--policy", "D_PE"]).unwrap();
        assert!(matches!(c.command, Command::Optimize { ref policy, .. } if policy == "D_PE"));
        let c = Cli::try_parse_from(["h2plan", "study", "part1", "--jobs", "2"]).unwrap();
        assert_eq!(c.jobs, Some(2));
        assert!(Cli::try_parse_from(["h2plan", "compare"]).is_err());
    }
}
