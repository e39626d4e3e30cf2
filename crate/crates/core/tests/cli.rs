use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use h2plan::metrics::PolicyDelta;

const CONFIG: &str = r#"
horizon = 96
seed = 5
output_dir = "out"

[demand]
annual_mwh_h2 = 100.0

[history]
source = "synthetic"
first_year = 2019
last_year = 2022
mean_price = 70.0
parks = [
  { park = "sun", technology = "solar", cf_min = 0.12, cf_mean = 0.15, cf_max = 0.18 },
  { park = "gale", technology = "wind", cf_min = 0.25, cf_mean = 0.3, cf_max = 0.35 },
]

[plant]
futures_max_mwh = 500.0

[plant.electrolyzer]
capex = 18630.0
lifetime_years = 13
max = 50.0

[[plant.ppa]]
park = "sun"
technology = "solar"
price = 60.0
max_mwp = 20.0

[[plant.ppa]]
park = "gale"
technology = "wind"
price = 62.0
max_mwp = 20.0

[sets.in_sample]
years = "even"

[sets.in_sample_mixed]
years = "even"
demand = [{ profile = "standard" }, { profile = "seasonal" }]

[sets.test_set_1]
years = "odd"
synthetic = [{ year = 2021, mean_scale = 1.3 }]

[sets.test_set_2]
years = "odd"
demand = [{ profile = "standard" }, { profile = "seasonal" }]

[sets.from_disk]
dir = "missing_scenarios"
"#;

struct Sandbox {
    dir: tempfile::TempDir,
}

impl Sandbox {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("run.toml"), CONFIG).unwrap();
        Self { dir }
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    fn run(&self, args: &[&str]) -> Output {
        Command::new(env!("CARGO_BIN_EXE_h2plan"))
            .current_dir(self.path())
            .env_remove("H2PLAN_CONFIG")
            .args(["--config", "run.toml"])
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let out = self.run(args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        String::from_utf8(out.stdout).unwrap()
    }

    fn out(&self, rel: &str) -> PathBuf {
        self.path().join("out").join(rel)
    }
}

#[test]
fn optimize_test_compare() {
    let sb = Sandbox::new();
    sb.ok(&["optimize", "--policy", "D_PE"]);
    sb.ok(&["optimize", "--policy", "S_b0.9(da,p)", "--export-lp", "model.lp"]);
    assert!(sb.out("solutions/D_PE.json").is_file());
    assert!(sb.out("solutions/S_b0.9_da_p.json").is_file());
    let lp = std::fs::read_to_string(sb.path().join("model.lp")).unwrap();
    assert!(!lp.is_empty());

    let line = sb.ok(&["test", "--solution", "out/solutions/D_PE.json", "--test-set", "test_set_1"]);
    assert!(line.contains("mean LCOH"), "{line}");
    sb.ok(&["test", "--solution", "out/solutions/S_b0.9_da_p.json", "--test-set", "test_set_1", "--traces"]);
    let csv = std::fs::read_to_string(sb.out("reports/D_PE__test_set_1.csv")).unwrap();
    // header plus odd years 2019, 2021 and one synthetic year
    assert_eq!(csv.lines().count(), 4, "{csv}");
    let traced = std::fs::read_to_string(sb.out("reports/S_b0.9_da_p__test_set_1.json")).unwrap();
    assert!(traced.contains("\"trace\""));

    sb.ok(&[
        "compare",
        "out/reports/D_PE__test_set_1.json",
        "out/reports/S_b0.9_da_p__test_set_1.json",
        "--metric",
        "VSS=D_PE:S_β0.9(da,p)",
    ]);
    let rows: Vec<PolicyDelta> = serde_json::from_slice(&std::fs::read(sb.out("metrics.json")).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].metric, "VSS");
    assert!(rows[0].mean_delta.is_finite());

    // a report against itself gives zero deltas
    sb.ok(&[
        "compare",
        "out/reports/D_PE__test_set_1.json",
        "out/reports/D_PE__test_set_1.json",
        "--metric",
        "self=D_PE:D_PE",
    ]);
    let rows: Vec<PolicyDelta> = serde_json::from_slice(&std::fs::read(sb.out("metrics.json")).unwrap()).unwrap();
    assert_eq!((rows[0].mean_delta, rows[0].worst_delta), (0.0, 0.0));
}

#[test]
fn comparing_different_test_sets_is_refused() {
    let sb = Sandbox::new();
    sb.ok(&["optimize", "--policy", "D_AS(NA)"]);
    sb.ok(&["test", "--solution", "out/solutions/D_AS_NA.json", "--test-set", "test_set_1"]);
    sb.ok(&["test", "--solution", "out/solutions/D_AS_NA.json", "--test-set", "test_set_2"]);
    let out = sb.run(&[
        "compare",
        "out/reports/D_AS_NA__test_set_1.json",
        "out/reports/D_AS_NA__test_set_2.json",
        "--metric",
        "x=D_AS(NA):D_AS(NA)",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn configuration_errors_exit_one() {
    let sb = Sandbox::new();
    let out = Command::new(env!("CARGO_BIN_EXE_h2plan"))
        .current_dir(sb.path())
        .env_remove("H2PLAN_CONFIG")
        .args(["--config", "absent.toml", "optimize", "--policy", "D_PE"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.toml"));

    let out = sb.run(&["optimize", "--policy", "D_PE", "--set", "from_disk"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing_scenarios"));

    let out = sb.run(&["optimize", "--policy", "S_b0.9(da,p,dem)", "--set", "in_sample"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn config_from_environment() {
    let sb = Sandbox::new();
    let out = Command::new(env!("CARGO_BIN_EXE_h2plan"))
        .current_dir(sb.path())
        .env("H2PLAN_CONFIG", "run.toml")
        .args(["synth-scenarios", "--set", "in_sample"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let set = sb.out("scenarios/in_sample");
    let mut labels: Vec<String> = std::fs::read_dir(&set)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    labels.sort();
    assert_eq!(labels, ["2020", "2022"]);
    for f in ["day_ahead.csv", "demand.csv", "ppa_sun.csv", "ppa_gale.csv"] {
        assert!(set.join("2020").join(f).is_file(), "{f}");
    }
}

#[test]
fn part2_study() {
    let sb = Sandbox::new();
    let stdout = sb.ok(&["study", "part2", "--jobs", "2"]);
    assert!(stdout.contains("VS-Dem"), "{stdout}");
    for f in ["metrics.json", "metrics.csv", "plot.csv", "study.json"] {
        assert!(sb.out("part2").join(f).is_file(), "{f}");
    }
    let plot = std::fs::read_to_string(sb.out("part2/plot.csv")).unwrap();
    assert_eq!(plot.lines().count(), 4);
}

#[test]
fn shipped_configs_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let sizes = [("in_sample", 10), ("in_sample_mixed", 15), ("test_set_1", 20), ("test_set_2", 40)];
    for name in ["desk_study", "case_study"] {
        let run = h2plan::cli::Run::load(&root.join(name).join("config.toml")).unwrap();
        let history = run.history().unwrap();
        assert_eq!(history.len(), 10, "{name}");
        for (set, n) in sizes {
            let s = run.scenario_set(set, &history).unwrap();
            assert_eq!(s.len(), n, "{name}/{set}");
        }
    }
}
