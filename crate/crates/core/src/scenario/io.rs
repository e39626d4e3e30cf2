//! CSV ingestion and the on-disk scenario layout:
//!
//! ```text
//! <set>/<label>/day_ahead.csv
//! <set>/<label>/demand.csv
//! <set>/<label>/ppa_<park>.csv
//! ```
//!
//! Every file has one header line followed by exactly `horizon` rows holding
//! a single number each.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use super::{HourlySeries, Scenario, ScenarioSet, ScenarioSource, Unit};
use crate::error::{Error, Result};
use crate::persist::write_atomic;

const DAY_AHEAD_FILE: &str = "day_ahead.csv";
const DEMAND_FILE: &str = "demand.csv";
const PPA_PREFIX: &str = "ppa_";

/// Read a one-column CSV file into a validated series of exactly `horizon` values.
pub fn load_scenario_csv(path: &Path, unit: Unit, horizon: usize) -> Result<HourlySeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut values = Vec::with_capacity(horizon);
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| csv_error(path, e))?;
        if rec.len() != 1 {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("expected one value, found {} fields", rec.len()),
            });
        }
        let field = &rec[0];
        let v: f64 = field.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg: format!("not a number: {field:?}"),
        })?;
        if !v.is_finite() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("non-finite value {field:?}"),
            });
        }
        values.push(v);
    }
    if values.len() != horizon {
        return Err(Error::Schema(format!(
            "{}: {} data rows, expected {horizon}",
            path.display(),
            values.len()
        )));
    }
    HourlySeries::new(unit, values).map_err(|e| match e {
        Error::Range(msg) => Error::Range(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            msg: format!("{other:?}"),
        },
    }
}

pub fn write_series_csv(path: &Path, series: &HourlySeries) -> Result<()> {
    let mut out = String::with_capacity(series.len() * 12);
    out.push_str(series.unit().as_str());
    out.push('\n');
    for v in series.values() {
        out.push_str(&format!("{v}\n"));
    }
    write_atomic(path, out.as_bytes())
}

/// Load one scenario directory. When `demand.csv` is absent, `default_demand`
/// is used; without either the directory is rejected.
pub fn load_scenario_dir(
    dir: &Path,
    horizon: usize,
    default_demand: Option<&HourlySeries>,
) -> Result<Scenario> {
    if !dir.is_dir() {
        return Err(Error::Config(format!(
            "scenario directory not found: {}",
            dir.display()
        )));
    }
    let label = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .ok_or_else(|| Error::Config(format!("bad scenario directory {}", dir.display())))?;
    let day_ahead = load_scenario_csv(&dir.join(DAY_AHEAD_FILE), Unit::EurPerMwh, horizon)?;
    let demand_path = dir.join(DEMAND_FILE);
    let demand = if demand_path.exists() {
        load_scenario_csv(&demand_path, Unit::MwH2, horizon)?
    } else if let Some(d) = default_demand {
        d.clone()
    } else {
        return Err(Error::Config(format!(
            "missing {}",
            demand_path.display()
        )));
    };
    let mut ppa = BTreeMap::new();
    for path in sorted_entries(dir)? {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        if let Some(park) = name
            .strip_prefix(PPA_PREFIX)
            .and_then(|rest| rest.strip_suffix(".csv"))
        {
            ppa.insert(
                park.to_string(),
                load_scenario_csv(&path, Unit::Availability, horizon)?,
            );
        }
    }
    Scenario::new(
        label.clone(),
        ScenarioSource::from_label(&label),
        day_ahead,
        ppa,
        demand,
    )
}

pub fn write_scenario_dir(dir: &Path, scenario: &Scenario) -> Result<()> {
    write_series_csv(&dir.join(DAY_AHEAD_FILE), &scenario.day_ahead)?;
    write_series_csv(&dir.join(DEMAND_FILE), &scenario.demand)?;
    for (park, series) in &scenario.ppa_availability {
        write_series_csv(&dir.join(format!("{PPA_PREFIX}{park}.csv")), series)?;
    }
    Ok(())
}

/// Load every scenario sub-directory of `dir` (sorted by name) as one
/// equiprobable set.
pub fn load_set_dir(dir: &Path, id: &str, horizon: usize) -> Result<ScenarioSet> {
    if !dir.is_dir() {
        return Err(Error::Config(format!(
            "scenario set directory not found: {}",
            dir.display()
        )));
    }
    let scenarios = sorted_entries(dir)?
        .into_iter()
        .filter(|p| p.is_dir())
        .map(|p| load_scenario_dir(&p, horizon, None))
        .collect::<Result<Vec<_>>>()?;
    if scenarios.is_empty() {
        return Err(Error::Config(format!(
            "scenario set directory is empty: {}",
            dir.display()
        )));
    }
    ScenarioSet::new(id, scenarios)
}

/// Load a pool of historical years (`<dir>/<year>/...`) keyed by year.
pub fn load_scenario_pool(
    dir: &Path,
    horizon: usize,
    default_demand: Option<&HourlySeries>,
) -> Result<BTreeMap<i32, Scenario>> {
    let mut pool = BTreeMap::new();
    for p in sorted_entries(dir)?.into_iter().filter(|p| p.is_dir()) {
        let sc = load_scenario_dir(&p, horizon, default_demand)?;
        match sc.source {
            ScenarioSource::Year(y) => {
                pool.insert(y, sc);
            }
            ScenarioSource::Synthetic(ref name) => {
                return Err(Error::Schema(format!(
                    "{}: pool entries must be named by year, found {name:?}",
                    dir.display()
                )))
            }
        }
    }
    Ok(pool)
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}
