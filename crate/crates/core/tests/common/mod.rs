//! Helpers shared by the integration targets: a dense two-phase simplex used
//! as an independent reference solver, and small random plant instances.

#![allow(dead_code)]

use std::collections::BTreeMap;

use h2plan::lp::{LinearProgram, Sense};
use h2plan::model::PlantConfig;
use h2plan::scenario::{
    arbitrage_free_futures_prices, default_futures_shapes, HourlySeries, LoadProfile, PpaContract, Scenario, ScenarioSet,
    ScenarioSource, Technology, Unit,
};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible,
    Unbounded,
}

enum Map {
    Shift(usize, f64),
    Flip(usize, f64),
    Split(usize, usize),
}

const EPS: f64 = 1e-9;

struct Tableau {
    t: Vec<Vec<f64>>,
    z: Vec<f64>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.t[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.t[r][c];
        for v in self.t[r].iter_mut() {
            *v /= p;
        }
        let prow = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            let f = row[c];
            if i != r && f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
            }
        }
        let f = self.z[c];
        if f != 0.0 {
            for (v, pv) in self.z.iter_mut().zip(&prow) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule; false when unbounded.
    fn run(&mut self, allowed: &[bool]) -> bool {
        loop {
            let Some(c) = (0..self.width).find(|&j| allowed[j] && self.z[j] < -EPS) else {
                return true;
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.t.len() {
                let a = self.t[i][c];
                if a > EPS {
                    let ratio = self.rhs(i) / a;
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => ratio < r - 1e-12 || (ratio <= r + 1e-12 && self.basis[i] < b),
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                Some((_, r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
    }

    fn price(&mut self, cost: &[f64]) {
        self.z = cost.to_vec();
        self.z.push(0.0);
        for i in 0..self.t.len() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (v, a) in self.z.iter_mut().zip(&self.t[i]) {
                    *v -= cb * a;
                }
            }
        }
    }
}

/// Solve `lp` exactly enough for comparison, from scratch and without
/// touching the crate's backend.
pub fn simplex(lp: &LinearProgram) -> Outcome {
    let mut maps = Vec::new();
    let mut n = 0;
    let mut cost = Vec::new();
    let mut offset = lp.offset;
    let mut bound_rows: Vec<(usize, f64)> = Vec::new();
    for col in lp.columns() {
        if col.lo.is_finite() {
            maps.push(Map::Shift(n, col.lo));
            offset += col.obj * col.lo;
            cost.push(col.obj);
            if col.hi.is_finite() {
                bound_rows.push((n, col.hi - col.lo));
            }
            n += 1;
        } else if col.hi.is_finite() {
            maps.push(Map::Flip(n, col.hi));
            offset += col.obj * col.hi;
            cost.push(-col.obj);
            n += 1;
        } else {
            maps.push(Map::Split(n, n + 1));
            cost.extend([col.obj, -col.obj]);
            n += 2;
        }
    }

    let mut rows: Vec<(Vec<f64>, Sense, f64)> = Vec::new();
    for r in lp.rows() {
        let mut a = vec![0.0; n];
        let mut rhs = r.rhs;
        for &(j, v) in &r.entries {
            match maps[j] {
                Map::Shift(k, lo) => {
                    a[k] += v;
                    rhs -= v * lo;
                }
                Map::Flip(k, hi) => {
                    a[k] -= v;
                    rhs -= v * hi;
                }
                Map::Split(p, q) => {
                    a[p] += v;
                    a[q] -= v;
                }
            }
        }
        rows.push((a, r.sense, rhs));
    }
    for (k, ub) in bound_rows {
        let mut a = vec![0.0; n];
        a[k] = 1.0;
        rows.push((a, Sense::Le, ub));
    }

    // standard form with non-negative right-hand sides
    let m = rows.len();
    let slacks = rows.iter().filter(|r| r.1 != Sense::Eq).count();
    let mut arts = 0;
    for (a, sense, rhs) in rows.iter_mut() {
        if *rhs < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            *rhs = -*rhs;
            *sense = match *sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
        if *sense != Sense::Le {
            arts += 1;
        }
    }
    let width = n + slacks + arts;
    let mut t = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut s, mut art) = (n, n + slacks);
    for (a, sense, rhs) in rows {
        let mut row = a;
        row.resize(width + 1, 0.0);
        row[width] = rhs;
        match sense {
            Sense::Le => {
                row[s] = 1.0;
                basis.push(s);
                s += 1;
            }
            Sense::Ge => {
                row[s] = -1.0;
                s += 1;
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            }
            Sense::Eq => {
                row[art] = 1.0;
                basis.push(art);
                art += 1;
            }
        }
        t.push(row);
    }
    let is_art = |j: usize| j >= n + slacks;
    let mut tab = Tableau {
        t,
        z: Vec::new(),
        basis,
        width,
    };

    let phase1: Vec<f64> = (0..width).map(|j| if is_art(j) { 1.0 } else { 0.0 }).collect();
    tab.price(&phase1);
    tab.run(&vec![true; width]);
    let infeasibility = -tab.z[width];
    let scale = 1.0 + tab.t.iter().map(|r| r[width].abs()).fold(0.0, f64::max);
    if infeasibility > 1e-7 * scale {
        return Outcome::Infeasible;
    }
    // drive artificials out of the basis; drop redundant rows
    let mut i = 0;
    while i < tab.t.len() {
        if is_art(tab.basis[i]) {
            match (0..n + slacks).find(|&j| tab.t[i][j].abs() > 1e-7) {
                Some(j) => tab.pivot(i, j),
                None => {
                    tab.t.remove(i);
                    tab.basis.remove(i);
                    continue;
                }
            }
        }
        i += 1;
    }

    let mut phase2 = cost.clone();
    phase2.resize(width, 0.0);
    tab.price(&phase2);
    let allowed: Vec<bool> = (0..width).map(|j| !is_art(j)).collect();
    if !tab.run(&allowed) {
        return Outcome::Unbounded;
    }
    let mut y = vec![0.0; width];
    for (i, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.rhs(i);
    }
    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            Map::Shift(k, lo) => lo + y[k],
            Map::Flip(k, hi) => hi - y[k],
            Map::Split(p, q) => y[p] - y[q],
        })
        .collect();
    let objective = lp.objective_value(&x);
    debug_assert!((objective - (offset + cost.iter().zip(&y).map(|(c, v)| c * v).sum::<f64>())).abs() < 1e-6 * (1.0 + objective.abs()));
    Outcome::Optimal { x, objective }
}

pub const PARKS: [(&str, Technology, f64); 2] = [("sun", Technology::Solar, 55.0), ("gale", Technology::Wind, 65.0)];

/// A random scenario of `h` hours over [`PARKS`].
pub fn random_scenario(rng: &mut impl Rng, label: &str, h: usize, demand: f64) -> Scenario {
    let level = rng.gen_range(30.0..120.0);
    let price: Vec<f64> = (0..h).map(|_| level + rng.gen_range(-40.0..40.0)).collect();
    let mut ppa = BTreeMap::new();
    for (park, _, _) in PARKS {
        let a: Vec<f64> = (0..h).map(|_| rng.gen_range(0.0..1.0)).collect();
        ppa.insert(park.to_string(), HourlySeries::new(Unit::Availability, a).unwrap());
    }
    let d: Vec<f64> = (0..h).map(|_| demand * rng.gen_range(0.5..1.5)).collect();
    Scenario::new(
        label,
        ScenarioSource::Synthetic(label.into()),
        HourlySeries::new(Unit::EurPerMwh, price).unwrap(),
        ppa,
        HourlySeries::new(Unit::MwH2, d).unwrap(),
    )
    .unwrap()
}

pub fn random_set(rng: &mut impl Rng, h: usize, s: usize) -> ScenarioSet {
    let scenarios = (0..s).map(|k| random_scenario(rng, &format!("r{k}"), h, 1.0)).collect();
    ScenarioSet::new("random", scenarios).unwrap()
}

/// Plant over [`PARKS`] with capital costs scaled to `h` hours and baseload
/// futures priced on `set`.
pub fn toy_plant(set: &ScenarioSet) -> PlantConfig {
    let h = set.horizon();
    let shapes: Vec<_> = default_futures_shapes(h)
        .into_iter()
        .filter(|f| f.profile == LoadProfile::Baseload)
        .collect();
    let mut cfg = PlantConfig {
        ppa: PARKS
            .iter()
            .map(|&(park, technology, price)| PpaContract {
                park: park.into(),
                technology,
                price,
                max_mwp: 10.0,
            })
            .collect(),
        futures: arbitrage_free_futures_prices(set, &shapes).unwrap(),
        futures_max_mwh: 100.0,
        ..PlantConfig::default()
    };
    let f = h as f64 / 8760.0;
    for a in [&mut cfg.electrolyzer, &mut cfg.storage_energy, &mut cfg.storage_power, &mut cfg.network] {
        a.capex *= f;
        a.max = 50.0;
    }
    cfg
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
