//! Sparse linear programs in row form and their solution.
//!
//! A [`LinearProgram`] is a column registry (bounds, objective, tag) plus a
//! list of constraint rows. It minimises `offset + obj·x` subject to each
//! row's sense and the column bounds. Every column and row carries a [`Tag`]
//! so that diagnostics can name the offending scenario and hour.

mod backend;

use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use backend::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

/// Identifies a column or row by symbol, scenario, hour and item (park,
/// product or tariff slot index).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag {
    pub symbol: &'static str,
    pub scenario: Option<u32>,
    pub hour: Option<u32>,
    pub item: Option<u32>,
}

impl Tag {
    pub const fn new(symbol: &'static str) -> Self {
        Self {
            symbol,
            scenario: None,
            hour: None,
            item: None,
        }
    }

    pub fn scenario(mut self, s: usize) -> Self {
        self.scenario = Some(s as u32);
        self
    }

    /// 1-based hour.
    pub fn hour(mut self, h: usize) -> Self {
        self.hour = Some(h as u32);
        self
    }

    pub fn item(mut self, i: usize) -> Self {
        self.item = Some(i as u32);
        self
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol)?;
        let parts: Vec<String> = [("s", self.scenario), ("h", self.hour), ("i", self.item)]
            .iter()
            .filter_map(|(k, v)| v.map(|v| format!("{k}{v}")))
            .collect();
        if !parts.is_empty() {
            write!(f, "[{}]", parts.join(","))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub tag: Tag,
    pub lo: f64,
    pub hi: f64,
    pub obj: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub tag: Tag,
    pub sense: Sense,
    pub rhs: f64,
    /// Sorted by column, no duplicates, no zeros.
    pub entries: Vec<(usize, f64)>,
}

impl Row {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.entries.iter().map(|&(j, a)| a * x[j]).sum()
    }

    /// Amount by which `x` violates the row, zero when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearProgram {
    columns: Vec<Column>,
    rows: Vec<Row>,
    /// Constant added to the objective.
    pub offset: f64,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_column(&mut self, tag: Tag, lo: f64, hi: f64, obj: f64) -> usize {
        debug_assert!(lo <= hi, "{tag}: lo {lo} > hi {hi}");
        self.columns.push(Column { tag, lo, hi, obj });
        self.columns.len() - 1
    }

    /// Add a row; repeated columns are merged and zero coefficients dropped.
    pub fn add_row(&mut self, tag: Tag, entries: Vec<(usize, f64)>, sense: Sense, rhs: f64) -> usize {
        let mut entries = entries;
        entries.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (j, a) in entries {
            debug_assert!(j < self.columns.len(), "{tag}: unknown column {j}");
            match merged.last_mut() {
                Some((k, b)) if *k == j => *b += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.rows.push(Row {
            tag,
            sense,
            rhs,
            entries: merged,
        });
        self.rows.len() - 1
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn num_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.entries.len()).sum()
    }

    pub fn column(&self, j: usize) -> &Column {
        &self.columns[j]
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.columns[j].lo = lo;
        self.columns[j].hi = hi;
    }

    /// Pin a column to `value`.
    pub fn fix(&mut self, j: usize, value: f64) {
        self.set_bounds(j, value, value);
    }

    pub fn set_objective(&mut self, j: usize, c: f64) {
        self.columns[j].obj = c;
    }

    pub fn add_objective(&mut self, j: usize, c: f64) {
        self.columns[j].obj += c;
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.offset + self.columns.iter().zip(x).map(|(c, v)| c.obj * v).sum::<f64>()
    }

    /// Maximum bound and row violations of `point`.
    ///
    /// Row violations are also reported relative to `max(1, |rhs|)`.
    pub fn check_point(&self, point: &[f64]) -> Result<Violations> {
        if point.len() != self.columns.len() {
            return Err(Error::Schema(format!(
                "point has {} entries, program has {} columns",
                point.len(),
                self.columns.len()
            )));
        }
        let mut v = Violations::default();
        for (j, (c, &x)) in self.columns.iter().zip(point).enumerate() {
            let d = if x.is_nan() {
                f64::INFINITY
            } else {
                (c.lo - x).max(x - c.hi).max(0.0)
            };
            if d > v.bound {
                v.bound = d;
                v.bound_column = Some(j);
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            let d = r.violation(point);
            let d = if d.is_nan() { f64::INFINITY } else { d };
            let rel = d / r.rhs.abs().max(1.0);
            if d > v.row {
                v.row = d;
            }
            if rel > v.row_relative {
                v.row_relative = rel;
                v.row_index = Some(i);
            }
        }
        Ok(v)
    }

    /// Plain-text dump: one `c` line per column, one `r` line per row, then
    /// the objective offset.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# lp columns={} rows={} nonzeros={}",
            self.num_columns(),
            self.num_rows(),
            self.num_nonzeros()
        );
        for (j, c) in self.columns.iter().enumerate() {
            let _ = writeln!(out, "c {j} {} {} {} {}", c.tag, c.lo, c.hi, c.obj);
        }
        for (i, r) in self.rows.iter().enumerate() {
            let _ = write!(out, "r {i} {} {} {} :", r.tag, r.sense.as_str(), r.rhs);
            for (j, a) in &r.entries {
                let _ = write!(out, " {j}:{a}");
            }
            out.push('\n');
        }
        let _ = writeln!(out, "offset {}", self.offset);
        out
    }
}

/// Result of [`LinearProgram::check_point`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Violations {
    pub bound: f64,
    pub bound_column: Option<usize>,
    /// Largest absolute row violation.
    pub row: f64,
    /// Largest violation divided by `max(1, |rhs|)`.
    pub row_relative: f64,
    /// Row attaining `row_relative`.
    pub row_index: Option<usize>,
}

impl Violations {
    pub fn within(&self, tol: f64) -> bool {
        self.bound <= tol && self.row_relative <= tol
    }

    pub fn describe(&self, lp: &LinearProgram) -> String {
        let col = self
            .bound_column
            .map(|j| lp.column(j).tag.to_string())
            .unwrap_or_else(|| "-".into());
        let row = self
            .row_index
            .map(|i| lp.rows()[i].tag.to_string())
            .unwrap_or_else(|| "-".into());
        format!(
            "bound violation {:.3e} at {col}, row violation {:.3e} (relative {:.3e}) at {row}",
            self.bound, self.row, self.row_relative
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Accepted row violation relative to `max(1, |rhs|)`.
    pub feasibility_tol: f64,
    /// Relative duality gap requested from the backend.
    pub optimality_tol: f64,
    pub max_iterations: u32,
    /// Single-threaded factorisation with a fixed ordering.
    pub deterministic: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-6,
            optimality_tol: 1e-6,
            max_iterations: 500,
            deterministic: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.feasibility_tol > 0.0 && self.optimality_tol > 0.0) {
            return Err(Error::Config("solver tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// The backend stopped without a usable certificate, or its point failed
    /// the feasibility check.
    NumericalError,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: u32,
    pub columns: usize,
    pub rows: usize,
    pub nonzeros: usize,
    /// Columns removed because their bounds pin them.
    pub fixed_columns: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective: f64,
    pub x: Vec<f64>,
    pub stats: SolveStats,
    pub violations: Violations,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Turn a non-optimal status into a solver error.
    pub fn require_optimal(self, lp: &LinearProgram) -> Result<Self> {
        if self.is_optimal() {
            return Ok(self);
        }
        Err(Error::Solver {
            context: None,
            msg: format!(
                "status {:?} after {} iterations; {}",
                self.status,
                self.stats.iterations,
                self.violations.describe(lp)
            ),
        })
    }
}
