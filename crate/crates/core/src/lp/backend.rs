//! Interior-point backend built on `clarabel`.
//!
//! Singleton and forcing rows become bounds, pinned columns are
//! substituted out, the remaining matrix is geometrically
//! scaled, and the LP is handed over in conic form `Ax + s = b` with `s` in
//! a zero cone (equalities) or the non-negative orthant (inequalities and
//! finite bounds). The returned point is unscaled, clipped to its bounds and
//! re-checked against the original rows before it is called optimal.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use super::{LinearProgram, Sense, SolveStats, SolveStatus, Solution, SolverOptions};
use crate::error::{Error, Result};

const SCALING_PASSES: usize = 6;
const PRESOLVE_PASSES: usize = 64;

pub fn solve(lp: &LinearProgram, opts: &SolverOptions) -> Result<Solution> {
    opts.validate()?;
    let n_all = lp.num_columns();
    for (j, c) in lp.columns().iter().enumerate() {
        if c.lo > c.hi || c.lo.is_nan() || c.hi.is_nan() || !c.obj.is_finite() {
            return Err(Error::Schema(format!(
                "column {j} ({}): invalid bounds [{}, {}] or objective {}",
                c.tag, c.lo, c.hi, c.obj
            )));
        }
    }

    let (lo, hi, active, feasible) = presolve(lp);
    let mut stats_fixed = 0;
    let mut x = vec![0.0; n_all];
    let mut reduced = vec![usize::MAX; n_all];
    let mut free = Vec::new();
    for j in 0..n_all {
        if lo[j] == hi[j] {
            x[j] = lo[j];
            stats_fixed += 1;
        } else {
            reduced[j] = free.len();
            free.push(j);
        }
    }
    let n = free.len();
    let mut stats = SolveStats {
        iterations: 0,
        columns: n_all,
        rows: lp.num_rows(),
        nonzeros: lp.num_nonzeros(),
        fixed_columns: stats_fixed,
    };

    struct RRow {
        sense: Sense,
        rhs: f64,
        entries: Vec<(usize, f64)>,
    }
    let mut rows: Vec<RRow> = Vec::with_capacity(lp.num_rows());
    let trivially_infeasible = !feasible;
    for (r, _) in lp.rows().iter().zip(&active).filter(|(_, &a)| a) {
        let mut rhs = r.rhs;
        let mut entries = Vec::with_capacity(r.entries.len());
        for &(j, a) in &r.entries {
            if reduced[j] == usize::MAX {
                rhs -= a * x[j];
            } else {
                entries.push((reduced[j], a));
            }
        }
        rows.push(RRow {
            sense: r.sense,
            rhs,
            entries,
        });
    }
    if trivially_infeasible {
        return Ok(finish(lp, x, SolveStatus::Infeasible, stats, opts));
    }
    if n == 0 {
        return Ok(finish(lp, x, SolveStatus::Optimal, stats, opts));
    }

    // geometric scaling: row_scale[i] * a_ij * col_scale[j]
    let mut row_scale = vec![1.0; rows.len()];
    let mut col_scale = vec![1.0; n];
    for _ in 0..SCALING_PASSES {
        for (i, r) in rows.iter().enumerate() {
            let (lo, hi) = r.entries.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &(j, a)| {
                let v = (a * col_scale[j]).abs();
                (lo.min(v), hi.max(v))
            });
            row_scale[i] = 1.0 / (lo * hi).sqrt();
        }
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0f64; n];
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in &r.entries {
                let v = (a * row_scale[i]).abs();
                lo[j] = lo[j].min(v);
                hi[j] = hi[j].max(v);
            }
        }
        for j in 0..n {
            if hi[j] > 0.0 {
                col_scale[j] = 1.0 / (lo[j] * hi[j]).sqrt();
            }
        }
    }
    let obj: Vec<f64> = free
        .iter()
        .enumerate()
        .map(|(k, &j)| lp.column(j).obj * col_scale[k])
        .collect();
    let obj_max = obj.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let obj_scale = if obj_max > 0.0 { 1.0 / obj_max } else { 1.0 };
    let q: Vec<f64> = obj.iter().map(|v| v * obj_scale).collect();

    // conic rows: equalities, inequalities, then bounds
    let mut trip: Vec<(usize, usize, f64)> = Vec::new();
    let mut b = Vec::new();
    let mut m = 0;
    for (i, r) in rows.iter().enumerate().filter(|(_, r)| r.sense == Sense::Eq) {
        for &(j, a) in &r.entries {
            trip.push((m, j, a * row_scale[i] * col_scale[j]));
        }
        b.push(r.rhs * row_scale[i]);
        m += 1;
    }
    let n_eq = m;
    for (i, r) in rows.iter().enumerate().filter(|(_, r)| r.sense != Sense::Eq) {
        let sign = if r.sense == Sense::Le { 1.0 } else { -1.0 };
        for &(j, a) in &r.entries {
            trip.push((m, j, sign * a * row_scale[i] * col_scale[j]));
        }
        b.push(sign * r.rhs * row_scale[i]);
        m += 1;
    }
    for (k, &j) in free.iter().enumerate() {
        if lo[j].is_finite() {
            trip.push((m, k, -1.0));
            b.push(-lo[j] / col_scale[k]);
            m += 1;
        }
        if hi[j].is_finite() {
            trip.push((m, k, 1.0));
            b.push(hi[j] / col_scale[k]);
            m += 1;
        }
    }
    let a = csc(m, n, trip);
    let p = CscMatrix::zeros((n, n));
    let mut cones = Vec::new();
    if n_eq > 0 {
        cones.push(SupportedConeT::ZeroConeT(n_eq));
    }
    if m > n_eq {
        cones.push(SupportedConeT::NonnegativeConeT(m - n_eq));
    }
    let tol = (opts.optimality_tol * 1e-4).min(1e-8);
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(opts.max_iterations)
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .tol_ktratio(1e-7)
        .max_threads(if opts.deterministic { 1 } else { 0 })
        .direct_solve_method("qdldl".to_string())
        .build()
        .map_err(|e| Error::Config(format!("solver settings: {e:?}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, settings).map_err(|e| Error::Solver {
        context: None,
        msg: format!("backend rejected the problem: {e:?}"),
    })?;
    solver.solve();
    stats.iterations = solver.solution.iterations;
    let status = match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => SolveStatus::Infeasible,
        SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => SolveStatus::Unbounded,
        SolverStatus::MaxIterations | SolverStatus::MaxTime => SolveStatus::IterationLimit,
        _ => SolveStatus::NumericalError,
    };
    if status == SolveStatus::Optimal {
        for (k, &j) in free.iter().enumerate() {
            x[j] = solver.solution.x[k] * col_scale[k];
        }
    }
    Ok(finish(lp, x, status, stats, opts))
}

/// Tighten column bounds from rows with a single unfixed entry, and pin
/// the entries of rows that can only hold at an extreme activity, until
/// nothing changes. Returns working bounds, the rows still needed, and
/// `false` if a row was found violated outright.
fn presolve(lp: &LinearProgram) -> (Vec<f64>, Vec<f64>, Vec<bool>, bool) {
    let mut lo: Vec<f64> = lp.columns().iter().map(|c| c.lo).collect();
    let mut hi: Vec<f64> = lp.columns().iter().map(|c| c.hi).collect();
    let mut active = vec![true; lp.num_rows()];
    let mut feasible = true;
    for _ in 0..PRESOLVE_PASSES {
        let mut changed = false;
        for (i, r) in lp.rows().iter().enumerate() {
            if !active[i] {
                continue;
            }
            let mut rhs = r.rhs;
            let mut single = None;
            let mut count = 0;
            for &(j, a) in &r.entries {
                if lo[j] == hi[j] {
                    rhs -= a * lo[j];
                } else {
                    count += 1;
                    single = Some((j, a));
                }
            }
            match (count, single) {
                (0, _) => {
                    let tol = 1e-9 * r.rhs.abs().max(1.0);
                    feasible &= match r.sense {
                        Sense::Le => 0.0 <= rhs + tol,
                        Sense::Ge => 0.0 >= rhs - tol,
                        Sense::Eq => rhs.abs() <= tol,
                    };
                }
                (1, Some((j, a))) => {
                    let v = rhs / a;
                    let (upper, lower) = match (r.sense, a > 0.0) {
                        (Sense::Eq, _) => (true, true),
                        (Sense::Le, true) | (Sense::Ge, false) => (true, false),
                        _ => (false, true),
                    };
                    if upper && v < hi[j] {
                        hi[j] = v;
                    }
                    if lower && v > lo[j] {
                        lo[j] = v;
                    }
                    if lo[j] > hi[j] {
                        if lo[j] - hi[j] <= 1e-9 * lo[j].abs().max(1.0) {
                            let mid = if upper { hi[j] } else { lo[j] };
                            lo[j] = mid;
                            hi[j] = mid;
                        } else {
                            feasible = false;
                        }
                    }
                }
                _ => {
                    // forcing row: the only feasible activity is an extreme one
                    let (mut min, mut max) = (0.0, 0.0);
                    for &(j, a) in &r.entries {
                        if lo[j] != hi[j] {
                            min += if a > 0.0 { a * lo[j] } else { a * hi[j] };
                            max += if a > 0.0 { a * hi[j] } else { a * lo[j] };
                        }
                    }
                    let tol = 1e-12 * rhs.abs().max(1.0);
                    let at_min = r.sense != Sense::Ge && min.is_finite() && (min - rhs).abs() <= tol;
                    let at_max = r.sense != Sense::Le && max.is_finite() && (max - rhs).abs() <= tol;
                    if !(at_min || at_max) {
                        continue;
                    }
                    for &(j, a) in &r.entries {
                        if lo[j] != hi[j] {
                            let v = if (a > 0.0) == at_min { lo[j] } else { hi[j] };
                            lo[j] = v;
                            hi[j] = v;
                        }
                    }
                }
            }
            active[i] = false;
            changed = true;
        }
        if !changed || !feasible {
            break;
        }
    }
    (lo, hi, active, feasible)
}

fn finish(lp: &LinearProgram, mut x: Vec<f64>, status: SolveStatus, stats: SolveStats, opts: &SolverOptions) -> Solution {
    for (v, c) in x.iter_mut().zip(lp.columns()) {
        *v = v.clamp(c.lo, c.hi);
        if *v == 0.0 {
            // normalise -0.0 for byte-stable output
            *v = 0.0;
        }
    }
    let violations = lp.check_point(&x).expect("dimension matches by construction");
    let status = if status == SolveStatus::Optimal && !violations.within(opts.feasibility_tol) {
        SolveStatus::NumericalError
    } else {
        status
    };
    Solution {
        status,
        objective: lp.objective_value(&x),
        x,
        stats,
        violations,
    }
}

fn csc(m: usize, n: usize, mut trip: Vec<(usize, usize, f64)>) -> CscMatrix<f64> {
    trip.sort_by_key(|&(i, j, _)| (j, i));
    let mut colptr = vec![0usize; n + 1];
    let mut rowval = Vec::with_capacity(trip.len());
    let mut nzval = Vec::with_capacity(trip.len());
    for (i, j, v) in trip {
        colptr[j + 1] += 1;
        rowval.push(i);
        nzval.push(v);
    }
    for j in 0..n {
        colptr[j + 1] += colptr[j];
    }
    CscMatrix::new(m, n, colptr, rowval, nzval)
}
