//! Comparison metrics from pairs of (mean, worst) LCOH values.
//!
//!     cargo run --example policy_metrics

use h2plan::metrics::relative_delta;

fn main() -> h2plan::Result<()> {
    // (metric, baseline, candidate) with (mean, worst) €/kg each
    let rows = [
        ("VSS (risk-neutral)", "D_AS(NA)", (6.75, 10.22), "S_β0(NA)(da,p)", (6.74, 10.65)),
        ("VSS (risk-averse)", "D_PE", (6.57, 6.91), "S_β0.9(da,p)", (6.54, 7.17)),
        ("VRAS (deterministic)", "D_AS(NA)", (6.75, 10.22), "D_PE", (6.57, 6.91)),
        ("VRAS (stochastic)", "S_β0(NA)(da,p)", (6.74, 10.65), "S_β0.9(da,p)", (6.54, 7.17)),
        ("VAES", "S_β0.9(NA)(da,p)", (6.98, 7.12), "S_β0.9(da,p)", (6.54, 7.17)),
        ("VSS", "D_PE(A.dem)", (7.06, 7.92), "S_β0.9(da,p,dem)", (6.76, 7.14)),
        ("VS-Dem", "S_β0.9(da,p)", (7.40, 8.87), "S_β0.9(da,p,dem)", (6.76, 7.14)),
    ];
    println!("{:<22} {:<18} {:<18} {:>8} {:>8}", "metric", "baseline", "candidate", "mean", "worst");
    for (name, a, (am, aw), b, (bm, bw)) in rows {
        println!(
            "{name:<22} {a:<18} {b:<18} {:>7.1}% {:>7.1}%",
            100.0 * relative_delta(am, bm)?,
            100.0 * relative_delta(aw, bw)?
        );
    }
    Ok(())
}
