//! Benchmark the five planning policies on the desk study, the same as
//! `h2plan --config examples/desk_study/config.toml study part1`.
//!
//!     cargo run --example policy_benchmark [-- part2]

use std::path::Path;

use h2plan::cli::{run_study, Run, StudyKind};

fn main() -> h2plan::Result<()> {
    let kind = match std::env::args().nth(1).as_deref() {
        Some("part2") => StudyKind::Part2,
        _ => StudyKind::Part1,
    };
    let run = Run::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/desk_study/config.toml"))?;
    let out = std::env::temp_dir().join("h2plan-policy-benchmark");
    let report = run_study(&run, kind, &out)?;

    println!("{:<20} {:>9} {:>9} {:>8} {:>8} {:>7}", "policy", "mean", "worst", "EZ MW", "PPA MWp", "hedge");
    for e in &report.entries {
        match (&e.solution, &e.report) {
            (Some(s), Some(r)) => println!(
                "{:<20} {:>9.3} {:>9.3} {:>8.3} {:>8.2} {:>7.2}",
                e.name,
                r.mean_lcoh,
                r.worst_lcoh,
                s.design.electrolyzer_mw,
                s.design.ppa_mwp.values().sum::<f64>(),
                e.hedge_ratio.unwrap_or(f64::NAN)
            ),
            _ => println!("{:<20} failed: {}", e.name, e.error.as_deref().unwrap_or("?")),
        }
    }
    println!();
    for m in &report.metrics {
        println!(
            "{:<22} {:>7.2}% {:>7.2}%",
            m.metric,
            100.0 * m.mean_delta,
            100.0 * m.worst_delta
        );
    }
    Ok(())
}
