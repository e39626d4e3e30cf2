//! Green-hydrogen subsidy and minimum green share: the three contexts of
//! the prospective study on the desk data.
//!
//!     cargo run --example rfnbo_contexts

use std::path::Path;

use h2plan::cli::{run_study, Run, StudyKind};

fn main() -> h2plan::Result<()> {
    let run = Run::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/desk_study/config.toml"))?;
    let out = std::env::temp_dir().join("h2plan-rfnbo-contexts");
    let report = run_study(&run, StudyKind::Prospective, &out)?;

    println!("context  subsidy  min share  mean LCOH  worst LCOH  mean share  lowest share");
    for e in &report.entries {
        let (Some(c), Some(r)) = (&e.context, &e.report) else {
            println!("{}: {}", e.name, e.error.as_deref().unwrap_or("no result"));
            continue;
        };
        println!(
            "{:<7}  {:>7.0}  {:>9.2}  {:>9.3}  {:>10.3}  {:>10.3}  {:>12.3}",
            c.name,
            c.subsidy,
            c.rfnbo_min,
            r.mean_lcoh,
            r.worst_lcoh,
            e.rfnbo_share_mean.unwrap_or(0.0),
            e.rfnbo_share_lowest.unwrap_or(0.0)
        );
    }
    println!("artefacts in {}", out.join("prospective").display());
    Ok(())
}
