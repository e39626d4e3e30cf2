//! The expert rule: half the yearly electricity from the cheapest solar
//! PPA, half from the cheapest wind PPA, sized on mean capacity factors.
//!
//!     cargo run --example pessimistic_expert

use h2plan::model::{PlantConfig, CASE_STUDY_PARKS};
use h2plan::policy::pessimistic_expert_ppa_sizing;

fn main() -> h2plan::Result<()> {
    let contracts = PlantConfig::case_study_ppas(100.0);
    let with_cf: Vec<_> = contracts
        .iter()
        .zip(CASE_STUDY_PARKS.iter())
        .map(|(c, r)| (c.clone(), r.cf_mean))
        .collect();

    println!("park               tech   €/MWh  mean CF");
    for (c, cf) in &with_cf {
        println!("{:<18} {:<6} {:>5.0}  {:>7.3}", c.park, c.technology, c.price, cf);
    }

    for annual_gwh in [34.0, 17.0, 50.0] {
        let sizing = pessimistic_expert_ppa_sizing(&with_cf, annual_gwh * 1000.0, 8760)?;
        let picked: Vec<String> = sizing
            .iter()
            .filter(|(_, &mwp)| mwp > 0.0)
            .map(|(p, mwp)| format!("{p} {mwp:.2} MWp"))
            .collect();
        println!("{annual_gwh:>4} GWh/yr -> {}", picked.join(", "));
    }
    Ok(())
}
