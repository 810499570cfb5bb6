//! Parses a case file, reports its topology, checks it and writes it back.
//!
//! `cargo run --example case_files -- [path/to/case.toml]`

use gridsddp::network::{bus_incidence, parse_case, parse_case_str, serialize_case, validate};

fn main() -> anyhow::Result<()> {
    let path = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nine_bus.toml").to_string());
    let net = parse_case(&path)?;
    println!(
        "{} buses, {} generators, {} lines, {} storage, {} wind farms over {} periods",
        net.buses.len(),
        net.generators.len(),
        net.lines.len(),
        net.storage_devices.len(),
        net.wind_farms.len(),
        net.horizon
    );
    println!("imbalance penalty {:.2} $/MWh", net.penalty_m);

    let inc = bus_incidence(&net);
    for (n, bus) in net.buses.iter().enumerate() {
        let peak = bus.load_profile.iter().copied().fold(0.0, f64::max);
        println!(
            "bus {:>2}: {} lines in, {} out, peak load {peak:>6.1}{}",
            bus.id,
            inc.entering[n].len(),
            inc.leaving[n].len(),
            if bus.is_slack { ", slack" } else { "" }
        );
    }

    let problems = validate(&net);
    println!("validation: {}", if problems.is_empty() { "ok".to_string() } else { problems.join("; ") });

    let text = serialize_case(&net);
    let back = parse_case_str(&text, path.as_ref())?;
    println!("round trip identical: {}", back == net);
    Ok(())
}
