//! Solves one period of the nine-bus dispatch with no future cost and
//! prints the schedule, line flows and nodal prices.
//!
//! `cargo run --example stage_dispatch`

use gridsddp::lp::Tolerances;
use gridsddp::network::parse_case;
use gridsddp::stage::{build_stage_lp, extract_decision, BreakpointGrid, FutureCost, SystemState, DEFAULT_BREAKPOINTS};

fn main() -> anyhow::Result<()> {
    let net = parse_case(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/nine_bus.toml"))?;
    let grid = BreakpointGrid::uniform(&net, DEFAULT_BREAKPOINTS);
    let state = SystemState::at_minimum(&net, vec![43.5]);
    let wind = [60.0];

    let stage = build_stage_lp(&net, &state, &wind, &FutureCost::None, &grid)?;
    let sol = stage.solve(None, &Tolerances::default())?;
    let d = extract_decision(&net, &state, &wind, &stage, &sol)?;

    println!("hour 1 load {:.1} MW, wind {:.1} MW", net.total_demand(0), wind[0]);
    for (g, p) in net.generators.iter().zip(&d.p) {
        println!("generator {}: {p:>6.2} MW", g.id);
    }
    for (j, dev) in net.storage_devices.iter().enumerate() {
        println!("storage {}: charge {:.2}, discharge {:.2}, ends at {:.2}", dev.id, d.charge[j], d.discharge[j], d.next.s[j]);
    }
    for (l, f) in net.lines.iter().zip(&d.flows) {
        println!("line {} ({} -> {}): {f:>7.2} MW", l.id, l.from_bus, l.to_bus);
    }
    let prices: Vec<f64> = stage.layout.balance.iter().map(|&r| sol.dual(r)).collect();
    println!("nodal prices: {:.2?}", prices);
    println!("unserved {:.2}, spilled {:.2}, cost {:.2}", d.kappa_minus.iter().sum::<f64>(), d.kappa_plus.iter().sum::<f64>(), d.cost);
    Ok(())
}
