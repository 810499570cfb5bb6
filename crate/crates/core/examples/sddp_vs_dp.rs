//! Trains SDDP and solves the tabular DP on the six-period test case, then
//! simulates both policies on the same 100 wind scenarios.
//!
//! `cargo run --release --example sddp_vs_dp`

use std::time::Instant;

use gridsddp::dp::{backward_dp, simulate_dp_policy, CostSummary, DpOptions, StateGrid};
use gridsddp::network::parse_case;
use gridsddp::sddp::{Sddp, SddpConfig, StopRule};
use gridsddp::stage::SystemState;
use gridsddp::wind::{discretize, simulate, WindModel};

fn main() -> anyhow::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let net = parse_case(format!("{dir}/tiny_compare.toml"))?;
    let model = WindModel::load(format!("{dir}/tiny_wind.toml"))?;
    let initial = SystemState::at_minimum(&net, model.initial.clone());
    let scenarios = simulate(&model, std::slice::from_ref(&model.initial), net.horizon, 100, 2024);

    let start = Instant::now();
    let sddp = Sddp::new(&net, &model, SddpConfig { max_iters: 8, stop_rule: StopRule::Fixed, seed: 5, ..SddpConfig::default() })?;
    let out = sddp.run()?;
    let paths = sddp.simulate_policy(&out.pool, &scenarios)?;
    let sddp_cost = CostSummary::from_costs(&paths.iter().map(|p| p.cost).collect::<Vec<_>>());
    let sddp_time = start.elapsed().as_secs_f64();
    let last = out.last_bounds().expect("one iteration");
    println!("SDDP bounds: lower {:.2}, upper {:.2} +- {:.2}", last.lower_bound, last.upper_mean, last.upper_sd);

    let start = Instant::now();
    let chain = discretize(&model, 3, 20_000, 5)?;
    let grid = StateGrid::uniform(&net, 6, 6, chain)?;
    let dp = backward_dp(&net, grid.clone(), DpOptions::default())?;
    let sim = simulate_dp_policy(&net, &dp.table, grid, &initial, &scenarios, DpOptions::default())?;
    let dp_time = start.elapsed().as_secs_f64();
    println!("DP: {} evaluations per period, {} LP solves", dp.evaluations_per_period, dp.lp_solves);

    println!("method      mean        sd       min       max   seconds");
    for (name, c, secs) in [("SDDP", sddp_cost, sddp_time), ("DP", sim.summary, dp_time)] {
        println!("{name:<6} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {secs:>9.2}", c.mean, c.sd, c.min, c.max);
    }
    println!("SDDP excess over DP: {:.3}%", 100.0 * (sddp_cost.mean - sim.summary.mean) / sim.summary.mean);
    Ok(())
}
