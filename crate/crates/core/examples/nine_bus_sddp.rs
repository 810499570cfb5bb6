//! Four fixed SDDP iterations on the nine-bus fixture.
//!
//! `cargo run --release --example nine_bus_sddp`

use std::time::Instant;

use gridsddp::network::parse_case;
use gridsddp::sddp::{run, SddpConfig, StopRule};
use gridsddp::wind::WindModel;

fn main() -> anyhow::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let net = parse_case(format!("{dir}/nine_bus.toml"))?;
    let model = WindModel::load(format!("{dir}/nine_bus_wind.toml"))?;
    let cfg = SddpConfig { max_iters: 4, stop_rule: StopRule::Fixed, seed: 7, ..SddpConfig::default() };

    let start = Instant::now();
    let out = run(&net, &model, cfg)?;
    println!("iter  lower_bound  upper_mean  upper_sd");
    for (k, b) in out.history.iter().enumerate() {
        println!("{:>4}  {:>11.2}  {:>10.2}  {:>8.2}", k + 1, b.lower_bound, b.upper_mean, b.upper_sd);
    }
    println!(
        "cuts per hour: {:?}; {} LP solves in {:.1} s",
        out.pool.sizes(),
        out.lp_solves,
        start.elapsed().as_secs_f64()
    );
    Ok(())
}
