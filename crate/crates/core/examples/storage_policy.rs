//! Trains SDDP on two single-bus days and prints the mean storage schedule
//! of the simulated policy: free cycling against a peaky load, and costly
//! cycling held back for the hours generation cannot cover.
//!
//! `cargo run --release --example storage_policy`

use gridsddp::network::{parse_case, Network};
use gridsddp::sddp::{Sddp, SddpConfig, StopRule, Trajectory};
use gridsddp::stage::SystemState;
use gridsddp::wind::{simulate, WindModel};

fn train(net: &Network, model: &WindModel, initial: SystemState) -> anyhow::Result<Vec<Trajectory>> {
    let cfg = SddpConfig { max_iters: 10, stop_rule: StopRule::Fixed, seed: 3, ..SddpConfig::default() };
    let sddp = Sddp::new(net, model, cfg)?.with_initial(initial);
    let out = sddp.run()?;
    let scenarios = simulate(model, std::slice::from_ref(&model.initial), net.horizon, 100, 99);
    Ok(sddp.simulate_policy(&out.pool, &scenarios)?)
}

fn report(net: &Network, paths: &[Trajectory]) {
    let n = paths.len() as f64;
    let capacity: f64 = net.generators.iter().map(|g| g.p_max).sum();
    println!("hour   load  mean wind  charge  discharge  level  short paths");
    for t in 0..net.horizon {
        let mean = |f: &dyn Fn(&Trajectory) -> f64| paths.iter().map(f).sum::<f64>() / n;
        let short = paths.iter().filter(|p| capacity + p.wind[t][0] < net.total_demand(t)).count();
        println!(
            "{:>4} {:>6.1} {:>10.2} {:>7.2} {:>10.2} {:>6.2} {:>12}",
            t + 1,
            net.total_demand(t),
            mean(&|p| p.wind[t][0]),
            mean(&|p| p.decisions[t].charge[0]).max(0.0),
            mean(&|p| p.decisions[t].discharge[0]).max(0.0),
            mean(&|p| p.decisions[t].next.s[0]),
            short
        );
    }
}

fn main() -> anyhow::Result<()> {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    let model = WindModel::load(format!("{dir}/storage_wind.toml"))?;

    let net = parse_case(format!("{dir}/storage_arbitrage.toml"))?;
    println!("free cycling, starting empty");
    report(&net, &train(&net, &model, SystemState::at_minimum(&net, model.initial.clone()))?);

    let net = parse_case(format!("{dir}/storage_reserve.toml"))?;
    let start = SystemState { s: vec![30.0], ..SystemState::at_minimum(&net, model.initial.clone()) };
    println!("\ncycling at 60 $/MWh, starting at 30 MWh");
    report(&net, &train(&net, &model, start)?);
    Ok(())
}
