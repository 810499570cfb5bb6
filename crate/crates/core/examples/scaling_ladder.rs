//! Builds the seeded synthetic networks of the scaling ladder and times a
//! short SDDP run on each.
//!
//! `cargo run --release --example scaling_ladder -- [max_buses]`

use std::time::Instant;

use gridsddp::bench::fixtures::{case_name, synthetic_case, synthetic_wind, LADDER};
use gridsddp::sddp::{run, SddpConfig, StopRule};

fn main() -> anyhow::Result<()> {
    let max_buses: usize = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(57);
    let cfg = SddpConfig {
        backward_samples: 3,
        scenarios: 3,
        forward_samples: 3,
        max_iters: 2,
        stop_rule: StopRule::Fixed,
        breakpoints: 5,
        ..SddpConfig::default()
    };
    println!("case              buses  gens  lines  seconds  lower_bound");
    for shape in LADDER.iter().filter(|s| s.buses <= max_buses) {
        for (s, m) in [(1, 1), (5, 5)] {
            let net = synthetic_case(*shape, s, m, 6, 1)?;
            let model = synthetic_wind(&net)?;
            let start = Instant::now();
            let out = run(&net, &model, cfg.clone())?;
            println!(
                "{:<16} {:>6} {:>5} {:>6} {:>8.2} {:>12.1}",
                case_name(*shape, s, m),
                shape.buses,
                shape.generators,
                shape.lines,
                start.elapsed().as_secs_f64(),
                out.last_bounds().expect("one iteration").lower_bound
            );
        }
    }
    Ok(())
}
