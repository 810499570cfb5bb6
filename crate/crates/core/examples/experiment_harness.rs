//! Drives the harness commands from a config, the way the `gridsddp`
//! binary does, and lists the files they write.
//!
//! `cargo run --release --example experiment_harness -- [out_dir]`

use std::path::PathBuf;

use gridsddp::bench::{cmd_compare, cmd_run_dp, cmd_run_sddp, ExperimentConfig};

const CONFIG: &str = r#"
iterations = 6
dp_grid = [6, 6, 3]
simulations = 100
compare_runs = [2, 6]
seed = 1
"#;

fn main() -> anyhow::Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("gridsddp_harness"));
    let cfg = ExperimentConfig {
        case: dir.join("tiny_compare.toml"),
        wind: dir.join("tiny_wind.toml"),
        out: out.clone(),
        ..ExperimentConfig::from_toml(CONFIG)?
    };

    let sddp = cmd_run_sddp(&cfg)?;
    println!(
        "run-sddp: lower {:.2}, upper {:.2} in [{:.2}, {:.2}]",
        sddp.summary.lower_bound, sddp.summary.upper_mean, sddp.summary.ci[0], sddp.summary.ci[1]
    );
    let dp = cmd_run_dp(&cfg)?;
    println!("run-dp: value at the initial state {:.2}", dp.summary.value_at_initial);
    for row in cmd_compare(&cfg)? {
        println!("compare: {} run {} mean {:.2} sd {:.2}", row.method, row.run, row.cost.mean, row.cost.sd);
    }

    let mut files: Vec<String> =
        std::fs::read_dir(&out)?.filter_map(|e| e.ok()).map(|e| e.file_name().to_string_lossy().into_owned()).collect();
    files.sort();
    println!("{}: {}", out.display(), files.join(", "));
    Ok(())
}
