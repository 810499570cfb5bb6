use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gridsddp::bench::{
    cmd_compare, cmd_fit_wind, cmd_make_fixtures, cmd_rescale_wind, cmd_run_dp, cmd_run_sddp, cmd_scale, BenchError,
    ExperimentConfig,
};
use gridsddp::dp::Interpolation;
use gridsddp::sddp::StopRule;

#[derive(Parser)]
#[command(name = "gridsddp", version, about = "Storage and wind dispatch by SDDP and tabular DP")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train SDDP and write bounds, cuts, trajectories and a summary.
    RunSddp(Common),
    /// Run the tabular DP and write the value table and a summary.
    RunDp(Common),
    /// Simulate SDDP and DP policies on shared scenarios.
    Compare(Common),
    /// Time SDDP over a list of cases.
    Scale(Common),
    /// Write the synthetic case ladder.
    MakeFixtures(Common),
    /// Fit a lag-1 wind model to a history CSV.
    FitWind {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        history: PathBuf,
    },
    /// Rescale a history CSV to a target capacity factor.
    RescaleWind {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        history: PathBuf,
        #[arg(long, default_value_t = 0.3)]
        factor: f64,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<PathBuf>,
    #[arg(long)]
    wind: Option<PathBuf>,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long = "backward-samples")]
    backward_samples: Option<usize>,
    #[arg(long)]
    scenarios: Option<usize>,
    #[arg(long = "forward-samples")]
    forward_samples: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long = "stop-rule", value_parser = ["ci", "fixed"])]
    stop_rule: Option<String>,
    /// Storage, generation and wind levels, e.g. `6,6,7`.
    #[arg(long = "dp-grid", value_delimiter = ',', num_args = 3)]
    dp_grid: Option<Vec<usize>>,
    #[arg(long, value_parser = ["convex", "nearest"])]
    interpolation: Option<String>,
    #[arg(long)]
    simulations: Option<usize>,
    /// SDDP iterations per comparison run, e.g. `4,10`.
    #[arg(long = "compare-runs", value_delimiter = ',')]
    compare_runs: Option<Vec<usize>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scaling cases: ladder bus counts or case paths.
    #[arg(long, value_delimiter = ',')]
    cases: Option<Vec<String>>,
    #[arg(long = "storage-counts", value_delimiter = ',')]
    storage_counts: Option<Vec<usize>>,
    #[arg(long = "wind-counts", value_delimiter = ',')]
    wind_counts: Option<Vec<usize>>,
}

impl Common {
    fn config(self) -> Result<ExperimentConfig, BenchError> {
        let mut c = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f { c.$f = v; })* };
        }
        set!(case, wind, iterations, backward_samples, scenarios, forward_samples, alpha, simulations, compare_runs, seed, out, cases, storage_counts, wind_counts);
        if self.horizon.is_some() {
            c.horizon = self.horizon;
        }
        if self.threads.is_some() {
            c.threads = self.threads;
        }
        if let Some(r) = self.stop_rule {
            c.stop_rule = if r == "ci" { StopRule::Ci } else { StopRule::Fixed };
        }
        if let Some(i) = self.interpolation {
            c.dp_interpolation = if i == "nearest" { Interpolation::Nearest } else { Interpolation::Convex };
        }
        if let Some(g) = self.dp_grid {
            c.dp_grid = [g[0], g[1], g[2]];
        }
        Ok(c)
    }
}

fn run(cmd: Command) -> Result<(), BenchError> {
    match cmd {
        Command::RunSddp(c) => {
            let r = cmd_run_sddp(&c.config()?)?;
            println!("{}", serde_json::to_string(&r.summary).expect("summary serializes"));
        }
        Command::RunDp(c) => {
            let r = cmd_run_dp(&c.config()?)?;
            println!("{}", serde_json::to_string(&r.summary).expect("summary serializes"));
        }
        Command::Compare(c) => {
            for r in cmd_compare(&c.config()?)? {
                println!("{} run {}: mean {:.2} sd {:.2} ({:.2}s)", r.method, r.run, r.cost.mean, r.cost.sd, r.cpu_seconds);
            }
        }
        Command::Scale(c) => {
            for r in cmd_scale(&c.config()?)? {
                println!("{} S={} M={}: {:.2}s {}", r.case, r.storage, r.wind, r.cpu_seconds, r.status);
            }
        }
        Command::MakeFixtures(c) => {
            for name in cmd_make_fixtures(&c.config()?)? {
                println!("{name}");
            }
        }
        Command::FitWind { common, history } => {
            let cfg = common.config()?;
            cmd_fit_wind(&cfg, &history)?;
            println!("{}", cfg.out.join("wind.toml").display());
        }
        Command::RescaleWind { common, history, factor } => {
            let cfg = common.config()?;
            cmd_rescale_wind(&cfg, &history, factor)?;
            println!("{}", cfg.out.join("wind_rescaled.csv").display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRIDSDDP_LOG", "error")).init();
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::FAILURE
        }
    }
}
