use std::path::Path;
use std::time::Instant;

use super::fixtures::{ladder_shape, synthetic_case, synthetic_wind, write_ladder, CaseShape};
use super::output::{csv_err, write_bounds, write_cuts, write_json, write_trajectories, DpSummary, SddpSummary};
use super::{BenchError, ExperimentConfig, COMPARE_HEADER, SCALE_HEADER};
use crate::dp::{CostSummary, Dp, DpOptions, DpOutcome, Interpolation, StateGrid};
use crate::network::{parse_case, Network};
use crate::sddp::{Sddp, SddpConfig, SddpError, SddpOutcome, StopRule};
use crate::stage::SystemState;
use crate::wind::{
    discretize, fit_lag1, read_history_csv, rescale_capacity_factor, simulate, write_history_csv, WindChain,
    WindModel, WindScenario,
};

const SALT_SCENARIOS: u64 = 0x7363_656e;

/// Seeded evaluation scenarios shared by every method of run `run`.
fn scenario_set(cfg: &ExperimentConfig, model: &WindModel, horizon: usize, run: u64) -> Vec<WindScenario> {
    simulate(model, std::slice::from_ref(&model.initial), horizon, cfg.simulations, cfg.seed ^ SALT_SCENARIOS ^ run)
}

/// Wind chain for the DP grid, a single state when there is no farm.
pub fn discretize_for(model: &WindModel, levels: usize, samples: usize, seed: u64) -> Result<WindChain, BenchError> {
    if model.farms() == 0 {
        return Ok(WindChain { levels: vec![], states: vec![vec![]], transition: vec![vec![1.0]] });
    }
    Ok(discretize(model, levels, samples, seed)?)
}

fn train(sddp: &Sddp) -> Result<SddpOutcome, BenchError> {
    match sddp.run() {
        Ok(o) => Ok(o),
        Err(SddpError::MaxItersExceeded(o)) => Ok(*o),
        Err(e) => Err(e.into()),
    }
}

/// Result of [`cmd_run_sddp`].
#[derive(Clone, Debug)]
pub struct SddpReport {
    pub outcome: SddpOutcome,
    pub summary: SddpSummary,
}

/// Trains SDDP and writes `bounds.csv`, `cuts.csv`, `trajectories.csv`
/// (the policy simulated on `simulations` seeded scenarios) and
/// `summary.json`. A `ci` run that never meets its rule still writes its
/// outputs, with `converged` false.
pub fn cmd_run_sddp(cfg: &ExperimentConfig) -> Result<SddpReport, BenchError> {
    cfg.install_threads();
    let (net, model) = cfg.load_inputs()?;
    std::fs::create_dir_all(&cfg.out)?;
    let start = Instant::now();
    let sddp = Sddp::new(&net, &model, cfg.sddp_config())?;
    let outcome = train(&sddp)?;
    let wall = start.elapsed().as_secs_f64();
    let paths = sddp.simulate_policy(&outcome.pool, &scenario_set(cfg, &model, net.horizon, 0))?;
    let last = outcome.last_bounds().cloned().expect("at least one iteration");
    let summary = SddpSummary {
        iterations: outcome.iterations,
        converged: outcome.converged,
        lower_bound: last.lower_bound,
        upper_mean: last.upper_mean,
        upper_sd: last.upper_sd,
        ci: [last.ci.0, last.ci.1],
        wall_time_seconds: wall,
        lp_solve_count: outcome.lp_solves,
        cuts_generated: outcome.cuts_generated.clone(),
        cut_pool_sizes: outcome.pool.sizes(),
        seed: cfg.seed,
    };
    write_bounds(&cfg.out.join("bounds.csv"), &outcome.history)?;
    write_cuts(&cfg.out.join("cuts.csv"), &net, &outcome.pool)?;
    write_trajectories(&cfg.out.join("trajectories.csv"), &net, &paths)?;
    write_json(&cfg.out.join("summary.json"), &summary)?;
    log::info!("run-sddp: {} iterations in {wall:.2}s", outcome.iterations);
    Ok(SddpReport { outcome, summary })
}

/// Result of [`cmd_run_dp`].
#[derive(Clone, Debug)]
pub struct DpReport {
    pub outcome: DpOutcome,
    pub summary: DpSummary,
}

fn build_dp<'a>(cfg: &ExperimentConfig, net: &'a Network, model: &WindModel) -> Result<Dp<'a>, BenchError> {
    let [s, g, w] = cfg.dp_grid;
    let chain = discretize_for(model, w, cfg.wind_samples, cfg.seed)?;
    let grid = StateGrid::uniform(net, s, g, chain)?;
    let opts = DpOptions { interpolation: cfg.dp_interpolation, breakpoints: cfg.breakpoints, ..DpOptions::default() };
    Ok(Dp::new(net, grid, opts)?)
}

/// Runs the backward recursion and writes `value_table.csv` and
/// `dp_summary.json`.
pub fn cmd_run_dp(cfg: &ExperimentConfig) -> Result<DpReport, BenchError> {
    cfg.install_threads();
    let (net, model) = cfg.load_inputs()?;
    std::fs::create_dir_all(&cfg.out)?;
    let start = Instant::now();
    let dp = build_dp(cfg, &net, &model)?;
    let outcome = dp.backward()?;
    let wall = start.elapsed().as_secs_f64();
    let initial = SystemState::at_minimum(&net, model.initial.clone());
    let value_at_initial = dp.value_at(&outcome.table, &initial)?;
    let file = std::fs::File::create(cfg.out.join("value_table.csv"))?;
    outcome.table.write_csv(&net, &dp.grid, std::io::BufWriter::new(file))?;
    let summary = DpSummary {
        evaluations_per_period: outcome.evaluations_per_period,
        total_evaluations: outcome.total_evaluations,
        wall_time_seconds: wall,
        lp_solves: outcome.lp_solves,
        grid: cfg.dp_grid,
        interpolation: match cfg.dp_interpolation {
            Interpolation::Convex => "convex".into(),
            Interpolation::Nearest => "nearest".into(),
        },
        value_at_initial,
    };
    write_json(&cfg.out.join("dp_summary.json"), &summary)?;
    log::info!("run-dp: {} evaluations per period in {wall:.2}s", outcome.evaluations_per_period);
    Ok(DpReport { outcome, summary })
}

/// One row of `compare.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub method: String,
    pub run: usize,
    pub cost: CostSummary,
    pub cpu_seconds: f64,
}

/// Relative excess of `other` over `reference`.
pub fn cost_gap(reference: f64, other: f64) -> f64 {
    (other - reference) / reference.abs().max(f64::MIN_POSITIVE)
}

/// Builds the DP table once and, for each entry of `compare_runs`, trains
/// SDDP for that many iterations. Both policies of a run face the same
/// seeded scenarios. A method's time covers its training plus the run's
/// simulation. Writes `compare.csv`.
pub fn cmd_compare(cfg: &ExperimentConfig) -> Result<Vec<CompareRow>, BenchError> {
    cfg.install_threads();
    let (net, model) = cfg.load_inputs()?;
    std::fs::create_dir_all(&cfg.out)?;
    let start = Instant::now();
    let dp = build_dp(cfg, &net, &model)?;
    let table = dp.backward()?.table;
    let dp_build = start.elapsed().as_secs_f64();
    let initial = SystemState::at_minimum(&net, model.initial.clone());

    let mut rows = Vec::new();
    for (r, &iters) in cfg.compare_runs.iter().enumerate() {
        let scenarios = scenario_set(cfg, &model, net.horizon, r as u64 + 1);
        let start = Instant::now();
        let sddp_cfg = SddpConfig { max_iters: iters, stop_rule: StopRule::Fixed, ..cfg.sddp_config() };
        let sddp = Sddp::new(&net, &model, sddp_cfg)?.with_initial(initial.clone());
        let outcome = train(&sddp)?;
        let paths = sddp.simulate_policy(&outcome.pool, &scenarios)?;
        let costs: Vec<f64> = paths.iter().map(|p| p.cost).collect();
        let sddp_time = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let sim = dp.simulate(&table, &initial, &scenarios)?;
        let dp_time = dp_build + start.elapsed().as_secs_f64();
        rows.push(CompareRow { method: "SDDP".into(), run: r + 1, cost: CostSummary::from_costs(&costs), cpu_seconds: sddp_time });
        rows.push(CompareRow { method: "DP".into(), run: r + 1, cost: sim.summary, cpu_seconds: dp_time });
    }
    let mut w = csv::Writer::from_path(cfg.out.join("compare.csv")).map_err(csv_err)?;
    w.write_record(COMPARE_HEADER.split(',')).map_err(csv_err)?;
    for row in &rows {
        let c = &row.cost;
        let rec = [
            row.method.clone(),
            row.run.to_string(),
            c.min.to_string(),
            c.max.to_string(),
            c.mean.to_string(),
            c.sd.to_string(),
            format!("{:.3}", row.cpu_seconds),
        ];
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(rows)
}

/// One row of `scale.csv`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleRow {
    pub case: String,
    pub buses: usize,
    pub generators: usize,
    pub lines: usize,
    pub storage: usize,
    pub wind: usize,
    pub cpu_seconds: f64,
    /// `ok` or the failure message.
    pub status: String,
}

fn time_sddp(net: &Network, model: &WindModel, cfg: SddpConfig) -> Result<f64, BenchError> {
    let start = Instant::now();
    train(&Sddp::new(net, model, cfg)?)?;
    Ok(start.elapsed().as_secs_f64())
}

fn scale_row(name: String, net: Result<(Network, WindModel), BenchError>, cfg: &ExperimentConfig) -> ScaleRow {
    let (shape, (s, m)) = match &net {
        Ok((n, _)) => (
            CaseShape { buses: n.buses.len(), generators: n.generators.len(), lines: n.lines.len() },
            (n.storage_devices.len(), n.wind_farms.len()),
        ),
        Err(_) => (CaseShape { buses: 0, generators: 0, lines: 0 }, (0, 0)),
    };
    let timed = net.and_then(|(n, model)| time_sddp(&n, &model, cfg.sddp_config()));
    let (cpu_seconds, status) = match timed {
        Ok(secs) => (secs, "ok".to_string()),
        Err(e) => (0.0, e.to_string()),
    };
    if status != "ok" {
        log::error!("scale: {name}: {status}");
    }
    ScaleRow {
        case: name,
        buses: shape.buses,
        generators: shape.generators,
        lines: shape.lines,
        storage: s,
        wind: m,
        cpu_seconds,
        status,
    }
}

/// Times an SDDP run per case. Ladder entries (`"30"`, `"57"`, ...) expand
/// to every storage and wind count; file entries run as given, using the
/// configured wind model when it exists and a synthetic one otherwise.
/// Failures become rows with their message. Writes `scale.csv`.
pub fn cmd_scale(cfg: &ExperimentConfig) -> Result<Vec<ScaleRow>, BenchError> {
    cfg.install_threads();
    cfg.check_params()?;
    std::fs::create_dir_all(&cfg.out)?;
    let horizon = cfg.horizon.unwrap_or(24);
    let mut rows = Vec::new();
    for entry in &cfg.cases {
        if let Ok(buses) = entry.parse::<usize>() {
            let Some(shape) = ladder_shape(buses) else {
                rows.push(scale_row(entry.clone(), Err(BenchError::Config(format!("no ladder case with {buses} buses"))), cfg));
                continue;
            };
            for &s in &cfg.storage_counts {
                for &m in &cfg.wind_counts {
                    let net = synthetic_case(shape, s, m, horizon, cfg.seed)
                        .and_then(|n| synthetic_wind(&n).map(|w| (n, w)));
                    rows.push(scale_row(format!("case{buses}"), net, cfg));
                }
            }
        } else {
            let net = (|| {
                let mut n = parse_case(entry)?;
                if let Some(t) = cfg.horizon {
                    n = n.with_horizon(t)?;
                }
                let w = if cfg.wind.is_file() { WindModel::load(&cfg.wind)? } else { synthetic_wind(&n)? };
                Ok((n, w))
            })();
            rows.push(scale_row(entry.clone(), net, cfg));
        }
    }
    let mut w = csv::Writer::from_path(cfg.out.join("scale.csv")).map_err(csv_err)?;
    w.write_record(SCALE_HEADER.split(',')).map_err(csv_err)?;
    for r in &rows {
        let rec = [
            r.case.clone(),
            r.buses.to_string(),
            r.generators.to_string(),
            r.lines.to_string(),
            r.storage.to_string(),
            r.wind.to_string(),
            format!("{:.3}", r.cpu_seconds),
            r.status.clone(),
        ];
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(rows)
}

/// Writes the synthetic ladder for every storage and wind count into `out`.
pub fn cmd_make_fixtures(cfg: &ExperimentConfig) -> Result<Vec<String>, BenchError> {
    write_ladder(&cfg.out, &cfg.storage_counts, &cfg.wind_counts, cfg.horizon.unwrap_or(24), cfg.seed)
}

fn capacities(cfg: &ExperimentConfig) -> Result<Vec<f64>, BenchError> {
    Ok(parse_case(&cfg.case)?.wind_farms.iter().map(|w| w.capacity).collect())
}

/// Fits a lag-1 model to a `t,farm_1,...` history, with capacities from
/// the case, and writes it to `out/wind.toml`.
pub fn cmd_fit_wind(cfg: &ExperimentConfig, history: &Path) -> Result<WindModel, BenchError> {
    let rows = read_history_csv(history)?;
    let model = fit_lag1(&rows, capacities(cfg)?)?;
    std::fs::create_dir_all(&cfg.out)?;
    std::fs::write(cfg.out.join("wind.toml"), model.to_toml())?;
    Ok(model)
}

/// Rescales a history to mean `capacity * factor` per farm and writes
/// `out/wind_rescaled.csv`.
pub fn cmd_rescale_wind(cfg: &ExperimentConfig, history: &Path, factor: f64) -> Result<Vec<Vec<f64>>, BenchError> {
    if !(factor > 0.0 && factor <= 1.0) {
        return Err(BenchError::Config("capacity factor must lie in (0, 1]".into()));
    }
    let rows = read_history_csv(history)?;
    let cap = capacities(cfg)?;
    if rows.iter().any(|r| r.len() != cap.len()) {
        return Err(BenchError::Config(format!("history rows must have {} farms", cap.len())));
    }
    let out = rescale_capacity_factor(&rows, &cap, factor);
    std::fs::create_dir_all(&cfg.out)?;
    write_history_csv(cfg.out.join("wind_rescaled.csv"), &out)?;
    Ok(out)
}
