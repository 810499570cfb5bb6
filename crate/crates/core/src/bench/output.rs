use std::path::Path;

use serde::Serialize;

use super::BenchError;
use crate::network::Network;
use crate::sddp::{BoundEstimate, CutPool, Trajectory};

pub const BOUNDS_HEADER: &str = "iteration,lower_bound,upper_mean,upper_sd,ci_lo,ci_hi";
pub const COMPARE_HEADER: &str = "method,run,min,max,mean,sd,cpu_seconds";
pub const SCALE_HEADER: &str = "case,buses,generators,lines,storage,wind,cpu_seconds,status";

/// Contents of `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SddpSummary {
    pub iterations: usize,
    pub converged: bool,
    pub lower_bound: f64,
    pub upper_mean: f64,
    pub upper_sd: f64,
    pub ci: [f64; 2],
    pub wall_time_seconds: f64,
    pub lp_solve_count: usize,
    /// Cuts generated per iteration and period.
    pub cuts_generated: Vec<Vec<usize>>,
    /// Distinct cuts kept per period.
    pub cut_pool_sizes: Vec<usize>,
    pub seed: u64,
}

/// Contents of `dp_summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DpSummary {
    pub evaluations_per_period: usize,
    pub total_evaluations: usize,
    pub wall_time_seconds: f64,
    pub lp_solves: usize,
    pub grid: [usize; 3],
    pub interpolation: String,
    /// Expected cost from the initial state.
    pub value_at_initial: f64,
}

pub(crate) fn csv_err(e: csv::Error) -> BenchError {
    BenchError::Io(std::io::Error::other(e))
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), BenchError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| BenchError::Io(e.into()))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn header(first: &[&str], net: &Network, blocks: &[&str]) -> Vec<String> {
    let mut h: Vec<String> = first.iter().map(|s| s.to_string()).collect();
    for b in blocks {
        match *b {
            "s" | "g_s" => h.extend(net.storage_devices.iter().map(|d| format!("{b}_{}", d.id))),
            "p" | "g_p" => h.extend(net.generators.iter().map(|g| format!("{b}_{}", g.id))),
            _ => h.extend(net.wind_farms.iter().map(|w| format!("{b}_{}", w.id))),
        }
    }
    h
}

fn fmt(v: &[f64]) -> impl Iterator<Item = String> + '_ {
    v.iter().map(|x| x.to_string())
}

pub(crate) fn write_bounds(path: &Path, history: &[BoundEstimate]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(BOUNDS_HEADER.split(',')).map_err(csv_err)?;
    for (k, b) in history.iter().enumerate() {
        let mut rec = vec![(k + 1).to_string()];
        rec.extend(fmt(&[b.lower_bound, b.upper_mean, b.upper_sd, b.ci.0, b.ci.1]));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `t,iteration,sample,intercept,g_s_*,g_p_*,g_w_*` with `t` from 1.
pub(crate) fn write_cuts(path: &Path, net: &Network, pool: &CutPool) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header(&["t", "iteration", "sample", "intercept"], net, &["g_s", "g_p", "g_w"]))
        .map_err(csv_err)?;
    for cuts in &pool.periods {
        for c in cuts {
            let mut rec = vec![(c.t + 1).to_string(), c.iteration.to_string(), c.sample.to_string(), c.intercept.to_string()];
            rec.extend(fmt(&c.g_s).chain(fmt(&c.g_p)).chain(fmt(&c.g_w)));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per path and period: end-of-period storage, generation, wind,
/// total imbalance on each side and the immediate cost.
pub(crate) fn write_trajectories(path: &Path, net: &Network, paths: &[Trajectory]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    let mut h = header(&["path", "t"], net, &["s", "p", "w"]);
    h.extend(["kappa_plus", "kappa_minus", "cost"].map(String::from));
    w.write_record(&h).map_err(csv_err)?;
    for (l, traj) in paths.iter().enumerate() {
        for (t, d) in traj.decisions.iter().enumerate() {
            let mut rec = vec![(l + 1).to_string(), (t + 1).to_string()];
            rec.extend(fmt(&d.next.s).chain(fmt(&d.p)).chain(fmt(&traj.wind[t])));
            rec.push(d.kappa_plus.iter().sum::<f64>().to_string());
            rec.push(d.kappa_minus.iter().sum::<f64>().to_string());
            rec.push(d.cost.to_string());
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}
