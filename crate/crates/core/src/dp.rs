//! Tabular stochastic dynamic programming on a discretized state grid.
//!
//! The grid covers storage levels, previous generation levels and the wind
//! chain's joint states. A period value `F_t(s, p, w)` averages, over the
//! chain's next wind state `w'`, the stage LP optimum at `(s, p)` with wind
//! `w'` and the interpolated `F_{t+1}(., ., w')` as future cost. The stage
//! optimum does not depend on `w`, so each `(s, p, w')` is solved once per
//! period; the evaluation count still reports every `(s, p, w, w')` pair.

use std::io::Write;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{solve_with_basis, LpSolution, Tolerances, WarmStart};
use crate::network::Network;
use crate::sddp::Trajectory;
use crate::stage::{
    build_stage_lp, extract_decision, ramp_bounds, BreakpointGrid, FutureCost, StageError, StageLp,
    SystemState, TableFuture, DEFAULT_BREAKPOINTS,
};
use crate::wind::{WindChain, WindScenario};

#[derive(Debug, Error)]
pub enum DpError {
    #[error("period {}, storage {storage:?}, generation {generation:?}, wind {wind}: {source}", t + 1)]
    SolveFailed { t: usize, storage: Vec<usize>, generation: Vec<usize>, wind: usize, source: StageError },
    #[error("grid: {0}")]
    Grid(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// How the future cost is read off the table between grid nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Cheapest convex combination of grid nodes matching the next state.
    #[default]
    Convex,
    /// Value of the grid node nearest to the next state.
    Nearest,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DpOptions {
    pub interpolation: Interpolation,
    pub breakpoints: usize,
    pub tol: Tolerances,
}

impl Default for DpOptions {
    fn default() -> Self {
        Self { interpolation: Interpolation::Convex, breakpoints: DEFAULT_BREAKPOINTS, tol: Tolerances::default() }
    }
}

/// `n` evenly spaced values from `lo` to `hi`; a single level sits at `lo`.
pub fn uniform_levels(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 || hi <= lo {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Cartesian grid of storage, generation and wind states.
///
/// A storage-generation node `k` enumerates storage levels first, device 0
/// fastest, then generation levels, generator 0 fastest. Table entries are
/// stored at `k * wind_states + w`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateGrid {
    pub storage: Vec<Vec<f64>>,
    pub generation: Vec<Vec<f64>>,
    pub wind: WindChain,
}

impl StateGrid {
    /// Uniform grid with the given level counts per dimension.
    pub fn uniform(net: &Network, storage_levels: usize, gen_levels: usize, wind: WindChain) -> Result<Self, DpError> {
        if storage_levels == 0 || gen_levels == 0 {
            return Err(DpError::Grid("level counts must be at least 1".into()));
        }
        let storage = net.storage_devices.iter().map(|d| uniform_levels(d.s_min, d.s_max, storage_levels)).collect();
        let generation = net.generators.iter().map(|g| uniform_levels(g.p_min, g.p_max, gen_levels)).collect();
        Self::new(net, storage, generation, wind)
    }

    pub fn new(net: &Network, storage: Vec<Vec<f64>>, generation: Vec<Vec<f64>>, wind: WindChain) -> Result<Self, DpError> {
        if storage.len() != net.storage_devices.len() || generation.len() != net.generators.len() {
            return Err(DpError::Grid("grid dimensions do not match the network".into()));
        }
        if wind.levels.len() != net.wind_farms.len() {
            return Err(DpError::Grid("wind chain does not match the number of farms".into()));
        }
        let tol = 1e-9;
        for (lv, d) in storage.iter().zip(&net.storage_devices) {
            if lv.is_empty() || lv.iter().any(|&v| v < d.s_min - tol || v > d.s_max + tol) {
                return Err(DpError::Grid(format!("storage levels of device {} outside its bounds", d.id)));
            }
        }
        for (lv, g) in generation.iter().zip(&net.generators) {
            if lv.is_empty() || lv.iter().any(|&v| v < g.p_min - tol || v > g.p_max + tol) {
                return Err(DpError::Grid(format!("generation levels of generator {} outside its bounds", g.id)));
            }
        }
        let n = wind.num_states();
        if n == 0 || wind.transition.len() != n || wind.transition.iter().any(|r| r.len() != n) {
            return Err(DpError::Grid("wind transition matrix is not square over the chain states".into()));
        }
        Ok(Self { storage, generation, wind })
    }

    fn dims(&self) -> impl Iterator<Item = &Vec<f64>> {
        self.storage.iter().chain(&self.generation)
    }

    /// Storage-generation nodes.
    pub fn nodes(&self) -> usize {
        self.dims().map(Vec::len).product()
    }

    pub fn wind_states(&self) -> usize {
        self.wind.num_states()
    }

    /// Total grid size.
    pub fn len(&self) -> usize {
        self.nodes() * self.wind_states()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stage evaluations per period, every `(s, p, w, w')` combination.
    pub fn evaluations_per_period(&self) -> usize {
        self.len() * self.wind_states()
    }

    /// Per-dimension level indices of node `k`, storage first.
    pub fn node_indices(&self, mut k: usize) -> Vec<usize> {
        self.dims()
            .map(|lv| {
                let i = k % lv.len();
                k /= lv.len();
                i
            })
            .collect()
    }

    /// Storage and generation levels of node `k`.
    pub fn node_point(&self, k: usize) -> (Vec<f64>, Vec<f64>) {
        let idx = self.node_indices(k);
        let ns = self.storage.len();
        let s = self.storage.iter().zip(&idx[..ns]).map(|(lv, &i)| lv[i]).collect();
        let p = self.generation.iter().zip(&idx[ns..]).map(|(lv, &i)| lv[i]).collect();
        (s, p)
    }

    /// State entering period `t` at node `k` with previous wind state `w`.
    pub fn state(&self, t: usize, k: usize, w: usize) -> SystemState {
        let (s, p_prev) = self.node_point(k);
        SystemState { t, s, p_prev, w_prev: self.wind.value(w) }
    }

    /// Dimensions with more than one level; single-level ones are not
    /// interpolated.
    fn interpolated(&self) -> (Vec<usize>, Vec<usize>) {
        let multi = |v: &Vec<Vec<f64>>| v.iter().enumerate().filter(|(_, lv)| lv.len() > 1).map(|(j, _)| j).collect();
        (multi(&self.storage), multi(&self.generation))
    }

    /// Table future of `values` (one value per node) for the stage LP.
    fn table_future(&self, values: Vec<f64>) -> TableFuture {
        let (storage_dims, gen_dims) = self.interpolated();
        let nodes = (0..self.nodes())
            .map(|k| {
                let (s, p) = self.node_point(k);
                storage_dims.iter().map(|&j| s[j]).chain(gen_dims.iter().map(|&g| p[g])).collect()
            })
            .collect();
        TableFuture { storage_dims, gen_dims, nodes, values }
    }
}

/// Expected cost-to-go per period on the grid, with period `T` all zero.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable {
    pub periods: Vec<Vec<f64>>,
    pub wind_states: usize,
}

impl ValueTable {
    pub fn horizon(&self) -> usize {
        self.periods.len().saturating_sub(1)
    }

    pub fn get(&self, t: usize, node: usize, w: usize) -> f64 {
        self.periods[t][node * self.wind_states + w]
    }

    /// Node values of period `t` at wind state `w`.
    pub fn slice(&self, t: usize, w: usize) -> Vec<f64> {
        self.periods[t].iter().skip(w).step_by(self.wind_states).copied().collect()
    }

    /// Writes `t,s_<id>..,p_<id>..,w,value` rows, periods 1-based.
    pub fn write_csv<W: Write>(&self, net: &Network, grid: &StateGrid, out: W) -> Result<(), DpError> {
        let mut wr = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend(net.storage_devices.iter().map(|d| format!("s_{}", d.id)));
        header.extend(net.generators.iter().map(|g| format!("p_{}", g.id)));
        header.push("w".into());
        header.push("value".into());
        wr.write_record(&header).map_err(csv_io)?;
        for (t, vals) in self.periods.iter().enumerate() {
            for (i, v) in vals.iter().enumerate() {
                let (k, w) = (i / self.wind_states, i % self.wind_states);
                let mut rec = vec![(t + 1).to_string()];
                rec.extend(grid.node_indices(k).iter().map(usize::to_string));
                rec.push(w.to_string());
                rec.push(format!("{v}"));
                wr.write_record(&rec).map_err(csv_io)?;
            }
        }
        wr.flush()?;
        Ok(())
    }
}

fn csv_io(e: csv::Error) -> DpError {
    DpError::Io(std::io::Error::other(e))
}

/// Backward recursion result.
#[derive(Clone, Debug)]
pub struct DpOutcome {
    pub table: ValueTable,
    pub evaluations_per_period: usize,
    pub total_evaluations: usize,
    pub lp_solves: usize,
}

/// Cost statistics over simulated scenarios.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Sample standard deviation.
    pub sd: f64,
    pub count: usize,
}

impl CostSummary {
    pub fn from_costs(costs: &[f64]) -> Self {
        let n = costs.len();
        let mean = costs.iter().sum::<f64>() / n.max(1) as f64;
        let sd = if n > 1 {
            (costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self {
            min: costs.iter().copied().fold(f64::INFINITY, f64::min),
            max: costs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean,
            sd,
            count: n,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DpSimulation {
    pub trajectories: Vec<Trajectory>,
    pub costs: Vec<f64>,
    pub summary: CostSummary,
}

/// Grid, stage data and options of a DP run.
pub struct Dp<'a> {
    pub net: &'a Network,
    pub grid: StateGrid,
    pub breakpoints: BreakpointGrid,
    pub opts: DpOptions,
    solves: AtomicUsize,
}

/// Stage LP of one `(t, w')` block, solved once cold for warm starts.
struct Block {
    lp: StageLp,
    warm: Option<WarmStart>,
    /// Table values of period `t + 1` at `w'`, for nearest lookup.
    next: Option<Vec<f64>>,
}

impl<'a> Dp<'a> {
    pub fn new(net: &'a Network, grid: StateGrid, opts: DpOptions) -> Result<Self, DpError> {
        net.ensure_valid().map_err(|e| DpError::Grid(e.to_string()))?;
        let breakpoints = BreakpointGrid::uniform(net, opts.breakpoints);
        Ok(Self { net, grid, breakpoints, opts, solves: AtomicUsize::new(0) })
    }

    /// Stage LP solves so far, including warm-start references.
    pub fn lp_solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    fn count(&self, n: usize) {
        self.solves.fetch_add(n, Ordering::Relaxed);
    }

    fn fail(&self, t: usize, k: usize, w: usize) -> impl Fn(StageError) -> DpError + '_ {
        move |source| {
            let idx = self.grid.node_indices(k);
            let ns = self.grid.storage.len();
            DpError::SolveFailed { t, storage: idx[..ns].to_vec(), generation: idx[ns..].to_vec(), wind: w, source }
        }
    }

    fn block(&self, table: &ValueTable, t: usize, w: usize) -> Result<Block, DpError> {
        let last = t + 1 >= table.periods.len() - 1;
        let values = (!last).then(|| table.slice(t + 1, w));
        let state = self.grid.state(t, 0, w);
        let wind = self.grid.wind.value(w);
        let fail = self.fail(t, 0, w);
        let (lp, next) = match (&values, self.opts.interpolation) {
            (Some(v), Interpolation::Convex) => {
                let tf = self.grid.table_future(v.clone());
                (build_stage_lp(self.net, &state, &wind, &FutureCost::Table(&tf), &self.breakpoints).map_err(&fail)?, None)
            }
            _ => (build_stage_lp(self.net, &state, &wind, &FutureCost::None, &self.breakpoints).map_err(&fail)?, values),
        };
        self.count(1);
        let warm = match solve_with_basis(&lp.problem, &self.opts.tol) {
            Ok((sol, ws)) if sol.is_optimal() => ws,
            _ => None,
        };
        Ok(Block { lp, warm, next })
    }

    /// Stage optimum plus future cost at `state` with wind state `w'`.
    fn evaluate(&self, block: &Block, state: &SystemState, w: usize) -> Result<f64, StageError> {
        let wind = self.grid.wind.value(w);
        let mut lp = block.lp.clone();
        lp.set_state(self.net, state, &wind)?;
        Ok(self.solve_block(block, &mut lp, state)?.0)
    }

    /// Solves `lp`, already set to `state`. Returns the total value, the
    /// solution and the table value of the chosen next state.
    fn solve_block(&self, block: &Block, lp: &mut StageLp, state: &SystemState) -> Result<(f64, LpSolution, f64), StageError> {
        match &block.next {
            None => {
                self.count(1);
                let sol = lp.solve(block.warm.as_ref(), &self.opts.tol)?;
                let future = lp.future_value(&sol);
                Ok((sol.objective, sol, future))
            }
            Some(values) => self.solve_nearest(block, lp, state, values),
        }
    }

    /// Minimum over the grid cells reachable from `state` of the stage
    /// optimum restricted to the cell plus the cell's table value.
    fn solve_nearest(
        &self,
        block: &Block,
        lp: &mut StageLp,
        state: &SystemState,
        values: &[f64],
    ) -> Result<(f64, LpSolution, f64), StageError> {
        let net = self.net;
        let reach_s: Vec<(f64, f64)> = net
            .storage_devices
            .iter()
            .enumerate()
            .map(|(j, d)| {
                let base = d.eff_storage * state.s[j];
                ((base - d.delta_max).max(d.s_min), (base + d.delta_max).min(d.s_max))
            })
            .collect();
        let reach_p: Vec<(f64, f64)> =
            net.generators.iter().zip(&state.p_prev).map(|(g, &p)| ramp_bounds(g, p)).collect();
        let reach: Vec<(f64, f64)> = reach_s.into_iter().chain(reach_p).collect();
        let vars: Vec<_> = lp.layout.s_next.iter().chain(&lp.layout.p).copied().collect();
        let mut best: Option<(f64, LpSolution, f64)> = None;
        for k in 0..self.grid.nodes() {
            let idx = self.grid.node_indices(k);
            let mut cells = Vec::with_capacity(idx.len());
            for ((lv, &i), &(lo, hi)) in self.grid.dims().zip(&idx).zip(&reach) {
                let a = if i == 0 { f64::NEG_INFINITY } else { 0.5 * (lv[i - 1] + lv[i]) };
                let b = if i + 1 == lv.len() { f64::INFINITY } else { 0.5 * (lv[i] + lv[i + 1]) };
                let (a, b) = (a.max(lo), b.min(hi));
                if a > b + 1e-9 {
                    break;
                }
                cells.push((a, b.max(a)));
            }
            if cells.len() < idx.len() {
                continue;
            }
            for (&v, &(a, b)) in vars.iter().zip(&cells) {
                lp.problem.set_bounds(v, a, b);
            }
            self.count(1);
            let sol = match lp.solve(block.warm.as_ref(), &self.opts.tol) {
                Ok(s) => s,
                Err(StageError::NotOptimal(_)) => continue,
                Err(e) => return Err(e),
            };
            let total = sol.objective + values[k];
            if best.as_ref().is_none_or(|(b, _, _)| total < *b) {
                best = Some((total, sol, values[k]));
            }
        }
        for (j, d) in net.storage_devices.iter().enumerate() {
            lp.problem.set_bounds(lp.layout.s_next[j], d.s_min, d.s_max);
        }
        for &v in &lp.layout.p {
            lp.problem.set_bounds(v, f64::NEG_INFINITY, f64::INFINITY);
        }
        best.ok_or(StageError::NotOptimal(crate::lp::LpStatus::Infeasible))
    }

    /// Runs the recursion from the last period back to the first.
    pub fn backward(&self) -> Result<DpOutcome, DpError> {
        let horizon = self.net.horizon;
        let nodes = self.grid.nodes();
        let nw = self.grid.wind_states();
        let mut table = ValueTable { periods: vec![vec![0.0; nodes * nw]; horizon + 1], wind_states: nw };
        for t in (0..horizon).rev() {
            // stage[w' * nodes + k]
            let mut stage = vec![0.0; nodes * nw];
            for w in 0..nw {
                let block = self.block(&table, t, w)?;
                let vals: Result<Vec<f64>, DpError> = (0..nodes)
                    .into_par_iter()
                    .map(|k| {
                        let state = self.grid.state(t, k, 0);
                        self.evaluate(&block, &state, w).map_err(self.fail(t, k, w))
                    })
                    .collect();
                stage[w * nodes..(w + 1) * nodes].copy_from_slice(&vals?);
            }
            let period = &mut table.periods[t];
            for k in 0..nodes {
                for (w, row) in self.grid.wind.transition.iter().enumerate() {
                    period[k * nw + w] = row.iter().enumerate().map(|(w2, pr)| pr * stage[w2 * nodes + k]).sum();
                }
            }
            log::debug!("dp period {} done", t + 1);
        }
        let per = self.grid.evaluations_per_period();
        Ok(DpOutcome { table, evaluations_per_period: per, total_evaluations: per * horizon, lp_solves: self.lp_solves() })
    }

    /// Expected cost-to-go at an off-grid `state`, with the previous wind
    /// snapped to its nearest chain state.
    pub fn value_at(&self, table: &ValueTable, state: &SystemState) -> Result<f64, DpError> {
        let w = self.grid.wind.nearest(&state.w_prev);
        let row = &self.grid.wind.transition[w];
        let mut total = 0.0;
        for (w2, &pr) in row.iter().enumerate() {
            if pr == 0.0 {
                continue;
            }
            let block = self.block(table, state.t, w2)?;
            let v = self.evaluate(&block, state, w2).map_err(self.fail(state.t, 0, w2))?;
            total += pr * v;
        }
        Ok(total)
    }

    /// Simulates the table policy along `scenarios` from `initial`. Each
    /// period solves the stage LP at the continuous state with the realized
    /// wind and the table at the wind's nearest chain state.
    pub fn simulate(
        &self,
        table: &ValueTable,
        initial: &SystemState,
        scenarios: &[WindScenario],
    ) -> Result<DpSimulation, DpError> {
        let horizon = self.net.horizon;
        let nw = self.grid.wind_states();
        let blocks: Vec<Vec<Block>> = (0..horizon)
            .map(|t| (0..nw).map(|w| self.block(table, t, w)).collect::<Result<_, _>>())
            .collect::<Result<_, _>>()?;
        let trajectories: Vec<Trajectory> = scenarios
            .par_iter()
            .map(|sc| {
                let mut state = SystemState { t: 0, ..initial.clone() };
                let mut traj = Trajectory { states: vec![], wind: vec![], decisions: vec![], cost: 0.0 };
                for (t, row) in blocks.iter().enumerate() {
                    let wind = sc.values[t].clone();
                    let w = self.grid.wind.nearest(&wind);
                    let block = &row[w];
                    let mut lp = block.lp.clone();
                    let fail = self.fail(t, 0, w);
                    lp.set_state(self.net, &state, &wind).map_err(&fail)?;
                    let (_, sol, future) = self.solve_block(block, &mut lp, &state).map_err(&fail)?;
                    let mut d = extract_decision(self.net, &state, &wind, &lp, &sol).map_err(&fail)?;
                    d.future = future;
                    traj.cost += d.cost;
                    let next = d.next.clone();
                    traj.states.push(state);
                    traj.wind.push(wind);
                    traj.decisions.push(d);
                    state = next;
                }
                Ok(traj)
            })
            .collect::<Result<_, DpError>>()?;
        let costs: Vec<f64> = trajectories.iter().map(|t| t.cost).collect();
        let summary = CostSummary::from_costs(&costs);
        Ok(DpSimulation { trajectories, costs, summary })
    }
}

/// Runs the backward recursion on `grid`.
pub fn backward_dp(net: &Network, grid: StateGrid, opts: DpOptions) -> Result<DpOutcome, DpError> {
    Dp::new(net, grid, opts)?.backward()
}

/// Simulates the policy of `table` along `scenarios`.
pub fn simulate_dp_policy(
    net: &Network,
    table: &ValueTable,
    grid: StateGrid,
    initial: &SystemState,
    scenarios: &[WindScenario],
    opts: DpOptions,
) -> Result<DpSimulation, DpError> {
    Dp::new(net, grid, opts)?.simulate(table, initial, scenarios)
}
