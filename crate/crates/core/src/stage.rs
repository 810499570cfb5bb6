//! One period's dispatch LP.
//!
//! Variable blocks, in order: generation `p`, GLP weights `beta`, storage
//! (`s_next`, `charge`, `discharge`, `gamma` per device), line flows `e`,
//! bus angles `theta`, imbalance slacks `kappa_plus`/`kappa_minus` per bus,
//! then the future-cost block (`rho` for cuts, `lambda` for a value table).
//!
//! The balance row at bus `n` reads
//! `sum p + sum_in e - sum_out e - gamma + kappa_minus - kappa_plus = D - w`,
//! so `kappa_minus` is unserved load and `kappa_plus` is spilled surplus.
//! The builder keeps a [`StageLayout`] so callers can move the state and the
//! wind realization by editing right-hand sides only.

use thiserror::Error;

use crate::lp::{
    solve, solve_warm, LpError, LpProblem, LpSolution, LpStatus, RowId, Sense, Tolerances, VarId,
    WarmStart,
};
use crate::network::{bus_incidence, Cost, Generator, Network};

/// Default GLP breakpoints per generator.
pub const DEFAULT_BREAKPOINTS: usize = 11;
/// Largest tolerated `min(charge, discharge)` in MWh.
pub const SIMUL_TOL: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum StageError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("storage {device} charges {charge} and discharges {discharge} in the same period")]
    SimultaneousChargeDischarge { device: usize, charge: f64, discharge: f64 },
    #[error("stage LP is {0:?}")]
    NotOptimal(LpStatus),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// SDP state entering period `t` (0-based).
#[derive(Clone, Debug, PartialEq)]
pub struct SystemState {
    pub t: usize,
    pub s: Vec<f64>,
    pub p_prev: Vec<f64>,
    pub w_prev: Vec<f64>,
}

impl SystemState {
    /// Everything at its lower bound and wind at `w_prev`.
    pub fn at_minimum(net: &Network, w_prev: Vec<f64>) -> Self {
        Self {
            t: 0,
            s: net.storage_devices.iter().map(|d| d.s_min).collect(),
            p_prev: net.generators.iter().map(|g| g.p_min).collect(),
            w_prev,
        }
    }

    pub fn check(&self, net: &Network) -> Result<(), StageError> {
        let dims = (self.s.len(), self.p_prev.len(), self.w_prev.len());
        let want = (net.storage_devices.len(), net.generators.len(), net.wind_farms.len());
        if dims != want {
            return Err(StageError::DimensionMismatch(format!("state sizes {dims:?}, network {want:?}")));
        }
        Ok(())
    }
}

/// Per-generator `(p, cost)` breakpoints, increasing in `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct BreakpointGrid {
    pub points: Vec<Vec<(f64, f64)>>,
}

/// `count` uniformly spaced points on `[p_min, p_max]` with exact costs. An
/// explicit breakpoint cost keeps its own points inside the range (plus the
/// interpolated endpoints) and ignores `count`.
pub fn build_breakpoints(g: &Generator, count: usize) -> Vec<(f64, f64)> {
    let count = count.max(2);
    match &g.cost {
        Cost::Quadratic(_) => {
            if g.p_max == g.p_min {
                return vec![(g.p_min, g.cost.eval(g.p_min)); 2];
            }
            (0..count)
                .map(|k| {
                    let p = if k == count - 1 {
                        g.p_max
                    } else {
                        g.p_min + (g.p_max - g.p_min) * k as f64 / (count - 1) as f64
                    };
                    (p, g.cost.eval(p))
                })
                .collect()
        }
        Cost::Breakpoints(list) => {
            let mut pts = vec![(g.p_min, g.cost.eval(g.p_min))];
            pts.extend(list.iter().filter(|q| q[0] > g.p_min && q[0] < g.p_max).map(|q| (q[0], q[1])));
            pts.push((g.p_max, g.cost.eval(g.p_max)));
            pts
        }
    }
}

impl BreakpointGrid {
    pub fn uniform(net: &Network, count: usize) -> Self {
        Self { points: net.generators.iter().map(|g| build_breakpoints(g, count)).collect() }
    }

    /// Halves every segment, keeping the current points.
    pub fn refined(&self, net: &Network) -> Self {
        let points = self
            .points
            .iter()
            .zip(&net.generators)
            .map(|(pts, g)| {
                let mut out = Vec::with_capacity(2 * pts.len());
                for w in pts.windows(2) {
                    out.push(w[0]);
                    let mid = 0.5 * (w[0].0 + w[1].0);
                    out.push((mid, g.cost.eval(mid)));
                }
                out.extend(pts.last().copied());
                out
            })
            .collect();
        Self { points }
    }

    /// GLP cost of output `p` for generator `g`: the piecewise-linear
    /// interpolant through the breakpoints.
    pub fn cost(&self, g: usize, p: f64) -> f64 {
        let pts: Vec<[f64; 2]> = self.points[g].iter().map(|&(a, b)| [a, b]).collect();
        Cost::Breakpoints(pts).eval(p)
    }

    /// Smallest breakpoint cost summed over generators.
    pub fn min_total_cost(&self) -> f64 {
        self.points.iter().map(|pts| pts.iter().map(|q| q.1).fold(f64::INFINITY, f64::min)).sum()
    }
}

/// Weights and rows of one convexified variable.
#[derive(Clone, Debug, PartialEq)]
pub struct GlpTerm {
    pub beta: Vec<VarId>,
    pub link: RowId,
    pub sum: RowId,
}

/// Replaces the cost of `x` by the convex hull of `points`: adds weights
/// `beta_k >= 0` costing `points[k].1`, `x = sum beta_k points[k].0` and
/// `sum beta_k = 1`. The points may come in any order.
pub fn add_glp_term(lp: &mut LpProblem, name: &str, x: VarId, points: &[(f64, f64)]) -> GlpTerm {
    let beta: Vec<VarId> =
        points.iter().enumerate().map(|(k, &(_, c))| lp.add_var(format!("beta_{name}_{k}"), 0.0, f64::INFINITY, c)).collect();
    let mut row = vec![(x, 1.0)];
    row.extend(beta.iter().zip(points).map(|(&v, &(p, _))| (v, -p)));
    let link = lp.add_row(format!("glp_{name}"), row, Sense::Eq, 0.0);
    let sum = lp.add_row(format!("glp_sum_{name}"), beta.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, 1.0);
    GlpTerm { beta, link, sum }
}

/// Supporting hyperplane of the expected cost-to-go entering period `t`:
/// `intercept + g_s.s + g_p.p_prev + g_w.w_prev`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub t: usize,
    pub intercept: f64,
    pub g_s: Vec<f64>,
    pub g_p: Vec<f64>,
    pub g_w: Vec<f64>,
    pub iteration: usize,
    pub sample: usize,
}

impl Cut {
    pub fn value(&self, s: &[f64], p: &[f64], w: &[f64]) -> f64 {
        let dot = |g: &[f64], x: &[f64]| g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        self.intercept + dot(&self.g_s, s) + dot(&self.g_p, p) + dot(&self.g_w, w)
    }

    pub fn value_at(&self, state: &SystemState) -> f64 {
        self.value(&state.s, &state.p_prev, &state.w_prev)
    }

    /// All coefficients within `tol` of `other`'s.
    pub fn same_as(&self, other: &Cut, tol: f64) -> bool {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol);
        (self.intercept - other.intercept).abs() <= tol
            && close(&self.g_s, &other.g_s)
            && close(&self.g_p, &other.g_p)
            && close(&self.g_w, &other.g_w)
    }
}

/// Value-table future cost: convex combinations of grid nodes over the
/// interpolated storage and generation coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct TableFuture {
    /// Devices whose `s_next` is interpolated.
    pub storage_dims: Vec<usize>,
    /// Generators whose `p` is interpolated.
    pub gen_dims: Vec<usize>,
    /// Node coordinates, `storage_dims` first then `gen_dims`.
    pub nodes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub enum FutureCost<'a> {
    /// Terminal period without salvage.
    None,
    /// Terminal credit in $/MWh on each device's final level.
    Salvage(&'a [f64]),
    /// Cut pool of the next period with a lower bound on `rho`.
    Cuts { cuts: &'a [Cut], lower: f64 },
    Table(&'a TableFuture),
}

/// Indices of every variable and row block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StageLayout {
    pub p: Vec<VarId>,
    pub beta: Vec<Vec<VarId>>,
    pub s_next: Vec<VarId>,
    pub charge: Vec<VarId>,
    pub discharge: Vec<VarId>,
    pub gamma: Vec<VarId>,
    pub flow: Vec<VarId>,
    pub theta: Vec<VarId>,
    pub kappa_plus: Vec<VarId>,
    pub kappa_minus: Vec<VarId>,
    pub rho: Option<VarId>,
    pub lambda: Vec<VarId>,
    pub balance: Vec<RowId>,
    pub ramp_down: Vec<RowId>,
    pub ramp_up: Vec<RowId>,
    pub flow_def: Vec<RowId>,
    pub storage: Vec<RowId>,
    pub gamma_def: Vec<RowId>,
    pub glp_p: Vec<RowId>,
    pub glp_sum: Vec<RowId>,
    pub cuts: Vec<RowId>,
    /// Bus position of each wind farm.
    pub wind_bus: Vec<usize>,
}

/// A stage LP together with the coefficients needed to re-target it.
#[derive(Clone, Debug)]
pub struct StageLp {
    pub problem: LpProblem,
    pub layout: StageLayout,
    /// `g_w` of each cut row, for the right-hand side `c + g_w.w`.
    cut_gw: Vec<(f64, Vec<f64>)>,
}

/// Stage decision recovered from an optimal solve.
#[derive(Clone, Debug, PartialEq)]
pub struct StageDecision {
    pub p: Vec<f64>,
    pub charge: Vec<f64>,
    pub discharge: Vec<f64>,
    pub gamma: Vec<f64>,
    pub flows: Vec<f64>,
    pub angles: Vec<f64>,
    pub kappa_plus: Vec<f64>,
    pub kappa_minus: Vec<f64>,
    /// Immediate cost `h_t`: generation, storage variation, imbalance
    /// penalties and any terminal salvage credit.
    pub cost: f64,
    /// Future-cost term of the optimum (`rho` or the table interpolation).
    pub future: f64,
    pub next: SystemState,
}

/// Lower bound on the cost-to-go after period `t` of `horizon`.
pub fn rho_lower_bound(grid: &BreakpointGrid, t: usize, horizon: usize) -> f64 {
    let remaining = horizon.saturating_sub(t + 1) as f64;
    (remaining * grid.min_total_cost()).min(0.0)
}

/// Ramp-tightened `[lower, upper]` generation range given `p_prev`.
pub fn ramp_bounds(g: &Generator, p_prev: f64) -> (f64, f64) {
    let lo = (p_prev - g.ramp_down).max(g.p_min);
    let hi = (p_prev + g.ramp_up).min(g.p_max);
    (lo, hi)
}

/// Builds the period-`state.t` LP for wind realization `wind`.
pub fn build_stage_lp(
    net: &Network,
    state: &SystemState,
    wind: &[f64],
    future: &FutureCost,
    grid: &BreakpointGrid,
) -> Result<StageLp, StageError> {
    state.check(net)?;
    if wind.len() != net.wind_farms.len() {
        return Err(StageError::DimensionMismatch(format!(
            "{} wind values for {} farms",
            wind.len(),
            net.wind_farms.len()
        )));
    }
    if grid.points.len() != net.generators.len() {
        return Err(StageError::DimensionMismatch("breakpoint grid size".into()));
    }
    let inf = f64::INFINITY;
    let mut lp = LpProblem::new();
    let mut lay = StageLayout::default();
    let bus_of = |id: usize| net.bus_index(id).expect("validated network");

    for g in &net.generators {
        lay.p.push(lp.add_var(format!("p_{}", g.id), -inf, inf, 0.0));
    }
    for (g, pts) in net.generators.iter().zip(&grid.points) {
        let b = pts
            .iter()
            .enumerate()
            .map(|(k, &(_, c))| lp.add_var(format!("beta_{}_{}", g.id, k), 0.0, inf, c))
            .collect();
        lay.beta.push(b);
    }
    for d in &net.storage_devices {
        lay.s_next.push(lp.add_var(format!("s_next_{}", d.id), d.s_min, d.s_max, 0.0));
        lay.charge.push(lp.add_var(format!("charge_{}", d.id), 0.0, d.delta_max, d.variation_cost));
        lay.discharge.push(lp.add_var(format!("discharge_{}", d.id), 0.0, d.delta_max, d.variation_cost));
        lay.gamma.push(lp.add_var(format!("gamma_{}", d.id), -inf, inf, 0.0));
    }
    for l in &net.lines {
        lay.flow.push(lp.add_var(format!("e_{}", l.id), -l.flow_limit, l.flow_limit, 0.0));
    }
    for b in &net.buses {
        let (lo, hi) = if b.is_slack { (0.0, 0.0) } else { (-inf, inf) };
        lay.theta.push(lp.add_var(format!("theta_{}", b.id), lo, hi, 0.0));
    }
    for b in &net.buses {
        lay.kappa_plus.push(lp.add_var(format!("kappa_plus_{}", b.id), 0.0, inf, net.penalty_m));
        lay.kappa_minus.push(lp.add_var(format!("kappa_minus_{}", b.id), 0.0, inf, net.penalty_m));
    }
    match future {
        FutureCost::None => {}
        FutureCost::Salvage(credit) => {
            for (k, &c) in credit.iter().enumerate().take(lay.s_next.len()) {
                lp.set_cost(lay.s_next[k], -c);
            }
        }
        FutureCost::Cuts { lower, .. } => {
            lay.rho = Some(lp.add_var("rho", *lower, inf, 1.0));
        }
        FutureCost::Table(table) => {
            lay.lambda = table
                .values
                .iter()
                .enumerate()
                .map(|(k, &v)| lp.add_var(format!("lambda_{k}"), 0.0, inf, v))
                .collect();
        }
    }

    let inc = bus_incidence(net);
    for (n, b) in net.buses.iter().enumerate() {
        let mut row = Vec::new();
        for (g, gen) in net.generators.iter().enumerate() {
            if bus_of(gen.bus) == n {
                row.push((lay.p[g], 1.0));
            }
        }
        for &l in &inc.entering[n] {
            row.push((lay.flow[l], 1.0));
        }
        for &l in &inc.leaving[n] {
            row.push((lay.flow[l], -1.0));
        }
        for (j, d) in net.storage_devices.iter().enumerate() {
            if bus_of(d.bus) == n {
                row.push((lay.gamma[j], -1.0));
            }
        }
        row.push((lay.kappa_minus[n], 1.0));
        row.push((lay.kappa_plus[n], -1.0));
        lay.balance.push(lp.add_row(format!("balance_{}", b.id), row, Sense::Eq, 0.0));
    }
    for (g, gen) in net.generators.iter().enumerate() {
        lay.ramp_down.push(lp.add_row(format!("ramp_down_{}", gen.id), vec![(lay.p[g], 1.0)], Sense::Ge, 0.0));
        lay.ramp_up.push(lp.add_row(format!("ramp_up_{}", gen.id), vec![(lay.p[g], 1.0)], Sense::Le, 0.0));
    }
    for (k, l) in net.lines.iter().enumerate() {
        let (a, b) = (bus_of(l.from_bus), bus_of(l.to_bus));
        let row = vec![(lay.flow[k], 1.0), (lay.theta[a], -l.susceptance), (lay.theta[b], l.susceptance)];
        lay.flow_def.push(lp.add_row(format!("flow_{}", l.id), row, Sense::Eq, 0.0));
    }
    for (j, d) in net.storage_devices.iter().enumerate() {
        let row = vec![(lay.s_next[j], 1.0), (lay.charge[j], -1.0), (lay.discharge[j], 1.0)];
        lay.storage.push(lp.add_row(format!("storage_{}", d.id), row, Sense::Eq, 0.0));
        let row = vec![
            (lay.gamma[j], 1.0),
            (lay.charge[j], -1.0 / d.eff_charge),
            (lay.discharge[j], d.eff_discharge),
        ];
        lay.gamma_def.push(lp.add_row(format!("gamma_{}", d.id), row, Sense::Eq, 0.0));
    }
    for (g, gen) in net.generators.iter().enumerate() {
        let mut row = vec![(lay.p[g], 1.0)];
        row.extend(lay.beta[g].iter().zip(&grid.points[g]).map(|(&v, &(p, _))| (v, -p)));
        lay.glp_p.push(lp.add_row(format!("glp_p_{}", gen.id), row, Sense::Eq, 0.0));
        let row = lay.beta[g].iter().map(|&v| (v, 1.0)).collect();
        lay.glp_sum.push(lp.add_row(format!("glp_sum_{}", gen.id), row, Sense::Eq, 1.0));
    }
    let mut cut_gw = Vec::new();
    match future {
        FutureCost::Cuts { cuts, .. } => {
            let rho = lay.rho.expect("rho exists with cuts");
            for (k, c) in cuts.iter().enumerate() {
                let mut row = vec![(rho, 1.0)];
                row.extend(lay.s_next.iter().zip(&c.g_s).map(|(&v, &g)| (v, -g)));
                row.extend(lay.p.iter().zip(&c.g_p).map(|(&v, &g)| (v, -g)));
                lay.cuts.push(lp.add_row(format!("cut_{k}"), row, Sense::Ge, 0.0));
                cut_gw.push((c.intercept, c.g_w.clone()));
            }
        }
        FutureCost::Table(table) => {
            let row = lay.lambda.iter().map(|&v| (v, 1.0)).collect();
            lp.add_row("lambda_sum", row, Sense::Eq, 1.0);
            let coords = table.storage_dims.iter().map(|&j| (lay.s_next[j], format!("lambda_s_{}", net.storage_devices[j].id)));
            let coords: Vec<_> = coords
                .chain(table.gen_dims.iter().map(|&g| (lay.p[g], format!("lambda_p_{}", net.generators[g].id))))
                .collect();
            for (c, (var, name)) in coords.into_iter().enumerate() {
                let mut row: Vec<(VarId, f64)> =
                    lay.lambda.iter().zip(&table.nodes).map(|(&v, node)| (v, node[c])).collect();
                row.push((var, -1.0));
                lp.add_row(name, row, Sense::Eq, 0.0);
            }
        }
        _ => {}
    }
    lay.wind_bus = net.wind_farms.iter().map(|w| bus_of(w.bus)).collect();

    let mut stage = StageLp { problem: lp, layout: lay, cut_gw };
    stage.set_state(net, state, wind)?;
    Ok(stage)
}

impl StageLp {
    /// Moves the LP to a new state and wind realization.
    pub fn set_state(&mut self, net: &Network, state: &SystemState, wind: &[f64]) -> Result<(), StageError> {
        state.check(net)?;
        if wind.len() != net.wind_farms.len() {
            return Err(StageError::DimensionMismatch("wind vector size".into()));
        }
        let t = state.t;
        let lay = &self.layout;
        for n in 0..net.buses.len() {
            self.problem.set_rhs(lay.balance[n], net.demand(n, t));
        }
        for (m, &n) in lay.wind_bus.iter().enumerate() {
            let rhs = self.problem.row(lay.balance[n]).rhs - wind[m];
            self.problem.set_rhs(lay.balance[n], rhs);
        }
        for (g, gen) in net.generators.iter().enumerate() {
            let (lo, hi) = ramp_bounds(gen, state.p_prev[g]);
            self.problem.set_rhs(lay.ramp_down[g], lo);
            self.problem.set_rhs(lay.ramp_up[g], hi.max(lo));
        }
        for (j, d) in net.storage_devices.iter().enumerate() {
            self.problem.set_rhs(lay.storage[j], d.eff_storage * state.s[j]);
        }
        for (k, (c, gw)) in self.cut_gw.iter().enumerate() {
            let rhs = c + gw.iter().zip(wind).map(|(a, b)| a * b).sum::<f64>();
            self.problem.set_rhs(lay.cuts[k], rhs);
        }
        Ok(())
    }

    /// Solves, warm-starting from `warm` when given.
    pub fn solve(&self, warm: Option<&WarmStart>, tol: &Tolerances) -> Result<LpSolution, StageError> {
        let sol = match warm {
            Some(ws) => solve_warm(&self.problem, ws, tol)?,
            None => solve(&self.problem, tol)?,
        };
        if !sol.is_optimal() {
            return Err(StageError::NotOptimal(sol.status));
        }
        Ok(sol)
    }

    /// Objective contribution of the future-cost block at `sol`.
    pub fn future_value(&self, sol: &LpSolution) -> f64 {
        let lay = &self.layout;
        let rho = lay.rho.map_or(0.0, |v| sol.value(v));
        let lambda: f64 = lay.lambda.iter().map(|&v| sol.value(v) * self.problem.var(v).cost).sum();
        rho + lambda
    }
}

/// Typed decision at an optimal `sol`. The next state's storage follows the
/// storage rows and is clamped to the device bounds against round-off.
pub fn extract_decision(
    net: &Network,
    state: &SystemState,
    wind: &[f64],
    stage: &StageLp,
    sol: &LpSolution,
) -> Result<StageDecision, StageError> {
    if !sol.is_optimal() {
        return Err(StageError::NotOptimal(sol.status));
    }
    let lay = &stage.layout;
    let vals = |ids: &[VarId]| ids.iter().map(|&v| sol.value(v)).collect::<Vec<f64>>();
    let mut charge = vals(&lay.charge);
    let mut discharge = vals(&lay.discharge);
    for (j, d) in net.storage_devices.iter().enumerate() {
        let overlap = charge[j].min(discharge[j]);
        if overlap > SIMUL_TOL {
            let lossless = d.eff_charge == 1.0 && d.eff_discharge == 1.0 && d.variation_cost == 0.0;
            if !lossless {
                return Err(StageError::SimultaneousChargeDischarge {
                    device: d.id,
                    charge: charge[j],
                    discharge: discharge[j],
                });
            }
            // A lossless device is indifferent to the split; report the net.
            charge[j] -= overlap;
            discharge[j] -= overlap;
        }
    }
    let p: Vec<f64> = vals(&lay.p);
    let s_next: Vec<f64> = net
        .storage_devices
        .iter()
        .enumerate()
        .map(|(j, d)| (d.eff_storage * state.s[j] + charge[j] - discharge[j]).clamp(d.s_min, d.s_max))
        .collect();
    let future = stage.future_value(sol);
    let next = SystemState {
        t: state.t + 1,
        s: s_next,
        p_prev: p.iter().zip(&net.generators).map(|(&v, g)| v.clamp(g.p_min, g.p_max)).collect(),
        w_prev: wind.to_vec(),
    };
    Ok(StageDecision {
        p,
        charge,
        discharge,
        gamma: vals(&lay.gamma),
        flows: vals(&lay.flow),
        angles: vals(&lay.theta),
        kappa_plus: vals(&lay.kappa_plus),
        kappa_minus: vals(&lay.kappa_minus),
        cost: sol.objective - future,
        future,
        next,
    })
}
