use crate::lp::LpSolution;
use crate::network::Network;
use crate::stage::{Cut, StageLayout, SystemState};
use crate::wind::WindModel;

/// Coefficient tolerance for dropping duplicate cuts.
pub const DEDUPE_TOL: f64 = 1e-9;

/// Cuts per period. Duplicates are dropped on insertion; `generated`
/// still counts them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CutPool {
    pub periods: Vec<Vec<Cut>>,
    pub generated: Vec<usize>,
}

impl CutPool {
    pub fn new(horizon: usize) -> Self {
        Self { periods: vec![Vec::new(); horizon], generated: vec![0; horizon] }
    }

    pub fn horizon(&self) -> usize {
        self.periods.len()
    }

    /// Cuts approximating the cost-to-go entering period `t`. Empty past the
    /// horizon.
    pub fn at(&self, t: usize) -> &[Cut] {
        self.periods.get(t).map_or(&[], Vec::as_slice)
    }

    /// Appends `cut` unless an equal one is present. Returns whether it was
    /// kept.
    pub fn add(&mut self, cut: Cut) -> bool {
        let t = cut.t;
        self.generated[t] += 1;
        if self.periods[t].iter().any(|c| c.same_as(&cut, DEDUPE_TOL)) {
            return false;
        }
        self.periods[t].push(cut);
        true
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.periods.iter().map(Vec::len).collect()
    }

    /// Largest cut value at `state`, or `None` without cuts.
    pub fn evaluate(&self, state: &SystemState) -> Option<f64> {
        self.at(state.t).iter().map(|c| c.value_at(state)).reduce(f64::max)
    }
}

/// Solve of one scenario at a sampled state.
#[derive(Clone, Debug)]
pub struct ScenarioSolve {
    pub solution: LpSolution,
    /// Wind realized in the scenario.
    pub wind: Vec<f64>,
    /// Farms whose realized wind is strictly inside `[0, capacity]`.
    pub interior: Vec<bool>,
}

/// Assembles the cut at `state` from its scenario solves.
///
/// Storage slopes scale the storage-row duals by the storage efficiency.
/// Generation slopes take a ramp row's dual only when the ramp term sets
/// that row's right-hand side and the row binds. Wind slopes chain the
/// balance and next-period cut duals through `Phi_1` and the clamp. The
/// intercept makes the cut exact at `state`.
pub fn compute_cut(
    layout: &StageLayout,
    results: &[ScenarioSolve],
    omega: &[f64],
    state: &SystemState,
    net: &Network,
    model: Option<&WindModel>,
    next_cuts: &[Cut],
    feas_tol: f64,
) -> Cut {
    let ns = net.storage_devices.len();
    let ng = net.generators.len();
    let nw = net.wind_farms.len();
    let mut g_s = vec![0.0; ns];
    let mut g_p = vec![0.0; ng];
    let mut g_w = vec![0.0; nw];
    let mut value = 0.0;
    for (r, &w) in results.iter().zip(omega) {
        let sol = &r.solution;
        value += w * sol.objective;
        for j in 0..ns {
            g_s[j] += w * sol.dual(layout.storage[j]);
        }
        for (g, gen) in net.generators.iter().enumerate() {
            let p = sol.value(layout.p[g]);
            let prev = state.p_prev[g];
            let down = prev - gen.ramp_down;
            if down >= gen.p_min && (p - down).abs() <= feas_tol {
                g_p[g] += w * sol.dual(layout.ramp_down[g]);
            }
            let up = prev + gen.ramp_up;
            if up <= gen.p_max && (p - up).abs() <= feas_tol {
                g_p[g] += w * sol.dual(layout.ramp_up[g]);
            }
        }
        if let Some(model) = model {
            let mut dz_dw = vec![0.0; nw];
            for m in 0..nw {
                dz_dw[m] = -sol.dual(layout.balance[layout.wind_bus[m]]);
            }
            for (row, cut) in layout.cuts.iter().zip(next_cuts) {
                let pi = sol.dual(*row);
                if pi != 0.0 {
                    for m in 0..nw {
                        dz_dw[m] += pi * cut.g_w[m];
                    }
                }
            }
            for m in 0..nw {
                if !r.interior[m] {
                    dz_dw[m] = 0.0;
                }
            }
            for (m, v) in model.phi1_transpose(&dz_dw).into_iter().enumerate() {
                g_w[m] += w * v;
            }
        }
    }
    for (j, d) in net.storage_devices.iter().enumerate() {
        g_s[j] *= d.eff_storage;
    }
    let dot = |g: &[f64], x: &[f64]| g.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
    let intercept = value - dot(&g_s, &state.s) - dot(&g_p, &state.p_prev) - dot(&g_w, &state.w_prev);
    Cut { t: state.t, intercept, g_s, g_p, g_w, iteration: 0, sample: 0 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{LpStatus, RowId, VarId};
    use crate::network::{Bus, Cost, Generator, StorageDevice};

    fn device(alpha: f64) -> StorageDevice {
        StorageDevice {
            id: 1,
            bus: 1,
            s_min: 0.0,
            s_max: 10.0,
            delta_max: 5.0,
            eff_charge: 1.0,
            eff_discharge: 1.0,
            eff_storage: alpha,
            variation_cost: 0.0,
        }
    }

    fn net(alpha: f64) -> Network {
        Network {
            buses: vec![Bus { id: 1, is_slack: true, load_profile: vec![1.0] }],
            generators: vec![Generator {
                id: 1,
                bus: 1,
                p_min: 0.0,
                p_max: 100.0,
                ramp_up: 10.0,
                ramp_down: 10.0,
                cost: Cost::Quadratic([0.0, 1.0, 0.0]),
            }],
            lines: vec![],
            storage_devices: vec![device(alpha)],
            wind_farms: vec![],
            penalty_m: 100.0,
            horizon: 1,
        }
    }

    /// Layout with the storage row at 0, the ramp rows at 1 and 2, and `p`
    /// as variable 0.
    fn layout() -> StageLayout {
        StageLayout {
            p: vec![VarId(0)],
            storage: vec![RowId(0)],
            ramp_down: vec![RowId(1)],
            ramp_up: vec![RowId(2)],
            ..StageLayout::default()
        }
    }

    fn result(objective: f64, storage_dual: f64, p: f64, ramp_duals: (f64, f64)) -> ScenarioSolve {
        ScenarioSolve {
            solution: LpSolution {
                status: LpStatus::Optimal,
                objective,
                primal: vec![p],
                duals: vec![storage_dual, ramp_duals.0, ramp_duals.1],
                reduced_costs: vec![0.0],
                iterations: 0,
            },
            wind: vec![],
            interior: vec![],
        }
    }

    #[test]
    fn single_scenario_formula() {
        let state = SystemState { t: 0, s: vec![4.0], p_prev: vec![50.0], w_prev: vec![] };
        let r = [result(100.0, -5.0, 45.0, (0.0, 0.0))];
        let c = compute_cut(&layout(), &r, &[1.0], &state, &net(1.0), None, &[], 1e-7);
        assert_eq!(c.g_s, vec![-5.0]);
        assert_eq!(c.g_p, vec![0.0]);
        assert_eq!(c.intercept, 100.0 + 5.0 * 4.0);
        assert!((c.value_at(&state) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn storage_slope_is_scaled_by_efficiency() {
        let state = SystemState { t: 0, s: vec![4.0], p_prev: vec![50.0], w_prev: vec![] };
        let r = [result(1.0, -4.0, 45.0, (0.0, 0.0)), result(1.0, -6.0, 45.0, (0.0, 0.0))];
        let c = compute_cut(&layout(), &r, &[0.5, 0.5], &state, &net(0.9), None, &[], 1e-7);
        assert!((c.g_s[0] + 4.5).abs() < 1e-12);
    }

    #[test]
    fn ramp_duals_only_when_ramp_term_binds() {
        let state = SystemState { t: 0, s: vec![4.0], p_prev: vec![50.0], w_prev: vec![] };
        // Ramp-down binds at 40.
        let r = [result(1.0, 0.0, 40.0, (3.0, 0.0))];
        let c = compute_cut(&layout(), &r, &[1.0], &state, &net(1.0), None, &[], 1e-7);
        assert_eq!(c.g_p, vec![3.0]);
        // Near p_min the static bound sets the row, so it contributes nothing.
        let low = SystemState { p_prev: vec![5.0], ..state };
        let r = [result(1.0, 0.0, 0.0, (3.0, 0.0))];
        let c = compute_cut(&layout(), &r, &[1.0], &low, &net(1.0), None, &[], 1e-7);
        assert_eq!(c.g_p, vec![0.0]);
    }

    #[test]
    fn pool_drops_duplicates() {
        let mut pool = CutPool::new(2);
        let c = Cut { t: 1, intercept: 1.0, g_s: vec![1.0], g_p: vec![], g_w: vec![], iteration: 1, sample: 0 };
        assert!(pool.add(c.clone()));
        assert!(!pool.add(Cut { intercept: 1.0 + 1e-12, ..c.clone() }));
        assert!(pool.add(Cut { intercept: 2.0, ..c }));
        assert_eq!((pool.sizes(), pool.generated.clone()), (vec![0, 2], vec![0, 3]));
    }
}
