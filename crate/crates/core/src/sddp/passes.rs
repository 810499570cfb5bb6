use rand::Rng;
use rayon::prelude::*;

use super::{BoundEstimate, CutPool, Sddp, SddpError, ScenarioSolve, SALT_FORWARD};
use crate::lp::{solve_with_basis, LpSolution, WarmStart};
use crate::stage::{build_stage_lp, extract_decision, Cut, StageDecision, StageLp, SystemState};
use crate::sddp::compute_cut;
use crate::wind::{path_rng, WindScenario};

/// One simulated path through the horizon.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// State entering each period.
    pub states: Vec<SystemState>,
    /// Realized wind per period.
    pub wind: Vec<Vec<f64>>,
    pub decisions: Vec<StageDecision>,
    /// Sum of immediate costs.
    pub cost: f64,
}

struct Template {
    lp: StageLp,
    warm: Option<WarmStart>,
}

impl<'a> Sddp<'a> {
    fn fail(t: usize, i: usize, j: usize) -> impl Fn(crate::stage::StageError) -> SddpError {
        move |source| SddpError::SolveFailed { t, i, j, source }
    }

    fn template(&self, pool: &CutPool, state: &SystemState, wind: &[f64]) -> Result<Template, SddpError> {
        let t = state.t;
        let fc = self.future(pool, t);
        let lp = build_stage_lp(self.net, state, wind, &fc, &self.grid).map_err(Self::fail(t, 0, 0))?;
        let (sol, warm) = solve_with_basis(&lp.problem, &self.cfg.tol)
            .map_err(|e| Self::fail(t, 0, 0)(e.into()))?;
        self.count_solves(1);
        if !sol.is_optimal() {
            return Err(Self::fail(t, 0, 0)(crate::stage::StageError::NotOptimal(sol.status)));
        }
        Ok(Template { lp, warm })
    }

    fn solve_at(
        &self,
        tpl: &Template,
        lp: &mut StageLp,
        state: &SystemState,
        wind: &[f64],
    ) -> Result<LpSolution, crate::stage::StageError> {
        lp.set_state(self.net, state, wind)?;
        let sol = lp.solve(tpl.warm.as_ref(), &self.cfg.tol)?;
        self.count_solves(1);
        Ok(sol)
    }

    /// Solves every innovation of period `state.t` at `state` and returns
    /// the scenario results in innovation order.
    fn scenario_solves(
        &self,
        tpl: &Template,
        state: &SystemState,
        i: usize,
    ) -> Result<Vec<ScenarioSolve>, SddpError> {
        let t = state.t;
        let mut lp = tpl.lp.clone();
        self.innovations[t]
            .iter()
            .enumerate()
            .map(|(j, eps)| {
                let (wind, interior) = self.model.step_lag1(&state.w_prev, eps);
                let solution = self.solve_at(tpl, &mut lp, state, &wind).map_err(Self::fail(t, i, j))?;
                Ok(ScenarioSolve { solution, wind, interior })
            })
            .collect()
    }

    /// Cut at `state` against the current pool. Its value at `state` is the
    /// sampled expected stage value.
    pub fn cut_at(&self, pool: &CutPool, state: &SystemState) -> Result<Cut, SddpError> {
        let (w0, _) = self.model.step_lag1(&state.w_prev, &self.innovations[state.t][0]);
        let tpl = self.template(pool, state, &w0)?;
        let results = self.scenario_solves(&tpl, state, 0)?;
        Ok(compute_cut(
            &tpl.lp.layout,
            &results,
            &self.omega,
            state,
            self.net,
            Some(self.model),
            pool.at(state.t + 1),
            self.cfg.tol.feas,
        ))
    }

    /// Sampled expected stage value at `state`, `sum_j omega_j F_j`.
    pub fn expected_value(&self, pool: &CutPool, state: &SystemState) -> Result<f64, SddpError> {
        Ok(self.cut_at(pool, state)?.value_at(state))
    }

    /// Adds one cut per sampled state, from the last period backwards.
    pub fn backward_pass(
        &self,
        pool: &mut CutPool,
        samples: &[Vec<SystemState>],
        iteration: usize,
    ) -> Result<(), SddpError> {
        for t in (0..self.horizon()).rev() {
            let states = &samples[t];
            if states.is_empty() {
                return Err(SddpError::Config(format!("no sampled states for period {}", t + 1)));
            }
            let (w0, _) = self.model.step_lag1(&states[0].w_prev, &self.innovations[t][0]);
            let tpl = self.template(pool, &states[0], &w0)?;
            let results: Vec<Result<Vec<ScenarioSolve>, SddpError>> = states
                .par_iter()
                .enumerate()
                .map(|(i, st)| self.scenario_solves(&tpl, st, i))
                .collect();
            let next = pool.at(t + 1).to_vec();
            let mut cuts = Vec::with_capacity(states.len());
            for (i, r) in results.into_iter().enumerate() {
                let r = r?;
                let mut cut = compute_cut(
                    &tpl.lp.layout,
                    &r,
                    &self.omega,
                    &states[i],
                    self.net,
                    Some(self.model),
                    &next,
                    self.cfg.tol.feas,
                );
                cut.iteration = iteration;
                cut.sample = i;
                cuts.push(cut);
            }
            for c in cuts {
                pool.add(c);
            }
        }
        Ok(())
    }

    fn templates(&self, pool: &CutPool) -> Result<Vec<Template>, SddpError> {
        let w = self.initial.w_prev.clone();
        (0..self.horizon())
            .map(|t| {
                let state = SystemState { t, ..self.initial.clone() };
                self.template(pool, &state, &w)
            })
            .collect()
    }

    /// Exact average of the first-period value over its innovation set.
    pub fn lower_bound(&self, pool: &CutPool) -> Result<f64, SddpError> {
        let w = self.initial.w_prev.clone();
        let tpl = self.template(pool, &SystemState { t: 0, ..self.initial.clone() }, &w)?;
        let results = self.scenario_solves(&tpl, &SystemState { t: 0, ..self.initial.clone() }, 0)?;
        Ok(results.iter().zip(&self.omega).map(|(r, w)| w * r.solution.objective).sum())
    }

    fn run_path(
        &self,
        tpls: &[Template],
        path: usize,
        mut wind_at: impl FnMut(&SystemState) -> Vec<f64>,
    ) -> Result<Trajectory, SddpError> {
        let mut state = SystemState { t: 0, ..self.initial.clone() };
        let mut traj = Trajectory { states: vec![], wind: vec![], decisions: vec![], cost: 0.0 };
        for (t, tpl) in tpls.iter().enumerate() {
            let wind = wind_at(&state);
            let mut lp = tpl.lp.clone();
            let sol = self.solve_at(tpl, &mut lp, &state, &wind).map_err(Self::fail(t, path, 0))?;
            let d = extract_decision(self.net, &state, &wind, &lp, &sol).map_err(Self::fail(t, path, 0))?;
            traj.cost += d.cost;
            let next = d.next.clone();
            traj.states.push(state);
            traj.wind.push(wind);
            traj.decisions.push(d);
            state = next;
        }
        Ok(traj)
    }

    /// Simulates `L` paths under the current policy, sampling innovations
    /// from each period's set, and estimates the bounds.
    pub fn forward_pass(
        &self,
        pool: &CutPool,
        iteration: usize,
    ) -> Result<(Vec<Trajectory>, BoundEstimate), SddpError> {
        let tpls = self.templates(pool)?;
        let l = self.cfg.forward_samples;
        let paths: Result<Vec<Trajectory>, SddpError> = (0..l)
            .into_par_iter()
            .map(|path| {
                let stream = (iteration as u64) * (l as u64) + path as u64;
                let mut rng = path_rng(self.cfg.seed ^ SALT_FORWARD, stream);
                self.run_path(&tpls, path, |st| {
                    let xi = &self.innovations[st.t];
                    let eps = &xi[rng.random_range(0..xi.len())];
                    self.model.step_lag1(&st.w_prev, eps).0
                })
            })
            .collect();
        let paths = paths?;
        let lower = self.lower_bound(pool)?;
        let costs: Vec<f64> = paths.iter().map(|p| p.cost).collect();
        Ok((paths, BoundEstimate::from_costs(lower, &costs, self.cfg.alpha)))
    }

    /// Policy simulation along given wind scenarios.
    pub fn simulate_policy(
        &self,
        pool: &CutPool,
        scenarios: &[WindScenario],
    ) -> Result<Vec<Trajectory>, SddpError> {
        let tpls = self.templates(pool)?;
        scenarios
            .par_iter()
            .enumerate()
            .map(|(k, sc)| self.run_path(&tpls, k, |st| sc.values[st.t].clone()))
            .collect()
    }
}
