//! Stochastic dual dynamic programming over the stage LPs.
//!
//! Each iteration runs a backward pass, which adds one cut per sampled state
//! and period, then a forward pass that re-estimates the bounds. Every
//! period has a fixed innovation set shared by all passes: the model's
//! `noise_support` when it has one, otherwise `J` seeded Gaussian draws.
//! The lower bound averages the first-period value over that set.

mod bounds;
mod cut;
mod passes;

pub use bounds::{z_quantile, BoundEstimate};
pub use cut::{compute_cut, CutPool, ScenarioSolve, DEDUPE_TOL};
pub use passes::Trajectory;

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::Tolerances;
use crate::network::Network;
use crate::stage::{rho_lower_bound, BreakpointGrid, FutureCost, StageError, SystemState, DEFAULT_BREAKPOINTS};
use crate::wind::{path_rng, WindModel};

const SALT_NOISE: u64 = 0x6e6f_6973_6531;
const SALT_SAMPLE: u64 = 0x7361_6d70_6c65;
const SALT_FORWARD: u64 = 0x666f_7277_6172;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StopRule {
    /// Stop once the lower bound lies in the upper bound's interval.
    Ci,
    /// Run exactly `max_iters` iterations.
    Fixed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SddpConfig {
    /// `I`: states sampled per period in the backward pass.
    pub backward_samples: usize,
    /// `J`: innovations per period, ignored with a discrete noise support.
    pub scenarios: usize,
    /// `L`: forward paths per iteration.
    pub forward_samples: usize,
    pub max_iters: usize,
    pub alpha: f64,
    pub stop_rule: StopRule,
    pub seed: u64,
    pub breakpoints: usize,
    /// Terminal credit per device in $/MWh; empty for none.
    pub salvage: Vec<f64>,
    pub tol: Tolerances,
}

impl Default for SddpConfig {
    fn default() -> Self {
        Self {
            backward_samples: 25,
            scenarios: 25,
            forward_samples: 25,
            max_iters: 10,
            alpha: 0.05,
            stop_rule: StopRule::Fixed,
            seed: 0,
            breakpoints: DEFAULT_BREAKPOINTS,
            salvage: Vec::new(),
            tol: Tolerances::default(),
        }
    }
}

/// Result of a run.
#[derive(Clone, Debug)]
pub struct SddpOutcome {
    pub pool: CutPool,
    pub history: Vec<BoundEstimate>,
    /// Forward paths of the last iteration.
    pub trajectories: Vec<Trajectory>,
    pub iterations: usize,
    pub converged: bool,
    pub lp_solves: usize,
    /// Cuts generated per period in each iteration, before de-duplication.
    pub cuts_generated: Vec<Vec<usize>>,
}

impl SddpOutcome {
    pub fn last_bounds(&self) -> Option<&BoundEstimate> {
        self.history.last()
    }
}

#[derive(Debug, Error)]
pub enum SddpError {
    #[error("period {t}, sample {i}, scenario {j}: {source}")]
    SolveFailed { t: usize, i: usize, j: usize, source: StageError },
    #[error("configuration: {0}")]
    Config(String),
    #[error("stopping rule not met after {} iterations", .0.iterations)]
    MaxItersExceeded(Box<SddpOutcome>),
}

/// Problem data plus the fixed sampling plan of one run.
pub struct Sddp<'a> {
    pub net: &'a Network,
    pub model: &'a WindModel,
    pub grid: BreakpointGrid,
    pub cfg: SddpConfig,
    pub initial: SystemState,
    innovations: Vec<Vec<Vec<f64>>>,
    omega: Vec<f64>,
    solves: AtomicUsize,
}

impl<'a> Sddp<'a> {
    pub fn new(net: &'a Network, model: &'a WindModel, cfg: SddpConfig) -> Result<Self, SddpError> {
        let bad = |m: &str| Err(SddpError::Config(m.to_string()));
        if model.p != 1 {
            return bad("SDDP needs a lag-1 wind model");
        }
        if model.farms() != net.wind_farms.len() {
            return bad("wind model and network disagree on the number of farms");
        }
        if cfg.backward_samples == 0 || cfg.scenarios == 0 || cfg.forward_samples == 0 || cfg.max_iters == 0 {
            return bad("sample counts and max_iters must be at least 1");
        }
        if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if net.horizon == 0 {
            return bad("horizon must be at least 1");
        }
        net.ensure_valid().map_err(|e| SddpError::Config(e.to_string()))?;
        let grid = BreakpointGrid::uniform(net, cfg.breakpoints);
        let innovations: Vec<Vec<Vec<f64>>> = (0..net.horizon)
            .map(|t| match &model.noise_support {
                Some(sup) => sup.clone(),
                None => {
                    let mut rng = path_rng(cfg.seed ^ SALT_NOISE, t as u64);
                    (0..cfg.scenarios).map(|_| model.draw_noise(&mut rng)).collect()
                }
            })
            .collect();
        let j = innovations[0].len();
        let initial = SystemState::at_minimum(net, model.initial.clone());
        Ok(Self {
            net,
            model,
            grid,
            cfg,
            initial,
            innovations,
            omega: vec![1.0 / j as f64; j],
            solves: AtomicUsize::new(0),
        })
    }

    pub fn with_initial(mut self, initial: SystemState) -> Self {
        self.initial = initial;
        self
    }

    pub fn horizon(&self) -> usize {
        self.net.horizon
    }

    /// Innovation vectors of period `t`.
    pub fn innovations(&self, t: usize) -> &[Vec<f64>] {
        &self.innovations[t]
    }

    pub fn scenario_weights(&self) -> &[f64] {
        &self.omega
    }

    pub fn lp_solves(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    fn count_solves(&self, n: usize) {
        self.solves.fetch_add(n, Ordering::Relaxed);
    }

    /// Future cost of the period-`t` LP given the pool.
    pub fn future<'p>(&'p self, pool: &'p CutPool, t: usize) -> FutureCost<'p> {
        if t + 1 >= self.horizon() {
            if self.cfg.salvage.is_empty() {
                FutureCost::None
            } else {
                FutureCost::Salvage(&self.cfg.salvage)
            }
        } else {
            let salvage: f64 = self
                .cfg
                .salvage
                .iter()
                .zip(&self.net.storage_devices)
                .map(|(c, d)| c * d.s_max)
                .sum();
            let lower = rho_lower_bound(&self.grid, t, self.horizon()) - salvage.max(0.0);
            FutureCost::Cuts { cuts: pool.at(t + 1), lower }
        }
    }

    /// States drawn uniformly inside the state bounds, `I` per period.
    pub fn uniform_samples(&self) -> Vec<Vec<SystemState>> {
        let net = self.net;
        (0..self.horizon())
            .map(|t| {
                let mut rng = path_rng(self.cfg.seed ^ SALT_SAMPLE, t as u64);
                (0..self.cfg.backward_samples)
                    .map(|_| {
                        let mut draw = |lo: f64, hi: f64| if hi > lo { rng.random_range(lo..=hi) } else { lo };
                        SystemState {
                            t,
                            s: net.storage_devices.iter().map(|d| draw(d.s_min, d.s_max)).collect(),
                            p_prev: net.generators.iter().map(|g| draw(g.p_min, g.p_max)).collect(),
                            w_prev: net.wind_farms.iter().map(|w| draw(0.0, w.capacity)).collect(),
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// The first `I` forward-visited states per period, cycling when there
    /// are fewer paths than samples.
    pub fn visited_samples(&self, paths: &[Trajectory]) -> Vec<Vec<SystemState>> {
        (0..self.horizon())
            .map(|t| {
                (0..self.cfg.backward_samples)
                    .map(|i| paths[i % paths.len()].states[t].clone())
                    .collect()
            })
            .collect()
    }

    /// Alternates backward and forward passes until the stopping rule holds.
    pub fn run(&self) -> Result<SddpOutcome, SddpError> {
        let mut pool = CutPool::new(self.horizon());
        let mut history = Vec::new();
        let mut cuts_generated = Vec::new();
        let mut trajectories: Vec<Trajectory> = Vec::new();
        let mut converged = false;
        let mut iterations = 0;
        for k in 1..=self.cfg.max_iters {
            let samples = if k == 1 { self.uniform_samples() } else { self.visited_samples(&trajectories) };
            let before = pool.generated.clone();
            self.backward_pass(&mut pool, &samples, k)?;
            cuts_generated.push(pool.generated.iter().zip(&before).map(|(a, b)| a - b).collect());
            let (paths, bounds) = self.forward_pass(&pool, k)?;
            log::info!(
                "iteration {k}: lower {} upper {} (sd {})",
                bounds.lower_bound,
                bounds.upper_mean,
                bounds.upper_sd
            );
            trajectories = paths;
            iterations = k;
            let stop = self.cfg.stop_rule == StopRule::Ci && bounds.lower_in_ci(self.cfg.tol.opt);
            history.push(bounds);
            if stop {
                converged = true;
                break;
            }
        }
        if self.cfg.stop_rule == StopRule::Fixed {
            converged = true;
        }
        let outcome = SddpOutcome {
            pool,
            history,
            trajectories,
            iterations,
            converged,
            lp_solves: self.lp_solves(),
            cuts_generated,
        };
        if !outcome.converged {
            return Err(SddpError::MaxItersExceeded(Box::new(outcome)));
        }
        Ok(outcome)
    }
}

/// Runs SDDP on `net` with wind `model`.
pub fn run(net: &Network, model: &WindModel, cfg: SddpConfig) -> Result<SddpOutcome, SddpError> {
    Sddp::new(net, model, cfg)?.run()
}
