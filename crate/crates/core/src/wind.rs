//! Wind output as a clamped lag-`p` multivariate autoregressive process.
//!
//! `w_next = clamp(mu + sum_i Phi_i (w_{t-i} - mu) + eps, 0, capacity)`.
//! Innovations are Gaussian with per-farm standard deviations, or drawn
//! uniformly from a finite `noise_support` when one is configured.

use std::path::Path;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WindError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("wind parameters: {0}")]
    Parse(String),
    #[error("wind parameters: {0}")]
    Dimension(String),
    #[error("autoregressive process is not stationary (spectral radius {0})")]
    NonStationary(f64),
    #[error("mean of farm {farm} is outside [0, capacity]")]
    MeanOutOfRange { farm: usize },
    #[error("lag order {0} is not supported here; only lag 1")]
    UnsupportedLag(usize),
    #[error("fit: {0}")]
    Fit(String),
}

/// Parameters as stored in a wind parameter file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindFile {
    p: usize,
    mu: Vec<f64>,
    /// One row-major `M x M` matrix per lag.
    #[serde(rename = "Phi")]
    phi: Vec<Vec<f64>>,
    noise_sd: Vec<f64>,
    capacity: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noise_support: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WindModel {
    pub p: usize,
    pub mu: Vec<f64>,
    /// `phi[i]` is the row-major coefficient matrix of lag `i + 1`.
    pub phi: Vec<Vec<f64>>,
    pub noise_sd: Vec<f64>,
    pub capacity: Vec<f64>,
    /// Equiprobable innovation vectors replacing the Gaussian draw.
    pub noise_support: Option<Vec<Vec<f64>>>,
    /// Wind in the period before the horizon; defaults to `mu`.
    pub initial: Vec<f64>,
}

/// One simulated path, `values[t][m]` in MW.
#[derive(Clone, Debug, PartialEq)]
pub struct WindScenario {
    pub values: Vec<Vec<f64>>,
}

/// Markov-chain approximation of a lag-1 model.
#[derive(Clone, Debug, PartialEq)]
pub struct WindChain {
    /// Per-farm level values, increasing.
    pub levels: Vec<Vec<f64>>,
    /// Joint state index to per-farm level indices (farm 0 varies fastest).
    pub states: Vec<Vec<usize>>,
    /// Row-stochastic transition matrix over joint states.
    pub transition: Vec<Vec<f64>>,
}

impl WindChain {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    /// Wind vector of joint state `k`.
    pub fn value(&self, k: usize) -> Vec<f64> {
        self.states[k].iter().enumerate().map(|(m, &l)| self.levels[m][l]).collect()
    }

    /// Joint state whose levels are nearest to `w`, farm by farm.
    pub fn nearest(&self, w: &[f64]) -> usize {
        let mut k = 0;
        let mut stride = 1;
        for (m, lv) in self.levels.iter().enumerate() {
            let mut best = 0;
            for (i, &v) in lv.iter().enumerate() {
                if (v - w[m]).abs() < (lv[best] - w[m]).abs() {
                    best = i;
                }
            }
            k += best * stride;
            stride *= lv.len();
        }
        k
    }
}

impl WindModel {
    pub fn new(
        p: usize,
        mu: Vec<f64>,
        phi: Vec<Vec<f64>>,
        noise_sd: Vec<f64>,
        capacity: Vec<f64>,
    ) -> Result<Self, WindError> {
        let initial = mu.clone();
        let model = Self { p, mu, phi, noise_sd, capacity, noise_support: None, initial };
        model.check()?;
        Ok(model)
    }

    /// Lag-1 scalar model, a common fixture shape.
    pub fn scalar(mu: f64, phi: f64, noise_sd: f64, capacity: f64) -> Result<Self, WindError> {
        Self::new(1, vec![mu], vec![vec![phi]], vec![noise_sd], vec![capacity])
    }

    pub fn with_support(mut self, support: Vec<Vec<f64>>) -> Result<Self, WindError> {
        self.noise_support = Some(support);
        self.check()?;
        Ok(self)
    }

    pub fn with_initial(mut self, initial: Vec<f64>) -> Result<Self, WindError> {
        self.initial = initial;
        self.check()?;
        Ok(self)
    }

    pub fn farms(&self) -> usize {
        self.mu.len()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, WindError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| WindError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, WindError> {
        let f: WindFile = toml::from_str(text).map_err(|e| WindError::Parse(e.to_string()))?;
        let initial = f.initial.unwrap_or_else(|| f.mu.clone());
        let model = Self {
            p: f.p,
            mu: f.mu,
            phi: f.phi,
            noise_sd: f.noise_sd,
            capacity: f.capacity,
            noise_support: f.noise_support,
            initial,
        };
        model.check()?;
        Ok(model)
    }

    pub fn to_toml(&self) -> String {
        let f = WindFile {
            p: self.p,
            mu: self.mu.clone(),
            phi: self.phi.clone(),
            noise_sd: self.noise_sd.clone(),
            capacity: self.capacity.clone(),
            noise_support: self.noise_support.clone(),
            initial: Some(self.initial.clone()),
        };
        toml::to_string(&f).expect("wind parameters are always representable")
    }

    fn check(&self) -> Result<(), WindError> {
        let m = self.mu.len();
        let dim = |what: &str| WindError::Dimension(format!("{what} does not match {m} farms"));
        if self.p == 0 || self.phi.len() != self.p {
            return Err(WindError::Dimension(format!("expected {} Phi matrices, found {}", self.p, self.phi.len())));
        }
        if self.phi.iter().any(|a| a.len() != m * m) {
            return Err(dim("Phi matrix size"));
        }
        if self.noise_sd.len() != m || self.noise_sd.iter().any(|&s| !(s >= 0.0)) {
            return Err(dim("noise_sd"));
        }
        if self.capacity.len() != m || self.initial.len() != m {
            return Err(dim("capacity or initial"));
        }
        if let Some(sup) = &self.noise_support {
            if sup.is_empty() || sup.iter().any(|e| e.len() != m) {
                return Err(dim("noise_support"));
            }
        }
        for k in 0..m {
            if !(0.0 <= self.mu[k] && self.mu[k] <= self.capacity[k]) {
                return Err(WindError::MeanOutOfRange { farm: k });
            }
        }
        let radius = self.spectral_radius();
        if !(radius < 1.0) {
            return Err(WindError::NonStationary(radius));
        }
        Ok(())
    }

    /// Spectral radius of the companion matrix.
    pub fn spectral_radius(&self) -> f64 {
        let m = self.mu.len();
        let n = m * self.p;
        if n == 0 {
            return 0.0;
        }
        let mut c = DMatrix::<f64>::zeros(n, n);
        for (lag, a) in self.phi.iter().enumerate() {
            for r in 0..m {
                for col in 0..m {
                    c[(r, lag * m + col)] = a[r * m + col];
                }
            }
        }
        for k in m..n {
            c[(k, k - m)] = 1.0;
        }
        c.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn phi_apply(&self, lag: usize, v: &[f64], out: &mut [f64]) {
        let m = self.mu.len();
        let a = &self.phi[lag];
        for r in 0..m {
            out[r] += (0..m).map(|c| a[r * m + c] * v[c]).sum::<f64>();
        }
    }

    /// Unclamped next value; `history` is newest first.
    fn raw_step(&self, history: &[Vec<f64>], noise: &[f64]) -> Vec<f64> {
        let m = self.mu.len();
        let mut out: Vec<f64> = (0..m).map(|k| self.mu[k] + noise[k]).collect();
        for (lag, w) in history.iter().take(self.p).enumerate() {
            let dev: Vec<f64> = (0..m).map(|k| w[k] - self.mu[k]).collect();
            self.phi_apply(lag, &dev, &mut out);
        }
        out
    }

    /// Next wind vector from the last `p` vectors (newest first).
    pub fn step(&self, history: &[Vec<f64>], noise: &[f64]) -> Vec<f64> {
        let raw = self.raw_step(history, noise);
        raw.iter().zip(&self.capacity).map(|(&v, &c)| v.clamp(0.0, c)).collect()
    }

    /// Lag-1 step that also reports, per farm, whether the output lies
    /// strictly inside `[0, capacity]` (so it responds to `w_prev`).
    pub fn step_lag1(&self, w_prev: &[f64], noise: &[f64]) -> (Vec<f64>, Vec<bool>) {
        let raw = self.raw_step(std::slice::from_ref(&w_prev.to_vec()), noise);
        let mut w = Vec::with_capacity(raw.len());
        let mut interior = Vec::with_capacity(raw.len());
        for (&v, &c) in raw.iter().zip(&self.capacity) {
            w.push(v.clamp(0.0, c));
            interior.push(v > 0.0 && v < c);
        }
        (w, interior)
    }

    /// `Phi_1^T v`.
    pub fn phi1_transpose(&self, v: &[f64]) -> Vec<f64> {
        let m = self.mu.len();
        let a = &self.phi[0];
        (0..m).map(|c| (0..m).map(|r| a[r * m + c] * v[r]).sum()).collect()
    }

    /// One innovation vector.
    pub fn draw_noise<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        if let Some(sup) = &self.noise_support {
            return sup[rng.random_range(0..sup.len())].clone();
        }
        self.noise_sd
            .iter()
            .map(|&sd| {
                if sd == 0.0 {
                    0.0
                } else {
                    Normal::new(0.0, sd).expect("sd is finite and positive").sample(rng)
                }
            })
            .collect()
    }
}

/// Per-path generator seeded by `(seed, stream)`.
pub fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `count` paths of `horizon` periods, each continuing from `history`
/// (newest first) with independent innovations.
pub fn simulate(
    model: &WindModel,
    history: &[Vec<f64>],
    horizon: usize,
    count: usize,
    seed: u64,
) -> Vec<WindScenario> {
    (0..count)
        .map(|path| {
            let mut rng = path_rng(seed, path as u64);
            let mut hist: Vec<Vec<f64>> = history.to_vec();
            while hist.len() < model.p {
                hist.push(model.mu.clone());
            }
            let mut values = Vec::with_capacity(horizon);
            for _ in 0..horizon {
                let eps = model.draw_noise(&mut rng);
                let w = model.step(&hist, &eps);
                hist.insert(0, w.clone());
                hist.truncate(model.p);
                values.push(w);
            }
            WindScenario { values }
        })
        .collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Markov chain with `levels` equiprobable levels per farm, estimated from
/// `samples` transitions of a simulated stationary path.
pub fn discretize(
    model: &WindModel,
    levels: usize,
    samples: usize,
    seed: u64,
) -> Result<WindChain, WindError> {
    if model.p != 1 {
        return Err(WindError::UnsupportedLag(model.p));
    }
    if levels == 0 || samples == 0 {
        return Err(WindError::Dimension("levels and samples must be positive".into()));
    }
    let m = model.farms();
    let burn_in = 500;
    let path = &simulate(model, &[model.mu.clone()], burn_in + samples + 1, 1, seed)[0].values[burn_in..];

    let mut level_values = Vec::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    for k in 0..m {
        let mut xs: Vec<f64> = path.iter().map(|w| w[k]).collect();
        xs.sort_by(f64::total_cmp);
        level_values.push((0..levels).map(|i| quantile(&xs, (i as f64 + 0.5) / levels as f64)).collect::<Vec<_>>());
        edges.push((1..levels).map(|i| quantile(&xs, i as f64 / levels as f64)).collect::<Vec<_>>());
    }
    let bin = |w: &[f64]| -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for k in 0..m {
            let b = edges[k].iter().filter(|&&e| w[k] > e).count();
            idx += b * stride;
            stride *= levels;
        }
        idx
    };
    let n = levels.pow(m as u32);
    let mut counts = vec![vec![0.0; n]; n];
    for pair in path.windows(2) {
        counts[bin(&pair[0])][bin(&pair[1])] += 1.0;
    }
    for (i, row) in counts.iter_mut().enumerate() {
        let total: f64 = row.iter().sum();
        if total == 0.0 {
            row[i] = 1.0;
        } else {
            row.iter_mut().for_each(|v| *v /= total);
        }
    }
    let states = (0..n)
        .map(|mut k| {
            (0..m)
                .map(|_| {
                    let l = k % levels;
                    k /= levels;
                    l
                })
                .collect()
        })
        .collect();
    Ok(WindChain { levels: level_values, states, transition: counts })
}

/// Reads a `t,farm_1,...,farm_M` history CSV into rows of farm values.
pub fn read_history_csv(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>, WindError> {
    let path = path.as_ref();
    let err = |message: String| WindError::Io { path: path.display().to_string(), message };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| err(e.to_string()))?;
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| err(e.to_string()))?;
        let row: Result<Vec<f64>, _> = rec.iter().skip(1).map(str::parse::<f64>).collect();
        rows.push(row.map_err(|e| err(e.to_string()))?);
    }
    Ok(rows)
}

/// Writes rows of farm values as a `t,farm_1,...` CSV with `t` from 1.
pub fn write_history_csv(path: impl AsRef<Path>, rows: &[Vec<f64>]) -> Result<(), WindError> {
    let path = path.as_ref();
    let err = |e: csv::Error| WindError::Io { path: path.display().to_string(), message: e.to_string() };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    let m = rows.first().map_or(0, Vec::len);
    let mut header = vec!["t".to_string()];
    header.extend((1..=m).map(|k| format!("farm_{k}")));
    w.write_record(&header).map_err(err)?;
    for (t, row) in rows.iter().enumerate() {
        let mut rec = vec![(t + 1).to_string()];
        rec.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&rec).map_err(err)?;
    }
    w.flush().map_err(|e| WindError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Least-squares lag-1 fit: `mu` is the sample mean, `Phi` regresses
/// deviations on their lagged values and `noise_sd` is the residual spread.
pub fn fit_lag1(rows: &[Vec<f64>], capacity: Vec<f64>) -> Result<WindModel, WindError> {
    let m = capacity.len();
    if rows.len() < m + 2 || rows.iter().any(|r| r.len() != m) {
        return Err(WindError::Fit(format!("need at least {} rows of {m} farms", m + 2)));
    }
    let n = rows.len();
    let mu: Vec<f64> = (0..m).map(|k| rows.iter().map(|r| r[k]).sum::<f64>() / n as f64).collect();
    let x = DMatrix::from_fn(n - 1, m, |t, k| rows[t][k] - mu[k]);
    let y = DMatrix::from_fn(n - 1, m, |t, k| rows[t + 1][k] - mu[k]);
    let svd = x.clone().svd(true, true);
    let b = svd.solve(&y, 1e-12).map_err(|e| WindError::Fit(e.to_string()))?;
    // y = x * b, so Phi = b^T.
    let phi: Vec<f64> = (0..m).flat_map(|r| (0..m).map(move |c| (r, c))).map(|(r, c)| b[(c, r)]).collect();
    let resid = &y - &x * &b;
    let dof = (n - 1).saturating_sub(m).max(1) as f64;
    let noise_sd = (0..m).map(|k| (resid.column(k).norm_squared() / dof).sqrt()).collect();
    let mu = mu.iter().zip(&capacity).map(|(&v, &c)| v.clamp(0.0, c)).collect();
    WindModel::new(1, mu, vec![phi], noise_sd, capacity)
}

/// Scales every farm's series so its mean is `capacity * factor`, then
/// clamps to `[0, capacity]`.
pub fn rescale_capacity_factor(rows: &[Vec<f64>], capacity: &[f64], factor: f64) -> Vec<Vec<f64>> {
    let n = rows.len().max(1) as f64;
    let scale: Vec<f64> = (0..capacity.len())
        .map(|k| {
            let mean = rows.iter().map(|r| r[k]).sum::<f64>() / n;
            if mean > 0.0 {
                capacity[k] * factor / mean
            } else {
                0.0
            }
        })
        .collect();
    rows.iter()
        .map(|r| r.iter().enumerate().map(|(k, &v)| (v * scale[k]).clamp(0.0, capacity[k])).collect())
        .collect()
}
