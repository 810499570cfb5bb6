//! Grid data model: buses, generators, lines, storage and wind farms.
//!
//! A [`Network`] is immutable once built. Use [`parse_case`] to load one from
//! a case file, [`validate`] to list invariant violations and
//! [`bus_incidence`] for the per-bus line sets used by the balance rows.

mod case;

pub use case::{parse_case, parse_case_str, serialize_case, CaseOptions};

use std::collections::VecDeque;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bus {
    pub id: usize,
    #[serde(default)]
    pub is_slack: bool,
    /// Demand in MW, one value per period. Filled from the load CSV when the
    /// case file does not give it inline.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub load_profile: Vec<f64>,
}

/// Generator cost in $/h as a function of output in MW.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cost {
    /// `a p^2 + b p + c`.
    Quadratic([f64; 3]),
    /// `(p, cost)` pairs, increasing in `p`, linearly interpolated.
    Breakpoints(Vec<[f64; 2]>),
}

impl Cost {
    pub fn eval(&self, p: f64) -> f64 {
        match self {
            Cost::Quadratic([a, b, c]) => a * p * p + b * p + c,
            Cost::Breakpoints(pts) => interpolate(pts, p),
        }
    }

    /// Right-hand marginal cost at `p` (left-hand at the last breakpoint).
    pub fn marginal(&self, p: f64) -> f64 {
        match self {
            Cost::Quadratic([a, b, _]) => 2.0 * a * p + b,
            Cost::Breakpoints(pts) => {
                if pts.len() < 2 {
                    return 0.0;
                }
                let k = pts
                    .windows(2)
                    .position(|w| p < w[1][0])
                    .unwrap_or(pts.len() - 2);
                (pts[k + 1][1] - pts[k][1]) / (pts[k + 1][0] - pts[k][0])
            }
        }
    }
}

fn interpolate(pts: &[[f64; 2]], p: f64) -> f64 {
    match pts {
        [] => 0.0,
        [only] => only[1],
        _ => {
            let k = pts.windows(2).position(|w| p <= w[1][0]).unwrap_or(pts.len() - 2);
            let ([x0, y0], [x1, y1]) = (pts[k], pts[k + 1]);
            y0 + (y1 - y0) * (p - x0) / (x1 - x0)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Generator {
    pub id: usize,
    pub bus: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub ramp_up: f64,
    pub ramp_down: f64,
    pub cost: Cost,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Line {
    pub id: usize,
    pub from_bus: usize,
    pub to_bus: usize,
    /// MW per radian.
    pub susceptance: f64,
    pub flow_limit: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StorageDevice {
    pub id: usize,
    pub bus: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub delta_max: f64,
    pub eff_charge: f64,
    pub eff_discharge: f64,
    pub eff_storage: f64,
    #[serde(default)]
    pub variation_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindFarm {
    pub id: usize,
    pub bus: usize,
    pub capacity: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub buses: Vec<Bus>,
    pub generators: Vec<Generator>,
    pub lines: Vec<Line>,
    pub storage_devices: Vec<StorageDevice>,
    pub wind_farms: Vec<WindFarm>,
    /// Imbalance penalty in $/MWh.
    pub penalty_m: f64,
    pub horizon: usize,
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid network: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("horizon {requested} exceeds the {available} periods of load data")]
    Horizon { requested: usize, available: usize },
}

/// Line sets per bus, indexed by bus position. Entries are line positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incidence {
    /// `I_n`: lines whose `to_bus` is `n`.
    pub entering: Vec<Vec<usize>>,
    /// `O_n`: lines whose `from_bus` is `n`.
    pub leaving: Vec<Vec<usize>>,
}

impl Network {
    pub fn bus_index(&self, id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    pub fn slack_index(&self) -> Option<usize> {
        self.buses.iter().position(|b| b.is_slack)
    }

    pub fn demand(&self, bus: usize, t: usize) -> f64 {
        self.buses[bus].load_profile.get(t).copied().unwrap_or(0.0)
    }

    pub fn total_demand(&self, t: usize) -> f64 {
        (0..self.buses.len()).map(|n| self.demand(n, t)).sum()
    }

    /// Largest marginal generation cost at `p_max` over all generators.
    pub fn max_marginal_cost(&self) -> f64 {
        self.generators
            .iter()
            .map(|g| g.cost.marginal(g.p_max))
            .fold(0.0, f64::max)
    }

    pub fn default_penalty(&self) -> f64 {
        10.0 * self.max_marginal_cost().max(1.0)
    }

    /// Copy restricted to the first `t` periods.
    pub fn with_horizon(&self, t: usize) -> Result<Network, NetworkError> {
        let available = self.horizon;
        if t > available || t == 0 {
            return Err(NetworkError::Horizon { requested: t, available });
        }
        let mut out = self.clone();
        for b in &mut out.buses {
            b.load_profile.truncate(t);
        }
        out.horizon = t;
        Ok(out)
    }

    pub fn ensure_valid(&self) -> Result<(), NetworkError> {
        let v = validate(self);
        if v.is_empty() {
            Ok(())
        } else {
            Err(NetworkError::Invalid(v))
        }
    }
}

/// Every invariant violation of `net`, in a stable order. Empty means
/// valid.
pub fn validate(net: &Network) -> Vec<String> {
    let mut out = Vec::new();
    let slack = net.buses.iter().filter(|b| b.is_slack).count();
    if slack == 0 {
        out.push("no slack bus".to_string());
    } else if slack > 1 {
        out.push("multiple slack buses".to_string());
    }
    let mut ids: Vec<usize> = net.buses.iter().map(|b| b.id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        out.push("duplicate bus id".to_string());
    }
    for b in &net.buses {
        if b.load_profile.len() != net.horizon {
            out.push(format!(
                "bus {} load profile has {} values, horizon is {}",
                b.id,
                b.load_profile.len(),
                net.horizon
            ));
        }
        if b.load_profile.iter().any(|&d| !(d >= 0.0) || !d.is_finite()) {
            out.push(format!("bus {} has a negative or non-finite load", b.id));
        }
    }
    let known = |id: usize| net.bus_index(id).is_some();
    for g in &net.generators {
        if !known(g.bus) {
            out.push(format!("generator {} references unknown bus {}", g.id, g.bus));
        }
        if !(0.0 <= g.p_min && g.p_min <= g.p_max) {
            out.push(format!("generator {} needs 0 <= p_min <= p_max", g.id));
        }
        if !(g.ramp_up > 0.0 && g.ramp_down > 0.0) {
            out.push(format!("generator {} needs positive ramp limits", g.id));
        }
        match &g.cost {
            Cost::Quadratic([a, b, c]) => {
                if *a < 0.0 {
                    out.push(format!("generator {} has a concave quadratic cost", g.id));
                }
                if ![a, b, c].iter().all(|v| v.is_finite()) {
                    out.push(format!("generator {} has a non-finite cost coefficient", g.id));
                }
            }
            Cost::Breakpoints(pts) => {
                if pts.len() < 2 || pts.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    out.push(format!("generator {} breakpoints must be strictly increasing in p", g.id));
                } else {
                    let slopes: Vec<f64> = pts
                        .windows(2)
                        .map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]))
                        .collect();
                    if slopes.windows(2).any(|s| s[1] < s[0] - 1e-9) {
                        out.push(format!("generator {} breakpoint cost is not convex", g.id));
                    }
                    if pts[0][0] > g.p_min || pts[pts.len() - 1][0] < g.p_max {
                        out.push(format!("generator {} breakpoints do not span [p_min, p_max]", g.id));
                    }
                }
            }
        }
    }
    for l in &net.lines {
        if !known(l.from_bus) || !known(l.to_bus) {
            out.push(format!("line {} references an unknown bus", l.id));
        }
        if l.from_bus == l.to_bus {
            out.push(format!("line {} is a self-loop", l.id));
        }
        if !(l.susceptance > 0.0) || !(l.flow_limit > 0.0) {
            out.push(format!("line {} needs positive susceptance and flow limit", l.id));
        }
    }
    let mut storage_buses = Vec::new();
    for s in &net.storage_devices {
        if !known(s.bus) {
            out.push(format!("storage {} references unknown bus {}", s.id, s.bus));
        }
        if !(0.0 <= s.s_min && s.s_min < s.s_max) {
            out.push(format!("storage {} needs 0 <= s_min < s_max", s.id));
        }
        if !(s.delta_max > 0.0) {
            out.push(format!("storage {} needs positive delta_max", s.id));
        }
        for e in [s.eff_charge, s.eff_discharge, s.eff_storage] {
            if !(e > 0.0 && e <= 1.0) {
                out.push(format!("storage {} efficiencies must lie in (0, 1]", s.id));
                break;
            }
        }
        if s.variation_cost < 0.0 {
            out.push(format!("storage {} has negative variation cost", s.id));
        }
        if storage_buses.contains(&s.bus) {
            out.push(format!("bus {} has more than one storage device", s.bus));
        }
        storage_buses.push(s.bus);
    }
    let mut wind_buses = Vec::new();
    for w in &net.wind_farms {
        if !known(w.bus) {
            out.push(format!("wind farm {} references unknown bus {}", w.id, w.bus));
        }
        if !(w.capacity > 0.0) {
            out.push(format!("wind farm {} needs positive capacity", w.id));
        }
        if wind_buses.contains(&w.bus) {
            out.push(format!("bus {} has more than one wind farm", w.bus));
        }
        wind_buses.push(w.bus);
    }
    if !net.buses.is_empty() && !connected(net) {
        out.push("network not connected".to_string());
    }
    if !(net.penalty_m > net.max_marginal_cost()) {
        out.push(format!(
            "penalty_M {} does not exceed the maximum marginal cost {}",
            net.penalty_m,
            net.max_marginal_cost()
        ));
    }
    out
}

fn connected(net: &Network) -> bool {
    let n = net.buses.len();
    let mut adj = vec![Vec::new(); n];
    for l in &net.lines {
        if let (Some(a), Some(b)) = (net.bus_index(l.from_bus), net.bus_index(l.to_bus)) {
            adj[a].push(b);
            adj[b].push(a);
        }
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Per-bus entering and leaving line sets, following each line's declared
/// orientation. Lines with unknown endpoints are skipped.
pub fn bus_incidence(net: &Network) -> Incidence {
    let n = net.buses.len();
    let mut inc = Incidence { entering: vec![Vec::new(); n], leaving: vec![Vec::new(); n] };
    for (k, l) in net.lines.iter().enumerate() {
        if let (Some(a), Some(b)) = (net.bus_index(l.from_bus), net.bus_index(l.to_bus)) {
            inc.leaving[a].push(k);
            inc.entering[b].push(k);
        }
    }
    inc
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn line(id: usize, a: usize, b: usize) -> Line {
        Line { id, from_bus: a, to_bus: b, susceptance: 10.0, flow_limit: 100.0 }
    }

    fn small(buses: usize, lines: Vec<Line>) -> Network {
        Network {
            buses: (1..=buses)
                .map(|i| Bus { id: i, is_slack: i == 1, load_profile: vec![1.0, 2.0] })
                .collect(),
            generators: vec![Generator {
                id: 1,
                bus: 1,
                p_min: 0.0,
                p_max: 10.0,
                ramp_up: 5.0,
                ramp_down: 5.0,
                cost: Cost::Quadratic([0.1, 2.0, 0.0]),
            }],
            lines,
            storage_devices: vec![],
            wind_farms: vec![],
            penalty_m: 100.0,
            horizon: 2,
        }
    }

    #[test]
    fn cost_evaluation() {
        let c = Cost::Breakpoints(vec![[0.0, 0.0], [10.0, 20.0], [20.0, 60.0]]);
        assert_eq!(c.eval(5.0), 10.0);
        assert_eq!(c.eval(15.0), 40.0);
        assert_eq!(c.marginal(10.0), 4.0);
        assert_eq!(c.marginal(20.0), 4.0);
        let q = Cost::Quadratic([1.0, 2.0, 3.0]);
        assert_eq!(q.eval(2.0), 11.0);
        assert_eq!(q.marginal(2.0), 6.0);
    }

    #[test]
    fn two_slack_buses_are_reported() {
        let mut net = small(2, vec![line(1, 1, 2)]);
        net.buses[1].is_slack = true;
        assert_eq!(validate(&net), vec!["multiple slack buses".to_string()]);
    }

    #[test]
    fn incidence_of_single_line() {
        let net = small(2, vec![line(7, 1, 2)]);
        let inc = bus_incidence(&net);
        assert_eq!(inc.leaving, vec![vec![0], vec![]]);
        assert_eq!(inc.entering, vec![vec![], vec![0]]);
    }

    #[test]
    fn multi_device_bus_rejected() {
        let mut net = small(1, vec![]);
        net.wind_farms = vec![
            WindFarm { id: 1, bus: 1, capacity: 5.0 },
            WindFarm { id: 2, bus: 1, capacity: 5.0 },
        ];
        assert_eq!(validate(&net), vec!["bus 1 has more than one wind farm".to_string()]);
    }

    #[test]
    fn penalty_must_exceed_marginal_cost() {
        let mut net = small(1, vec![]);
        net.penalty_m = 3.0;
        assert_eq!(validate(&net).len(), 1);
        assert!((net.default_penalty() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn horizon_truncation() {
        let net = small(1, vec![]);
        let one = net.with_horizon(1).unwrap();
        assert_eq!(one.buses[0].load_profile, vec![1.0]);
        assert!(validate(&one).is_empty());
        assert!(net.with_horizon(3).is_err());
    }
}
