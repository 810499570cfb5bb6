//! Dense bounded-variable revised simplex.
//!
//! Rows are brought into computational form `A x - r = 0` with one logical
//! `r_i` per row whose bounds encode the sense and right-hand side. The
//! basis inverse is kept explicitly (row-major, product-form updates, periodic
//! refactorization). Cold starts run a composite primal simplex from the
//! all-logical basis; warm starts run the dual simplex from a stored optimal
//! basis of a problem with the same matrix, falling back to primal when the
//! stored basis is not dual feasible.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::{LpError, LpProblem, LpSolution, LpStatus, Sense, Tolerances};

const REFACTOR_EVERY: usize = 100;
const DEGENERATE_SWITCH: usize = 50;
const SINGULAR: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// Optimal basis of a solved problem, reusable for any problem that shares
/// its constraint matrix (right-hand sides, bounds and costs may differ).
#[derive(Clone, Debug)]
pub struct WarmStart {
    m: usize,
    n: usize,
    fingerprint: u64,
    basis: Vec<usize>,
    status: Vec<Status>,
    binv: Arc<Vec<f64>>,
}

impl WarmStart {
    pub fn num_rows(&self) -> usize {
        self.m
    }
}

struct Model {
    m: usize,
    n: usize,
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    fingerprint: u64,
}

impl Model {
    fn new(p: &LpProblem) -> Result<Self, LpError> {
        p.check()?;
        let m = p.num_rows();
        let n = p.num_vars();
        let mut counts = vec![0usize; n + 1];
        for r in p.rows() {
            for &(v, a) in &r.coeffs {
                if a != 0.0 {
                    counts[v.0 + 1] += 1;
                }
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let col_start = counts.clone();
        let nnz = col_start[n];
        let mut fill = counts;
        let mut col_row = vec![0usize; nnz];
        let mut col_val = vec![0.0; nnz];
        for (i, r) in p.rows().iter().enumerate() {
            for &(v, a) in &r.coeffs {
                if a != 0.0 {
                    let at = fill[v.0];
                    col_row[at] = i;
                    col_val[at] = a;
                    fill[v.0] += 1;
                }
            }
        }
        // Duplicate (row, var) entries are summed by the products below, so
        // they need no special treatment here.
        let mut lower = Vec::with_capacity(n + m);
        let mut upper = Vec::with_capacity(n + m);
        let mut cost = Vec::with_capacity(n + m);
        for v in p.vars() {
            lower.push(v.lower);
            upper.push(v.upper);
            cost.push(v.cost);
        }
        for r in p.rows() {
            let (lo, hi) = match r.sense {
                Sense::Le => (f64::NEG_INFINITY, r.rhs),
                Sense::Ge => (r.rhs, f64::INFINITY),
                Sense::Eq => (r.rhs, r.rhs),
            };
            lower.push(lo);
            upper.push(hi);
            cost.push(0.0);
        }
        let mut h = DefaultHasher::new();
        (m, n).hash(&mut h);
        col_start.hash(&mut h);
        col_row.hash(&mut h);
        for a in &col_val {
            a.to_bits().hash(&mut h);
        }
        Ok(Self { m, n, col_start, col_row, col_val, lower, upper, cost, fingerprint: h.finish() })
    }

    #[inline]
    fn for_column(&self, j: usize, mut f: impl FnMut(usize, f64)) {
        if j < self.n {
            for k in self.col_start[j]..self.col_start[j + 1] {
                f(self.col_row[k], self.col_val[k]);
            }
        } else {
            f(j - self.n, -1.0);
        }
    }

    #[inline]
    fn dot_column(&self, j: usize, v: &[f64]) -> f64 {
        if j < self.n {
            let mut s = 0.0;
            for k in self.col_start[j]..self.col_start[j + 1] {
                s += v[self.col_row[k]] * self.col_val[k];
            }
            s
        } else {
            -v[j - self.n]
        }
    }
}

struct Engine<'a> {
    model: &'a Model,
    tol: Tolerances,
    basis: Vec<usize>,
    status: Vec<Status>,
    x: Vec<f64>,
    binv: Vec<f64>,
    updates: usize,
    iterations: usize,
    col: Vec<f64>,
    y: Vec<f64>,
    cb: Vec<f64>,
}

enum Outcome {
    Done(LpStatus),
    GiveUp,
}

impl<'a> Engine<'a> {
    fn cold(model: &'a Model, tol: Tolerances) -> Self {
        let (m, n) = (model.m, model.n);
        let mut status = vec![Status::Basic; n + m];
        let mut x = vec![0.0; n + m];
        for j in 0..n {
            let (l, u) = (model.lower[j], model.upper[j]);
            if l.is_finite() {
                status[j] = Status::AtLower;
                x[j] = l;
            } else if u.is_finite() {
                status[j] = Status::AtUpper;
                x[j] = u;
            } else {
                status[j] = Status::Free;
            }
        }
        let mut binv = vec![0.0; m * m];
        for i in 0..m {
            binv[i * m + i] = -1.0;
        }
        let mut e = Self {
            model,
            tol,
            basis: (n..n + m).collect(),
            status,
            x,
            binv,
            updates: 0,
            iterations: 0,
            col: vec![0.0; m],
            y: vec![0.0; m],
            cb: vec![0.0; m],
        };
        e.compute_xb();
        e
    }

    fn warm(model: &'a Model, tol: Tolerances, ws: &WarmStart) -> Self {
        let (m, n) = (model.m, model.n);
        let mut status = ws.status.clone();
        let mut x = vec![0.0; n + m];
        for j in 0..n + m {
            if status[j] == Status::Basic {
                continue;
            }
            let (l, u) = (model.lower[j], model.upper[j]);
            let wanted = match status[j] {
                Status::AtUpper if u.is_finite() => Status::AtUpper,
                _ if l.is_finite() => Status::AtLower,
                _ if u.is_finite() => Status::AtUpper,
                _ => Status::Free,
            };
            status[j] = wanted;
            x[j] = match wanted {
                Status::AtLower => l,
                Status::AtUpper => u,
                _ => 0.0,
            };
        }
        let mut e = Self {
            model,
            tol,
            basis: ws.basis.clone(),
            status,
            x,
            binv: ws.binv.as_ref().clone(),
            updates: 0,
            iterations: 0,
            col: vec![0.0; m],
            y: vec![0.0; m],
            cb: vec![0.0; m],
        };
        e.compute_xb();
        e
    }

    fn m(&self) -> usize {
        self.model.m
    }

    fn ftran(&mut self, j: usize) {
        let m = self.m();
        self.col.iter_mut().for_each(|c| *c = 0.0);
        let binv = &self.binv;
        let col = &mut self.col;
        self.model.for_column(j, |k, a| {
            for i in 0..m {
                col[i] += binv[i * m + k] * a;
            }
        });
    }

    /// `y' = cb' B^{-1}`.
    fn btran(&mut self) {
        let m = self.m();
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..m {
            let c = self.cb[i];
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for (yk, &b) in self.y.iter_mut().zip(row) {
                    *yk += c * b;
                }
            }
        }
    }

    fn compute_xb(&mut self) {
        let m = self.m();
        let mut rhs = vec![0.0; m];
        for j in 0..self.x.len() {
            if self.status[j] != Status::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.model.for_column(j, |k, a| rhs[k] -= a * xj);
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let v: f64 = row.iter().zip(&rhs).map(|(b, r)| b * r).sum();
            self.x[self.basis[i]] = v;
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m();
        // Gauss-Jordan on [B | I], stored row-major with width 2m.
        let w = 2 * m;
        let mut a = vec![0.0; m * w];
        for (pos, &j) in self.basis.iter().enumerate() {
            self.model.for_column(j, |k, v| a[k * w + pos] += v);
        }
        for i in 0..m {
            a[i * w + m + i] = 1.0;
        }
        for c in 0..m {
            let mut piv = c;
            let mut best = a[c * w + c].abs();
            for r in c + 1..m {
                let v = a[r * w + c].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < SINGULAR {
                return Err(LpError::NumericalFailure("singular basis".into()));
            }
            if piv != c {
                for k in 0..w {
                    a.swap(c * w + k, piv * w + k);
                }
            }
            let inv = 1.0 / a[c * w + c];
            for k in 0..w {
                a[c * w + k] *= inv;
            }
            let (head, rest) = a.split_at_mut(c * w);
            let (pivot_row, tail) = rest.split_at_mut(w);
            for row in head.chunks_exact_mut(w).chain(tail.chunks_exact_mut(w)) {
                let f = row[c];
                if f != 0.0 {
                    for k in c..w {
                        row[k] -= f * pivot_row[k];
                    }
                }
            }
        }
        // Row `pos` of B^{-1} is row `pos` of the right half.
        for i in 0..m {
            self.binv[i * m..(i + 1) * m].copy_from_slice(&a[i * w + m..(i + 1) * w]);
        }
        self.updates = 0;
        Ok(())
    }

    fn pivot(&mut self, r: usize, entering: usize) {
        let m = self.m();
        let piv = self.col[r];
        let inv = 1.0 / piv;
        for k in 0..m {
            self.binv[r * m + k] *= inv;
        }
        let (head, rest) = self.binv.split_at_mut(r * m);
        let (prow, tail) = rest.split_at_mut(m);
        for (i, row) in head.chunks_exact_mut(m).enumerate() {
            let f = self.col[i];
            if f != 0.0 {
                for (v, &p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        for (off, row) in tail.chunks_exact_mut(m).enumerate() {
            let f = self.col[r + 1 + off];
            if f != 0.0 {
                for (v, &p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        self.basis[r] = entering;
        self.status[entering] = Status::Basic;
        self.updates += 1;
    }

    fn maybe_refactor(&mut self) -> Result<(), LpError> {
        if self.updates >= REFACTOR_EVERY {
            self.refactor()?;
            self.compute_xb();
        }
        Ok(())
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let (l, u, v) = (self.model.lower[j], self.model.upper[j], self.x[j]);
        (l - v).max(v - u).max(0.0)
    }

    fn reduced_cost(&self, j: usize, phase1: bool) -> f64 {
        let c = if phase1 { 0.0 } else { self.model.cost[j] };
        c - self.model.dot_column(j, &self.y)
    }

    fn load_real_costs(&mut self) {
        for i in 0..self.m() {
            self.cb[i] = self.model.cost[self.basis[i]];
        }
        self.btran();
    }

    fn primal(&mut self, max_iter: usize) -> Result<LpStatus, LpError> {
        let feas = self.tol.feas;
        let total = self.x.len();
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            if self.iterations > max_iter {
                return Err(LpError::NumericalFailure("primal iteration limit".into()));
            }
            self.maybe_refactor()?;
            let mut phase1 = false;
            for i in 0..self.m() {
                let j = self.basis[i];
                let (l, u, v) = (self.model.lower[j], self.model.upper[j], self.x[j]);
                self.cb[i] = if v < l - feas {
                    phase1 = true;
                    -1.0
                } else if v > u + feas {
                    phase1 = true;
                    1.0
                } else {
                    0.0
                };
            }
            if !phase1 {
                for i in 0..self.m() {
                    self.cb[i] = self.model.cost[self.basis[i]];
                }
            }
            self.btran();

            let mut entering = None;
            let mut best = 0.0;
            for j in 0..total {
                let st = self.status[j];
                if st == Status::Basic || self.model.lower[j] == self.model.upper[j] {
                    continue;
                }
                let d = self.reduced_cost(j, phase1);
                let score = match st {
                    Status::AtLower if d < -self.tol.dual => -d,
                    Status::AtUpper if d > self.tol.dual => d,
                    Status::Free if d.abs() > self.tol.dual => d.abs(),
                    _ => continue,
                };
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if score > best {
                    best = score;
                    entering = Some((j, d));
                }
            }
            let Some((q, dq)) = entering else {
                return Ok(if phase1 { LpStatus::Infeasible } else { LpStatus::Optimal });
            };
            self.ftran(q);
            let dir = if dq < 0.0 { 1.0 } else { -1.0 };

            // Harris pass 1: relaxed step bound.
            let flip = self.model.upper[q] - self.model.lower[q];
            let mut relaxed = f64::INFINITY;
            for i in 0..self.m() {
                let a = self.col[i];
                if a.abs() < self.tol.pivot {
                    continue;
                }
                let rate = -dir * a;
                let (lo, hi) = self.effective_bounds(self.basis[i], phase1);
                let t = if rate < 0.0 {
                    (self.x[self.basis[i]] - lo + feas) / -rate
                } else {
                    (hi + feas - self.x[self.basis[i]]) / rate
                };
                if t < relaxed {
                    relaxed = t;
                }
            }
            if relaxed.is_infinite() && flip.is_infinite() {
                if phase1 {
                    return Err(LpError::NumericalFailure("unbounded phase-1 ray".into()));
                }
                return Ok(LpStatus::Unbounded);
            }
            // Harris pass 2: largest pivot among the admissible ratios.
            let mut leave: Option<(usize, f64, f64, Status)> = None;
            let mut leave_mag = 0.0;
            for i in 0..self.m() {
                let a = self.col[i];
                if a.abs() < self.tol.pivot {
                    continue;
                }
                let rate = -dir * a;
                let j = self.basis[i];
                let (lo, hi) = self.effective_bounds(j, phase1);
                let (t, bound) = if rate < 0.0 {
                    ((self.x[j] - lo) / -rate, lo)
                } else {
                    ((hi - self.x[j]) / rate, hi)
                };
                if !t.is_finite() || t > relaxed {
                    continue;
                }
                let better = if bland {
                    match leave {
                        None => true,
                        Some((li, _, _, _)) => j < self.basis[li],
                    }
                } else {
                    a.abs() > leave_mag
                };
                if better {
                    leave_mag = a.abs();
                    let st = if bound == self.model.upper[j] { Status::AtUpper } else { Status::AtLower };
                    leave = Some((i, t.max(0.0), bound, st));
                }
            }
            let step = leave.map(|l| l.1).unwrap_or(f64::INFINITY);
            self.iterations += 1;
            if flip.is_finite() && flip <= step {
                // Bound flip: entering variable crosses to its other bound.
                let theta = flip;
                for i in 0..self.m() {
                    let j = self.basis[i];
                    self.x[j] -= theta * dir * self.col[i];
                }
                if dir > 0.0 {
                    self.x[q] = self.model.upper[q];
                    self.status[q] = Status::AtUpper;
                } else {
                    self.x[q] = self.model.lower[q];
                    self.status[q] = Status::AtLower;
                }
                degenerate = 0;
                bland = false;
                continue;
            }
            let (r, theta, bound, st) = leave.expect("finite step has a leaving row");
            for i in 0..self.m() {
                let j = self.basis[i];
                self.x[j] -= theta * dir * self.col[i];
            }
            self.x[q] += theta * dir;
            let out = self.basis[r];
            self.x[out] = bound;
            self.status[out] = st;
            self.pivot(r, q);
            if theta < 1e-12 {
                degenerate += 1;
                if degenerate > DEGENERATE_SWITCH {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    /// Ratio-test bounds of a basic variable. During phase 1 an infeasible
    /// variable may travel freely away from feasibility and stops at the
    /// violated bound when moving towards it.
    fn effective_bounds(&self, j: usize, phase1: bool) -> (f64, f64) {
        let (l, u, v) = (self.model.lower[j], self.model.upper[j], self.x[j]);
        if phase1 {
            if v < l - self.tol.feas {
                return (f64::NEG_INFINITY, l);
            }
            if v > u + self.tol.feas {
                return (u, f64::INFINITY);
            }
        }
        (l, u)
    }

    fn dual_feasible(&mut self) -> bool {
        self.load_real_costs();
        let tol = self.tol.dual * 10.0;
        for j in 0..self.x.len() {
            let st = self.status[j];
            if st == Status::Basic || self.model.lower[j] == self.model.upper[j] {
                continue;
            }
            let d = self.reduced_cost(j, false);
            let bad = match st {
                Status::AtLower => d < -tol,
                Status::AtUpper => d > tol,
                Status::Free => d.abs() > tol,
                Status::Basic => false,
            };
            if bad {
                return false;
            }
        }
        true
    }

    fn dual(&mut self, max_iter: usize) -> Result<Outcome, LpError> {
        if !self.dual_feasible() {
            return Ok(Outcome::GiveUp);
        }
        let m = self.m();
        let total = self.x.len();
        let mut alpha = vec![0.0; total];
        let mut retried = false;
        loop {
            if self.iterations > max_iter {
                return Ok(Outcome::GiveUp);
            }
            self.maybe_refactor()?;
            let mut r = None;
            let mut worst = self.tol.feas;
            for i in 0..m {
                let v = self.infeasibility(self.basis[i]);
                if v > worst {
                    worst = v;
                    r = Some(i);
                }
            }
            let Some(r) = r else {
                return Ok(Outcome::Done(LpStatus::Optimal));
            };
            let p = self.basis[r];
            let going_up = self.x[p] < self.model.lower[p];
            let target = if going_up { self.model.lower[p] } else { self.model.upper[p] };

            self.load_real_costs();
            let rho = &self.binv[r * m..(r + 1) * m];
            let mut relaxed = f64::INFINITY;
            for j in 0..total {
                let st = self.status[j];
                if st == Status::Basic || self.model.lower[j] == self.model.upper[j] {
                    alpha[j] = 0.0;
                    continue;
                }
                let a = self.model.dot_column(j, rho);
                alpha[j] = a;
                if !eligible(st, a, going_up, self.tol.pivot) {
                    continue;
                }
                let d = self.reduced_cost(j, false);
                let t = (d.abs() + self.tol.dual) / a.abs();
                if t < relaxed {
                    relaxed = t;
                }
            }
            if relaxed.is_infinite() {
                return Ok(Outcome::Done(LpStatus::Infeasible));
            }
            let mut q = None;
            let mut mag = 0.0;
            for j in 0..total {
                let a = alpha[j];
                let st = self.status[j];
                if a == 0.0 || st == Status::Basic || !eligible(st, a, going_up, self.tol.pivot) {
                    continue;
                }
                let d = self.reduced_cost(j, false);
                if d.abs() / a.abs() <= relaxed && a.abs() > mag {
                    mag = a.abs();
                    q = Some(j);
                }
            }
            let q = q.expect("relaxed ratio admits at least one column");
            self.ftran(q);
            let pr = self.col[r];
            if (pr - alpha[q]).abs() > 1e-7 * (1.0 + pr.abs()) || pr.abs() < self.tol.pivot {
                if retried {
                    return Ok(Outcome::GiveUp);
                }
                retried = true;
                self.refactor()?;
                self.compute_xb();
                continue;
            }
            retried = false;
            self.iterations += 1;
            let theta = (self.x[p] - target) / pr;
            for i in 0..m {
                let j = self.basis[i];
                self.x[j] -= theta * self.col[i];
            }
            self.x[q] += theta;
            self.x[p] = target;
            self.status[p] = if going_up { Status::AtLower } else { Status::AtUpper };
            self.pivot(r, q);
        }
    }

    fn finish(&mut self, status: LpStatus) -> LpSolution {
        let (m, n) = (self.model.m, self.model.n);
        if status != LpStatus::Optimal {
            return LpSolution::not_optimal(status, n, m, self.iterations);
        }
        self.load_real_costs();
        let primal = self.x[..n].to_vec();
        let objective = primal.iter().zip(&self.model.cost).map(|(x, c)| x * c).sum();
        let reduced_costs = (0..n)
            .map(|j| if self.status[j] == Status::Basic { 0.0 } else { self.reduced_cost(j, false) })
            .collect();
        LpSolution {
            status,
            objective,
            primal,
            duals: self.y.clone(),
            reduced_costs,
            iterations: self.iterations,
        }
    }

    fn warm_start(&mut self) -> Result<WarmStart, LpError> {
        self.refactor()?;
        Ok(WarmStart {
            m: self.model.m,
            n: self.model.n,
            fingerprint: self.model.fingerprint,
            basis: self.basis.clone(),
            status: self.status.clone(),
            binv: Arc::new(self.binv.clone()),
        })
    }
}

fn eligible(st: Status, a: f64, going_up: bool, piv: f64) -> bool {
    match (st, going_up) {
        (Status::AtLower, true) => a < -piv,
        (Status::AtUpper, true) => a > piv,
        (Status::AtLower, false) => a > piv,
        (Status::AtUpper, false) => a < -piv,
        (Status::Free, _) => a.abs() > piv,
        (Status::Basic, _) => false,
    }
}

fn iteration_cap(model: &Model) -> usize {
    50 * (model.n + model.m) + 1000
}

fn cold_solve<'a>(model: &'a Model, tol: &Tolerances) -> Result<(LpSolution, Engine<'a>), LpError> {
    let mut eng = Engine::cold(model, *tol);
    let status = eng.primal(iteration_cap(model))?;
    let sol = eng.finish(status);
    Ok((sol, eng))
}

/// Solves `p` from the all-logical basis.
pub fn solve(p: &LpProblem, tol: &Tolerances) -> Result<LpSolution, LpError> {
    let model = Model::new(p)?;
    if model.m == 0 {
        return solve_unconstrained(p);
    }
    Ok(cold_solve(&model, tol)?.0)
}

/// Like [`solve`], additionally returning the optimal basis for warm starts.
pub fn solve_with_basis(
    p: &LpProblem,
    tol: &Tolerances,
) -> Result<(LpSolution, Option<WarmStart>), LpError> {
    let model = Model::new(p)?;
    if model.m == 0 {
        return Ok((solve_unconstrained(p)?, None));
    }
    let (sol, mut eng) = cold_solve(&model, tol)?;
    let ws = if sol.is_optimal() { Some(eng.warm_start()?) } else { None };
    Ok((sol, ws))
}

/// Solves `p` starting from `ws`. The result depends only on `(p, ws)`. A
/// basis recorded for a different matrix is ignored and `p` is solved cold.
pub fn solve_warm(p: &LpProblem, ws: &WarmStart, tol: &Tolerances) -> Result<LpSolution, LpError> {
    let model = Model::new(p)?;
    if model.m == 0 || ws.m != model.m || ws.n != model.n || ws.fingerprint != model.fingerprint {
        return solve(p, tol);
    }
    let mut eng = Engine::warm(&model, *tol, ws);
    let cap = iteration_cap(&model);
    match eng.dual(cap) {
        Ok(Outcome::Done(st)) => return Ok(eng.finish(st)),
        Ok(Outcome::GiveUp) => {}
        Err(_) => return solve(p, tol),
    }
    match eng.primal(cap) {
        Ok(st) => Ok(eng.finish(st)),
        Err(_) => solve(p, tol),
    }
}

fn solve_unconstrained(p: &LpProblem) -> Result<LpSolution, LpError> {
    let mut x = Vec::with_capacity(p.num_vars());
    for v in p.vars() {
        let val = if v.cost > 0.0 {
            v.lower
        } else if v.cost < 0.0 {
            v.upper
        } else if v.lower.is_finite() {
            v.lower
        } else if v.upper.is_finite() {
            v.upper
        } else {
            0.0
        };
        if !val.is_finite() {
            return Ok(LpSolution::not_optimal(LpStatus::Unbounded, p.num_vars(), 0, 0));
        }
        x.push(val);
    }
    let objective = x.iter().zip(p.vars()).map(|(x, v)| x * v.cost).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        objective,
        primal: x,
        duals: Vec::new(),
        reduced_costs: p.vars().iter().map(|v| v.cost).collect(),
        iterations: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{Sense, VarId};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn single_lower_bound_row() {
        let mut p = LpProblem::new();
        let x = p.add_var("x", 0.0, f64::INFINITY, 1.0);
        let r = p.add_row("c", vec![(x, 1.0)], Sense::Ge, 3.0);
        let s = solve(&p, &tol()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-12);
        assert!((s.dual(r) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_row_dual_is_negative() {
        let mut p = LpProblem::new();
        let a = p.add_var("a", 0.0, f64::INFINITY, -1.0);
        let b = p.add_var("b", 0.0, f64::INFINITY, -1.0);
        let r = p.add_row("budget", vec![(a, 1.0), (b, 1.0)], Sense::Le, 1.0);
        let s = solve(&p, &tol()).unwrap();
        assert!((s.objective + 1.0).abs() < 1e-12);
        assert!((s.dual(r) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded_are_statuses() {
        let mut p = LpProblem::new();
        let x = p.add_var("x", 0.0, 1.0, 1.0);
        p.add_row("c", vec![(x, 1.0)], Sense::Ge, 2.0);
        assert_eq!(solve(&p, &tol()).unwrap().status, LpStatus::Infeasible);

        let mut q = LpProblem::new();
        let x = q.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        let y = q.add_var("y", 0.0, f64::INFINITY, 0.0);
        q.add_row("c", vec![(x, 1.0), (y, 1.0)], Sense::Le, 5.0);
        assert_eq!(solve(&q, &tol()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_and_equalities() {
        // min |x - 2| via x - 2 = u - v, u, v >= 0.
        let mut p = LpProblem::new();
        let x = p.add_var("x", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        let u = p.add_var("u", 0.0, f64::INFINITY, 1.0);
        let v = p.add_var("v", 0.0, f64::INFINITY, 1.0);
        p.add_row("def", vec![(x, 1.0), (u, -1.0), (v, 1.0)], Sense::Eq, 2.0);
        p.add_row("cap", vec![(x, 1.0)], Sense::Le, 1.0);
        let s = solve(&p, &tol()).unwrap();
        assert!((s.objective - 1.0).abs() < 1e-10);
        assert!((s.value(x) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn boxed_variables_use_bound_flips() {
        let mut p = LpProblem::new();
        let vars: Vec<VarId> = (0..5).map(|i| p.add_var(format!("x{i}"), 0.0, 1.0, -(i as f64) - 1.0)).collect();
        p.add_row("sum", vars.iter().map(|&v| (v, 1.0)).collect(), Sense::Le, 10.0);
        let s = solve(&p, &tol()).unwrap();
        assert!((s.objective + 15.0).abs() < 1e-10);
        assert!(s.dual(crate::lp::RowId(0)).abs() < 1e-12);
    }

    #[test]
    fn warm_start_matches_cold_after_rhs_change() {
        let mut p = LpProblem::new();
        let a = p.add_var("a", 0.0, 10.0, 2.0);
        let b = p.add_var("b", 0.0, 10.0, 3.0);
        let c = p.add_var("c", 0.0, 10.0, 1.5);
        let d = p.add_row("demand", vec![(a, 1.0), (b, 1.0), (c, 1.0)], Sense::Ge, 12.0);
        p.add_row("mix", vec![(a, 1.0), (c, -1.0)], Sense::Ge, -2.0);
        let (s0, ws) = solve_with_basis(&p, &tol()).unwrap();
        assert!(s0.is_optimal());
        let ws = ws.unwrap();
        for rhs in [3.0, 8.0, 15.0, 22.0, 29.0] {
            p.set_rhs(d, rhs);
            let cold = solve(&p, &tol()).unwrap();
            let warm = solve_warm(&p, &ws, &tol()).unwrap();
            assert!((cold.objective - warm.objective).abs() < 1e-9, "rhs {rhs}");
        }
    }

    #[test]
    fn warm_start_on_other_matrix_falls_back() {
        let mut p = LpProblem::new();
        let a = p.add_var("a", 0.0, 10.0, 1.0);
        p.add_row("r", vec![(a, 1.0)], Sense::Ge, 1.0);
        let (_, ws) = solve_with_basis(&p, &tol()).unwrap();
        let mut q = LpProblem::new();
        let a = q.add_var("a", 0.0, 10.0, 1.0);
        q.add_row("r", vec![(a, 2.0)], Sense::Ge, 1.0);
        let s = solve_warm(&q, &ws.unwrap(), &tol()).unwrap();
        assert!((s.objective - 0.5).abs() < 1e-12);
    }
}
