//! Linear programming layer.
//!
//! [`LpProblem`] is a plain builder over named variables and named rows.
//! [`solve`] runs a dense bounded-variable revised simplex and returns an
//! [`LpSolution`] carrying primal values, row duals and reduced costs.
//!
//! Dual convention: for the minimization `min c'x`, the dual `pi[i]` of row
//! `i` is the first-order change of the optimal objective when that row's
//! right-hand side moves by `+1`. Binding `<=` rows therefore have
//! `pi <= 0` and binding `>=` rows have `pi >= 0`.

mod format;
mod simplex;

pub use format::write_lp_format;
pub use simplex::{solve, solve_warm, solve_with_basis, WarmStart};

use thiserror::Error;

/// Index of a variable in an [`LpProblem`], in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

/// Index of a constraint row in an [`LpProblem`], in declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RowId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A minimization problem `min c'x  s.t.  rows, lower <= x <= upper`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpProblem {
    vars: Vec<Variable>,
    rows: Vec<Constraint>,
}

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("variable `{name}` has lower bound {lower} above upper bound {upper}")]
    InvertedBounds { name: String, lower: f64, upper: f64 },
    #[error("row `{row}` references undeclared variable #{var}")]
    UnknownVariable { row: String, var: usize },
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Primal feasibility, absolute.
    pub feas: f64,
    /// Objective agreement, relative to `1 + |objective|`.
    pub opt: f64,
    /// Reduced-cost sign tolerance, absolute.
    pub dual: f64,
    /// Smallest pivot magnitude accepted in ratio tests.
    pub pivot: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { feas: 1e-7, opt: 1e-6, dual: 1e-9, pivot: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub primal: Vec<f64>,
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    /// Simplex pivots performed (both phases).
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    pub fn value(&self, var: VarId) -> f64 {
        self.primal[var.0]
    }

    pub fn dual(&self, row: RowId) -> f64 {
        self.duals[row.0]
    }

    pub fn reduced_cost(&self, var: VarId) -> f64 {
        self.reduced_costs[var.0]
    }

    pub(crate) fn not_optimal(status: LpStatus, n: usize, m: usize, iterations: usize) -> Self {
        Self {
            status,
            objective: f64::NAN,
            primal: vec![f64::NAN; n],
            duals: vec![f64::NAN; m],
            reduced_costs: vec![f64::NAN; n],
            iterations,
        }
    }
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, cost: f64) -> VarId {
        self.vars.push(Variable { name: name.into(), lower, upper, cost });
        VarId(self.vars.len() - 1)
    }

    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: Vec<(VarId, f64)>,
        sense: Sense,
        rhs: f64,
    ) -> RowId {
        self.rows.push(Constraint { name: name.into(), coeffs, sense, rhs });
        RowId(self.rows.len() - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Constraint] {
        &self.rows
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn row(&self, id: RowId) -> &Constraint {
        &self.rows[id.0]
    }

    pub fn set_rhs(&mut self, row: RowId, rhs: f64) {
        self.rows[row.0].rhs = rhs;
    }

    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) {
        let v = &mut self.vars[var.0];
        v.lower = lower;
        v.upper = upper;
    }

    pub fn set_cost(&mut self, var: VarId, cost: f64) {
        self.vars[var.0].cost = cost;
    }

    pub fn find_row(&self, name: &str) -> Option<RowId> {
        self.rows.iter().position(|r| r.name == name).map(RowId)
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.vars.iter().position(|v| v.name == name).map(VarId)
    }

    /// Checks the structural invariants: ordered bounds, known variables and
    /// finite data.
    pub fn check(&self) -> Result<(), LpError> {
        for v in &self.vars {
            if v.lower > v.upper || v.lower.is_nan() || v.upper.is_nan() {
                return Err(LpError::InvertedBounds {
                    name: v.name.clone(),
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if !v.cost.is_finite() || v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(LpError::NonFinite(v.name.clone()));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(LpError::NonFinite(r.name.clone()));
            }
            for &(var, a) in &r.coeffs {
                if var.0 >= self.vars.len() {
                    return Err(LpError::UnknownVariable { row: r.name.clone(), var: var.0 });
                }
                if !a.is_finite() {
                    return Err(LpError::NonFinite(r.name.clone()));
                }
            }
        }
        Ok(())
    }

    /// `a_i' x` for row `i`.
    pub fn row_activity(&self, row: RowId, x: &[f64]) -> f64 {
        self.rows[row.0].coeffs.iter().map(|&(v, a)| a * x[v.0]).sum()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for (v, &xv) in self.vars.iter().zip(x) {
            worst = worst.max(v.lower - xv).max(xv - v.upper);
        }
        for (i, r) in self.rows.iter().enumerate() {
            let act = self.row_activity(RowId(i), x);
            let viol = match r.sense {
                Sense::Le => act - r.rhs,
                Sense::Ge => r.rhs - act,
                Sense::Eq => (act - r.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    /// Dual objective `b'pi + sum_j d_j * bound_j`, where each reduced cost is
    /// paired with the bound it prices (zero for a free variable).
    pub fn dual_objective(&self, sol: &LpSolution) -> f64 {
        let mut z: f64 = self.rows.iter().zip(&sol.duals).map(|(r, &pi)| r.rhs * pi).sum();
        for (v, &d) in self.vars.iter().zip(&sol.reduced_costs) {
            let bound = if d > 0.0 {
                v.lower
            } else if d < 0.0 {
                v.upper
            } else {
                0.0
            };
            if bound.is_finite() {
                z += d * bound;
            }
        }
        z
    }
}

/// A solver behind the [`solve`] contract: optimal solutions carry duals in
/// the crate's sign convention, and infeasibility or unboundedness comes
/// back as a status.
pub trait LpSolver: Sync {
    fn solve(&self, problem: &LpProblem, tol: &Tolerances) -> Result<LpSolution, LpError>;
}

/// The built-in revised simplex.
#[derive(Clone, Copy, Debug, Default)]
pub struct Simplex;

impl LpSolver for Simplex {
    fn solve(&self, problem: &LpProblem, tol: &Tolerances) -> Result<LpSolution, LpError> {
        solve(problem, tol)
    }
}

/// Finite-difference audit of the row duals. Each row's right-hand side is
/// moved by `+eps`, the problem is re-solved, and the observed objective
/// change is compared with `pi * eps`. Returns the largest
/// `|dz - pi*eps| / (|pi*eps| + 1)` over all rows.
///
/// Degenerate problems can legitimately exceed any tolerance because their
/// duals are not unique.
pub fn dual_check(
    problem: &LpProblem,
    sol: &LpSolution,
    eps: f64,
    tol: &Tolerances,
) -> Result<f64, LpError> {
    dual_check_with(&Simplex, problem, sol, eps, tol)
}

/// [`dual_check`] re-solving with `solver`.
pub fn dual_check_with(
    solver: &dyn LpSolver,
    problem: &LpProblem,
    sol: &LpSolution,
    eps: f64,
    tol: &Tolerances,
) -> Result<f64, LpError> {
    if !sol.is_optimal() {
        return Err(LpError::NumericalFailure("dual_check needs an optimal solution".into()));
    }
    let mut worst = 0.0_f64;
    let mut perturbed = problem.clone();
    for i in 0..problem.num_rows() {
        let row = RowId(i);
        let rhs = problem.row(row).rhs;
        perturbed.set_rhs(row, rhs + eps);
        let re = solver.solve(&perturbed, tol)?;
        perturbed.set_rhs(row, rhs);
        let predicted = sol.dual(row) * eps;
        let observed = match re.status {
            LpStatus::Optimal => re.objective - sol.objective,
            _ => f64::INFINITY,
        };
        worst = worst.max((observed - predicted).abs() / (predicted.abs() + 1.0));
    }
    Ok(worst)
}
