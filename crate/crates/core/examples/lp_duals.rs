//! Builds a small LP, reads its duals, checks strong duality, moves a
//! right-hand side and re-solves from the previous basis.
//!
//! `cargo run --example lp_duals`

use gridsddp::lp::{dual_check, solve_warm, solve_with_basis, write_lp_format, LpProblem, Sense, Tolerances};

fn main() -> anyhow::Result<()> {
    let tol = Tolerances::default();
    let mut lp = LpProblem::new();
    let cheap = lp.add_var("cheap", 0.0, 60.0, 12.0);
    let dear = lp.add_var("dear", 0.0, 100.0, 30.0);
    let demand = lp.add_row("demand", vec![(cheap, 1.0), (dear, 1.0)], Sense::Ge, 80.0);
    print!("{}", write_lp_format(&lp));

    let (sol, warm) = solve_with_basis(&lp, &tol)?;
    println!("cost {:.2}: cheap {:.1}, dear {:.1}", sol.objective, sol.value(cheap), sol.value(dear));
    println!("marginal cost of demand: {:.2}", sol.dual(demand));
    println!("worst dual vs finite-difference mismatch: {:.2e}", dual_check(&lp, &sol, 1e-6, &tol)?);

    let warm = warm.expect("an optimal basis");
    lp.set_rhs(demand, 50.0);
    let again = solve_warm(&lp, &warm, &tol)?;
    println!(
        "demand 50: cost {:.2}, marginal {:.2}, {} pivots from the old basis",
        again.objective,
        again.dual(demand),
        again.iterations
    );
    Ok(())
}
