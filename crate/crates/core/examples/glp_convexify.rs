//! Convexifies a two-variable quadratic program by sampling each cost at a
//! few points, then densifies the samples.
//!
//! `cargo run --example glp_convexify`

use gridsddp::lp::{solve, LpProblem, Sense, Tolerances};
use gridsddp::stage::add_glp_term;

fn f1(x: f64) -> f64 {
    0.5 * x * x - 2.0 * x
}

fn f2(x: f64) -> f64 {
    x * x - 6.0 * x
}

fn solve_sampled(x1: &[f64], x2: &[f64]) -> anyhow::Result<(f64, f64, f64)> {
    let mut lp = LpProblem::new();
    let a = lp.add_var("x1", 0.0, f64::INFINITY, 0.0);
    let b = lp.add_var("x2", 0.0, f64::INFINITY, 0.0);
    let pts1: Vec<(f64, f64)> = x1.iter().map(|&x| (x, f1(x))).collect();
    let pts2: Vec<(f64, f64)> = x2.iter().map(|&x| (x, f2(x))).collect();
    add_glp_term(&mut lp, "x1", a, &pts1);
    add_glp_term(&mut lp, "x2", b, &pts2);
    lp.add_row("c1", vec![(a, 1.0), (b, 1.0)], Sense::Le, 1.75);
    lp.add_row("c2", vec![(a, -1.0), (b, 2.0)], Sense::Le, 2.2);
    lp.add_row("c3", vec![(a, 2.0), (b, 1.0)], Sense::Le, 4.7);
    let sol = solve(&lp, &Tolerances::default())?;
    Ok((sol.value(a), sol.value(b), sol.objective))
}

fn main() -> anyhow::Result<()> {
    let grids: [(&[f64], &[f64]); 3] = [
        (&[3.0, 31.0, 0.0], &[7.0, 21.0, 0.0]),
        (&[3.0, 31.0, 0.0, 9.0], &[7.0, 21.0, 0.0, 5.0]),
        (&[3.0, 31.0, 0.0, 9.0, 0.5, 1.75], &[7.0, 21.0, 0.0, 5.0, 1.5, 1.25]),
    ];
    println!("points      x1        x2   sampled obj   true f(x)");
    for (x1, x2) in grids {
        let (a, b, obj) = solve_sampled(x1, x2)?;
        println!("{:>6}  {a:>8.5}  {b:>8.5}  {obj:>12.5}  {:>10.5}", x1.len(), f1(a) + f2(b));
    }
    Ok(())
}
