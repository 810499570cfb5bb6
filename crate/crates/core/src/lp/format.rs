use std::fmt::Write;

use super::{LpProblem, Sense};

/// Renders `p` in CPLEX LP text format. Variables and rows keep their
/// declaration order and every bound is written explicitly.
pub fn write_lp_format(p: &LpProblem) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let mut any = false;
    for v in p.vars() {
        if v.cost != 0.0 {
            push_term(&mut out, v.cost, &v.name, !any);
            any = true;
        }
    }
    if !any {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for r in p.rows() {
        let _ = write!(out, " {}:", r.name);
        if r.coeffs.is_empty() {
            out.push_str(" 0");
        }
        for (k, &(v, a)) in r.coeffs.iter().enumerate() {
            push_term(&mut out, a, &p.var(v).name, k == 0);
        }
        let op = match r.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", r.rhs);
    }
    out.push_str("Bounds\n");
    for v in p.vars() {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {} free", v.name);
            }
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(out, " {} = {}", v.name, v.lower);
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
            }
            (true, false) => {
                let _ = writeln!(out, " {} >= {}", v.name, v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {} <= {}", v.name, v.upper);
            }
        }
    }
    out.push_str("End\n");
    out
}

fn push_term(out: &mut String, a: f64, name: &str, first: bool) {
    let sign = if a < 0.0 { "-" } else { "+" };
    if first && a >= 0.0 {
        let _ = write!(out, " {} {name}", a);
    } else {
        let _ = write!(out, " {sign} {} {name}", a.abs());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_sections_in_order() {
        let mut p = LpProblem::new();
        let x = p.add_var("x", 0.0, 4.0, 1.5);
        let y = p.add_var("y", f64::NEG_INFINITY, f64::INFINITY, -2.0);
        p.add_row("cap", vec![(x, 1.0), (y, -1.0)], Sense::Le, 3.0);
        let text = write_lp_format(&p);
        assert_eq!(
            text,
            "Minimize\n obj: 1.5 x - 2 y\nSubject To\n cap: 1 x - 1 y <= 3\nBounds\n 0 <= x <= 4\n y free\nEnd\n"
        );
    }
}
