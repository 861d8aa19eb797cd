//! The bounded-variable simplex on its own: a small production-planning LP
//! with mixed row types, its duals, and the infeasible and unbounded cases.
//!
//! cargo run --release --example lp_solve

use faircurtail::linprog::{solve_lp, LpProblem, Relation};

fn main() -> faircurtail::Result<()> {
    // maximize 3x + 5y  ->  minimize -3x - 5y
    let mut lp = LpProblem::new();
    let x = lp.add_var("x", 0.0, 4.0, -3.0);
    let y = lp.add_var("y", 0.0, f64::INFINITY, -5.0);
    lp.add_row("labour", &[(y, 2.0)], Relation::Le, 12.0);
    lp.add_row("machine", &[(x, 3.0), (y, 2.0)], Relation::Le, 18.0);
    lp.add_row("contract", &[(x, 1.0), (y, 1.0)], Relation::Ge, 2.0);
    let sol = solve_lp(&lp)?;
    println!("status {} after {} pivots, objective {:.4}", sol.status, sol.iterations, sol.objective_value);
    for (name, v) in lp.names.iter().zip(&sol.x) {
        println!("  {name} = {v:.4}");
    }
    for (c, y) in lp.constraints.iter().zip(&sol.row_duals) {
        println!("  dual[{}] = {y:.4}", c.name);
    }
    println!("  max violation {:.1e}", lp.max_violation(&sol.x));

    let mut bad = LpProblem::new();
    let a = bad.add_var("a", 0.0, 1.0, 1.0);
    bad.add_row("too_much", &[(a, 1.0)], Relation::Ge, 2.0);
    println!("\nx <= 1, x >= 2: {}", solve_lp(&bad)?.status);

    let mut open = LpProblem::new();
    let b = open.add_var("b", 0.0, f64::INFINITY, -1.0);
    open.add_row("floor", &[(b, 1.0)], Relation::Ge, 1.0);
    println!("minimize -b, b >= 1: {}", solve_lp(&open)?.status);

    println!("\nLP text form:\n{}", lp.to_lp_text());
    Ok(())
}
