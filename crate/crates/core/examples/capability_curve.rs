//! Inverter envelope: the polygon of tangent cuts around the rated circle,
//! intersected with the power-factor cone, and how realization clamps a
//! setpoint against the actual MPP.
//!
//! cargo run --release --example capability_curve

use faircurtail::pv::{capability_cuts, feasible_q_bounds, realize_setpoint, PvSetpoint};

fn main() -> faircurtail::Result<()> {
    let s = 1.1;
    let xi = 0.33;
    for k in [2, 4, 8, 16] {
        let cuts = capability_cuts(s, k)?;
        // worst outward overshoot sits at the vertices
        let overshoot = 1.0 / (std::f64::consts::FRAC_PI_4 / k as f64).cos() - 1.0;
        println!("K = {k:>2}: p_limit {:.4}, worst radius overshoot {:.3} %", cuts.p_limit(), 100.0 * overshoot);
    }

    let cuts = capability_cuts(s, 8)?;
    println!("\nK = 8 cuts m p + |q| <= n:");
    for (m, n) in &cuts.segments {
        println!("  m = {m:>8.4}  n = {n:>8.4}");
    }

    println!("\nreactive range at p (S = {s}, xi = {xi}):");
    println!("{:>6} {:>10} {:>10} {:>12}", "p", "cone", "polygon", "range");
    for p in [0.0, 0.2, 0.5, 0.8, 1.0, 1.05, 1.1, 1.2] {
        let range = feasible_q_bounds(p, xi, &cuts)
            .map(|(lo, hi)| format!("[{lo:.3}, {hi:.3}]"))
            .unwrap_or_else(|| "empty".into());
        println!("{p:>6.2} {:>10.3} {:>10.3} {range:>12}", xi * p, cuts.q_limit(p));
    }

    println!("\nrealizing setpoint (p 1.0, q -0.33) against a cloudier MPP:");
    let sp = PvSetpoint { p: 1.0, q: -0.33 };
    for mpp in [1.2, 1.0, 0.6, 0.2, 0.0] {
        let r = realize_setpoint(sp, mpp, xi, &cuts);
        println!("  mpp {mpp:.1}: p {:.3}, q {:.3}", r.p, r.q);
    }
    Ok(())
}
