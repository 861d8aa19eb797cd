//! Newton power flow on the 33-bus feeder: base load, then the same load
//! with all eight PV plants at full output and no control.
//!
//! cargo run --release --example power_flow

use faircurtail::grid::Scenario;
use faircurtail::powerflow::{check_voltage_limits, InjectionVector, PowerFlow};
use std::path::Path;

fn main() -> faircurtail::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/case33.toml");
    let net = Scenario::load(path)?.load_network()?;
    let pf = PowerFlow::new(&net)?;
    let (lp, lq) = net.nominal_bus_loads();
    println!("{}: {} buses, {} branches, {} PV plants", net.name, net.n_buses(), net.branches.len(), net.pv_plants.len());

    let mut inj = InjectionVector { p: lp.iter().map(|v| -v).collect(), q: lq.iter().map(|v| -v).collect() };
    let loaded = pf.solve(&inj, 1.0)?;
    report("peak load, no PV", &net, &loaded);

    // midday: 30 % of nominal load, PV at capacity
    for j in 0..net.n_buses() {
        inj.p[j] *= 0.3;
        inj.q[j] *= 0.3;
    }
    for pv in &net.pv_plants {
        inj.p[pv.bus] += pv.p_capacity;
    }
    let sunny = pf.solve(&inj, 1.0)?;
    report("light load, full PV", &net, &sunny);
    let viol = check_voltage_limits(&sunny, 0.95, 1.05)?;
    println!("  {} buses above 1.05:", viol.len());
    for v in viol.iter().take(8) {
        println!("    bus {:>3}  |v| = {:.4}  (+{:.4})", net.buses[v.bus].id, v.magnitude, v.excess);
    }
    Ok(())
}

fn report(label: &str, net: &faircurtail::grid::Network, sol: &faircurtail::powerflow::PfSolution) {
    let (imin, vmin) = sol.v_mag.iter().enumerate().fold((0, f64::MAX), |a, (i, &v)| if v < a.1 { (i, v) } else { a });
    let (imax, vmax) = sol.v_mag.iter().enumerate().fold((0, f64::MIN), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
    println!(
        "{label}: {} iterations, mismatch {:.1e}, |v| min {:.4} (bus {}), max {:.4} (bus {}), slack P = {:.1} kW",
        sol.iterations,
        sol.max_mismatch,
        vmin,
        net.buses[imin].id,
        vmax,
        net.buses[imax].id,
        net.pu_to_kw(sol.injections.p[net.slack_bus]),
    );
}
