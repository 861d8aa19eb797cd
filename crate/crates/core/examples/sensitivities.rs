//! Voltage sensitivities from the power-flow Jacobian, and how well the
//! linear model they define tracks the AC solution as an injection grows.
//!
//! cargo run --release --example sensitivities

use faircurtail::grid::Scenario;
use faircurtail::powerflow::{InjectionVector, PowerFlow};
use faircurtail::sensitivity::voltage_sensitivities;
use std::path::Path;

fn main() -> faircurtail::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/case33.toml");
    let net = Scenario::load(path)?.load_network()?;
    let pf = PowerFlow::new(&net)?;
    let (lp, lq) = net.nominal_bus_loads();
    let inj = InjectionVector { p: lp.iter().map(|v| -0.5 * v).collect(), q: lq.iter().map(|v| -0.5 * v).collect() };
    let base = pf.solve(&inj, 1.0)?;
    let sens = voltage_sensitivities(&net, &base)?;

    let end = net.bus_by_id(18).expect("bus 18");
    let mid = net.bus_by_id(9).expect("bus 9");
    println!("d|v| / dp and d|v| / dq at half load (per p.u. on a {} MVA base):", net.base_mva);
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "bus", "Kp(.,9)", "Kq(.,9)", "Kp(.,18)", "Kq(.,18)");
    for id in [2, 6, 9, 12, 15, 18, 22, 33] {
        let i = net.bus_by_id(id).expect("bus");
        println!(
            "{id:>6} {:>12.5} {:>12.5} {:>12.5} {:>12.5}",
            sens.kp[(i, mid)],
            sens.kq[(i, mid)],
            sens.kp[(i, end)],
            sens.kq[(i, end)]
        );
    }

    println!("\ninjecting P at bus 18: linear vs AC |v_18|");
    println!("{:>8} {:>10} {:>10} {:>10}", "kW", "linear", "AC", "error");
    for kw in [10.0, 100.0, 500.0, 1000.0, 2000.0] {
        let mut step = inj.clone();
        step.p[end] += net.kw_to_pu(kw);
        let lin = sens.predict_voltages(&step)?[end];
        let ac = pf.solve(&step, 1.0)?.v_mag[end];
        println!("{kw:>8.0} {lin:>10.5} {ac:>10.5} {:>10.2e}", lin - ac);
    }
    Ok(())
}
