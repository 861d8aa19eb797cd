//! One dispatch on the 33-bus feeder at a sunny, lightly loaded instant:
//! the plain curtailment LP next to the fairness-aware variants, including
//! a past-aware run that knows the far plants were curtailed before.
//!
//! cargo run --release --example dispatch_step

use faircurtail::dispatch::{dispatch_step, DispatchConfig, HistoryTerms, TimestepInputs, Variant};
use faircurtail::grid::Scenario;
use faircurtail::powerflow::{InjectionVector, PowerFlow};
use faircurtail::sensitivity::voltage_sensitivities;
use std::path::Path;

fn main() -> faircurtail::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/case33.toml");
    let net = Scenario::load(path)?.load_network()?;
    let pf = PowerFlow::new(&net)?;
    let (nom_p, nom_q) = net.nominal_bus_loads();
    let load_p: Vec<f64> = nom_p.iter().map(|v| 0.3 * v).collect();
    let load_q: Vec<f64> = nom_q.iter().map(|v| 0.3 * v).collect();
    let mpp: Vec<f64> = net.pv_plants.iter().map(|pv| 0.95 * pv.p_capacity).collect();

    // operating point: the previous step ran uncurtailed at the same MPP
    let mut inj = InjectionVector { p: load_p.iter().map(|v| -v).collect(), q: load_q.iter().map(|v| -v).collect() };
    for (pv, m) in net.pv_plants.iter().zip(&mpp) {
        inj.p[pv.bus] += m;
    }
    let base = pf.solve(&inj, 1.0)?;
    let vmax = base.v_mag.iter().cloned().fold(f64::MIN, f64::max);
    println!("uncurtailed operating point: max |v| = {vmax:.4}");
    let sens = voltage_sensitivities(&net, &base)?;

    let np = net.pv_plants.len();
    let kwh_per_pu = net.base_mva * 1000.0 * 0.25;
    // a day in which the last four plants kept only 60 % of their energy
    let past: Vec<HistoryTerms> = (0..np)
        .map(|l| {
            let pot = 20.0 * kwh_per_pu * mpp[l];
            HistoryTerms { realized: if l >= 4 { 0.6 * pot } else { pot }, potential: pot }
        })
        .collect();

    let cases = [
        ("unfair", Variant::Unfair, 0.0, false),
        ("F0P0 w=0.02", Variant::F0P0, 0.02, false),
        ("F0P0 w=0.1", Variant::F0P0, 0.1, false),
        ("F0P0 w=5", Variant::F0P0, 5.0, false),
        ("F0P1 w=0.1", Variant::F0P1, 0.1, true),
        ("F0P1 w=5", Variant::F0P1, 5.0, true),
    ];
    print!("{:>12}", "plant bus");
    for pv in &net.pv_plants {
        print!("{:>8}", net.buses[pv.bus].id);
    }
    println!("{:>10}{:>8}", "curt kW", "gamma");
    for (label, variant, w, with_past) in cases {
        let cfg = DispatchConfig::default().with_variant(variant, w);
        let ins = TimestepInputs {
            sens: &sens,
            load_p: load_p.clone(),
            load_q: load_q.clone(),
            mpp_forecast: mpp.clone(),
            alpha: vec![1.0; np],
            history: if with_past { past.clone() } else { vec![HistoryTerms::default(); np] },
        };
        let res = dispatch_step(&net, &cfg, &ins)?;
        print!("{label:>12}");
        let mut curt = 0.0;
        for (l, sp) in res.setpoints.iter().enumerate() {
            print!("{:>8.3}", sp.p / mpp[l]);
            curt += net.pu_to_kw(mpp[l] - sp.p);
        }
        let gamma = res.gamma.map(|g| format!("{g:.3}")).unwrap_or_else(|| "-".into());
        println!("{curt:>10.1}{gamma:>8}");
    }
    println!("(entries are p / MPP per plant)");
    Ok(())
}
