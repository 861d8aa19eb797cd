//! Fairness against curtailment on the CIGRE low-voltage feeder: every
//! fairness variant over a range of weights, one day each, in parallel.
//!
//! cargo run --release --example pareto_sweep [out_dir]

use faircurtail::dispatch::{DispatchConfig, Objective, Variant};
use faircurtail::grid::Scenario;
use faircurtail::sim::output::write_sweep_outputs;
use faircurtail::sim::{pareto_sweep, synth_profiles, SimOptions};
use std::path::{Path, PathBuf};

fn main() -> faircurtail::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("faircurtail-sweep"));
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/scenarios/cigre_lv.toml");
    let net = Scenario::load(path)?.load_network()?;
    let profiles = synth_profiles(1, 15, 42)?;
    let cfg = DispatchConfig { objective: Objective::Bill, ..Default::default() };
    let weights = [0.0, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0];
    let rows = pareto_sweep(&net, &cfg, &profiles, &SimOptions::default(), &Variant::SWEEP, &weights)?;

    println!("{}: bill objective, one day", net.name);
    println!("{:>6} {:>7} {:>10} {:>8} {:>8}", "var", "w", "curt %", "JFI", "Gini");
    for r in &rows {
        match (r.last(), &r.error) {
            (Some(m), None) => {
                println!("{:>6} {:>7} {:>10.2} {:>8.4} {:>8.4}", r.variant.label(), r.w, m.curtail_pct, m.jfi, m.gini)
            }
            (_, e) => println!("{:>6} {:>7} failed: {e:?}", r.variant.label(), r.w),
        }
    }
    write_sweep_outputs(&out, &rows, &cfg)?;
    println!("\nmetrics.csv and report.json in {}", out.display());
    Ok(())
}
