//! Jain's index and the Gini index on hand-made ratio vectors, then the
//! generation and earnings ratios a ledger produces.
//!
//! cargo run --release --example fairness_metrics

use faircurtail::dispatch::bill_value;
use faircurtail::metrics::{
    curtailment_percent, earnings_ratios, generation_ratios, gini, jfi, SimulationLedger, StepRecord,
};

fn main() -> faircurtail::Result<()> {
    let vectors: [(&str, Vec<f64>); 5] = [
        ("equal", vec![0.8; 6]),
        ("one plant idle", vec![1.0, 1.0, 1.0, 1.0, 1.0, 0.0]),
        ("linear spread", vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]),
        ("one plant served", vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
        ("feeder-end penalty", vec![1.0, 1.0, 0.95, 0.85, 0.7, 0.5]),
    ];
    println!("{:>20} {:>8} {:>8}", "ratios", "JFI", "Gini");
    for (name, x) in &vectors {
        println!("{name:>20} {:>8.4} {:>8.4}", jfi(x)?, gini(x)?);
    }

    // two plants over one hour: the near one exports freely, the far one
    // loses half its output to curtailment; both serve a 2 kW local load
    let (c_im, c_fit) = (0.3, 0.1);
    let mut ledger = SimulationLedger::new(2);
    for step in 0..4 {
        for (plant, real_kw) in [(0, 8.0), (1, 4.0)] {
            let (mpp_kw, load_kw) = (8.0, 2.0);
            let (e, pot, load) = (real_kw * 0.25, mpp_kw * 0.25, load_kw * 0.25);
            ledger.push(StepRecord {
                step,
                plant,
                p_set: real_kw,
                q_set: 0.0,
                p_real: real_kw,
                q_real: 0.0,
                mpp: mpp_kw,
                load: load_kw,
                energy_real: e,
                energy_potential: pot,
                bill_real: bill_value(e, load, c_im, c_fit),
                bill_potential: bill_value(pot, load, c_im, c_fit),
            })?;
        }
    }
    let g = generation_ratios(&ledger);
    let e = earnings_ratios(&ledger);
    println!("\ncurtailment {:.1} %", curtailment_percent(&ledger)?);
    println!("generation ratios {g:.3?}: JFI {:.4}, Gini {:.4}", jfi(&g)?, gini(&g)?);
    println!("earnings ratios   {e:.3?}: JFI {:.4}, Gini {:.4}", jfi(&e)?, gini(&e)?);
    for (l, t) in ledger.totals().iter().enumerate() {
        println!("  plant {l}: bill {:.3} realized vs {:.3} uncurtailed", t.bill_real, t.bill_potential);
    }
    Ok(())
}
