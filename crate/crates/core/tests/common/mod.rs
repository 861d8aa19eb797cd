#![allow(dead_code)]

use faircurtail::grid::{Branch, Bus, BusKind, Network, PvPlant, Scenario};
use faircurtail::metrics::{SimulationLedger, StepRecord};
use faircurtail::powerflow::{InjectionVector, PfSolution};
use faircurtail::sensitivity::SensitivityMatrices;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::path::PathBuf;

pub const SCENARIOS: [&str; 4] = ["case33", "case69", "case141", "cigre_lv"];

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn scenario_network(name: &str) -> Network {
    let path = data_dir().join("scenarios").join(format!("{name}.toml"));
    Scenario::load(&path).and_then(|s| s.load_network()).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Three-bus chain on a 1 kVA base (1 p.u. = 1 kW) with plants at the middle
/// and end bus and hand-set sensitivities. At full output the end bus sits
/// well above 1.05.
pub fn oracle_instance() -> (Network, SensitivityMatrices) {
    let buses = (0..3)
        .map(|i| Bus {
            index: i,
            id: i + 1,
            kind: if i == 0 { BusKind::Slack } else { BusKind::Pq },
            base_kv: 0.4,
            gs: 0.0,
            bs: 0.0,
        })
        .collect();
    let branches = vec![
        Branch { from: 0, to: 1, r: 0.02, x: 0.01, b_shunt: 0.0 },
        Branch { from: 1, to: 2, r: 0.02, x: 0.01, b_shunt: 0.0 },
    ];
    let plants = (1..3)
        .map(|b| PvPlant { id: b, bus: b, s_rated: 2.0, p_capacity: 1.0, xi: 0.5 })
        .collect();
    let net = Network::new("oracle3", 0.001, buses, branches, vec![], plants).unwrap();
    let kp = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 0.025, 0.025, 0.0, 0.05, 0.1]);
    let kq = &kp * 0.4;
    let v_mag = vec![1.0, 1.0, 0.978];
    let base = PfSolution {
        v: v_mag.iter().map(|&m| Complex64::new(m, 0.0)).collect(),
        v_mag,
        injections: InjectionVector::zeros(3),
        iterations: 1,
        max_mismatch: 0.0,
    };
    (net, SensitivityMatrices { kp, kq, base_point: base })
}

/// Ledger with one booked step per plant: `(real, potential)` energies and
/// bills taken as plain export earnings at `c_fit`.
pub fn ledger_with(history: &[(f64, f64)], c_fit: f64) -> SimulationLedger {
    let mut ledger = SimulationLedger::new(history.len());
    for (plant, &(real, pot)) in history.iter().enumerate() {
        ledger
            .push(StepRecord {
                step: 0,
                plant,
                p_set: real,
                q_set: 0.0,
                p_real: real,
                q_real: 0.0,
                mpp: pot,
                load: 0.0,
                energy_real: real,
                energy_potential: pot,
                bill_real: -c_fit * real,
                bill_potential: -c_fit * pot,
            })
            .unwrap();
    }
    ledger
}
