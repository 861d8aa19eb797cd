//! Per-plant fairness state and population fairness indices.

use crate::error::{Error, Result};
use serde::Serialize;

/// Denominators smaller than this are treated as zero.
pub const RATIO_EPS: f64 = 1e-9;

/// One plant's outcome over one timestep. Energies in kWh, bills in
/// currency, powers in kW.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: usize,
    pub plant: usize,
    pub p_set: f64,
    pub q_set: f64,
    pub p_real: f64,
    pub q_real: f64,
    pub mpp: f64,
    pub load: f64,
    pub energy_real: f64,
    pub energy_potential: f64,
    pub bill_real: f64,
    pub bill_potential: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct PlantTotals {
    pub energy_real: f64,
    pub energy_potential: f64,
    pub bill_real: f64,
    pub bill_potential: f64,
}

/// Append-only per-plant history with running totals.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SimulationLedger {
    totals: Vec<PlantTotals>,
    records: Vec<StepRecord>,
}

impl SimulationLedger {
    pub fn new(n_plants: usize) -> Self {
        SimulationLedger { totals: vec![PlantTotals::default(); n_plants], records: Vec::new() }
    }

    pub fn n_plants(&self) -> usize {
        self.totals.len()
    }

    pub fn totals(&self) -> &[PlantTotals] {
        &self.totals
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn push(&mut self, rec: StepRecord) -> Result<()> {
        if rec.plant >= self.totals.len() {
            return Err(Error::Dimension { expected: self.totals.len(), got: rec.plant + 1 });
        }
        let tol = 1e-9 * (1.0 + rec.energy_potential.abs());
        if rec.energy_real < -tol || rec.energy_real > rec.energy_potential + tol {
            return Err(Error::Validation(format!(
                "plant {} at step {}: realized {} kWh outside [0, {}]",
                rec.plant, rec.step, rec.energy_real, rec.energy_potential
            )));
        }
        let t = &mut self.totals[rec.plant];
        t.energy_real += rec.energy_real;
        t.energy_potential += rec.energy_potential;
        t.bill_real += rec.bill_real;
        t.bill_potential += rec.bill_potential;
        self.records.push(rec);
        Ok(())
    }
}

/// Realized over potential export earnings; `None` when nothing could
/// have been earned.
pub fn earnings_ratio(ledger: &SimulationLedger, plant: usize) -> Option<f64> {
    let t = ledger.totals.get(plant)?;
    if t.bill_potential.abs() <= RATIO_EPS {
        return None;
    }
    // both sums are negated bills; the signs cancel
    Some(t.bill_real / t.bill_potential)
}

/// Realized over potential generation; 1 when there was nothing to curtail.
pub fn generation_ratio(ledger: &SimulationLedger, plant: usize) -> f64 {
    match ledger.totals.get(plant) {
        Some(t) if t.energy_potential > RATIO_EPS => t.energy_real / t.energy_potential,
        _ => 1.0,
    }
}

pub fn earnings_ratios(ledger: &SimulationLedger) -> Vec<f64> {
    (0..ledger.n_plants()).map(|l| earnings_ratio(ledger, l).unwrap_or(1.0)).collect()
}

pub fn generation_ratios(ledger: &SimulationLedger) -> Vec<f64> {
    (0..ledger.n_plants()).map(|l| generation_ratio(ledger, l)).collect()
}

/// Jain's index `(sum x)^2 / (n sum x^2)`; negative entries count as 0 and
/// an all-zero vector is perfectly fair.
pub fn jfi(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    let (s, s2) = x.iter().map(|v| v.max(0.0)).fold((0.0, 0.0), |(a, b), v| (a + v, b + v * v));
    if s2 == 0.0 {
        return Ok(1.0);
    }
    Ok(s * s / (x.len() as f64 * s2))
}

/// Gini index `sum_l sum_m |x_l - x_m| / (2 n sum x)`, via the sorted
/// form; negative entries count as 0 and a zero sum gives 0.
pub fn gini(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    let mut v: Vec<f64> = x.iter().map(|v| v.max(0.0)).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let sum: f64 = v.iter().sum();
    if sum == 0.0 {
        return Ok(0.0);
    }
    let weighted: f64 = v.iter().enumerate().map(|(i, &xi)| (2.0 * i as f64 + 1.0 - n) * xi).sum();
    Ok(weighted / (n * sum))
}

/// Share of the potential PV energy that was not produced, in percent.
pub fn curtailment_percent(ledger: &SimulationLedger) -> Result<f64> {
    let real: f64 = ledger.totals.iter().map(|t| t.energy_real).sum();
    let pot: f64 = ledger.totals.iter().map(|t| t.energy_potential).sum();
    if pot <= RATIO_EPS {
        return Err(Error::Empty);
    }
    Ok(100.0 * (1.0 - real / pot))
}
