//! Per-timestep voltage-control dispatch: curtailment and reactive support
//! chosen by an LP over the linearized voltage model, with optional feedback
//! weights and an L1 fairness term.

mod lp;

pub use lp::{build_lp, dispatch_step, DispatchLp, PlantVars};

use crate::error::{Error, Result};
use crate::metrics::{earnings_ratio, generation_ratio, SimulationLedger, RATIO_EPS};
use crate::pv::PvSetpoint;
use crate::sensitivity::SensitivityMatrices;
use crate::linprog::LpStatus;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    #[serde(rename = "bill")]
    Bill,
    #[serde(rename = "curt", alias = "curtailment")]
    Curtailment,
}

impl FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bill" => Ok(Objective::Bill),
            "curt" | "curtailment" => Ok(Objective::Curtailment),
            _ => Err(Error::Config(format!("unknown objective '{s}' (bill|curt)"))),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::Bill => "bill",
            Objective::Curtailment => "curt",
        })
    }
}

/// `F` = feedback weights, `P` = past-aware fairness function. `Unfair`
/// is `F0P0` with the fairness weight forced to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "unfair")]
    Unfair,
    F0P0,
    F0P1,
    F1P0,
    F1P1,
}

impl Variant {
    pub const SWEEP: [Variant; 4] = [Variant::F0P0, Variant::F0P1, Variant::F1P0, Variant::F1P1];

    pub fn feedback(self) -> bool {
        matches!(self, Variant::F1P0 | Variant::F1P1)
    }

    pub fn past_aware(self) -> bool {
        matches!(self, Variant::F0P1 | Variant::F1P1)
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::Unfair => "unfair",
            Variant::F0P0 => "F0P0",
            Variant::F0P1 => "F0P1",
            Variant::F1P0 => "F1P0",
            Variant::F1P1 => "F1P1",
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unfair" => Ok(Variant::Unfair),
            "F0P0" => Ok(Variant::F0P0),
            "F0P1" => Ok(Variant::F0P1),
            "F1P0" => Ok(Variant::F1P0),
            "F1P1" => Ok(Variant::F1P1),
            _ => Err(Error::Config(format!("unknown variant '{s}' (unfair|F0P0|F0P1|F1P0|F1P1)"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DispatchConfig {
    pub objective: Objective,
    pub feedback: bool,
    pub past_aware: bool,
    pub w: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Import and feed-in tariffs per kWh.
    pub c_im: f64,
    pub c_fit: f64,
    pub alpha_cap: f64,
    pub k_segments: usize,
    /// Timestep length; converts per-unit powers to the kWh and currency
    /// amounts the fairness ratios are taken over. The objective itself is
    /// in per-unit power.
    pub dt_hours: f64,
}

impl Default for DispatchConfig {
    fn default() -> Self {
        DispatchConfig {
            objective: Objective::Curtailment,
            feedback: false,
            past_aware: false,
            w: 0.0,
            v_min: 0.95,
            v_max: 1.05,
            c_im: 0.3,
            c_fit: 0.1,
            alpha_cap: 100.0,
            k_segments: 8,
            dt_hours: 0.25,
        }
    }
}

impl DispatchConfig {
    pub fn with_variant(mut self, variant: Variant, w: f64) -> Self {
        self.feedback = variant.feedback();
        self.past_aware = variant.past_aware();
        self.w = if variant == Variant::Unfair { 0.0 } else { w };
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.w >= 0.0) || !self.w.is_finite() {
            return bad(format!("w must be finite and >= 0, got {}", self.w));
        }
        if !(self.v_min < self.v_max) {
            return bad(format!("need v_min < v_max, got {} and {}", self.v_min, self.v_max));
        }
        if !(self.c_im >= self.c_fit) || self.c_fit < 0.0 {
            return bad(format!("need c_im >= c_fit >= 0, got {} and {}", self.c_im, self.c_fit));
        }
        if !(self.alpha_cap >= ALPHA_FLOOR) {
            return bad(format!("alpha_cap must be >= {ALPHA_FLOOR}, got {}", self.alpha_cap));
        }
        if self.k_segments < 2 {
            return bad(format!("k_segments must be >= 2, got {}", self.k_segments));
        }
        if !(self.dt_hours > 0.0) {
            return bad(format!("dt_hours must be positive, got {}", self.dt_hours));
        }
        Ok(())
    }
}

pub const ALPHA_FLOOR: f64 = 1e-2;
/// Earnings ratios are clamped to this range before inversion.
pub const EARNINGS_CLAMP: (f64, f64) = (0.01, 10.0);

/// Cumulative realized and potential amounts of one plant (kWh for the
/// curtailment objective, currency for the bill objective).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct HistoryTerms {
    pub realized: f64,
    pub potential: f64,
}

pub fn history_terms(ledger: &SimulationLedger, objective: Objective) -> Vec<HistoryTerms> {
    ledger
        .totals()
        .iter()
        .map(|t| match objective {
            Objective::Curtailment => HistoryTerms { realized: t.energy_real, potential: t.energy_potential },
            Objective::Bill => HistoryTerms { realized: t.bill_real, potential: t.bill_potential },
        })
        .collect()
}

/// Forecasts and state seen by one dispatch.
#[derive(Debug, Clone)]
pub struct TimestepInputs<'a> {
    pub sens: &'a SensitivityMatrices,
    /// Per-bus forecast load (p.u.).
    pub load_p: Vec<f64>,
    pub load_q: Vec<f64>,
    /// Per-plant MPP forecast (p.u.).
    pub mpp_forecast: Vec<f64>,
    pub alpha: Vec<f64>,
    pub history: Vec<HistoryTerms>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchResult {
    pub setpoints: Vec<PvSetpoint>,
    /// Fairness level; `None` when no fairness rows were built.
    pub gamma: Option<f64>,
    pub lp_status: LpStatus,
    pub objective_value: f64,
    pub predicted_v: Vec<f64>,
    /// Largest `b_l - f_bill(p_l)` over plants at the final solve (p.u.).
    pub bill_gap: f64,
    /// Re-solves triggered by a slack bill epigraph.
    pub repairs: usize,
}

/// Net bill of one plant for energies over a step:
/// `(c_im - c_fit) [pv - load]^+ + c_im (load - pv)`.
pub fn bill_value(pv: f64, load: f64, c_im: f64, c_fit: f64) -> f64 {
    (c_im - c_fit) * (pv - load).max(0.0) + c_im * (load - pv)
}

/// Feedback weights. Without feedback or history every weight is 1.
pub fn compute_alpha(ledger: &SimulationLedger, cfg: &DispatchConfig) -> Vec<f64> {
    (0..ledger.n_plants())
        .map(|l| {
            if !cfg.feedback {
                return 1.0;
            }
            let ratio = match cfg.objective {
                Objective::Curtailment => generation_ratio(ledger, l),
                Objective::Bill => match earnings_ratio(ledger, l) {
                    Some(e) => e.clamp(EARNINGS_CLAMP.0, EARNINGS_CLAMP.1),
                    None => 1.0,
                },
            };
            // 1/0 = inf clamps to the cap
            (1.0 / ratio).clamp(ALPHA_FLOOR, cfg.alpha_cap)
        })
        .collect()
}

/// `constant + sum coef * x[var]` over LP variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Affine {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl Affine {
    pub fn var(j: usize, coef: f64) -> Self {
        Affine { constant: 0.0, terms: vec![(j, coef)] }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(j, a)| a * x[j]).sum::<f64>()
    }

    fn shifted_scaled(&self, shift: f64, scale: f64) -> Self {
        Affine {
            constant: (self.constant + shift) * scale,
            terms: self.terms.iter().map(|&(j, a)| (j, a * scale)).collect(),
        }
    }
}

/// Generation ratio of a plant as an affine expression. `energy` is the
/// step's generation expression and `potential` its MPP energy (kWh).
/// `None` when the ratio is undefined at this step.
pub fn h_curt(energy: &Affine, potential: f64, hist: HistoryTerms, past_aware: bool) -> Option<Affine> {
    if !past_aware {
        if potential <= RATIO_EPS {
            return None;
        }
        return Some(energy.shifted_scaled(0.0, 1.0 / potential));
    }
    let den = hist.potential + potential;
    if den <= RATIO_EPS {
        return None;
    }
    Some(energy.shifted_scaled(hist.realized, 1.0 / den))
}

/// Bill ratio of a plant as an affine expression in the step's bill
/// expression. `potential` is the bill at the MPP forecast. Plants with no
/// MPP forecast are left out when the past is ignored.
pub fn h_bill(
    bill: &Affine,
    potential: f64,
    mpp_forecast: f64,
    hist: HistoryTerms,
    past_aware: bool,
) -> Option<Affine> {
    if !past_aware {
        if mpp_forecast <= RATIO_EPS || potential.abs() <= RATIO_EPS {
            return None;
        }
        return Some(bill.shifted_scaled(0.0, 1.0 / potential));
    }
    let den = hist.potential + potential;
    if den.abs() <= RATIO_EPS {
        return None;
    }
    Some(bill.shifted_scaled(hist.realized, 1.0 / den))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::StepRecord;

    #[test]
    fn bill_examples() {
        assert!((bill_value(5.0, 2.0, 0.3, 0.1) + 0.3).abs() < 1e-12);
        // same through the import/export form
        let (imp, exp) = (0.0, 3.0);
        assert!((0.3 * imp - 0.1 * exp - bill_value(5.0, 2.0, 0.3, 0.1)).abs() < 1e-12);
        assert!((bill_value(0.0, 2.0, 0.3, 0.1) - 0.6).abs() < 1e-12);
        assert_eq!(bill_value(1.7, 1.7, 0.3, 0.1), 0.0);
    }

    #[test]
    fn bill_is_max_of_two_pieces() {
        for k in 0..50 {
            let pv = k as f64 * 0.1;
            let f = bill_value(pv, 2.0, 0.3, 0.1);
            let m = (0.3 * (2.0 - pv)).max(0.1 * (2.0 - pv));
            assert!((f - m).abs() < 1e-12);
        }
    }

    #[test]
    fn h_bill_past_example() {
        let b = Affine::var(0, 1.0);
        let hist = HistoryTerms { realized: -1.0, potential: -2.0 };
        let h = h_bill(&b, -0.5, 1.0, hist, true).unwrap();
        assert!((h.eval(&[-0.5]) - 0.6).abs() < 1e-12);
        // empty history: both variants agree
        let h0 = h_bill(&b, -0.5, 1.0, HistoryTerms::default(), false).unwrap();
        let h1 = h_bill(&b, -0.5, 1.0, HistoryTerms::default(), true).unwrap();
        assert_eq!(h0, h1);
        assert_eq!(h0.eval(&[-0.5]), 1.0);
        assert!(h_bill(&b, -0.5, 0.0, HistoryTerms::default(), false).is_none());
        assert!(h_bill(&b, 0.0, 1.0, HistoryTerms::default(), true).is_none());
    }

    #[test]
    fn h_curt_examples() {
        let e = Affine::var(0, 1.0);
        let hist = HistoryTerms { realized: 4.0, potential: 5.0 };
        let h = h_curt(&e, 1.0, hist, true).unwrap();
        assert!((h.eval(&[0.6]) - 4.6 / 6.0).abs() < 1e-12);
        let h = h_curt(&e, 2.0, HistoryTerms::default(), false).unwrap();
        assert_eq!(h.eval(&[2.0]), 1.0);
        assert!(h_curt(&e, 0.0, hist, false).is_none());
        // night with history keeps a constant ratio
        let h = h_curt(&e, 0.0, hist, true).unwrap();
        assert!((h.eval(&[0.0]) - 0.8).abs() < 1e-12);
    }

    fn ledger_with(real: f64, pot: f64, bill_real: f64, bill_pot: f64) -> SimulationLedger {
        let mut l = SimulationLedger::new(1);
        l.push(StepRecord {
            step: 0,
            plant: 0,
            p_set: 0.0,
            q_set: 0.0,
            p_real: 0.0,
            q_real: 0.0,
            mpp: 0.0,
            load: 0.0,
            energy_real: real,
            energy_potential: pot,
            bill_real,
            bill_potential: bill_pot,
        })
        .unwrap();
        l
    }

    #[test]
    fn alpha_rules() {
        let fb = DispatchConfig { feedback: true, ..Default::default() };
        assert_eq!(compute_alpha(&SimulationLedger::new(3), &fb), vec![1.0; 3]);
        assert_eq!(compute_alpha(&ledger_with(1.0, 2.0, 0.0, 0.0), &fb), vec![2.0]);
        assert_eq!(compute_alpha(&ledger_with(0.0, 2.0, 0.0, 0.0), &fb), vec![100.0]);
        let off = DispatchConfig::default();
        assert_eq!(compute_alpha(&ledger_with(0.0, 2.0, 0.0, 0.0), &off), vec![1.0]);

        let bill = DispatchConfig { objective: Objective::Bill, ..fb };
        let a = compute_alpha(&ledger_with(0.0, 0.0, -0.7, -1.0), &bill);
        assert!((a[0] - 1.0 / 0.7).abs() < 1e-12);
        // earning flipped sign: ratio clamps at 0.01
        assert_eq!(compute_alpha(&ledger_with(0.0, 0.0, 0.2, -1.0), &bill), vec![100.0]);
        assert_eq!(compute_alpha(&ledger_with(0.0, 0.0, 0.0, 0.0), &bill), vec![1.0]);
    }

    #[test]
    fn config_validation() {
        assert!(DispatchConfig::default().validate().is_ok());
        let c = DispatchConfig { c_im: 0.05, ..Default::default() };
        assert!(c.validate().is_err());
        let c = DispatchConfig { v_min: 1.05, ..Default::default() };
        assert!(c.validate().is_err());
        let c = DispatchConfig { w: -1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn variants_round_trip() {
        for v in [Variant::Unfair, Variant::F0P0, Variant::F0P1, Variant::F1P0, Variant::F1P1] {
            assert_eq!(v.label().parse::<Variant>().unwrap(), v);
        }
        let c = DispatchConfig::default().with_variant(Variant::Unfair, 3.0);
        assert_eq!(c.w, 0.0);
        let c = DispatchConfig::default().with_variant(Variant::F1P1, 3.0);
        assert!(c.feedback && c.past_aware && c.w == 3.0);
    }
}
