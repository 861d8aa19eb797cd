use super::profiles::Profiles;
use crate::dispatch::{
    build_lp, compute_alpha, dispatch_step, history_terms, bill_value, DispatchConfig, Objective,
    TimestepInputs,
};
use crate::error::{Error, Result};
use crate::grid::Network;
use crate::metrics::{
    curtailment_percent, earnings_ratios, generation_ratios, gini, jfi, SimulationLedger, StepRecord,
};
use crate::powerflow::{check_voltage_limits, InjectionVector, PfSolution, PowerFlow, VoltageViolation};
use crate::pv::{capability_cuts, realize_setpoint, CapabilityCuts};
use crate::sensitivity::sensitivities_with;
use serde::Serialize;
use std::path::PathBuf;

/// Allowed post-dispatch overshoot above `v_max` attributed to the
/// linearized voltage model.
pub const AC_SLACK: f64 = 0.002;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimOptions {
    /// Slack-bus voltage magnitude.
    pub v0: f64,
    /// Day boundaries at which metrics are reported.
    pub report_days: Vec<usize>,
    /// Where per-step LP and sensitivity dumps go, if anywhere.
    #[serde(skip)]
    pub dump_dir: Option<PathBuf>,
    pub dump_lp: bool,
    pub dump_sensitivities: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            v0: 1.0,
            report_days: vec![1, 3, 7],
            dump_dir: None,
            dump_lp: false,
            dump_sensitivities: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DayMetrics {
    pub day: usize,
    pub curtail_pct: f64,
    pub jfi: f64,
    pub gini: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepLog {
    pub step: usize,
    pub gamma: Option<f64>,
    pub alpha: Vec<f64>,
    /// AC magnitudes after realization and the dispatcher's prediction.
    pub v_ac: Vec<f64>,
    pub v_pred: Vec<f64>,
    pub max_v_ac: f64,
    pub violations: Vec<VoltageViolation>,
    pub bill_gap: f64,
    pub repairs: usize,
    pub pf_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub network: String,
    pub label: String,
    pub config: DispatchConfig,
    pub dt_minutes: u32,
    pub days: usize,
    pub plant_ids: Vec<usize>,
    pub bus_ids: Vec<usize>,
    #[serde(skip)]
    pub steps: Vec<StepLog>,
    #[serde(skip)]
    pub ledger: SimulationLedger,
    pub day_metrics: Vec<DayMetrics>,
    pub generation_ratios: Vec<f64>,
    pub earnings_ratios: Vec<f64>,
    /// Share of steps whose AC maximum stays within `v_max + AC_SLACK`.
    pub ac_within_slack: f64,
    pub max_ac_excess: f64,
    pub violation_steps: usize,
    pub repaired_steps: usize,
}

impl RunReport {
    pub fn metrics_at(&self, day: usize) -> Option<&DayMetrics> {
        self.day_metrics.iter().find(|m| m.day == day)
    }

    pub fn last_metrics(&self) -> Option<&DayMetrics> {
        self.day_metrics.last()
    }
}

/// Fairness ratios the indices are computed over: earnings for the bill
/// objective, generation for the curtailment objective.
pub fn fairness_ratios(ledger: &SimulationLedger, objective: Objective) -> Vec<f64> {
    match objective {
        Objective::Bill => earnings_ratios(ledger),
        Objective::Curtailment => generation_ratios(ledger),
    }
}

pub fn day_metrics(ledger: &SimulationLedger, objective: Objective, day: usize) -> Result<DayMetrics> {
    let ratios = fairness_ratios(ledger, objective);
    let (jfi, gini) = if ratios.is_empty() { (1.0, 0.0) } else { (jfi(&ratios)?, gini(&ratios)?) };
    Ok(DayMetrics {
        day,
        curtail_pct: curtailment_percent(ledger).unwrap_or(0.0),
        jfi,
        gini,
    })
}

fn state_dump(step: usize, base: &PfSolution, mpp_fc: &[f64], alpha: &[f64]) -> String {
    let vmax = base.v_mag.iter().cloned().fold(f64::MIN, f64::max);
    let vmin = base.v_mag.iter().cloned().fold(f64::MAX, f64::min);
    format!(
        "step {step}: operating point |v| in [{vmin:.5}, {vmax:.5}], mpp forecast {mpp_fc:?}, alpha {alpha:?}"
    )
}

/// Closed-loop run over the whole profile horizon. Each step dispatches on
/// the sensitivities and persistent forecasts taken from the previous
/// step's realization, realizes against the actual MPP, checks the result
/// with an AC power flow and books it in the ledger. Before the first step
/// the feeder is taken as idle (no load, no PV).
pub fn run_simulation(
    net: &Network,
    cfg: &DispatchConfig,
    profiles: &Profiles,
    opts: &SimOptions,
    label: &str,
) -> Result<RunReport> {
    profiles.validate()?;
    let mut cfg = cfg.clone();
    cfg.dt_hours = profiles.dt_hours();
    cfg.validate()?;

    let n = net.n_buses();
    let np = net.pv_plants.len();
    let pf = PowerFlow::new(net)?;
    let (nom_p, nom_q) = net.nominal_bus_loads();
    let cuts: Vec<CapabilityCuts> = net
        .pv_plants
        .iter()
        .map(|pv| capability_cuts(pv.s_rated, cfg.k_segments))
        .collect::<Result<_>>()?;
    let kwh = net.base_mva * 1000.0 * cfg.dt_hours;
    let kw = net.base_mva * 1000.0;
    let spd = profiles.steps_per_day();
    if let Some(dir) = &opts.dump_dir {
        if opts.dump_lp || opts.dump_sensitivities {
            std::fs::create_dir_all(dir)?;
        }
    }

    let mut ledger = SimulationLedger::new(np);
    let mut steps = Vec::with_capacity(profiles.len());
    let mut day_metrics_out = Vec::new();
    let mut prev_load_p = vec![0.0; n];
    let mut prev_load_q = vec![0.0; n];
    let mut prev_mpp = vec![0.0; np];
    let mut base = pf.solve(&InjectionVector::zeros(n), opts.v0)?;

    // columns the dispatcher moves: PV buses, plus any bus whose forecast
    // differs from the operating point
    let pv_cols: Vec<usize> = net.pv_plants.iter().map(|pv| pv.bus).collect();

    for t in 0..profiles.len() {
        let alpha = compute_alpha(&ledger, &cfg);
        let history = history_terms(&ledger, cfg.objective);
        let mut cols = pv_cols.clone();
        for j in 0..n {
            let dp = (-prev_load_p[j] - base.injections.p[j]).abs();
            let dq = (-prev_load_q[j] - base.injections.q[j]).abs();
            if j != net.slack_bus && (dp > 1e-7 || dq > 1e-7) && !cols.contains(&j) {
                cols.push(j);
            }
        }
        let wrap = |e: Error, base: &PfSolution| Error::Step {
            step: t,
            state: state_dump(t, base, &prev_mpp, &alpha),
            source: Box::new(e),
        };
        // a sensitivity dump wants every column
        let subset = if opts.dump_sensitivities { None } else { Some(&cols[..]) };
        let sens = sensitivities_with(&pf, &base, subset).map_err(|e| wrap(e, &base))?;
        let ins = TimestepInputs {
            sens: &sens,
            load_p: prev_load_p.clone(),
            load_q: prev_load_q.clone(),
            mpp_forecast: prev_mpp.clone(),
            alpha: alpha.clone(),
            history,
        };
        if let Some(dir) = &opts.dump_dir {
            if opts.dump_lp {
                let lp = build_lp(net, &cfg, &ins).map_err(|e| wrap(e, &base))?;
                std::fs::write(dir.join(format!("step_{t:05}.lp")), lp.problem.to_lp_text())?;
            }
            if opts.dump_sensitivities {
                sens.write_csv(dir.join(format!("sens_{t:05}.csv")))?;
            }
        }
        let res = dispatch_step(net, &cfg, &ins).map_err(|e| wrap(e, &base))?;

        // actual conditions at t
        let load_p: Vec<f64> = nom_p.iter().map(|v| v * profiles.load_norm[t]).collect();
        let load_q: Vec<f64> = nom_q.iter().map(|v| v * profiles.load_norm[t]).collect();
        let mpp: Vec<f64> = net.pv_plants.iter().map(|pv| pv.p_capacity * profiles.pv_norm[t]).collect();
        let mut inj = InjectionVector {
            p: load_p.iter().map(|v| -v).collect(),
            q: load_q.iter().map(|v| -v).collect(),
        };
        let mut realized = Vec::with_capacity(np);
        for (l, pv) in net.pv_plants.iter().enumerate() {
            let r = realize_setpoint(res.setpoints[l], mpp[l], pv.xi, &cuts[l]);
            inj.p[pv.bus] += r.p;
            inj.q[pv.bus] += r.q;
            realized.push(r);
        }
        let sol = pf.solve(&inj, opts.v0).map_err(|e| wrap(e, &base))?;
        let violations = check_voltage_limits(&sol, cfg.v_min, cfg.v_max)?;

        for (l, pv) in net.pv_plants.iter().enumerate() {
            let load = load_p[pv.bus] * kwh;
            let (e_real, e_pot) = (realized[l].p * kwh, mpp[l] * kwh);
            ledger.push(StepRecord {
                step: t,
                plant: l,
                p_set: res.setpoints[l].p * kw,
                q_set: res.setpoints[l].q * kw,
                p_real: realized[l].p * kw,
                q_real: realized[l].q * kw,
                mpp: mpp[l] * kw,
                load: load_p[pv.bus] * kw,
                energy_real: e_real,
                energy_potential: e_pot,
                bill_real: bill_value(e_real, load, cfg.c_im, cfg.c_fit),
                bill_potential: bill_value(e_pot, load, cfg.c_im, cfg.c_fit),
            })?;
        }

        let max_v_ac = sol
            .v_mag
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != net.slack_bus)
            .map(|(_, &v)| v)
            .fold(f64::MIN, f64::max);
        steps.push(StepLog {
            step: t,
            gamma: res.gamma,
            alpha,
            v_ac: sol.v_mag.clone(),
            v_pred: res.predicted_v,
            max_v_ac,
            violations,
            bill_gap: res.bill_gap,
            repairs: res.repairs,
            pf_iterations: sol.iterations,
        });

        if (t + 1) % spd == 0 {
            let day = (t + 1) / spd;
            if opts.report_days.contains(&day) || day == profiles.days {
                day_metrics_out.push(day_metrics(&ledger, cfg.objective, day)?);
            }
        }

        prev_load_p = load_p;
        prev_load_q = load_q;
        prev_mpp = mpp;
        base = sol;
    }

    let within = steps.iter().filter(|s| s.max_v_ac <= cfg.v_max + AC_SLACK).count();
    let max_ac_excess = steps.iter().map(|s| s.max_v_ac - cfg.v_max).fold(f64::MIN, f64::max);
    Ok(RunReport {
        network: net.name.clone(),
        label: label.to_string(),
        dt_minutes: profiles.dt_minutes,
        days: profiles.days,
        ac_within_slack: within as f64 / steps.len() as f64,
        max_ac_excess,
        violation_steps: steps.iter().filter(|s| !s.violations.is_empty()).count(),
        repaired_steps: steps.iter().filter(|s| s.repairs > 0).count(),
        plant_ids: net.pv_plants.iter().map(|pv| pv.id).collect(),
        bus_ids: net.buses.iter().map(|b| b.id).collect(),
        generation_ratios: generation_ratios(&ledger),
        earnings_ratios: earnings_ratios(&ledger),
        config: cfg,
        steps,
        ledger,
        day_metrics: day_metrics_out,
    })
}
