use super::{
    bill_value, h_bill, h_curt, Affine, DispatchConfig, DispatchResult, Objective, TimestepInputs,
};
use crate::error::{Error, Result};
use crate::grid::Network;
use crate::linprog::{solve_lp, LpProblem, LpStatus, Relation};
use crate::powerflow::InjectionVector;
use crate::pv::{capability_cuts, realize_setpoint, PvSetpoint};

const TIGHTNESS_TOL: f64 = 1e-6;
const MAX_REPAIRS: usize = 5;

/// LP column indices of one plant.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantVars {
    pub p: usize,
    pub q: usize,
    /// Bill epigraph variable (bill objective only).
    pub b: Option<usize>,
    /// Fairness deviation `t >= |gamma - h|`, when the plant takes part.
    pub t: Option<usize>,
    pub h: Option<Affine>,
}

#[derive(Debug, Clone)]
pub struct DispatchLp {
    pub problem: LpProblem,
    pub plants: Vec<PlantVars>,
    pub gamma: Option<usize>,
}

pub fn build_lp(net: &Network, cfg: &DispatchConfig, ins: &TimestepInputs) -> Result<DispatchLp> {
    build_with(net, cfg, ins, &vec![None; net.pv_plants.len()])
}

fn check_inputs(net: &Network, cfg: &DispatchConfig, ins: &TimestepInputs) -> Result<()> {
    cfg.validate()?;
    let n = net.n_buses();
    let np = net.pv_plants.len();
    for len in [ins.sens.n_buses(), ins.load_p.len(), ins.load_q.len(), ins.sens.base_point.v_mag.len()] {
        if len != n {
            return Err(Error::Dimension { expected: n, got: len });
        }
    }
    for len in [ins.mpp_forecast.len(), ins.alpha.len(), ins.history.len()] {
        if len != np {
            return Err(Error::Dimension { expected: np, got: len });
        }
    }
    if ins.alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(Error::Config("every alpha must be positive and finite".into()));
    }
    if ins.mpp_forecast.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
        return Err(Error::Config("MPP forecasts must be finite and >= 0".into()));
    }
    Ok(())
}

/// `linearized[l] = Some(c)` replaces plant `l`'s bill variable inside its
/// fairness term by the tariff piece `c (load - p)`.
fn build_with(
    net: &Network,
    cfg: &DispatchConfig,
    ins: &TimestepInputs,
    linearized: &[Option<f64>],
) -> Result<DispatchLp> {
    check_inputs(net, cfg, ins)?;
    let kwh = net.base_mva * 1000.0 * cfg.dt_hours;
    let mut lp = LpProblem::new();
    let mut plants = Vec::with_capacity(net.pv_plants.len());

    for (l, pv) in net.pv_plants.iter().enumerate() {
        let cuts = capability_cuts(pv.s_rated, cfg.k_segments)?;
        let mpp = ins.mpp_forecast[l].min(cuts.p_limit());
        let q_max = pv.s_rated.min(pv.xi * mpp);
        let alpha = ins.alpha[l];
        let id = pv.id;

        let p_cost = if cfg.objective == Objective::Curtailment { -alpha } else { 0.0 };
        let p = lp.add_var(format!("p_{id}"), 0.0, mpp, p_cost);
        let q = lp.add_var(format!("q_{id}"), -q_max, q_max, 0.0);
        if cfg.objective == Objective::Curtailment {
            lp.offset += alpha * mpp;
        }
        lp.add_row(format!("cone_hi_{id}"), &[(q, 1.0), (p, -pv.xi)], Relation::Le, 0.0);
        lp.add_row(format!("cone_lo_{id}"), &[(q, -1.0), (p, -pv.xi)], Relation::Le, 0.0);
        for (k, &(m, nk)) in cuts.segments.iter().enumerate() {
            lp.add_row(format!("cap_hi_{id}_{k}"), &[(p, m), (q, 1.0)], Relation::Le, nk);
            lp.add_row(format!("cap_lo_{id}_{k}"), &[(p, m), (q, -1.0)], Relation::Le, nk);
        }

        let b = if cfg.objective == Objective::Bill {
            let b = lp.add_var(format!("b_{id}"), f64::NEG_INFINITY, f64::INFINITY, alpha);
            let load = ins.load_p[pv.bus];
            for (name, c) in [("bill_im", cfg.c_im), ("bill_fit", cfg.c_fit)] {
                lp.add_row(format!("{name}_{id}"), &[(b, 1.0), (p, c)], Relation::Ge, c * load);
            }
            Some(b)
        } else {
            None
        };

        let h = if cfg.w > 0.0 {
            let potential_energy = mpp * kwh;
            match cfg.objective {
                Objective::Curtailment => {
                    h_curt(&Affine::var(p, kwh), potential_energy, ins.history[l], cfg.past_aware)
                }
                Objective::Bill => {
                    let load = ins.load_p[pv.bus] * kwh;
                    let expr = match linearized[l] {
                        Some(c) => Affine { constant: c * load, terms: vec![(p, -c * kwh)] },
                        None => Affine::var(b.expect("bill variable"), kwh),
                    };
                    let potential = bill_value(potential_energy, load, cfg.c_im, cfg.c_fit);
                    h_bill(&expr, potential, mpp, ins.history[l], cfg.past_aware)
                }
            }
        } else {
            None
        };
        plants.push(PlantVars { p, q, b, t: None, h });
    }

    let gamma = if plants.iter().any(|pl| pl.h.is_some()) {
        Some(lp.add_var("gamma", f64::NEG_INFINITY, f64::INFINITY, 0.0))
    } else {
        None
    };
    if let Some(g) = gamma {
        for (pl, pv) in plants.iter_mut().zip(&net.pv_plants) {
            let Some(h) = &pl.h else { continue };
            let t = lp.add_var(format!("t_{}", pv.id), 0.0, f64::INFINITY, cfg.w);
            // t >= gamma - h
            let mut terms = vec![(t, 1.0), (g, -1.0)];
            terms.extend(h.terms.iter().copied());
            lp.add_row(format!("fair_lo_{}", pv.id), &terms, Relation::Ge, -h.constant);
            // t >= h - gamma
            let mut terms = vec![(t, 1.0), (g, 1.0)];
            terms.extend(h.terms.iter().map(|&(j, a)| (j, -a)));
            lp.add_row(format!("fair_hi_{}", pv.id), &terms, Relation::Ge, h.constant);
            pl.t = Some(t);
        }
    }

    // linearized voltages at every non-slack bus
    let sens = ins.sens;
    let base = &sens.base_point;
    let n = net.n_buses();
    let dp: Vec<f64> = (0..n).map(|j| -ins.load_p[j] - base.injections.p[j]).collect();
    let dq: Vec<f64> = (0..n).map(|j| -ins.load_q[j] - base.injections.q[j]).collect();
    for i in (0..n).filter(|&i| i != net.slack_bus) {
        let mut constant = base.v_mag[i];
        for j in 0..n {
            constant += sens.kp[(i, j)] * dp[j] + sens.kq[(i, j)] * dq[j];
        }
        let mut terms = Vec::with_capacity(2 * plants.len());
        for (pl, pv) in plants.iter().zip(&net.pv_plants) {
            terms.push((pl.p, sens.kp[(i, pv.bus)]));
            terms.push((pl.q, sens.kq[(i, pv.bus)]));
        }
        let id = net.buses[i].id;
        lp.add_row(format!("v_hi_{id}"), &terms, Relation::Le, cfg.v_max - constant);
        lp.add_row(format!("v_lo_{id}"), &terms, Relation::Ge, cfg.v_min - constant);
    }

    Ok(DispatchLp { problem: lp, plants, gamma })
}

/// Active tariff piece of the bill at generation `pv`.
fn active_piece(pv: f64, load: f64, cfg: &DispatchConfig) -> f64 {
    if load >= pv {
        cfg.c_im
    } else {
        cfg.c_fit
    }
}

/// Builds and solves the step LP, then clamps the solution into the device
/// envelope. For the bill objective a slack epigraph (`b_l` above the bill
/// of `p_l`) triggers a re-solve with that plant's fairness term written on
/// the active tariff piece instead of `b_l`.
pub fn dispatch_step(net: &Network, cfg: &DispatchConfig, ins: &TimestepInputs) -> Result<DispatchResult> {
    let np = net.pv_plants.len();
    let mut linearized: Vec<Option<f64>> = vec![None; np];
    let mut repairs = 0;
    loop {
        let dlp = build_with(net, cfg, ins, &linearized)?;
        let sol = solve_lp(&dlp.problem)?;
        if sol.status != LpStatus::Optimal {
            let hint = match sol.status {
                LpStatus::Infeasible => format!(
                    "the voltage band [{}, {}] cannot be held even with full curtailment; \
                     check the band against the network and load scaling",
                    cfg.v_min, cfg.v_max
                ),
                _ => "solver did not reach an optimum".to_string(),
            };
            return Err(Error::Dispatch { status: sol.status.to_string(), hint });
        }
        let x = &sol.x;

        let mut gap: f64 = 0.0;
        let mut changed = false;
        let mut next = linearized.clone();
        for (l, (pl, pv)) in dlp.plants.iter().zip(&net.pv_plants).enumerate() {
            let Some(b) = pl.b else { continue };
            let load = ins.load_p[pv.bus];
            let g = x[b] - bill_value(x[pl.p], load, cfg.c_im, cfg.c_fit);
            gap = gap.max(g);
            if pl.t.is_none() {
                continue;
            }
            let piece = active_piece(x[pl.p], load, cfg);
            if (g > TIGHTNESS_TOL && linearized[l].is_none()) || linearized[l].is_some_and(|c| c != piece) {
                next[l] = Some(piece);
                changed = true;
            }
        }
        if changed && repairs < MAX_REPAIRS {
            linearized = next;
            repairs += 1;
            continue;
        }

        let setpoints: Vec<PvSetpoint> = dlp
            .plants
            .iter()
            .zip(&net.pv_plants)
            .zip(&ins.mpp_forecast)
            .map(|((pl, pv), &mpp)| {
                let cuts = capability_cuts(pv.s_rated, cfg.k_segments)?;
                Ok(realize_setpoint(PvSetpoint { p: x[pl.p], q: x[pl.q] }, mpp, pv.xi, &cuts))
            })
            .collect::<Result<_>>()?;
        let mut inj = InjectionVector { p: ins.load_p.iter().map(|v| -v).collect(), q: ins.load_q.iter().map(|v| -v).collect() };
        for (sp, pv) in setpoints.iter().zip(&net.pv_plants) {
            inj.p[pv.bus] += sp.p;
            inj.q[pv.bus] += sp.q;
        }
        let predicted_v = ins.sens.predict_voltages(&inj)?;
        let gamma = dlp.gamma.filter(|_| dlp.plants.iter().any(|pl| pl.t.is_some())).map(|g| x[g]);
        return Ok(DispatchResult {
            setpoints,
            gamma,
            lp_status: sol.status,
            objective_value: sol.objective_value,
            predicted_v,
            bill_gap: gap,
            repairs,
        });
    }
}
