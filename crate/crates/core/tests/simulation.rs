mod common;

use common::scenario_network;
use faircurtail::dispatch::{DispatchConfig, Objective, Variant};
use faircurtail::sim::{pareto_sweep, run_simulation, synth_profiles, Profiles, SimOptions};

fn cfg(objective: Objective, variant: Variant, w: f64) -> DispatchConfig {
    DispatchConfig { objective, ..Default::default() }.with_variant(variant, w)
}

#[test]
fn future_profiles_do_not_leak_into_past_steps() {
    let net = scenario_network("case33");
    let honest = synth_profiles(1, 15, 7).unwrap();
    let cut = 50;
    let mut spoofed = honest.clone();
    for k in cut + 1..spoofed.len() {
        spoofed.pv_norm[k] = 1.0 - spoofed.pv_norm[k];
        spoofed.load_norm[k] = 0.5 * spoofed.load_norm[k];
    }
    let c = cfg(Objective::Bill, Variant::F1P1, 0.1);
    let a = run_simulation(&net, &c, &honest, &SimOptions::default(), "a").unwrap();
    let b = run_simulation(&net, &c, &spoofed, &SimOptions::default(), "b").unwrap();
    assert_eq!(a.steps[..=cut], b.steps[..=cut]);
    let np = net.pv_plants.len();
    assert_eq!(a.ledger.records()[..(cut + 1) * np], b.ledger.records()[..(cut + 1) * np]);
    assert_ne!(a.steps[cut + 1..], b.steps[cut + 1..]);
}

#[test]
fn identical_inputs_give_identical_reports() {
    let net = scenario_network("cigre_lv");
    let p = synth_profiles(2, 15, 3).unwrap();
    let c = cfg(Objective::Curtailment, Variant::F1P1, 0.3);
    let a = run_simulation(&net, &c, &p, &SimOptions::default(), "x").unwrap();
    let b = run_simulation(&net, &c, &p, &SimOptions::default(), "x").unwrap();
    assert_eq!(a, b);
}

#[test]
fn ledger_balances_and_respects_physics() {
    let net = scenario_network("case69");
    let p = synth_profiles(1, 15, 11).unwrap();
    let r = run_simulation(&net, &cfg(Objective::Bill, Variant::F0P1, 0.1), &p, &SimOptions::default(), "l").unwrap();
    let np = net.pv_plants.len();
    let recs = r.ledger.records();
    assert_eq!(recs.len(), p.len() * np);
    for (l, t) in r.ledger.totals().iter().enumerate() {
        let mine = recs.iter().filter(|x| x.plant == l);
        let (er, ep, br, bp) = mine.fold((0.0, 0.0, 0.0, 0.0), |a, x| {
            (a.0 + x.energy_real, a.1 + x.energy_potential, a.2 + x.bill_real, a.3 + x.bill_potential)
        });
        assert!((t.energy_real - er).abs() < 1e-9 && (t.energy_potential - ep).abs() < 1e-9);
        assert!((t.bill_real - br).abs() < 1e-9 && (t.bill_potential - bp).abs() < 1e-9);
        // curtailing can only raise a bill
        assert!(t.bill_real >= t.bill_potential - 1e-9);
    }
    for x in recs {
        assert!(x.p_real <= x.mpp + 1e-9 && x.p_real >= 0.0);
        assert!(x.energy_real <= x.energy_potential + 1e-9);
        assert!(x.q_real.abs() <= 0.33 * x.p_real + 1e-9);
    }
    let pot: f64 = r.ledger.totals().iter().map(|t| t.energy_potential).sum();
    let real: f64 = r.ledger.totals().iter().map(|t| t.energy_real).sum();
    let m = r.last_metrics().unwrap();
    assert!((m.curtail_pct - 100.0 * (1.0 - real / pot)).abs() < 1e-9);
}

#[test]
fn no_sun_means_no_curtailment_and_perfect_fairness() {
    let net = scenario_network("case33");
    let mut p = synth_profiles(1, 15, 1).unwrap();
    p.pv_norm.iter_mut().for_each(|v| *v = 0.0);
    for objective in [Objective::Curtailment, Objective::Bill] {
        let r = run_simulation(&net, &cfg(objective, Variant::F1P1, 1.0), &p, &SimOptions::default(), "dark").unwrap();
        let m = r.last_metrics().unwrap();
        assert_eq!((m.curtail_pct, m.jfi, m.gini), (0.0, 1.0, 0.0));
        assert!(r.ledger.records().iter().all(|x| x.p_real == 0.0 && x.q_real == 0.0));
    }
}

#[test]
fn metrics_reported_at_requested_days() {
    let net = scenario_network("cigre_lv");
    let p = synth_profiles(4, 30, 2).unwrap();
    let r = run_simulation(&net, &cfg(Objective::Curtailment, Variant::Unfair, 0.0), &p, &SimOptions::default(), "d")
        .unwrap();
    let days: Vec<usize> = r.day_metrics.iter().map(|m| m.day).collect();
    assert_eq!(days, [1, 3, 4]);
}

#[test]
fn sweep_rows_sorted_and_zero_weight_matches_plain_run() {
    let net = scenario_network("cigre_lv");
    let p = synth_profiles(1, 15, 42).unwrap();
    let base = DispatchConfig { objective: Objective::Bill, ..Default::default() };
    let weights = [0.3, 0.0, 0.03];
    let rows = pareto_sweep(&net, &base, &p, &SimOptions::default(), &Variant::SWEEP, &weights).unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows.windows(2).all(|w| (w[0].w, w[0].variant) < (w[1].w, w[1].variant)));
    assert!(rows.iter().all(|r| r.error.is_none()));
    let plain = run_simulation(&net, &base.clone().with_variant(Variant::Unfair, 0.0), &p, &SimOptions::default(), "u")
        .unwrap();
    for r in rows.iter().filter(|r| r.w == 0.0 && !r.variant.feedback()) {
        assert_eq!(r.day_metrics, plain.day_metrics, "{:?}", r.variant);
    }
}

#[test]
fn profile_length_mismatch_rejected() {
    let net = scenario_network("case33");
    let mut p: Profiles = synth_profiles(1, 15, 1).unwrap();
    p.load_norm.pop();
    assert!(run_simulation(&net, &DispatchConfig::default(), &p, &SimOptions::default(), "bad").is_err());
}
