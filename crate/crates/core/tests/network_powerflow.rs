mod common;

use common::{data_dir, scenario_network, SCENARIOS};
use faircurtail::grid::{parse_matpower, read_matpower, write_matpower, Network};
use faircurtail::powerflow::{InjectionVector, PfOptions, PowerFlow};
use num_complex::Complex64;
use std::collections::VecDeque;

#[test]
fn shipped_cases_parse_with_expected_shape() {
    for (file, buses, branches) in [("case33.m", 33, 32), ("case69.m", 69, 68), ("case141.m", 141, 140)] {
        let net = read_matpower(data_dir().join(file)).unwrap();
        assert_eq!(net.n_buses(), buses, "{file}");
        assert_eq!(net.branches.len(), branches, "{file}");
        assert_eq!(net.buses[net.slack_bus].id, 1, "{file}");
        assert!(!net.loads.is_empty(), "{file}");
    }
    let cigre = read_matpower(data_dir().join("cigre_lv.m")).unwrap();
    assert_eq!(cigre.branches.len(), cigre.n_buses() - 1);
}

#[test]
fn scenarios_attach_their_plants() {
    for (sc, plants) in SCENARIOS.iter().zip([8, 8, 12, 6]) {
        let net = scenario_network(sc);
        assert_eq!(net.pv_plants.len(), plants, "{sc}");
        assert!(net.pv_plants.iter().all(|pv| pv.s_rated > pv.p_capacity && pv.bus != net.slack_bus));
    }
}

#[test]
fn write_parse_round_trip_on_case33() {
    let net = read_matpower(data_dir().join("case33.m")).unwrap();
    let again = parse_matpower(&write_matpower(&net)).unwrap();
    assert_eq!(again.n_buses(), net.n_buses());
    assert_eq!(again.branches, net.branches);
    assert_eq!(again.nominal_bus_loads(), net.nominal_bus_loads());
}

/// Backward/forward sweep on a radial network: currents summed up the tree,
/// voltages dropped down it.
fn sweep_oracle(net: &Network, inj: &InjectionVector, v0: f64) -> Vec<f64> {
    let n = net.n_buses();
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, br) in net.branches.iter().enumerate() {
        adj[br.from].push((br.to, k));
        adj[br.to].push((br.from, k));
    }
    let mut order = vec![net.slack_bus];
    let mut seen = vec![false; n];
    seen[net.slack_bus] = true;
    let mut queue = VecDeque::from([net.slack_bus]);
    while let Some(i) = queue.pop_front() {
        for &(j, k) in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                children[i].push((j, k));
                order.push(j);
                queue.push_back(j);
            }
        }
    }
    let mut shunt = vec![Complex64::new(0.0, 0.0); n];
    for b in &net.buses {
        shunt[b.index] += Complex64::new(b.gs, b.bs);
    }
    for br in &net.branches {
        shunt[br.from] += Complex64::new(0.0, br.b_shunt / 2.0);
        shunt[br.to] += Complex64::new(0.0, br.b_shunt / 2.0);
    }
    let mut v = vec![Complex64::new(v0, 0.0); n];
    for _ in 0..200 {
        let mut sub: Vec<Complex64> = (0..n)
            .map(|i| (Complex64::new(inj.p[i], inj.q[i]) / v[i]).conj() - shunt[i] * v[i])
            .collect();
        for &i in order.iter().rev() {
            for &(j, _) in &children[i] {
                let s = sub[j];
                sub[i] += s;
            }
        }
        let mut next = v.clone();
        for &i in &order {
            for &(j, k) in &children[i] {
                let z = Complex64::new(net.branches[k].r, net.branches[k].x);
                next[j] = next[i] + z * sub[j];
            }
        }
        let change = next.iter().zip(&v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        v = next;
        if change < 1e-14 {
            break;
        }
    }
    v.iter().map(|x| x.norm()).collect()
}

#[test]
fn newton_matches_sweep_oracle() {
    for sc in SCENARIOS {
        let net = scenario_network(sc);
        let pf = PowerFlow::with_options(&net, PfOptions { tolerance: 1e-9, max_iterations: 50 }).unwrap();
        let (lp, lq) = net.nominal_bus_loads();
        for (load, sun) in [(1.0, 0.0), (0.3, 1.0), (0.0, 0.6)] {
            let mut inj = InjectionVector {
                p: lp.iter().map(|v| -load * v).collect(),
                q: lq.iter().map(|v| -load * v).collect(),
            };
            for pv in &net.pv_plants {
                inj.p[pv.bus] += sun * pv.p_capacity;
                inj.q[pv.bus] -= 0.1 * sun * pv.p_capacity;
            }
            let newton = pf.solve(&inj, 1.0).unwrap();
            let oracle = sweep_oracle(&net, &inj, 1.0);
            let worst = newton.v_mag.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-7, "{sc} load {load} sun {sun}: {worst:e}");
        }
    }
}

#[test]
fn solution_reproduces_requested_injections() {
    let net = scenario_network("case69");
    let pf = PowerFlow::new(&net).unwrap();
    let (lp, lq) = net.nominal_bus_loads();
    let inj = InjectionVector { p: lp.iter().map(|v| -v).collect(), q: lq.iter().map(|v| -v).collect() };
    let sol = pf.solve(&inj, 1.0).unwrap();
    for j in (0..net.n_buses()).filter(|&j| j != net.slack_bus) {
        assert!((sol.injections.p[j] - inj.p[j]).abs() < 1e-8);
        assert!((sol.injections.q[j] - inj.q[j]).abs() < 1e-8);
    }
    // the slack covers demand plus losses
    let demand: f64 = lp.iter().sum();
    assert!(sol.injections.p[net.slack_bus] > demand);
}
