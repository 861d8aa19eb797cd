//! Network data model: buses, branches, loads and PV plants in per-unit on
//! the system MVA base, plus admittance-matrix assembly.

mod matpower;
mod scenario;

pub use matpower::{parse_matpower, read_matpower, write_matpower};
pub use scenario::{apply_scenario, PvSpec, Scenario, ScenarioPv};

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::collections::VecDeque;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BusKind {
    Slack,
    Pq,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bus {
    /// Position in every per-bus vector of the crate.
    pub index: usize,
    /// Bus number as written in the case file.
    pub id: usize,
    pub kind: BusKind,
    pub base_kv: f64,
    /// Shunt conductance and susceptance at 1 p.u. voltage (p.u.).
    pub gs: f64,
    pub bs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branch {
    pub from: usize,
    pub to: usize,
    pub r: f64,
    pub x: f64,
    /// Total line-charging susceptance, split evenly between both ends.
    pub b_shunt: f64,
}

impl Branch {
    pub fn series_admittance(&self) -> Complex64 {
        Complex64::new(1.0, 0.0) / Complex64::new(self.r, self.x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadPoint {
    pub bus: usize,
    pub p_nom: f64,
    pub q_nom: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PvPlant {
    pub id: usize,
    pub bus: usize,
    /// Inverter apparent-power rating (p.u.).
    pub s_rated: f64,
    /// MPP nameplate (p.u.); the normalized PV profile is scaled by this.
    pub p_capacity: f64,
    /// Power-factor slope: |q| <= xi * p.
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Network {
    pub name: String,
    pub base_mva: f64,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub slack_bus: usize,
    pub pv_plants: Vec<PvPlant>,
    pub loads: Vec<LoadPoint>,
}

impl Network {
    /// Assembles a network and checks every structural invariant.
    pub fn new(
        name: impl Into<String>,
        base_mva: f64,
        buses: Vec<Bus>,
        branches: Vec<Branch>,
        loads: Vec<LoadPoint>,
        pv_plants: Vec<PvPlant>,
    ) -> Result<Self> {
        let slack: Vec<usize> = buses
            .iter()
            .filter(|b| b.kind == BusKind::Slack)
            .map(|b| b.index)
            .collect();
        if slack.len() != 1 {
            return Err(Error::Validation(format!(
                "expected exactly one slack bus, found {}",
                slack.len()
            )));
        }
        let net = Network {
            name: name.into(),
            base_mva,
            buses,
            branches,
            slack_bus: slack[0],
            pv_plants,
            loads,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_mva > 0.0) {
            return Err(Error::Validation("base_mva must be positive".into()));
        }
        if self.buses.is_empty() {
            return Err(Error::Validation("network has no buses".into()));
        }
        let n = self.buses.len();
        for (i, b) in self.buses.iter().enumerate() {
            if b.index != i {
                return Err(Error::Validation(format!(
                    "bus indices must be contiguous, bus {} has index {}",
                    b.id, b.index
                )));
            }
        }
        let mut ids: Vec<usize> = self.buses.iter().map(|b| b.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("duplicate bus numbers".into()));
        }
        let slacks = self.buses.iter().filter(|b| b.kind == BusKind::Slack).count();
        if slacks != 1 || self.buses[self.slack_bus].kind != BusKind::Slack {
            return Err(Error::Validation(format!(
                "expected exactly one slack bus, found {slacks}"
            )));
        }
        for br in &self.branches {
            if br.from >= n || br.to >= n {
                return Err(Error::Validation(format!(
                    "branch {}-{} references a missing bus",
                    br.from, br.to
                )));
            }
            if br.from == br.to {
                return Err(Error::Validation(format!("branch loops on bus {}", br.from)));
            }
            if br.r < 0.0 {
                return Err(Error::Validation(format!(
                    "branch {}-{} has negative resistance",
                    self.buses[br.from].id, self.buses[br.to].id
                )));
            }
            if Complex64::new(br.r, br.x).norm() <= 0.0 {
                return Err(Error::Validation(format!(
                    "branch {}-{} has zero impedance",
                    self.buses[br.from].id, self.buses[br.to].id
                )));
            }
        }
        for ld in &self.loads {
            if ld.bus >= n {
                return Err(Error::Validation(format!("load on missing bus {}", ld.bus)));
            }
            if ld.p_nom < 0.0 {
                return Err(Error::Validation(format!(
                    "negative nominal load on bus {}",
                    self.buses[ld.bus].id
                )));
            }
        }
        let mut seen = vec![false; n];
        for pv in &self.pv_plants {
            if pv.bus >= n {
                return Err(Error::Validation(format!("PV plant {} on missing bus", pv.id)));
            }
            if seen[pv.bus] {
                return Err(Error::Validation(format!(
                    "more than one PV plant on bus {}",
                    self.buses[pv.bus].id
                )));
            }
            seen[pv.bus] = true;
            if !(pv.s_rated > 0.0) || !(pv.p_capacity > 0.0) || !(pv.xi >= 0.0) {
                return Err(Error::Validation(format!(
                    "PV plant {} needs s_rated > 0, p_capacity > 0, xi >= 0",
                    pv.id
                )));
            }
        }
        if !self.is_connected() {
            return Err(Error::Validation("branch graph is disconnected".into()));
        }
        Ok(())
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn bus_by_id(&self, id: usize) -> Option<usize> {
        self.buses.iter().position(|b| b.id == id)
    }

    fn is_connected(&self) -> bool {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for br in &self.branches {
            adj[br.from].push(br.to);
            adj[br.to].push(br.from);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.slack_bus]);
        seen[self.slack_bus] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Nominal (p, q) demand aggregated per bus.
    pub fn nominal_bus_loads(&self) -> (Vec<f64>, Vec<f64>) {
        let mut p = vec![0.0; self.n_buses()];
        let mut q = vec![0.0; self.n_buses()];
        for ld in &self.loads {
            p[ld.bus] += ld.p_nom;
            q[ld.bus] += ld.q_nom;
        }
        (p, q)
    }

    /// Converts a per-unit power to kW.
    pub fn pu_to_kw(&self, p: f64) -> f64 {
        p * self.base_mva * 1000.0
    }

    pub fn kw_to_pu(&self, kw: f64) -> f64 {
        kw / (self.base_mva * 1000.0)
    }
}

/// Bus admittance matrix of the pi-model branches and bus shunts.
pub fn build_ybus(net: &Network) -> Result<DMatrix<Complex64>> {
    net.validate()?;
    let n = net.n_buses();
    let mut y = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for br in &net.branches {
        if Complex64::new(br.r, br.x).norm() <= 0.0 {
            return Err(Error::Validation("zero-impedance branch".into()));
        }
        let ys = br.series_admittance();
        let ysh = Complex64::new(0.0, br.b_shunt / 2.0);
        y[(br.from, br.from)] += ys + ysh;
        y[(br.to, br.to)] += ys + ysh;
        y[(br.from, br.to)] -= ys;
        y[(br.to, br.from)] -= ys;
    }
    for b in &net.buses {
        y[(b.index, b.index)] += Complex64::new(b.gs, b.bs);
    }
    Ok(y)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn two_bus() -> Network {
        let buses = vec![
            Bus { index: 0, id: 1, kind: BusKind::Slack, base_kv: 12.66, gs: 0.0, bs: 0.0 },
            Bus { index: 1, id: 2, kind: BusKind::Pq, base_kv: 12.66, gs: 0.0, bs: 0.0 },
        ];
        let branches = vec![Branch { from: 0, to: 1, r: 0.01, x: 0.02, b_shunt: 0.0 }];
        Network::new("two-bus", 1.0, buses, branches, vec![], vec![]).unwrap()
    }

    #[test]
    fn two_bus_ybus_entries() {
        let y = build_ybus(&two_bus()).unwrap();
        assert!((y[(0, 0)] - Complex64::new(20.0, -40.0)).norm() < 1e-9);
        assert!((y[(0, 1)] - Complex64::new(-20.0, 40.0)).norm() < 1e-9);
        assert_eq!(y[(0, 1)], y[(1, 0)]);
    }

    #[test]
    fn no_branches_is_disconnected() {
        let mut net = two_bus();
        net.branches.clear();
        assert!(matches!(build_ybus(&net), Err(Error::Validation(_))));
    }

    #[test]
    fn zero_impedance_rejected() {
        let mut net = two_bus();
        net.branches[0].r = 0.0;
        net.branches[0].x = 0.0;
        assert!(net.validate().is_err());
    }

    #[test]
    fn two_slacks_rejected() {
        let mut net = two_bus();
        net.buses[1].kind = BusKind::Slack;
        let r = Network::new("x", 1.0, net.buses, net.branches, vec![], vec![]);
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn row_sums_equal_shunts() {
        let mut net = two_bus();
        net.branches[0].b_shunt = 0.1;
        net.buses[1].bs = 0.05;
        let y = build_ybus(&net).unwrap();
        let s0: Complex64 = (0..2).map(|j| y[(0, j)]).sum();
        let s1: Complex64 = (0..2).map(|j| y[(1, j)]).sum();
        assert!((s0 - Complex64::new(0.0, 0.05)).norm() < 1e-12);
        assert!((s1 - Complex64::new(0.0, 0.10)).norm() < 1e-12);
    }
}
