//! AC power flow: full Newton-Raphson in polar coordinates on the dense bus
//! admittance matrix. Every non-slack bus is a PQ bus.

use crate::error::{Error, Result};
use crate::grid::{build_ybus, Network};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

/// Net nodal injections in p.u., generation positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectionVector {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl InjectionVector {
    pub fn zeros(n: usize) -> Self {
        InjectionVector { p: vec![0.0; n], q: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PfSolution {
    #[serde(skip)]
    pub v: Vec<Complex64>,
    pub v_mag: Vec<f64>,
    /// Injections reproduced from the solved voltages, slack included.
    pub injections: InjectionVector,
    pub iterations: usize,
    pub max_mismatch: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct PfOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PfOptions {
    fn default() -> Self {
        PfOptions { tolerance: 1e-8, max_iterations: 50 }
    }
}

/// A network prepared for repeated power-flow solves.
#[derive(Debug, Clone)]
pub struct PowerFlow {
    ybus: DMatrix<Complex64>,
    slack: usize,
    pq: Vec<usize>,
    opts: PfOptions,
}

impl PowerFlow {
    pub fn new(net: &Network) -> Result<Self> {
        Self::with_options(net, PfOptions::default())
    }

    pub fn with_options(net: &Network, opts: PfOptions) -> Result<Self> {
        let ybus = build_ybus(net)?;
        let pq = (0..net.n_buses()).filter(|&i| i != net.slack_bus).collect();
        Ok(PowerFlow { ybus, slack: net.slack_bus, pq, opts })
    }

    pub fn ybus(&self) -> &DMatrix<Complex64> {
        &self.ybus
    }

    pub fn pq_buses(&self) -> &[usize] {
        &self.pq
    }

    pub fn n_buses(&self) -> usize {
        self.ybus.nrows()
    }

    pub fn solve(&self, inj: &InjectionVector, v0: f64) -> Result<PfSolution> {
        let n = self.n_buses();
        if inj.p.len() != n || inj.q.len() != n {
            return Err(Error::Dimension { expected: n, got: inj.p.len().min(inj.q.len()) });
        }
        if !(v0 > 0.5 && v0 < 1.5) {
            return Err(Error::Config(format!("slack voltage {v0} outside (0.5, 1.5)")));
        }
        let m = self.pq.len();
        let mut va = vec![0.0; n];
        let mut vm = vec![v0; n];
        let mut v: Vec<Complex64> = vm.iter().map(|&m| Complex64::new(m, 0.0)).collect();
        let mut iterations = 0;
        loop {
            iterations += 1;
            let s = self.complex_power(&v);
            let mut f = DVector::zeros(2 * m);
            let mut worst: f64 = 0.0;
            for (k, &i) in self.pq.iter().enumerate() {
                f[k] = s[i].re - inj.p[i];
                f[m + k] = s[i].im - inj.q[i];
                worst = worst.max(f[k].abs()).max(f[m + k].abs());
            }
            if !worst.is_finite() {
                return Err(Error::Divergence { iterations, mismatch: worst });
            }
            if worst <= self.opts.tolerance {
                let injections = InjectionVector {
                    p: s.iter().map(|c| c.re).collect(),
                    q: s.iter().map(|c| c.im).collect(),
                };
                return Ok(PfSolution {
                    v_mag: v.iter().map(|c| c.norm()).collect(),
                    v,
                    injections,
                    iterations,
                    max_mismatch: worst,
                });
            }
            if iterations > self.opts.max_iterations {
                return Err(Error::Divergence { iterations: iterations - 1, mismatch: worst });
            }
            let jac = jacobian(&self.ybus, &v, &self.pq);
            let dx = jac.lu().solve(&(-f)).ok_or(Error::SingularJacobian)?;
            if dx.iter().any(|x| !x.is_finite()) {
                return Err(Error::SingularJacobian);
            }
            for (k, &i) in self.pq.iter().enumerate() {
                va[i] += dx[k];
                vm[i] += dx[m + k];
            }
            for i in 0..n {
                v[i] = if i == self.slack {
                    Complex64::new(v0, 0.0)
                } else {
                    Complex64::from_polar(vm[i], va[i])
                };
            }
        }
    }

    fn complex_power(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        (0..n)
            .map(|i| {
                let mut cur = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    cur += self.ybus[(i, j)] * v[j];
                }
                v[i] * cur.conj()
            })
            .collect()
    }
}

/// Load-flow Jacobian d(P, Q)/d(angle, magnitude) restricted to `pq` rows
/// and columns; the block order is [P; Q] x [angle, magnitude].
pub(crate) fn jacobian(ybus: &DMatrix<Complex64>, v: &[Complex64], pq: &[usize]) -> DMatrix<f64> {
    let n = v.len();
    let m = pq.len();
    let ibus: Vec<Complex64> = (0..n)
        .map(|i| (0..n).map(|j| ybus[(i, j)] * v[j]).sum())
        .collect();
    let j_unit = Complex64::new(0.0, 1.0);
    let mut jac = DMatrix::zeros(2 * m, 2 * m);
    for (r, &i) in pq.iter().enumerate() {
        let vi = v[i];
        for (c, &k) in pq.iter().enumerate() {
            let yv = ybus[(i, k)] * v[k];
            let unit_k = v[k] / v[k].norm();
            let mut ds_da = -j_unit * vi * yv.conj();
            let mut ds_dm = vi * (ybus[(i, k)] * unit_k).conj();
            if i == k {
                ds_da += j_unit * vi * ibus[i].conj();
                ds_dm += ibus[i].conj() * unit_k;
            }
            jac[(r, c)] = ds_da.re;
            jac[(r, m + c)] = ds_dm.re;
            jac[(m + r, c)] = ds_da.im;
            jac[(m + r, m + c)] = ds_dm.im;
        }
    }
    jac
}

pub fn solve_pf(net: &Network, inj: &InjectionVector, v0: f64) -> Result<PfSolution> {
    PowerFlow::new(net)?.solve(inj, v0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VoltageViolation {
    pub bus: usize,
    pub magnitude: f64,
    /// Positive above `v_max`, negative below `v_min`.
    pub excess: f64,
}

/// Lists buses outside `[v_min, v_max]`. An empty band (`v_min == v_max`) is
/// allowed; only an inverted band is a configuration error.
pub fn check_voltage_limits(sol: &PfSolution, v_min: f64, v_max: f64) -> Result<Vec<VoltageViolation>> {
    if v_min > v_max {
        return Err(Error::Config(format!("v_min {v_min} exceeds v_max {v_max}")));
    }
    Ok(sol
        .v_mag
        .iter()
        .enumerate()
        .filter_map(|(bus, &m)| {
            if m > v_max {
                Some(VoltageViolation { bus, magnitude: m, excess: m - v_max })
            } else if m < v_min {
                Some(VoltageViolation { bus, magnitude: m, excess: m - v_min })
            } else {
                None
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::tests::two_bus;

    #[test]
    fn zero_injection_is_flat() {
        let net = two_bus();
        let sol = solve_pf(&net, &InjectionVector::zeros(2), 1.02).unwrap();
        assert_eq!(sol.iterations, 1);
        assert!(sol.v_mag.iter().all(|&m| m == 1.02));
        assert!(check_voltage_limits(&sol, 0.95, 1.05).unwrap().is_empty());
    }

    #[test]
    fn two_bus_matches_closed_form() {
        let net = two_bus();
        let mut inj = InjectionVector::zeros(2);
        inj.p[1] = 0.5;
        let sol = solve_pf(&net, &inj, 1.0).unwrap();
        // |V|^4 - (2(rP + xQ) + V0^2)|V|^2 + |z|^2 |S|^2 = 0, larger root
        let (r, x, p, q, v0): (f64, f64, f64, f64, f64) = (0.01, 0.02, 0.5, 0.0, 1.0);
        let b = 2.0 * (r * p + x * q) + v0 * v0;
        let c = (r * r + x * x) * (p * p + q * q);
        let v2 = (b + (b * b - 4.0 * c).sqrt()) / 2.0;
        assert!((sol.v_mag[1] - v2.sqrt()).abs() < 1e-9, "{} vs {}", sol.v_mag[1], v2.sqrt());
        assert_eq!(sol.v[0], Complex64::new(1.0, 0.0));
        assert!(sol.max_mismatch <= 1e-8);
    }

    #[test]
    fn rejects_bad_inputs() {
        let net = two_bus();
        assert!(matches!(
            solve_pf(&net, &InjectionVector::zeros(3), 1.0),
            Err(Error::Dimension { .. })
        ));
        assert!(matches!(solve_pf(&net, &InjectionVector::zeros(2), 1.6), Err(Error::Config(_))));
    }

    #[test]
    fn impossible_load_diverges() {
        let net = two_bus();
        let mut inj = InjectionVector::zeros(2);
        inj.p[1] = -50.0;
        assert!(matches!(
            solve_pf(&net, &inj, 1.0),
            Err(Error::Divergence { .. }) | Err(Error::SingularJacobian)
        ));
    }

    fn sol_with(v_mag: Vec<f64>) -> PfSolution {
        PfSolution {
            v: v_mag.iter().map(|&m| Complex64::new(m, 0.0)).collect(),
            injections: InjectionVector::zeros(v_mag.len()),
            v_mag,
            iterations: 1,
            max_mismatch: 0.0,
        }
    }

    #[test]
    fn over_voltage_reported_with_sign() {
        let v = check_voltage_limits(&sol_with(vec![1.0, 1.07, 0.94]), 0.95, 1.05).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].bus, 1);
        assert!((v[0].excess - 0.02).abs() < 1e-12);
        assert!((v[1].excess + 0.01).abs() < 1e-12);
    }

    #[test]
    fn degenerate_band_flags_every_deviation() {
        let v = check_voltage_limits(&sol_with(vec![1.0, 1.01, 0.99]), 1.0, 1.0).unwrap();
        assert_eq!(v.iter().map(|x| x.bus).collect::<Vec<_>>(), vec![1, 2]);
        assert!(check_voltage_limits(&sol_with(vec![1.0]), 1.05, 0.95).is_err());
    }
}
