//! Voltage-magnitude sensitivities to nodal active/reactive injections and
//! the first-order voltage model built on them.

use crate::error::{Error, Result};
use crate::grid::Network;
use crate::powerflow::{jacobian, InjectionVector, PfSolution, PowerFlow};
use nalgebra::DMatrix;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone)]
pub struct SensitivityMatrices {
    /// `kp[(i, j)]` = d|v_i| / d p_j.
    pub kp: DMatrix<f64>,
    /// `kq[(i, j)]` = d|v_i| / d q_j.
    pub kq: DMatrix<f64>,
    pub base_point: PfSolution,
}

/// Sensitivities at a converged operating point. Slack rows and columns are
/// zero: the slack magnitude is fixed and slack injections are absorbed.
pub fn voltage_sensitivities(net: &Network, base: &PfSolution) -> Result<SensitivityMatrices> {
    let pf = PowerFlow::new(net)?;
    sensitivities_with(&pf, base, None)
}

/// Like [`voltage_sensitivities`] with a prepared [`PowerFlow`]. When
/// `columns` is given only those injection columns are filled, which is all
/// the dispatcher needs when only PV buses deviate from the base point.
pub fn sensitivities_with(
    pf: &PowerFlow,
    base: &PfSolution,
    columns: Option<&[usize]>,
) -> Result<SensitivityMatrices> {
    let n = pf.n_buses();
    if base.v.len() != n {
        return Err(Error::Dimension { expected: n, got: base.v.len() });
    }
    let pq = pf.pq_buses();
    let m = pq.len();
    let jac = jacobian(pf.ybus(), &base.v, pq);
    let lu = jac.lu();

    // positions (within pq) of the injection columns we solve for
    let wanted: Vec<usize> = match columns {
        None => (0..m).collect(),
        Some(cols) => {
            let mut w: Vec<usize> = cols.iter().filter_map(|c| pq.iter().position(|b| b == c)).collect();
            w.sort_unstable();
            w.dedup();
            w
        }
    };
    let mut rhs = DMatrix::zeros(2 * m, 2 * wanted.len());
    for (k, &c) in wanted.iter().enumerate() {
        rhs[(c, k)] = 1.0;
        rhs[(m + c, wanted.len() + k)] = 1.0;
    }
    let x = lu.solve(&rhs).ok_or(Error::SingularJacobian)?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularJacobian);
    }

    let mut kp = DMatrix::zeros(n, n);
    let mut kq = DMatrix::zeros(n, n);
    for (r, &i) in pq.iter().enumerate() {
        for (k, &c) in wanted.iter().enumerate() {
            let j = pq[c];
            kp[(i, j)] = x[(m + r, k)];
            kq[(i, j)] = x[(m + r, wanted.len() + k)];
        }
    }
    Ok(SensitivityMatrices { kp, kq, base_point: base.clone() })
}

impl SensitivityMatrices {
    pub fn n_buses(&self) -> usize {
        self.kp.nrows()
    }

    /// First-order voltage magnitudes at injections `inj`:
    /// |v_i| = |v_i*| + sum_j Kp_ij (p_j - p_j*) + Kq_ij (q_j - q_j*).
    pub fn predict_voltages(&self, inj: &InjectionVector) -> Result<Vec<f64>> {
        let n = self.n_buses();
        if inj.p.len() != n || inj.q.len() != n {
            return Err(Error::Dimension { expected: n, got: inj.p.len().min(inj.q.len()) });
        }
        let base = &self.base_point;
        let dp: Vec<f64> = (0..n).map(|j| inj.p[j] - base.injections.p[j]).collect();
        let dq: Vec<f64> = (0..n).map(|j| inj.q[j] - base.injections.q[j]).collect();
        Ok((0..n)
            .map(|i| {
                let mut v = base.v_mag[i];
                for j in 0..n {
                    v += self.kp[(i, j)] * dp[j] + self.kq[(i, j)] * dq[j];
                }
                v
            })
            .collect())
    }

    /// Long-format dump: `i,j,kp,kq` with bus indices.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "i,j,kp,kq")?;
        for i in 0..self.n_buses() {
            for j in 0..self.n_buses() {
                writeln!(f, "{},{},{},{}", i, j, self.kp[(i, j)], self.kq[(i, j)])?;
            }
        }
        Ok(())
    }
}

pub fn predict_voltages(sens: &SensitivityMatrices, inj: &InjectionVector) -> Result<Vec<f64>> {
    sens.predict_voltages(inj)
}
