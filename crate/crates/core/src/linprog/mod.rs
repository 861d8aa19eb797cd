//! Dense linear programming: `min c'x + offset` subject to row constraints
//! and per-variable bounds.

mod simplex;

use crate::error::{Error, Result};
use serde::Serialize;
use std::fmt::Write as _;

pub use simplex::solve_lp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    /// Constant added to the objective value.
    pub offset: f64,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
    pub names: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl std::fmt::Display for LpStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LpStatus::Optimal => "optimal",
            LpStatus::Infeasible => "infeasible",
            LpStatus::Unbounded => "unbounded",
            LpStatus::IterationLimit => "iteration_limit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Multipliers `y` with `c = A'y + d`; zero for rows dropped as redundant.
    pub row_duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lo: f64, hi: f64, cost: f64) -> usize {
        self.objective.push(cost);
        self.bounds.push((lo, hi));
        self.names.push(name.into());
        for c in &mut self.constraints {
            c.coeffs.push(0.0);
        }
        self.objective.len() - 1
    }

    /// Adds a row given as sparse `(variable, coefficient)` terms; repeated
    /// variables accumulate.
    pub fn add_row(&mut self, name: impl Into<String>, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.n_vars()];
        for &(j, a) in terms {
            coeffs[j] += a;
        }
        self.constraints.push(Constraint { coeffs, relation, rhs, name: name.into() });
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.bounds.len() != n {
            return Err(Error::Dimension { expected: n, got: self.bounds.len() });
        }
        if !self.names.is_empty() && self.names.len() != n {
            return Err(Error::Dimension { expected: n, got: self.names.len() });
        }
        if self.objective.iter().any(|c| !c.is_finite()) || !self.offset.is_finite() {
            return Err(Error::Validation("objective has non-finite entries".into()));
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::Validation(format!("variable {j} has bounds [{lo}, {hi}]")));
            }
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::Dimension { expected: n, got: c.coeffs.len() });
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::Validation(format!("row {i} has non-finite entries")));
            }
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.offset + self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>()
    }

    /// Largest bound or row violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (&(lo, hi), &v) in self.bounds.iter().zip(x) {
            worst = worst.max(lo - v).max(v - hi);
        }
        for c in &self.constraints {
            let act: f64 = c.coeffs.iter().zip(x).map(|(a, v)| a * v).sum();
            let r = act - c.rhs;
            worst = worst.max(match c.relation {
                Relation::Le => r,
                Relation::Ge => -r,
                Relation::Eq => r.abs(),
            });
        }
        worst
    }

    fn var_name(&self, j: usize) -> String {
        match self.names.get(j) {
            Some(s) if !s.is_empty() => s.clone(),
            _ => format!("x{j}"),
        }
    }

    /// Human-readable dump in CPLEX LP style.
    pub fn to_lp_text(&self) -> String {
        let mut out = String::new();
        let term = |out: &mut String, first: &mut bool, a: f64, name: &str| {
            let _ = match (*first, a < 0.0) {
                (true, _) => write!(out, " {a} {name}"),
                (false, true) => write!(out, " - {} {name}", -a),
                (false, false) => write!(out, " + {a} {name}"),
            };
            *first = false;
        };
        out.push_str("Minimize\n obj:");
        let mut first = true;
        for (j, &c) in self.objective.iter().enumerate() {
            if c != 0.0 {
                term(&mut out, &mut first, c, &self.var_name(j));
            }
        }
        if self.offset != 0.0 || first {
            let _ = match (first, self.offset < 0.0) {
                (true, _) => write!(out, " {}", self.offset),
                (false, true) => write!(out, " - {}", -self.offset),
                (false, false) => write!(out, " + {}", self.offset),
            };
        }
        out.push_str("\nSubject To\n");
        for (i, c) in self.constraints.iter().enumerate() {
            let name = if c.name.is_empty() { format!("r{i}") } else { c.name.clone() };
            let _ = write!(out, " {name}:");
            let mut first = true;
            for (j, &a) in c.coeffs.iter().enumerate() {
                if a != 0.0 {
                    term(&mut out, &mut first, a, &self.var_name(j));
                }
            }
            if first {
                out.push_str(" 0");
            }
            let rel = match c.relation {
                Relation::Le => "<=",
                Relation::Eq => "=",
                Relation::Ge => ">=",
            };
            let _ = writeln!(out, " {rel} {}", c.rhs);
        }
        out.push_str("Bounds\n");
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            let name = self.var_name(j);
            let _ = match (lo.is_finite(), hi.is_finite()) {
                (false, false) => writeln!(out, " {name} free"),
                (true, false) => writeln!(out, " {name} >= {lo}"),
                (false, true) => writeln!(out, " -inf <= {name} <= {hi}"),
                (true, true) => writeln!(out, " {lo} <= {name} <= {hi}"),
            };
        }
        out.push_str("End\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_var_widens_rows() {
        let mut p = LpProblem::new();
        let x = p.add_var("x", 0.0, 1.0, 1.0);
        p.add_row("a", &[(x, 1.0), (x, 2.0)], Relation::Le, 5.0);
        let y = p.add_var("y", 0.0, f64::INFINITY, 0.0);
        assert_eq!(p.constraints[0].coeffs, vec![3.0, 0.0]);
        assert_eq!(y, 1);
        p.validate().unwrap();
    }

    #[test]
    fn validation_catches_bad_input() {
        let mut p = LpProblem::new();
        p.add_var("x", 2.0, 1.0, 0.0);
        assert!(p.validate().is_err());
        let mut p = LpProblem::new();
        p.add_var("x", 0.0, 1.0, 0.0);
        p.constraints.push(Constraint { coeffs: vec![1.0, 2.0], relation: Relation::Le, rhs: 0.0, name: String::new() });
        assert!(matches!(p.validate(), Err(Error::Dimension { .. })));
    }

    #[test]
    fn lp_text_lists_everything() {
        let mut p = LpProblem::new();
        let x = p.add_var("p_1", 0.0, 0.5, -1.0);
        let g = p.add_var("gamma", f64::NEG_INFINITY, f64::INFINITY, 0.0);
        p.add_row("v_hi_2", &[(x, 0.1), (g, -2.0)], Relation::Le, 0.05);
        let txt = p.to_lp_text();
        assert!(txt.contains("obj: -1 p_1"));
        assert!(txt.contains("v_hi_2: 0.1 p_1 - 2 gamma <= 0.05"));
        assert!(txt.contains("gamma free"));
        assert!(txt.contains("0 <= p_1 <= 0.5"));
    }
}
