//! Bounded-variable primal simplex on a dense tableau.
//!
//! Every row gets a slack (`a x + s = b`) whose bounds encode the relation,
//! so the working problem is `A x = b, l <= x <= u`. Rows whose initial slack
//! would be out of bounds get an artificial and phase 1 drives those to zero.
//! Pricing is Dantzig's largest reduced cost; after a run of degenerate
//! pivots it switches to Bland's smallest-index rule until progress resumes.

use super::{LpProblem, LpSolution, LpStatus, Relation};
use crate::error::Result;
use nalgebra::DMatrix;

const PRIMAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
const REFACTOR_EVERY: usize = 100;

pub fn solve_lp(p: &LpProblem) -> Result<LpSolution> {
    p.validate()?;
    let n = p.n_vars();

    // presolve: drop rows that bounds alone satisfy, catch empty rows
    let mut kept = Vec::new();
    for (i, c) in p.constraints.iter().enumerate() {
        let (lo_act, hi_act) = activity_range(&c.coeffs, &p.bounds);
        let scale = 1.0 + c.rhs.abs();
        let redundant = match c.relation {
            Relation::Le => hi_act <= c.rhs,
            Relation::Ge => lo_act >= c.rhs,
            Relation::Eq => false,
        };
        if c.coeffs.iter().all(|&a| a == 0.0) {
            let ok = match c.relation {
                Relation::Le => 0.0 <= c.rhs + PRIMAL_TOL * scale,
                Relation::Ge => 0.0 >= c.rhs - PRIMAL_TOL * scale,
                Relation::Eq => c.rhs.abs() <= PRIMAL_TOL * scale,
            };
            if !ok {
                return Ok(failed(p, LpStatus::Infeasible, 0));
            }
        } else if !redundant {
            kept.push(i);
        }
    }

    let mut t = Tableau::new(p, &kept);
    let mut iters = 0;

    if t.n_art > 0 {
        let mut cost = vec![0.0; t.nc];
        for c in &mut cost[t.n_struct + t.m..] {
            *c = 1.0;
        }
        let status = t.run(&cost, &mut iters, 1.0);
        let infeas: f64 = (t.n_struct + t.m..t.nc).map(|j| t.x[j]).sum();
        let rhs_scale = 1.0 + t.b.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if status != LpStatus::Optimal || infeas > 1e-8 * rhs_scale {
            let status = if status == LpStatus::IterationLimit { status } else { LpStatus::Infeasible };
            return Ok(failed(p, status, iters));
        }
        t.retire_artificials();
    }

    let mut cost = vec![0.0; t.nc];
    cost[..n].copy_from_slice(&p.objective);
    let cmax = p.objective.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
    let status = t.run(&cost, &mut iters, if cmax > 0.0 { cmax } else { 1.0 });
    if status != LpStatus::Optimal {
        return Ok(failed(p, status, iters));
    }

    let x: Vec<f64> = t.x[..n].to_vec();
    let d = t.reduced_costs(&cost);
    let mut row_duals = vec![0.0; p.constraints.len()];
    for (r, &i) in kept.iter().enumerate() {
        row_duals[i] = -d[n + r];
    }
    Ok(LpSolution {
        status,
        objective_value: p.objective_at(&x),
        x,
        row_duals,
        reduced_costs: d[..n].to_vec(),
        iterations: iters,
    })
}

fn failed(p: &LpProblem, status: LpStatus, iterations: usize) -> LpSolution {
    LpSolution {
        status,
        x: vec![f64::NAN; p.n_vars()],
        objective_value: f64::NAN,
        row_duals: vec![f64::NAN; p.constraints.len()],
        reduced_costs: vec![f64::NAN; p.n_vars()],
        iterations,
    }
}

fn activity_range(coeffs: &[f64], bounds: &[(f64, f64)]) -> (f64, f64) {
    let mut lo = 0.0;
    let mut hi = 0.0;
    for (&a, &(l, u)) in coeffs.iter().zip(bounds) {
        if a > 0.0 {
            lo += a * l;
            hi += a * u;
        } else if a < 0.0 {
            lo += a * u;
            hi += a * l;
        }
    }
    (lo, hi)
}

struct Tableau {
    m: usize,
    nc: usize,
    n_struct: usize,
    n_art: usize,
    /// Original `[A | I | art]`, row-major, for refactorization.
    a: Vec<f64>,
    b: Vec<f64>,
    /// `B^-1 [A | I | art]`, row-major.
    t: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// Columns never allowed to enter (retired artificials).
    barred: Vec<bool>,
}

impl Tableau {
    fn new(p: &LpProblem, rows: &[usize]) -> Self {
        let n = p.n_vars();
        let m = rows.len();
        let mut lo: Vec<f64> = p.bounds.iter().map(|b| b.0).collect();
        let mut hi: Vec<f64> = p.bounds.iter().map(|b| b.1).collect();
        let mut x: Vec<f64> = p
            .bounds
            .iter()
            .map(|&(l, u)| if l.is_finite() { l } else if u.is_finite() { u } else { 0.0 })
            .collect();
        for &i in rows {
            let (l, u) = match p.constraints[i].relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lo.push(l);
            hi.push(u);
        }

        // initial slack values and which rows need an artificial
        let mut art_rows = Vec::new();
        let mut slack_val = vec![0.0; m];
        let mut resid = vec![0.0; m];
        for (r, &i) in rows.iter().enumerate() {
            let c = &p.constraints[i];
            let act: f64 = c.coeffs.iter().zip(&x).map(|(a, v)| a * v).sum();
            let s = c.rhs - act;
            if s >= lo[n + r] && s <= hi[n + r] {
                slack_val[r] = s;
            } else {
                slack_val[r] = s.clamp(lo[n + r], hi[n + r]);
                resid[r] = s - slack_val[r];
                art_rows.push(r);
            }
        }
        x.extend_from_slice(&slack_val);
        let n_art = art_rows.len();
        let nc = n + m + n_art;
        let mut a = vec![0.0; m * nc];
        let mut b = vec![0.0; m];
        for (r, &i) in rows.iter().enumerate() {
            let c = &p.constraints[i];
            a[r * nc..r * nc + n].copy_from_slice(&c.coeffs);
            a[r * nc + n + r] = 1.0;
            b[r] = c.rhs;
        }
        let mut basis: Vec<usize> = (n..n + m).collect();
        for (k, &r) in art_rows.iter().enumerate() {
            let col = n + m + k;
            a[r * nc + col] = resid[r].signum();
            lo.push(0.0);
            hi.push(f64::INFINITY);
            x.push(resid[r].abs());
            basis[r] = col;
        }
        // B is diagonal with entries +-1, so B^-1 A is a row sign flip
        let mut t = a.clone();
        for r in 0..m {
            let piv = a[r * nc + basis[r]];
            if piv != 1.0 {
                for v in &mut t[r * nc..(r + 1) * nc] {
                    *v /= piv;
                }
            }
        }
        let mut in_basis = vec![false; nc];
        for &j in &basis {
            in_basis[j] = true;
        }
        Tableau { m, nc, n_struct: n, n_art, a, b, t, lo, hi, x, basis, in_basis, barred: vec![false; nc] }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for r in 0..self.m {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.t[r * self.nc..(r + 1) * self.nc];
                for (dj, &tj) in d.iter_mut().zip(row) {
                    *dj -= cb * tj;
                }
            }
        }
        for &j in &self.basis {
            d[j] = 0.0;
        }
        d
    }

    /// Recomputes `B^-1 [A|I|art]` and basic values from the original data.
    fn refactor(&mut self) {
        let (m, nc) = (self.m, self.nc);
        if m == 0 {
            return;
        }
        let bmat = DMatrix::from_fn(m, m, |i, k| self.a[i * nc + self.basis[k]]);
        let lu = bmat.lu();
        let full = DMatrix::from_fn(m, nc, |i, j| self.a[i * nc + j]);
        let Some(sol) = lu.solve(&full) else { return };
        let mut rhs = nalgebra::DVector::from_column_slice(&self.b);
        for j in 0..nc {
            if !self.in_basis[j] && self.x[j] != 0.0 {
                for i in 0..m {
                    rhs[i] -= self.a[i * nc + j] * self.x[j];
                }
            }
        }
        let Some(xb) = lu.solve(&rhs) else { return };
        if sol.iter().chain(xb.iter()).any(|v| !v.is_finite()) {
            return;
        }
        for i in 0..m {
            for j in 0..nc {
                self.t[i * nc + j] = sol[(i, j)];
            }
            self.x[self.basis[i]] = xb[i];
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.nc;
        let piv = self.t[r * nc + j];
        let mut prow: Vec<f64> = self.t[r * nc..(r + 1) * nc].iter().map(|v| v / piv).collect();
        prow[j] = 1.0;
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * nc + j];
            if f != 0.0 {
                let row = &mut self.t[i * nc..(i + 1) * nc];
                for (v, &pv) in row.iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                row[j] = 0.0;
            }
        }
        self.t[r * nc..(r + 1) * nc].copy_from_slice(&prow);
        self.in_basis[self.basis[r]] = false;
        self.in_basis[j] = true;
        self.basis[r] = j;
    }

    /// Entering column and direction (+1 increase, -1 decrease).
    fn price(&self, d: &[f64], tol: f64, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.nc {
            if self.in_basis[j] || self.barred[j] || self.lo[j] == self.hi[j] {
                continue;
            }
            let can_up = self.x[j] < self.hi[j];
            let can_down = self.x[j] > self.lo[j];
            let dir = if d[j] < -tol && can_up {
                1.0
            } else if d[j] > tol && can_down {
                -1.0
            } else {
                continue;
            };
            if bland {
                return Some((j, dir));
            }
            if d[j].abs() > best_score {
                best_score = d[j].abs();
                best = Some((j, dir));
            }
        }
        best
    }

    /// Runs simplex iterations for `cost` until optimal, unbounded, or the
    /// iteration cap. `cscale` sets the reduced-cost tolerance.
    fn run(&mut self, cost: &[f64], iters: &mut usize, cscale: f64) -> LpStatus {
        let dtol = 1e-9 * cscale;
        let cap = 20_000 + 50 * (self.m + self.nc);
        let mut d = self.reduced_costs(cost);
        let mut degenerate = 0;
        let mut since_refactor = 0;
        let mut final_checks = 0;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let Some((j, dir)) = self.price(&d, dtol, bland) else {
                // confirm against a fresh factorization before declaring optimal
                if since_refactor == 0 || final_checks >= 3 {
                    return LpStatus::Optimal;
                }
                self.refactor();
                d = self.reduced_costs(cost);
                since_refactor = 0;
                final_checks += 1;
                continue;
            };
            if *iters >= cap {
                return LpStatus::IterationLimit;
            }
            *iters += 1;

            // ratio test
            let nc = self.nc;
            let mut theta = self.hi[j] - self.lo[j];
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_alpha = 0.0;
            for r in 0..self.m {
                let alpha = dir * self.t[r * nc + j];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let k = self.basis[r];
                let (limit, bound) = if alpha > 0.0 {
                    if !self.lo[k].is_finite() {
                        continue;
                    }
                    (((self.x[k] - self.lo[k]) / alpha).max(0.0), self.lo[k])
                } else {
                    if !self.hi[k].is_finite() {
                        continue;
                    }
                    (((self.hi[k] - self.x[k]) / -alpha).max(0.0), self.hi[k])
                };
                let better = match leave {
                    _ if limit < theta - 1e-12 => true,
                    Some((r0, _)) if limit <= theta + 1e-12 => {
                        if bland {
                            k < self.basis[r0]
                        } else {
                            alpha.abs() > leave_alpha
                        }
                    }
                    _ => false,
                };
                if better {
                    theta = limit;
                    leave = Some((r, bound));
                    leave_alpha = alpha.abs();
                }
            }
            if !theta.is_finite() {
                return LpStatus::Unbounded;
            }
            if theta > PRIMAL_TOL {
                degenerate = 0;
            } else {
                degenerate += 1;
            }

            let step = dir * theta;
            if step != 0.0 {
                for r in 0..self.m {
                    let a = self.t[r * nc + j];
                    if a != 0.0 {
                        self.x[self.basis[r]] -= step * a;
                    }
                }
            }
            match leave {
                None => {
                    self.x[j] = if dir > 0.0 { self.hi[j] } else { self.lo[j] };
                }
                Some((r, bound)) => {
                    self.x[j] += step;
                    let k = self.basis[r];
                    self.x[k] = bound;
                    let dj = d[j];
                    self.pivot(r, j);
                    let prow = &self.t[r * nc..(r + 1) * nc];
                    for (dv, &pv) in d.iter_mut().zip(prow) {
                        *dv -= dj * pv;
                    }
                    d[j] = 0.0;
                    since_refactor += 1;
                    if since_refactor >= REFACTOR_EVERY {
                        self.refactor();
                        d = self.reduced_costs(cost);
                        since_refactor = 0;
                    }
                }
            }
        }
    }

    /// After phase 1: pivot zero-valued artificials out where possible and
    /// pin every artificial at zero.
    fn retire_artificials(&mut self) {
        let art0 = self.n_struct + self.m;
        for r in 0..self.m {
            if self.basis[r] < art0 {
                continue;
            }
            let nc = self.nc;
            let mut best = None;
            let mut best_abs = 1e-7;
            for j in 0..art0 {
                let v = self.t[r * nc + j].abs();
                if !self.in_basis[j] && v > best_abs {
                    best_abs = v;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                // degenerate pivot: the artificial is at zero, the entering
                // column keeps its current value
                let k = self.basis[r];
                self.pivot(r, j);
                self.x[k] = 0.0;
            }
        }
        for j in art0..self.nc {
            self.lo[j] = 0.0;
            self.hi[j] = 0.0;
            self.barred[j] = true;
            if !self.in_basis[j] {
                self.x[j] = 0.0;
            }
        }
        self.refactor();
    }
}
