//! Dense bounded-variable primal simplex.
//!
//! Rows are turned into ranged slack variables (`a_i . x - s_i = 0` with
//! `s_i` bounded by the row's right-hand side), so the initial basis is the
//! slack basis and every variable carries explicit bounds. Phase one
//! minimises the sum of bound infeasibilities of the basic variables; phase
//! two optimises the objective. The basis inverse is kept explicitly and
//! rebuilt from scratch periodically.

use thiserror::Error;

const FEAS_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 60;
const DEGENERATE_SWITCH: usize = 40;
const MAX_RESTARTS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("variable {0} has an infinite bound")]
    InfiniteBound(usize),
    #[error("variable {0} has lower bound above upper bound")]
    CrossedBounds(usize),
    #[error("numerical breakdown: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new(sense: Sense) -> Self {
        LinearProgram {
            sense,
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn add_var(&mut self, lo: f64, hi: f64, obj: f64) -> usize {
        self.objective.push(obj);
        self.lower.push(lo);
        self.upper.push(hi);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64) {
        self.rows.push(Row { coeffs, rel, rhs });
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective in the caller's sense; meaningless when infeasible.
    pub objective: f64,
    pub x: Vec<f64>,
}

pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    for j in 0..lp.num_vars() {
        if !lp.lower[j].is_finite() || !lp.upper[j].is_finite() {
            return Err(LpError::InfiniteBound(j));
        }
        if lp.lower[j] > lp.upper[j] {
            return Err(LpError::CrossedBounds(j));
        }
    }
    let mut last_err = None;
    for _ in 0..MAX_RESTARTS {
        let mut s = Simplex::new(lp);
        match s.run() {
            Ok(sol) => return Ok(sol),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap())
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    m: usize,
    nv: usize,
    /// Dense structural columns.
    cols: Vec<Vec<f64>>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    /// Phase-two costs, always minimised.
    cost: Vec<f64>,
    /// Current values of all variables (basic ones maintained incrementally).
    val: Vec<f64>,
    basis: Vec<usize>,
    /// Row position of a basic variable, `usize::MAX` otherwise.
    pos: Vec<usize>,
    binv: Vec<Vec<f64>>,
    since_refactor: usize,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram) -> Self {
        let m = lp.rows.len();
        let nv = lp.num_vars();
        let mut cols = vec![vec![0.0; m]; nv];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, c) in &row.coeffs {
                cols[j][i] += c;
            }
        }
        let mut lo = lp.lower.clone();
        let mut hi = lp.upper.clone();
        for row in &lp.rows {
            let (l, h) = match row.rel {
                Relation::Le => (f64::NEG_INFINITY, row.rhs),
                Relation::Ge => (row.rhs, f64::INFINITY),
                Relation::Eq => (row.rhs, row.rhs),
            };
            lo.push(l);
            hi.push(h);
        }
        let sign = match lp.sense {
            Sense::Maximize => -1.0,
            Sense::Minimize => 1.0,
        };
        let mut cost: Vec<f64> = lp.objective.iter().map(|c| sign * c).collect();
        cost.resize(nv + m, 0.0);
        let mut val = vec![0.0; nv + m];
        for j in 0..nv {
            // start at the bound nearer zero
            val[j] = if lo[j].abs() <= hi[j].abs() { lo[j] } else { hi[j] };
        }
        let basis: Vec<usize> = (nv..nv + m).collect();
        let mut pos = vec![usize::MAX; nv + m];
        for (r, &b) in basis.iter().enumerate() {
            pos[b] = r;
        }
        let mut binv = vec![vec![0.0; m]; m];
        for (r, row) in binv.iter_mut().enumerate() {
            row[r] = -1.0;
        }
        let mut s = Simplex {
            lp,
            m,
            nv,
            cols,
            lo,
            hi,
            cost,
            val,
            basis,
            pos,
            binv,
            since_refactor: 0,
        };
        s.recompute_basic_values();
        s
    }

    /// Column `j` of `[A, -I]` applied to a vector: `y . a_j`.
    fn dot_col(&self, y: &[f64], j: usize) -> f64 {
        if j < self.nv {
            self.cols[j].iter().zip(y).map(|(a, b)| a * b).sum()
        } else {
            -y[j - self.nv]
        }
    }

    /// `B^{-1} a_j`.
    fn ftran(&self, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        if j < self.nv {
            let col = &self.cols[j];
            for (r, o) in out.iter_mut().enumerate() {
                let row = &self.binv[r];
                *o = col.iter().zip(row).map(|(a, b)| a * b).sum();
            }
        } else {
            let i = j - self.nv;
            for (r, o) in out.iter_mut().enumerate() {
                *o = -self.binv[r][i];
            }
        }
        out
    }

    fn recompute_basic_values(&mut self) {
        // B x_B = -N x_N
        let mut rhs = vec![0.0; self.m];
        for j in 0..self.nv + self.m {
            if self.pos[j] != usize::MAX || self.val[j] == 0.0 {
                continue;
            }
            let v = self.val[j];
            if j < self.nv {
                for (r, a) in self.cols[j].iter().enumerate() {
                    rhs[r] -= a * v;
                }
            } else {
                rhs[j - self.nv] += v;
            }
        }
        for r in 0..self.m {
            let x: f64 = self.binv[r].iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.val[self.basis[r]] = x;
        }
    }

    /// Rebuilds the basis inverse by Gauss-Jordan elimination.
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut mat = vec![vec![0.0; 2 * m]; m];
        for (c, &j) in self.basis.iter().enumerate() {
            if j < self.nv {
                for r in 0..m {
                    mat[r][c] = self.cols[j][r];
                }
            } else {
                mat[j - self.nv][c] = -1.0;
            }
        }
        for (r, row) in mat.iter_mut().enumerate() {
            row[m + r] = 1.0;
        }
        for c in 0..m {
            let p = (c..m)
                .max_by(|&a, &b| mat[a][c].abs().total_cmp(&mat[b][c].abs()))
                .unwrap();
            if mat[p][c].abs() < 1e-11 {
                return Err(LpError::Numerical("singular basis".into()));
            }
            mat.swap(p, c);
            let inv = 1.0 / mat[c][c];
            for v in mat[c].iter_mut() {
                *v *= inv;
            }
            let pivot_row = mat[c].clone();
            for (r, row) in mat.iter_mut().enumerate() {
                if r != c && row[c] != 0.0 {
                    let f = row[c];
                    for (v, p) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * p;
                    }
                }
            }
        }
        // mat = [I | B^{-1}] with rows in basis-position order
        for r in 0..m {
            self.binv[r].copy_from_slice(&mat[r][m..]);
        }
        self.since_refactor = 0;
        self.recompute_basic_values();
        Ok(())
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.val[j];
        if v < self.lo[j] - FEAS_TOL {
            self.lo[j] - v
        } else if v > self.hi[j] + FEAS_TOL {
            v - self.hi[j]
        } else {
            0.0
        }
    }

    fn run(&mut self) -> Result<LpSolution, LpError> {
        let total = self.nv + self.m;
        let max_iter = 200 * (total + 10);
        let mut degenerate_run = 0usize;
        let mut verified_once = false;
        for _ in 0..max_iter {
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let phase_one = self.basis.iter().any(|&b| self.infeasibility(b) > 0.0);
            // basic costs
            let mut cb = vec![0.0; self.m];
            for (r, &b) in self.basis.iter().enumerate() {
                cb[r] = if phase_one {
                    let v = self.val[b];
                    if v < self.lo[b] - FEAS_TOL {
                        -1.0
                    } else if v > self.hi[b] + FEAS_TOL {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    self.cost[b]
                };
            }
            // duals y = c_B B^{-1}
            let mut y = vec![0.0; self.m];
            for (r, &c) in cb.iter().enumerate() {
                if c != 0.0 {
                    for (yi, b) in y.iter_mut().zip(&self.binv[r]) {
                        *yi += c * b;
                    }
                }
            }
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..total {
                if self.pos[j] != usize::MAX || self.lo[j] == self.hi[j] {
                    continue;
                }
                let cj = if phase_one { 0.0 } else { self.cost[j] };
                let d = cj - self.dot_col(&y, j);
                let can_up = self.val[j] < self.hi[j] - FEAS_TOL;
                let can_down = self.val[j] > self.lo[j] + FEAS_TOL;
                let score = if d < -OPT_TOL && can_up {
                    -d
                } else if d > OPT_TOL && can_down {
                    d
                } else {
                    continue;
                };
                if bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| score > best.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((q, dq)) = entering else {
                if phase_one {
                    let infeas: f64 = self.basis.iter().map(|&b| self.infeasibility(b)).sum();
                    if infeas > 1e-7 {
                        return Ok(LpSolution {
                            status: LpStatus::Infeasible,
                            objective: f64::NAN,
                            x: self.val[..self.nv].to_vec(),
                        });
                    }
                    // only tolerance-level infeasibility left; tidy up
                    self.refactor()?;
                    if self.basis.iter().any(|&b| self.infeasibility(b) > 1e-7) {
                        return Ok(LpSolution {
                            status: LpStatus::Infeasible,
                            objective: f64::NAN,
                            x: self.val[..self.nv].to_vec(),
                        });
                    }
                    for r in 0..self.m {
                        let b = self.basis[r];
                        self.val[b] = self.val[b].clamp(self.lo[b], self.hi[b]);
                    }
                    continue;
                }
                if !verified_once {
                    verified_once = true;
                    self.refactor()?;
                    continue;
                }
                return self.finish();
            };
            let dir = if dq < 0.0 { 1.0 } else { -1.0 };
            let alpha = self.ftran(q);
            // Harris ratio test
            let limit = |slf: &Self, r: usize, relax: f64| -> Option<f64> {
                let b = slf.basis[r];
                let rate = -dir * alpha[r];
                if rate.abs() <= PIVOT_TOL {
                    return None;
                }
                let v = slf.val[b];
                let (lo, hi) = (slf.lo[b], slf.hi[b]);
                if rate > 0.0 {
                    if phase_one && v < lo - FEAS_TOL {
                        Some((lo - v + relax) / rate)
                    } else if v > hi + FEAS_TOL || !hi.is_finite() {
                        None
                    } else {
                        Some(((hi - v + relax) / rate).max(0.0))
                    }
                } else if phase_one && v > hi + FEAS_TOL {
                    Some((v - hi + relax) / -rate)
                } else if v < lo - FEAS_TOL || !lo.is_finite() {
                    None
                } else {
                    Some(((v - lo + relax) / -rate).max(0.0))
                }
            };
            let mut theta_max = f64::INFINITY;
            for r in 0..self.m {
                if let Some(t) = limit(self, r, FEAS_TOL) {
                    theta_max = theta_max.min(t);
                }
            }
            let flip = self.hi[q] - self.lo[q];
            let mut leave: Option<(usize, f64)> = None;
            if theta_max < f64::INFINITY {
                let mut best_piv = 0.0;
                for r in 0..self.m {
                    if let Some(t) = limit(self, r, 0.0) {
                        if t <= theta_max {
                            let piv = alpha[r].abs();
                            let better = if bland {
                                leave.is_none_or(|(lr, _)| self.basis[r] < self.basis[lr])
                            } else {
                                piv > best_piv
                            };
                            if better {
                                best_piv = piv;
                                leave = Some((r, t));
                            }
                        }
                    }
                }
            }
            let theta = match leave {
                Some((_, t)) if t < flip => t,
                _ if flip.is_finite() => {
                    // bound flip of the entering variable
                    leave = None;
                    flip
                }
                _ => return Err(LpError::Numerical("unbounded ray".into())),
            };
            if theta <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            let step = dir * theta;
            self.val[q] += step;
            for r in 0..self.m {
                let b = self.basis[r];
                self.val[b] -= step * alpha[r];
            }
            match leave {
                None => {
                    self.val[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some((r, _)) => {
                    let b = self.basis[r];
                    // snap the leaving variable onto the bound it reached
                    let v = self.val[b];
                    self.val[b] = if (v - self.lo[b]).abs() <= (v - self.hi[b]).abs() {
                        self.lo[b]
                    } else {
                        self.hi[b]
                    };
                    self.pivot(r, q, &alpha);
                }
            }
        }
        Err(LpError::Numerical("iteration limit".into()))
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let leaving = self.basis[r];
        let inv = 1.0 / alpha[r];
        let pivot_row: Vec<f64> = self.binv[r].iter().map(|v| v * inv).collect();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = alpha[i];
            if f != 0.0 {
                for (v, p) in self.binv[i].iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
            }
        }
        self.binv[r] = pivot_row;
        self.pos[leaving] = usize::MAX;
        self.basis[r] = q;
        self.pos[q] = r;
        self.since_refactor += 1;
    }

    fn finish(&mut self) -> Result<LpSolution, LpError> {
        let x: Vec<f64> = (0..self.nv)
            .map(|j| self.val[j].clamp(self.lp.lower[j], self.lp.upper[j]))
            .collect();
        for (i, row) in self.lp.rows.iter().enumerate() {
            let act: f64 = row.coeffs.iter().map(|&(j, c)| c * x[j]).sum();
            let tol = 1e-7 * (1.0 + row.rhs.abs());
            let bad = match row.rel {
                Relation::Le => act > row.rhs + tol,
                Relation::Ge => act < row.rhs - tol,
                Relation::Eq => (act - row.rhs).abs() > tol,
            };
            if bad {
                return Err(LpError::Numerical(format!(
                    "row {i} violated by the final point"
                )));
            }
        }
        let objective = self.lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective,
            x,
        })
    }
}
