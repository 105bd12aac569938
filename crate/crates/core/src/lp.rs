//! Dense bounded-variable simplex.
//!
//! Solves `minimize c'x  s.t.  Ax = b,  lower <= x <= upper` (bounds may be
//! infinite) with a two-phase tableau method, Bland's rule for entering and
//! leaving variables, and a fixed tolerance. Small, deterministic and
//! dependency free: it is the backend for the RIP-1 oracle and for l1
//! regression, both of which only ever pose LPs with a handful of rows.

use std::fmt;

/// Default pivot / optimality tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols` constraint matrix.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    /// An LP with all-zero data and `x >= 0` bounds.
    pub fn new(rows: usize, cols: usize) -> Self {
        LinearProgram {
            rows,
            cols,
            a: vec![0.0; rows * cols],
            b: vec![0.0; rows],
            c: vec![0.0; cols],
            lower: vec![0.0; cols],
            upper: vec![f64::INFINITY; cols],
        }
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.a[r * self.cols + c] = v;
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Simplex multipliers `y` with reduced costs `c - A'y`.
    pub duals: Vec<f64>,
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    IterationLimit(usize),
    BadInput(String),
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Infeasible => f.write_str("infeasible"),
            LpError::Unbounded => f.write_str("unbounded"),
            LpError::IterationLimit(n) => write!(f, "iteration limit ({n} pivots)"),
            LpError::BadInput(s) => write!(f, "bad input: {s}"),
        }
    }
}

impl std::error::Error for LpError {}

/// Anything that can solve a [`LinearProgram`]. Lets callers swap in an
/// external solver.
pub trait LpSolver: Sync {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, LpError>;
}

#[derive(Clone, Copy, Debug)]
pub struct BoundedSimplex {
    pub tol: f64,
    pub max_pivots: usize,
}

impl Default for BoundedSimplex {
    fn default() -> Self {
        BoundedSimplex { tol: DEFAULT_TOL, max_pivots: 50_000 }
    }
}

impl LpSolver for BoundedSimplex {
    fn solve(&self, lp: &LinearProgram) -> Result<LpSolution, LpError> {
        Tableau::build(lp, self.tol)?.run(lp, self.max_pivots)
    }
}

struct Tableau {
    m: usize,
    /// structural + artificial columns
    width: usize,
    n_struct: usize,
    t: Vec<f64>,
    /// current value of every column
    x: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    art_sign: Vec<f64>,
    tol: f64,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram, tol: f64) -> Result<Self, LpError> {
        let (m, n) = (lp.rows, lp.cols);
        if lp.a.len() != m * n || lp.b.len() != m || lp.c.len() != n {
            return Err(LpError::BadInput("dimension mismatch".into()));
        }
        if lp.lower.len() != n || lp.upper.len() != n {
            return Err(LpError::BadInput("bound length mismatch".into()));
        }
        for j in 0..n {
            if lp.lower[j] > lp.upper[j] || lp.lower[j].is_nan() || lp.upper[j].is_nan() {
                return Err(LpError::BadInput(format!("bad bounds on column {j}")));
            }
        }
        if lp.a.iter().chain(&lp.b).chain(&lp.c).any(|v| !v.is_finite()) {
            return Err(LpError::BadInput("non-finite data".into()));
        }
        let width = n + m;
        let mut x = vec![0.0; width];
        for j in 0..n {
            x[j] = if lp.lower[j].is_finite() {
                lp.lower[j]
            } else if lp.upper[j].is_finite() {
                lp.upper[j]
            } else {
                0.0
            };
        }
        let mut t = vec![0.0; m * width];
        let mut art_sign = vec![1.0; m];
        for i in 0..m {
            let row = &lp.a[i * n..(i + 1) * n];
            let r = lp.b[i] - row.iter().zip(&x[..n]).map(|(a, v)| a * v).sum::<f64>();
            let s = if r < 0.0 { -1.0 } else { 1.0 };
            art_sign[i] = s;
            let trow = &mut t[i * width..(i + 1) * width];
            for j in 0..n {
                trow[j] = s * row[j];
            }
            trow[n + i] = 1.0;
            x[n + i] = r.abs();
        }
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        lower.extend(std::iter::repeat_n(0.0, m));
        upper.extend(std::iter::repeat_n(f64::INFINITY, m));
        let mut is_basic = vec![false; width];
        for i in 0..m {
            is_basic[n + i] = true;
        }
        Ok(Tableau {
            m,
            width,
            n_struct: n,
            t,
            x,
            lower,
            upper,
            basis: (n..n + m).collect(),
            is_basic,
            art_sign,
            tol,
            pivots: 0,
        })
    }

    fn run(mut self, lp: &LinearProgram, max_pivots: usize) -> Result<LpSolution, LpError> {
        let n = self.n_struct;
        // phase 1: drive artificials to zero
        let mut cost1 = vec![0.0; self.width];
        for c in &mut cost1[n..] {
            *c = 1.0;
        }
        self.optimize(&cost1, max_pivots)?;
        self.refresh_basics(lp);
        let infeas: f64 = self.x[n..].iter().sum();
        let scale = 1.0 + lp.b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if infeas > 1e-7 * scale {
            return Err(LpError::Infeasible);
        }
        for i in 0..self.m {
            self.upper[n + i] = 0.0;
            if !self.is_basic[n + i] {
                self.x[n + i] = 0.0;
            }
        }
        // phase 2
        let mut cost2 = vec![0.0; self.width];
        cost2[..n].copy_from_slice(&lp.c);
        self.optimize(&cost2, max_pivots)?;
        self.refresh_basics(lp);

        let duals = self.duals(&cost2);
        let x: Vec<f64> = self.x[..n].to_vec();
        let objective = x.iter().zip(&lp.c).map(|(a, b)| a * b).sum();
        Ok(LpSolution { x, objective, duals, pivots: self.pivots })
    }

    /// `y' = c_B' B^{-1}`, with `B^{-1}` read off the artificial columns.
    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let n = self.n_struct;
        let mut y = vec![0.0; self.m];
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = cost[bv];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[r * self.width..(r + 1) * self.width];
            for i in 0..self.m {
                y[i] += cb * row[n + i] * self.art_sign[i];
            }
        }
        y
    }

    /// Recomputes basic values from the nonbasic ones to shed drift.
    fn refresh_basics(&mut self, lp: &LinearProgram) {
        let n = self.n_struct;
        let mut rhs = lp.b.clone();
        for j in 0..n {
            if !self.is_basic[j] && self.x[j] != 0.0 {
                for i in 0..self.m {
                    rhs[i] -= lp.a[i * n + j] * self.x[j];
                }
            }
        }
        for i in 0..self.m {
            let a = n + i;
            if !self.is_basic[a] && self.x[a] != 0.0 {
                rhs[i] -= self.art_sign[i] * self.x[a];
            }
        }
        for (r, &bv) in self.basis.iter().enumerate() {
            let row = &self.t[r * self.width..(r + 1) * self.width];
            let mut v = 0.0;
            for i in 0..self.m {
                v += row[n + i] * self.art_sign[i] * rhs[i];
            }
            self.x[bv] = v;
        }
    }

    fn optimize(&mut self, cost: &[f64], max_pivots: usize) -> Result<(), LpError> {
        let tol = self.tol;
        let mut d = vec![0.0; self.width];
        loop {
            if self.pivots >= max_pivots {
                return Err(LpError::IterationLimit(self.pivots));
            }
            // reduced costs
            d.copy_from_slice(cost);
            for (r, &bv) in self.basis.iter().enumerate() {
                let cb = cost[bv];
                if cb != 0.0 {
                    let row = &self.t[r * self.width..(r + 1) * self.width];
                    for (dj, tj) in d.iter_mut().zip(row) {
                        *dj -= cb * tj;
                    }
                }
            }
            // Bland: first eligible column
            let mut entering = None;
            for j in 0..self.width {
                if self.is_basic[j] || self.lower[j] == self.upper[j] {
                    continue;
                }
                if d[j] < -tol && self.x[j] < self.upper[j] {
                    entering = Some((j, 1.0));
                    break;
                }
                if d[j] > tol && self.x[j] > self.lower[j] {
                    entering = Some((j, -1.0));
                    break;
                }
            }
            let Some((j, dir)) = entering else {
                return Ok(());
            };

            // ratio test; near-ties broken by smallest variable index
            let bound_step = if dir > 0.0 {
                self.upper[j] - self.x[j]
            } else {
                self.x[j] - self.lower[j]
            };
            let mut ratios: Vec<(usize, f64, bool)> = Vec::new(); // (row, ratio, leaves at upper)
            for r in 0..self.m {
                let alpha = self.t[r * self.width + j] * dir;
                if alpha.abs() <= tol {
                    continue;
                }
                let bv = self.basis[r];
                if alpha > 0.0 && self.lower[bv].is_finite() {
                    ratios.push((r, ((self.x[bv] - self.lower[bv]) / alpha).max(0.0), false));
                } else if alpha < 0.0 && self.upper[bv].is_finite() {
                    ratios.push((r, ((self.upper[bv] - self.x[bv]) / -alpha).max(0.0), true));
                }
            }
            let min_ratio = ratios.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
            let (theta, leave) = if min_ratio.is_finite() && min_ratio <= bound_step {
                let pick = ratios
                    .iter()
                    .filter(|e| e.1 <= min_ratio + tol)
                    .min_by_key(|e| self.basis[e.0])
                    .expect("finite minimum has a row");
                (min_ratio, Some((pick.0, pick.2)))
            } else {
                (bound_step, None)
            };
            if !theta.is_finite() {
                return Err(LpError::Unbounded);
            }
            // move
            let step = theta * dir;
            self.x[j] += step;
            for r in 0..self.m {
                let a = self.t[r * self.width + j];
                if a != 0.0 {
                    let bv = self.basis[r];
                    self.x[bv] -= step * a;
                }
            }
            if let Some((r, to_upper)) = leave {
                let bv = self.basis[r];
                self.x[bv] = if to_upper { self.upper[bv] } else { self.lower[bv] };
                self.pivot(r, j);
            }
            self.pivots += 1;
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let w = self.width;
        let p = self.t[r * w + j];
        for v in &mut self.t[r * w..(r + 1) * w] {
            *v /= p;
        }
        let prow: Vec<f64> = self.t[r * w..(r + 1) * w].to_vec();
        for i in 0..self.m {
            if i == r {
                continue;
            }
            let f = self.t[i * w + j];
            if f != 0.0 {
                for (v, pv) in self.t[i * w..(i + 1) * w].iter_mut().zip(&prow) {
                    *v -= f * pv;
                }
                self.t[i * w + j] = 0.0;
            }
        }
        let old = self.basis[r];
        self.is_basic[old] = false;
        self.is_basic[j] = true;
        self.basis[r] = j;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
        BoundedSimplex::default().solve(lp)
    }

    #[test]
    fn textbook_lp() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new(3, 5);
        lp.c = vec![-3.0, -5.0, 0.0, 0.0, 0.0];
        lp.set(0, 0, 1.0);
        lp.set(0, 2, 1.0);
        lp.set(1, 1, 2.0);
        lp.set(1, 3, 1.0);
        lp.set(2, 0, 3.0);
        lp.set(2, 1, 2.0);
        lp.set(2, 4, 1.0);
        lp.b = vec![4.0, 12.0, 18.0];
        let s = solve(&lp).unwrap();
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        // duals of the max problem are (0, 1.5, 1); we minimize the negation
        assert!((s.duals[1] + 1.5).abs() < 1e-9 && (s.duals[2] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn bounds_only_problem() {
        // min x - y, x in [-1, 2], y in [0, 3], no rows
        let mut lp = LinearProgram::new(0, 2);
        lp.c = vec![1.0, -1.0];
        lp.lower = vec![-1.0, 0.0];
        lp.upper = vec![2.0, 3.0];
        let s = solve(&lp).unwrap();
        assert_eq!(s.x, vec![-1.0, 3.0]);
    }

    #[test]
    fn free_variables() {
        // min |x - 3| via x - p + q = 3, min p + q, x free
        let mut lp = LinearProgram::new(1, 3);
        lp.c = vec![0.0, 1.0, 1.0];
        lp.lower[0] = f64::NEG_INFINITY;
        lp.set(0, 0, 1.0);
        lp.set(0, 1, -1.0);
        lp.set(0, 2, 1.0);
        lp.b = vec![3.0];
        let s = solve(&lp).unwrap();
        assert!(s.objective.abs() < 1e-12);
        assert!((s.x[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1, 1);
        lp.set(0, 0, 1.0);
        lp.b = vec![-1.0];
        assert_eq!(solve(&lp).unwrap_err(), LpError::Infeasible);

        let mut lp = LinearProgram::new(1, 2);
        lp.c = vec![-1.0, 0.0];
        lp.set(0, 0, 1.0);
        lp.set(0, 1, -1.0);
        assert_eq!(solve(&lp).unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        // x + y = 1 twice, min x
        let mut lp = LinearProgram::new(2, 2);
        lp.c = vec![1.0, 0.0];
        for r in 0..2 {
            lp.set(r, 0, 1.0);
            lp.set(r, 1, 1.0);
        }
        lp.b = vec![1.0, 1.0];
        let s = solve(&lp).unwrap();
        assert!(s.objective.abs() < 1e-12);
        assert!((s.x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_input() {
        let mut lp = LinearProgram::new(1, 1);
        lp.lower[0] = 2.0;
        lp.upper[0] = 1.0;
        assert!(matches!(solve(&lp), Err(LpError::BadInput(_))));
        let mut lp = LinearProgram::new(1, 1);
        lp.b[0] = f64::NAN;
        assert!(matches!(solve(&lp), Err(LpError::BadInput(_))));
    }
}
