//! Exhaustive model-based l1 recovery: l1 regression on every model
//! member, keeping the smallest residual.

use std::fmt;

use rand::SeedableRng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lp::{BoundedSimplex, LinearProgram, LpSolver};
use crate::models::{project, Model, SupportSet};
use crate::sketch::MeasurementMatrix;
use crate::verify::{rip1_exact, rip1_monte_carlo, Mode, RipReport};

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `||y - Ax||_1`.
pub fn residual(a: &MeasurementMatrix, y: &[f64], x: &[f64]) -> f64 {
    l1_diff(y, &a.mul(x))
}

/// A minimizer of `||y - Ax||_1` over `x` supported on `s`, as a length-`n`
/// vector, together with its residual.
///
/// Solves the dual `max y'w s.t. A_S' w = 0, |w_i| <= 1`; the row
/// multipliers are the negated regression coefficients.
pub fn l1_regress(a: &MeasurementMatrix, y: &[f64], s: &SupportSet) -> Result<(Vec<f64>, f64)> {
    l1_regress_with(a, y, s, &BoundedSimplex::default())
}

pub fn l1_regress_with(a: &MeasurementMatrix, y: &[f64], s: &SupportSet, solver: &dyn LpSolver) -> Result<(Vec<f64>, f64)> {
    let (m, n) = (a.rows(), a.cols());
    if y.len() != m {
        return Err(Error::input(format!("measurement length {} != m = {m}", y.len())));
    }
    s.check_within(n)?;
    let mut x = vec![0.0; n];
    if s.is_empty() {
        return Ok((x, l1(y)));
    }
    let cols = s.as_slice();
    let mut lp = LinearProgram::new(cols.len(), m);
    for (r, &j) in cols.iter().enumerate() {
        for i in 0..m {
            lp.set(r, i, a.get(i, j));
        }
    }
    for i in 0..m {
        lp.lower[i] = -1.0;
        lp.upper[i] = 1.0;
        lp.c[i] = -y[i];
    }
    let sol = solver
        .solve(&lp)
        .map_err(|e| Error::Numeric(format!("l1 regression on support {{{s}}}: {e}")))?;
    for (r, &j) in cols.iter().enumerate() {
        x[j] = -sol.duals[r];
    }
    let res = residual(a, y, &x);
    let bound = -sol.objective;
    if (res - bound).abs() > 1e-7 * (1.0 + l1(y)) {
        return Err(Error::Numeric(format!(
            "l1 regression on support {{{s}}}: residual {res} disagrees with dual value {bound}"
        )));
    }
    Ok((x, res))
}

/// How the recovered error compares with the best model approximation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Ratio {
    /// Both errors vanish.
    Exact,
    Finite(f64),
    /// The signal is model-sparse but was not recovered.
    Unbounded,
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Exact => f.write_str("exact"),
            Ratio::Finite(r) => write!(f, "{r:.16e}"),
            Ratio::Unbounded => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryResult {
    pub x_star: Vec<f64>,
    pub support: SupportSet,
    /// `||y - A x_star||_1`.
    pub residual: f64,
    /// Filled in by [`RecoveryResult::evaluate`].
    pub error: Option<f64>,
    pub opt_error: Option<f64>,
    pub ratio: Option<Ratio>,
}

/// Relative size below which an error counts as zero.
pub const EXACT_TOL: f64 = 1e-6;

impl RecoveryResult {
    /// Compares with the true signal; the benchmark error comes from model
    /// projection.
    pub fn evaluate(&mut self, model: &Model, x: &[f64]) -> Result<()> {
        let (_, best) = project(model, x)?;
        let scale = l1(x).max(f64::MIN_POSITIVE);
        let err = l1_diff(x, &self.x_star);
        let opt = l1_diff(x, &best);
        let ratio = if opt > 1e-12 * scale {
            Ratio::Finite(err / opt)
        } else if err <= EXACT_TOL * scale {
            Ratio::Exact
        } else {
            Ratio::Unbounded
        };
        self.error = Some(err);
        self.opt_error = Some(opt);
        self.ratio = Some(ratio);
        Ok(())
    }

    pub const CSV_HEADER: &'static str = "residual,error,opt_error,ratio,support";

    /// `residual,error,opt_error,ratio,support` (support `;`-separated).
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.16e}"));
        let sup: Vec<String> = self.support.to_one_based().iter().map(|i| i.to_string()).collect();
        format!(
            "{:.16e},{},{},{},{}",
            self.residual,
            opt(self.error),
            opt(self.opt_error),
            self.ratio.map_or(String::new(), |r| r.to_string()),
            sup.join(";")
        )
    }
}

/// Runs l1 regression on every member of `model` and keeps the smallest
/// residual. A later member replaces the incumbent only when its residual
/// is smaller by more than `1e-12 (1 + ||y||_1)`, so near-ties go to the
/// first member in enumeration order.
pub fn recover(a: &MeasurementMatrix, y: &[f64], model: &Model, cap: u64) -> Result<RecoveryResult> {
    if a.cols() != model.n() {
        return Err(Error::input(format!("matrix has {} columns, model has n = {}", a.cols(), model.n())));
    }
    if y.len() != a.rows() {
        return Err(Error::input(format!("measurement length {} != m = {}", y.len(), a.rows())));
    }
    let members = model.members(cap).map_err(|e| match e {
        Error::TooLarge { what, needed, cap, .. } => Error::TooLarge { what, needed, cap, hint: "; restrict the model" },
        other => other,
    })?;
    let fits: Vec<Result<(Vec<f64>, f64)>> = members.par_iter().map(|s| l1_regress(a, y, s)).collect();
    let tol = 1e-12 * (1.0 + l1(y));
    let mut best: Option<RecoveryResult> = None;
    for (s, fit) in members.into_iter().zip(fits) {
        let (x, res) = fit?;
        if best.as_ref().is_none_or(|b| res < b.residual - tol) {
            best = Some(RecoveryResult { x_star: x, support: s, residual: res, error: None, opt_error: None, ratio: None });
        }
    }
    best.ok_or_else(|| Error::input("model has no members"))
}

/// Maximal unions of two members.
pub fn doubled_supports(model: &Model, cap: u64) -> Result<Vec<SupportSet>> {
    let members = model.members(cap)?;
    let pairs = members.len() as f64 * (members.len() as f64 + 1.0) / 2.0;
    if pairs > cap as f64 {
        return Err(Error::too_large("pairs of members", pairs, cap, "; try monte-carlo mode"));
    }
    let mut unions = Vec::new();
    for i in 0..members.len() {
        for j in i..members.len() {
            unions.push(members[i].union(&members[j]));
        }
    }
    unions.sort_by(|a, b| a.as_slice().cmp(b.as_slice()));
    unions.dedup();
    let maximal: Vec<SupportSet> = unions
        .iter()
        .filter(|u| !unions.iter().any(|v| v.len() > u.len() && u.is_subset_of(v)))
        .cloned()
        .collect();
    Ok(maximal)
}

/// RIP-1 constant over vectors supported on a union of two members. The
/// report's `max_column_l1` is the operator norm `||A||_1`.
pub fn rip_for_recovery(a: &MeasurementMatrix, model: &Model, mode: Mode, cap: u64) -> Result<RipReport> {
    if a.cols() != model.n() {
        return Err(Error::input(format!("matrix has {} columns, model has n = {}", a.cols(), model.n())));
    }
    match mode {
        Mode::Exact => rip1_exact(a, &doubled_supports(model, cap)?, cap, &BoundedSimplex::default()),
        Mode::MonteCarlo { samples, seed } => Ok(rip1_monte_carlo(a, samples, seed, |rng| {
            model.sample_member(rng).union(&model.sample_member(rng))
        })),
    }
}

/// The five inequalities bounding `||x - x*||_1` by the best model error,
/// for an RIP-1 constant `eps` over two-member unions and `||A||_1 = norm`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chain {
    /// `(lhs, rhs)` of each step.
    pub steps: [(f64, f64); 5],
    /// `(lhs, rhs)` of the end-to-end bound `(1 + 2 norm / (1 - eps)) opt`.
    pub total: (f64, f64),
}

impl Chain {
    pub fn holds(&self, tol: f64) -> bool {
        self.steps.iter().chain(std::iter::once(&self.total)).all(|&(l, r)| l <= r + tol * (1.0 + r.abs()))
    }

    /// Index of the first step that fails, if any (5 is the total bound).
    pub fn first_failure(&self, tol: f64) -> Option<usize> {
        self.steps
            .iter()
            .chain(std::iter::once(&self.total))
            .position(|&(l, r)| l > r + tol * (1.0 + r.abs()))
    }
}

/// Evaluates each step for signal `x`, recovery `x_star` and best model
/// approximation `x_model`.
pub fn recovery_chain(a: &MeasurementMatrix, x: &[f64], x_star: &[f64], x_model: &[f64], eps: f64, norm: f64) -> Chain {
    let diff = |u: &[f64], v: &[f64]| -> Vec<f64> { u.iter().zip(v).map(|(p, q)| p - q).collect() };
    let opt = l1_diff(x, x_model);
    let err = l1_diff(x, x_star);
    let gap = l1_diff(x_model, x_star);
    let a_gap = l1(&a.mul(&diff(x_model, x_star)));
    let a_opt = l1(&a.mul(&diff(x, x_model)));
    let a_err = l1(&a.mul(&diff(x, x_star)));
    let lower = 1.0 / (1.0 - eps);
    Chain {
        steps: [
            (err, opt + gap),
            (gap, lower * a_gap),
            (a_gap, a_opt + a_err),
            (a_opt, norm * opt),
            (a_err, a_opt),
        ],
        total: (err, (1.0 + 2.0 * norm * lower) * opt),
    }
}

/// Seeded generator for benchmark signals.
pub fn signal_rng(seed: u64, trial: u64) -> rand_chacha::ChaCha8Rng {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}
