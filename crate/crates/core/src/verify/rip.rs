use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::Mode;
use crate::error::{Error, Result};
use crate::lp::{BoundedSimplex, LinearProgram, LpSolver};
use crate::models::{Model, SupportSet};
use crate::sketch::MeasurementMatrix;

/// Bounds on the RIP-1 constant: the largest `| ||Ax||_1 - 1 |` over
/// model-sparse unit-l1 `x`.
#[derive(Clone, Debug, PartialEq)]
pub struct RipReport {
    /// Attained by `worst_vector`.
    pub eps_lo: f64,
    /// Certified upper bound (`+inf` in Monte Carlo mode).
    pub eps_hi: f64,
    pub worst_support: SupportSet,
    pub worst_vector: Vec<f64>,
    pub mode: Mode,
    /// Largest column l1 norm of the whole matrix.
    pub max_column_l1: f64,
    pub lps_solved: u64,
}

impl RipReport {
    /// One line: `eps_lo eps_hi mode support witness`.
    pub fn to_text(&self) -> String {
        let w: Vec<String> = self.worst_vector.iter().map(|v| format!("{v:.16e}")).collect();
        format!(
            "{:.16e} {:.16e} {} {} {}\n",
            self.eps_lo,
            self.eps_hi,
            self.mode,
            self.worst_support,
            w.join(",")
        )
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps_lo,eps_hi,mode,support,max_column_l1,witness\n");
        let sup: Vec<String> = self.worst_support.to_one_based().iter().map(|i| i.to_string()).collect();
        let w: Vec<String> = self.worst_vector.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(
            out,
            "{:.16e},{:.16e},{},{},{:.16e},{}",
            self.eps_lo,
            self.eps_hi,
            self.mode,
            sup.join(";"),
            self.max_column_l1,
            w.join(";")
        )
        .unwrap();
        out
    }
}

/// RIP-1 constant over the members of `model`.
pub fn rip1_interval(a: &MeasurementMatrix, model: &Model, mode: Mode, cap: u64) -> Result<RipReport> {
    if a.cols() != model.n() {
        return Err(Error::input(format!("matrix has {} columns, model has n = {}", a.cols(), model.n())));
    }
    match mode {
        Mode::Exact => {
            let members = model.members(cap)?;
            rip1_exact(a, &members, cap, &BoundedSimplex::default())
        }
        Mode::MonteCarlo { samples, seed } => Ok(rip1_monte_carlo(a, samples, seed, |rng| model.sample_member(rng))),
    }
}

/// Exact oracle over the given supports (each should be maximal in the
/// family; subsets are covered by monotonicity).
///
/// Per support `T` the largest ratio is the largest column norm. The
/// smallest is found per sign pattern `s` (first sign `+`) by the LP
/// `max lambda s.t. (A_T diag(s))' w >= lambda, |w_i| <= 1`, which is dual
/// to `min ||A_T diag(s) z||_1` over the simplex. The multipliers give the
/// minimizing `z`, so each LP yields both a feasible point and a lower bound.
pub fn rip1_exact(a: &MeasurementMatrix, supports: &[SupportSet], cap: u64, solver: &dyn LpSolver) -> Result<RipReport> {
    let lps: f64 = supports.iter().map(|t| 2f64.powi(t.len().saturating_sub(1) as i32)).sum();
    if lps > cap as f64 {
        return Err(Error::too_large("sign-pattern LPs", lps, cap, "; try monte-carlo mode"));
    }
    if let Some(t) = supports.iter().find(|t| t.is_empty() || t.check_within(a.cols()).is_err()) {
        return Err(Error::input(format!("support {{{t}}} is empty or out of range")));
    }
    let nonzero: Vec<Vec<usize>> = (0..a.cols()).map(|j| (0..a.rows()).filter(|&i| a.get(i, j) != 0.0).collect()).collect();
    let per_support: Vec<Result<SupportBounds>> =
        supports.par_iter().map(|t| support_bounds(a, &nonzero, t, solver)).collect();
    let mut report = RipReport {
        eps_lo: f64::NEG_INFINITY,
        eps_hi: 0.0,
        worst_support: SupportSet::empty(),
        worst_vector: vec![0.0; a.cols()],
        mode: Mode::Exact,
        max_column_l1: a.max_column_l1(),
        lps_solved: 0,
    };
    for (t, res) in supports.iter().zip(per_support) {
        let sb = res?;
        report.lps_solved += sb.lps;
        report.eps_hi = report.eps_hi.max(sb.eps_hi);
        if sb.eps_lo > report.eps_lo {
            report.eps_lo = sb.eps_lo;
            report.worst_support = t.clone();
            report.worst_vector = sb.witness;
        }
    }
    if supports.is_empty() {
        report.eps_lo = 0.0;
    }
    Ok(report)
}

struct SupportBounds {
    eps_lo: f64,
    eps_hi: f64,
    witness: Vec<f64>,
    lps: u64,
}

fn support_bounds(a: &MeasurementMatrix, nonzero: &[Vec<usize>], t: &SupportSet, solver: &dyn LpSolver) -> Result<SupportBounds> {
    let cols = t.as_slice();
    let (mut top, mut top_j) = (f64::NEG_INFINITY, cols[0]);
    for &j in cols {
        let norm = a.column_l1(j);
        if norm > top {
            top = norm;
            top_j = j;
        }
    }
    let mut witness = vec![0.0; a.cols()];
    witness[top_j] = 1.0;
    let mut out = SupportBounds { eps_lo: top - 1.0, eps_hi: top - 1.0, witness, lps: 0 };
    let sub = restrict(a, nonzero, cols)?;
    let s = cols.len();
    for pattern in 0u64..1 << (s - 1) {
        let signs: Vec<f64> = (0..s)
            .map(|p| if p > 0 && pattern >> (p - 1) & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let (lower, upper, z) = min_ratio(&sub, &signs, solver).map_err(|e| {
            let sg: String = signs.iter().map(|&v| if v > 0.0 { '+' } else { '-' }).collect();
            Error::Numeric(format!("min-ratio LP on support {{{t}}}, signs {sg}: {e}"))
        })?;
        out.lps += 1;
        // rounding can leave the dual bound a hair above the attained value
        out.eps_hi = out.eps_hi.max(1.0 - lower).max(1.0 - upper);
        if 1.0 - upper > out.eps_lo {
            out.eps_lo = 1.0 - upper;
            out.witness.fill(0.0);
            for (p, &j) in cols.iter().enumerate() {
                out.witness[j] = signs[p] * z[p];
            }
        }
    }
    Ok(out)
}

/// Columns `cols` of `a` on the rows where at least one of them is nonzero;
/// the other rows do not affect `||Bz||_1`.
fn restrict(a: &MeasurementMatrix, nonzero: &[Vec<usize>], cols: &[usize]) -> Result<MeasurementMatrix> {
    let mut rows: Vec<usize> = cols.iter().flat_map(|&j| nonzero[j].iter().copied()).collect();
    rows.sort_unstable();
    rows.dedup();
    let data = rows.iter().flat_map(|&i| cols.iter().map(move |&j| a.get(i, j))).collect();
    MeasurementMatrix::from_row_major(rows.len(), cols.len(), data, a.provenance)
}

/// Returns `(lower, upper, z)` with `lower <= min ||B z'||_1 <= upper =
/// ||B z||_1` over the simplex, where `B = sub * diag(signs)`.
fn min_ratio(sub: &MeasurementMatrix, signs: &[f64], solver: &dyn LpSolver) -> std::result::Result<(f64, f64, Vec<f64>), String> {
    let (m, s) = (sub.rows(), sub.cols());
    if m == 0 {
        return Ok((0.0, 0.0, vec![1.0 / s as f64; s]));
    }
    // columns: w (m, in [-1, 1]), lambda (>= 0), slack (s, >= 0)
    let mut lp = LinearProgram::new(s, m + 1 + s);
    for j in 0..s {
        for i in 0..m {
            lp.set(j, i, signs[j] * sub.get(i, j));
        }
        lp.set(j, m, -1.0);
        lp.set(j, m + 1 + j, -1.0);
    }
    for i in 0..m {
        lp.lower[i] = -1.0;
        lp.upper[i] = 1.0;
    }
    lp.c[m] = -1.0;
    let sol = solver.solve(&lp).map_err(|e| e.to_string())?;
    let w: Vec<f64> = sol.x[..m].iter().map(|v| v.clamp(-1.0, 1.0)).collect();
    let lower = (0..s)
        .map(|j| signs[j] * (0..m).map(|i| sub.get(i, j) * w[i]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let mut z: Vec<f64> = sol.duals.iter().map(|&y| y.max(0.0)).collect();
    let total: f64 = z.iter().sum();
    if !(total > 0.0) {
        return Err("multipliers vanish".into());
    }
    z.iter_mut().for_each(|v| *v /= total);
    let upper = (0..m)
        .map(|i| (0..s).map(|j| sub.get(i, j) * signs[j] * z[j]).sum::<f64>().abs())
        .sum::<f64>();
    let scale = 1.0 + upper.abs();
    if upper < lower - 1e-9 * scale || upper - lower > 1e-7 * scale {
        return Err(format!("duality gap too large: lower {lower}, upper {upper}"));
    }
    Ok((lower, upper, z))
}

/// Lower bound from random model-sparse unit vectors: a support from
/// `sample_support`, i.i.d. signs, exponential magnitudes.
pub fn rip1_monte_carlo<F>(a: &MeasurementMatrix, samples: u64, seed: u64, sample_support: F) -> RipReport
where
    F: Fn(&mut ChaCha8Rng) -> SupportSet + Sync,
{
    let draws: Vec<(f64, SupportSet, Vec<f64>)> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s);
            let t = sample_support(&mut rng);
            let mut x = vec![0.0; a.cols()];
            let mut total = 0.0;
            for j in t.iter() {
                let mag: f64 = rng.sample(Exp1);
                x[j] = if rng.random::<bool>() { mag } else { -mag };
                total += mag;
            }
            if total > 0.0 {
                x.iter_mut().for_each(|v| *v /= total);
            }
            let dev = (a.mul(&x).iter().map(|v| v.abs()).sum::<f64>() - 1.0).abs();
            (dev, t, x)
        })
        .collect();
    let mut report = RipReport {
        eps_lo: 0.0,
        eps_hi: f64::INFINITY,
        worst_support: SupportSet::empty(),
        worst_vector: vec![0.0; a.cols()],
        mode: Mode::MonteCarlo { samples, seed },
        max_column_l1: a.max_column_l1(),
        lps_solved: 0,
    };
    let mut best = f64::NEG_INFINITY;
    for (dev, t, x) in draws {
        if dev > best {
            best = dev;
            report.eps_lo = dev;
            report.worst_support = t;
            report.worst_vector = x;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1_of_ax(a: &MeasurementMatrix, x: &[f64]) -> f64 {
        a.mul(x).iter().map(|v| v.abs()).sum()
    }

    #[test]
    fn identity_has_zero_constant() {
        let id = MeasurementMatrix::identity(6);
        for model in [Model::general(6, 3).unwrap(), Model::block(6, 4, 2).unwrap()] {
            let r = rip1_interval(&id, &model, Mode::Exact, 1 << 20).unwrap();
            assert!(r.eps_lo.abs() < 1e-12 && r.eps_hi.abs() < 1e-12, "{r:?}");
        }
    }

    #[test]
    fn complete_cancellation() {
        let a = MeasurementMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let r = rip1_interval(&a, &Model::general(2, 2).unwrap(), Mode::Exact, 100).unwrap();
        assert!((r.eps_lo - 1.0).abs() < 1e-12 && (r.eps_hi - 1.0).abs() < 1e-9);
        assert!((r.worst_vector[0] - 0.5).abs() < 1e-12 && (r.worst_vector[1] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn witness_attains_eps_lo() {
        let a = MeasurementMatrix::from_rows(&[
            vec![0.5, 0.2, -0.3, 0.1],
            vec![0.3, -0.6, 0.2, 0.4],
            vec![0.2, 0.2, 0.5, -0.5],
        ])
        .unwrap();
        let r = rip1_interval(&a, &Model::general(4, 3).unwrap(), Mode::Exact, 1000).unwrap();
        let x = &r.worst_vector;
        assert!((x.iter().map(|v| v.abs()).sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(((l1_of_ax(&a, x) - 1.0).abs() - r.eps_lo).abs() < 1e-12);
        assert!(r.eps_lo <= r.eps_hi && r.eps_hi - r.eps_lo < 1e-7);
        assert!(x.iter().enumerate().all(|(j, &v)| v == 0.0 || r.worst_support.contains(j)));
    }

    #[test]
    fn exact_dominates_sampling() {
        let a = MeasurementMatrix::from_rows(&[
            vec![0.6, 0.1, 0.3, 0.2, 0.0],
            vec![0.4, 0.5, -0.2, 0.3, 0.7],
            vec![0.0, -0.4, 0.5, 0.5, 0.3],
        ])
        .unwrap();
        let m = Model::general(5, 2).unwrap();
        let ex = rip1_interval(&a, &m, Mode::Exact, 1000).unwrap();
        let mc = rip1_interval(&a, &m, Mode::MonteCarlo { samples: 5000, seed: 3 }, 1000).unwrap();
        assert!(mc.eps_lo <= ex.eps_hi + 1e-9);
        assert!(mc.eps_hi.is_infinite());
    }

    #[test]
    fn lp_cap() {
        let a = MeasurementMatrix::identity(12);
        let r = rip1_interval(&a, &Model::general(12, 6).unwrap(), Mode::Exact, 1000);
        assert!(matches!(r, Err(Error::TooLarge { .. })));
    }

    #[test]
    fn certificate_formats() {
        let a = MeasurementMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let r = rip1_interval(&a, &Model::general(2, 2).unwrap(), Mode::Exact, 100).unwrap();
        let line = r.to_text();
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(fields[2], "exact");
        assert_eq!(fields[3], "1,2");
        assert!(r.to_csv().lines().nth(1).unwrap().contains(",exact,1;2,"));
    }
}
