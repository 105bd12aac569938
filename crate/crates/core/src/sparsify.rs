//! Column sparsification of RIP-1 matrices: within every (row, part) keep
//! only the largest entry, then keep the columns that moved little and
//! stayed sparse.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::models::{consecutive_parts, model_partition, Model, SupportSet};
use crate::sketch::{MeasurementMatrix, Provenance};

/// Per-column statistics of the thinned matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnStat {
    /// l1 distance between the original and thinned column.
    pub perturbation: f64,
    pub nnz: usize,
    pub kept: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparsifyOutcome {
    /// Thinned matrix restricted to the kept columns.
    pub b: MeasurementMatrix,
    /// Original (0-based) index of each column of `b`.
    pub kept_columns: Vec<usize>,
    pub per_column_perturbation: Vec<f64>,
    pub per_column_nnz: Vec<usize>,
    /// One entry per original column; columns outside every part are not kept.
    pub columns: Vec<ColumnStat>,
    /// Entrywise l1 norm of the difference between the input and the
    /// thinned matrix.
    pub total_perturbation: f64,
    pub perturbation_cap: f64,
    pub nnz_cap: usize,
}

impl SparsifyOutcome {
    /// `column,perturbation,nnz,kept` with 1-based columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("column,perturbation,nnz,kept\n");
        for (j, c) in self.columns.iter().enumerate() {
            writeln!(out, "{},{:.16e},{},{}", j + 1, c.perturbation, c.nnz, c.kept).unwrap();
        }
        out
    }
}

/// Thins `a` part by part and keeps the columns with perturbation at most
/// `9 eps_in` and at most `ceil(3m/k)` nonzeros.
///
/// Parts must be disjoint. Ties within a (row, part) go to the lowest
/// column. Fails with a certification error when fewer than a third of
/// the covered columns survive, which cannot happen for a genuine
/// `(k, eps_in)`-RIP-1 input.
pub fn sparsify(a: &MeasurementMatrix, k: usize, eps_in: f64, parts: &[SupportSet]) -> Result<SparsifyOutcome> {
    let (m, n) = (a.rows(), a.cols());
    if k == 0 {
        return Err(Error::input("k must be positive"));
    }
    if !(eps_in >= 0.0 && eps_in.is_finite()) {
        return Err(Error::input(format!("eps_in must be a nonnegative real, got {eps_in}")));
    }
    let mut owner = vec![usize::MAX; n];
    for (p, part) in parts.iter().enumerate() {
        part.check_within(n)?;
        for j in part.iter() {
            if owner[j] != usize::MAX {
                return Err(Error::input(format!("column {} lies in two parts", j + 1)));
            }
            owner[j] = p;
        }
    }
    let mut thin = MeasurementMatrix::from_row_major(m, n, vec![0.0; m * n], Provenance::Sparsified)?;
    for i in 0..m {
        for part in parts {
            let mut best: Option<(usize, f64)> = None;
            for j in part.iter() {
                let v = a.get(i, j).abs();
                if v > 0.0 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            if let Some((j, _)) = best {
                thin.set(i, j, a.get(i, j));
            }
        }
    }
    let perturbation_cap = 9.0 * eps_in;
    let nnz_cap = (3 * m).div_ceil(k);
    let mut columns = Vec::with_capacity(n);
    let mut total_perturbation = 0.0;
    for j in 0..n {
        let pert: f64 = (0..m).map(|i| (a.get(i, j) - thin.get(i, j)).abs()).sum();
        let nnz = thin.column_nnz(j);
        total_perturbation += pert;
        let kept = owner[j] != usize::MAX && pert <= perturbation_cap && nnz <= nnz_cap;
        columns.push(ColumnStat { perturbation: pert, nnz, kept });
    }
    let kept_columns: Vec<usize> = (0..n).filter(|&j| columns[j].kept).collect();
    let covered = owner.iter().filter(|&&o| o != usize::MAX).count();
    let need = covered.div_ceil(3);
    if kept_columns.len() < need {
        return Err(Error::CertificationViolated(format!(
            "only {} of {covered} columns meet perturbation <= {perturbation_cap} and nnz <= {nnz_cap}; \
             need {need}, so the input is not (k={k}, eps={eps_in})-RIP-1",
            kept_columns.len()
        )));
    }
    let mut b = thin.select_columns(&kept_columns);
    b.provenance = Provenance::Sparsified;
    Ok(SparsifyOutcome {
        b,
        per_column_perturbation: kept_columns.iter().map(|&j| columns[j].perturbation).collect(),
        per_column_nnz: kept_columns.iter().map(|&j| columns[j].nnz).collect(),
        kept_columns,
        columns,
        total_perturbation,
        perturbation_cap,
        nnz_cap,
    })
}

/// [`sparsify`] with consecutive parts of size `k` covering all columns.
pub fn sparsify_general(a: &MeasurementMatrix, k: usize, eps_in: f64) -> Result<SparsifyOutcome> {
    if k == 0 {
        return Err(Error::input("k must be positive"));
    }
    sparsify(a, k, eps_in, &consecutive_parts(a.cols(), k))
}

/// [`sparsify`] over the model partition. Also returns `l`: every
/// `l`-sparse vector is model-sparse, so the result should be RIP-1 for
/// `l`-sparse vectors.
pub fn model_sparsify(a: &MeasurementMatrix, model: &Model, eps_in: f64, c_part: f64) -> Result<(SparsifyOutcome, usize)> {
    if a.cols() != model.n() {
        return Err(Error::input(format!("matrix has {} columns, model has n = {}", a.cols(), model.n())));
    }
    let partition = model_partition(model, c_part)?;
    let out = sparsify(a, model.k(), eps_in, &partition.parts)?;
    Ok((out, partition.l))
}
