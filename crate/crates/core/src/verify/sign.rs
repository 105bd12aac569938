use crate::sketch::MeasurementMatrix;

/// A sign vector `x` with `||Ax||_1 <= sum_i ||row_i||_2`.
///
/// Fixes coordinates left to right, each time choosing the sign that does
/// not increase `sum_i sqrt(p_i^2 + q_i)`, where `p_i` is the partial row
/// product and `q_i` the squared mass of the still-free entries of row `i`.
/// That sum is the row-norm bound at the start and `||Ax||_1` at the end.
/// Ties pick `+1`.
pub fn sign_vector(a: &MeasurementMatrix) -> Vec<f64> {
    let (m, n) = (a.rows(), a.cols());
    let mut p = vec![0.0; m];
    let mut q: Vec<f64> = (0..m).map(|i| a.row(i).iter().map(|v| v * v).sum()).collect();
    let mut x = Vec::with_capacity(n);
    for j in 0..n {
        let (mut plus, mut minus) = (0.0, 0.0);
        for i in 0..m {
            let v = a.get(i, j);
            let rest = (q[i] - v * v).max(0.0);
            plus += ((p[i] + v).powi(2) + rest).sqrt();
            minus += ((p[i] - v).powi(2) + rest).sqrt();
        }
        let s = if minus < plus { -1.0 } else { 1.0 };
        for i in 0..m {
            let v = a.get(i, j);
            p[i] += s * v;
            q[i] = (q[i] - v * v).max(0.0);
        }
        x.push(s);
    }
    x
}

/// `sum_i ||row_i||_2`.
pub fn row_norm_bound(a: &MeasurementMatrix) -> f64 {
    (0..a.rows()).map(|i| a.row(i).iter().map(|v| v * v).sum::<f64>().sqrt()).sum()
}

/// `(||y||_1 - ||y||_inf, (1 + 1/sqrt 2)(||y||_1 - ||y||_2))`; the first
/// never exceeds the second.
pub fn norm_gap_check(y: &[f64]) -> (f64, f64) {
    let l1: f64 = y.iter().map(|v| v.abs()).sum();
    let l2 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let linf = y.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    (l1 - linf, (1.0 + std::f64::consts::FRAC_1_SQRT_2) * (l1 - l2))
}
