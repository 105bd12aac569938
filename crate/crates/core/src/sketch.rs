//! Random left-regular bipartite graphs, their normalized adjacency
//! matrices, and the `(d, m)` planner.

use std::fmt::Write as _;

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::models::{tree, Model, DEFAULT_C_PART};

/// Left-`d`-regular bipartite graph with `n` left and `m` right vertices.
/// `adj[u]` holds the sorted, distinct right neighbours of left vertex `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    n: usize,
    m: usize,
    d: usize,
    adj: Vec<Vec<usize>>,
}

impl BipartiteGraph {
    pub fn new(m: usize, d: usize, mut adj: Vec<Vec<usize>>) -> Result<Self> {
        if d == 0 || d > m {
            return Err(Error::input(format!("need 1 <= d <= m, got d={d}, m={m}")));
        }
        for (u, nb) in adj.iter_mut().enumerate() {
            nb.sort_unstable();
            if nb.len() != d {
                return Err(Error::input(format!("left vertex {} has {} neighbours, expected {d}", u + 1, nb.len())));
            }
            if nb.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::input(format!("left vertex {} has a repeated neighbour", u + 1)));
            }
            if nb.last().is_some_and(|&v| v >= m) {
                return Err(Error::input(format!("left vertex {} has a neighbour outside 1..={m}", u + 1)));
            }
        }
        Ok(BipartiteGraph { n: adj.len(), m, d, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn m(&self) -> usize {
        self.m
    }
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adj[u]
    }

    /// `|N(S)|`.
    pub fn neighborhood_size(&self, s: impl IntoIterator<Item = usize>) -> usize {
        let mut seen = vec![false; self.m];
        let mut count = 0;
        for u in s {
            for &v in &self.adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                }
            }
        }
        count
    }

    /// Text form: `n m d`, then one line of `d` 1-based right indices per left vertex.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.m, self.d);
        for nb in &self.adj {
            let line: Vec<String> = nb.iter().map(|v| (v + 1).to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty graph file".into()))?;
        let h: Vec<usize> = parse_ints(header)?;
        if h.len() != 3 {
            return Err(Error::Parse("graph header must be `n m d`".into()));
        }
        let (n, m, d) = (h[0], h[1], h[2]);
        let mut adj = Vec::with_capacity(n);
        for _ in 0..n {
            let line = lines.next().ok_or_else(|| Error::Parse("graph file truncated".into()))?;
            let row = parse_ints(line)?;
            if row.contains(&0) {
                return Err(Error::Parse("graph indices are 1-based".into()));
            }
            adj.push(row.into_iter().map(|v| v - 1).collect());
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing lines in graph file".into()));
        }
        BipartiteGraph::new(m, d, adj)
    }
}

fn parse_ints(line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad integer {t:?}"))))
        .collect()
}

/// Where a matrix came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    Sampled { seed: u64 },
    NormalizedAdjacency,
    Sparsified,
    Loaded,
    Explicit,
}

/// Dense `m x n` real matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementMatrix {
    m: usize,
    n: usize,
    data: Vec<f64>,
    pub provenance: Provenance,
}

impl MeasurementMatrix {
    pub fn from_row_major(m: usize, n: usize, data: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if data.len() != m * n {
            return Err(Error::input(format!("{} entries for a {m}x{n} matrix", data.len())));
        }
        if let Some(p) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("non-finite entry at ({}, {})", p / n.max(1) + 1, p % n.max(1) + 1)));
        }
        Ok(MeasurementMatrix { m, n, data, provenance })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::input("ragged rows"));
        }
        Self::from_row_major(m, n, rows.concat(), Provenance::Explicit)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        MeasurementMatrix { m: n, n, data, provenance: Provenance::Explicit }
    }

    pub fn rows(&self) -> usize {
        self.m
    }
    pub fn cols(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.get(i, j)).collect()
    }

    pub fn column_l1(&self, j: usize) -> f64 {
        (0..self.m).map(|i| self.get(i, j).abs()).sum()
    }

    /// `||A||_1`, the largest column l1 norm.
    pub fn max_column_l1(&self) -> f64 {
        (0..self.n).map(|j| self.column_l1(j)).fold(0.0, f64::max)
    }

    pub fn column_nnz(&self, j: usize) -> usize {
        (0..self.m).filter(|&i| self.get(i, j) != 0.0).count()
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.m)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Columns `cols` in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> MeasurementMatrix {
        let mut data = Vec::with_capacity(self.m * cols.len());
        for i in 0..self.m {
            for &j in cols {
                data.push(self.get(i, j));
            }
        }
        MeasurementMatrix { m: self.m, n: cols.len(), data, provenance: self.provenance }
    }

    /// Text form: `m n`, then `m` rows printed with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.m, self.n);
        for i in 0..self.m {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                write!(out, "{v:.16e}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let h = parse_ints(header)?;
        if h.len() != 2 {
            return Err(Error::Parse("matrix header must be `m n`".into()));
        }
        let (m, n) = (h[0], h[1]);
        let mut data = Vec::with_capacity(m * n);
        for r in 0..m {
            let line = lines.next().ok_or_else(|| Error::Parse("matrix file truncated".into()))?;
            let before = data.len();
            for t in line.split_whitespace() {
                data.push(t.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {t:?}")))?);
            }
            if data.len() - before != n {
                return Err(Error::Parse(format!("row {} has {} entries, expected {n}", r + 1, data.len() - before)));
            }
        }
        if lines.next().is_some() {
            return Err(Error::Parse("trailing lines in matrix file".into()));
        }
        MeasurementMatrix::from_row_major(m, n, data, Provenance::Loaded)
    }
}

/// Each left vertex gets an independent uniform `d`-subset of `[m]`.
pub fn sample_graph(n: usize, m: usize, d: usize, seed: u64) -> Result<BipartiteGraph> {
    if d == 0 || d > m {
        return Err(Error::input(format!("need 1 <= d <= m, got d={d}, m={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let adj = (0..n).map(|_| sample(&mut rng, m, d).into_vec()).collect();
    BipartiteGraph::new(m, d, adj)
}

/// Adjacency matrix scaled by `1/d`: entry `(v, u)` is `1/d` iff `u ~ v`.
pub fn to_matrix(g: &BipartiteGraph) -> MeasurementMatrix {
    let w = 1.0 / g.d as f64;
    let mut data = vec![0.0; g.m * g.n];
    for (u, nb) in g.adj.iter().enumerate() {
        for &v in nb {
            data[v * g.n + u] = w;
        }
    }
    MeasurementMatrix { m: g.m, n: g.n, data, provenance: Provenance::NormalizedAdjacency }
}

/// Constants behind the `O(.)` of the planner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanConstants {
    pub c_d: f64,
    pub c_m: f64,
    pub c_part: f64,
}

impl Default for PlanConstants {
    fn default() -> Self {
        PlanConstants { c_d: 2.0, c_m: 2.0, c_part: DEFAULT_C_PART }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanParams {
    pub d: usize,
    pub m: usize,
    pub l: f64,
    pub c_d: f64,
    pub c_m: f64,
}

/// Degree and row count for a model-expander:
///
/// `l = max(1, ln|M_k| / ln(n/k))` (blocks: `l = k/b`), clamped to `k`;
/// `d = ceil(c_d ln(e n/l) / (eps ln(e k/l)))`; `m = max(d, ceil(c_m d k / eps))`.
pub fn plan_params(model: &Model, eps: f64, consts: PlanConstants) -> Result<PlanParams> {
    let (n, k) = (model.n(), model.k());
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::PlanInfeasible(format!("need 0 < eps <= 1/2, got {eps}")));
    }
    if !(consts.c_d > 0.0 && consts.c_m > 0.0) {
        return Err(Error::PlanInfeasible("constants c_d, c_m must be positive".into()));
    }
    if let Model::Tree { .. } = model {
        let bound = consts.c_part * (n as f64).log2();
        if (k as f64) <= bound {
            return Err(Error::PlanInfeasible(format!(
                "tree model needs k > c_part * log2(n) = {bound:.3}, got k = {k}"
            )));
        }
    }
    let size = model.size();
    // |M_k| >= n/k  <=>  k |M_k| >= n
    if size.clone() * BigUint::from(k) < BigUint::from(n) {
        return Err(Error::PlanInfeasible(format!("|M_k| < n/k for {model}")));
    }
    let l = match *model {
        Model::Block { k, b, .. } => (k / b) as f64,
        _ if n == k => k as f64,
        _ => (tree::big_ln(&size) / (n as f64 / k as f64).ln()).max(1.0),
    }
    .min(k as f64);
    let e = std::f64::consts::E;
    let num = (e * n as f64 / l).ln();
    let den = eps * (e * k as f64 / l).ln();
    let d = (consts.c_d * num / den).ceil().max(1.0) as usize;
    let m = ((consts.c_m * d as f64 * k as f64 / eps).ceil() as usize).max(d);
    Ok(PlanParams { d, m, l, c_d: consts.c_d, c_m: consts.c_m })
}
