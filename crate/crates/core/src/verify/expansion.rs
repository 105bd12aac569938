use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::Mode;
use crate::error::{Error, Result};
use crate::models::{walk_sparse_sets, Model, SparseSetVisitor, SupportSet};
use crate::sketch::{BipartiteGraph, MeasurementMatrix};

/// Outcome of an expansion check. `worst` minimizes `|N(S)| / (d |S|)`,
/// first in enumeration order on ties.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionReport {
    pub holds: bool,
    pub worst: SupportSet,
    pub worst_neighbors: usize,
    pub sets_checked: u64,
    pub mode: Mode,
    d: usize,
}

impl ExpansionReport {
    /// `|N(worst)| / (d |worst|)`.
    pub fn worst_ratio(&self) -> f64 {
        self.worst_neighbors as f64 / (self.d * self.worst.len()) as f64
    }
}

/// Running minimum of `|N(S)| / |S|` compared exactly as fractions.
#[derive(Clone, Debug)]
struct Worst {
    nbrs: usize,
    size: usize,
    set: Vec<usize>,
    checked: u64,
}

impl Worst {
    fn new() -> Self {
        Worst { nbrs: 1, size: 0, set: Vec::new(), checked: 0 }
    }

    fn offer(&mut self, nbrs: usize, set: &[usize]) {
        self.checked += 1;
        // nbrs / |set| < self.nbrs / self.size  (size 0 means no incumbent)
        if self.size == 0 || nbrs * self.size < self.nbrs * set.len() {
            self.nbrs = nbrs;
            self.size = set.len();
            self.set.clear();
            self.set.extend_from_slice(set);
        }
    }

    fn merge(mut self, other: Worst) -> Worst {
        let checked = self.checked + other.checked;
        if other.size > 0 && (self.size == 0 || other.nbrs * self.size < self.nbrs * other.size) {
            self = other;
        }
        self.checked = checked;
        self
    }
}

/// Per-right-vertex multiplicities of the current set, updated one left
/// vertex at a time.
struct Cover<'a> {
    g: &'a BipartiteGraph,
    hits: Vec<u32>,
    nbrs: usize,
}

impl<'a> Cover<'a> {
    fn new(g: &'a BipartiteGraph) -> Self {
        Cover { g, hits: vec![0; g.m()], nbrs: 0 }
    }

    fn add(&mut self, u: usize) {
        for &v in self.g.neighbors(u) {
            if self.hits[v] == 0 {
                self.nbrs += 1;
            }
            self.hits[v] += 1;
        }
    }

    fn remove(&mut self, u: usize) {
        for &v in self.g.neighbors(u) {
            self.hits[v] -= 1;
            if self.hits[v] == 0 {
                self.nbrs -= 1;
            }
        }
    }
}

struct ExpansionVisitor<'a> {
    cover: Cover<'a>,
    worst: Worst,
}

impl SparseSetVisitor for ExpansionVisitor<'_> {
    fn enter(&mut self, i: usize, set: &[usize]) {
        self.cover.add(i);
        self.worst.offer(self.cover.nbrs, set);
    }
    fn leave(&mut self, i: usize) {
        self.cover.remove(i);
    }
}

/// Checks `|N(S)| >= (1 - eps) d |S|` for every model-sparse `S`.
///
/// Exact mode visits every sparse set once (at most `cap` of them). Monte
/// Carlo mode draws `samples` random members and checks all of their
/// nonempty subsets by Gray-code order.
pub fn expansion_check(g: &BipartiteGraph, model: &Model, eps: f64, mode: Mode, cap: u64) -> Result<ExpansionReport> {
    if g.n() != model.n() {
        return Err(Error::input(format!("graph has {} left vertices, model has n = {}", g.n(), model.n())));
    }
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::input(format!("need 0 <= eps < 1, got {eps}")));
    }
    let worst = match mode {
        Mode::Exact => walk_sparse_sets(model, cap, |_| ExpansionVisitor { cover: Cover::new(g), worst: Worst::new() })?
            .into_iter()
            .map(|v| v.worst)
            .fold(Worst::new(), Worst::merge),
        Mode::MonteCarlo { samples, seed } => {
            let k = model.k();
            let work = samples as f64 * 2f64.powi(k as i32);
            if k >= 40 || work > cap as f64 {
                return Err(Error::too_large("subsets of sampled members", work, cap, "; lower --trials"));
            }
            (0..samples)
                .into_par_iter()
                .map(|s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(s);
                    let member = model.sample_member(&mut rng);
                    gray_subsets(g, member.as_slice())
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold(Worst::new(), Worst::merge)
        }
    };
    let holds = worst.nbrs as f64 >= (1.0 - eps) * (g.d() * worst.size) as f64 - 1e-9;
    Ok(ExpansionReport {
        holds,
        worst: SupportSet::new(worst.set.clone(), g.n())?,
        worst_neighbors: worst.nbrs,
        sets_checked: worst.checked,
        mode,
        d: g.d(),
    })
}

/// All nonempty subsets of `t`, each reached by toggling one element.
fn gray_subsets(g: &BipartiteGraph, t: &[usize]) -> Worst {
    let mut cover = Cover::new(g);
    let mut inside = vec![false; t.len()];
    let mut worst = Worst::new();
    let mut set = Vec::with_capacity(t.len());
    for step in 1u64..1 << t.len() {
        let bit = step.trailing_zeros() as usize;
        if inside[bit] {
            cover.remove(t[bit]);
        } else {
            cover.add(t[bit]);
        }
        inside[bit] = !inside[bit];
        set.clear();
        set.extend(t.iter().zip(&inside).filter(|(_, &on)| on).map(|(&u, _)| u));
        worst.offer(cover.nbrs, &set);
    }
    worst
}

/// `sum_i max_{j in S} |a_ij|`.
pub fn row_max_sum(a: &MeasurementMatrix, s: &SupportSet) -> f64 {
    (0..a.rows())
        .map(|i| s.iter().map(|j| a.get(i, j).abs()).fold(0.0, f64::max))
        .sum()
}

/// Worst generalized-expansion score over model-sparse sets.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralizedSlack {
    /// `min_S row_max_sum(S) / |S|`.
    pub ratio: f64,
    pub worst: SupportSet,
    /// Largest column l1 norm.
    pub max_column_l1: f64,
    pub sets_checked: u64,
}

impl GeneralizedSlack {
    /// Whether the matrix is a generalized `eps`-expander for the model.
    pub fn is_expander(&self, eps: f64) -> bool {
        self.ratio >= 1.0 - eps && self.max_column_l1 <= 1.0 + eps
    }
}

struct SlackVisitor<'a> {
    cols: &'a [Vec<(usize, f64)>],
    row_max: Vec<f64>,
    undo: Vec<Vec<(usize, f64)>>,
    sums: Vec<f64>,
    best: (f64, Vec<usize>),
    checked: u64,
}

impl SparseSetVisitor for SlackVisitor<'_> {
    fn enter(&mut self, j: usize, set: &[usize]) {
        let mut sum = *self.sums.last().unwrap();
        let mut changed = Vec::new();
        for &(i, v) in &self.cols[j] {
            if v > self.row_max[i] {
                changed.push((i, self.row_max[i]));
                sum += v - self.row_max[i];
                self.row_max[i] = v;
            }
        }
        self.undo.push(changed);
        self.sums.push(sum);
        self.checked += 1;
        let ratio = sum / set.len() as f64;
        if ratio < self.best.0 {
            self.best = (ratio, set.to_vec());
        }
    }
    fn leave(&mut self, _: usize) {
        for (i, old) in self.undo.pop().unwrap() {
            self.row_max[i] = old;
        }
        self.sums.pop();
    }
}

/// Minimum over model-sparse `S` of `sum_i max_{j in S} |a_ij| / |S|`, plus
/// the largest column l1 norm.
pub fn generalized_expander_slack(a: &MeasurementMatrix, model: &Model, cap: u64) -> Result<GeneralizedSlack> {
    if a.cols() != model.n() {
        return Err(Error::input(format!("matrix has {} columns, model has n = {}", a.cols(), model.n())));
    }
    let cols: Vec<Vec<(usize, f64)>> = (0..a.cols())
        .map(|j| (0..a.rows()).map(|i| (i, a.get(i, j).abs())).filter(|&(_, v)| v > 0.0).collect())
        .collect();
    let visitors = walk_sparse_sets(model, cap, |_| SlackVisitor {
        cols: &cols,
        row_max: vec![0.0; a.rows()],
        undo: Vec::new(),
        sums: vec![0.0],
        best: (f64::INFINITY, Vec::new()),
        checked: 0,
    })?;
    let mut best = (f64::INFINITY, Vec::new());
    let mut checked = 0;
    for v in visitors {
        checked += v.checked;
        if v.best.0 < best.0 {
            best = v.best;
        }
    }
    Ok(GeneralizedSlack {
        ratio: best.0,
        worst: SupportSet::new(best.1, a.cols())?,
        max_column_l1: a.max_column_l1(),
        sets_checked: checked,
    })
}
