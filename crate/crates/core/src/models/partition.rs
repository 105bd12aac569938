use super::{tree, Model, SupportSet};
use crate::error::{Error, Result};

/// Tree models need `k > c_part * log2(n)` before a partition is attempted.
pub const DEFAULT_C_PART: f64 = 2.0;

/// Disjoint model-sparse parts plus the largest `l` such that every
/// `l`-subset of `[n]` is model-sparse.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelPartition {
    pub l: usize,
    pub parts: Vec<SupportSet>,
}

impl ModelPartition {
    pub fn covered(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }
}

/// `{0..k}, {k..2k}, ...`; the last part may be shorter.
pub fn consecutive_parts(n: usize, k: usize) -> Vec<SupportSet> {
    assert!(k >= 1);
    (0..n)
        .step_by(k)
        .map(|s| SupportSet::range(s, (s + k).min(n)))
        .collect()
}

/// Partition used by the model sparsifier: parts are pairwise disjoint,
/// model-sparse, of size at least `ceil(k/2)` and together cover at least
/// `ceil(n/4)` coordinates.
pub fn model_partition(model: &Model, c_part: f64) -> Result<ModelPartition> {
    let (n, k) = (model.n(), model.k());
    let min_part = k.div_ceil(2);
    let (l, parts) = match *model {
        Model::General { .. } | Model::Block { .. } => {
            let l = k / model.block_size();
            let parts = consecutive_parts(n, k)
                .into_iter()
                .filter(|p| p.len() >= min_part)
                .collect();
            (l, parts)
        }
        Model::Tree { n, k } => {
            let log_n = (n as f64).log2();
            if (k as f64) <= c_part * log_n {
                return Err(Error::ModelUnsupported(format!(
                    "tree partition needs k > {c_part} * log2(n) = {:.3}, got k = {k}",
                    c_part * log_n
                )));
            }
            let h = tree::height_of(n).expect("validated tree");
            let l = (1..=k).take_while(|&t| tree::max_closure(h, t) <= k).last().unwrap_or(0);
            (l, tree_parts(n, h, k, min_part)?)
        }
    };
    let out = ModelPartition { l, parts };
    if out.covered() * 4 < n {
        return Err(Error::ModelUnsupported(format!(
            "partition of {model} covers only {} of {n} coordinates",
            out.covered()
        )));
    }
    Ok(out)
}

/// For each vertex at a chosen depth `r`, the first `min(k - r, subtree)`
/// vertices of its subtree in heap order. Such a part plus its `r` strict
/// ancestors is a rooted subtree of size at most `k`.
fn tree_parts(n: usize, h: u32, k: usize, min_part: usize) -> Result<Vec<SupportSet>> {
    let mut best: Option<(usize, u32, usize)> = None; // (coverage, depth, part size)
    for r in 0..=h {
        if r as usize >= k {
            break;
        }
        let p = tree::subtree_size(h, r).min(k - r as usize);
        if p < min_part {
            continue;
        }
        let coverage = (1usize << r) * p;
        if best.is_none_or(|(c, _, _)| coverage > c) {
            best = Some((coverage, r, p));
        }
    }
    let (_, r, p) = best.ok_or_else(|| {
        Error::ModelUnsupported(format!("no depth admits tree parts of size >= {min_part} for k = {k}"))
    })?;
    let first = (1usize << r) - 1;
    let parts = (first..2 * first + 1)
        .map(|root| {
            // heap order inside the subtree at `root`: level by level
            let mut part = Vec::with_capacity(p);
            let mut level_start = root;
            let mut width = 1usize;
            'fill: while level_start < n {
                for v in level_start..level_start + width {
                    if part.len() == p {
                        break 'fill;
                    }
                    part.push(v);
                }
                level_start = 2 * level_start + 1;
                width *= 2;
            }
            SupportSet::from_sorted(part)
        })
        .collect();
    Ok(parts)
}
