//! Sparsity models: the general `k`-sparse family, block sparsity and
//! rooted-tree sparsity, with membership tests, enumeration, counting,
//! projection and the partitions used by the column sparsifier.

mod enumerate;
mod partition;
mod project;
mod support;
pub mod tree;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};

pub use enumerate::{count_sparse_sets, enumerate_sparse_sets, for_each_sparse_set, walk_sparse_sets, SparseSetVisitor};
pub use partition::{consecutive_parts, model_partition, ModelPartition, DEFAULT_C_PART};
pub use project::project;
pub use support::SupportSet;
pub use tree::tree_cover;

/// A family of allowed supports over `[n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Model {
    /// All `k`-subsets of `[n]`.
    General { n: usize, k: usize },
    /// Unions of `k/b` contiguous blocks of size `b`.
    Block { n: usize, k: usize, b: usize },
    /// Rooted subtrees of size `k` of the heap-indexed tree on `n = 2^(h+1)-1` vertices.
    Tree { n: usize, k: usize },
}

impl Model {
    pub fn general(n: usize, k: usize) -> Result<Self> {
        Model::General { n, k }.validated()
    }

    pub fn block(n: usize, k: usize, b: usize) -> Result<Self> {
        Model::Block { n, k, b }.validated()
    }

    pub fn tree(n: usize, k: usize) -> Result<Self> {
        Model::Tree { n, k }.validated()
    }

    /// Checks the invariants of the model kind and returns `self`.
    pub fn validated(self) -> Result<Self> {
        let (n, k) = (self.n(), self.k());
        if n == 0 || k == 0 || k > n {
            return Err(Error::input(format!("need 1 <= k <= n, got n={n}, k={k}")));
        }
        match self {
            Model::General { .. } => {}
            Model::Block { b, .. } => {
                if b == 0 || k % b != 0 || n % b != 0 {
                    return Err(Error::input(format!(
                        "block size b={b} must divide both k={k} and n={n}"
                    )));
                }
            }
            Model::Tree { .. } => {
                if tree::height_of(n).is_none() {
                    return Err(Error::input(format!("tree model needs n = 2^(h+1)-1, got n={n}")));
                }
            }
        }
        Ok(self)
    }

    pub fn n(&self) -> usize {
        match *self {
            Model::General { n, .. } | Model::Block { n, .. } | Model::Tree { n, .. } => n,
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            Model::General { k, .. } | Model::Block { k, .. } | Model::Tree { k, .. } => k,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Model::General { .. } => "general",
            Model::Block { .. } => "block",
            Model::Tree { .. } => "tree",
        }
    }

    /// Block size, or 1 for the other kinds.
    pub fn block_size(&self) -> usize {
        match *self {
            Model::Block { b, .. } => b,
            _ => 1,
        }
    }

    /// Same kind with a different sparsity (e.g. `2k` for recovery).
    pub fn with_k(&self, k: usize) -> Result<Model> {
        let m = match *self {
            Model::General { n, .. } => Model::General { n, k },
            Model::Block { n, b, .. } => Model::Block { n, k, b },
            Model::Tree { n, .. } => Model::Tree { n, k },
        };
        m.validated()
    }

    /// Exact test `S ∈ M_k`.
    pub fn is_member(&self, s: &SupportSet) -> Result<bool> {
        s.check_within(self.n())?;
        if s.len() != self.k() {
            return Ok(false);
        }
        Ok(match *self {
            Model::General { .. } => true,
            Model::Block { b, .. } => {
                // exactly k/b blocks, each fully present
                let blocks = touched_blocks(s, b);
                blocks.len() * b == s.len()
            }
            Model::Tree { .. } => s.iter().all(|i| match tree::parent(i) {
                Some(p) => s.contains(p),
                None => true,
            }),
        })
    }

    /// Test whether `S` lies inside some member of the model.
    pub fn is_sparse(&self, s: &SupportSet) -> Result<bool> {
        s.check_within(self.n())?;
        if s.len() > self.k() {
            return Ok(false);
        }
        Ok(match *self {
            Model::General { .. } => true,
            Model::Block { k, b, .. } => touched_blocks(s, b).len() <= k / b,
            Model::Tree { n, k } => tree::closure_size(n, s) <= k,
        })
    }

    /// `|M_k|`, exactly.
    pub fn size(&self) -> BigUint {
        match *self {
            Model::General { n, k } => binomial(n as u64, k as u64),
            Model::Block { n, k, b } => binomial((n / b) as u64, (k / b) as u64),
            Model::Tree { n, k } => tree::count_rooted_subtrees(n, k),
        }
    }

    /// All members of the model in lexicographic order. Errors when
    /// `|M_k|` exceeds `cap`.
    pub fn members(&self, cap: u64) -> Result<Vec<SupportSet>> {
        let size = self.size();
        if size > BigUint::from(cap) {
            return Err(Error::too_large(
                format!("members of {self}"),
                tree::big_to_f64(&size),
                cap,
                "",
            ));
        }
        Ok(match *self {
            Model::General { n, k } => combinations(n, k)
                .into_iter()
                .map(SupportSet::from_sorted)
                .collect(),
            Model::Block { n, k, b } => combinations(n / b, k / b)
                .into_iter()
                .map(|blocks| {
                    SupportSet::from_sorted(
                        blocks.iter().flat_map(|&j| j * b..(j + 1) * b).collect(),
                    )
                })
                .collect(),
            Model::Tree { n, k } => tree::rooted_subtrees(n, k),
        })
    }

    /// A uniformly random member.
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R) -> SupportSet {
        match *self {
            Model::General { n, k } => {
                let mut v = sample(rng, n, k).into_vec();
                v.sort_unstable();
                SupportSet::from_sorted(v)
            }
            Model::Block { n, k, b } => {
                let mut blocks = sample(rng, n / b, k / b).into_vec();
                blocks.sort_unstable();
                SupportSet::from_sorted(blocks.iter().flat_map(|&j| j * b..(j + 1) * b).collect())
            }
            Model::Tree { n, k } => tree::sample_rooted_subtree(n, k, rng),
        }
    }
}

fn touched_blocks(s: &SupportSet, b: usize) -> Vec<usize> {
    let mut blocks: Vec<usize> = s.iter().map(|i| i / b).collect();
    blocks.dedup();
    blocks
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Model::General { n, k } => write!(f, "general:n={n},k={k}"),
            Model::Block { n, k, b } => write!(f, "block:n={n},k={k},b={b}"),
            Model::Tree { n, k } => write!(f, "tree:n={n},k={k}"),
        }
    }
}

/// Parses `block:n=..,k=..,b=..`, `tree:n=..,k=..` or `general:n=..,k=..`.
impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("model {s:?} lacks `kind:` prefix")))?;
        let (mut n, mut k, mut b) = (None, None, None);
        for kv in rest.split(',').filter(|t| !t.trim().is_empty()) {
            let (key, val) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad model field {kv:?}")))?;
            let v: usize = val
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer in {kv:?}")))?;
            match key.trim() {
                "n" => n = Some(v),
                "k" => k = Some(v),
                "b" => b = Some(v),
                other => return Err(Error::Parse(format!("unknown model field {other:?}"))),
            }
        }
        let need = |x: Option<usize>, name: &str| {
            x.ok_or_else(|| Error::Parse(format!("model {s:?} is missing {name}")))
        };
        match kind.trim() {
            "general" => Model::general(need(n, "n")?, need(k, "k")?),
            "block" => Model::block(need(n, "n")?, need(k, "k")?, need(b, "b")?),
            "tree" => Model::tree(need(n, "n")?, need(k, "k")?),
            other => Err(Error::Parse(format!("unknown model kind {other:?}"))),
        }
    }
}

pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// All `k`-combinations of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}
