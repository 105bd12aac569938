use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use super::{tree, Model, SupportSet};
use crate::error::{Error, Result};

/// Callbacks for [`walk_sparse_sets`]. `enter` runs after `i` joins the
/// current set (passed in increasing order); `leave` undoes it.
pub trait SparseSetVisitor {
    fn enter(&mut self, i: usize, set: &[usize]);
    fn leave(&mut self, i: usize);
}

/// Visits every nonempty model-sparse set exactly once, depth-first in
/// lexicographic order. The walk is split by smallest element: `make(first)`
/// builds one visitor per split, the splits run in parallel, and the
/// visitors come back ordered by `first`. Fails once more than `cap` sets
/// have been visited in total.
pub fn walk_sparse_sets<V, F>(model: &Model, cap: u64, make: F) -> Result<Vec<V>>
where
    V: SparseSetVisitor + Send,
    F: Fn(usize) -> V + Sync,
{
    const BATCH: u64 = 1024;
    let visited = AtomicU64::new(0);
    let out: Vec<Option<V>> = (0..model.n())
        .into_par_iter()
        .map(|first| {
            let mut visitor = make(first);
            let mut walker = Walker::new(model);
            let mut local = 0u64;
            let mut tick = || {
                local += 1;
                if local == BATCH {
                    local = 0;
                    visited.fetch_add(BATCH, Ordering::Relaxed) + BATCH <= cap
                } else {
                    true
                }
            };
            let mut chosen = Vec::with_capacity(model.k());
            let ok = walker.walk(first, first + 1, &mut chosen, &mut visitor, &mut tick);
            visited.fetch_add(local, Ordering::Relaxed);
            ok.then_some(visitor)
        })
        .collect();
    let total = visited.load(Ordering::Relaxed);
    if total > cap || out.iter().any(Option::is_none) {
        return Err(Error::too_large(
            format!("model-sparse sets of {model}"),
            total as f64,
            cap,
            "; try monte-carlo mode",
        ));
    }
    Ok(out.into_iter().map(Option::unwrap).collect())
}

/// Visits every model-sparse set of size exactly `t`, in lexicographic
/// order. Returns the number visited; fails once more than `cap` sets have
/// been produced.
pub fn for_each_sparse_set<F>(model: &Model, t: usize, cap: u64, mut f: F) -> Result<u64>
where
    F: FnMut(&SupportSet),
{
    let k = model.k();
    if t == 0 || t > k {
        return Err(Error::input(format!("need 1 <= t <= k = {k}, got t = {t}")));
    }
    let mut walker = Walker::new(model);
    let mut count = 0u64;
    let mut chosen = Vec::with_capacity(t);
    let mut overflow = false;
    walker.dfs(0, t, &mut chosen, &mut |set| {
        count += 1;
        if count > cap {
            overflow = true;
            return false;
        }
        f(&SupportSet::from_sorted(set.to_vec()));
        true
    });
    if overflow {
        return Err(Error::too_large(
            format!("sparse sets of size {t} in {model}"),
            count as f64,
            cap,
            "",
        ));
    }
    Ok(count)
}

/// `#(M_k, t)` together with the sets themselves.
pub fn enumerate_sparse_sets(model: &Model, t: usize, cap: u64) -> Result<Vec<SupportSet>> {
    let mut out = Vec::new();
    for_each_sparse_set(model, t, cap, |s| out.push(s.clone()))?;
    Ok(out)
}

/// `#(M_k, t)` without storing the sets.
pub fn count_sparse_sets(model: &Model, t: usize, cap: u64) -> Result<u64> {
    for_each_sparse_set(model, t, cap, |_| {})
}

/// Depth-first walk over increasing index sequences, pruned by the
/// monotone model cost (touched blocks, ancestor-closure size, or size).
struct Walker {
    n: usize,
    limit: usize,
    kind: Kind,
}

enum Kind {
    General,
    Block { b: usize, per_block: Vec<u32>, touched: usize },
    Tree { mark: Vec<bool>, closure: usize },
}

impl Walker {
    fn new(model: &Model) -> Self {
        match *model {
            Model::General { n, k } => Walker { n, limit: k, kind: Kind::General },
            Model::Block { n, k, b } => Walker {
                n,
                limit: k / b,
                kind: Kind::Block { b, per_block: vec![0; n / b], touched: 0 },
            },
            Model::Tree { n, k } => Walker {
                n,
                limit: k,
                kind: Kind::Tree { mark: vec![false; n], closure: 0 },
            },
        }
    }

    /// Adds `i`; returns the undo log, or `None` (state untouched) when the
    /// cost limit would be exceeded.
    fn push(&mut self, i: usize, depth_after: usize) -> Option<Vec<usize>> {
        match &mut self.kind {
            Kind::General => (depth_after <= self.limit).then(Vec::new),
            Kind::Block { b, per_block, touched } => {
                let blk = i / *b;
                if per_block[blk] == 0 {
                    if *touched + 1 > self.limit {
                        return None;
                    }
                    *touched += 1;
                }
                per_block[blk] += 1;
                Some(Vec::new())
            }
            Kind::Tree { mark, closure } => {
                let mut added = Vec::new();
                let mut v = i;
                loop {
                    if mark[v] {
                        break;
                    }
                    added.push(v);
                    match tree::parent(v) {
                        Some(p) => v = p,
                        None => break,
                    }
                }
                if *closure + added.len() > self.limit {
                    return None;
                }
                for &a in &added {
                    mark[a] = true;
                }
                *closure += added.len();
                Some(added)
            }
        }
    }

    fn pop(&mut self, i: usize, undo: Vec<usize>) {
        match &mut self.kind {
            Kind::General => {}
            Kind::Block { b, per_block, touched } => {
                let blk = i / *b;
                per_block[blk] -= 1;
                if per_block[blk] == 0 {
                    *touched -= 1;
                }
            }
            Kind::Tree { mark, closure } => {
                for &a in &undo {
                    mark[a] = false;
                }
                *closure -= undo.len();
            }
        }
    }

    /// Adds each `i` in `lo..hi` (then any larger index below it) to
    /// `chosen` while the set stays sparse. Returns false to abort.
    fn walk<V: SparseSetVisitor>(
        &mut self,
        lo: usize,
        hi: usize,
        chosen: &mut Vec<usize>,
        visitor: &mut V,
        tick: &mut dyn FnMut() -> bool,
    ) -> bool {
        for i in lo..hi {
            if let Some(undo) = self.push(i, chosen.len() + 1) {
                chosen.push(i);
                visitor.enter(i, chosen);
                let go_on = tick() && self.walk(i + 1, self.n, chosen, visitor, tick);
                visitor.leave(i);
                chosen.pop();
                self.pop(i, undo);
                if !go_on {
                    return false;
                }
            }
        }
        true
    }

    /// Returns false to abort the walk.
    fn dfs(
        &mut self,
        start: usize,
        t: usize,
        chosen: &mut Vec<usize>,
        emit: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if chosen.len() == t {
            return emit(chosen);
        }
        let remaining = t - chosen.len();
        for i in start..=self.n - remaining {
            if let Some(undo) = self.push(i, chosen.len() + 1) {
                chosen.push(i);
                let go_on = self.dfs(i + 1, t, chosen, emit);
                chosen.pop();
                self.pop(i, undo);
                if !go_on {
                    return false;
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::combinations;

    fn brute(model: &Model, t: usize) -> u64 {
        combinations(model.n(), t)
            .into_iter()
            .filter(|c| model.is_sparse(&SupportSet::from_sorted(c.clone())).unwrap())
            .count() as u64
    }

    #[test]
    fn block_counts() {
        let m = Model::block(8, 4, 2).unwrap();
        assert_eq!(count_sparse_sets(&m, 1, 1000).unwrap(), 8);
        assert_eq!(count_sparse_sets(&m, 2, 1000).unwrap(), 28);
    }

    #[test]
    fn tree_counts() {
        let m = Model::tree(7, 2).unwrap();
        let sets = enumerate_sparse_sets(&m, 2, 1000).unwrap();
        let txt: Vec<String> = sets.iter().map(|s| s.to_string()).collect();
        assert_eq!(txt, vec!["1,2", "1,3"]);
    }

    #[test]
    fn agrees_with_brute_force() {
        let models = [
            Model::block(12, 6, 3).unwrap(),
            Model::block(16, 4, 2).unwrap(),
            Model::tree(15, 5).unwrap(),
            Model::tree(15, 7).unwrap(),
            Model::general(10, 4).unwrap(),
        ];
        for m in &models {
            for t in 1..=m.k() {
                assert_eq!(count_sparse_sets(m, t, u64::MAX).unwrap(), brute(m, t), "{m} t={t}");
            }
        }
    }

    struct Collect {
        sets: Vec<Vec<usize>>,
        depth: usize,
    }

    impl SparseSetVisitor for Collect {
        fn enter(&mut self, _: usize, set: &[usize]) {
            self.depth += 1;
            assert_eq!(self.depth, set.len());
            self.sets.push(set.to_vec());
        }
        fn leave(&mut self, _: usize) {
            self.depth -= 1;
        }
    }

    #[test]
    fn walk_visits_each_sparse_set_once() {
        let models = [Model::block(12, 6, 3).unwrap(), Model::tree(15, 5).unwrap(), Model::general(9, 3).unwrap()];
        for m in &models {
            let parts = walk_sparse_sets(m, u64::MAX, |_| Collect { sets: Vec::new(), depth: 0 }).unwrap();
            let all: Vec<Vec<usize>> = parts.into_iter().flat_map(|c| c.sets).collect();
            let mut sorted = all.clone();
            sorted.sort();
            assert_eq!(all, sorted, "{m}: lexicographic order");
            sorted.dedup();
            assert_eq!(sorted.len(), all.len());
            let expected: u64 = (1..=m.k()).map(|t| brute(m, t)).sum();
            assert_eq!(all.len() as u64, expected, "{m}");
        }
    }

    #[test]
    fn walk_respects_cap() {
        let m = Model::general(20, 4).unwrap();
        let r = walk_sparse_sets(&m, 3000, |_| Collect { sets: Vec::new(), depth: 0 });
        assert!(matches!(r, Err(Error::TooLarge { .. })));
    }

    #[test]
    fn cap_and_range_errors() {
        let m = Model::general(20, 5).unwrap();
        assert!(matches!(count_sparse_sets(&m, 5, 100), Err(Error::TooLarge { .. })));
        assert!(count_sparse_sets(&m, 0, 100).is_err());
        assert!(count_sparse_sets(&m, 6, 100).is_err());
    }
}
