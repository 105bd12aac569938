//! Heap-indexed full binary trees.
//!
//! Vertex `i` (0-based) has children `2i+1`, `2i+2` and parent `(i-1)/2`;
//! the 1-based heap labels used in text I/O are `i+1`.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;

use super::SupportSet;
use crate::error::{Error, Result};

/// Height `h` such that `n = 2^(h+1) - 1`, if any.
pub fn height_of(n: usize) -> Option<u32> {
    let m = n.checked_add(1)?;
    if n >= 1 && m.is_power_of_two() {
        Some(m.trailing_zeros() - 1)
    } else {
        None
    }
}

#[inline]
pub fn parent(i: usize) -> Option<usize> {
    if i == 0 {
        None
    } else {
        Some((i - 1) / 2)
    }
}

#[inline]
pub fn depth(i: usize) -> u32 {
    usize::BITS - 1 - (i + 1).leading_zeros()
}

/// Number of vertices in the complete subtree hanging from a vertex at `depth`.
#[inline]
pub fn subtree_size(height: u32, depth: u32) -> usize {
    (1usize << (height - depth + 1)) - 1
}

/// Minimal rooted subtree containing `s`: the union of root-to-element paths.
pub fn ancestor_closure(n: usize, s: &SupportSet) -> SupportSet {
    let mut mark = vec![false; n];
    for i in s.iter() {
        let mut v = i;
        loop {
            if mark[v] {
                break;
            }
            mark[v] = true;
            match parent(v) {
                Some(p) => v = p,
                None => break,
            }
        }
    }
    SupportSet::from_sorted((0..n).filter(|&i| mark[i]).collect())
}

/// Size of the ancestor closure without materializing it.
pub fn closure_size(n: usize, s: &SupportSet) -> usize {
    ancestor_closure(n, s).len()
}

/// Rooted subtree made of the top `ceil(log2 |S|)` levels plus every
/// root-to-element path of `S`.
pub fn tree_cover(n: usize, s: &SupportSet) -> Result<SupportSet> {
    if height_of(n).is_none() {
        return Err(Error::input(format!("n = {} is not of the form 2^(h+1)-1", n)));
    }
    if s.is_empty() {
        return Err(Error::input("tree cover of an empty set"));
    }
    s.check_within(n)?;
    let levels = ceil_log2(s.len());
    let top = ((1usize << levels) - 1).min(n);
    let closure = ancestor_closure(n, s);
    Ok(closure.union(&SupportSet::range(0, top)))
}

/// `2|S| + |S| * ceil(log2(n/|S|))`, the checked upper bound on `tree_cover`.
pub fn tree_cover_bound(n: usize, s: usize) -> usize {
    assert!(s >= 1);
    // smallest c with s * 2^c >= n
    let mut c = 0u32;
    while (s << c) < n {
        c += 1;
    }
    2 * s + s * c as usize
}

/// Largest ancestor closure over all `t`-subsets of the tree: the sum over
/// levels of `min(2^level, t)` (attained by `t` spread-out leaves).
pub fn max_closure(height: u32, t: usize) -> usize {
    (0..=height).map(|j| (1usize << j).min(t)).sum()
}

pub(crate) fn ceil_log2(x: usize) -> u32 {
    assert!(x >= 1);
    usize::BITS - (x - 1).leading_zeros()
}

/// `counts[h][s]` = number of rooted subtrees of size `s` in a full binary
/// tree of height `h` (`counts[h][0] = 1` is the empty tree).
pub fn subtree_counts(height: u32, k: usize) -> Vec<Vec<BigUint>> {
    let mut out: Vec<Vec<BigUint>> = Vec::with_capacity(height as usize + 1);
    for h in 0..=height as usize {
        let cap = ((1usize << (h + 1)) - 1).min(k);
        let mut row = vec![BigUint::zero(); cap + 1];
        row[0] = BigUint::one();
        if h == 0 {
            if cap >= 1 {
                row[1] = BigUint::one();
            }
        } else {
            let child = &out[h - 1];
            for s in 1..=cap {
                let mut acc = BigUint::zero();
                for a in 0..s {
                    let b = s - 1 - a;
                    if a < child.len() && b < child.len() {
                        acc += &child[a] * &child[b];
                    }
                }
                row[s] = acc;
            }
        }
        out.push(row);
    }
    out
}

/// Number of rooted subtrees of size exactly `k` in the tree with `n` vertices.
pub fn count_rooted_subtrees(n: usize, k: usize) -> BigUint {
    let h = height_of(n).expect("tree-shaped n");
    let counts = subtree_counts(h, k);
    counts[h as usize].get(k).cloned().unwrap_or_default()
}

/// All rooted subtrees of size `k`, each as a sorted index vector, in
/// lexicographic order.
pub fn rooted_subtrees(n: usize, k: usize) -> Vec<SupportSet> {
    let h = height_of(n).expect("tree-shaped n");
    let mut out: Vec<Vec<usize>> = grow(0, h, k);
    for v in &mut out {
        v.sort_unstable();
    }
    out.sort();
    out.into_iter().map(SupportSet::from_sorted).collect()
}

fn grow(v: usize, height: u32, s: usize) -> Vec<Vec<usize>> {
    if s == 0 {
        return vec![Vec::new()];
    }
    let d = depth(v);
    if s > subtree_size(height, d) {
        return Vec::new();
    }
    if d == height {
        return vec![vec![v]];
    }
    let mut out = Vec::new();
    for a in 0..s {
        let lefts = grow(2 * v + 1, height, a);
        if lefts.is_empty() {
            continue;
        }
        let rights = grow(2 * v + 2, height, s - 1 - a);
        for l in &lefts {
            for r in &rights {
                let mut t = Vec::with_capacity(s);
                t.push(v);
                t.extend_from_slice(l);
                t.extend_from_slice(r);
                out.push(t);
            }
        }
    }
    out
}

/// Uniformly random rooted subtree of size `k`.
pub fn sample_rooted_subtree<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> SupportSet {
    let h = height_of(n).expect("tree-shaped n");
    // f64 counts are plenty for sampling weights at the sizes used here
    let counts: Vec<Vec<f64>> = subtree_counts(h, k)
        .into_iter()
        .map(|row| row.iter().map(big_to_f64).collect())
        .collect();
    let mut out = Vec::with_capacity(k);
    let mut stack = vec![(0usize, k)];
    while let Some((v, s)) = stack.pop() {
        if s == 0 {
            continue;
        }
        out.push(v);
        let d = depth(v);
        if d == h {
            continue;
        }
        let child = &counts[(h - d - 1) as usize];
        let weight = |a: usize| -> f64 {
            let b = s - 1 - a;
            if a < child.len() && b < child.len() {
                child[a] * child[b]
            } else {
                0.0
            }
        };
        let total: f64 = (0..s).map(weight).sum();
        let mut u = rng.random::<f64>() * total;
        let mut pick = s - 1;
        for a in 0..s {
            let w = weight(a);
            if w > 0.0 {
                if u < w {
                    pick = a;
                    break;
                }
                u -= w;
                pick = a;
            }
        }
        stack.push((2 * v + 1, pick));
        stack.push((2 * v + 2, s - 1 - pick));
    }
    out.sort_unstable();
    SupportSet::from_sorted(out)
}

pub(crate) fn big_to_f64(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_string().parse().unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    }
}

/// Natural log of a big integer, accurate for values far beyond f64 range.
pub(crate) fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        big_to_f64(x).ln()
    } else {
        let shift = bits - 64;
        let top: BigUint = x >> shift;
        big_to_f64(&top).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn heights() {
        assert_eq!(height_of(1), Some(0));
        assert_eq!(height_of(7), Some(2));
        assert_eq!(height_of(127), Some(6));
        assert_eq!(height_of(8), None);
        assert_eq!(height_of(0), None);
        assert_eq!(depth(0), 0);
        assert_eq!(depth(2), 1);
        assert_eq!(depth(14), 3);
    }

    #[test]
    fn cover_of_single_leaf_is_its_path() {
        let s = SupportSet::one_based(&[15], 15).unwrap();
        let c = tree_cover(15, &s).unwrap();
        assert_eq!(c.to_one_based(), vec![1, 3, 7, 15]);
        let root = SupportSet::one_based(&[1], 15).unwrap();
        assert_eq!(tree_cover(15, &root).unwrap().to_one_based(), vec![1]);
    }

    #[test]
    fn cover_of_all_leaves_is_everything() {
        let s = SupportSet::one_based(&[8, 9, 10, 11, 12, 13, 14, 15], 15).unwrap();
        assert_eq!(tree_cover(15, &s).unwrap().len(), 15);
    }

    #[test]
    fn cover_rejects_empty() {
        assert!(tree_cover(15, &SupportSet::empty()).is_err());
        assert!(tree_cover(14, &SupportSet::range(0, 1)).is_err());
    }

    #[test]
    fn counts_match_catalan_when_deep_enough() {
        // Catalan numbers 1, 1, 2, 5, 14
        let c = subtree_counts(4, 4);
        let row: Vec<u64> = c[4].iter().map(|x| x.to_string().parse().unwrap()).collect();
        assert_eq!(row, vec![1, 1, 2, 5, 14]);
        assert_eq!(count_rooted_subtrees(31, 3), BigUint::from(5u32));
        // depth limit bites: height 1 tree has only {1,2,3} of size 3
        assert_eq!(count_rooted_subtrees(3, 3), BigUint::from(1u32));
    }

    #[test]
    fn enumeration_agrees_with_counts() {
        for (n, k) in [(7, 3), (15, 4), (31, 5), (15, 15)] {
            let subs = rooted_subtrees(n, k);
            assert_eq!(BigUint::from(subs.len()), count_rooted_subtrees(n, k), "n={n} k={k}");
            for s in &subs {
                assert_eq!(s.len(), k);
                assert_eq!(closure_size(n, s), k);
            }
        }
    }

    #[test]
    fn max_closure_matches_brute_force() {
        let n = 31;
        let h = height_of(n).unwrap();
        for t in 1..=3usize {
            let mut best = 0;
            let mut idx: Vec<usize> = (0..t).collect();
            loop {
                let s = SupportSet::from_sorted(idx.clone());
                best = best.max(closure_size(n, &s));
                // next combination
                let mut i = t;
                let mut done = true;
                while i > 0 {
                    i -= 1;
                    if idx[i] < n - t + i {
                        idx[i] += 1;
                        for j in i + 1..t {
                            idx[j] = idx[j - 1] + 1;
                        }
                        done = false;
                        break;
                    }
                }
                if done {
                    break;
                }
            }
            assert_eq!(max_closure(h, t), best, "t={t}");
        }
    }

    #[test]
    fn sampled_subtrees_are_valid_and_cover_all_shapes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..400 {
            let s = sample_rooted_subtree(15, 3, &mut rng);
            assert_eq!(s.len(), 3);
            assert_eq!(closure_size(15, &s), 3);
            seen.insert(s);
        }
        assert_eq!(seen.len(), 5);
    }

    #[test]
    fn big_ln_is_accurate() {
        let x = BigUint::from(1u32) << 2000usize;
        assert!((big_ln(&x) - 2000.0 * std::f64::consts::LN_2).abs() < 1e-9);
        assert!((big_ln(&BigUint::from(1000u32)) - 1000f64.ln()).abs() < 1e-12);
    }
}
