use super::{tree, Model, SupportSet};
use crate::error::{Error, Result};

/// Best model approximation of `x` in l1: the member `T` retaining the most
/// l1 mass and the restriction of `x` to `T`. Ties go to lower indices.
pub fn project(model: &Model, x: &[f64]) -> Result<(SupportSet, Vec<f64>)> {
    let n = model.n();
    if x.len() != n {
        return Err(Error::input(format!("vector length {} != n = {}", x.len(), n)));
    }
    let support = match *model {
        Model::General { k, .. } => {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()).then(a.cmp(&b)));
            order.truncate(k);
            order.sort_unstable();
            SupportSet::from_sorted(order)
        }
        Model::Block { k, b, .. } => {
            let mass: Vec<f64> = x.chunks(b).map(|c| c.iter().map(|v| v.abs()).sum()).collect();
            let mut order: Vec<usize> = (0..n / b).collect();
            order.sort_by(|&a, &c| mass[c].total_cmp(&mass[a]).then(a.cmp(&c)));
            order.truncate(k / b);
            order.sort_unstable();
            SupportSet::from_sorted(order.iter().flat_map(|&j| j * b..(j + 1) * b).collect())
        }
        Model::Tree { n, k } => tree_knapsack(n, k, x),
    };
    let mut kept = vec![0.0; n];
    for i in support.iter() {
        kept[i] = x[i];
    }
    Ok((support, kept))
}

/// Rooted subtree of size `k` maximizing retained `|x|` mass.
///
/// `best[v][s]` is the best mass of a rooted subtree of size `s` hanging at
/// `v`; children are merged by max-plus convolution. On ties the larger
/// allocation to the left child wins.
fn tree_knapsack(n: usize, k: usize, x: &[f64]) -> SupportSet {
    let h = tree::height_of(n).expect("tree-shaped n");
    let mut best: Vec<Vec<f64>> = vec![Vec::new(); n];
    let mut split: Vec<Vec<usize>> = vec![Vec::new(); n];
    for v in (0..n).rev() {
        let cap = tree::subtree_size(h, tree::depth(v)).min(k);
        let mut row = vec![f64::NEG_INFINITY; cap + 1];
        let mut choice = vec![0usize; cap + 1];
        row[0] = 0.0;
        let w = x[v].abs();
        if 2 * v + 1 >= n {
            if cap >= 1 {
                row[1] = w;
            }
        } else {
            let (l, r) = (&best[2 * v + 1], &best[2 * v + 2]);
            for s in 1..=cap {
                let mut top = f64::NEG_INFINITY;
                let mut arg = 0;
                for a in (0..s).rev() {
                    let b = s - 1 - a;
                    if a >= l.len() || b >= r.len() {
                        continue;
                    }
                    let val = l[a] + r[b];
                    if val > top {
                        top = val;
                        arg = a;
                    }
                }
                row[s] = w + top;
                choice[s] = arg;
            }
        }
        best[v] = row;
        split[v] = choice;
    }
    let mut out = Vec::with_capacity(k);
    let mut stack = vec![(0usize, k)];
    while let Some((v, s)) = stack.pop() {
        if s == 0 {
            continue;
        }
        out.push(v);
        if 2 * v + 1 < n {
            let a = split[v][s];
            stack.push((2 * v + 1, a));
            stack.push((2 * v + 2, s - 1 - a));
        }
    }
    out.sort_unstable();
    SupportSet::from_sorted(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_picks_heaviest_block() {
        let m = Model::block(4, 2, 2).unwrap();
        let (t, xp) = project(&m, &[3.0, 0.0, 2.0, 2.0]).unwrap();
        assert_eq!(t.to_string(), "3,4");
        assert_eq!(xp, vec![0.0, 0.0, 2.0, 2.0]);
    }

    #[test]
    fn block_tie_goes_to_lowest_index() {
        let m = Model::block(4, 2, 2).unwrap();
        let (t, _) = project(&m, &[3.0, 1.0, 2.0, 2.0]).unwrap();
        assert_eq!(t.to_string(), "1,2");
    }

    #[test]
    fn tree_k1_keeps_root() {
        let m = Model::tree(7, 1).unwrap();
        let (t, xp) = project(&m, &[0.1, 5.0, 9.0, 3.0, 3.0, 3.0, 3.0]).unwrap();
        assert_eq!(t.to_string(), "1");
        assert_eq!(xp, vec![0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn tree_reaches_deep_mass() {
        let m = Model::tree(15, 4).unwrap();
        let mut x = vec![0.0; 15];
        x[14] = 10.0; // heap label 15, path 1,3,7,15
        x[1] = 1.0;
        let (t, _) = project(&m, &x).unwrap();
        assert_eq!(t.to_string(), "1,3,7,15");
    }

    #[test]
    fn general_top_k_with_ties() {
        let m = Model::general(5, 2).unwrap();
        let (t, _) = project(&m, &[1.0, -4.0, 2.0, 4.0, 2.0]).unwrap();
        assert_eq!(t.to_string(), "2,4");
        let (t, _) = project(&m, &[1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        assert_eq!(t.to_string(), "1,2");
    }

    #[test]
    fn length_mismatch() {
        let m = Model::general(5, 2).unwrap();
        assert!(project(&m, &[1.0]).is_err());
    }
}
