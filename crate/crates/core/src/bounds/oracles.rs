use num_bigint::BigUint;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::models::{binomial, count_sparse_sets, Model};

fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Packing {
    pub points: Vec<Vec<f64>>,
    /// `4^d`.
    pub volume_bound: f64,
    /// `((norm_cap + r) / r)^d` with `r = min_dist / 2`: disjoint balls of
    /// radius `r` inside the ball of radius `norm_cap + r`.
    pub ratio_bound: f64,
}

impl Packing {
    pub fn size(&self) -> usize {
        self.points.len()
    }
}

/// Greedy randomized packing: `trials` candidates drawn from the l1 ball of
/// radius `norm_cap` (half of them on its boundary) are visited by
/// decreasing norm, each kept when it is at l1 distance at least
/// `min_dist` from every kept point.
pub fn packing_oracle(d: usize, norm_cap: f64, min_dist: f64, trials: u64, seed: u64) -> Result<Packing> {
    if d == 0 || d > 8 {
        return Err(Error::input(format!("packing oracle needs 1 <= d <= 8, got {d}")));
    }
    if !(norm_cap > 0.0 && min_dist > 0.0) {
        return Err(Error::input("norm cap and minimum distance must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cands: Vec<(f64, Vec<f64>)> = (0..trials)
        .map(|_| {
            let mut c = vec![0.0; d];
            let mut total = 0.0;
            for v in c.iter_mut() {
                let e: f64 = rng.sample(Exp1);
                *v = if rng.random::<bool>() { e } else { -e };
                total += e;
            }
            let radius = if rng.random::<bool>() {
                norm_cap
            } else {
                norm_cap * rng.random::<f64>().powf(1.0 / d as f64)
            };
            c.iter_mut().for_each(|v| *v *= radius / total);
            (radius, c)
        })
        .collect();
    cands.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut points: Vec<Vec<f64>> = Vec::new();
    for (_, c) in cands {
        if points.iter().all(|p| l1_dist(p, &c) >= min_dist) {
            points.push(c);
        }
    }
    let r = min_dist / 2.0;
    Ok(Packing {
        points,
        volume_bound: 4f64.powi(d as i32),
        ratio_bound: ((norm_cap + r) / r).powi(d as i32),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PackingWitness {
    pub vectors: Vec<Vec<f64>>,
    pub log2_size: f64,
}

/// Greedy set of `k/2`-sparse unit-l1 vectors in `R^n` with pairwise l1
/// distance at least 1. Candidates put `±2/k` on a random `k/2`-subset.
pub fn packing_witness(n: usize, k: usize, trials: u64, seed: u64) -> Result<PackingWitness> {
    if k < 2 || !k.is_multiple_of(2) || k / 2 > n {
        return Err(Error::input(format!("packing witness needs even k >= 2 with k/2 <= n, got n={n}, k={k}")));
    }
    let h = k / 2;
    let w = 1.0 / h as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    for _ in 0..trials {
        let mut v = vec![0.0; n];
        for j in sample(&mut rng, n, h) {
            v[j] = if rng.random::<bool>() { w } else { -w };
        }
        if vectors.iter().all(|u| l1_dist(u, &v) >= 1.0 - 1e-12) {
            vectors.push(v);
        }
    }
    let log2_size = (vectors.len() as f64).log2();
    Ok(PackingWitness { vectors, log2_size })
}

/// Exact count of sparse sets of size `t` against its bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct CountingCheck {
    pub exact: u64,
    /// `|M_k| C(k, t)`.
    pub member_binomial: BigUint,
    /// `C(n, t)`.
    pub ambient_binomial: BigUint,
    /// `|M_k| (ek/t)^t`.
    pub member_exponential: f64,
    /// `(en/t)^t`.
    pub ambient_exponential: f64,
}

impl CountingCheck {
    pub fn holds(&self) -> bool {
        let e = BigUint::from(self.exact);
        let x = self.exact as f64;
        e <= self.member_binomial
            && e <= self.ambient_binomial
            && x <= self.member_exponential * (1.0 + 1e-12)
            && x <= self.ambient_exponential * (1.0 + 1e-12)
    }
}

pub fn counting_check(model: &Model, t: usize, cap: u64) -> Result<CountingCheck> {
    let (n, k) = (model.n(), model.k());
    let exact = count_sparse_sets(model, t, cap)?;
    let size = model.size();
    let e = std::f64::consts::E;
    let (kf, nf, tf) = (k as f64, n as f64, t as f64);
    let ln_size = crate::models::tree::big_ln(&size);
    Ok(CountingCheck {
        exact,
        member_binomial: &size * binomial(k as u64, t as u64),
        ambient_binomial: binomial(n as u64, t as u64),
        member_exponential: (ln_size + tf * (e * kf / tf).ln()).exp(),
        ambient_exponential: (e * nf / tf).powf(tf),
    })
}

/// `Pr[Binomial(trials, p) >= at_least]`.
pub fn binomial_tail(trials: u64, p: f64, at_least: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    let start = at_least.max(0.0).ceil() as u64;
    if start == 0 {
        return 1.0;
    }
    if start > trials {
        return 0.0;
    }
    if p == 0.0 {
        return 0.0;
    }
    if p == 1.0 {
        return 1.0;
    }
    // log-space pmf to stay accurate for long tails
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let mut log_c = 0.0; // ln C(trials, i)
    let mut total = 0.0;
    for i in 0..=trials {
        if i > 0 {
            log_c += ((trials - i + 1) as f64).ln() - (i as f64).ln();
        }
        if i >= start {
            total += (log_c + i as f64 * lp + (trials - i) as f64 * lq).exp();
        }
    }
    total.min(1.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailEstimate {
    pub trials: u64,
    pub failures: u64,
    /// `failures / trials`.
    pub frequency: f64,
    /// Standard error of `frequency`.
    pub sigma: f64,
    /// `Pr[Binomial(dt, dt/m) >= eps d t]`.
    pub binomial_tail: f64,
    /// `(eps m / (d t))^(-eps d t)`, the tail form with unit constant.
    pub shape_tail: f64,
}

/// Frequency of `|N(T)| < (1 - eps) d t` over random `t`-sets `T` of left
/// vertices whose neighbourhoods are independent uniform `d`-subsets of `[m]`.
pub fn collision_tail_estimate(m: usize, d: usize, t: usize, eps: f64, trials: u64, seed: u64) -> Result<TailEstimate> {
    if d == 0 || d > m || t == 0 {
        return Err(Error::input(format!("need 1 <= d <= m and t >= 1, got m={m}, d={d}, t={t}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::input(format!("eps must lie in (0, 1), got {eps}")));
    }
    if trials < 1000 {
        return Err(Error::input(format!("need at least 1000 trials, got {trials}")));
    }
    let threshold = (1.0 - eps) * (d * t) as f64;
    let failures: u64 = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut hit = vec![false; m];
            let mut covered = 0usize;
            for _ in 0..t {
                for v in sample(&mut rng, m, d) {
                    if !hit[v] {
                        hit[v] = true;
                        covered += 1;
                    }
                }
            }
            u64::from((covered as f64) < threshold)
        })
        .sum();
    let frequency = failures as f64 / trials as f64;
    let dt = (d * t) as f64;
    Ok(TailEstimate {
        trials,
        failures,
        frequency,
        sigma: (frequency * (1.0 - frequency) / trials as f64).sqrt(),
        binomial_tail: binomial_tail((d * t) as u64, dt / m as f64, eps * dt),
        shape_tail: (eps * m as f64 / dt).powf(-eps * dt),
    })
}
