//! Randomized invariants across models, sketches, verification,
//! sparsification and recovery.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use modelrip::bounds::{eval_bound, BoundKind, BoundQuery};
use modelrip::models::tree::tree_cover_bound;
use modelrip::models::{enumerate_sparse_sets, model_partition, project, tree_cover, Model, SupportSet, DEFAULT_C_PART};
use modelrip::recovery::{recover, rip_for_recovery, EXACT_TOL};
use modelrip::sketch::{plan_params, sample_graph, to_matrix, MeasurementMatrix, PlanConstants, Provenance};
use modelrip::sparsify::sparsify_general;
use modelrip::verify::{generalized_expander_slack, rip1_interval, rip1_monte_carlo, row_norm_bound, Mode};

const CAP: u64 = 1_000_000;

fn l1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

fn small_model() -> impl Strategy<Value = Model> {
    prop_oneof![
        (1usize..=10).prop_flat_map(|n| (Just(n), 1..=n)).prop_map(|(n, k)| Model::general(n, k).unwrap()),
        (1usize..=3, 1usize..=5)
            .prop_flat_map(|(b, nb)| (Just(b), Just(nb), 1..=nb))
            .prop_map(|(b, nb, kb)| Model::block(b * nb, b * kb, b).unwrap()),
        prop::sample::select(vec![1usize, 3, 7, 15])
            .prop_flat_map(|n| (Just(n), 1..=n.min(6)))
            .prop_map(|(n, k)| Model::tree(n, k).unwrap()),
    ]
}

fn subset_of(n: usize) -> impl Strategy<Value = SupportSet> {
    prop::collection::vec(any::<bool>(), n).prop_map(move |bits| {
        SupportSet::new((0..n).filter(|&j| bits[j]).collect(), n).unwrap()
    })
}

fn dense(m: usize, n: usize) -> impl Strategy<Value = MeasurementMatrix> {
    prop::collection::vec(prop_oneof![Just(0.0), -1.0..1.0f64], m * n)
        .prop_map(move |d| MeasurementMatrix::from_row_major(m, n, d, Provenance::Explicit).unwrap())
}

fn expander_like() -> impl Strategy<Value = (MeasurementMatrix, usize)> {
    (2usize..=8, 1usize..=3, 2usize..=6, 1usize..=4, any::<u64>()).prop_map(|(n, k, d, f, seed)| {
        let k = k.min(n);
        (to_matrix(&sample_graph(n, d * f + d, d, seed).unwrap()), k)
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 150, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn membership_implies_sparsity((model, s) in small_model().prop_flat_map(|m| { let n = m.n(); (Just(m), subset_of(n)) })) {
        let members = model.members(CAP).unwrap();
        let sparse = model.is_sparse(&s).unwrap();
        if model.is_member(&s).unwrap() {
            prop_assert!(sparse);
            prop_assert!(members.contains(&s));
        }
        if sparse {
            prop_assert!(s.len() <= model.k());
        }
        prop_assert_eq!(sparse, members.iter().any(|t| s.is_subset_of(t)));
    }

    #[test]
    fn support_text_round_trips(s in (1usize..40).prop_flat_map(subset_of)) {
        let back: SupportSet = s.to_string().parse().unwrap();
        prop_assert_eq!(back, s);
    }

    #[test]
    fn model_text_round_trips(model in small_model()) {
        let back: Model = model.to_string().parse().unwrap();
        prop_assert_eq!(back, model);
    }

    #[test]
    fn partition_parts_are_disjoint_sparse_and_cover_a_quarter(model in small_model()) {
        let Ok(p) = model_partition(&model, DEFAULT_C_PART) else { return Ok(()); };
        let mut seen = vec![false; model.n()];
        for part in &p.parts {
            prop_assert!(model.is_sparse(part).unwrap());
            prop_assert!(2 * part.len() >= model.k());
            for j in part.iter() {
                prop_assert!(!seen[j]);
                seen[j] = true;
            }
        }
        prop_assert!(4 * p.covered() >= model.n());
    }

    #[test]
    fn projection_keeps_the_heaviest_member((model, x) in small_model().prop_flat_map(|m| {
        let n = m.n();
        (Just(m), prop::collection::vec(-5.0..5.0f64, n))
    })) {
        let (t, xp) = project(&model, &x).unwrap();
        prop_assert!(model.is_member(&t).unwrap());
        let best = model
            .members(CAP)
            .unwrap()
            .iter()
            .map(|m| m.iter().map(|j| x[j].abs()).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((l1(&xp) - best).abs() <= 1e-12);
        let restricted = xp.iter().enumerate().all(|(j, v)| *v == if t.contains(j) { x[j] } else { 0.0 });
        prop_assert!(restricted);
    }

    #[test]
    fn tree_cover_is_a_small_rooted_subtree(s in prop::collection::btree_set(0usize..127, 1..=6)) {
        let s = SupportSet::new(s.into_iter().collect(), 127).unwrap();
        let cover = tree_cover(127, &s).unwrap();
        prop_assert!(s.is_subset_of(&cover) && cover.contains(0));
        prop_assert!(cover.len() <= tree_cover_bound(127, s.len()));
        prop_assert!(Model::tree(127, cover.len()).unwrap().is_member(&cover).unwrap());
    }

    #[test]
    fn adjacency_matrices_never_expand(
        (n, m, d, seed) in (1usize..=20, 1usize..=6).prop_flat_map(|(n, d)| (Just(n), d..=4 * d + 3, Just(d), any::<u64>())),
        raw in prop::collection::vec(-3.0..3.0f64, 20),
    ) {
        let a = to_matrix(&sample_graph(n, m, d, seed).unwrap());
        let x = &raw[..n];
        prop_assert!(l1(&a.mul(x)) <= l1(x) * (1.0 + 1e-12) + 1e-15);
        prop_assert!((a.max_column_l1() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn row_norms_dominate_the_rip_lower_side(a in (1usize..=4, 1usize..=4).prop_flat_map(|(m, n)| dense(m, n))) {
        let n = a.cols();
        let eps = rip1_interval(&a, &Model::general(n, n).unwrap(), Mode::Exact, CAP).unwrap().eps_hi;
        prop_assert!(row_norm_bound(&a) >= (1.0 - eps) * n as f64 - 1e-9);
    }

    #[test]
    fn sampled_lower_bounds_stay_below_the_exact_constant(
        a in (1usize..=5, 2usize..=5).prop_flat_map(|(m, n)| dense(m, n)),
        seed in any::<u64>(),
    ) {
        let model = Model::general(a.cols(), 2).unwrap();
        let exact = rip1_interval(&a, &model, Mode::Exact, CAP).unwrap();
        let mc = rip1_monte_carlo(&a, 200, seed, |rng| model.sample_member(rng));
        prop_assert!(mc.eps_lo <= exact.eps_hi + 1e-9);
        prop_assert!(exact.eps_lo >= 0.0 && exact.eps_lo <= exact.eps_hi);
        let w = &exact.worst_vector;
        prop_assert!((l1(w) - 1.0).abs() <= 1e-9);
        prop_assert!(model.is_sparse(&SupportSet::new((0..w.len()).filter(|&j| w[j] != 0.0).collect(), w.len()).unwrap()).unwrap());
    }

    #[test]
    fn rip_matrices_are_generalized_expanders((a, k) in expander_like()) {
        let model = Model::general(a.cols(), k).unwrap();
        let eps = rip1_interval(&a, &model, Mode::Exact, CAP).unwrap().eps_hi;
        let slack = generalized_expander_slack(&a, &model, CAP).unwrap();
        prop_assert!(slack.ratio >= 1.0 - (1.0 + 2f64.sqrt()) * eps - 1e-9);
        prop_assert!(slack.max_column_l1 <= 1.0 + eps + 1e-9);
    }

    #[test]
    fn thinning_keeps_one_entry_per_row_and_part((a, k) in expander_like(), jitter in prop::collection::vec(0.9..1.1f64, 400)) {
        let mut a = a;
        for i in 0..a.rows() {
            for j in 0..a.cols() {
                let v = a.get(i, j);
                a.set(i, j, v * jitter[(i * a.cols() + j) % jitter.len()]);
            }
        }
        let eps = rip1_interval(&a, &Model::general(a.cols(), k).unwrap(), Mode::Exact, CAP).unwrap().eps_hi;
        let Ok(out) = sparsify_general(&a, k, eps) else { return Ok(()); };
        for (p, &j) in out.kept_columns.iter().enumerate() {
            for i in 0..a.rows() {
                let v = out.b.get(i, p);
                prop_assert!(v == 0.0 || v == a.get(i, j));
            }
        }
        let parts: Vec<Vec<usize>> = (0..a.cols()).collect::<Vec<_>>().chunks(k).map(|c| c.to_vec()).collect();
        for i in 0..a.rows() {
            for part in &parts {
                let hits = out.kept_columns.iter().enumerate().filter(|(p, j)| part.contains(j) && out.b.get(i, *p) != 0.0).count();
                prop_assert!(hits <= 1);
            }
        }
        // per part: sum of column norms minus row maxima
        let bound = (2.0 + 2f64.sqrt()) * eps * a.cols() as f64;
        prop_assert!(out.total_perturbation <= bound + 1e-9, "{} > {}", out.total_perturbation, bound);
    }

    #[test]
    fn richer_models_fit_at_least_as_well(a in dense(5, 8), y in prop::collection::vec(-2.0..2.0f64, 5)) {
        let block = Model::block(8, 4, 2).unwrap();
        let general = Model::general(8, 4).unwrap();
        let rb = recover(&a, &y, &block, CAP).unwrap();
        let rg = recover(&a, &y, &general, CAP).unwrap();
        prop_assert!(rg.residual <= rb.residual + 1e-9 * (1.0 + l1(&y)));
        for r in [&rb, &rg] {
            prop_assert!(r.support.len() <= 4);
            prop_assert!(r.x_star.iter().enumerate().all(|(j, v)| *v == 0.0 || r.support.contains(j)));
        }
        prop_assert!(block.is_sparse(&rb.support).unwrap());
    }
}

#[test]
fn enumeration_matches_filtered_subsets() {
    let models = [
        Model::general(9, 3).unwrap(),
        Model::block(12, 4, 2).unwrap(),
        Model::block(18, 6, 3).unwrap(),
        Model::block(16, 8, 4).unwrap(),
        Model::tree(7, 4).unwrap(),
        Model::tree(15, 5).unwrap(),
    ];
    for model in &models {
        let n = model.n();
        for t in 1..=model.k() {
            let mut brute = Vec::new();
            for mask in 0u32..1 << n {
                if mask.count_ones() as usize == t {
                    let s = SupportSet::new((0..n).filter(|&j| mask >> j & 1 == 1).collect(), n).unwrap();
                    if model.is_sparse(&s).unwrap() {
                        brute.push(s);
                    }
                }
            }
            let mut got = enumerate_sparse_sets(model, t, CAP).unwrap();
            got.sort();
            brute.sort();
            assert_eq!(got, brute, "{model} t={t}");
        }
    }
}

#[test]
fn model_sparse_signals_are_recovered_exactly() {
    let model = Model::block(12, 4, 2).unwrap();
    let mut certified = 0;
    for seed in 0..6 {
        let a = to_matrix(&sample_graph(12, 60, 6, seed).unwrap());
        let eps = rip_for_recovery(&a, &model, Mode::Exact, CAP).unwrap().eps_hi;
        if eps >= 1.0 {
            continue;
        }
        certified += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for trial in 0..10 {
            let t = model.sample_member(&mut rng);
            let x: Vec<f64> = (0..12).map(|j| if t.contains(j) { (j + trial) as f64 - 5.5 } else { 0.0 }).collect();
            let mut r = recover(&a, &a.mul(&x), &model, CAP).unwrap();
            r.evaluate(&model, &x).unwrap();
            assert!(r.error.unwrap() <= EXACT_TOL * l1(&x), "seed {seed}: error {:?}", r.error);
        }
    }
    assert!(certified > 0);
}

#[test]
fn planned_rows_follow_the_parameters() {
    let c = PlanConstants::default();
    let m = |model: Model, eps: f64| plan_params(&model, eps, c).unwrap().m;
    for n in [256, 1024, 4096] {
        for k in [8, 16, 32] {
            let by_b: Vec<usize> = [1, 2, 4, 8].iter().map(|&b| m(Model::block(n, k, b).unwrap(), 0.25)).collect();
            assert!(by_b.windows(2).all(|w| w[1] <= w[0]), "n={n} k={k}: {by_b:?}");
            let by_eps: Vec<usize> = [0.5, 0.25, 0.1].iter().map(|&e| m(Model::block(n, k, 2).unwrap(), e)).collect();
            assert!(by_eps.windows(2).all(|w| w[1] >= w[0]), "n={n} k={k}: {by_eps:?}");
        }
        let by_k: Vec<usize> = [4, 8, 16, 32].iter().map(|&k| m(Model::block(n, k, 4).unwrap(), 0.25)).collect();
        assert!(by_k.windows(2).all(|w| w[1] >= w[0]), "n={n}: {by_k:?}");
    }
}

/// Lower shape (constant 1) <= planned m <= `C_UPPER` times the upper shape
/// over a grid of block models with k >= 2b.
#[test]
fn planned_rows_sit_between_block_shapes() {
    const C_UPPER: f64 = 8.0;
    let mut ratios = Vec::new();
    for n in [256usize, 1024, 4096, 16384] {
        for b in [2usize, 4, 8, 16] {
            for kb in [2usize, 4, 8] {
                let k = kb * b;
                for eps in [0.1, 0.25, 0.5] {
                    let model = Model::block(n, k, b).unwrap();
                    let planned = plan_params(&model, eps, PlanConstants::default()).unwrap().m as f64;
                    let (nf, kf, bf) = (n as f64, k as f64, b as f64);
                    let lower = eval_bound(&BoundQuery::new(BoundKind::BlockLower, &[("n", nf), ("k", kf), ("b", bf)])).unwrap();
                    let upper =
                        eval_bound(&BoundQuery::new(BoundKind::BlockUpper, &[("n", nf), ("k", kf), ("b", bf), ("eps", eps)])).unwrap();
                    assert!(lower <= planned, "{model} eps={eps}: lower {lower} > m {planned}");
                    assert!(planned <= C_UPPER * upper, "{model} eps={eps}: m {planned} > {C_UPPER} * {upper}");
                    ratios.push(planned / upper);
                }
            }
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    println!("planned m / upper shape in [{lo:.3}, {hi:.3}]");
}
