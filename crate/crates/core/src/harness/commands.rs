use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use super::{io, read_text, BoundsArgs, ExperimentConfig, ModeChoice, RecoverArgs, VerifyArgs};
use crate::bounds::{eval_bound, BoundKind, BoundQuery};
use crate::error::{Error, Result};
use crate::models::{model_partition, Model};
use crate::recovery::{recover, rip_for_recovery, signal_rng, Ratio, RecoveryResult};
use crate::sketch::{plan_params, sample_graph, to_matrix, BipartiteGraph, MeasurementMatrix};
use crate::sparsify::{model_sparsify, sparsify_general};
use crate::verify::{expansion_check, rip1_interval, ExpansionReport, Mode, RipReport};

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Writes `text` to `--out` when given; returns it for stdout either way.
fn emit(cfg: &ExperimentConfig, text: String) -> Result<String> {
    if let Some(p) = &cfg.out {
        write_file(p, &text)?;
    }
    Ok(text)
}

fn model_columns(model: &Model) -> String {
    let b = match model {
        Model::Block { b, .. } => b.to_string(),
        _ => String::new(),
    };
    format!("{},{},{},{b}", model.kind_name(), model.n(), model.k())
}

/// Shape lower and upper bounds (constant 1) for the model.
fn shape_bounds(model: &Model, eps: f64, plan_l: f64) -> (Result<f64>, Result<f64>) {
    let (n, k) = (model.n() as f64, model.k() as f64);
    match *model {
        Model::Block { b, .. } => {
            let b = b as f64;
            (
                eval_bound(&BoundQuery::new(BoundKind::BlockLower, &[("n", n), ("k", k), ("b", b)])),
                eval_bound(&BoundQuery::new(BoundKind::BlockUpper, &[("n", n), ("k", k), ("b", b), ("eps", eps)])),
            )
        }
        Model::Tree { .. } => (
            eval_bound(&BoundQuery::new(BoundKind::TreeLower, &[("n", n), ("k", k)])),
            eval_bound(&BoundQuery::new(BoundKind::TreeUpper, &[("n", n), ("k", k), ("eps", eps)])),
        ),
        Model::General { .. } => (
            eval_bound(&BoundQuery::new(BoundKind::GeneralLower, &[("n", n), ("k", k), ("l", 1.0)])),
            eval_bound(&BoundQuery::new(BoundKind::ModelUpper, &[("n", n), ("k", k), ("l", plan_l), ("eps", eps)])),
        ),
    }
}

fn value_or_na(v: &Result<f64>) -> String {
    match v {
        Ok(x) => x.to_string(),
        Err(_) => "na".into(),
    }
}

pub fn cmd_plan(cfg: &ExperimentConfig) -> Result<String> {
    let model = cfg.model()?;
    let eps = cfg.eps()?;
    let p = plan_params(model, eps, cfg.consts)?;
    let (lo, hi) = shape_bounds(model, eps, p.l);
    let mut out = String::from("kind,n,k,b,eps,l,d,m,c_d,c_m\n");
    writeln!(out, "{},{eps},{},{},{},{},{}", model_columns(model), p.l, p.d, p.m, p.c_d, p.c_m).unwrap();
    writeln!(out, "compare,lower={},upper={}", value_or_na(&lo), value_or_na(&hi)).unwrap();
    emit(cfg, out)
}

/// Expansion check in the configured mode; `auto` falls back to sampling
/// when the exhaustive walk would exceed the cap.
fn check_expansion(g: &BipartiteGraph, model: &Model, eps: f64, cfg: &ExperimentConfig, seed: u64) -> Result<ExpansionReport> {
    let mc = Mode::MonteCarlo { samples: cfg.samples, seed };
    match cfg.mode {
        ModeChoice::Exact => expansion_check(g, model, eps, Mode::Exact, cfg.cap),
        ModeChoice::MonteCarlo => expansion_check(g, model, eps, mc, cfg.cap),
        ModeChoice::Auto => match expansion_check(g, model, eps, Mode::Exact, cfg.cap) {
            Err(Error::TooLarge { .. }) => expansion_check(g, model, eps, mc, cfg.cap),
            other => other,
        },
    }
}

fn expansion_certificate(model: &Model, eps: f64, g: &BipartiteGraph, r: &ExpansionReport) -> String {
    let mut out = String::new();
    writeln!(out, "expander: {}", r.holds).unwrap();
    writeln!(out, "model: {model}").unwrap();
    writeln!(out, "eps: {eps}").unwrap();
    writeln!(out, "n: {}\nm: {}\nd: {}", g.n(), g.m(), g.d()).unwrap();
    writeln!(out, "mode: {}", r.mode).unwrap();
    writeln!(out, "sets_checked: {}", r.sets_checked).unwrap();
    writeln!(out, "worst_set: {}", r.worst).unwrap();
    writeln!(out, "worst_neighbors: {}", r.worst_neighbors).unwrap();
    writeln!(out, "worst_ratio: {}", r.worst_ratio()).unwrap();
    out
}

pub fn cmd_build(cfg: &ExperimentConfig) -> Result<String> {
    let model = cfg.model()?;
    let eps = cfg.eps()?;
    let dir = cfg.out.as_ref().ok_or_else(|| Error::input("build needs --out DIR"))?;
    let (d, m) = match (cfg.d, cfg.m) {
        (Some(d), Some(m)) => (d, m),
        (d, m) => {
            let p = plan_params(model, eps, cfg.consts)?;
            (d.unwrap_or(p.d), m.unwrap_or(p.m))
        }
    };
    if d == 0 || m < d {
        return Err(Error::input(format!("need 1 <= d <= m, got d={d}, m={m}")));
    }
    let mut last = None;
    for attempt in 0..cfg.retries.max(1) {
        let seed = cfg.seed.wrapping_add(attempt as u64);
        let g = sample_graph(model.n(), m, d, seed)?;
        let report = check_expansion(&g, model, eps, cfg, seed)?;
        if report.holds {
            fs::create_dir_all(dir)?;
            let mut cert = expansion_certificate(model, eps, &g, &report);
            writeln!(cert, "seed: {seed}\nattempts: {}", attempt + 1).unwrap();
            write_file(&dir.join("graph.txt"), &g.to_text())?;
            write_file(&dir.join("matrix.txt"), &to_matrix(&g).to_text())?;
            write_file(&dir.join("certificate.txt"), &cert)?;
            return Ok(cert);
        }
        last = Some(report);
    }
    let r = last.expect("at least one attempt");
    Err(Error::ConstructionFailed {
        attempts: cfg.retries.max(1),
        detail: format!(
            "last worst set {{{}}} has |N(S)|/(d|S|) = {} < 1 - eps = {}",
            r.worst,
            r.worst_ratio(),
            1.0 - eps
        ),
    })
}

fn rip_report(a: &MeasurementMatrix, model: &Model, doubled: bool, cfg: &ExperimentConfig) -> Result<RipReport> {
    let run = |mode| {
        if doubled {
            rip_for_recovery(a, model, mode, cfg.cap)
        } else {
            rip1_interval(a, model, mode, cfg.cap)
        }
    };
    let mc = Mode::MonteCarlo { samples: cfg.samples, seed: cfg.seed };
    match cfg.mode {
        ModeChoice::Exact => run(Mode::Exact),
        ModeChoice::MonteCarlo => run(mc),
        ModeChoice::Auto => match run(Mode::Exact) {
            Err(Error::TooLarge { .. }) => run(mc),
            other => other,
        },
    }
}

pub fn cmd_verify(cfg: &ExperimentConfig, args: &VerifyArgs) -> Result<String> {
    let model = cfg.model()?;
    if let Some(gp) = &args.graph {
        let eps = cfg.eps()?;
        let g = BipartiteGraph::from_text(&read_text(gp)?)?;
        let r = check_expansion(&g, model, eps, cfg, cfg.seed)?;
        let cert = emit(cfg, expansion_certificate(model, eps, &g, &r))?;
        if !r.holds {
            return Err(Error::CertificationViolated(format!("graph is not an expander\n{cert}")));
        }
        return Ok(cert);
    }
    let mp = args.matrix.as_ref().ok_or_else(|| Error::input("verify needs --graph or --matrix"))?;
    let a = MeasurementMatrix::from_text(&read_text(mp)?)?;
    let r = rip_report(&a, model, args.doubled, cfg)?;
    let text = match args.format.as_str() {
        "text" => r.to_text(),
        "csv" => r.to_csv(),
        other => return Err(Error::input(format!("unknown format {other:?}"))),
    };
    let text = emit(cfg, text)?;
    if let Some(eps) = cfg.eps {
        if r.eps_hi > eps {
            return Err(Error::CertificationViolated(format!("RIP-1 constant bound {} exceeds {eps}\n{text}", r.eps_hi)));
        }
    }
    Ok(text)
}

pub fn cmd_sparsify(cfg: &ExperimentConfig, matrix: &Path) -> Result<String> {
    let model = cfg.model()?;
    let eps = cfg.eps()?;
    let a = MeasurementMatrix::from_text(&read_text(matrix)?)?;
    let (out, l) = match model {
        Model::General { k, .. } => (sparsify_general(&a, *k, eps)?, *k),
        _ => model_sparsify(&a, model, eps, cfg.consts.c_part)?,
    };
    if let Some(dir) = &cfg.out {
        fs::create_dir_all(dir)?;
        write_file(&dir.join("sparsified.txt"), &out.b.to_text())?;
        write_file(&dir.join("columns.csv"), &out.to_csv())?;
    }
    let covered = match model {
        Model::General { .. } => a.cols(),
        _ => model_partition(model, cfg.consts.c_part)?.covered(),
    };
    let max_nnz = out.per_column_nnz.iter().copied().max().unwrap_or(0);
    let max_pert = out.per_column_perturbation.iter().copied().fold(0.0, f64::max);
    let mut text = String::from("kept,covered,l,perturbation_cap,nnz_cap,max_perturbation,max_nnz,total_perturbation\n");
    writeln!(
        text,
        "{},{covered},{l},{},{},{max_pert},{max_nnz},{}",
        out.kept_columns.len(),
        out.perturbation_cap,
        out.nnz_cap,
        out.total_perturbation
    )
    .unwrap();
    // s log(m/(sk)) against log(n/k); only reported, alarm beyond 10x either way
    let k = model.k().min(out.kept_columns.len().max(1));
    let q = BoundQuery::new(
        BoundKind::Tradeoff,
        &[("s", max_nnz.max(1) as f64), ("m", a.rows() as f64), ("n", out.kept_columns.len() as f64), ("k", k as f64)],
    );
    match eval_bound(&q) {
        Ok(r) => {
            let status = if (0.1..=10.0).contains(&r) { "ok" } else { "alarm" };
            writeln!(text, "tradeoff,{},{r},{status}", q.params_text()).unwrap();
        }
        Err(e) => writeln!(text, "tradeoff,{},na,{}", q.params_text(), e.to_string().replace(',', ";")).unwrap(),
    }
    Ok(text)
}

pub fn cmd_recover(cfg: &ExperimentConfig, args: &RecoverArgs) -> Result<String> {
    let model = cfg.model()?;
    let a = MeasurementMatrix::from_text(&read_text(&args.matrix)?)?;
    let (y, truth) = match (&args.signal, &args.measurements) {
        (Some(sp), _) => {
            let x = io::parse_vector(&read_text(sp)?)?;
            if x.len() != a.cols() {
                return Err(Error::input(format!("signal length {} != n = {}", x.len(), a.cols())));
            }
            (a.mul(&x), Some(x))
        }
        (None, Some(mp)) => (io::parse_vector(&read_text(mp)?)?, None),
        (None, None) => return Err(Error::input("recover needs --signal or --measurements")),
    };
    let mut r = recover(&a, &y, model, cfg.cap)?;
    if let Some(x) = &truth {
        r.evaluate(model, x)?;
    }
    if let Some(p) = &cfg.out {
        write_file(p, &io::format_vector(&r.x_star))?;
    }
    Ok(format!("{}\n{}\n", RecoveryResult::CSV_HEADER, r.csv_row()))
}

/// Random unit-l1 signal on a random member, plus dense noise of l1 mass
/// `noise`.
fn bench_signal(model: &Model, noise: f64, seed: u64, trial: u64) -> Vec<f64> {
    let mut rng = signal_rng(seed, trial);
    let t = model.sample_member(&mut rng);
    let mut x = vec![0.0; model.n()];
    let mut total = 0.0;
    for j in t.iter() {
        let e: f64 = rng.sample(Exp1);
        x[j] = if rng.random::<bool>() { e } else { -e };
        total += e;
    }
    x.iter_mut().for_each(|v| *v /= total);
    if noise > 0.0 {
        let e: Vec<f64> = (0..model.n())
            .map(|_| {
                let v: f64 = rng.sample(Exp1);
                if rng.random::<bool>() { v } else { -v }
            })
            .collect();
        let mass: f64 = e.iter().map(|v| v.abs()).sum();
        for (xi, ei) in x.iter_mut().zip(&e) {
            *xi += noise * ei / mass;
        }
    }
    x
}

pub fn cmd_bench(cfg: &ExperimentConfig, matrix: &Path) -> Result<String> {
    let model = cfg.model()?;
    let a = MeasurementMatrix::from_text(&read_text(matrix)?)?;
    if a.cols() != model.n() {
        return Err(Error::input(format!("matrix has {} columns, model has n = {}", a.cols(), model.n())));
    }
    let rows: Vec<Result<RecoveryResult>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let x = bench_signal(model, cfg.noise, cfg.seed, t);
            let mut r = recover(&a, &a.mul(&x), model, cfg.cap)?;
            r.evaluate(model, &x)?;
            Ok(r)
        })
        .collect();
    let mut out = format!("trial,{}\n", RecoveryResult::CSV_HEADER);
    let mut worst: Option<Ratio> = None;
    for (t, r) in rows.into_iter().enumerate() {
        let r = r?;
        writeln!(out, "{t},{}", r.csv_row()).unwrap();
        let ratio = r.ratio.expect("evaluated");
        worst = Some(match (worst, ratio) {
            (None, q) => q,
            (Some(Ratio::Unbounded), _) | (_, Ratio::Unbounded) => Ratio::Unbounded,
            (Some(Ratio::Finite(a)), Ratio::Finite(b)) => Ratio::Finite(a.max(b)),
            (Some(Ratio::Finite(a)), Ratio::Exact) | (Some(Ratio::Exact), Ratio::Finite(a)) => Ratio::Finite(a),
            (Some(Ratio::Exact), Ratio::Exact) => Ratio::Exact,
        });
    }
    if let Some(w) = worst {
        writeln!(out, "max,,,,{w},").unwrap();
    }
    emit(cfg, out)
}

fn bound_row(q: &BoundQuery) -> String {
    let v = match eval_bound(q) {
        Ok(v) => v.to_string(),
        Err(e) => format!("na ({})", e.to_string().replace(',', ";")),
    };
    format!("{},{},{}\n", q.kind, q.params_text(), v)
}

pub fn cmd_bounds(cfg: &ExperimentConfig, args: &BoundsArgs) -> Result<String> {
    let constant = args.constant.unwrap_or(1.0);
    let mut out = String::from("kind,params,value\n");
    if let Some(kind) = &args.kind {
        let kind: BoundKind = kind.parse()?;
        let mut q = BoundQuery::new(kind, &[]).with_constant(constant);
        for p in &args.params {
            let (name, v) = p
                .split_once('=')
                .ok_or_else(|| Error::input(format!("--param expects name=value, got {p:?}")))?;
            let v: f64 = v.parse().map_err(|_| Error::input(format!("bad value in --param {p:?}")))?;
            q.params.insert(name.to_string(), v);
        }
        eval_bound(&q)?;
        out.push_str(&bound_row(&q));
        return emit(cfg, out);
    }
    let model = cfg.model()?;
    let eps = cfg.eps()?;
    let (n, k) = (model.n() as f64, model.k() as f64);
    let plan = plan_params(model, eps, cfg.consts)?;
    let part_l = match model {
        Model::General { k, .. } => *k as f64,
        _ => model_partition(model, cfg.consts.c_part).map(|p| p.l as f64).unwrap_or(1.0),
    };
    let mut queries = vec![
        BoundQuery::new(BoundKind::PlanD, &[("n", n), ("k", k), ("l", plan.l), ("eps", eps)]),
        BoundQuery::new(BoundKind::ModelUpper, &[("n", n), ("k", k), ("l", plan.l), ("eps", eps)]),
        BoundQuery::new(BoundKind::GeneralLower, &[("n", n), ("k", k), ("l", part_l)]),
    ];
    match *model {
        Model::Block { b, .. } => {
            let b = b as f64;
            queries.push(BoundQuery::new(BoundKind::BlockLower, &[("n", n), ("k", k), ("b", b)]));
            queries.push(BoundQuery::new(BoundKind::BlockUpper, &[("n", n), ("k", k), ("b", b), ("eps", eps)]));
        }
        Model::Tree { .. } => {
            queries.push(BoundQuery::new(BoundKind::TreeLower, &[("n", n), ("k", k)]));
            queries.push(BoundQuery::new(BoundKind::TreeUpper, &[("n", n), ("k", k), ("eps", eps)]));
        }
        Model::General { .. } => {}
    }
    for q in queries {
        out.push_str(&bound_row(&q.with_constant(constant)));
    }
    writeln!(out, "plan-m,d={};l={},{}", plan.d, plan.l, plan.m).unwrap();
    emit(cfg, out)
}
