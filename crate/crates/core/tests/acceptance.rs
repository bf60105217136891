//! Acceptance criteria. Each test prints one `ACCEPTANCE <id> PASS|FAIL` line.
//!
//! Run with `cargo test -p defrel --test acceptance -- --nocapture` to see the
//! report lines.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use defrel::config::RunConfig;
use defrel::evaluate::{approximate_oov, mean_pool, oov_evidence, spearman, Pooling};
use defrel::geometry::{self as geo, Curvature};
use defrel::model::{init_model, RelationParams};
use defrel::trainer::{bernoulli_nll, fit, fit_with, loss_and_gradients, prune_corpus, TrainConfig};
use defrel::{ingest, pipeline, Corpus, Geometry, ModelState, Role, Triple, Vocabulary};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn toy_corpus() -> Corpus {
    ingest::load_triples_tsv(&fixture("toy_tree.tsv")).unwrap()
}

fn report(id: &str, ok: bool, detail: String) {
    println!("ACCEPTANCE {id} {}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {id} failed: {detail}");
}

const C1: Curvature = Curvature::UNIT;

fn random_ball_point<R: Rng>(rng: &mut R, dim: usize, max_norm: f64) -> Vec<f64> {
    let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = geo::norm(&v).max(1e-12);
    let r = max_norm * rng.gen::<f64>().sqrt();
    v.iter().map(|x| x / n * r).collect()
}

// ---------------------------------------------------------------------------
// 1. Geometry identities.

#[test]
fn criterion_1_geometry_identities() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = [0.0f64; 7];
    let mut closure_ok = true;
    let mut noncommutative = false;
    let dim = 5;
    for _ in 0..1000 {
        let x = random_ball_point(&mut rng, dim, 0.95);
        let y = random_ball_point(&mut rng, dim, 0.95);
        let z = random_ball_point(&mut rng, dim, 0.95);
        let zero = vec![0.0; dim];

        let xy = geo::mobius_add(&x, &y, C1).unwrap();
        let yx = geo::mobius_add(&y, &x, C1).unwrap();
        noncommutative |= xy.iter().zip(&yx).any(|(a, b)| (a - b).abs() > 1e-6);
        let id_r = geo::mobius_add(&x, &zero, C1).unwrap();
        let id_l = geo::mobius_add(&zero, &x, C1).unwrap();
        let inv = geo::mobius_add(&x, &geo::neg(&x), C1).unwrap();
        let e_id = id_r.iter().chain(&id_l).zip(x.iter().chain(&x)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst[0] = worst[0].max(e_id).max(geo::norm(&inv));

        let dxy = geo::poincare_distance(&x, &y, C1).unwrap();
        let dyx = geo::poincare_distance(&y, &x, C1).unwrap();
        let dxz = geo::poincare_distance(&x, &z, C1).unwrap();
        let dzy = geo::poincare_distance(&z, &y, C1).unwrap();
        worst[1] = worst[1].max((dxy - dyx).abs());
        worst[2] = worst[2].max(dxy - (dxz + dzy));
        worst[6] = worst[6].max(geo::poincare_distance(&x, &x, C1).unwrap());

        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vn = geo::norm(&v);
        let v: Vec<f64> = v.iter().map(|a| a / vn * rng.gen_range(0.0..5.0)).collect();
        let ev = geo::exp0(&v, C1);
        let back = geo::log0(&ev, C1);
        worst[3] = worst[3].max(v.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        let xb = random_ball_point(&mut rng, dim, 1.0 - 1e-5);
        let xb_back = geo::exp0(&geo::log0(&xb, C1), C1);
        worst[3] = worst[3].max(xb.iter().zip(&xb_back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));

        let t: f64 = rng.gen();
        let p0 = geo::geodesic_point(&x, &y, 0.0, C1).unwrap();
        let p1 = geo::geodesic_point(&x, &y, 1.0, C1).unwrap();
        let pt = geo::geodesic_point(&x, &y, t, C1).unwrap();
        let e_end = p0.iter().zip(&x).chain(p1.iter().zip(&y)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst[4] = worst[4].max(e_end);
        let add = geo::poincare_distance(&x, &pt, C1).unwrap() + geo::poincare_distance(&pt, &y, C1).unwrap();
        worst[5] = worst[5].max((add - dxy).abs());

        let far = random_ball_point(&mut rng, dim, 1.0 - 1e-6);
        let diag: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let big: Vec<f64> = v.iter().map(|a| a * 10.0).collect();
        for p in [
            xy,
            geo::mobius_add(&far, &far, C1).unwrap(),
            geo::exp0(&big, C1),
            geo::mobius_matvec(&diag, &far, C1).unwrap(),
            geo::mobius_scalar_mul(rng.gen_range(-4.0..4.0), &far, C1),
            geo::geodesic_point(&far, &x, t, C1).unwrap(),
            pt,
        ] {
            closure_ok &= geo::norm(&p) <= 1.0 - geo::BALL_EPS + 1e-12;
        }
    }
    let elapsed = start.elapsed();
    let ok = worst[0] <= 1e-9
        && worst[1] <= 1e-12
        && worst[2] <= 1e-9
        && worst[3] <= 1e-9
        && worst[4] <= 1e-6
        && worst[5] <= 1e-6
        && worst[6] <= 1e-12
        && closure_ok
        && noncommutative
        && elapsed < Duration::from_secs(5);
    report(
        "1",
        ok,
        format!(
            "identity/inverse {:.1e}, d(x,x) {:.1e}, symmetry {:.1e}, triangle slack {:.1e}, exp/log {:.1e}, geodesic endpoints {:.1e}, additivity {:.1e}, closure {closure_ok}, non-commutative {noncommutative}, {:?}",
            worst[0], worst[6], worst[1], worst[2], worst[3], worst[4], worst[5], elapsed
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. Hand values, each re-derived from scalar arithmetic.

#[test]
fn criterion_2_hand_values() {
    // x = y = (0.5, 0): numerator (1 + 2c<x,y> + c|y|^2) x + (1 - c|x|^2) y, denominator 1 + 2c<x,y> + c^2|x|^2|y|^2
    let (xs, ys) = (0.5f64, 0.5f64);
    let num = (1.0 + 2.0 * xs * ys + ys * ys) * xs + (1.0 - xs * xs) * ys;
    let den = 1.0 + 2.0 * xs * ys + xs * xs * ys * ys;
    let oracle_add = num / den;
    let got_add = geo::mobius_add(&[0.5, 0.0], &[0.5, 0.0], C1).unwrap();

    // d(0, x) with |x| = 0.5 = 2 atanh(0.5) = ln((1 + 0.5) / (1 - 0.5))
    let oracle_dist = (1.5f64 / 0.5).ln();
    let got_dist = geo::poincare_distance(&[0.0, 0.0], &[0.3, 0.4], C1).unwrap();

    // log0(tanh(0.5)) = 0.5, doubled = 1, exp0 = tanh(1) = (e^2 - 1) / (e^2 + 1)
    let e2 = 2f64.exp();
    let oracle_mv = (e2 - 1.0) / (e2 + 1.0);
    let got_mv = geo::mobius_matvec(&[2.0, 2.0], &[0.5f64.tanh(), 0.0], C1).unwrap();

    let errs = [
        (got_add[0] - 0.8).abs().max(got_add[1].abs()).max((oracle_add - 0.8).abs()),
        (got_dist - 2.0 * 0.5f64.atanh()).abs().max((oracle_dist - 2.0 * 0.5f64.atanh()).abs()),
        (got_mv[0] - oracle_mv).abs().max(got_mv[1].abs()),
    ];
    let ok = errs.iter().all(|e| *e <= 1e-12);
    report("2", ok, format!("mobius_add {:.1e}, distance {:.1e}, matvec {:.1e}", errs[0], errs[1], errs[2]));
}

// ---------------------------------------------------------------------------
// 3. Gradient check against central finite differences.

#[derive(Clone, Copy, Debug)]
enum Param {
    Entity(usize, usize),
    SubjectBias(usize),
    ObjectBias(usize),
    Translation(Role, usize),
    Diag(Role, usize),
}

fn param_mut(m: &mut ModelState, p: Param) -> &mut f64 {
    match p {
        Param::Entity(id, i) => &mut m.entity_mut(id)[i],
        Param::SubjectBias(id) => &mut m.subject_bias[id],
        Param::ObjectBias(id) => &mut m.object_bias[id],
        Param::Translation(r, i) => &mut m.relations[r.id()].translation[i],
        Param::Diag(r, i) => &mut m.relations[r.id()].diag[i],
    }
}

fn nll(m: &ModelState, ex: &[(Triple, bool)]) -> f64 {
    let scores: Vec<f64> = ex.iter().map(|(t, _)| m.score(t.s, t.r, t.o).unwrap()).collect();
    let labels: Vec<bool> = ex.iter().map(|(_, y)| *y).collect();
    bernoulli_nll(&scores, &labels).unwrap()
}

fn frozen_model(geometry: Geometry, rng: &mut ChaCha8Rng) -> ModelState {
    let vocab = Vocabulary::from_words(["v0", "v1", "v2", "v3", "v4"]);
    let dim = 4;
    let mut m = init_model(vocab, dim, geometry, C1, 0).unwrap();
    for id in 0..5 {
        let p = match geometry {
            Geometry::Hyperbolic => random_ball_point(rng, dim, 0.7),
            Geometry::Euclidean => (0..dim).map(|_| rng.gen_range(-0.6..0.6)).collect(),
        };
        m.entity_mut(id).copy_from_slice(&p);
        m.subject_bias[id] = rng.gen_range(-1.0..1.0);
        m.object_bias[id] = rng.gen_range(-1.0..1.0);
    }
    for r in [Role::Supertype, Role::DifferentiaQuality] {
        m.relations[r.id()] = RelationParams {
            translation: match geometry {
                Geometry::Hyperbolic => random_ball_point(rng, dim, 0.4),
                Geometry::Euclidean => (0..dim).map(|_| rng.gen_range(-0.4..0.4)).collect(),
            },
            diag: (0..dim).map(|_| rng.gen_range(0.3..1.7)).collect(),
        };
    }
    m
}

#[test]
fn criterion_3_gradient_check() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut probes = 0;
    let h = 1e-6;
    for geometry in [Geometry::Euclidean, Geometry::Hyperbolic] {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = frozen_model(geometry, &mut rng);
        for _ in 0..200 {
            let roles = [Role::Supertype, Role::DifferentiaQuality];
            let ex: Vec<(Triple, bool)> = (0..3)
                .map(|i| {
                    let s = rng.gen_range(0..5);
                    let o = (s + rng.gen_range(1..5)) % 5;
                    (Triple::new(s, roles[rng.gen_range(0..2)], o), i == 0)
                })
                .collect();
            let (_, grads) = loss_and_gradients(&model, &ex, false).unwrap();
            let t = ex[rng.gen_range(0..ex.len())].0;
            let i = rng.gen_range(0..4);
            let candidates = [
                (Param::Entity(t.s, i), grads.entities[&t.s][i]),
                (Param::Entity(t.o, i), grads.entities[&t.o][i]),
                (Param::SubjectBias(t.s), grads.subject_bias[&t.s]),
                (Param::ObjectBias(t.o), grads.object_bias[&t.o]),
                (Param::Translation(t.r, i), grads.translation[&t.r][i]),
                (Param::Diag(t.r, i), grads.diag[&t.r][i]),
            ];
            for (p, analytic) in candidates {
                let mut plus = model.clone();
                *param_mut(&mut plus, p) += h;
                let mut minus = model.clone();
                *param_mut(&mut minus, p) -= h;
                let fd = (nll(&plus, &ex) - nll(&minus, &ex)) / (2.0 * h);
                let rel = (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-6);
                worst = worst.max(rel);
                probes += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let ok = worst <= 1e-4 && elapsed < Duration::from_secs(10);
    report("3", ok, format!("{probes} probes (200 per geometry x 6 parameter classes), worst relative error {worst:.2e}, {elapsed:?}"));
}

// ---------------------------------------------------------------------------
// 4. Toy training oracle.

const TREE_CHILDREN: [&str; 3] = ["organism", "artifact", "location"];
const TREE_MIDDLE: [&str; 9] = ["mammal", "bird", "fish", "vehicle", "tool", "instrument", "city", "river", "mountain"];

/// Mean rank of the true object among all entities under exhaustive scoring.
fn exhaustive_mean_rank(m: &ModelState, corpus: &Corpus) -> f64 {
    let total: usize = corpus
        .triples
        .iter()
        .map(|t| {
            let s = m.score(t.s, t.r, t.o).unwrap();
            1 + (0..m.num_entities()).filter(|&o| m.score(t.s, t.r, o).unwrap() > s).count()
        })
        .sum();
    total as f64 / corpus.len() as f64
}

fn toy_config() -> TrainConfig {
    TrainConfig { epochs: 200, dim: 10, seed: 7, geometry: Geometry::Hyperbolic, deterministic: true, ..TrainConfig::default() }
}

struct ToyRun {
    init_rank: f64,
    final_rank: f64,
    windows: Vec<f64>,
    model: ModelState,
    elapsed: Duration,
    ball_ok: bool,
}

fn toy_run() -> ToyRun {
    let start = Instant::now();
    let corpus = toy_corpus();
    let cfg = toy_config();
    let init = init_model(corpus.vocab.clone(), cfg.dim, cfg.geometry, cfg.curvature, cfg.seed).unwrap();
    let init_rank = exhaustive_mean_rank(&init, &corpus);
    let mut losses = Vec::new();
    let mut ball_ok = true;
    let model = fit_with(&corpus, &cfg, &mut |_, loss, state| {
        losses.push(loss);
        ball_ok &= (0..state.num_entities()).all(|id| geo::in_ball(state.entity(id), state.curvature));
        Ok(())
    })
    .unwrap();
    let windows = losses.chunks(10).take(5).map(|w| w.iter().sum::<f64>() / w.len() as f64).collect();
    let final_rank = exhaustive_mean_rank(&model, &corpus);
    ToyRun { init_rank, final_rank, windows, model, elapsed: start.elapsed(), ball_ok }
}

#[test]
fn criterion_4a_windowed_loss() {
    let run = toy_run();
    let ok = run.windows.len() == 5 && run.windows.windows(2).all(|w| w[1] <= w[0]) && run.ball_ok;
    let ok = ok && run.elapsed < Duration::from_secs(120);
    report("4a", ok, format!("10-epoch window means {:.5?}, ball constraint every epoch {}, {:?}", run.windows, run.ball_ok, run.elapsed));
}

#[test]
fn criterion_4b_rank_improvement() {
    let run = toy_run();
    let improvement = (run.init_rank - run.final_rank) / run.init_rank;
    report(
        "4b",
        improvement >= 0.5,
        format!("mean rank {:.3} -> {:.3} ({:.1}% better, need >= 50%)", run.init_rank, run.final_rank, 100.0 * improvement),
    );
}

#[test]
fn criterion_4c_norm_hierarchy() {
    let run = toy_run();
    let m = &run.model;
    let mean_norm = |ws: &[&str]| ws.iter().map(|w| geo::norm(m.embedding(w).unwrap())).sum::<f64>() / ws.len() as f64;
    let leaves: Vec<&str> = m
        .vocab
        .words()
        .iter()
        .map(String::as_str)
        .filter(|w| *w != "entity" && !TREE_CHILDREN.contains(w) && !TREE_MIDDLE.contains(w))
        .collect();
    assert_eq!(leaves.len(), 27);
    let (leaf, child) = (mean_norm(&leaves), mean_norm(&TREE_CHILDREN));
    report("4c", leaf > child, format!("mean leaf norm {leaf:.4} vs mean norm of root's children {child:.4}"));
}

// ---------------------------------------------------------------------------
// 5. One-shot OOV approximation.

#[test]
fn criterion_5_oov_one_shot() {
    let start = Instant::now();
    let corpus = toy_corpus();
    let heldout: HashSet<String> = ["dog", "violin", "tokyo", "trout"].iter().map(|s| s.to_string()).collect();
    let pruned = prune_corpus(&corpus, &heldout);
    assert!(heldout.iter().all(|w| pruned.vocab.id(w).is_none()));
    let model = fit(&pruned, &toy_config()).unwrap();

    // True neighbours: the held-out word's siblings under `supertype`.
    let siblings = |w: &str| -> Vec<&str> {
        let parent = corpus.word_triples().find(|(s, r, _)| *s == w && *r == Role::Supertype).unwrap().2;
        corpus
            .word_triples()
            .filter(|(s, r, o)| *o == parent && *r == Role::Supertype && *s != w)
            .map(|(s, _, _)| s)
            .collect()
    };
    // Exhaustive nearest-neighbour rank of `target` around `point`.
    let rank = |point: &[f64], target: &str| -> usize {
        let d = geo::poincare_distance(point, model.embedding(target).unwrap(), model.curvature).unwrap();
        1 + (0..model.num_entities())
            .filter(|&o| geo::poincare_distance(point, model.entity(o), model.curvature).unwrap() < d)
            .count()
    };
    let (mut pooled, mut multi, mut n) = (0usize, 0usize, 0usize);
    let mut words: Vec<&String> = heldout.iter().collect();
    words.sort();
    for w in words {
        let spec = oov_evidence(&corpus, w, &model);
        assert!(!spec.evidence.is_empty());
        let p = mean_pool(&model, &spec).unwrap();
        let q = approximate_oov(&model, &spec, Pooling::Tangent).unwrap();
        assert!(geo::in_ball(&q, model.curvature));
        for s in siblings(w) {
            pooled += rank(&p, s);
            multi += rank(&q, s);
            n += 1;
        }
    }
    let (mp, mm) = (pooled as f64 / n as f64, multi as f64 / n as f64);
    let elapsed = start.elapsed();
    report(
        "5",
        mm < mp && elapsed < Duration::from_secs(120),
        format!("mean true-neighbour rank: mean pooling {mp:.3}, multi-relational {mm:.3} over {n} neighbours, {elapsed:?}"),
    );
}

// ---------------------------------------------------------------------------
// 6. Spearman.

#[test]
fn criterion_6_spearman() {
    let same = spearman(&[1., 2., 3., 4.], &[1., 2., 3., 4.]).unwrap();
    let rev = spearman(&[4., 3., 2., 1.], &[1., 2., 3., 4.]).unwrap();
    let hand = spearman(&[1., 2., 3.], &[1., 3., 2.]).unwrap();
    // Oracle for the 3-element case: rho = 1 - 6 sum(d^2) / (n (n^2 - 1)), d = (0, -1, 1)
    let hand_oracle: f64 = 1.0 - 6.0 * 2.0 / (3.0 * 8.0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(3..40);
        let pred: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..50.0)).collect();
        let gold: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
        let base = spearman(&pred, &gold).unwrap();
        let affine: Vec<f64> = pred.iter().map(|x| 2.0 * x + 7.0).collect();
        let cubed: Vec<f64> = pred.iter().map(|x| x.powi(3)).collect();
        worst = worst
            .max((spearman(&affine, &gold).unwrap() - base).abs())
            .max((spearman(&cubed, &gold).unwrap() - base).abs());
    }
    let ok = (same - 1.0).abs() < 1e-12
        && (rev + 1.0).abs() < 1e-12
        && (hand - 0.5).abs() < 1e-12
        && (hand_oracle - 0.5).abs() < 1e-12
        && worst < 1e-12;
    report("6", ok, format!("identical {same}, reversed {rev}, hand case {hand}, monotone-transform drift {worst:.1e}"));
}

// ---------------------------------------------------------------------------
// 7. Determinism of the full pipeline.

fn toy_pipeline_config(out: &Path) -> RunConfig {
    RunConfig {
        definitions: Some(fixture("toy_definitions.tsv")),
        output_dir: out.to_path_buf(),
        eval_benchmarks: vec![fixture("toy_benchmark.tsv")],
        dev_benchmark: Some(fixture("toy_benchmark.tsv")),
        checkpoint_every: 25,
        train: TrainConfig { epochs: 50, dim: 10, seed: 11, deterministic: true, ..TrainConfig::default() },
        ..RunConfig::default()
    }
}

#[test]
fn criterion_7_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let a = pipeline::run(&toy_pipeline_config(&dir.path().join("a"))).unwrap();
    let b = pipeline::run(&toy_pipeline_config(&dir.path().join("b"))).unwrap();
    let bytes_a = std::fs::read(&a.model_path).unwrap();
    let bytes_b = std::fs::read(&b.model_path).unwrap();
    let ckpt_a = std::fs::read(dir.path().join("a/checkpoint-0050.bin")).unwrap();
    let ckpt_b = std::fs::read(dir.path().join("b/checkpoint-0050.bin")).unwrap();
    let elapsed = start.elapsed();
    let ok = bytes_a == bytes_b && ckpt_a == ckpt_b && elapsed < Duration::from_secs(60);
    report(
        "7",
        ok,
        format!("model files {} bytes, identical {}, checkpoints identical {}, two runs in {elapsed:?}", bytes_a.len(), bytes_a == bytes_b, ckpt_a == ckpt_b),
    );
}
