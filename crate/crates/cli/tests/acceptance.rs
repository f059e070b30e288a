//! Acceptance criteria for the gaitnet pipeline. Each criterion prints one
//! PASS/FAIL line; the process exits non-zero if any fails. Set
//! `ACCEPTANCE_ONLY=2,9` to run a subset.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use gaitnet::data::{
    augment_rotate_x, synthesize_dataset, Corpus, DatasetManifest, DogId, GeneratorSpec, LabeledWindow,
    Placement, PlacementSelector, PreprocessConfig, Protocol, Provenance, Task, TaskSpec,
};
use gaitnet::model::{backward, flatten_dim, forward, GaitNetConfig, HeadMode, ModelParams};
use gaitnet::nn::{
    conv1d_backward, conv1d_forward, fc_backward, fc_forward, log_softmax, maxpool1d, maxpool1d_backward,
    nll_logit_grad, nll_loss, relu, relu_backward, DenseVector, FeatureMap, LayerParams, Tensor,
};
use gaitnet::train::{
    adam_step, plan_loo, plan_random_split, run_loo, run_random_split, train_once, AdamConfig, AdamState,
    ConfusionMatrix, ExperimentConfig, F1Average, FoldStatus, TrainConfig,
};
use gaitnet::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("architecture fidelity", c1_architecture),
        ("gradient correctness", c2_gradients),
        ("optimizer correctness", c3_optimizer),
        ("capacity sanity", c4_capacity),
        ("synthetic learnability (random split)", c5_learnability),
        ("synthetic generalization (LOO)", c6_generalization),
        ("protocol invariants", c7_protocol),
        ("augmentation invariants", c8_augmentation),
        ("metric oracle", c9_metrics),
        ("determinism", c10_determinism),
    ];
    let only: Option<Vec<usize>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&n)) {
            continue;
        }
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {n:>2} {tag} {name}: {detail} [{secs:.1}s]");
        if outcome.is_err() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- 1

fn c1_architecture() -> Check {
    let start = Instant::now();
    let d = flatten_dim(&GaitNetConfig::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(d == 1792, || format!("flatten_dim = {d}, expected 1792"))?;
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("flatten_dim = {d}"))
}

// ---------------------------------------------------------------- 2

const LAYER_STEP: f64 = 5e-7;
const LAYER_TOL: f64 = 1e-5;
const NET_STEP: f64 = 1e-6;
const NET_TOL: f64 = 1e-4;
const INSTANCES: usize = 100;

/// Relative error with a 1e-3 magnitude floor, so analytically-zero entries
/// are not judged against rounding noise.
fn rel_err(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-3)
}

#[derive(Default)]
struct Tally {
    compared: usize,
    skipped: usize,
    worst: f64,
}

impl Tally {
    fn add(&mut self, analytic: f64, numeric: f64) {
        self.compared += 1;
        self.worst = self.worst.max(rel_err(analytic, numeric));
    }
}

fn central(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Checks every entry of `x` against `analytic` for the scalar `loss(x)`.
fn check_all(tally: &mut Tally, x: &[f64], analytic: &[f64], loss: impl Fn(&[f64]) -> f64) {
    let mut buf = x.to_vec();
    for i in 0..x.len() {
        let numeric = central(
            |v| {
                buf[i] = v;
                let l = loss(&buf);
                buf[i] = x[i];
                l
            },
            x[i],
            LAYER_STEP,
        );
        tally.add(analytic[i], numeric);
    }
}

fn check_dense(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::default();
    for _ in 0..INSTANCES {
        let (o, n) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let p = LayerParams::dense(o, n, uniform(rng, o * n), uniform(rng, o)).unwrap();
        let x = DenseVector::new(uniform(rng, n));
        let u = uniform(rng, o);
        let (g, dx) = fc_backward(&x, &p, &DenseVector::new(u.clone())).unwrap();
        let loss = |p: &LayerParams, x: &DenseVector| dot(fc_forward(x, p).unwrap().values(), &u);
        check_all(&mut t, &p.weights, &g.weights, |w| {
            loss(&LayerParams::dense(o, n, w.to_vec(), p.bias.clone()).unwrap(), &x)
        });
        check_all(&mut t, &p.bias, &g.bias, |b| loss(&LayerParams::dense(o, n, p.weights.clone(), b.to_vec()).unwrap(), &x));
        check_all(&mut t, x.values(), dx.values(), |v| loss(&p, &DenseVector::new(v.to_vec())));
    }
    t
}

fn check_conv(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::default();
    for _ in 0..INSTANCES {
        let (ci, co, k) = (rng.gen_range(1..=4), rng.gen_range(1..=4), rng.gen_range(1..=3));
        let len = rng.gen_range(k..=8);
        let p = LayerParams::conv1d(co, ci, k, uniform(rng, co * ci * k), uniform(rng, co)).unwrap();
        let x = FeatureMap::new(ci, len, uniform(rng, ci * len)).unwrap();
        let out_len = len - k + 1;
        let u = uniform(rng, co * out_len);
        let (g, dx) = conv1d_backward(&x, &p, &FeatureMap::new(co, out_len, u.clone()).unwrap()).unwrap();
        let loss = |p: &LayerParams, x: &FeatureMap| dot(conv1d_forward(x, p).unwrap().values(), &u);
        check_all(&mut t, &p.weights, &g.weights, |w| {
            loss(&LayerParams::conv1d(co, ci, k, w.to_vec(), p.bias.clone()).unwrap(), &x)
        });
        check_all(&mut t, &p.bias, &g.bias, |b| {
            loss(&LayerParams::conv1d(co, ci, k, p.weights.clone(), b.to_vec()).unwrap(), &x)
        });
        check_all(&mut t, x.values(), dx.values(), |v| loss(&p, &FeatureMap::new(ci, len, v.to_vec()).unwrap()));
    }
    t
}

fn check_relu(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::default();
    for _ in 0..INSTANCES {
        let (c, len) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let mut values = uniform(rng, c * len);
        for v in &mut values {
            // keep clear of the kink at 0
            while v.abs() < 1e-6 {
                t.skipped += 1;
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        let x = FeatureMap::new(c, len, values).unwrap();
        let u = FeatureMap::new(c, len, uniform(rng, c * len)).unwrap();
        let g = relu_backward(&x, &u);
        check_all(&mut t, x.values(), g.values(), |v| {
            dot(relu(&FeatureMap::new(c, len, v.to_vec()).unwrap()).values(), u.values())
        });
    }
    t
}

fn check_pool(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::default();
    let mut done = 0;
    while done < INSTANCES {
        let (c, pool) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
        let len = rng.gen_range(pool..=8);
        let x = FeatureMap::new(c, len, uniform(rng, c * len)).unwrap();
        let out_len = len / pool;
        let near_tie = (0..c).any(|ch| {
            (0..out_len).any(|o| {
                let mut w: Vec<f64> = x.channel(ch)[o * pool..(o + 1) * pool].to_vec();
                w.sort_by(|a, b| b.total_cmp(a));
                w.len() > 1 && w[0] - w[1] < 1e-6
            })
        });
        if near_tie {
            t.skipped += 1;
            continue;
        }
        let u = FeatureMap::new(c, out_len, uniform(rng, c * out_len)).unwrap();
        let (_, idx) = maxpool1d(&x, pool).unwrap();
        let g = maxpool1d_backward(&idx, &u);
        check_all(&mut t, x.values(), g.values(), |v| {
            dot(maxpool1d(&FeatureMap::new(c, len, v.to_vec()).unwrap(), pool).unwrap().0.values(), u.values())
        });
        done += 1;
    }
    t
}

fn check_softmax_nll(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::default();
    for _ in 0..INSTANCES {
        let n = rng.gen_range(2..=8);
        let z: Vec<f64> = uniform(rng, n).iter().map(|v| 3.0 * v).collect();
        let target = rng.gen_range(0..n);
        let g = nll_logit_grad(&log_softmax(&DenseVector::new(z.clone())), target).unwrap();
        check_all(&mut t, &z, g.values(), |v| nll_loss(&log_softmax(&DenseVector::new(v.to_vec())), target).unwrap());
    }
    t
}

fn tiny_config(head_mode: HeadMode) -> GaitNetConfig {
    GaitNetConfig {
        num_classes: 3,
        input_channels: 6,
        window_len: 16,
        conv_channels: [2, 3],
        kernel_size: 3,
        pool_size: 2,
        fc_sizes: [8, 4],
        dropout_rate: 0.0,
        head_mode,
    }
}

/// End-to-end check over every parameter. Coordinates where the one-sided
/// differences disagree sit next to a ReLU kink or pooling tie and are skipped.
fn check_network(rng: &mut ChaCha8Rng) -> Tally {
    let mut t = Tally::default();
    let mut dummy = ChaCha8Rng::seed_from_u64(0);
    for inst in 0..INSTANCES {
        let mode = if inst % 2 == 0 { HeadMode::Single } else { HeadMode::TwoHead };
        let cfg = tiny_config(mode);
        let mut params = ModelParams::init(&cfg, inst as u64).unwrap();
        let window = FeatureMap::new(6, 16, uniform(rng, 96)).unwrap();
        let target = rng.gen_range(0..3);
        let grads = backward(&params, &window, target).unwrap();
        let mut loss = |p: &ModelParams| {
            nll_loss(&forward(p, &window, false, &mut dummy).unwrap(), target).unwrap()
        };
        let f0 = loss(&params);
        for l in 0..params.layers.len() {
            for which in 0..2 {
                let n = if which == 0 { params.layers[l].weights.len() } else { params.layers[l].bias.len() };
                for i in 0..n {
                    let slot = |p: &mut ModelParams| -> *mut f64 {
                        if which == 0 { &mut p.layers[l].weights[i] } else { &mut p.layers[l].bias[i] }
                    };
                    let orig = unsafe { *slot(&mut params) };
                    unsafe { *slot(&mut params) = orig + NET_STEP };
                    let fp = loss(&params);
                    unsafe { *slot(&mut params) = orig - NET_STEP };
                    let fm = loss(&params);
                    unsafe { *slot(&mut params) = orig };
                    let (dp, dm) = ((fp - f0) / NET_STEP, (f0 - fm) / NET_STEP);
                    let numeric = (fp - fm) / (2.0 * NET_STEP);
                    if (dp - dm).abs() > 2e-5 + 1e-3 * numeric.abs() {
                        t.skipped += 1;
                        continue;
                    }
                    let analytic = if which == 0 { grads.layers[l].weights[i] } else { grads.layers[l].bias[i] };
                    t.add(analytic, numeric);
                }
            }
        }
    }
    t
}

fn c2_gradients() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let layers = [
        ("dense", check_dense(&mut rng)),
        ("conv1d", check_conv(&mut rng)),
        ("relu", check_relu(&mut rng)),
        ("maxpool", check_pool(&mut rng)),
        ("log_softmax+nll", check_softmax_nll(&mut rng)),
    ];
    let net = check_network(&mut rng);
    let mut parts = Vec::new();
    for (name, t) in &layers {
        ensure(t.worst <= LAYER_TOL, || format!("{name}: worst relative error {:.2e} > {LAYER_TOL:e}", t.worst))?;
        parts.push(format!("{name} {:.1e}", t.worst));
    }
    let skip_frac = net.skipped as f64 / (net.skipped + net.compared) as f64;
    ensure(net.worst <= NET_TOL, || format!("network: worst relative error {:.2e} > {NET_TOL:e}", net.worst))?;
    ensure(skip_frac < 0.05, || format!("network: {:.1}% of coordinates near kinks", 100.0 * skip_frac))?;
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(120), || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{INSTANCES} instances each; worst rel err {}; network {:.1e} over {} params ({} kink-adjacent skipped)",
        parts.join(", "),
        net.worst,
        net.compared,
        net.skipped
    ))
}

// ---------------------------------------------------------------- 3

fn c3_optimizer() -> Check {
    let scalar = |x: f64| vec![LayerParams::dense(1, 1, vec![x], vec![0.0]).unwrap()];
    let grad = |g: f64| gaitnet::nn::GradientSet { layers: scalar(g) };

    let mut p = scalar(1.0);
    let cfg = AdamConfig { lr: 1e-4, weight_decay: 0.0, ..AdamConfig::default() };
    let mut state = AdamState::new(&p, cfg);
    adam_step(&mut p, &grad(1.0), &mut state).map_err(|e| e.to_string())?;
    // t = 1: m = 0.1, v = 0.001; m̂ = v̂^(1/2) = 1
    let m_hat = (1.0 - 0.9) * 1.0 / (1.0 - 0.9);
    let v_hat = (1.0 - 0.999) * 1.0 / (1.0 - 0.999);
    let expected = 1.0 - 1e-4 * m_hat / (f64::sqrt(v_hat) + 1e-8);
    let err = (p[0].weights[0] - expected).abs();
    ensure(err <= 1e-12, || format!("t=1 update off by {err:e}"))?;

    let mut p = scalar(5.0);
    let mut state = AdamState::new(&p, AdamConfig { lr: 0.01, weight_decay: 0.0, ..AdamConfig::default() });
    let mut reached = None;
    for step in 1..=10_000 {
        let x = p[0].weights[0];
        adam_step(&mut p, &grad(2.0 * x), &mut state).map_err(|e| e.to_string())?;
        if reached.is_none() && p[0].weights[0].abs() < 1e-3 {
            reached = Some(step);
        }
    }
    let x = p[0].weights[0];
    ensure(x.abs() < 1e-3, || format!("|x| = {:.2e} after 10^4 steps", x.abs()))?;
    Ok(format!("t=1 error {err:.1e}; x^2 from 5: |x| < 1e-3 at step {}, final |x| = {:.1e}", reached.unwrap(), x.abs()))
}

// ---------------------------------------------------------------- 4

fn c4_capacity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let values: Vec<f64> = (0..720).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let window = LabeledWindow {
        values: FeatureMap::new(6, 120, values).unwrap(),
        label: 2,
        provenance: provenance("X01", 0),
    };
    let data = vec![window; 32];
    let cfg = TrainConfig { epochs: 200, restarts: 1, ..TrainConfig::default() };
    let (_, curve) = train_once(&data, &GaitNetConfig::default(), &cfg, 0).map_err(|e| e.to_string())?;
    let first = curve.epoch_loss.iter().position(|&l| l < 0.01);
    ensure(first.is_some(), || format!("loss after 200 epochs {:.4}", curve.final_loss().unwrap()))?;
    Ok(format!(
        "default GaitNet, one window x32, batch 32: loss < 0.01 at epoch {} (final {:.2e})",
        first.unwrap() + 1,
        curve.final_loss().unwrap()
    ))
}

fn provenance(dog: &str, start: usize) -> Provenance {
    Provenance {
        dog_id: DogId::new(dog),
        placement: Placement::Neck,
        protocol: Protocol::Walk,
        start,
        augmented: None,
    }
}

// ---------------------------------------------------------------- 5, 6, 7 shared data

const COHORT_SEED: u64 = 0;

/// The generator-default 29-dog cohort, written to disk and loaded back
/// through the manifest.
fn cohort() -> &'static Corpus {
    static CORPUS: OnceLock<Corpus> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let data = synthesize_dataset(&GeneratorSpec::default(), COHORT_SEED).unwrap();
        let path = data.write_to(dir.path()).unwrap();
        let manifest = DatasetManifest::load(&path).unwrap();
        assert_eq!(manifest.class_counts().values().copied().collect::<Vec<_>>(), vec![17, 6, 6]);
        Corpus::load(&manifest, PreprocessConfig::default()).unwrap()
    })
}

fn experiment(task: Task, placement: PlacementSelector, protocol: Protocol, epochs: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        task,
        placement,
        protocol,
        train: TrainConfig { epochs, restarts: 1, seed, ..TrainConfig::default() },
        ..ExperimentConfig::default()
    }
}

// ---------------------------------------------------------------- 5

const LEARN_CELL: (PlacementSelector, Protocol) = (PlacementSelector::Neck, Protocol::Trot);

fn c5_learnability() -> Check {
    let corpus = cohort();
    let mut scores = Vec::new();
    for seed in 0..3u64 {
        let cfg = experiment(Task::Multi, LEARN_CELL.0, LEARN_CELL.1, 60, seed);
        let out = run_random_split(corpus, &cfg).map_err(|e| e.to_string())?;
        scores.push(out.report.accuracy);
        let passing = scores.iter().filter(|&&a| a >= 0.90).count();
        if passing >= 2 || passing + (2 - seed as usize) < 2 {
            break;
        }
    }
    let passing = scores.iter().filter(|&&a| a >= 0.90).count();
    let listed: Vec<String> = scores.iter().map(|a| format!("{a:.4}")).collect();
    ensure(passing >= 2, || format!("accuracy by seed {listed:?}; {passing} of 3 reach 0.90"))?;
    Ok(format!(
        "multi/{}/{} 60 epochs, 1 restart: accuracy by seed [{}] ({passing} >= 0.90)",
        LEARN_CELL.0,
        LEARN_CELL.1,
        listed.join(", ")
    ))
}

// ---------------------------------------------------------------- 6

const LOO_CELL: (PlacementSelector, Protocol) = (PlacementSelector::Neck, Protocol::Walk);
const LOO_EPOCHS: usize = 3;

fn c6_generalization() -> Check {
    let corpus = cohort();
    let cfg = experiment(Task::Binary, LOO_CELL.0, LOO_CELL.1, LOO_EPOCHS, 0);
    let loo = run_loo(corpus, &cfg).map_err(|e| e.to_string())?;
    let done: Vec<_> = loo.folds.iter().filter(|f| f.status == FoldStatus::Completed).collect();
    // a constant predictor of the majority class scores 1 on majority-class
    // folds and 0 elsewhere
    let healthy = done.iter().filter(|f| f.class == gaitnet::data::ClinicalClass::Healthy).count();
    let majority = healthy.max(done.len() - healthy) as f64 / done.len() as f64;
    let random = run_random_split(corpus, &cfg).map_err(|e| e.to_string())?.report.accuracy;
    let margin = loo.accuracy - majority;
    let gap = random - loo.accuracy;
    let detail = format!(
        "binary/{}/{} {LOO_EPOCHS} epochs, 1 restart: LOO mean {:.4} over {} folds vs majority {:.4} (margin {:+.4}); random split {:.4} (gap {:+.4})",
        LOO_CELL.0,
        LOO_CELL.1,
        loo.accuracy,
        done.len(),
        majority,
        margin,
        random,
        gap
    );
    ensure(margin >= 0.15, || detail.clone())?;
    ensure(gap > 0.0, || detail.clone())?;
    Ok(detail)
}

// ---------------------------------------------------------------- 7

type Key = (DogId, Placement, Protocol, usize);

fn key(w: &LabeledWindow) -> Key {
    (w.provenance.dog_id.clone(), w.provenance.placement, w.provenance.protocol, w.provenance.start)
}

fn c7_protocol() -> Check {
    let corpus = cohort();
    let mut loo_windows = 0usize;
    let mut folds = 0usize;
    let mut splits = 0usize;
    for task in [Task::Multi, Task::Binary, Task::Diagnosis] {
        for placement in PlacementSelector::ALL.iter().copied() {
            for protocol in [Protocol::Walk, Protocol::Trot] {
                let cfg = experiment(task, placement, protocol, 1, 7);
                let cell = corpus.cell(&TaskSpec::new(task), placement, protocol);
                let plan = match plan_loo(&cell, &cfg) {
                    Ok(p) => p,
                    Err(Error::EmptyCell(_)) => continue,
                    Err(e) => return Err(e.to_string()),
                };
                for fold in &plan.folds {
                    folds += 1;
                    for &i in &fold.train {
                        loo_windows += 1;
                        ensure(cell.windows[i].provenance.dog_id != fold.dog_id, || {
                            format!("{task}/{placement}/{protocol}: held-out dog {} in training", fold.dog_id)
                        })?;
                    }
                    ensure(fold.test.iter().all(|&i| cell.windows[i].provenance.dog_id == fold.dog_id), || {
                        format!("{task}/{placement}/{protocol}: foreign window in test fold {}", fold.dog_id)
                    })?;
                    ensure(fold.train.len() + fold.test.len() == cell.windows.len(), || "fold not exhaustive".into())?;
                }

                let split = plan_random_split(&cell, &cfg).map_err(|e| e.to_string())?;
                splits += 1;
                let mut all: BTreeMap<Key, usize> = BTreeMap::new();
                for w in split.train.iter().chain(&split.validation).chain(&split.test) {
                    *all.entry(key(w)).or_default() += 1;
                }
                let mut expected: BTreeMap<Key, usize> = BTreeMap::new();
                for w in &cell.windows {
                    *expected.entry(key(w)).or_default() += 1;
                }
                ensure(all == expected, || format!("{task}/{placement}/{protocol}: random split not a partition"))?;
            }
        }
    }

    // one full fold materialisation, validation carve and augmentation included
    let cfg = ExperimentConfig { augment: Some(15.0), ..experiment(Task::Binary, LOO_CELL.0, LOO_CELL.1, 1, 7) };
    let cell = corpus.cell(&cfg.task_spec(), cfg.placement, cfg.protocol);
    let plan = plan_loo(&cell, &cfg).map_err(|e| e.to_string())?;
    for fold in &plan.folds {
        let s = plan.split(&cell, fold, &cfg).map_err(|e| e.to_string())?;
        ensure(s.train.iter().chain(&s.validation).all(|w| w.provenance.dog_id != fold.dog_id), || {
            format!("dog {} leaked into training or validation", fold.dog_id)
        })?;
    }
    Ok(format!(
        "{folds} LOO folds, {loo_windows} training windows checked, 0 shared dog ids; {splits} random splits disjoint and exhaustive"
    ))
}

// ---------------------------------------------------------------- 8

fn small_spec_toml() -> &'static str {
    "[dogs]\nhealthy = 4\northopedic = 2\nneurological = 2\n\n\
     [trot_dogs]\nhealthy = 2\northopedic = 1\nneurological = 1\n\n\
     [walk_secs]\nhealthy = 6.0\northopedic = 6.0\nneurological = 6.0\n\n\
     [trot_secs]\nhealthy = 4.0\northopedic = 4.0\nneurological = 4.0\n"
}

fn cli(args: &[&str]) -> std::result::Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_gaitnet"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("gaitnet {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn small_cohort(dir: &Path) -> std::result::Result<PathBuf, String> {
    let spec = dir.join("spec.toml");
    fs::write(&spec, small_spec_toml()).map_err(|e| e.to_string())?;
    let out = dir.join("cohort");
    let printed = cli(&["synth", "--spec", p(&spec), "--seed", "3", "--out", p(&out)])?;
    Ok(PathBuf::from(printed.trim()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn c8_augmentation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut values: Vec<f64> = (0..360).map(|_| rng.gen_range(-16.0..16.0)).collect();
        values.extend((0..360).map(|_| rng.gen_range(-2000.0..2000.0)));
        let w = LabeledWindow { values: FeatureMap::new(6, 120, values).unwrap(), label: 0, provenance: provenance("A", 0) };
        let r = augment_rotate_x(&w, 15.0);
        for t in 0..120 {
            for base in [0, 3] {
                let norm = |m: &FeatureMap| (0..3).map(|k| m.get(base + k, t).powi(2)).sum::<f64>().sqrt();
                worst = worst.max((norm(&w.values) - norm(&r.values)).abs());
            }
        }
    }
    ensure(worst <= 1e-9, || format!("norm drift {worst:e}"))?;

    let corpus = cohort();
    let base = experiment(Task::Binary, PlacementSelector::Tail, Protocol::Walk, 1, 5);
    let aug = ExperimentConfig { augment: Some(15.0), ..base.clone() };
    let cell = corpus.cell(&base.task_spec(), base.placement, base.protocol);
    let plain = plan_random_split(&cell, &base).map_err(|e| e.to_string())?;
    let rotated = plan_random_split(&cell, &aug).map_err(|e| e.to_string())?;
    ensure(plain.test == rotated.test && plain.validation == rotated.validation, || "augmentation changed evaluation windows".into())?;
    ensure(rotated.train.len() == 2 * plain.train.len(), || "augmented training set is not doubled".into())?;
    ensure(rotated.train[..plain.train.len()] == plain.train[..], || "original training windows changed".into())?;
    ensure(rotated.train[plain.train.len()..].iter().all(|w| w.provenance.augmented == Some(15.0)), || "copies unmarked".into())?;
    let lplan = plan_loo(&cell, &aug).map_err(|e| e.to_string())?;
    let fold = &lplan.folds[0];
    let (a, b) = (lplan.split(&cell, fold, &base).unwrap(), lplan.split(&cell, fold, &aug).unwrap());
    ensure(a.test == b.test && a.validation == b.validation, || "augmentation changed a LOO test fold".into())?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let manifest = small_cohort(dir.path())?;
    let mut reports = Vec::new();
    for placement in ["head", "tail", "neck", "all"] {
        let out = dir.path().join(format!("loo_{placement}"));
        cli(&[
            "loo", "--manifest", p(&manifest), "--task", "binary", "--placement", placement, "--protocol", "walk",
            "--augment", "15", "--two-head", "--epochs", "1", "--restarts", "1", "--seed", "1", "--out", p(&out),
        ])?;
        reports.push(out.join("report.json"));
    }
    let summary_dir = dir.path().join("summary");
    let mut args = vec!["report".to_string()];
    args.extend(reports.iter().map(|r| p(r).to_string()));
    args.extend(["--out".into(), p(&summary_dir).into()]);
    cli(&args.iter().map(String::as_str).collect::<Vec<_>>())?;
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(summary_dir.join("summary.json")).unwrap()).unwrap();
    let rows = summary["groups"][0]["rows"].as_array().cloned().unwrap_or_default();
    let placements: Vec<&str> = rows.iter().filter_map(|r| r["placement"].as_str()).collect();
    ensure(placements == ["head", "tail", "neck", "all"], || format!("summary rows {placements:?}"))?;
    ensure(
        rows.iter().all(|r| r["head_mode"] == "two_head" && r["augment"] == 15.0),
        || "summary rows lack two-head or augmentation".into(),
    )?;
    Ok(format!(
        "15 deg rotation max norm drift {worst:.1e}; evaluation windows unchanged, training doubled; two-head + augment LOO reported for head/tail/neck/all"
    ))
}

// ---------------------------------------------------------------- 9

/// Reference metrics computed by enumeration, independent of the library.
fn reference(truth: &[usize], pred: &[usize], k: usize) -> (Vec<Vec<u64>>, f64, f64) {
    let mut cm = vec![vec![0u64; k]; k];
    for i in 0..k {
        for j in 0..k {
            cm[i][j] = truth.iter().zip(pred).filter(|(&t, &p)| t == i && p == j).count() as u64;
        }
    }
    let correct = truth.iter().zip(pred).filter(|(t, p)| t == p).count();
    let accuracy = correct as f64 / truth.len() as f64;
    let mut f1s = Vec::new();
    for c in 0..k {
        let tp = truth.iter().zip(pred).filter(|(&t, &p)| t == c && p == c).count() as f64;
        let fp = truth.iter().zip(pred).filter(|(&t, &p)| t != c && p == c).count() as f64;
        let fn_ = truth.iter().zip(pred).filter(|(&t, &p)| t == c && p != c).count() as f64;
        if tp + fp + fn_ == 0.0 {
            continue;
        }
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        f1s.push(if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 });
    }
    let macro_f1 = if f1s.is_empty() { 0.0 } else { f1s.iter().sum::<f64>() / f1s.len() as f64 };
    (cm, accuracy, macro_f1)
}

fn c9_metrics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    let sets = 2000;
    for _ in 0..sets {
        let k = rng.gen_range(2..=3);
        let n = rng.gen_range(1..=200);
        let skew = rng.gen_range(0.0..1.0);
        let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
        let pred: Vec<usize> =
            truth.iter().map(|&t| if rng.gen_bool(skew) { t } else { rng.gen_range(0..k) }).collect();
        let cm = ConfusionMatrix::from_predictions(&truth, &pred, k).map_err(|e| e.to_string())?;
        let (ref_cm, ref_acc, ref_f1) = reference(&truth, &pred, k);
        ensure(cm.counts == ref_cm, || format!("confusion mismatch {:?} vs {ref_cm:?}", cm.counts))?;
        let (acc, f1) = (cm.accuracy(), cm.f1(F1Average::Macro));
        worst = worst.max((acc - ref_acc).abs()).max((f1 - ref_f1).abs());
        ensure(worst <= 1e-12, || format!("ratio mismatch: acc {acc} vs {ref_acc}, f1 {f1} vs {ref_f1}"))?;
    }
    let fixed = ConfusionMatrix { counts: vec![vec![5, 0], vec![5, 0]] };
    ensure((fixed.f1(F1Average::Macro) - 1.0 / 3.0).abs() < 1e-12, || "[[5,0],[5,0]] macro-F1 != 1/3".into())?;
    Ok(format!("{sets} random sets of size 1-200: counts exact, worst ratio error {worst:.1e}"))
}

// ---------------------------------------------------------------- 10

fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn c10_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let spec = d.join("spec.toml");
    fs::write(&spec, small_spec_toml()).unwrap();
    cli(&["synth", "--spec", p(&spec), "--seed", "3", "--out", p(&d.join("s1"))])?;
    cli(&["synth", "--spec", p(&spec), "--seed", "3", "--out", p(&d.join("s2"))])?;
    let (t1, t2) = (tree(&d.join("s1")), tree(&d.join("s2")));
    ensure(t1 == t2, || "synth trees differ".into())?;
    let manifest = d.join("s1/manifest.csv");

    let train = |out: &str| {
        cli(&[
            "train", "--manifest", p(&manifest), "--task", "multi", "--placement", "all", "--protocol", "walk",
            "--epochs", "2", "--restarts", "2", "--seed", "11", "--out", p(&d.join(out)),
        ])
    };
    train("t1")?;
    train("t2")?;
    cli(&["train", "--config", p(&d.join("t1/run.toml")), "--out", p(&d.join("t3"))])?;
    for f in ["report.json", "model.ckpt", "run.toml"] {
        let a = fs::read(d.join("t1").join(f)).unwrap();
        ensure(a == fs::read(d.join("t2").join(f)).unwrap(), || format!("train {f} differs on rerun"))?;
        if f != "run.toml" {
            ensure(a == fs::read(d.join("t3").join(f)).unwrap(), || format!("train {f} differs on replay"))?;
        }
    }

    let loo = |out: &str| {
        cli(&[
            "loo", "--manifest", p(&manifest), "--task", "diagnosis", "--placement", "neck", "--protocol", "walk",
            "--epochs", "1", "--restarts", "1", "--seed", "4", "--augment", "15", "--out", p(&d.join(out)),
        ])
    };
    loo("l1")?;
    loo("l2")?;
    ensure(tree(&d.join("l1")) == tree(&d.join("l2")), || "loo outputs differ on rerun".into())?;

    let reports = [d.join("t1/report.json"), d.join("l1/report.json")];
    for out in ["r1", "r2"] {
        cli(&["report", p(&reports[0]), p(&reports[1]), "--out", p(&d.join(out))])?;
    }
    ensure(tree(&d.join("r1")) == tree(&d.join("r2")), || "report outputs differ on rerun".into())?;
    Ok(format!(
        "synth ({} files), train (report, checkpoint, run manifest, replay), loo and report byte-identical on rerun",
        t1.len()
    ))
}

