//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness and exits non-zero if any criterion fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use herdsight::commands::{
    cmd_evaluate, cmd_gridsearch, cmd_prep, cmd_synth, exit_code, FuseCommand, GridSearchCommand, Outcome,
    PredictionInputs, PrepCommand, SynthCommand,
};
use herdsight::domain::LogitVector;
use herdsight::ensemble::{
    calibrate, calibrate_fused, enumerate_grid, fused_accuracy, grid_search_weights, temperature_scale, AlignedScores,
    GridSpec, TemperatureNll, WeightTriple,
};
use herdsight::image::{augment, canny_edge_density, psnr, AugmentSpec, ImageBuffer};
use herdsight::manifest::{verify_split_accounting, CountTable, DatasetManifest, Gps, SampleRecord, Source};
use herdsight::metrics::{compute_metrics, evaluate, roc_from_scores, ConfusionMatrix};
use herdsight::optim::{
    central_difference, cross_entropy, fit, AdamW, AdamWConfig, Objective, Optimizer, SgdMomentum,
    SgdMomentumConfig, TrainControl, FD_STEP,
};
use herdsight::rng::{Seed, SeededRng};
use herdsight::synth::{generate, SyntheticSpec};
use herdsight::{one_hot, softmax, ClassLabel, ModelName, ProbVector, Split};

/// Collects sub-check results for one criterion.
struct Checks {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Checks {
    fn new() -> Self {
        Checks {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn check(&mut self, name: &str, ok: bool, detail: impl Into<String>) {
        let detail = detail.into();
        if ok {
            self.notes.push(format!("{name}: {detail}"));
        } else {
            self.failures.push(format!("{name}: {detail}"));
        }
    }

    fn within(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.check(
            name,
            (got - want).abs() <= tol,
            format!("got {got:.6}, want {want} ± {tol}"),
        );
    }

    fn runtime(&mut self, started: Instant, limit: Duration) {
        let t = started.elapsed();
        self.check("runtime", t < limit, format!("{:.2?} (limit {limit:?})", t));
    }
}

fn tempdir() -> tempfile::TempDir {
    tempfile::tempdir().expect("temporary directory")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn inputs(dir: &Path, split: Split) -> PredictionInputs {
    PredictionInputs {
        manifest: dir.join("labels.json"),
        preds: ModelName::ALL
            .iter()
            .map(|m| (*m, dir.join(format!("{m}_{split}.jsonl"))))
            .collect(),
        split,
    }
}

fn metrics_json(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&read(&dir.join("metrics.json"))).expect("metrics.json")
}

fn evaluate_reference() -> (tempfile::TempDir, Duration) {
    let dir = tempdir();
    let started = Instant::now();
    let syn = dir.path().join("syn");
    let synth = cmd_synth(&SynthCommand {
        spec: None,
        replicate_reference: true,
        out: syn.clone(),
        seed: 42,
    });
    assert_eq!(synth.ok(), Some(Outcome::Success));
    let eval = cmd_evaluate(&FuseCommand {
        inputs: inputs(&syn, Split::Testing),
        fusion_config: None,
        out: dir.path().join("eval"),
    });
    assert_eq!(eval.ok(), Some(Outcome::Success));
    (dir, started.elapsed())
}

fn criterion_1() -> Checks {
    let mut c = Checks::new();
    let started = Instant::now();
    let (dir, _) = evaluate_reference();
    let m = metrics_json(&dir.path().join("eval"));
    let get = |k: &str| m[k].as_f64().unwrap_or(f64::NAN);
    c.within("accuracy", get("accuracy"), 2015.0 / 2052.0, 0.00001);
    c.within("cohens_kappa", get("cohens_kappa"), 0.978, 0.001);
    c.within("mcc", get("mcc"), 0.978, 0.0015);
    c.within("balanced_accuracy", get("balanced_accuracy"), 0.981, 0.0015);
    c.within("macro_specificity", get("macro_specificity"), 0.994, 0.001);
    c.within("g_mean", get("g_mean"), 0.987, 0.0015);
    c.runtime(started, Duration::from_secs(5));
    c
}

fn criterion_2() -> Checks {
    let mut c = Checks::new();
    let started = Instant::now();
    let (dir, _) = evaluate_reference();
    let csv = read(&dir.path().join("eval/per_class.csv"));
    const RECALL: [f64; 6] = [98.2, 97.7, 98.7, 98.2, 98.4, 98.0];
    const PRECISION: [f64; 6] = [98.7, 99.0, 97.4, 99.0, 96.9, 98.0];
    const SUPPORT: [u64; 6] = [388, 388, 388, 388, 250, 250];
    let rows: Vec<Vec<String>> = csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect();
    c.check("rows", rows.len() == 6, format!("{} class rows", rows.len()));
    for (i, row) in rows.iter().enumerate().take(6) {
        let class = ClassLabel::ALL[i].name();
        let num = |k: usize| row[k].parse::<f64>().unwrap_or(f64::NAN);
        c.check(&format!("{class} class order"), row[0] == class, row[0].clone());
        c.within(&format!("{class} recall %"), num(2) * 100.0, RECALL[i], 0.06);
        c.within(&format!("{class} precision %"), num(1) * 100.0, PRECISION[i], 0.15);
        c.check(&format!("{class} support"), row[5] == SUPPORT[i].to_string(), row[5].clone());
    }
    c.runtime(started, Duration::from_secs(5));
    c
}

/// (concordant + ½·tied) / (P·N)
fn pair_count(scored: &[(f64, bool)]) -> f64 {
    let (mut acc, mut p, mut n) = (0.0, 0usize, 0usize);
    for a in scored.iter().filter(|s| s.1) {
        p += 1;
        for b in scored.iter().filter(|s| !s.1) {
            acc += if a.0 > b.0 { 1.0 } else if a.0 == b.0 { 0.5 } else { 0.0 };
        }
    }
    for _ in scored.iter().filter(|s| !s.1) {
        n += 1;
    }
    acc / (p * n) as f64
}

fn random_dist(rng: &mut SeededRng) -> [f64; 6] {
    let raw = [0; 6].map(|_| rng.next_f64() + 1e-9);
    let s: f64 = raw.iter().sum();
    raw.map(|v| v / s)
}

fn criterion_3() -> Checks {
    let mut c = Checks::new();
    let perfect = generate(&SyntheticSpec::balanced(50, [1.0; 3]), Seed(42)).expect("synthetic data");
    let labels = perfect.manifest.labels(Split::Testing);
    let scores = AlignedScores::new(perfect.predictions_for(Split::Testing)).expect("aligned");
    let fused: BTreeMap<String, ProbVector> =
        scores.ids().iter().cloned().zip(scores.fuse([0.3, 0.3, 0.4]).expect("fuse")).collect();
    let auc = evaluate(&labels, &fused).expect("evaluate").report.macro_auc_roc.unwrap_or(f64::NAN);
    c.check("separated scores", auc == 1.0, format!("macro AUC {auc}"));

    let mut rng = Seed(42).rng();
    let mut labels = BTreeMap::new();
    let mut random = BTreeMap::new();
    for i in 0..6000 {
        let id = format!("r{i:05}");
        labels.insert(id.clone(), ClassLabel::ALL[i % 6]);
        random.insert(id, ProbVector::new(random_dist(&mut rng)).expect("distribution"));
    }
    let auc = evaluate(&labels, &random).expect("evaluate").report.macro_auc_roc.unwrap_or(f64::NAN);
    c.within("random scores macro AUC", auc, 0.5, 0.02);

    let mut worst: f64 = 0.0;
    let mut instances = 0;
    while instances < 500 {
        let n = 2 + rng.below(30) as usize;
        let scored: Vec<(f64, bool)> =
            (0..n).map(|_| (rng.below(10) as f64 / 10.0, rng.bernoulli(0.4))).collect();
        if !scored.iter().any(|s| s.1) || scored.iter().all(|s| s.1) {
            continue;
        }
        let roc = roc_from_scores(ClassLabel::FmdFoot, &scored).expect("roc");
        worst = worst.max((roc.auc - pair_count(&scored)).abs());
        instances += 1;
    }
    c.check("trapezoid = pair counting", worst < 1e-12, format!("max |Δ| {worst:e} over 500 instances"));
    c
}

fn brute_force_best(scores: &AlignedScores, targets: &[usize]) -> (WeightTriple, f64) {
    let mut best: Option<(WeightTriple, f64)> = None;
    for a in 0..=20u32 {
        for b in 0..=20u32 {
            for d in 0..=20u32 {
                if a + b + d != 20 || ![a, b, d].iter().all(|u| (2..=10).contains(u)) {
                    continue;
                }
                let t = WeightTriple::new([a, b, d], 20).expect("lattice point");
                let s = fused_accuracy(scores, targets, &t.weights());
                if best.is_none_or(|(_, bs)| s > bs) {
                    best = Some((t, s));
                }
            }
        }
    }
    best.expect("non-empty grid")
}

fn criterion_4() -> Checks {
    let mut c = Checks::new();
    let grid = enumerate_grid(GridSpec::default());
    c.check("size", grid.points.len() == 57, format!("{} triples", grid.points.len()));
    let exact = grid.points.iter().all(|p| p.units().iter().sum::<u32>() == p.denom());
    c.check("exact sums", exact, "Σ units = denominator for every triple");
    let published = WeightTriple::new([6, 6, 8], 20).expect("lattice point");
    c.check("(0.30, 0.30, 0.40) member", grid.points.contains(&published), published.to_string());

    let mut rng = Seed(4).rng();
    let peaked = |k: usize, conf: f64| {
        let mut v = [(1.0 - conf) / 5.0; 6];
        v[k] = conf;
        v
    };
    let mut instances = Vec::new();
    // InceptionV3 alone is right on 40% of the samples
    let mut probs: [Vec<[f64; 6]>; 3] = Default::default();
    let mut targets = Vec::new();
    for i in 0..200 {
        let y = i % 6;
        if i % 5 < 2 {
            let wrong = (y + 1) % 6;
            probs[0].push(peaked(wrong, 0.6));
            probs[1].push(peaked(wrong, 0.6));
            probs[2].push(peaked(y, 0.95));
        } else {
            for p in probs.iter_mut() {
                p.push(peaked(y, 0.9));
            }
        }
        targets.push(y);
    }
    instances.push((probs, targets));
    for _ in 0..30 {
        let n = 10 + rng.below(60) as usize;
        let probs = [0, 1, 2].map(|_| (0..n).map(|_| random_dist(&mut rng)).collect::<Vec<_>>());
        let targets = (0..n).map(|_| rng.below(6) as usize).collect();
        instances.push((probs, targets));
    }
    let mut agree = 0;
    for (k, (probs, targets)) in instances.into_iter().enumerate() {
        let ids: Vec<String> = (0..targets.len()).map(|i| format!("v{i:04}")).collect();
        let labels: BTreeMap<String, ClassLabel> =
            ids.iter().cloned().zip(targets.iter().map(|t| ClassLabel::ALL[*t])).collect();
        let scores = AlignedScores::from_probs(ids, probs).expect("aligned");
        let result = grid_search_weights(&scores, &labels, &grid).expect("grid search");
        if k == 0 {
            c.check(
                "favor-InceptionV3 winner",
                result.best.units()[2] == 10,
                format!("winner {}", result.best),
            );
        }
        if (result.best, result.best_score) == brute_force_best(&scores, &targets) {
            agree += 1;
        }
    }
    c.check("brute-force agreement", agree == 31, format!("{agree}/31 instances"));
    c
}

fn criterion_5() -> Checks {
    let mut c = Checks::new();
    let mut rng = Seed(5).rng();
    let argmax = |v: &[f64]| (1..v.len()).fold(0, |b, i| if v[i] > v[b] { i } else { b });
    let mut violations = 0;
    for _ in 0..10_000 {
        let z = [0; 6].map(|_| rng.uniform(-10.0, 10.0));
        let lz = LogitVector::new(z).expect("finite");
        for k in 1..=100 {
            let p = temperature_scale(&lz, k as f64 / 10.0).expect("positive T");
            if argmax(p.values()) != argmax(&z) {
                violations += 1;
            }
        }
    }
    c.check("argmax invariance", violations == 0, format!("{violations} violations in 10,000 × 100"));

    let mut fused = BTreeMap::new();
    for i in 0..2000 {
        let z = [0; 6].map(|_| rng.uniform(-8.0, 8.0));
        fused.insert(format!("f{i}"), softmax(&LogitVector::new(z).expect("finite")));
    }
    let same = calibrate_fused(&fused, 1.0).expect("calibrate");
    let worst = fused
        .iter()
        .flat_map(|(id, p)| p.values().iter().zip(same[id].values()).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    c.check("T = 1 identity", worst <= 1e-9, format!("max |Δ| {worst:e}"));
    let sharpened = fused
        .values()
        .all(|p| calibrate(p, 0.8).expect("calibrate").values().iter().cloned().fold(0.0, f64::max)
            > p.values().iter().cloned().fold(0.0, f64::max));
    c.check("T = 0.8 sharpens", sharpened, "max probability increased on 2,000 inputs");
    c
}

struct Square;

impl Objective for Square {
    fn dim(&self) -> usize {
        1
    }

    fn loss(&self, p: &[f64], _: Option<&[usize]>) -> f64 {
        p[0] * p[0]
    }

    fn gradient(&self, p: &[f64], _: Option<&[usize]>) -> Vec<f64> {
        vec![2.0 * p[0]]
    }
}

fn relative_gap(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1.0))
        .fold(0.0, f64::max)
}

fn criterion_6() -> Checks {
    let mut c = Checks::new();
    let mut adam = AdamW::new(AdamWConfig::default(), 1);
    let mut theta = [1.0];
    adam.step(&mut theta, &[2.0]).expect("step");
    c.within("AdamW single step", theta[0], 0.999899, 1e-6);
    let mut sgd = SgdMomentum::new(SgdMomentumConfig::default());
    let mut theta = [1.0];
    sgd.step(&mut theta, &[2.0]).expect("step");
    c.check("SGD momentum single step", theta[0] == 0.99, format!("{}", theta[0]));

    let mut opt = AdamW::new(
        AdamWConfig {
            lr: 0.1,
            ..AdamWConfig::default()
        },
        1,
    );
    let control = TrainControl::default();
    let r = fit(&Square, &[1.0], &mut opt, &control, |p| p[0] * p[0]).expect("fit");
    c.check(
        "θ² convergence",
        r.best_params[0].abs() < 1e-3 && r.history.len() <= 200,
        format!("|θ| = {:e} after {} epochs", r.best_params[0].abs(), r.history.len()),
    );

    // analytic gradients: θ², softmax cross-entropy, temperature NLL
    let mut rng = Seed(6).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let x = rng.uniform(-3.0, 3.0);
        worst = worst.max(relative_gap(&Square.gradient(&[x], None), &central_difference(|p| p[0] * p[0], &[x], FD_STEP)));
        let z = [0; 6].map(|_| rng.uniform(-4.0, 4.0));
        let y = ClassLabel::ALL[rng.below(6) as usize];
        let p = softmax(&LogitVector::new(z).expect("finite"));
        let analytic: Vec<f64> = p.values().iter().zip(one_hot(y).values()).map(|(p, t)| p - t).collect();
        let ce = |zz: &[f64]| cross_entropy(&one_hot(y), &softmax(&LogitVector::from_slice(zz).expect("finite")));
        worst = worst.max(relative_gap(&analytic, &central_difference(ce, &z, FD_STEP)));
    }
    let mut fused = BTreeMap::new();
    let mut labels = BTreeMap::new();
    for i in 0..60 {
        let z = [0; 6].map(|_| rng.uniform(-5.0, 5.0));
        fused.insert(format!("t{i}"), softmax(&LogitVector::new(z).expect("finite")));
        labels.insert(format!("t{i}"), ClassLabel::ALL[rng.below(6) as usize]);
    }
    let nll = TemperatureNll::new(&fused, &labels).expect("objective");
    for _ in 0..50 {
        let s = [rng.uniform(-1.0, 1.0)];
        worst = worst.max(relative_gap(&nll.gradient(&s, None), &central_difference(|p| nll.loss(p, None), &s, FD_STEP)));
    }
    c.check("gradient checks", worst <= 1e-5, format!("max relative gap {worst:e}"));

    // scripted traces: a 10-epoch plateau, then a strictly worsening run
    let control = TrainControl {
        max_epochs: 40,
        ..TrainControl::default()
    };
    let mut epoch = 0;
    let mut opt = SgdMomentum::new(
        SgdMomentumConfig {
            lr: 1.0,
            ..SgdMomentumConfig::default()
        });
    let plateau = fit(&Square, &[0.0], &mut opt, &control, |_| {
        epoch += 1;
        if epoch == 1 { 1.0 } else { 2.0 }
    })
    .expect("fit");
    let lrs: Vec<f64> = plateau.history.iter().map(|h| h.lr).collect();
    let first_drop = lrs.iter().position(|lr| *lr < 1.0);
    c.check(
        "LR reduction after 10 non-improving epochs",
        first_drop == Some(11) && (lrs[11] - 0.2).abs() < 1e-15,
        format!("first reduced LR at epoch {:?}", first_drop.map(|i| i + 1)),
    );
    let mut epoch = 0;
    let mut opt = SgdMomentum::new(SgdMomentumConfig::default());
    let rising = fit(&Square, &[0.0], &mut opt, &TrainControl::default(), |_| {
        epoch += 1;
        epoch as f64
    })
    .expect("fit");
    c.check(
        "early stop after 20 non-improving epochs",
        rising.stopped_early && rising.history.len() == 21 && rising.best_epoch == 1,
        format!("stopped at epoch {}, best epoch {}", rising.history.len(), rising.best_epoch),
    );
    c
}

/// All ten metrics computed directly from the sample list.
fn oracle_metrics(samples: &[(usize, usize, [f64; 6])]) -> [f64; 10] {
    let n = samples.len() as f64;
    let acc = samples.iter().filter(|s| s.0 == s.1).count() as f64 / n;
    let (mut prec, mut rec, mut f1, mut spec, mut pe, mut auc) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut cov, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for k in 0..6 {
        let tp = samples.iter().filter(|s| s.0 == k && s.1 == k).count() as f64;
        let pred = samples.iter().filter(|s| s.1 == k).count() as f64;
        let act = samples.iter().filter(|s| s.0 == k).count() as f64;
        let tn = samples.iter().filter(|s| s.0 != k && s.1 != k).count() as f64;
        let p = if pred > 0.0 { tp / pred } else { 0.0 };
        let r = tp / act;
        prec += p;
        rec += r;
        f1 += if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        spec += tn / (n - act);
        pe += pred * act / (n * n);
        let scored: Vec<(f64, bool)> = samples.iter().map(|s| (s.2[k], s.0 == k)).collect();
        auc += pair_count(&scored);
        for s in samples {
            let x = (s.0 == k) as u8 as f64 - act / n;
            let y = (s.1 == k) as u8 as f64 - pred / n;
            cov += x * y;
            vx += x * x;
            vy += y * y;
        }
    }
    let kappa = if pe < 1.0 { (acc - pe) / (1.0 - pe) } else { 1.0 };
    let mcc = if vx * vy > 0.0 { cov / (vx * vy).sqrt() } else { 0.0 };
    let (rec, spec) = (rec / 6.0, spec / 6.0);
    [acc, prec / 6.0, rec, f1 / 6.0, auc / 6.0, kappa, rec, mcc, spec, (rec * spec).sqrt()]
}

fn criterion_7() -> Checks {
    let mut c = Checks::new();
    let mut rng = Seed(7).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..600 {
        let n = 12 + rng.below(39) as usize;
        let skill = rng.next_f64();
        let samples: Vec<(usize, usize, [f64; 6])> = (0..n)
            .map(|i| {
                // every class appears at least once so ROC is defined
                let y = if i < 6 { i } else { rng.below(6) as usize };
                let mut p = random_dist(&mut rng);
                if rng.next_f64() < skill {
                    p[y] += 1.0;
                    let s: f64 = p.iter().sum();
                    p = p.map(|v| v / s);
                }
                let pred = (1..6).fold(0, |b, k| if p[k] > p[b] { k } else { b });
                (y, pred, p)
            })
            .collect();
        let labels: BTreeMap<String, ClassLabel> =
            samples.iter().enumerate().map(|(i, s)| (format!("m{i:03}"), ClassLabel::ALL[s.0])).collect();
        let scores: BTreeMap<String, ProbVector> = samples
            .iter()
            .enumerate()
            .map(|(i, s)| (format!("m{i:03}"), ProbVector::new(s.2).expect("distribution")))
            .collect();
        let r = evaluate(&labels, &scores).expect("evaluate").report;
        let got = [
            r.accuracy,
            r.macro_precision,
            r.macro_recall,
            r.macro_f1,
            r.macro_auc_roc.unwrap_or(f64::NAN),
            r.cohens_kappa,
            r.balanced_accuracy,
            r.mcc,
            r.macro_specificity,
            r.g_mean,
        ];
        for (g, w) in got.iter().zip(oracle_metrics(&samples)) {
            worst = worst.max((g - w).abs());
        }
        if worst.is_nan() {
            break;
        }
    }
    c.check("oracle equivalence", worst <= 1e-9, format!("max |Δ| {worst:e} over 600 instances"));
    let perfect = compute_metrics(&ConfusionMatrix::from_counts(std::array::from_fn(|i| {
        std::array::from_fn(|j| if i == j { 3 } else { 0 })
    })))
    .expect("metrics");
    c.check("perfect classifier", perfect.mcc == 1.0 && perfect.cohens_kappa == 1.0, "κ = MCC = 1");
    c
}

fn placeholder(id: String, class: ClassLabel, split: Split, synthetic: bool, path: String, digest: String) -> SampleRecord {
    SampleRecord {
        id,
        path,
        class,
        split,
        synthetic,
        sha256: digest,
        source: Source {
            farm_id: "farm-01".into(),
            gps: Gps { lat: 18.5, lon: 73.8 },
            timestamp: "2024-03-01T10:15:00Z".into(),
            breed: "Holstein".into(),
            age_months: 30,
            vet_confirmed: true,
        },
    }
}

fn table1_manifest() -> DatasetManifest {
    let mut records = Vec::new();
    for (class, split, synthetic, n) in CountTable::table1().cells() {
        for i in 0..n {
            let id = format!("{class}-{split}-{}-{i:05}", if synthetic { "syn" } else { "real" });
            let digest = herdsight::io::sha256_hex(id.as_bytes());
            records.push(placeholder(id.clone(), class, split, synthetic, format!("img/{id}.png"), digest));
        }
    }
    DatasetManifest::new(records).expect("manifest")
}

fn tree_digest(dir: &Path) -> BTreeMap<PathBuf, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable directory") {
            let p = entry.expect("entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let digest = herdsight::io::sha256_file(&p).expect("readable file");
                out.insert(p.strip_prefix(dir).expect("inside").to_path_buf(), digest);
            }
        }
    }
    out
}

fn criterion_8() -> Checks {
    let mut c = Checks::new();
    let dir = tempdir();
    let mut records = Vec::new();
    for (i, class) in [ClassLabel::FmdFoot, ClassLabel::HealthyMouth, ClassLabel::LsdSkin].iter().enumerate() {
        let img = ImageBuffer::from_fn(64, 48, |x, y| [(x * 4) as u8, (y * 5 + i as u32 * 40) as u8, ((x ^ y) * 3) as u8]);
        let png = img.encode_png().expect("png");
        let path = format!("raw/img{i}.png");
        herdsight::io::write_atomic(&dir.path().join(&path), &png).expect("write");
        records.push(placeholder(format!("img{i}"), *class, Split::Training, false, path, herdsight::io::sha256_hex(&png)));
    }
    let manifest_path = dir.path().join("manifest.json");
    DatasetManifest::new(records).expect("manifest").save(&manifest_path).expect("save");
    let prep = |out: &str| {
        cmd_prep(&PrepCommand {
            manifest: manifest_path.clone(),
            augment: None,
            out: dir.path().join(out),
            seed: 42,
            size: 32,
            strict: true,
            check_table1: false,
        })
    };
    let (a, b) = (prep("a"), prep("b"));
    c.check("prep succeeds", exit_code(&a) == 0 && exit_code(&b) == 0, format!("{a:?} / {b:?}"));
    let (ta, tb) = (tree_digest(&dir.path().join("a")), tree_digest(&dir.path().join("b")));
    c.check(
        "byte-identical reruns",
        !ta.is_empty() && ta == tb,
        format!("{} files compared", ta.len()),
    );

    let img = ImageBuffer::from_fn(31, 17, |x, y| [(x * 7) as u8, (y * 13) as u8, (x * y) as u8]);
    let same = (0..50).all(|s| augment(&img, &AugmentSpec::identity(), Seed(s)).expect("augment") == img);
    c.check("identity augmentation", same, "pixel-exact over 50 seeds");
    let black = ImageBuffer::filled(16, 16, [0; 3]);
    let white = ImageBuffer::filled(16, 16, [255; 3]);
    let db = psnr(&black, &white).expect("psnr");
    c.check("psnr(all-0, all-255)", db == 0.0, format!("{db} dB"));
    let density = canny_edge_density(&ImageBuffer::filled(40, 40, [120; 3])).expect("canny");
    c.check("constant image edges", density == 0.0, format!("density {density}"));

    let table1 = table1_manifest();
    let ok = verify_split_accounting(&table1, &CountTable::table1());
    c.check("Table 1 manifest passes", ok.passed, format!("{} records", table1.len()));
    let mut perturbed = table1.into_samples();
    let moved = perturbed
        .iter_mut()
        .find(|r| r.class == ClassLabel::HealthySkin && r.split == Split::Testing)
        .expect("testing record");
    moved.split = Split::Validation;
    let perturbed = DatasetManifest::new(perturbed).expect("manifest");
    let bad = verify_split_accounting(&perturbed, &CountTable::table1());
    let diffs: Vec<(ClassLabel, Split, usize, usize, i64)> =
        bad.mismatches.iter().map(|d| (d.class, d.split, d.expected, d.actual, d.diff)).collect();
    c.check(
        "perturbed manifest diff",
        !bad.passed
            && diffs
                == [
                    (ClassLabel::HealthySkin, Split::Testing, 250, 249, -1),
                    (ClassLabel::HealthySkin, Split::Validation, 32, 33, 1),
                ],
        format!("{diffs:?}"),
    );
    let perturbed_path = dir.path().join("perturbed.json");
    perturbed.save(&perturbed_path).expect("save");
    let checked = cmd_prep(&PrepCommand {
        manifest: perturbed_path,
        augment: None,
        out: dir.path().join("checked"),
        seed: 42,
        size: 32,
        strict: false,
        check_table1: true,
    });
    c.check("--check-table1 exit code", exit_code(&checked) == 2, format!("{}", exit_code(&checked)));
    c
}

fn criterion_9() -> Checks {
    let mut c = Checks::new();
    let dir = tempdir();
    let started = Instant::now();
    let syn = dir.path().join("syn");
    let steps = [
        cmd_synth(&SynthCommand {
            spec: None,
            replicate_reference: false,
            out: syn.clone(),
            seed: 42,
        }),
        cmd_gridsearch(&GridSearchCommand {
            inputs: inputs(&syn, Split::Validation),
            grid: GridSpec::default(),
            fusion_config: None,
            out: dir.path().join("grid"),
        }),
        cmd_evaluate(&FuseCommand {
            inputs: inputs(&syn, Split::Testing),
            fusion_config: Some(dir.path().join("grid/fusion-config.json")),
            out: dir.path().join("eval"),
        }),
    ];
    c.check("pipeline exit codes", steps.iter().all(|s| exit_code(s) == 0), format!("{steps:?}"));
    c.runtime(started, Duration::from_secs(60));
    let members = read(&dir.path().join("eval/members.csv"));
    let acc: BTreeMap<&str, f64> = members
        .lines()
        .skip(1)
        .filter_map(|l| l.split_once(','))
        .map(|(k, v)| (k, v.parse().unwrap_or(f64::NAN)))
        .collect();
    let best = ModelName::ALL.iter().map(|m| acc[m.name()]).fold(0.0, f64::max);
    let n = inputs(&syn, Split::Testing);
    let testing = herdsight::manifest::load_manifest(&n.manifest).expect("labels").labels(Split::Testing).len();
    c.check("testing samples", testing == 6000, format!("{testing}"));
    c.check(
        "ensemble ≥ best member − 0.5pp",
        acc["ensemble"] >= best - 0.005,
        format!("ensemble {:.4}, best member {best:.4}", acc["ensemble"]),
    );
    c
}

type Criterion = (&'static str, fn() -> Checks);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 aggregate metrics reconstruction", criterion_1),
        ("2 per-class metrics reconstruction", criterion_2),
        ("3 AUC substitute properties", criterion_3),
        ("4 weight grid search", criterion_4),
        ("5 temperature calibration", criterion_5),
        ("6 optimizers and fit control", criterion_6),
        ("7 metrics oracle equivalence", criterion_7),
        ("8 preprocessing determinism", criterion_8),
        ("9 end-to-end pipeline", criterion_9),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let checks = run();
        if checks.failures.is_empty() {
            println!("PASS criterion {name}");
        } else {
            failed += 1;
            println!("FAIL criterion {name}: {}", checks.failures.join("; "));
        }
        for note in &checks.notes {
            println!("       ok  {note}");
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
