//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers (run with `--nocapture` to see
//! them all).

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use bitrank::code::{BinaryCode, CodeDatabase};
use bitrank::eval::{average_precision, evaluate, sample_queries};
use bitrank::hashing::{encode_database, train_itq, train_lsh};
use bitrank::learner::{
    egd_step, gradient, objective, online_gradient, online_objective, pgd_step, train_offline,
    train_online, BitWeights, LearnerConfig,
};
use bitrank::ranking::{rerank_weighted, scan_hamming, search};
use bitrank::sampler::{sample_quadruplets, sample_triplets, AcdvTriplet, TripletBatch};
use bitrank::synth::GaussianMixture;

fn random_code(rng: &mut ChaCha12Rng, bits: usize) -> BinaryCode {
    let bits: Vec<bool> = (0..bits).map(|_| rng.random()).collect();
    BinaryCode::from_bits(&bits).unwrap()
}

fn random_db(rng: &mut ChaCha12Rng, n: usize, bits: usize, classes: u32) -> CodeDatabase {
    let codes = (0..n).map(|_| random_code(rng, bits)).collect();
    let labels = (0..n).map(|_| rng.random_range(0..classes)).collect();
    CodeDatabase::new(codes, labels).unwrap()
}

#[test]
fn criterion_1_unit_weight_reduction() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(101);
    let db = random_db(&mut rng, 1000, 64, 10);
    let queries: Vec<(BinaryCode, u32)> =
        (0..50).map(|i| (db.code(i).clone(), db.label(i))).collect();
    let ones = BitWeights::ones(64);

    for (query, _) in &queries {
        let baseline = scan_hamming(query, &db, None, None).unwrap();
        let weighted = search(query, &db, &ones, 64, db.len()).unwrap();
        assert_eq!(
            baseline.entries(),
            weighted.entries(),
            "unit-weight search ordering must equal the Hamming ordering"
        );
        let reranked = rerank_weighted(query, &baseline, &db, &ones).unwrap();
        assert_eq!(baseline.entries(), reranked.entries());
    }

    let plain_report = evaluate(&queries, &db, None).unwrap();
    let unit_report = evaluate(&queries, &db, Some(&ones)).unwrap();
    assert_eq!(plain_report, unit_report, "EvalReports must be identical");

    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(1), "took {elapsed:?}, budget 1s");
    println!(
        "criterion 1 (unit-weight reduction): PASS — 50 queries x 1000 codes identical, {elapsed:?}"
    );
}

fn random_batch(rng: &mut ChaCha12Rng, bits: usize, len: usize) -> TripletBatch {
    let zero = BinaryCode::from_bits(&vec![false; bits]).unwrap();
    let acdv = |rng: &mut ChaCha12Rng| {
        bitrank::code::acdv(&random_code(rng, bits), &zero).unwrap()
    };
    let triplets: Vec<AcdvTriplet> = (0..len)
        .map(|_| AcdvTriplet::new(acdv(rng), acdv(rng), acdv(rng)).unwrap())
        .collect();
    let sources = (0..len as u64).map(|i| [i, 0, 0, 0]).collect();
    TripletBatch::new(bits, triplets, 0, sources).unwrap()
}

fn random_weights(rng: &mut ChaCha12Rng, bits: usize) -> BitWeights {
    BitWeights::new((0..bits).map(|_| rng.random_range(0.1..2.0)).collect()).unwrap()
}

#[test]
fn criterion_2_gradient_correctness() {
    let start = Instant::now();
    let step = 1e-6;
    let mut rng = ChaCha12Rng::seed_from_u64(202);
    let mut worst: f64 = 0.0;

    for instance in 0..20 {
        let bits = rng.random_range(2..=64);
        let len = rng.random_range(1..=50);
        let batch = random_batch(&mut rng, bits, len);
        let w = random_weights(&mut rng, bits);
        let w_t = random_weights(&mut rng, bits);
        let cfg = LearnerConfig {
            c_xi: rng.random_range(0.2..2.0),
            c_gamma: rng.random_range(0.0..0.5),
            ..Default::default()
        };

        let offline_grad = gradient(&w, &batch, &cfg).unwrap();
        let online_grad = online_gradient(&w, &w_t, &batch, &cfg).unwrap();
        for (k, (&analytic_offline, &analytic_online)) in
            offline_grad.iter().zip(&online_grad).enumerate()
        {
            let perturbed = |delta: f64| {
                let mut values = w.as_slice().to_vec();
                values[k] += delta;
                BitWeights::new(values).unwrap()
            };
            let (plus, minus) = (perturbed(step), perturbed(-step));

            let fd_offline = (objective(&plus, &batch, &cfg).unwrap()
                - objective(&minus, &batch, &cfg).unwrap())
                / (2.0 * step);
            let rel = (analytic_offline - fd_offline).abs()
                / analytic_offline.abs().max(fd_offline.abs()).max(1e-8);
            worst = worst.max(rel);

            let fd_online = (online_objective(&plus, &w_t, &batch, &cfg).unwrap()
                - online_objective(&minus, &w_t, &batch, &cfg).unwrap())
                / (2.0 * step);
            let rel = (analytic_online - fd_online).abs()
                / analytic_online.abs().max(fd_online.abs()).max(1e-8);
            worst = worst.max(rel);
        }
        assert!(worst < 1e-5, "instance {instance}: relative error {worst}");
    }

    let elapsed = start.elapsed();
    assert!(worst < 1e-5, "worst relative gradient error {worst}");
    assert!(elapsed < Duration::from_secs(5), "took {elapsed:?}, budget 5s");
    println!(
        "criterion 2 (gradient correctness): PASS — worst relative error {worst:.2e} over 20 instances, {elapsed:?}"
    );
}

#[test]
fn criterion_3_non_negativity() {
    let mut rng = ChaCha12Rng::seed_from_u64(303);
    let bits = 32;

    let mut w = BitWeights::ones(bits);
    for step in 0..10_000 {
        let grad: Vec<f64> = (0..bits).map(|_| rng.random_range(-200.0..200.0)).collect();
        let eta = rng.random_range(1e-5..1e-1);
        w = egd_step(&w, &grad, eta).unwrap();
        assert!(
            w.is_strictly_positive(),
            "EGD weights left the positive orthant at step {step}"
        );
    }

    let mut w = random_weights(&mut rng, bits);
    for step in 0..10_000 {
        let grad: Vec<f64> = (0..bits).map(|_| rng.random_range(-200.0..200.0)).collect();
        let eta = rng.random_range(1e-4..1e-1);
        let next = pgd_step(&w, &grad, eta).unwrap();
        for (k, &g) in grad.iter().enumerate() {
            let proposed = w.as_slice()[k] - eta * g;
            if proposed < 0.0 {
                assert_eq!(
                    next.as_slice()[k],
                    w.as_slice()[k],
                    "skipped PGD component changed at step {step}"
                );
            } else {
                assert_eq!(next.as_slice()[k], proposed);
            }
            assert!(next.as_slice()[k] >= 0.0);
        }
        w = next;
    }

    println!(
        "criterion 3 (non-negativity): PASS — 10,000 EGD steps strictly positive, 10,000 PGD steps non-negative with exact skips"
    );
}

/// Definition-level interpolated AP: for each recall step, scan every PR
/// point for the maximum precision at or beyond it.
fn oracle_ap(rel: &[bool], total_relevant: usize) -> f64 {
    let mut hits = 0usize;
    let mut points = Vec::with_capacity(rel.len());
    for (i, &r) in rel.iter().enumerate() {
        if r {
            hits += 1;
        }
        points.push((
            hits as f64 / total_relevant as f64,
            hits as f64 / (i + 1) as f64,
        ));
    }
    let mut total = 0.0;
    for j in 1..=total_relevant {
        let level = j as f64 / total_relevant as f64;
        let best = points
            .iter()
            .filter(|(r, _)| *r >= level)
            .map(|&(_, p)| p)
            .fold(0.0, f64::max);
        total += best;
    }
    total / total_relevant as f64
}

#[test]
fn criterion_4_ap_oracle_equivalence() {
    let len = 12;
    let mut checked = 0usize;
    for mask in 0u32..(1 << len) {
        let rel: Vec<bool> = (0..len).map(|k| mask >> k & 1 == 1).collect();
        let hits = rel.iter().filter(|&&r| r).count();
        for total_relevant in hits.max(1)..=len {
            let got = average_precision(&rel, total_relevant).unwrap();
            let want = oracle_ap(&rel, total_relevant);
            assert!(
                (got - want).abs() <= 1e-12,
                "mask {mask:#014b} total {total_relevant}: {got} vs {want}"
            );
            checked += 1;
        }
    }
    println!(
        "criterion 4 (AP oracle equivalence): PASS — {checked} (vector, total_relevant) pairs exact to 1e-12"
    );
}

#[test]
fn criterion_5_sampler_law() {
    // class ratios 0.5 / 0.3 / 0.2 over 1000 codes
    let mut rng = ChaCha12Rng::seed_from_u64(505);
    let mut codes = Vec::new();
    let mut labels = Vec::new();
    for (class, size) in [(0u32, 500usize), (1, 300), (2, 200)] {
        for _ in 0..size {
            codes.push(random_code(&mut rng, 16));
            labels.push(class);
        }
    }
    let db = CodeDatabase::new(codes, labels).unwrap();

    let quads = sample_quadruplets(&db, 10_000, 1234).unwrap();
    assert_eq!(quads.len(), 10_000);

    let mut counts = [0usize; 3];
    for quad in &quads {
        let query_label = db.label(quad.query);
        counts[query_label as usize] += 1;
        assert_ne!(query_label, db.label(quad.dissimilar));
        assert_eq!(query_label, db.label(quad.similar[0]));
        assert_eq!(query_label, db.label(quad.similar[1]));
        assert_ne!(quad.query, quad.similar[0]);
        assert_ne!(quad.query, quad.similar[1]);
        assert_ne!(quad.similar[0], quad.similar[1]);
    }

    let expected = [5000.0, 3000.0, 2000.0];
    let chi2: f64 = counts
        .iter()
        .zip(&expected)
        .map(|(&obs, &exp)| (obs as f64 - exp).powi(2) / exp)
        .sum();
    // upper 1% point of chi-square with 2 degrees of freedom
    const CHI2_CRIT_DF2_P01: f64 = 9.21034037197618;
    assert!(
        chi2 < CHI2_CRIT_DF2_P01,
        "chi-square statistic {chi2} rejects the multinomial law at alpha = 0.01"
    );
    println!(
        "criterion 5 (sampler law): PASS — chi-square {chi2:.3} < {CHI2_CRIT_DF2_P01}, constraints held on all 10,000 quadruplets"
    );
}

/// The desk-scale retrieval setup shared by criteria 6 and 7: 10 Gaussian
/// classes in 64 dimensions (class structure in 60 of them, strong
/// class-independent noise in the rest), 3,000 train / 1,000 test,
/// 32-bit LSH codes, 2,000 training triplets.
fn desk_scale_run(seed: u64) -> (f64, f64, f64) {
    let mixture = GaussianMixture {
        classes: 10,
        per_class: 400,
        dim: 64,
        signal_dims: 60,
        center_spread: 1.0,
        noise: 0.25,
        nuisance_noise: 4.0,
    };
    let features = mixture.sample(seed * 100 + 1);
    let (train, test) = mixture.split_train_test(&features, 300);

    let model = train_lsh(&train, 32, seed * 100 + 2).unwrap();
    let train_db = encode_database(&model, &train).unwrap();
    let test_db = encode_database(&model, &test).unwrap();

    let batch = sample_triplets(&train_db, 2000, seed * 100 + 3).unwrap();
    let cfg = LearnerConfig::default();
    let (offline_w, _) = train_offline(&batch, &cfg, None).unwrap();
    let (online_w, _) = train_online(batch.chunked(10), &cfg, None).unwrap();

    let queries = sample_queries(&test_db, 0.1, seed * 100 + 4).unwrap();
    let plain = evaluate(&queries, &test_db, None).unwrap().map;
    let weighted = evaluate(&queries, &test_db, Some(&offline_w)).unwrap().map;
    let online = evaluate(&queries, &test_db, Some(&online_w)).unwrap().map;
    (plain, weighted, online)
}

#[test]
fn criterion_6_desk_scale_improvement() {
    let start = Instant::now();
    let mut wins = 0usize;
    let mut improvements = Vec::new();
    for seed in 0..5 {
        let (plain, weighted, _) = desk_scale_run(seed);
        let diff = weighted - plain;
        if diff > 0.0 {
            wins += 1;
        }
        improvements.push(diff);
        println!(
            "  seed {seed}: unweighted MAP {plain:.4}, weighted MAP {weighted:.4} ({diff:+.4})"
        );
    }
    let mean = improvements.iter().sum::<f64>() / improvements.len() as f64;
    let elapsed = start.elapsed();
    assert!(wins >= 4, "weighted MAP won in only {wins} of 5 seeds");
    assert!(
        mean >= 0.03,
        "mean absolute MAP improvement {mean:.4} below 0.03"
    );
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}, budget 60s");
    println!(
        "criterion 6 (desk-scale improvement): PASS — {wins}/5 seeds improved, mean improvement {mean:.4}, {elapsed:?}"
    );
}

#[test]
fn criterion_7_online_matches_offline() {
    let start = Instant::now();
    let mut worst_gap: f64 = 0.0;
    for seed in 0..5 {
        let (_, weighted, online) = desk_scale_run(seed);
        let gap = (online - weighted).abs() / weighted;
        worst_gap = worst_gap.max(gap);
        println!(
            "  seed {seed}: offline MAP {weighted:.4}, online MAP {online:.4} (relative gap {:.2}%)",
            100.0 * gap
        );
        assert!(
            gap <= 0.10,
            "seed {seed}: online MAP {online:.4} differs from offline {weighted:.4} by {:.1}%",
            100.0 * gap
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed < Duration::from_secs(60), "took {elapsed:?}, budget 60s");
    println!(
        "criterion 7 (online matches offline): PASS — worst relative gap {:.2}% <= 10%, {elapsed:?}",
        100.0 * worst_gap
    );
}

fn mnist_dir() -> Option<PathBuf> {
    let candidates = [
        std::env::var_os("BITRANK_MNIST_DIR").map(PathBuf::from),
        Some(PathBuf::from("data/mnist")),
        Some(
            Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("../..")
                .join("data/mnist"),
        ),
    ];
    let files = [
        "train-images-idx3-ubyte",
        "train-labels-idx1-ubyte",
        "t10k-images-idx3-ubyte",
        "t10k-labels-idx1-ubyte",
    ];
    candidates
        .into_iter()
        .flatten()
        .find(|dir| files.iter().all(|f| dir.join(f).is_file()))
}

#[test]
fn criterion_8_optional_mnist_itq() {
    let Some(dir) = mnist_dir() else {
        println!(
            "criterion 8 (MNIST ITQ): SKIPPED — no MNIST files found (set BITRANK_MNIST_DIR or place the four IDX files in data/mnist/)"
        );
        return;
    };
    let start = Instant::now();

    let train = bitrank::io::load_idx(
        dir.join("train-images-idx3-ubyte"),
        dir.join("train-labels-idx1-ubyte"),
    )
    .unwrap();
    let test = bitrank::io::load_idx(
        dir.join("t10k-images-idx3-ubyte"),
        dir.join("t10k-labels-idx1-ubyte"),
    )
    .unwrap();

    let (model, _) = train_itq(&train, 32, 50, 8).unwrap();
    let train_db = encode_database(&model, &train).unwrap();
    let test_db = encode_database(&model, &test).unwrap();

    let batch = sample_triplets(&train_db, 5000, 9).unwrap();
    let (weights, _) = train_offline(&batch, &LearnerConfig::default(), None).unwrap();

    let queries = sample_queries(&test_db, 0.1, 10).unwrap();
    let plain = evaluate(&queries, &test_db, None).unwrap().map;
    let weighted = evaluate(&queries, &test_db, Some(&weights)).unwrap().map;

    let elapsed = start.elapsed();
    let relative = (weighted - plain) / plain;
    assert!(
        relative >= 0.20,
        "weighted MAP {weighted:.4} vs unweighted {plain:.4}: relative gain {:.1}% below 20%",
        100.0 * relative
    );
    assert!(
        elapsed < Duration::from_secs(15 * 60),
        "took {elapsed:?}, budget 15min"
    );
    println!(
        "criterion 8 (MNIST ITQ): PASS — unweighted MAP {plain:.4}, weighted MAP {weighted:.4} ({:+.1}%), {elapsed:?}",
        100.0 * relative
    );
}

struct Cli {
    bin: &'static str,
    dir: PathBuf,
}

impl Cli {
    fn run(&self, args: &[&str]) {
        let output = Command::new(self.bin)
            .args(args)
            .current_dir(&self.dir)
            .output()
            .expect("failed to launch the bitrank binary");
        assert!(
            output.status.success(),
            "bitrank {args:?} failed:\n{}",
            String::from_utf8_lossy(&output.stderr)
        );
    }

    fn read(&self, name: &str) -> Vec<u8> {
        std::fs::read(self.dir.join(name)).unwrap_or_else(|e| panic!("reading {name}: {e}"))
    }
}

#[test]
fn criterion_9_pipeline_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let cli = Cli {
        bin: env!("CARGO_BIN_EXE_bitrank"),
        dir: tmp.path().to_path_buf(),
    };

    // deterministic CSV input
    let features = GaussianMixture::isotropic(4, 40, 12, 1.5, 0.5).sample(77);
    let mut csv = String::new();
    csv.push_str(&(0..12).map(|d| format!("f{d}")).collect::<Vec<_>>().join(","));
    csv.push_str(",class\n");
    for (r, &label) in features.labels().unwrap().iter().enumerate() {
        for c in 0..12 {
            csv.push_str(&format!("{},", features.data()[(r, c)]));
        }
        csv.push_str(&format!("{label}\n"));
    }
    std::fs::write(tmp.path().join("feats.csv"), csv).unwrap();

    let stages: Vec<Vec<String>> = vec![
        "hash-train --features feats.csv --label-column class --method lsh --bits 16 --seed 5 --out lsh_RUN.bmdl",
        "hash-train --features feats.csv --label-column class --method itq --bits 8 --iters 30 --seed 5 --out itq_RUN.bmdl",
        "encode --model lsh_RUN.bmdl --features feats.csv --label-column class --out db_RUN.bcod",
        "sample --codes db_RUN.bcod --count 300 --seed 6 --out trip_RUN.btrp",
        "train --triplets trip_RUN.btrp --optimizer egd --seed 7 --out egd_RUN.bwgt --text-out egd_RUN.txt",
        "train --triplets trip_RUN.btrp --optimizer pgd --seed 7 --out pgd_RUN.bwgt",
        "train-online --triplets trip_RUN.btrp --seed 7 --out online_RUN.bwgt",
        "search --codes db_RUN.bcod --queries db_RUN.bcod --weights egd_RUN.bwgt --limit 5 --out search_RUN.csv",
        "eval --codes db_RUN.bcod --queries db_RUN.bcod --weights egd_RUN.bwgt --code-type lsh --out eval_RUN.csv --pr-out pr_RUN.csv",
        "pipeline --features feats.csv --label-column class --hash lsh --bits 16 --triplet-count 200 --seed 9 --out-dir pipe_RUN",
    ]
    .into_iter()
    .map(|s| s.split(' ').map(str::to_owned).collect())
    .collect();

    let outputs = [
        "lsh_RUN.bmdl",
        "itq_RUN.bmdl",
        "db_RUN.bcod",
        "trip_RUN.btrp",
        "egd_RUN.bwgt",
        "egd_RUN.txt",
        "pgd_RUN.bwgt",
        "online_RUN.bwgt",
        "search_RUN.csv",
        "eval_RUN.csv",
        "pr_RUN.csv",
        "pipe_RUN/model.bmdl",
        "pipe_RUN/train.bcod",
        "pipe_RUN/test.bcod",
        "pipe_RUN/triplets.btrp",
        "pipe_RUN/weights.bwgt",
        "pipe_RUN/summary.csv",
        "pipe_RUN/pr_hamming.csv",
        "pipe_RUN/pr_weighted.csv",
    ];

    for run in ["a", "b"] {
        for stage in &stages {
            let args: Vec<String> = stage.iter().map(|s| s.replace("RUN", run)).collect();
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            cli.run(&args);
        }
    }

    for name in outputs {
        let a = cli.read(&name.replace("RUN", "a"));
        let b = cli.read(&name.replace("RUN", "b"));
        assert_eq!(a, b, "{name} differs between identical reruns");
    }
    println!(
        "criterion 9 (determinism): PASS — {} output files bit-identical across reruns of every stage",
        outputs.len()
    );
}
