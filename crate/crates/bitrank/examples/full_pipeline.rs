//! The whole pipeline in one run: features -> codes -> triplets ->
//! learned weights -> evaluation, comparing unweighted, offline-weighted
//! and online-weighted MAP.
//!
//! ```sh
//! cargo run --release --example full_pipeline
//! ```

use bitrank::eval::{evaluate, sample_queries};
use bitrank::hashing::{encode_database, train_lsh};
use bitrank::learner::{train_offline, train_online, LearnerConfig};
use bitrank::sampler::sample_triplets;
use bitrank::synth::GaussianMixture;
use bitrank::Result;

fn main() -> Result<()> {
    // Gaussian classes with a few high-variance nuisance directions:
    // random projections that sample them make unreliable bits, which is
    // exactly what the learned weights should suppress.
    let mixture = GaussianMixture {
        classes: 10,
        per_class: 400,
        dim: 64,
        signal_dims: 60,
        center_spread: 1.0,
        noise: 0.25,
        nuisance_noise: 4.0,
    };
    let features = mixture.sample(1);
    let (train, test) = mixture.split_train_test(&features, 300);
    println!(
        "data: {} train / {} test over {} classes",
        train.len(),
        test.len(),
        10
    );

    let model = train_lsh(&train, 32, 2)?;
    let train_db = encode_database(&model, &train)?;
    let test_db = encode_database(&model, &test)?;
    println!("codes: 32-bit LSH");

    let batch = sample_triplets(&train_db, 2000, 3)?;
    let cfg = LearnerConfig::default();
    let (offline_weights, trace) = train_offline(&batch, &cfg, None)?;
    println!(
        "offline training: objective {:.1} -> {:.1} in {} iterations",
        trace.first().unwrap(),
        trace.last().unwrap(),
        trace.len() - 1
    );
    let (online_weights, updates) = train_online(batch.chunked(10), &cfg, None)?;
    println!("online training: {} mini-batch updates", updates.len());

    let queries = sample_queries(&test_db, 0.1, 4)?;
    let plain = evaluate(&queries, &test_db, None)?;
    let offline = evaluate(&queries, &test_db, Some(&offline_weights))?;
    let online = evaluate(&queries, &test_db, Some(&online_weights))?;
    println!("MAP over {} held-out queries:", queries.len());
    println!("  standard Hamming   {:.4}", plain.map);
    println!(
        "  weighted (offline) {:.4} ({:+.1}%)",
        offline.map,
        100.0 * (offline.map - plain.map) / plain.map
    );
    println!(
        "  weighted (online)  {:.4} ({:+.1}%)",
        online.map,
        100.0 * (online.map - plain.map) / plain.map
    );
    Ok(())
}
