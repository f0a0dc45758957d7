//! Offline Ranking-SVM weight learning: EGD vs PGD on the same batch,
//! with their objective traces.
//!
//! ```sh
//! cargo run --release --example train_offline
//! ```

use bitrank::hashing::{encode_database, train_lsh};
use bitrank::learner::{objective, train_offline, LearnerConfig, Optimizer};
use bitrank::sampler::sample_triplets;
use bitrank::synth::GaussianMixture;
use bitrank::Result;

fn main() -> Result<()> {
    let mixture = GaussianMixture {
        classes: 6,
        per_class: 100,
        dim: 32,
        signal_dims: 28,
        center_spread: 1.0,
        noise: 0.3,
        nuisance_noise: 3.0,
    };
    let features = mixture.sample(5);
    let model = train_lsh(&features, 24, 2)?;
    let db = encode_database(&model, &features)?;
    let batch = sample_triplets(&db, 1000, 3)?;

    for optimizer in [Optimizer::Egd, Optimizer::Pgd] {
        let cfg = LearnerConfig {
            optimizer,
            ..Default::default()
        };
        let (weights, trace) = train_offline(&batch, &cfg, None)?;
        println!(
            "{optimizer}: objective {:.2} -> {:.2} in {} iterations",
            trace.first().unwrap(),
            trace.last().unwrap(),
            trace.len() - 1
        );

        let mut indexed: Vec<(usize, f64)> =
            weights.as_slice().iter().copied().enumerate().collect();
        indexed.sort_by(|a, b| b.1.total_cmp(&a.1));
        let strongest: Vec<String> = indexed[..3]
            .iter()
            .map(|(k, w)| format!("bit {k} = {w:.3}"))
            .collect();
        let weakest: Vec<String> = indexed[indexed.len() - 3..]
            .iter()
            .map(|(k, w)| format!("bit {k} = {w:.3}"))
            .collect();
        println!("  strongest weights: {}", strongest.join(", "));
        println!("  weakest weights:   {}", weakest.join(", "));

        // the trace is non-increasing and ends at the returned weights' value
        assert!(trace.windows(2).all(|p| p[1] <= p[0]));
        let final_objective = objective(&weights, &batch, &cfg)?;
        assert_eq!(final_objective, *trace.last().unwrap());
    }
    Ok(())
}
