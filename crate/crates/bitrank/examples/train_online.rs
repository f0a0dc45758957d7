//! Online passive-aggressive weight learning over a stream of
//! mini-batches, including the passive case where satisfied constraints
//! leave the weights untouched.
//!
//! ```sh
//! cargo run --release --example train_online
//! ```

use bitrank::hashing::{encode_database, train_lsh};
use bitrank::learner::{online_update, LearnerConfig, OnlineState};
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
    let features = mixture.sample(4);
    let model = train_lsh(&features, 24, 8)?;
    let db = encode_database(&model, &features)?;

    // one pass over 600 triplets, ten at a time
    let batch = sample_triplets(&db, 600, 5)?;
    let cfg = LearnerConfig::default();
    let mut state = OnlineState::new(bitrank::BitWeights::ones(24), cfg.clone())?;
    let mut moved = 0usize;
    for minibatch in batch.chunked(cfg.minibatch_size) {
        let next = online_update(&state, &minibatch)?;
        if next.weights() != state.weights() {
            moved += 1;
        }
        state = next;
    }
    println!(
        "{} updates applied, {} of them moved the weights (aggressive), {} were passive",
        state.updates(),
        moved,
        state.updates() as usize - moved
    );
    assert!(state.weights().is_strictly_positive());

    // the passive case: a mini-batch whose constraints already hold at
    // the current weights (margin >= 1, equal similar-pair distances)
    // leaves them exactly unchanged
    let zero = bitrank::BinaryCode::from_bits(&[false; 24]).unwrap();
    let far = bitrank::BinaryCode::from_bits(&[true; 24]).unwrap();
    let mut near_bits = vec![false; 24];
    near_bits[3] = true;
    let near = bitrank::BinaryCode::from_bits(&near_bits).unwrap();
    let satisfied = bitrank::sampler::AcdvTriplet::new(
        bitrank::acdv(&far, &zero)?,
        bitrank::acdv(&near, &zero)?,
        bitrank::acdv(&near, &zero)?,
    )?;
    let satisfied = bitrank::sampler::TripletBatch::new(24, vec![satisfied], 0, vec![[0; 4]])?;
    let before = state.weights().clone();
    state = online_update(&state, &satisfied)?;
    assert_eq!(state.weights(), &before);
    println!("a fully satisfied mini-batch left the weights exactly unchanged (passive case)");
    Ok(())
}
