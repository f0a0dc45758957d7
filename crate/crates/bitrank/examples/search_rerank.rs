//! Two-stage search: filter candidates by standard Hamming distance,
//! then re-rank just those with the learned weighted Hamming distance.
//!
//! ```sh
//! cargo run --release --example search_rerank
//! ```

use bitrank::hashing::{encode_database, train_lsh};
use bitrank::learner::{train_offline, LearnerConfig};
use bitrank::ranking::{rerank_weighted, scan_hamming, search};
use bitrank::sampler::sample_triplets;
use bitrank::synth::GaussianMixture;
use bitrank::Result;

fn main() -> Result<()> {
    let mixture = GaussianMixture {
        classes: 8,
        per_class: 120,
        dim: 48,
        signal_dims: 44,
        center_spread: 1.0,
        noise: 0.4,
        nuisance_noise: 4.0,
    };
    let features = mixture.sample(2);
    let model = train_lsh(&features, 32, 3)?;
    let db = encode_database(&model, &features)?;
    let batch = sample_triplets(&db, 1500, 4)?;
    let (weights, _) = train_offline(&batch, &LearnerConfig::default(), None)?;

    // average same-class hits in the top 20, over a few query points
    let radius = 12;
    let top = 20;
    let mut before_hits = 0usize;
    let mut after_hits = 0usize;
    let mut kept = 0usize;
    for q in (0..db.len()).step_by(120) {
        let query = db.code(q).clone();
        let query_label = db.label(q);

        // stage 1: cheap XOR/popcount filter within a Hamming radius
        let candidates = scan_hamming(&query, &db, None, Some(radius))?;
        kept += candidates.len();

        // stage 2: weighted re-rank of just those candidates
        let reranked = rerank_weighted(&query, &candidates, &db, &weights)?;
        let hits = |list: &bitrank::ranking::RankedList| {
            list.entries()
                .iter()
                .filter(|&&(i, _)| i != q)
                .take(top)
                .filter(|&&(i, _)| db.label(i) == query_label)
                .count()
        };
        before_hits += hits(&candidates);
        after_hits += hits(&reranked);

        // the composed search is the same thing, truncated
        let composed = search(&query, &db, &weights, radius, top)?;
        assert_eq!(composed.entries(), &reranked.entries()[..top]);
    }
    println!(
        "stage 1 kept {:.0} candidates per query on average (radius {radius} of {} bits)",
        kept as f64 / 8.0,
        db.bits()
    );
    println!(
        "same-class hits in the top {top}, summed over 8 queries: {before_hits} before re-ranking, {after_hits} after"
    );

    // radius K skips the filter entirely: an exhaustive weighted scan
    let exhaustive = search(db.code(0), &db, &weights, db.bits() as u32, 5)?;
    println!("exhaustive weighted top-5 for the first query:");
    for (rank, (index, score)) in exhaustive.entries().iter().enumerate() {
        println!(
            "  {}. db index {index} (class {}), weighted distance {score:.3}",
            rank + 1,
            db.label(*index)
        );
    }
    Ok(())
}
