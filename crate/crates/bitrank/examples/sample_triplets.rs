//! Draw quadruplets from a labeled code database and convert them into
//! the ACDV triplets the weight learner trains on.
//!
//! ```sh
//! cargo run --release --example sample_triplets
//! ```

use bitrank::hashing::{encode_database, train_lsh};
use bitrank::sampler::{sample_quadruplets, to_triplets};
use bitrank::synth::GaussianMixture;
use bitrank::Result;

fn main() -> Result<()> {
    let features = GaussianMixture::isotropic(4, 50, 16, 1.2, 0.5).sample(3);
    let model = train_lsh(&features, 16, 11)?;
    let db = encode_database(&model, &features)?;

    let quads = sample_quadruplets(&db, 500, 21)?;
    println!("sampled {} quadruplets from {} codes", quads.len(), db.len());

    // query-class frequencies follow the class-size ratios
    let mut counts = std::collections::BTreeMap::new();
    for quad in &quads {
        *counts.entry(db.label(quad.query)).or_insert(0usize) += 1;
    }
    for (label, count) in &counts {
        println!(
            "  class {label}: {count} queries ({:.1}% of draws, class holds 25% of the data)",
            100.0 * *count as f64 / quads.len() as f64
        );
    }

    let batch = to_triplets(&db, &quads)?.with_seed(21);
    println!(
        "converted to {} triplets of {} bits (seed {})",
        batch.len(),
        batch.bits(),
        batch.seed()
    );

    let t = &batch.triplets()[0];
    println!("first triplet:");
    println!("  dissimilar-pair ACDV: {} ({} set bits)", t.dissimilar, t.dissimilar.popcount());
    println!("  similar-pair ACDV a:  {} ({} set bits)", t.similar_a, t.similar_a.popcount());
    println!("  similar-pair ACDV b:  {} ({} set bits)", t.similar_b, t.similar_b.popcount());
    println!("  source quadruplet: {:?}", batch.sources()[0]);
    Ok(())
}
