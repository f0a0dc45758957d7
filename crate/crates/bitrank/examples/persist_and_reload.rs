//! Round-trip every artifact through its binary format: hash model,
//! code database, triplet batch and learned weights.
//!
//! ```sh
//! cargo run --release --example persist_and_reload
//! ```

use bitrank::hashing::{encode_database, train_itq};
use bitrank::io;
use bitrank::learner::{train_offline, LearnerConfig};
use bitrank::sampler::sample_triplets;
use bitrank::synth::GaussianMixture;
use bitrank::Result;

fn main() -> Result<()> {
    let dir = std::env::temp_dir().join("bitrank_persist_example");
    std::fs::create_dir_all(&dir)?;

    let features = GaussianMixture::isotropic(4, 60, 16, 1.3, 0.5).sample(6);
    let (model, _) = train_itq(&features, 12, 50, 7)?;
    let db = encode_database(&model, &features)?;
    let batch = sample_triplets(&db, 400, 8)?;
    let (weights, _) = train_offline(&batch, &LearnerConfig::default(), None)?;

    let model_path = dir.join("model.bmdl");
    let codes_path = dir.join("codes.bcod");
    let triplets_path = dir.join("triplets.btrp");
    let weights_path = dir.join("weights.bwgt");

    io::save_model(&model_path, &model)?;
    io::save_codes(&codes_path, &db)?;
    io::save_triplets(&triplets_path, &batch)?;
    io::save_weights(&weights_path, &weights)?;

    assert_eq!(io::load_model(&model_path)?, model);
    assert_eq!(io::load_codes(&codes_path)?, db);
    assert_eq!(io::load_triplets(&triplets_path)?, batch);
    assert_eq!(io::load_weights(&weights_path)?, weights);

    for path in [&model_path, &codes_path, &triplets_path, &weights_path] {
        println!(
            "{:>14}: {} bytes, round-trips bit-exact",
            path.file_name().unwrap().to_string_lossy(),
            std::fs::metadata(path)?.len()
        );
    }

    // the text dump is for human inspection, one weight per line
    let text_path = dir.join("weights.txt");
    io::save_weights_text(&text_path, &weights)?;
    let text = std::fs::read_to_string(&text_path)?;
    println!("weights.txt starts with: {}", text.lines().next().unwrap());
    Ok(())
}
