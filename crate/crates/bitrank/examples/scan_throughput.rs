//! Measures exhaustive scan throughput: packed-word XOR/popcount for
//! standard Hamming distance, and XOR plus per-word weight accumulation
//! over set bits for the weighted distance.
//!
//! ```sh
//! cargo run --release --example scan_throughput
//! ```

use std::hint::black_box;
use std::time::Instant;

use bitrank::code::{BinaryCode, CodeDatabase};
use bitrank::learner::BitWeights;
use bitrank::ranking::{scan_hamming, search};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let n = 100_000;
    let queries = 50;

    for bits in [32, 64, 128, 256] {
        let codes: Vec<BinaryCode> = (0..n)
            .map(|_| {
                let bits: Vec<bool> = (0..bits).map(|_| rng.random()).collect();
                BinaryCode::from_bits(&bits).unwrap()
            })
            .collect();
        let db = CodeDatabase::new(codes, vec![0; n]).unwrap();
        let weights = BitWeights::new(
            (0..bits).map(|_| rng.random_range(0.0..2.0)).collect(),
        )
        .unwrap();

        let start = Instant::now();
        for q in 0..queries {
            black_box(scan_hamming(db.code(q), &db, Some(10), None).unwrap());
        }
        let hamming_rate = (n * queries) as f64 / start.elapsed().as_secs_f64();

        let start = Instant::now();
        for q in 0..queries {
            black_box(search(db.code(q), &db, &weights, bits as u32, 10).unwrap());
        }
        let weighted_rate = (n * queries) as f64 / start.elapsed().as_secs_f64();

        println!(
            "{bits:>4} bits: {:>7.1}M Hamming comparisons/s, {:>7.1}M weighted comparisons/s",
            hamming_rate / 1e6,
            weighted_rate / 1e6
        );
    }
}
