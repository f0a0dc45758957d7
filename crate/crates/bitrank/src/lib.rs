//! Bitwise weight learning for binary hash codes.
//!
//! Binary codes compare fast but coarsely: Hamming distance over K bits takes
//! only K+1 values, so ranked lists are full of ties. This crate learns a
//! non-negative weight per code bit from labeled examples and replaces the
//! Hamming distance with a real-valued weighted Hamming distance, which breaks
//! the ties in a label-aware way while keeping the XOR/popcount machinery.
//!
//! The pieces, in pipeline order:
//!
//! * [`hashing`] turns real-valued features into binary codes (LSH or ITQ);
//!   externally produced codes can be imported through [`io`] instead.
//! * [`sampler`] draws labeled quadruplets from a code database and converts
//!   them into ACDV triplets, the training unit for weight learning.
//! * [`learner`] solves a Ranking SVM objective over those triplets with
//!   exponentiated or projected gradient descent, in batch or online
//!   passive-aggressive mode.
//! * [`ranking`] runs two-stage search: Hamming filtering then weighted
//!   re-ranking.
//! * [`eval`] scores rankings with PR curves, average precision and MAP.
//!
//! ```
//! use bitrank::code::{hamming, weighted_hamming, BinaryCode};
//! use bitrank::learner::BitWeights;
//!
//! let a = BinaryCode::from_bit_str("0101").unwrap();
//! let b = BinaryCode::from_bit_str("0110").unwrap();
//! assert_eq!(hamming(&a, &b).unwrap(), 2);
//!
//! let w = BitWeights::new(vec![0.5, 2.0, 1.5, 0.25]).unwrap();
//! assert_eq!(weighted_hamming(&w, &a, &b).unwrap(), 1.75);
//! ```
//!
//! Everything that draws random numbers takes an explicit seed and is
//! deterministic given it; file formats are bit-exact across platforms.

pub mod cli;
pub mod code;
pub mod error;
pub mod eval;
pub mod hashing;
pub mod io;
pub mod learner;
pub mod ranking;
pub mod sampler;
pub mod synth;

pub use code::{acdv, hamming, weighted_hamming, Acdv, BinaryCode, CodeDatabase};
pub use error::{Error, Result};
pub use learner::{BitWeights, LearnerConfig, Optimizer};
