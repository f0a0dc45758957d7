//! Bit-packed binary codes and the distance primitives built on them.
//!
//! A code is a row of K bits stored LSB-first in little-endian `u64` words:
//! bit k lives in word `k / 64` at position `k % 64`, and the unused high
//! bits of the last word are always zero. This layout makes the on-disk
//! packed form byte-identical across platforms.
//!
//! The absolute code difference vector (ACDV) of two codes is their bitwise
//! XOR; its popcount is the Hamming distance, and its inner product with a
//! non-negative weight vector is the weighted Hamming distance used for
//! re-ranking.

use std::fmt;

use crate::error::{Error, Result};
use crate::learner::BitWeights;

/// Maximum supported code length in bits.
pub const MAX_BITS: usize = 1024;

const WORD_BITS: usize = 64;

pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

fn check_bit_count(len: usize) -> Result<()> {
    if len == 0 || len > MAX_BITS {
        return Err(Error::invalid_argument(format!(
            "bit count must be in 1..={MAX_BITS}, got {len}"
        )));
    }
    Ok(())
}

fn check_padding(len: usize, words: &[u64]) -> Result<()> {
    if words.len() != words_for(len) {
        return Err(Error::invalid_argument(format!(
            "expected {} words for {len} bits, got {}",
            words_for(len),
            words.len()
        )));
    }
    let tail = len % WORD_BITS;
    if tail != 0 && words[words.len() - 1] >> tail != 0 {
        return Err(Error::invalid_argument(
            "padding bits beyond the code length must be zero".to_string(),
        ));
    }
    Ok(())
}

fn check_same_len(left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::LengthMismatch { left, right });
    }
    Ok(())
}

/// A K-bit binary code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryCode {
    len: usize,
    words: Vec<u64>,
}

impl BinaryCode {
    /// Builds a code from individual bits; `bits[k]` becomes bit k.
    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        check_bit_count(bits.len())?;
        let mut words = vec![0u64; words_for(bits.len())];
        for (k, &bit) in bits.iter().enumerate() {
            if bit {
                words[k / WORD_BITS] |= 1 << (k % WORD_BITS);
            }
        }
        Ok(Self {
            len: bits.len(),
            words,
        })
    }

    /// Parses a string of `'0'`/`'1'` characters, character k giving bit k.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::invalid_argument(format!(
                    "bit string may only contain '0' and '1', found {other:?}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bits(&bits)
    }

    /// Builds a code from pre-packed words; padding bits must be zero.
    pub fn from_words(len: usize, words: Vec<u64>) -> Result<Self> {
        check_bit_count(len)?;
        check_padding(len, &words)?;
        Ok(Self { len, words })
    }

    /// Number of bits K.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // length is always >= 1
    }

    pub fn bit(&self, k: usize) -> bool {
        assert!(k < self.len, "bit index {k} out of range for {} bits", self.len);
        self.words[k / WORD_BITS] >> (k % WORD_BITS) & 1 == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Packs the code into `ceil(len/8)` bytes, LSB-first within each byte.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        pack_words_to_bytes(self.len, &self.words)
    }

    /// Unpacks a code from `ceil(len/8)` bytes as produced by
    /// [`to_packed_bytes`](Self::to_packed_bytes).
    pub fn from_packed_bytes(len: usize, bytes: &[u8]) -> Result<Self> {
        check_bit_count(len)?;
        let words = unpack_bytes_to_words(len, bytes)?;
        check_padding(len, &words)?;
        Ok(Self { len, words })
    }
}

fn pack_words_to_bytes(len: usize, words: &[u64]) -> Vec<u8> {
    let n_bytes = len.div_ceil(8);
    let mut out = Vec::with_capacity(n_bytes);
    for word in words {
        out.extend_from_slice(&word.to_le_bytes());
    }
    out.truncate(n_bytes);
    out
}

fn unpack_bytes_to_words(len: usize, bytes: &[u8]) -> Result<Vec<u64>> {
    let n_bytes = len.div_ceil(8);
    if bytes.len() != n_bytes {
        return Err(Error::invalid_argument(format!(
            "expected {n_bytes} packed bytes for {len} bits, got {}",
            bytes.len()
        )));
    }
    let mut words = vec![0u64; words_for(len)];
    for (i, &b) in bytes.iter().enumerate() {
        words[i / 8] |= (b as u64) << (8 * (i % 8));
    }
    Ok(words)
}

impl fmt::Display for BinaryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len {
            f.write_str(if self.bit(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Absolute code difference vector: the bitwise XOR of two equal-length
/// codes, stored in the same packed layout.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Acdv {
    len: usize,
    words: Vec<u64>,
}

impl Acdv {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bit(&self, k: usize) -> bool {
        assert!(k < self.len, "bit index {k} out of range for {} bits", self.len);
        self.words[k / WORD_BITS] >> (k % WORD_BITS) & 1 == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn popcount(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Indices of the set bits, ascending.
    pub fn set_bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let k = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * WORD_BITS + k)
            })
        })
    }

    /// Sum of `weights[k]` over the set bits, accumulated word by word.
    pub fn weighted_sum(&self, weights: &BitWeights) -> Result<f64> {
        check_same_len(weights.len(), self.len)?;
        let w = weights.as_slice();
        let mut total = 0.0;
        for (i, &word) in self.words.iter().enumerate() {
            let mut rest = word;
            while rest != 0 {
                let k = rest.trailing_zeros() as usize;
                total += w[i * WORD_BITS + k];
                rest &= rest - 1;
            }
        }
        Ok(total)
    }

    pub(crate) fn to_packed_bytes(&self) -> Vec<u8> {
        pack_words_to_bytes(self.len, &self.words)
    }

    pub(crate) fn from_packed_bytes(len: usize, bytes: &[u8]) -> Result<Self> {
        check_bit_count(len)?;
        let words = unpack_bytes_to_words(len, bytes)?;
        check_padding(len, &words)?;
        Ok(Self { len, words })
    }
}

impl fmt::Display for Acdv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len {
            f.write_str(if self.bit(k) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Hamming distance: the number of differing bit positions.
pub fn hamming(a: &BinaryCode, b: &BinaryCode) -> Result<u32> {
    check_same_len(a.len, b.len)?;
    Ok(a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones())
        .sum())
}

/// Absolute code difference vector of two codes.
pub fn acdv(a: &BinaryCode, b: &BinaryCode) -> Result<Acdv> {
    check_same_len(a.len, b.len)?;
    let words = a.words.iter().zip(&b.words).map(|(x, y)| x ^ y).collect();
    Ok(Acdv { len: a.len, words })
}

/// Weighted Hamming distance: the weight sum over differing bit positions.
pub fn weighted_hamming(w: &BitWeights, a: &BinaryCode, b: &BinaryCode) -> Result<f64> {
    check_same_len(a.len, b.len)?;
    check_same_len(w.len(), a.len)?;
    let ws = w.as_slice();
    let mut total = 0.0;
    for (i, (x, y)) in a.words.iter().zip(&b.words).enumerate() {
        let mut rest = x ^ y;
        while rest != 0 {
            let k = rest.trailing_zeros() as usize;
            total += ws[i * WORD_BITS + k];
            rest &= rest - 1;
        }
    }
    Ok(total)
}

/// A database of N equal-length binary codes with class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeDatabase {
    codes: Vec<BinaryCode>,
    labels: Vec<u32>,
}

impl CodeDatabase {
    pub fn new(codes: Vec<BinaryCode>, labels: Vec<u32>) -> Result<Self> {
        if codes.is_empty() {
            return Err(Error::invalid_argument(
                "code database must hold at least one code".to_string(),
            ));
        }
        if codes.len() != labels.len() {
            return Err(Error::invalid_argument(format!(
                "{} codes but {} labels",
                codes.len(),
                labels.len()
            )));
        }
        let bits = codes[0].len();
        for code in &codes {
            check_same_len(bits, code.len())?;
        }
        Ok(Self { codes, labels })
    }

    /// Number of codes N.
    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // N >= 1 by construction
    }

    /// Code length K shared by all entries.
    pub fn bits(&self) -> usize {
        self.codes[0].len()
    }

    pub fn codes(&self) -> &[BinaryCode] {
        &self.codes
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn code(&self, i: usize) -> &BinaryCode {
        &self.codes[i]
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> BinaryCode {
        BinaryCode::from_bit_str(s).unwrap()
    }

    #[test]
    fn hamming_identity() {
        let a = code("0101");
        assert_eq!(hamming(&a, &a).unwrap(), 0);
    }

    #[test]
    fn hamming_full_complement() {
        assert_eq!(hamming(&code("1111"), &code("0000")).unwrap(), 4);
    }

    #[test]
    fn hamming_hand_count() {
        assert_eq!(hamming(&code("0101"), &code("0110")).unwrap(), 2);
    }

    #[test]
    fn hamming_length_mismatch() {
        let err = hamming(&code("01"), &code("011")).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { left: 2, right: 3 }));
    }

    #[test]
    fn acdv_hand_xor() {
        let v = acdv(&code("0101"), &code("0110")).unwrap();
        assert_eq!(v.to_string(), "0011");
    }

    #[test]
    fn acdv_identity_is_zero() {
        let a = code("10110");
        let v = acdv(&a, &a).unwrap();
        assert_eq!(v.popcount(), 0);
    }

    #[test]
    fn acdv_full_complement() {
        let v = acdv(&code("1010"), &code("0101")).unwrap();
        assert_eq!(v.to_string(), "1111");
    }

    #[test]
    fn weighted_hamming_hand_dot() {
        let w = BitWeights::new(vec![0.5, 2.0, 1.5, 0.25]).unwrap();
        let d = weighted_hamming(&w, &code("0101"), &code("0110")).unwrap();
        assert_eq!(d, 1.75);
    }

    #[test]
    fn weighted_hamming_zero_weights() {
        let w = BitWeights::new(vec![0.0; 4]).unwrap();
        assert_eq!(weighted_hamming(&w, &code("0101"), &code("1010")).unwrap(), 0.0);
    }

    #[test]
    fn weighted_hamming_rejects_mismatched_weights() {
        let w = BitWeights::new(vec![1.0; 3]).unwrap();
        assert!(weighted_hamming(&w, &code("0101"), &code("0110")).is_err());
    }

    #[test]
    fn packed_byte_layout_is_lsb_first() {
        // bit0=1, bit1=0, bit2=1, bit3=1 -> 0b0000_1101
        let c = code("1011");
        assert_eq!(c.to_packed_bytes(), vec![0b0000_1101]);
        let back = BinaryCode::from_packed_bytes(4, &[0b0000_1101]).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn packed_bytes_reject_dirty_padding() {
        assert!(BinaryCode::from_packed_bytes(4, &[0b0001_1101]).is_err());
    }

    #[test]
    fn bit_count_bounds() {
        assert!(BinaryCode::from_bits(&[]).is_err());
        assert!(BinaryCode::from_bits(&vec![false; MAX_BITS + 1]).is_err());
        assert!(BinaryCode::from_bits(&vec![true; MAX_BITS]).is_ok());
    }

    #[test]
    fn database_rejects_ragged_input() {
        assert!(CodeDatabase::new(vec![code("01"), code("011")], vec![0, 1]).is_err());
        assert!(CodeDatabase::new(vec![code("01")], vec![0, 1]).is_err());
        assert!(CodeDatabase::new(vec![], vec![]).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_code_pair() -> impl Strategy<Value = (BinaryCode, BinaryCode)> {
            (1usize..=MAX_BITS).prop_flat_map(|len| {
                let bits = proptest::collection::vec(any::<bool>(), len);
                (bits.clone(), bits).prop_map(|(a, b)| {
                    (
                        BinaryCode::from_bits(&a).unwrap(),
                        BinaryCode::from_bits(&b).unwrap(),
                    )
                })
            })
        }

        proptest! {
            #[test]
            fn hamming_equals_acdv_popcount((a, b) in arb_code_pair()) {
                let d = hamming(&a, &b).unwrap();
                prop_assert_eq!(d, acdv(&a, &b).unwrap().popcount());
            }

            #[test]
            fn unit_weights_reduce_to_hamming((a, b) in arb_code_pair()) {
                let w = BitWeights::ones(a.len());
                let wd = weighted_hamming(&w, &a, &b).unwrap();
                prop_assert_eq!(wd, f64::from(hamming(&a, &b).unwrap()));
            }

            #[test]
            fn distances_are_symmetric((a, b) in arb_code_pair()) {
                prop_assert_eq!(hamming(&a, &b).unwrap(), hamming(&b, &a).unwrap());
                let w = BitWeights::ones(a.len());
                prop_assert_eq!(
                    weighted_hamming(&w, &a, &b).unwrap(),
                    weighted_hamming(&w, &b, &a).unwrap()
                );
                prop_assert_eq!(acdv(&a, &b).unwrap(), acdv(&b, &a).unwrap());
            }

            #[test]
            fn hamming_triangle_inequality(
                (len, bits) in (1usize..=256).prop_flat_map(|len| {
                    (Just(len), proptest::collection::vec(any::<bool>(), 3 * len))
                })
            ) {
                let a = BinaryCode::from_bits(&bits[..len]).unwrap();
                let b = BinaryCode::from_bits(&bits[len..2 * len]).unwrap();
                let c = BinaryCode::from_bits(&bits[2 * len..]).unwrap();
                let ab = hamming(&a, &b).unwrap();
                let bc = hamming(&b, &c).unwrap();
                let ac = hamming(&a, &c).unwrap();
                prop_assert!(ac <= ab + bc);
            }

            #[test]
            fn set_bits_match_bit_accessor((a, b) in arb_code_pair()) {
                let v = acdv(&a, &b).unwrap();
                let from_iter: Vec<usize> = v.set_bits().collect();
                let from_bits: Vec<usize> = (0..v.len()).filter(|&k| v.bit(k)).collect();
                prop_assert_eq!(from_iter, from_bits);
            }
        }
    }
}
