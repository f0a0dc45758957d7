//! Quadruplet sampling and ACDV-triplet construction.
//!
//! Training data is drawn from a labeled code database as quadruplets
//! `(query, dissimilar, similar_a, similar_b)`: the query class is chosen
//! multinomially with probability proportional to its share of the database
//! (restricted to classes with at least three members), the two similar
//! points are drawn from the query class without replacement, and the
//! dissimilar point comes from a uniformly chosen other class. Each
//! quadruplet is converted into one triplet of ACDVs against the query.
//! Sampling rejects duplicate index tuples so a batch never repeats a
//! training sample.

use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::code::{acdv, Acdv, CodeDatabase};
use crate::error::{Error, Result};

/// Indices of one sampled quadruplet: `query` and both `similar` entries
/// share a class, `dissimilar` belongs to a different one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quadruplet {
    pub query: usize,
    pub dissimilar: usize,
    pub similar: [usize; 2],
}

impl Quadruplet {
    fn as_tuple(&self) -> (usize, usize, usize, usize) {
        (self.query, self.dissimilar, self.similar[0], self.similar[1])
    }
}

/// One training unit: the dissimilar-pair ACDV and the two similar-pair
/// ACDVs of a quadruplet, all taken against the query code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcdvTriplet {
    pub dissimilar: Acdv,
    pub similar_a: Acdv,
    pub similar_b: Acdv,
}

impl AcdvTriplet {
    pub fn new(dissimilar: Acdv, similar_a: Acdv, similar_b: Acdv) -> Result<Self> {
        if dissimilar.len() != similar_a.len() || dissimilar.len() != similar_b.len() {
            return Err(Error::LengthMismatch {
                left: dissimilar.len(),
                right: similar_a.len().max(similar_b.len()),
            });
        }
        Ok(Self {
            dissimilar,
            similar_a,
            similar_b,
        })
    }

    pub fn len(&self) -> usize {
        self.dissimilar.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// A batch of ACDV triplets plus the provenance needed to reproduce it:
/// the sampling seed and the source quadruplet index tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletBatch {
    bits: usize,
    triplets: Vec<AcdvTriplet>,
    seed: u64,
    sources: Vec<[u64; 4]>,
}

impl TripletBatch {
    pub fn new(
        bits: usize,
        triplets: Vec<AcdvTriplet>,
        seed: u64,
        sources: Vec<[u64; 4]>,
    ) -> Result<Self> {
        if triplets.len() != sources.len() {
            return Err(Error::invalid_argument(format!(
                "{} triplets but {} source tuples",
                triplets.len(),
                sources.len()
            )));
        }
        for t in &triplets {
            if t.len() != bits {
                return Err(Error::LengthMismatch {
                    left: bits,
                    right: t.len(),
                });
            }
        }
        let mut seen = HashSet::with_capacity(sources.len());
        for s in &sources {
            if !seen.insert(*s) {
                return Err(Error::invalid_argument(format!(
                    "duplicate source tuple {s:?} in triplet batch"
                )));
            }
        }
        Ok(Self {
            bits,
            triplets,
            seed,
            sources,
        })
    }

    /// Code length K shared by every ACDV in the batch.
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.triplets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triplets.is_empty()
    }

    pub fn triplets(&self) -> &[AcdvTriplet] {
        &self.triplets
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sources(&self) -> &[[u64; 4]] {
        &self.sources
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Splits the batch into consecutive mini-batches of at most `size`
    /// triplets, preserving order and provenance.
    pub fn chunked(&self, size: usize) -> Vec<TripletBatch> {
        assert!(size >= 1, "chunk size must be at least 1");
        self.triplets
            .chunks(size)
            .zip(self.sources.chunks(size))
            .map(|(ts, ss)| TripletBatch {
                bits: self.bits,
                triplets: ts.to_vec(),
                seed: self.seed,
                sources: ss.to_vec(),
            })
            .collect()
    }
}

struct ClassIndex {
    /// (label, member indices), ascending by label.
    classes: Vec<(u32, Vec<usize>)>,
    /// Positions in `classes` of the classes with >= 3 members.
    eligible: Vec<usize>,
}

fn build_class_index(db: &CodeDatabase) -> ClassIndex {
    let mut classes: Vec<(u32, Vec<usize>)> = Vec::new();
    let mut by_label = std::collections::BTreeMap::new();
    for (i, &label) in db.labels().iter().enumerate() {
        by_label.entry(label).or_insert_with(Vec::new).push(i);
    }
    for (label, members) in by_label {
        classes.push((label, members));
    }
    let eligible = classes
        .iter()
        .enumerate()
        .filter(|(_, (_, m))| m.len() >= 3)
        .map(|(pos, _)| pos)
        .collect();
    ClassIndex { classes, eligible }
}

/// Draws `count` distinct quadruplets from `db`, deterministic in `seed`.
///
/// The rejection budget for duplicate avoidance is `100 * count` draws;
/// exceeding it yields [`Error::Exhausted`].
pub fn sample_quadruplets(db: &CodeDatabase, count: usize, seed: u64) -> Result<Vec<Quadruplet>> {
    if count == 0 {
        return Err(Error::invalid_argument("quadruplet count must be at least 1"));
    }
    let index = build_class_index(db);
    if index.classes.len() < 2 {
        return Err(Error::invalid_argument(format!(
            "quadruplet sampling needs at least two classes, found {}",
            index.classes.len()
        )));
    }
    if index.eligible.is_empty() {
        return Err(Error::invalid_argument("no class has the three members required for a query class"));
    }

    // Multinomial over eligible query classes, weighted by class size.
    let weights: Vec<usize> = index
        .eligible
        .iter()
        .map(|&pos| index.classes[pos].1.len())
        .collect();
    let class_dist = WeightedIndex::new(&weights)
        .map_err(|e| Error::invalid_argument(format!("bad class weights: {e}")))?;

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    let budget = count.saturating_mul(100);
    let mut attempts = 0usize;

    while out.len() < count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Exhausted(format!(
                "could not find {count} distinct quadruplets within {budget} draws \
                 ({} found)",
                out.len()
            )));
        }

        let qclass_pos = index.eligible[class_dist.sample(&mut rng)];
        let members = &index.classes[qclass_pos].1;
        let m = members.len();

        // query and two same-class points, drawn without replacement
        let pi = rng.random_range(0..m);
        let mut pk = rng.random_range(0..m - 1);
        if pk >= pi {
            pk += 1;
        }
        let mut ps = rng.random_range(0..m - 2);
        let (lo, hi) = (pi.min(pk), pi.max(pk));
        if ps >= lo {
            ps += 1;
        }
        if ps >= hi {
            ps += 1;
        }

        // dissimilar point from a uniformly chosen different class
        let mut oclass = rng.random_range(0..index.classes.len() - 1);
        if oclass >= qclass_pos {
            oclass += 1;
        }
        let others = &index.classes[oclass].1;
        let pj = rng.random_range(0..others.len());

        let quad = Quadruplet {
            query: members[pi],
            dissimilar: others[pj],
            similar: [members[pk], members[ps]],
        };
        if seen.insert(quad.as_tuple()) {
            out.push(quad);
        }
    }
    Ok(out)
}

/// Converts quadruplets into ACDV triplets against their query codes.
pub fn to_triplets(db: &CodeDatabase, quads: &[Quadruplet]) -> Result<TripletBatch> {
    let n = db.len();
    let mut triplets = Vec::with_capacity(quads.len());
    let mut sources = Vec::with_capacity(quads.len());
    for q in quads {
        for idx in [q.query, q.dissimilar, q.similar[0], q.similar[1]] {
            if idx >= n {
                return Err(Error::invalid_argument(format!(
                    "quadruplet index {idx} out of range for a database of {n} codes"
                )));
            }
        }
        let ql = db.label(q.query);
        if db.label(q.dissimilar) == ql
            || db.label(q.similar[0]) != ql
            || db.label(q.similar[1]) != ql
        {
            return Err(Error::invalid_argument(format!(
                "quadruplet {:?} violates its class constraints",
                q.as_tuple()
            )));
        }
        let a = acdv(db.code(q.query), db.code(q.dissimilar))?;
        let b = acdv(db.code(q.query), db.code(q.similar[0]))?;
        let c = acdv(db.code(q.query), db.code(q.similar[1]))?;
        triplets.push(AcdvTriplet::new(a, b, c)?);
        sources.push([
            q.query as u64,
            q.dissimilar as u64,
            q.similar[0] as u64,
            q.similar[1] as u64,
        ]);
    }
    TripletBatch::new(db.bits(), triplets, 0, sources)
}

/// Samples quadruplets and converts them in one step, stamping the batch
/// with the sampling seed.
pub fn sample_triplets(db: &CodeDatabase, count: usize, seed: u64) -> Result<TripletBatch> {
    let quads = sample_quadruplets(db, count, seed)?;
    Ok(to_triplets(db, &quads)?.with_seed(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::BinaryCode;

    fn db_from(specs: &[(&str, u32)]) -> CodeDatabase {
        let codes = specs
            .iter()
            .map(|(s, _)| BinaryCode::from_bit_str(s).unwrap())
            .collect();
        let labels = specs.iter().map(|&(_, l)| l).collect();
        CodeDatabase::new(codes, labels).unwrap()
    }

    /// Database with `sizes[c]` random codes in class c.
    fn random_db(sizes: &[usize], bits: usize, seed: u64) -> CodeDatabase {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let mut codes = Vec::new();
        let mut labels = Vec::new();
        for (c, &size) in sizes.iter().enumerate() {
            for _ in 0..size {
                let bits: Vec<bool> = (0..bits).map(|_| rng.random()).collect();
                codes.push(BinaryCode::from_bits(&bits).unwrap());
                labels.push(c as u32);
            }
        }
        CodeDatabase::new(codes, labels).unwrap()
    }

    #[test]
    fn small_classes_are_never_query_classes() {
        // class 0 has two members: it cannot provide query + two similars
        let db = random_db(&[2, 5], 8, 1);
        let quads = sample_quadruplets(&db, 100, 7).unwrap();
        for q in &quads {
            assert_eq!(db.label(q.query), 1);
        }
    }

    #[test]
    fn class_constraints_hold_for_every_quadruplet() {
        let db = random_db(&[5, 7, 4], 16, 2);
        let quads = sample_quadruplets(&db, 500, 11).unwrap();
        assert_eq!(quads.len(), 500);
        for q in &quads {
            let ql = db.label(q.query);
            assert_ne!(ql, db.label(q.dissimilar));
            assert_eq!(ql, db.label(q.similar[0]));
            assert_eq!(ql, db.label(q.similar[1]));
            assert_ne!(q.query, q.similar[0]);
            assert_ne!(q.query, q.similar[1]);
            assert_ne!(q.similar[0], q.similar[1]);
        }
    }

    #[test]
    fn query_class_frequencies_follow_the_multinomial_law() {
        // ratios 0.7 / 0.3, chi-square goodness of fit at alpha = 0.01
        let db = random_db(&[70, 30], 8, 3);
        let quads = sample_quadruplets(&db, 10_000, 5).unwrap();
        let n0 = quads.iter().filter(|q| db.label(q.query) == 0).count() as f64;
        let n1 = quads.len() as f64 - n0;
        let chi2 = (n0 - 7000.0).powi(2) / 7000.0 + (n1 - 3000.0).powi(2) / 3000.0;
        // upper 1% point of chi-square with 1 degree of freedom
        const CHI2_CRIT_DF1_P01: f64 = 6.634896601021213;
        assert!(
            chi2 < CHI2_CRIT_DF1_P01,
            "chi-square statistic {chi2} rejects the multinomial law"
        );
    }

    #[test]
    fn exhaustion_on_a_tiny_database() {
        // 6 samples admit only 36 distinct quadruplets
        let db = random_db(&[3, 3], 4, 4);
        let err = sample_quadruplets(&db, 100, 9).unwrap_err();
        assert!(matches!(err, Error::Exhausted(_)));
    }

    #[test]
    fn rejects_degenerate_databases() {
        let one_class = random_db(&[6], 4, 5);
        assert!(sample_quadruplets(&one_class, 1, 0).is_err());
        let all_small = random_db(&[2, 2, 2], 4, 6);
        assert!(sample_quadruplets(&all_small, 1, 0).is_err());
        let db = random_db(&[4, 4], 4, 7);
        assert!(sample_quadruplets(&db, 0, 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let db = random_db(&[10, 8, 6], 32, 8);
        let a = sample_quadruplets(&db, 300, 42).unwrap();
        let b = sample_quadruplets(&db, 300, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_quadruplets(&db, 300, 43).unwrap();
        assert_ne!(a, c);
        let ta = sample_triplets(&db, 300, 42).unwrap();
        let tb = sample_triplets(&db, 300, 42).unwrap();
        assert_eq!(ta, tb);
        assert_eq!(ta.seed(), 42);
    }

    #[test]
    fn batches_never_repeat_source_tuples() {
        let db = random_db(&[6, 5, 4], 8, 10);
        let quads = sample_quadruplets(&db, 400, 13).unwrap();
        let unique: HashSet<_> = quads.iter().map(|q| q.as_tuple()).collect();
        assert_eq!(unique.len(), quads.len());
    }

    #[test]
    fn triplet_conversion_matches_hand_xor() {
        let db = db_from(&[("0101", 0), ("1010", 1), ("0100", 0), ("0111", 0)]);
        let quad = Quadruplet {
            query: 0,
            dissimilar: 1,
            similar: [2, 3],
        };
        let batch = to_triplets(&db, &[quad]).unwrap();
        assert_eq!(batch.len(), 1);
        let t = &batch.triplets()[0];
        assert_eq!(t.dissimilar.to_string(), "1111");
        assert_eq!(t.similar_a.to_string(), "0001");
        assert_eq!(t.similar_b.to_string(), "0010");
        assert_eq!(batch.sources()[0], [0, 1, 2, 3]);
    }

    #[test]
    fn equal_codes_give_an_all_zero_acdv() {
        let db = db_from(&[("0101", 0), ("1010", 1), ("0101", 0), ("0111", 0)]);
        let quad = Quadruplet {
            query: 0,
            dissimilar: 1,
            similar: [2, 3],
        };
        let batch = to_triplets(&db, &[quad]).unwrap();
        assert_eq!(batch.triplets()[0].similar_a.popcount(), 0);
    }

    #[test]
    fn empty_quadruplet_list_gives_an_empty_batch() {
        let db = db_from(&[("01", 0), ("10", 1)]);
        let batch = to_triplets(&db, &[]).unwrap();
        assert!(batch.is_empty());
        assert_eq!(batch.bits(), 2);
    }

    #[test]
    fn conversion_rejects_bad_indices_and_labels() {
        let db = db_from(&[("0101", 0), ("1010", 1), ("0100", 0), ("0111", 0)]);
        let out_of_range = Quadruplet {
            query: 0,
            dissimilar: 9,
            similar: [2, 3],
        };
        assert!(to_triplets(&db, &[out_of_range]).is_err());
        let wrong_class = Quadruplet {
            query: 0,
            dissimilar: 2, // same class as the query
            similar: [1, 3],
        };
        assert!(to_triplets(&db, &[wrong_class]).is_err());
    }

    #[test]
    fn chunking_preserves_order_and_provenance() {
        let db = random_db(&[6, 6], 8, 12);
        let batch = sample_triplets(&db, 25, 3).unwrap();
        let chunks = batch.chunked(10);
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[2].len(), 5);
        let rejoined: Vec<_> = chunks
            .iter()
            .flat_map(|c| c.triplets().iter().cloned())
            .collect();
        assert_eq!(rejoined, batch.triplets());
        for c in &chunks {
            assert_eq!(c.seed(), batch.seed());
        }
    }
}
