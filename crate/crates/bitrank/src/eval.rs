//! Retrieval evaluation: precision/recall curves, average precision, MAP.
//!
//! Rankings are scored against class labels: an entry is relevant when it
//! shares the query's class. AP follows the PASCAL VOC interpolation
//! (all-point by default, 11-point behind [`ApVariant`]), and MAP averages
//! AP over queries. A query equal to a database entry (same code and
//! label) has that one entry removed from its ranking before scoring so a
//! guaranteed self-match cannot inflate precision.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::prelude::*;
use rand_chacha::ChaCha12Rng;

use crate::code::{BinaryCode, CodeDatabase};
use crate::error::{Error, Result};
use crate::learner::BitWeights;
use crate::ranking::{scan_hamming, search, RankedList};

/// Precision/recall values at each rank position.
#[derive(Debug, Clone, PartialEq)]
pub struct PRCurve {
    points: Vec<(f64, f64)>,
}

impl PRCurve {
    /// `(recall, precision)` pairs, one per rank, recall non-decreasing.
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// AP interpolation variant; the paper's protocol is VOC-style and the
/// all-point (VOC 2010+) convention is the default everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ApVariant {
    #[default]
    AllPoint,
    ElevenPoint,
}

impl std::str::FromStr for ApVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all-point" | "all" => Ok(ApVariant::AllPoint),
            "eleven-point" | "11-point" => Ok(ApVariant::ElevenPoint),
            other => Err(Error::invalid_argument(format!(
                "unknown AP variant {other:?}, expected \"all-point\" or \"eleven-point\""
            ))),
        }
    }
}

/// How a ranking was scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceMode {
    Hamming,
    Weighted,
}

impl std::fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistanceMode::Hamming => "hamming",
            DistanceMode::Weighted => "weighted",
        })
    }
}

/// Descriptive fields attached to a report for CSV emission.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportMeta {
    pub code_kind: String,
    pub bits: usize,
    pub mode: DistanceMode,
}

/// Evaluation result over a query set.
///
/// Equality compares the evaluative content (APs, MAP, averaged curve,
/// skip count) and ignores the descriptive [`ReportMeta`], so reports from
/// unit-weighted and unweighted runs over the same data compare equal.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub per_query_ap: Vec<f64>,
    pub map: f64,
    pub avg_pr: PRCurve,
    /// Queries dropped because no other database entry shares their label.
    pub skipped_queries: usize,
    pub meta: ReportMeta,
}

impl PartialEq for EvalReport {
    fn eq(&self, other: &Self) -> bool {
        self.per_query_ap == other.per_query_ap
            && self.map == other.map
            && self.avg_pr == other.avg_pr
            && self.skipped_queries == other.skipped_queries
    }
}

impl EvalReport {
    pub fn with_code_kind(mut self, kind: impl Into<String>) -> Self {
        self.meta.code_kind = kind.into();
        self
    }
}

/// Marks each ranked entry as relevant (shares the query's class) or not.
/// The ranking must already have the query itself removed.
pub fn relevance(ranked: &RankedList, db: &CodeDatabase, query_label: u32) -> Result<Vec<bool>> {
    ranked
        .indices()
        .map(|i| {
            db.labels().get(i).copied().map(|l| l == query_label).ok_or_else(|| {
                Error::invalid_argument(format!(
                    "ranked index {i} out of range for a database of {} codes",
                    db.len()
                ))
            })
        })
        .collect()
}

fn check_relevance_args(rel: &[bool], total_relevant: usize) -> Result<()> {
    if total_relevant == 0 {
        return Err(Error::invalid_argument("total_relevant must be at least 1"));
    }
    let hits = rel.iter().filter(|&&r| r).count();
    if hits > total_relevant {
        return Err(Error::invalid_argument(format!(
            "{hits} relevant entries in the ranking but total_relevant is {total_relevant}"
        )));
    }
    Ok(())
}

/// Precision and recall at every rank: `P@i = hits(i)/i`,
/// `R@i = hits(i)/total_relevant`.
pub fn pr_curve(rel: &[bool], total_relevant: usize) -> Result<PRCurve> {
    check_relevance_args(rel, total_relevant)?;
    let mut points = Vec::with_capacity(rel.len());
    let mut hits = 0usize;
    for (i, &r) in rel.iter().enumerate() {
        if r {
            hits += 1;
        }
        points.push((
            hits as f64 / total_relevant as f64,
            hits as f64 / (i + 1) as f64,
        ));
    }
    Ok(PRCurve { points })
}

/// Interpolated average precision with the default all-point variant.
pub fn average_precision(rel: &[bool], total_relevant: usize) -> Result<f64> {
    average_precision_with(ApVariant::AllPoint, rel, total_relevant)
}

/// Interpolated average precision.
///
/// All-point: for each of the `total_relevant` recall steps, the precision
/// is interpolated as the maximum precision at any recall at or beyond the
/// step; unreached steps contribute zero. Eleven-point: the mean of the
/// interpolated precisions at recall levels 0.0, 0.1, ..., 1.0.
pub fn average_precision_with(
    variant: ApVariant,
    rel: &[bool],
    total_relevant: usize,
) -> Result<f64> {
    check_relevance_args(rel, total_relevant)?;
    let n = rel.len();
    let mut precision = Vec::with_capacity(n);
    let mut recall = Vec::with_capacity(n);
    let mut hits = 0usize;
    for (i, &r) in rel.iter().enumerate() {
        if r {
            hits += 1;
        }
        precision.push(hits as f64 / (i + 1) as f64);
        recall.push(hits as f64 / total_relevant as f64);
    }
    // max precision at any rank >= i
    let mut interpolated = precision.clone();
    for i in (0..n.saturating_sub(1)).rev() {
        interpolated[i] = interpolated[i].max(interpolated[i + 1]);
    }

    match variant {
        ApVariant::AllPoint => {
            let mut total = 0.0;
            for (i, &r) in rel.iter().enumerate() {
                if r {
                    total += interpolated[i];
                }
            }
            Ok(total / total_relevant as f64)
        }
        ApVariant::ElevenPoint => {
            let mut total = 0.0;
            for level in 0..=10 {
                let level = level as f64 / 10.0;
                let p = recall
                    .iter()
                    .zip(&interpolated)
                    .find(|(&r, _)| r >= level - 1e-9)
                    .map_or(0.0, |(_, &p)| p);
                total += p;
            }
            Ok(total / 11.0)
        }
    }
}

/// Evaluates a query set against a database: full ranking per query
/// (weighted when `weights` is given, standard Hamming otherwise),
/// per-query AP, their mean as MAP, and the positionwise-averaged PR
/// curve truncated to the shortest ranking.
///
/// A query whose label has no other database entry is skipped and counted
/// in [`EvalReport::skipped_queries`].
pub fn evaluate(
    queries: &[(BinaryCode, u32)],
    db: &CodeDatabase,
    weights: Option<&BitWeights>,
) -> Result<EvalReport> {
    evaluate_with(ApVariant::AllPoint, queries, db, weights)
}

/// [`evaluate`] with an explicit AP interpolation variant.
pub fn evaluate_with(
    variant: ApVariant,
    queries: &[(BinaryCode, u32)],
    db: &CodeDatabase,
    weights: Option<&BitWeights>,
) -> Result<EvalReport> {
    if queries.is_empty() {
        return Err(Error::invalid_argument("empty query set"));
    }
    if let Some(w) = weights {
        if w.len() != db.bits() {
            return Err(Error::LengthMismatch {
                left: w.len(),
                right: db.bits(),
            });
        }
    }

    let bits = db.bits();
    let mut per_query_ap = Vec::with_capacity(queries.len());
    let mut curves: Vec<PRCurve> = Vec::with_capacity(queries.len());
    let mut skipped = 0usize;

    for (qid, (query, label)) in queries.iter().enumerate() {
        let class_size = db.labels().iter().filter(|&&l| l == *label).count();
        let self_index = db
            .codes()
            .iter()
            .zip(db.labels())
            .position(|(code, l)| code == query && l == label);
        let total_relevant = class_size - usize::from(self_index.is_some());
        if total_relevant == 0 {
            skipped += 1;
            continue;
        }

        let ranked = match weights {
            Some(w) => search(query, db, w, bits as u32, db.len())?,
            None => scan_hamming(query, db, None, None)?,
        }
        .with_query_id(qid as u64);
        let ranked = match self_index {
            Some(i) => ranked.without_index(i),
            None => ranked,
        };

        let rel = relevance(&ranked, db, *label)?;
        per_query_ap.push(average_precision_with(variant, &rel, total_relevant)?);
        curves.push(pr_curve(&rel, total_relevant)?);
    }

    if per_query_ap.is_empty() {
        return Err(Error::invalid_argument("every query was skipped: no query label occurs in the database"));
    }

    // summing in sorted order keeps MAP independent of the query order
    let mut sorted = per_query_ap.clone();
    sorted.sort_by(f64::total_cmp);
    let map = sorted.iter().sum::<f64>() / sorted.len() as f64;

    let min_len = curves.iter().map(PRCurve::len).min().unwrap_or(0);
    let mut avg_points = Vec::with_capacity(min_len);
    for pos in 0..min_len {
        let (mut r_sum, mut p_sum) = (0.0, 0.0);
        for curve in &curves {
            let (r, p) = curve.points[pos];
            r_sum += r;
            p_sum += p;
        }
        avg_points.push((r_sum / curves.len() as f64, p_sum / curves.len() as f64));
    }

    Ok(EvalReport {
        per_query_ap,
        map,
        avg_pr: PRCurve { points: avg_points },
        skipped_queries: skipped,
        meta: ReportMeta {
            code_kind: "unknown".into(),
            bits,
            mode: match weights {
                Some(_) => DistanceMode::Weighted,
                None => DistanceMode::Hamming,
            },
        },
    })
}

/// Draws a per-class fraction of database entries as a query set (at
/// least one per class), deterministic in `seed`.
pub fn sample_queries(
    db: &CodeDatabase,
    fraction: f64,
    seed: u64,
) -> Result<Vec<(BinaryCode, u32)>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::invalid_argument(format!(
            "query fraction must be in [0, 1], got {fraction}"
        )));
    }
    let mut by_label = std::collections::BTreeMap::new();
    for (i, &label) in db.labels().iter().enumerate() {
        by_label.entry(label).or_insert_with(Vec::new).push(i);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut queries = Vec::new();
    for (label, mut members) in by_label {
        members.shuffle(&mut rng);
        let take = ((members.len() as f64 * fraction).round() as usize)
            .clamp(1, members.len());
        for &i in &members[..take] {
            queries.push((db.code(i).clone(), label));
        }
    }
    Ok(queries)
}

/// One `code_type,bits,mode,map` line of the summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub code_type: String,
    pub bits: usize,
    pub mode: String,
    pub map: f64,
}

impl SummaryRow {
    pub fn from_report(report: &EvalReport) -> Self {
        Self {
            code_type: report.meta.code_kind.clone(),
            bits: report.meta.bits,
            mode: report.meta.mode.to_string(),
            map: report.map,
        }
    }
}

/// Writes the averaged PR curve as CSV with header `rank,precision,recall`.
pub fn write_pr_csv(path: impl AsRef<Path>, curve: &PRCurve) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "rank,precision,recall")?;
    for (rank, (recall, precision)) in curve.points().iter().enumerate() {
        writeln!(out, "{},{},{}", rank + 1, precision, recall)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes summary rows as CSV with header `code_type,bits,mode,map`.
pub fn write_summary_csv(path: impl AsRef<Path>, rows: &[SummaryRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "code_type,bits,mode,map")?;
    for row in rows {
        writeln!(out, "{},{},{},{}", row.code_type, row.bits, row.mode, row.map)?;
    }
    out.flush()?;
    Ok(())
}
