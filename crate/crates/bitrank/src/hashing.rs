//! Binary code generation from real-valued features: LSH and ITQ.
//!
//! Both methods share one encoding rule: bit k of a sample x is 1 iff
//! `((x - mean) * projection * rotation)_k >= 0`. LSH draws the projection
//! columns from a seeded standard normal and keeps the identity rotation;
//! ITQ projects onto the top principal directions and then alternates
//! between binarizing and re-solving the orthogonal rotation that minimizes
//! the quantization loss `||B - V R||_F^2`.
//!
//! Ties at exactly zero binarize to 1, so encoding is deterministic.

use nalgebra::{DMatrix, DVector};
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::code::{BinaryCode, CodeDatabase, MAX_BITS};
use crate::error::{Error, Result};

/// Frobenius-norm bound on `R^T R - I` for a valid rotation.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

/// N samples of D real-valued features, with optional class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: DMatrix<f64>,
    labels: Option<Vec<u32>>,
}

impl FeatureMatrix {
    pub fn new(data: DMatrix<f64>, labels: Option<Vec<u32>>) -> Result<Self> {
        if data.nrows() == 0 || data.ncols() == 0 {
            return Err(Error::invalid_argument(format!(
                "feature matrix must be non-empty, got {}x{}",
                data.nrows(),
                data.ncols()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_argument("feature matrix contains a non-finite value"));
        }
        if let Some(labels) = &labels {
            if labels.len() != data.nrows() {
                return Err(Error::invalid_argument(format!(
                    "{} rows but {} labels",
                    data.nrows(),
                    labels.len()
                )));
            }
        }
        Ok(Self { data, labels })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Option<Vec<u32>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid_argument("no feature rows"));
        }
        let dim = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::invalid_argument(format!(
                    "row {i} has {} values, expected {dim}",
                    row.len()
                )));
            }
        }
        let data = DMatrix::from_fn(rows.len(), dim, |r, c| rows[r][c]);
        Self::new(data, labels)
    }

    /// Number of samples N.
    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        false // N >= 1 by construction
    }

    /// Feature dimension D.
    pub fn dim(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Z-scores each column: subtract the column mean and divide by the
    /// sample standard deviation. Zero-variance columns are centered only.
    pub fn standardized(&self) -> FeatureMatrix {
        let n = self.len() as f64;
        let mut data = self.data.clone();
        for c in 0..data.ncols() {
            let col_mean = data.column(c).sum() / n;
            let var = if self.len() > 1 {
                data.column(c).iter().map(|v| (v - col_mean).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            let scale = if var > 0.0 { var.sqrt() } else { 1.0 };
            for r in 0..data.nrows() {
                data[(r, c)] = (data[(r, c)] - col_mean) / scale;
            }
        }
        FeatureMatrix {
            data,
            labels: self.labels.clone(),
        }
    }

    /// Shuffles the rows with the seeded RNG and splits them into two
    /// halves (the first gets the odd row when N is odd).
    pub fn split_even(&self, seed: u64) -> (FeatureMatrix, FeatureMatrix) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.shuffle(&mut ChaCha12Rng::seed_from_u64(seed));
        let cut = self.len().div_ceil(2);
        let take = |idxs: &[usize]| {
            let data = DMatrix::from_fn(idxs.len(), self.dim(), |r, c| self.data[(idxs[r], c)]);
            let labels = self
                .labels
                .as_ref()
                .map(|ls| idxs.iter().map(|&i| ls[i]).collect());
            FeatureMatrix { data, labels }
        };
        (take(&order[..cut]), take(&order[cut..]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HashKind {
    Lsh,
    Itq,
}

impl std::fmt::Display for HashKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            HashKind::Lsh => "lsh",
            HashKind::Itq => "itq",
        })
    }
}

impl std::str::FromStr for HashKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lsh" => Ok(HashKind::Lsh),
            "itq" => Ok(HashKind::Itq),
            other => Err(Error::invalid_argument(format!(
                "unknown hash kind {other:?}, expected \"lsh\" or \"itq\""
            ))),
        }
    }
}

/// A trained hash function: centering mean, D x K projection and K x K
/// orthogonal rotation (identity for LSH).
#[derive(Debug, Clone, PartialEq)]
pub struct HashModel {
    kind: HashKind,
    mean: DVector<f64>,
    projection: DMatrix<f64>,
    rotation: DMatrix<f64>,
    seed: u64,
}

impl HashModel {
    pub fn new(
        kind: HashKind,
        mean: DVector<f64>,
        projection: DMatrix<f64>,
        rotation: DMatrix<f64>,
        seed: u64,
    ) -> Result<Self> {
        let (d, k) = (projection.nrows(), projection.ncols());
        if d == 0 || k == 0 || k > MAX_BITS {
            return Err(Error::invalid_argument(format!(
                "projection must be D x K with K in 1..={MAX_BITS}, got {d}x{k}"
            )));
        }
        if mean.len() != d {
            return Err(Error::invalid_argument(format!(
                "mean has {} entries, expected {d}",
                mean.len()
            )));
        }
        if rotation.nrows() != k || rotation.ncols() != k {
            return Err(Error::invalid_argument(format!(
                "rotation must be {k}x{k}, got {}x{}",
                rotation.nrows(),
                rotation.ncols()
            )));
        }
        if mean.iter().any(|v| !v.is_finite())
            || projection.iter().any(|v| !v.is_finite())
            || rotation.iter().any(|v| !v.is_finite())
        {
            return Err(Error::invalid_argument("hash model contains a non-finite value"));
        }
        let residual = rotation.transpose() * &rotation - DMatrix::identity(k, k);
        if residual.norm() >= ORTHOGONALITY_TOL {
            return Err(Error::invalid_argument(format!(
                "rotation is not orthogonal: ||R^T R - I|| = {}",
                residual.norm()
            )));
        }
        for c in 0..k {
            if projection.column(c).iter().all(|&v| v == 0.0) {
                return Err(Error::invalid_argument(format!(
                    "projection column {c} is all zero"
                )));
            }
        }
        Ok(Self {
            kind,
            mean,
            projection,
            rotation,
            seed,
        })
    }

    pub fn kind(&self) -> HashKind {
        self.kind
    }

    /// Feature dimension D accepted by the model.
    pub fn dim(&self) -> usize {
        self.projection.nrows()
    }

    /// Code length K produced by the model.
    pub fn bits(&self) -> usize {
        self.projection.ncols()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn column_means(data: &DMatrix<f64>) -> DVector<f64> {
    let n = data.nrows() as f64;
    DVector::from_fn(data.ncols(), |c, _| data.column(c).sum() / n)
}

fn centered(data: &DMatrix<f64>, mean: &DVector<f64>) -> DMatrix<f64> {
    let mut out = data.clone();
    for r in 0..out.nrows() {
        for c in 0..out.ncols() {
            out[(r, c)] -= mean[c];
        }
    }
    out
}

fn check_bits(bits: usize) -> Result<()> {
    if bits == 0 || bits > MAX_BITS {
        return Err(Error::invalid_argument(format!(
            "bit count must be in 1..={MAX_BITS}, got {bits}"
        )));
    }
    Ok(())
}

/// Trains an LSH model: the projection columns are i.i.d. standard normal
/// draws from the seeded generator and the rotation is the identity.
pub fn train_lsh(features: &FeatureMatrix, bits: usize, seed: u64) -> Result<HashModel> {
    check_bits(bits)?;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let d = features.dim();
    let mut projection = DMatrix::zeros(d, bits);
    for c in 0..bits {
        for r in 0..d {
            projection[(r, c)] = rng.sample(StandardNormal);
        }
    }
    HashModel::new(
        HashKind::Lsh,
        column_means(features.data()),
        projection,
        DMatrix::identity(bits, bits),
        seed,
    )
}

/// Flips each eigenvector so its largest-magnitude component is positive,
/// making the PCA basis unique.
fn canonicalize_column_sign(m: &mut DMatrix<f64>, c: usize) {
    let col = m.column(c);
    let mut lead = 0;
    let mut best = f64::NEG_INFINITY;
    for (i, &v) in col.iter().enumerate() {
        if v.abs() > best {
            best = v.abs();
            lead = i;
        }
    }
    if m[(lead, c)] < 0.0 {
        for r in 0..m.nrows() {
            m[(r, c)] = -m[(r, c)];
        }
    }
}

/// Random orthogonal matrix: QR of a seeded Gaussian matrix with the sign
/// of each column fixed by the R diagonal.
fn random_rotation(k: usize, rng: &mut ChaCha12Rng) -> DMatrix<f64> {
    let gaussian = DMatrix::from_fn(k, k, |_, _| rng.sample(StandardNormal));
    let qr = gaussian.qr();
    let r_diag: Vec<f64> = (0..k).map(|i| qr.r()[(i, i)]).collect();
    let mut q = qr.q();
    for (c, &d) in r_diag.iter().enumerate() {
        if d < 0.0 {
            for r in 0..k {
                q[(r, c)] = -q[(r, c)];
            }
        }
    }
    q
}

/// Trains an ITQ model and returns it with the per-iteration quantization
/// loss `||B - V R||_F^2`, which is non-increasing by construction.
pub fn train_itq(
    features: &FeatureMatrix,
    bits: usize,
    iters: usize,
    seed: u64,
) -> Result<(HashModel, Vec<f64>)> {
    check_bits(bits)?;
    let (n, d) = (features.len(), features.dim());
    if bits > d {
        return Err(Error::invalid_argument(format!(
            "ITQ needs K <= D, got K = {bits} and D = {d}"
        )));
    }
    if n <= bits {
        return Err(Error::invalid_argument(format!(
            "ITQ needs more samples than bits, got N = {n} and K = {bits}"
        )));
    }
    if iters == 0 {
        return Err(Error::invalid_argument("ITQ needs at least one iteration"));
    }

    let mean = column_means(features.data());
    let centered = centered(features.data(), &mean);
    let covariance = centered.transpose() * &centered / (n as f64 - 1.0);

    let eigen = covariance.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let max_eig = eigen.eigenvalues[order[0]];
    let threshold = max_eig.max(0.0) * 1e-10;
    let positive = order
        .iter()
        .filter(|&&i| eigen.eigenvalues[i] > threshold)
        .count();
    if max_eig <= 0.0 || positive < bits {
        return Err(Error::invalid_argument(format!(
            "covariance has only {positive} positive eigenvalues, need {bits}"
        )));
    }

    let mut projection = DMatrix::zeros(d, bits);
    for (c, &src) in order.iter().take(bits).enumerate() {
        projection.set_column(c, &eigen.eigenvectors.column(src));
        canonicalize_column_sign(&mut projection, c);
    }

    let scores = &centered * &projection; // N x K
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut rotation = random_rotation(bits, &mut rng);
    let mut losses = Vec::with_capacity(iters);

    for _ in 0..iters {
        let rotated = &scores * &rotation;
        let binarized =
            DMatrix::from_fn(n, bits, |r, c| if rotated[(r, c)] >= 0.0 { 1.0 } else { -1.0 });

        // orthogonal Procrustes: R = U W^T for V^T B = U S W^T
        let svd = (scores.transpose() * &binarized).svd(true, true);
        let u = svd.u.as_ref().expect("SVD with U requested");
        let v_t = svd.v_t.as_ref().expect("SVD with V^T requested");
        rotation = u * v_t;

        let residual = &binarized - &scores * &rotation;
        losses.push(residual.norm_squared());
    }

    // The loss is invariant under flipping any rotation column together
    // with its code bit (ACDVs are unchanged by a global bit flip), so fix
    // the column signs the same way as the PCA basis.
    for c in 0..bits {
        canonicalize_column_sign(&mut rotation, c);
    }

    let model = HashModel::new(HashKind::Itq, mean, projection, rotation, seed)?;
    Ok((model, losses))
}

/// Encodes features with a model: bit k of row n is 1 iff the centered,
/// projected and rotated value is non-negative.
pub fn encode(model: &HashModel, features: &FeatureMatrix) -> Result<Vec<BinaryCode>> {
    if features.dim() != model.dim() {
        return Err(Error::invalid_argument(format!(
            "features have dimension {}, model expects {}",
            features.dim(),
            model.dim()
        )));
    }
    let scores = centered(features.data(), model.mean()) * model.projection() * model.rotation();
    let mut codes = Vec::with_capacity(features.len());
    for r in 0..features.len() {
        let bits: Vec<bool> = (0..model.bits()).map(|c| scores[(r, c)] >= 0.0).collect();
        codes.push(BinaryCode::from_bits(&bits)?);
    }
    Ok(codes)
}

/// Encodes labeled features straight into a [`CodeDatabase`].
pub fn encode_database(model: &HashModel, features: &FeatureMatrix) -> Result<CodeDatabase> {
    let labels = features
        .labels()
        .ok_or_else(|| Error::invalid_argument("features carry no labels"))?
        .to_vec();
    CodeDatabase::new(encode(model, features)?, labels)
}
