//! Seeded synthetic data for examples and desk-scale experiments.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::hashing::FeatureMatrix;

/// A mixture of Gaussian classes with a shared diagonal covariance.
///
/// Class centers are drawn from `N(0, center_spread^2)` in the first
/// `signal_dims` coordinates and are zero elsewhere; samples add noise of
/// standard deviation `noise` in the signal coordinates and
/// `nuisance_noise` in the rest. With `signal_dims == dim` the mixture is
/// isotropic. A small block of high-variance nuisance coordinates mimics
/// feature directions that carry no class information: random projections
/// that happen to sample them yield unreliable hash bits, which is the
/// situation bitwise weighting is designed to repair.
#[derive(Debug, Clone, Copy)]
pub struct GaussianMixture {
    pub classes: usize,
    pub per_class: usize,
    pub dim: usize,
    /// Leading coordinates in which class centers differ.
    pub signal_dims: usize,
    pub center_spread: f64,
    /// Sample noise in the signal coordinates.
    pub noise: f64,
    /// Sample noise in the remaining coordinates.
    pub nuisance_noise: f64,
}

impl GaussianMixture {
    /// Isotropic mixture: centers spread in every coordinate, one noise
    /// scale.
    pub fn isotropic(
        classes: usize,
        per_class: usize,
        dim: usize,
        center_spread: f64,
        noise: f64,
    ) -> Self {
        Self {
            classes,
            per_class,
            dim,
            signal_dims: dim,
            center_spread,
            noise,
            nuisance_noise: noise,
        }
    }

    /// Draws the full labeled data set, class-major, deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> FeatureMatrix {
        assert!(self.classes >= 1 && self.per_class >= 1 && self.dim >= 1);
        assert!(self.signal_dims <= self.dim);
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let centers: Vec<Vec<f64>> = (0..self.classes)
            .map(|_| {
                (0..self.dim)
                    .map(|d| {
                        if d < self.signal_dims {
                            self.center_spread * rng.sample::<f64, _>(StandardNormal)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();

        let n = self.classes * self.per_class;
        let mut data = DMatrix::zeros(n, self.dim);
        let mut labels = Vec::with_capacity(n);
        for (c, center) in centers.iter().enumerate() {
            for s in 0..self.per_class {
                let row = c * self.per_class + s;
                for (d, &center_d) in center.iter().enumerate() {
                    let sigma = if d < self.signal_dims {
                        self.noise
                    } else {
                        self.nuisance_noise
                    };
                    data[(row, d)] = center_d + sigma * rng.sample::<f64, _>(StandardNormal);
                }
                labels.push(c as u32);
            }
        }
        FeatureMatrix::new(data, Some(labels)).expect("generated features are finite")
    }

    /// Splits a class-major sample into per-class train/test parts:
    /// the first `train_per_class` samples of every class go to the
    /// train half.
    pub fn split_train_test(
        &self,
        features: &FeatureMatrix,
        train_per_class: usize,
    ) -> (FeatureMatrix, FeatureMatrix) {
        assert!(train_per_class < self.per_class);
        assert_eq!(features.len(), self.classes * self.per_class);
        let labels = features.labels().expect("mixture samples carry labels");
        let mut train = Vec::new();
        let mut train_labels = Vec::new();
        let mut test = Vec::new();
        let mut test_labels = Vec::new();
        for (r, &label) in labels.iter().enumerate() {
            let row: Vec<f64> = (0..features.dim()).map(|c| features.data()[(r, c)]).collect();
            if r % self.per_class < train_per_class {
                train.push(row);
                train_labels.push(label);
            } else {
                test.push(row);
                test_labels.push(label);
            }
        }
        (
            FeatureMatrix::from_rows(&train, Some(train_labels)).expect("valid rows"),
            FeatureMatrix::from_rows(&test, Some(test_labels)).expect("valid rows"),
        )
    }
}
