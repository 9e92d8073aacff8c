//! Nearest-centroid classifier on 28×28 box-averaged, L2-normalized percepts.

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Scalar;

pub const FEATURE_SIDE: usize = 28;

pub fn featurize<T: Scalar>(img: &Raster<T>) -> Result<Vec<f64>> {
    let small = img.box_downscale(FEATURE_SIDE, FEATURE_SIDE)?;
    let mut v: Vec<f64> = small.data().iter().map(|x| x.as_f64()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Centroids {
    centroids: Vec<Vec<f64>>,
}

impl Centroids {
    /// Mean feature vector per class for classes `0..n_classes`.
    pub fn fit(features: &[Vec<f64>], labels: &[usize], n_classes: usize) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature vectors for {} labels",
                features.len(),
                labels.len()
            )));
        }
        let dim = features.first().map_or(0, Vec::len);
        if features.iter().any(|f| f.len() != dim) {
            return Err(Error::DimensionMismatch("feature vectors differ in length".into()));
        }
        let mut sums = vec![vec![0.0; dim]; n_classes];
        let mut counts = vec![0usize; n_classes];
        for (f, &label) in features.iter().zip(labels) {
            if label >= n_classes {
                return Err(Error::IndexOutOfRange {
                    index: label,
                    len: n_classes,
                });
            }
            counts[label] += 1;
            sums[label].iter_mut().zip(f).for_each(|(s, x)| *s += x);
        }
        if let Some(missing) = counts.iter().position(|&n| n == 0) {
            return Err(Error::MissingClass(missing));
        }
        for (s, &n) in sums.iter_mut().zip(&counts) {
            s.iter_mut().for_each(|x| *x /= n as f64);
        }
        Ok(Centroids { centroids: sums })
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    /// Class of the nearest centroid; ties go to the lowest class id.
    pub fn classify(&self, feature: &[f64]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (class, c) in self.centroids.iter().enumerate() {
            let d: f64 = c.iter().zip(feature).map(|(a, b)| (a - b) * (a - b)).sum();
            if d < best.1 {
                best = (class, d);
            }
        }
        best.0
    }
}

/// Featurizes training percepts and fits centroids.
pub fn fit_centroids<T: Scalar>(train: &[Raster<T>], labels: &[usize], n_classes: usize) -> Result<Centroids> {
    let features = train.iter().map(featurize).collect::<Result<Vec<_>>>()?;
    Centroids::fit(&features, labels, n_classes)
}

pub fn classify<T: Scalar>(img: &Raster<T>, centroids: &Centroids) -> Result<usize> {
    Ok(centroids.classify(&featurize(img)?))
}
