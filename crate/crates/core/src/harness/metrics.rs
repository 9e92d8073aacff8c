use serde::Serialize;

use crate::percept::PerceptFrame;
use crate::scalar::Scalar;

pub const COVERAGE_THRESHOLD: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PerceptMetrics {
    /// Population standard deviation of the peak-normalized raster.
    pub rms_contrast: f64,
    /// Fraction of pixels above 0.05 after peak normalization.
    pub coverage: f64,
}

pub fn percept_metrics<T: Scalar>(frame: &PerceptFrame<T>) -> PerceptMetrics {
    let norm = frame.normalized();
    let vals = norm.data();
    let n = vals.len() as f64;
    let mean = vals.iter().map(|v| v.as_f64()).sum::<f64>() / n;
    let var = vals.iter().map(|v| (v.as_f64() - mean).powi(2)).sum::<f64>() / n;
    let covered = vals.iter().filter(|v| v.as_f64() > COVERAGE_THRESHOLD).count();
    PerceptMetrics {
        rms_contrast: var.sqrt(),
        coverage: covered as f64 / n,
    }
}
