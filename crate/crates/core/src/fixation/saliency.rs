//! Patch saliency: reduction of externally computed attention maps, and a
//! Sobel edge-energy proxy for when no attention is available.

use super::tensor::Tensor;
use super::{PatchGrid, SaliencyMap};
use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Scalar;

/// Sums `[heads, n_patches]` attention over heads.
pub fn reduce_attention<T: Scalar>(att: &Tensor, grid: &PatchGrid) -> Result<SaliencyMap<T>> {
    let dims = att.dims();
    if dims.len() != 2 || dims[1] != grid.n_patches() {
        return Err(Error::DimensionMismatch(format!(
            "attention tensor must be [heads, {}], got {dims:?}",
            grid.n_patches()
        )));
    }
    let n = dims[1];
    let mut scores = vec![T::zero(); n];
    for head in att.data().chunks_exact(n) {
        for (s, &a) in scores.iter_mut().zip(head) {
            *s = *s + T::lit(a as f64);
        }
    }
    SaliencyMap::new(scores, grid)
}

/// Per-patch mean Sobel gradient magnitude, with replicate padding.
pub fn proxy_saliency<T: Scalar>(img: &Raster<T>, grid: &PatchGrid) -> Result<SaliencyMap<T>> {
    let n = grid.image_px();
    if img.dims() != (n, n) {
        return Err(Error::DimensionMismatch(format!(
            "saliency proxy expects a {n}x{n} image, got {}x{}",
            img.rows(),
            img.cols()
        )));
    }
    let at = |r: isize, c: isize| {
        let r = r.clamp(0, n as isize - 1) as usize;
        let c = c.clamp(0, n as isize - 1) as usize;
        img.get(r, c)
    };
    let two = T::lit(2.0);
    let side = grid.grid_side();
    let p = grid.patch_px();
    let mut scores = vec![T::zero(); grid.n_patches()];
    for r in 0..n {
        for c in 0..n {
            let (y, x) = (r as isize, c as isize);
            let gx = (at(y - 1, x + 1) + two * at(y, x + 1) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + two * at(y, x - 1) + at(y + 1, x - 1));
            let gy = (at(y + 1, x - 1) + two * at(y + 1, x) + at(y + 1, x + 1))
                - (at(y - 1, x - 1) + two * at(y - 1, x) + at(y - 1, x + 1));
            let idx = (r / p) * side + c / p;
            scores[idx] = scores[idx] + (gx * gx + gy * gy).sqrt();
        }
    }
    let area = T::from_usize_lossy(p * p);
    SaliencyMap::new(scores.into_iter().map(|s| s / area).collect(), grid)
}
