//! Patch-grid bookkeeping and salient patch selection ("fixations").

mod saliency;
mod tensor;

use serde::{Deserialize, Serialize};

pub use saliency::{proxy_saliency, reduce_attention};
pub use tensor::{load_tensor, save_tensor, Tensor, ATNF_MAGIC, ATNF_VERSION};

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Scalar;

/// Square image split into square patches, indexed row-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatchGrid {
    image_px: usize,
    patch_px: usize,
}

impl Default for PatchGrid {
    fn default() -> Self {
        Self {
            image_px: 224,
            patch_px: 14,
        }
    }
}

impl PatchGrid {
    pub fn new(image_px: usize, patch_px: usize) -> Result<Self> {
        if patch_px == 0 || image_px == 0 || !image_px.is_multiple_of(patch_px) {
            return Err(Error::InvalidParameter(format!(
                "patch size {patch_px} must divide image size {image_px}"
            )));
        }
        Ok(Self { image_px, patch_px })
    }

    pub fn image_px(&self) -> usize {
        self.image_px
    }

    pub fn patch_px(&self) -> usize {
        self.patch_px
    }

    pub fn grid_side(&self) -> usize {
        self.image_px / self.patch_px
    }

    pub fn n_patches(&self) -> usize {
        self.grid_side() * self.grid_side()
    }

    /// Top-left pixel `(row, col)` of patch `idx`.
    pub fn origin(&self, idx: usize) -> (usize, usize) {
        let side = self.grid_side();
        ((idx / side) * self.patch_px, (idx % side) * self.patch_px)
    }

    fn check_image<T: Scalar>(&self, img: &Raster<T>) -> Result<()> {
        if img.dims() != (self.image_px, self.image_px) {
            return Err(Error::DimensionMismatch(format!(
                "image is {}x{}, patch grid expects {}x{}",
                img.rows(),
                img.cols(),
                self.image_px,
                self.image_px
            )));
        }
        Ok(())
    }

    fn check_index(&self, idx: usize) -> Result<()> {
        if idx >= self.n_patches() {
            return Err(Error::IndexOutOfRange {
                index: idx,
                len: self.n_patches(),
            });
        }
        Ok(())
    }
}

/// One finite saliency score per patch, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyMap<T> {
    scores: Vec<T>,
}

impl<T: Scalar> SaliencyMap<T> {
    pub fn new(scores: Vec<T>, grid: &PatchGrid) -> Result<Self> {
        if scores.len() != grid.n_patches() {
            return Err(Error::DimensionMismatch(format!(
                "{} saliency scores for {} patches",
                scores.len(),
                grid.n_patches()
            )));
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::InvalidParameter("saliency scores must be finite".into()));
        }
        Ok(Self { scores })
    }

    pub fn scores(&self) -> &[T] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Selected patches in descending saliency (ties: lower index first).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixationSet<T> {
    pub selected: Vec<usize>,
    pub scores: Vec<T>,
    pub ratio: f64,
}

impl<T> FixationSet<T> {
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }
}

/// Number of patches kept at `ratio`: `floor(ratio · n)`.
pub fn fixation_count(ratio: f64, n_patches: usize) -> usize {
    (ratio * n_patches as f64).floor() as usize
}

pub fn select_fixations<T: Scalar>(sal: &SaliencyMap<T>, ratio: f64) -> Result<FixationSet<T>> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "fixation ratio must be in (0, 1], got {ratio}"
        )));
    }
    let n = sal.len();
    let k = fixation_count(ratio, n);
    if k == 0 {
        return Err(Error::EmptySelection { ratio, n_patches: n });
    }
    let s = sal.scores();
    let mut order: Vec<usize> = (0..n).collect();
    // Scores are finite, so partial_cmp is total here.
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap().then(a.cmp(&b)));
    order.truncate(k);
    Ok(FixationSet {
        scores: order.iter().map(|&i| s[i]).collect(),
        selected: order,
        ratio,
    })
}

pub fn extract_patch<T: Scalar>(img: &Raster<T>, idx: usize, grid: &PatchGrid) -> Result<Raster<T>> {
    grid.check_image(img)?;
    grid.check_index(idx)?;
    let (r, c) = grid.origin(idx);
    img.crop(r, c, grid.patch_px, grid.patch_px)
}

/// Inverse of extracting every patch: places `patches[i]` at patch `i`.
pub fn assemble_patches<T: Scalar>(patches: &[Raster<T>], grid: &PatchGrid) -> Result<Raster<T>> {
    if patches.len() != grid.n_patches() {
        return Err(Error::DimensionMismatch(format!(
            "{} patches for a grid of {}",
            patches.len(),
            grid.n_patches()
        )));
    }
    let mut out = Raster::zeros(grid.image_px, grid.image_px);
    for (i, p) in patches.iter().enumerate() {
        if p.dims() != (grid.patch_px, grid.patch_px) {
            return Err(Error::DimensionMismatch(format!(
                "patch {i} is {}x{}",
                p.rows(),
                p.cols()
            )));
        }
        let (r, c) = grid.origin(i);
        out.paste(p, r, c)?;
    }
    Ok(out)
}

/// Zeroes every pixel outside the selected patches; positions are kept.
pub fn mask_image<T: Scalar>(img: &Raster<T>, fix: &FixationSet<T>, grid: &PatchGrid) -> Result<Raster<T>> {
    grid.check_image(img)?;
    let mut out = Raster::zeros(img.rows(), img.cols());
    for &idx in &fix.selected {
        grid.check_index(idx)?;
        let (r, c) = grid.origin(idx);
        out.paste(&img.crop(r, c, grid.patch_px, grid.patch_px)?, r, c)?;
    }
    Ok(out)
}
