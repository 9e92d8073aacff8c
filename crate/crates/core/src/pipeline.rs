//! Fixation-based and downsampling-based stimulation pipelines.
//!
//! Fixation: each selected patch is encoded, delivered to the whole implant as
//! one "glance", simulated, box-averaged back to the patch footprint and
//! written into a canvas at the patch position. The canvas keeps raw
//! intensities; normalization happens once, globally, at render time.
//!
//! Downsampling: the whole image is bilinearly resized to the electrode grid,
//! encoded and simulated once.

use crate::axon_map::AxonMap;
use crate::encoding::{apply_encoder, EncoderSpec};
use crate::error::{Error, Result};
use crate::fixation::{extract_patch, select_fixations, FixationSet, PatchGrid, SaliencyMap};
use crate::implant::{stimulus_from_image, ElectrodeGrid, Stimulus};
use crate::percept::{compute_percept_reference, AxonPerceptModel, DecayKernel, DecayParams, PerceptFrame};
use crate::raster::Raster;
use crate::scalar::Scalar;

/// Anything that turns a stimulus into a percept over a fixed render raster.
pub trait PerceptOperator<T: Scalar>: Sync {
    fn percept(&self, stim: &Stimulus<T>) -> Result<PerceptFrame<T>>;
}

impl<T: Scalar, K: DecayKernel<T>> PerceptOperator<T> for AxonPerceptModel<'_, T, K> {
    fn percept(&self, stim: &Stimulus<T>) -> Result<PerceptFrame<T>> {
        self.evaluate(stim)
    }
}

/// The unpruned reference engine behind the [`PerceptOperator`] interface.
pub struct ReferenceOperator<'a, T> {
    pub grid: &'a ElectrodeGrid<T>,
    pub map: &'a AxonMap<T>,
    pub decay: DecayParams<T>,
}

impl<T: Scalar> PerceptOperator<T> for ReferenceOperator<'_, T> {
    fn percept(&self, stim: &Stimulus<T>) -> Result<PerceptFrame<T>> {
        compute_percept_reference(stim, self.grid, self.map, self.decay)
    }
}

/// Fixation canvas plus the fixations that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct FixationOutput<T> {
    /// Image-sized raster of raw intensities; its window is the retinal
    /// window each glance was rendered over.
    pub canvas: PerceptFrame<T>,
    pub fixations: FixationSet<T>,
}

/// Stimuli delivered for each selected patch, in fixation order.
pub fn fixation_stimuli<T: Scalar>(
    img: &Raster<T>,
    fix: &FixationSet<T>,
    enc: &EncoderSpec,
    grid: &ElectrodeGrid<T>,
    patches: &PatchGrid,
) -> Result<Vec<Stimulus<T>>> {
    fix.selected
        .iter()
        .map(|&idx| {
            let patch = extract_patch(img, idx, patches)?;
            stimulus_from_image(&apply_encoder(&patch, enc)?, grid)
        })
        .collect()
}

/// Runs the fixation pipeline through any percept operator.
pub fn fixation_pipeline_with<T: Scalar>(
    op: &dyn PerceptOperator<T>,
    img: &Raster<T>,
    sal: &SaliencyMap<T>,
    ratio: f64,
    enc: &EncoderSpec,
    grid: &ElectrodeGrid<T>,
    patches: &PatchGrid,
) -> Result<FixationOutput<T>> {
    let fixations = select_fixations(sal, ratio)?;
    let stimuli = fixation_stimuli(img, &fixations, enc, grid, patches)?;
    let side = patches.patch_px();
    let mut canvas = Raster::zeros(img.rows(), img.cols());
    let mut window = None;
    for (&idx, stim) in fixations.selected.iter().zip(&stimuli) {
        let frame = op.percept(stim)?;
        window.get_or_insert(*frame.render_window());
        let (rows, cols) = frame.dims();
        if rows % side != 0 || cols % side != 0 {
            return Err(Error::DimensionMismatch(format!(
                "percept raster {rows}x{cols} does not box-average to the {side}x{side} patch footprint"
            )));
        }
        if stim.is_zero() {
            continue;
        }
        let small = frame.intensities().box_downscale(side, side)?;
        let (r, c) = patches.origin(idx);
        canvas.paste(&small, r, c)?;
    }
    // k >= 1 is guaranteed by select_fixations.
    let canvas = PerceptFrame::new(canvas, window.unwrap())?;
    Ok(FixationOutput { canvas, fixations })
}

/// Runs the downsampling pipeline through any percept operator.
pub fn downsampling_pipeline_with<T: Scalar>(
    op: &dyn PerceptOperator<T>,
    img: &Raster<T>,
    enc: &EncoderSpec,
    grid: &ElectrodeGrid<T>,
) -> Result<PerceptFrame<T>> {
    let small = img.resize_bilinear(grid.rows(), grid.cols());
    let stim = stimulus_from_image(&apply_encoder(&small, enc)?, grid)?;
    op.percept(&stim)
}

/// Fixation pipeline on the pruned engine with the default 224/14 patch grid.
#[allow(clippy::too_many_arguments)]
pub fn run_fixation_pipeline<T: Scalar>(
    img: &Raster<T>,
    sal: &SaliencyMap<T>,
    ratio: f64,
    enc: &EncoderSpec,
    grid: &ElectrodeGrid<T>,
    map: &AxonMap<T>,
    decay: DecayParams<T>,
    prune_sigma: T,
) -> Result<FixationOutput<T>> {
    let model = AxonPerceptModel::new(grid, map, decay, prune_sigma)?;
    fixation_pipeline_with(&model, img, sal, ratio, enc, grid, &PatchGrid::default())
}

pub fn run_downsampling_pipeline<T: Scalar>(
    img: &Raster<T>,
    enc: &EncoderSpec,
    grid: &ElectrodeGrid<T>,
    map: &AxonMap<T>,
    decay: DecayParams<T>,
    prune_sigma: T,
) -> Result<PerceptFrame<T>> {
    let model = AxonPerceptModel::new(grid, map, decay, prune_sigma)?;
    downsampling_pipeline_with(&model, img, enc, grid)
}
