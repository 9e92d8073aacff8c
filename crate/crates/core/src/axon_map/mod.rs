//! Retinal nerve fiber bundles and the per-pixel soma map built on them.

mod cache;
mod soma;
mod trajectory;

use rayon::prelude::*;

pub use cache::{cache_key, load_axon_map, load_axon_map_for, save_axon_map, AXMP_MAGIC, AXMP_VERSION};
pub use soma::{assign_soma, SomaRef, VertexIndex};
pub use trajectory::{
    build_bundles, bundles_from_model, spiral_angle, AxonBundle, SpiralTrajectory, TrajectoryModel, TrajectoryParams,
};

use crate::error::{Error, Result};
use crate::geometry::RetinalRect;
use crate::scalar::Scalar;

/// Bundles plus the soma assigned to every pixel of a render raster.
#[derive(Clone, Debug, PartialEq)]
pub struct AxonMap<T> {
    params: TrajectoryParams,
    bundles: Vec<AxonBundle<T>>,
    render_window: RetinalRect<T>,
    render_dims: (usize, usize),
    soma_of_pixel: Vec<SomaRef>,
}

impl<T: Scalar> AxonMap<T> {
    /// Assembles a map from parts, checking every invariant.
    pub fn from_parts(
        params: TrajectoryParams,
        bundles: Vec<AxonBundle<T>>,
        render_window: RetinalRect<T>,
        render_dims: (usize, usize),
        soma_of_pixel: Vec<SomaRef>,
    ) -> Result<Self> {
        render_window.validate()?;
        let (rows, cols) = render_dims;
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "render dims must be >= 1x1, got {rows}x{cols}"
            )));
        }
        if soma_of_pixel.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} soma entries for a {rows}x{cols} raster",
                soma_of_pixel.len()
            )));
        }
        for s in &soma_of_pixel {
            let ok = bundles
                .get(s.bundle as usize)
                .is_some_and(|b| (s.vertex as usize) < b.len());
            if !ok {
                return Err(Error::IndexOutOfRange {
                    index: s.bundle as usize,
                    len: bundles.len(),
                });
            }
        }
        Ok(Self {
            params,
            bundles,
            render_window,
            render_dims,
            soma_of_pixel,
        })
    }

    pub fn params(&self) -> &TrajectoryParams {
        &self.params
    }

    pub fn bundles(&self) -> &[AxonBundle<T>] {
        &self.bundles
    }

    pub fn render_window(&self) -> &RetinalRect<T> {
        &self.render_window
    }

    pub fn render_dims(&self) -> (usize, usize) {
        self.render_dims
    }

    pub fn soma_of_pixel(&self) -> &[SomaRef] {
        &self.soma_of_pixel
    }

    /// Cache key of this map's inputs; see [`cache_key`].
    pub fn key(&self) -> u64 {
        cache_key(&self.params, &self.render_window.to_f64(), self.render_dims)
    }

    pub fn n_vertices(&self) -> usize {
        self.bundles.iter().map(|b| b.len()).sum()
    }
}

/// Spatial-hash cell size for a trajectory sampling step.
pub fn index_cell_um(params: &TrajectoryParams) -> f64 {
    140f64.max(params.dr_deg * params.um_per_deg)
}

pub fn build_axon_map<T: Scalar>(
    window: RetinalRect<T>,
    render_dims: (usize, usize),
    params: &TrajectoryParams,
) -> Result<AxonMap<T>> {
    build_axon_map_with(window, render_dims, &SpiralTrajectory::new(*params))
}

/// [`build_axon_map`] for any trajectory model. Pixels are assigned in
/// parallel; the result does not depend on the thread count.
pub fn build_axon_map_with<T: Scalar>(
    window: RetinalRect<T>,
    render_dims: (usize, usize),
    model: &dyn TrajectoryModel,
) -> Result<AxonMap<T>> {
    window.validate()?;
    let (rows, cols) = render_dims;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter(format!(
            "render dims must be >= 1x1, got {rows}x{cols}"
        )));
    }
    let params = *model.params();
    let bundles = bundles_from_model::<T>(model)?;
    let index = VertexIndex::new(&bundles, T::lit(index_cell_um(&params)))?;
    let soma_of_pixel: Vec<SomaRef> = (0..rows * cols)
        .into_par_iter()
        .map(|i| index.nearest(window.pixel_center(i / cols, i % cols, rows, cols)))
        .collect();
    AxonMap::from_parts(params, bundles, window, render_dims, soma_of_pixel)
}
