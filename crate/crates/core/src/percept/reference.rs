//! Unpruned reference evaluation of the axon-map and scoreboard models.
//! Straight nested loops; these define ground truth for the pruned engine.

use super::frame::{DecayParams, PerceptFrame};
use super::kernel::{DecayKernel, Gaussian};
use crate::axon_map::AxonMap;
use crate::error::{Error, Result};
use crate::geometry::{RetinalPoint, RetinalRect};
use crate::implant::{ElectrodeGrid, Stimulus};
use crate::raster::Raster;
use crate::scalar::Scalar;

pub fn compute_percept_reference<T: Scalar>(
    stim: &Stimulus<T>,
    grid: &ElectrodeGrid<T>,
    map: &AxonMap<T>,
    decay: DecayParams<T>,
) -> Result<PerceptFrame<T>> {
    compute_percept_reference_with(&Gaussian, stim, grid, map, decay)
}

pub fn compute_percept_reference_with<T: Scalar, K: DecayKernel<T>>(
    kernel: &K,
    stim: &Stimulus<T>,
    grid: &ElectrodeGrid<T>,
    map: &AxonMap<T>,
    decay: DecayParams<T>,
) -> Result<PerceptFrame<T>> {
    stim.check_grid(grid)?;
    decay.validate()?;
    let (rows, cols) = map.render_dims();
    let mut data = Vec::with_capacity(rows * cols);
    for soma in map.soma_of_pixel() {
        let bundle = &map.bundles()[soma.bundle as usize];
        let i = soma.vertex as usize;
        let mut best = T::zero();
        for j in 0..=i {
            let along = kernel.axonal(bundle.arc_um[i] - bundle.arc_um[j], decay.lambda_um);
            let mut sum = T::zero();
            for (amp, pos) in stim.amplitudes().iter().zip(grid.positions()) {
                sum = sum + *amp * kernel.radial(pos.dist_sq(&bundle.vertices[j]), decay.rho_um);
            }
            let term = along * sum;
            if term > best {
                best = term;
            }
        }
        data.push(best);
    }
    PerceptFrame::new(Raster::new(rows, cols, data)?, *map.render_window())
}

/// Radial-only intensity at one retinal point.
pub fn scoreboard_at<T: Scalar>(stim: &Stimulus<T>, grid: &ElectrodeGrid<T>, p: RetinalPoint<T>, rho_um: T) -> T {
    stim.amplitudes()
        .iter()
        .zip(grid.positions())
        .map(|(amp, pos)| *amp * Gaussian.radial(pos.dist_sq(&p), rho_um))
        .sum()
}

/// Radial-only percept: a sum of Gaussians centered on the electrodes,
/// sampled at pixel centers.
pub fn compute_percept_scoreboard<T: Scalar>(
    stim: &Stimulus<T>,
    grid: &ElectrodeGrid<T>,
    window: RetinalRect<T>,
    dims: (usize, usize),
    rho_um: T,
) -> Result<PerceptFrame<T>> {
    stim.check_grid(grid)?;
    window.validate()?;
    if !(rho_um > T::zero()) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {rho_um}")));
    }
    let (rows, cols) = dims;
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter(format!(
            "render dims must be >= 1x1, got {rows}x{cols}"
        )));
    }
    let img = Raster::from_fn(rows, cols, |r, c| {
        scoreboard_at(stim, grid, window.pixel_center(r, c, rows, cols), rho_um)
    });
    PerceptFrame::new(img, window)
}
