//! Virtual electrode array and the mapping from images to stimuli.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{RetinalPoint, RetinalRect};
use crate::raster::Raster;
use crate::scalar::Scalar;

/// Default center-to-center electrode pitch, in micrometers.
pub const DEFAULT_SPACING_UM: f64 = 400.0;

/// A rectangular lattice of point electrodes. Electrode `(r, c)` sits at
/// `center + ((c − (cols−1)/2)·spacing, ((rows−1)/2 − r)·spacing)`; row 0 is
/// the superior row and positions are stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ElectrodeGrid<T> {
    rows: usize,
    cols: usize,
    spacing_um: T,
    center: RetinalPoint<T>,
    positions: Vec<RetinalPoint<T>>,
}

/// Serializable description of an [`ElectrodeGrid`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub spacing_um: f64,
    #[serde(default)]
    pub center: [f64; 2],
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            rows: 14,
            cols: 14,
            spacing_um: DEFAULT_SPACING_UM,
            center: [0.0, 0.0],
        }
    }
}

impl GridSpec {
    pub fn build<T: Scalar>(&self) -> Result<ElectrodeGrid<T>> {
        build_grid(
            self.rows,
            self.cols,
            T::lit(self.spacing_um),
            RetinalPoint::new(T::lit(self.center[0]), T::lit(self.center[1])),
        )
    }
}

pub fn build_grid<T: Scalar>(
    rows: usize,
    cols: usize,
    spacing_um: T,
    center: RetinalPoint<T>,
) -> Result<ElectrodeGrid<T>> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidParameter(format!(
            "electrode grid needs at least one row and column, got {rows}x{cols}"
        )));
    }
    if !(spacing_um > T::zero()) || !spacing_um.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "electrode spacing must be positive, got {spacing_um}"
        )));
    }
    if !center.is_finite() {
        return Err(Error::InvalidParameter("grid center must be finite".into()));
    }
    let half_c = T::from_usize_lossy(cols - 1) / T::lit(2.0);
    let half_r = T::from_usize_lossy(rows - 1) / T::lit(2.0);
    let mut positions = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            positions.push(RetinalPoint {
                x_um: center.x_um + (T::from_usize_lossy(c) - half_c) * spacing_um,
                y_um: center.y_um + (half_r - T::from_usize_lossy(r)) * spacing_um,
            });
        }
    }
    Ok(ElectrodeGrid {
        rows,
        cols,
        spacing_um,
        center,
        positions,
    })
}

impl<T: Scalar> ElectrodeGrid<T> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn spacing_um(&self) -> T {
        self.spacing_um
    }

    pub fn center(&self) -> RetinalPoint<T> {
        self.center
    }

    pub fn positions(&self) -> &[RetinalPoint<T>] {
        &self.positions
    }

    /// Bounding box of the electrode centers. A single electrode yields a
    /// zero-area box, so callers expand it before using it as a window.
    pub fn bounds(&self) -> (RetinalPoint<T>, RetinalPoint<T>) {
        let first = self.positions[0];
        let last = self.positions[self.positions.len() - 1];
        (
            RetinalPoint::new(first.x_um, last.y_um),
            RetinalPoint::new(last.x_um, first.y_um),
        )
    }

    /// Electrode bounding box expanded by `margin` on each side.
    pub fn window(&self, margin: T) -> Result<RetinalRect<T>> {
        let (lo, hi) = self.bounds();
        RetinalRect::new(lo.x_um - margin, hi.x_um + margin, lo.y_um - margin, hi.y_um + margin)
    }

    /// Row-major indices of electrodes whose lattice cell could lie within
    /// `radius` of `p`. A superset; callers still test the exact distance.
    pub fn candidates_near(&self, p: RetinalPoint<T>, radius: T) -> impl Iterator<Item = usize> + '_ {
        let half_c = T::from_usize_lossy(self.cols - 1) / T::lit(2.0);
        let half_r = T::from_usize_lossy(self.rows - 1) / T::lit(2.0);
        let fc = |x: T| (x - self.center.x_um) / self.spacing_um + half_c;
        let fr = |y: T| half_r - (y - self.center.y_um) / self.spacing_um;
        let lo_c = fc(p.x_um - radius).floor() - T::one();
        let hi_c = fc(p.x_um + radius).ceil() + T::one();
        let lo_r = fr(p.y_um + radius).floor() - T::one();
        let hi_r = fr(p.y_um - radius).ceil() + T::one();
        let range = |lo: T, hi: T, n: usize| -> (usize, usize) {
            let n_t = T::from_usize_lossy(n);
            if !(hi >= T::zero()) || !(lo < n_t) {
                return (0, 0);
            }
            let lo = lo.max(T::zero()).to_usize().unwrap_or(0);
            let hi = (hi + T::one()).min(n_t).to_usize().unwrap_or(0);
            (lo, hi.max(lo))
        };
        let (c0, c1) = range(lo_c, hi_c, self.cols);
        let (r0, r1) = range(lo_r, hi_r, self.rows);
        let cols = self.cols;
        (r0..r1).flat_map(move |r| (c0..c1).map(move |c| r * cols + c))
    }
}

/// Per-electrode activation amplitudes in `[0, 1]`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Stimulus<T> {
    amplitudes: Vec<T>,
}

impl<T: Scalar> Stimulus<T> {
    pub fn new(amplitudes: Vec<T>) -> Result<Self> {
        if let Some(bad) = amplitudes.iter().find(|&&a| !(a >= T::zero() && a <= T::one())) {
            return Err(Error::InvalidParameter(format!(
                "stimulus amplitude {bad} outside [0, 1]"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            amplitudes: vec![T::zero(); n],
        }
    }

    pub fn amplitudes(&self) -> &[T] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn total(&self) -> T {
        self.amplitudes.iter().copied().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.iter().all(|&a| a == T::zero())
    }

    pub fn check_grid(&self, grid: &ElectrodeGrid<T>) -> Result<()> {
        if self.len() != grid.len() {
            return Err(Error::DimensionMismatch(format!(
                "stimulus has {} amplitudes, grid has {} electrodes",
                self.len(),
                grid.len()
            )));
        }
        Ok(())
    }

    /// Inverse of [`stimulus_from_image`].
    pub fn to_raster(&self, grid: &ElectrodeGrid<T>) -> Result<Raster<T>> {
        self.check_grid(grid)?;
        Raster::new(grid.rows(), grid.cols(), self.amplitudes.clone())
    }
}

/// Identity mapping from pixel intensity to amplitude: electrode `i` takes the
/// row-major pixel `i`.
pub fn stimulus_from_image<T: Scalar>(img: &Raster<T>, grid: &ElectrodeGrid<T>) -> Result<Stimulus<T>> {
    if img.dims() != (grid.rows(), grid.cols()) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} raster does not match {}x{} electrode grid",
            img.rows(),
            img.cols(),
            grid.rows(),
            grid.cols()
        )));
    }
    Stimulus::new(img.data().to_vec())
}
