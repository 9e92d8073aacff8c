//! Row-major 2-D rasters and the resampling operators used by the pipelines.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Luma weights for RGB → grayscale conversion.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

#[derive(Clone, Debug, PartialEq)]
pub struct Raster<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Raster<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "raster must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} raster needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::filled(rows, cols, T::zero())
    }

    pub fn filled(rows: usize, cols: usize, v: T) -> Self {
        assert!(rows > 0 && cols > 0, "raster must be at least 1x1");
        Self {
            rows,
            cols,
            data: vec![v; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(rows > 0 && cols > 0, "raster must be at least 1x1");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, v: T) {
        self.data[row * self.cols + col] = v;
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_value(&self) -> T {
        self.data.iter().fold(T::neg_infinity(), |m, &v| m.max(v))
    }

    /// All values within `[0, 1]` (and therefore finite).
    pub fn is_unit_range(&self) -> bool {
        self.data.iter().all(|&v| v >= T::zero() && v <= T::one())
    }

    /// Copy of the `height × width` block whose top-left corner is `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, height: usize, width: usize) -> Result<Self> {
        if row + height > self.rows || col + width > self.cols || height == 0 || width == 0 {
            return Err(Error::DimensionMismatch(format!(
                "crop {height}x{width} at ({row},{col}) exceeds {}x{} raster",
                self.rows, self.cols
            )));
        }
        let mut data = Vec::with_capacity(height * width);
        for r in row..row + height {
            let start = r * self.cols + col;
            data.extend_from_slice(&self.data[start..start + width]);
        }
        Ok(Self {
            rows: height,
            cols: width,
            data,
        })
    }

    /// Write `block` with its top-left corner at `(row, col)`.
    pub fn paste(&mut self, block: &Self, row: usize, col: usize) -> Result<()> {
        if row + block.rows > self.rows || col + block.cols > self.cols {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} block at ({row},{col}) exceeds {}x{} raster",
                block.rows, block.cols, self.rows, self.cols
            )));
        }
        for r in 0..block.rows {
            let dst = (row + r) * self.cols + col;
            self.data[dst..dst + block.cols].copy_from_slice(&block.data[r * block.cols..(r + 1) * block.cols]);
        }
        Ok(())
    }

    /// Area (box) downscale to `rows × cols`; both dimensions must divide evenly.
    pub fn box_downscale(&self, rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 || !self.rows.is_multiple_of(rows) || !self.cols.is_multiple_of(cols) {
            return Err(Error::DimensionMismatch(format!(
                "cannot box-average {}x{} to {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        let fr = self.rows / rows;
        let fc = self.cols / cols;
        let norm = T::from_usize_lossy(fr * fc);
        Ok(Self::from_fn(rows, cols, |r, c| {
            let mut acc = T::zero();
            for y in r * fr..(r + 1) * fr {
                for x in c * fc..(c + 1) * fc {
                    acc = acc + self.get(y, x);
                }
            }
            acc / norm
        }))
    }

    /// Bilinear resize with the pixel-center convention (`align_corners =
    /// false`): output pixel `d` samples source coordinate `(d + 0.5)·s − 0.5`
    /// with `s = in / out`, clamped to the valid range.
    pub fn resize_bilinear(&self, rows: usize, cols: usize) -> Self {
        let (ys, yw) = bilinear_taps::<T>(self.rows, rows);
        let (xs, xw) = bilinear_taps::<T>(self.cols, cols);
        Self::from_fn(rows, cols, |r, c| {
            let (y0, y1) = ys[r];
            let (x0, x1) = xs[c];
            let wy = yw[r];
            let wx = xw[c];
            let one = T::one();
            let top = self.get(y0, x0) * (one - wx) + self.get(y0, x1) * wx;
            let bot = self.get(y1, x0) * (one - wx) + self.get(y1, x1) * wx;
            top * (one - wy) + bot * wy
        })
    }
}

fn bilinear_taps<T: Scalar>(n_in: usize, n_out: usize) -> (Vec<(usize, usize)>, Vec<T>) {
    let scale = n_in as f64 / n_out as f64;
    let max = (n_in - 1) as f64;
    (0..n_out)
        .map(|d| {
            let src = ((d as f64 + 0.5) * scale - 0.5).clamp(0.0, max);
            let i0 = src.floor() as usize;
            let i1 = (i0 + 1).min(n_in - 1);
            ((i0, i1), T::lit(src - i0 as f64))
        })
        .unzip()
}
