//! Visual-field and retinal coordinate frames.
//!
//! Visual-field points are in degrees of eccentricity (x positive temporal for
//! a right eye, y positive superior). Retinal points are in micrometers and use
//! the same orientation; the map between them is a fixed linear magnification.
//! No scene-to-retina inversion is applied.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Retinal magnification of the human eye, in micrometers per degree.
pub const UM_PER_DEG: f64 = 280.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VisualFieldPoint<T> {
    pub x_deg: T,
    pub y_deg: T,
}

impl<T: Scalar> VisualFieldPoint<T> {
    pub fn new(x_deg: T, y_deg: T) -> Self {
        Self { x_deg, y_deg }
    }

    /// Finite and within ±90° on both axes.
    pub fn is_valid(&self) -> bool {
        let lim = T::lit(90.0);
        self.x_deg.is_finite() && self.y_deg.is_finite() && self.x_deg.abs() <= lim && self.y_deg.abs() <= lim
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RetinalPoint<T> {
    pub x_um: T,
    pub y_um: T,
}

impl<T: Scalar> RetinalPoint<T> {
    pub fn new(x_um: T, y_um: T) -> Self {
        Self { x_um, y_um }
    }

    pub fn is_finite(&self) -> bool {
        self.x_um.is_finite() && self.y_um.is_finite()
    }

    #[inline]
    pub fn dist_sq(&self, other: &Self) -> T {
        let dx = self.x_um - other.x_um;
        let dy = self.y_um - other.y_um;
        dx * dx + dy * dy
    }

    #[inline]
    pub fn dist(&self, other: &Self) -> T {
        self.dist_sq(other).sqrt()
    }
}

pub fn deg_to_um<T: Scalar>(p: VisualFieldPoint<T>) -> RetinalPoint<T> {
    deg_to_um_with(p, T::lit(UM_PER_DEG))
}

pub fn um_to_deg<T: Scalar>(p: RetinalPoint<T>) -> VisualFieldPoint<T> {
    um_to_deg_with(p, T::lit(UM_PER_DEG))
}

/// [`deg_to_um`] with an explicit magnification.
#[inline]
pub fn deg_to_um_with<T: Scalar>(p: VisualFieldPoint<T>, um_per_deg: T) -> RetinalPoint<T> {
    RetinalPoint {
        x_um: um_per_deg * p.x_deg,
        y_um: um_per_deg * p.y_deg,
    }
}

#[inline]
pub fn um_to_deg_with<T: Scalar>(p: RetinalPoint<T>, um_per_deg: T) -> VisualFieldPoint<T> {
    VisualFieldPoint {
        x_deg: p.x_um / um_per_deg,
        y_deg: p.y_um / um_per_deg,
    }
}

/// Axis-aligned rectangle on the retina, in micrometers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetinalRect<T> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Scalar> RetinalRect<T> {
    pub fn new(x_min: T, x_max: T, y_min: T, y_max: T) -> Result<Self> {
        let r = Self {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        r.validate()?;
        Ok(r)
    }

    /// Rectangle of the given size centered on `c`.
    pub fn centered(c: RetinalPoint<T>, width: T, height: T) -> Result<Self> {
        let two = T::lit(2.0);
        Self::new(
            c.x_um - width / two,
            c.x_um + width / two,
            c.y_um - height / two,
            c.y_um + height / two,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.x_max > self.x_min) || !(self.y_max > self.y_min) {
            return Err(Error::InvalidParameter(format!(
                "render window must have positive finite area, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> T {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> T {
        self.y_max - self.y_min
    }

    pub fn expand(&self, margin: T) -> Result<Self> {
        Self::new(
            self.x_min - margin,
            self.x_max + margin,
            self.y_min - margin,
            self.y_max + margin,
        )
    }

    /// Center of pixel `(row, col)` of a `rows × cols` raster covering this
    /// window. Row 0 is the top (superior) edge.
    #[inline]
    pub fn pixel_center(&self, row: usize, col: usize, rows: usize, cols: usize) -> RetinalPoint<T> {
        let half = T::lit(0.5);
        let fx = (T::from_usize_lossy(col) + half) / T::from_usize_lossy(cols);
        let fy = (T::from_usize_lossy(row) + half) / T::from_usize_lossy(rows);
        RetinalPoint {
            x_um: self.x_min + fx * self.width(),
            y_um: self.y_max - fy * self.height(),
        }
    }

    pub fn to_f64(&self) -> RetinalRect<f64> {
        RetinalRect {
            x_min: self.x_min.as_f64(),
            x_max: self.x_max.as_f64(),
            y_min: self.y_min.as_f64(),
            y_max: self.y_max.as_f64(),
        }
    }

    pub fn from_f64(r: &RetinalRect<f64>) -> Self {
        RetinalRect {
            x_min: T::lit(r.x_min),
            x_max: T::lit(r.x_max),
            y_min: T::lit(r.y_min),
            y_max: T::lit(r.y_max),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vf(x: f64, y: f64) -> VisualFieldPoint<f64> {
        VisualFieldPoint::new(x, y)
    }

    #[test]
    fn deg_to_um_examples() {
        assert_eq!(deg_to_um(vf(0.0, 0.0)), RetinalPoint::new(0.0, 0.0));
        assert_eq!(deg_to_um(vf(1.0, 0.0)), RetinalPoint::new(280.0, 0.0));
        assert_eq!(deg_to_um(vf(15.0, 2.0)), RetinalPoint::new(4200.0, 560.0));
    }

    #[test]
    fn um_to_deg_examples() {
        assert_eq!(um_to_deg(RetinalPoint::new(0.0, 0.0)), vf(0.0, 0.0));
        assert_eq!(um_to_deg(RetinalPoint::new(280.0, 0.0)), vf(1.0, 0.0));
        assert_eq!(um_to_deg(RetinalPoint::new(-560.0, 1400.0)), vf(-2.0, 5.0));
    }

    #[test]
    fn f32_frame_agrees() {
        let p = deg_to_um(VisualFieldPoint::<f32>::new(15.0, 2.0));
        assert_eq!((p.x_um, p.y_um), (4200.0, 560.0));
    }

    #[test]
    fn validity_bounds() {
        assert!(vf(90.0, -90.0).is_valid());
        assert!(!vf(90.5, 0.0).is_valid());
        assert!(!vf(f64::NAN, 0.0).is_valid());
    }

    #[test]
    fn pixel_centers_cover_window() {
        let w = RetinalRect::new(-100.0, 100.0, -50.0, 50.0).unwrap();
        let tl = w.pixel_center(0, 0, 2, 4);
        assert_eq!((tl.x_um, tl.y_um), (-75.0, 25.0));
        let br = w.pixel_center(1, 3, 2, 4);
        assert_eq!((br.x_um, br.y_um), (75.0, -25.0));
    }

    #[test]
    fn degenerate_window_rejected() {
        assert!(RetinalRect::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(RetinalRect::new(0.0, 1.0, 2.0, 1.0).is_err());
        assert!(RetinalRect::new(0.0, f64::INFINITY, 0.0, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip(x in -45.0f64..45.0, y in -45.0f64..45.0) {
            let back = um_to_deg(deg_to_um(vf(x, y)));
            prop_assert!((back.x_deg - x).abs() <= 1e-9 * x.abs().max(1e-300));
            prop_assert!((back.y_deg - y).abs() <= 1e-9 * y.abs().max(1e-300));
        }

        // Integer coordinates and power-of-two scales keep every product exact.
        #[test]
        fn linear_exact(x in -45i32..=45, y in -45i32..=45, e in -4i32..=4) {
            let a = 2f64.powi(e);
            let p = vf(x as f64, y as f64);
            let lhs = deg_to_um(vf(a * p.x_deg, a * p.y_deg));
            let rhs = deg_to_um(p);
            prop_assert_eq!(lhs, RetinalPoint::new(a * rhs.x_um, a * rhs.y_um));
        }

        #[test]
        fn linear_general(x in -45.0f64..45.0, y in -45.0f64..45.0, a in -2.0f64..2.0) {
            let lhs = deg_to_um(vf(a * x, a * y));
            let rhs = deg_to_um(vf(x, y));
            prop_assert!((lhs.x_um - a * rhs.x_um).abs() <= 1e-12 * rhs.x_um.abs().max(1.0));
            prop_assert!((lhs.y_um - a * rhs.y_um).abs() <= 1e-12 * rhs.y_um.abs().max(1.0));
        }
    }
}
