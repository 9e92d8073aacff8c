use image::GrayImage;

use super::frame::PerceptFrame;
use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Normalization {
    /// Divide by the frame's peak; an all-zero frame renders black.
    GlobalMax,
    /// Divide by a fixed scale and clamp to `[0, 1]`.
    FixedScale(f64),
}

/// Maps `[0, 1]` to `0..=255`, rounding half away from zero.
pub fn quantize_unit(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

pub fn raster_to_gray<T: Scalar>(img: &Raster<T>) -> GrayImage {
    GrayImage::from_fn(img.cols() as u32, img.rows() as u32, |x, y| {
        image::Luma([quantize_unit(img.get(y as usize, x as usize).as_f64())])
    })
}

pub fn render_percept<T: Scalar>(frame: &PerceptFrame<T>, normalization: Normalization) -> Result<GrayImage> {
    let scaled = match normalization {
        Normalization::GlobalMax => frame.normalized(),
        Normalization::FixedScale(s) => {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "fixed render scale must be positive, got {s}"
                )));
            }
            let s = T::lit(s);
            frame.intensities().map(|v| (v / s).min(T::one()))
        }
    };
    Ok(raster_to_gray(&scaled))
}
