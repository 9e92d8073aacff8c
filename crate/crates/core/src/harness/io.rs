use std::fs;
use std::path::Path;

use image::{DynamicImage, GrayImage};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::raster::{Raster, LUMA_WEIGHTS};

/// Loads any supported image as luma in `[0, 1]`. Colour images are reduced
/// with the Rec. 601 weights; 8-bit gray is read exactly as `v / 255`.
pub fn load_gray(path: impl AsRef<Path>) -> Result<Raster<f64>> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data = match img {
        DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        other => other
            .to_rgb32f()
            .pixels()
            .map(|p| {
                let y: f64 = p.0.iter().zip(LUMA_WEIGHTS).map(|(&c, w)| c as f64 * w).sum();
                y.clamp(0.0, 1.0)
            })
            .collect(),
    };
    Raster::new(h, w, data)
}

pub fn save_png(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    img.save_with_format(path, image::ImageFormat::Png)
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
}

pub fn create_dir(path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

pub fn write_json<V: Serialize>(value: &V, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::percept::raster_to_gray;

    #[test]
    fn gray_png_round_trip_is_exact_on_the_8bit_lattice() {
        let dir = tempfile::tempdir().unwrap();
        let img = Raster::from_fn(5, 7, |r, c| ((r * 7 + c) * 7) as f64 / 255.0);
        let path = dir.path().join("sub/a.png");
        save_png(&raster_to_gray(&img), &path).unwrap();
        assert_eq!(load_gray(&path).unwrap(), img);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_gray("/nonexistent/x.png").unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn garbage_file_is_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.png");
        fs::write(&path, b"not a png at all").unwrap();
        assert_eq!(load_gray(&path).unwrap_err().exit_code(), 4);
    }
}
