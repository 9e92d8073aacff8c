//! Seeded synthetic shape dataset and image-directory ingestion.
//!
//! Every image is drawn from its own SplitMix64 stream whose seed is derived
//! from `(seed, stream, index)`, so the dataset does not depend on iteration
//! order or on how many other images are generated.

use std::f64::consts::{FRAC_PI_4, PI};
use std::path::Path;

use rand::{Rng, RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::Deserialize;

use super::io::load_gray;
use crate::error::{Error, Result};
use crate::raster::Raster;

pub const IMAGE_PX: usize = 224;
pub const N_CLASSES: usize = 10;

pub const CLASS_NAMES: [&str; N_CLASSES] = [
    "disk",
    "ring",
    "square",
    "square_outline",
    "triangle",
    "plus",
    "x_cross",
    "horizontal_bar",
    "vertical_bar",
    "two_blob",
];

pub(crate) const STREAM_DATASET: u64 = 1;
pub(crate) const STREAM_SPLIT: u64 = 2;

/// Seed for the `index`-th draw of a named stream.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mixed = seed
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    SplitMix64::seed_from_u64(mixed).next_u64()
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub id: String,
    pub label: usize,
    pub image: Raster<f64>,
}

/// `10 · n_per_class` images; image `i` has class `i mod 10`.
pub fn generate_synthetic_dataset(n_per_class: usize, seed: u64) -> Result<Vec<Sample>> {
    if n_per_class == 0 {
        return Err(Error::InvalidParameter("n_per_class must be at least 1".into()));
    }
    Ok((0..n_per_class * N_CLASSES)
        .map(|i| {
            let label = i % N_CLASSES;
            let mut rng = SplitMix64::seed_from_u64(derive_seed(seed, STREAM_DATASET, i as u64));
            Sample {
                id: format!("img_{i:05}"),
                label,
                image: draw_shape(label, &mut rng),
            }
        })
        .collect())
}

/// Renders one white-on-black shape of class `label`, antialiased by 2×2
/// supersampling.
pub fn draw_shape(label: usize, rng: &mut impl Rng) -> Raster<f64> {
    let lo = IMAGE_PX as f64 * 0.25;
    let hi = IMAGE_PX as f64 * 0.75;
    let cx = rng.random_range(lo..hi);
    let cy = rng.random_range(lo..hi);
    let h = rng.random_range(40.0..=90.0) / 2.0;
    let theta = match label {
        0 | 1 => 0.0,
        9 => rng.random_range(0.0..PI),
        _ => rng.random_range(-PI / 12.0..PI / 12.0),
    };
    let (s, c) = theta.sin_cos();
    let inside = |x: f64, y: f64| {
        let (dx, dy) = (x - cx, y - cy);
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        shape_contains(label, u, v, h)
    };
    Raster::from_fn(IMAGE_PX, IMAGE_PX, |r, col| {
        let mut hits = 0;
        for (oy, ox) in [(0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)] {
            hits += inside(col as f64 + ox, r as f64 + oy) as u32;
        }
        hits as f64 / 4.0
    })
}

/// Shape membership in local coordinates, `v` pointing down.
fn shape_contains(label: usize, u: f64, v: f64, h: f64) -> bool {
    let r = u.hypot(v);
    let bar = 0.2 * h;
    match label {
        0 => r <= h,
        1 => r <= h && r >= 0.6 * h,
        2 => u.abs().max(v.abs()) <= 0.75 * h,
        3 => {
            let m = u.abs().max(v.abs());
            m <= 0.75 * h && m >= 0.5 * h
        }
        4 => {
            // Upward equilateral triangle with circumradius h.
            let y = -v;
            y >= -0.5 * h && 3f64.sqrt() * u.abs() + y <= h
        }
        5 => (u.abs() <= bar && v.abs() <= h) || (v.abs() <= bar && u.abs() <= h),
        6 => {
            let (s, c) = FRAC_PI_4.sin_cos();
            shape_contains(5, c * u + s * v, -s * u + c * v, h)
        }
        7 => u.abs() <= h && v.abs() <= bar,
        8 => u.abs() <= bar && v.abs() <= h,
        9 => (u - 0.6 * h).hypot(v) <= 0.35 * h || (u + 0.6 * h).hypot(v) <= 0.35 * h,
        _ => false,
    }
}

#[derive(Deserialize)]
struct LabelRow {
    id: String,
    label: usize,
}

/// Reads `labels.csv` (`id,label`) and `<id>.png` for each row from `dir`.
pub fn load_image_dir(dir: &Path) -> Result<Vec<Sample>> {
    let csv_path = dir.join("labels.csv");
    let mut rdr = csv::Reader::from_path(&csv_path).map_err(|source| Error::Csv {
        path: csv_path.clone(),
        source,
    })?;
    let mut out = Vec::new();
    for row in rdr.deserialize::<LabelRow>() {
        let row = row.map_err(|source| Error::Csv {
            path: csv_path.clone(),
            source,
        })?;
        if row.label >= N_CLASSES {
            return Err(Error::Config(format!(
                "label {} of {} is not in 0..{N_CLASSES}",
                row.label, row.id
            )));
        }
        let image = load_gray(dir.join(format!("{}.png", row.id)))?;
        if image.dims() != (IMAGE_PX, IMAGE_PX) {
            return Err(Error::DimensionMismatch(format!(
                "{} is {}x{}, expected {IMAGE_PX}x{IMAGE_PX}",
                row.id,
                image.rows(),
                image.cols()
            )));
        }
        out.push(Sample {
            id: row.id,
            label: row.label,
            image,
        });
    }
    out.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(out)
}

/// Stratified train/validation split. Within each class the samples are
/// shuffled by a derived seed and the first `round(train_fraction · n)` go to
/// training, keeping at least one sample on each side when `n ≥ 2`.
/// Returns sample indices, each list sorted ascending.
pub fn stratified_split(labels: &[usize], train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for class in 0..N_CLASSES {
        let mut members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.is_empty() {
            continue;
        }
        let mut rng = SplitMix64::seed_from_u64(derive_seed(seed, STREAM_SPLIT, class as u64));
        rand::seq::SliceRandom::shuffle(members.as_mut_slice(), &mut rng);
        let n = members.len();
        let n_train = if n == 1 {
            1
        } else {
            ((train_fraction * n as f64).round() as usize).clamp(1, n - 1)
        };
        train.extend_from_slice(&members[..n_train]);
        val.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    val.sort_unstable();
    Ok((train, val))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bytes() {
        let a = generate_synthetic_dataset(2, 11).unwrap();
        let b = generate_synthetic_dataset(2, 11).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_dataset(2, 12).unwrap();
        assert_ne!(a[0].image, c[0].image);
    }

    #[test]
    fn counts_and_uniform_labels() {
        let d = generate_synthetic_dataset(3, 0).unwrap();
        assert_eq!(d.len(), 30);
        let mut hist = [0; N_CLASSES];
        d.iter().for_each(|s| hist[s.label] += 1);
        assert_eq!(hist, [3; N_CLASSES]);
        assert!(generate_synthetic_dataset(0, 0).is_err());
    }

    #[test]
    fn label_histogram_over_thousand() {
        let mut hist = [0; N_CLASSES];
        (0..1000).for_each(|i| hist[i % N_CLASSES] += 1);
        assert_eq!(hist, [100; N_CLASSES]);
    }

    #[test]
    fn prefix_stable_when_growing() {
        // Image i keeps its pixels when more images are generated.
        let small = generate_synthetic_dataset(1, 5).unwrap();
        let big = generate_synthetic_dataset(2, 5).unwrap();
        assert_eq!(small[..], big[..10]);
    }

    #[test]
    fn shapes_are_nonempty_white_on_black_and_centered() {
        for s in generate_synthetic_dataset(5, 9).unwrap() {
            assert!(s.image.is_unit_range());
            let mass: f64 = s.image.data().iter().sum();
            assert!(mass > 50.0, "{} too small: {mass}", s.id);
            assert_eq!(s.image.get(0, 0), 0.0);
            assert_eq!(s.image.get(223, 223), 0.0);
        }
    }

    #[test]
    fn disk_area_matches_radius() {
        let mut rng = SplitMix64::seed_from_u64(1);
        // Draw the same parameters the renderer will draw.
        let mut probe = rng.clone();
        let img = draw_shape(0, &mut rng);
        let _cx: f64 = probe.random_range(56.0..168.0);
        let _cy: f64 = probe.random_range(56.0..168.0);
        let h = probe.random_range(40.0..=90.0) / 2.0;
        let area: f64 = img.data().iter().sum();
        let expect = PI * h * h;
        assert!((area - expect).abs() / expect < 0.03, "{area} vs {expect}");
    }

    #[test]
    fn plus_and_x_differ_by_rotation() {
        let h = 40.0;
        assert!(shape_contains(5, h * 0.9, 0.0, h));
        assert!(!shape_contains(6, h * 0.9, 0.0, h));
        let d = h * 0.9 / 2f64.sqrt();
        assert!(shape_contains(6, d, d, h));
        assert!(!shape_contains(5, d, d, h));
    }

    #[test]
    fn split_is_stratified_and_deterministic() {
        let labels: Vec<usize> = (0..500).map(|i| i % N_CLASSES).collect();
        let (train, val) = stratified_split(&labels, 0.8, 3).unwrap();
        assert_eq!((train.len(), val.len()), (400, 100));
        for class in 0..N_CLASSES {
            assert_eq!(val.iter().filter(|&&i| labels[i] == class).count(), 10);
        }
        let mut all: Vec<usize> = train.iter().chain(&val).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..500).collect::<Vec<_>>());
        assert_eq!(stratified_split(&labels, 0.8, 3).unwrap(), (train.clone(), val));
        assert_ne!(stratified_split(&labels, 0.8, 4).unwrap().0, train);
    }

    #[test]
    fn split_keeps_both_sides() {
        let (t, v) = stratified_split(&[0, 0], 0.99, 1).unwrap();
        assert_eq!((t.len(), v.len()), (1, 1));
        let (t, v) = stratified_split(&[4], 0.5, 1).unwrap();
        assert_eq!((t, v), (vec![0], vec![]));
        assert!(stratified_split(&[0], 1.0, 0).is_err());
    }
}
