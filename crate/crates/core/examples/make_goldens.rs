//! Regenerates `tests/fixtures/*.atnf` with the unpruned reference engine.
//!
//!     cargo run -p phosphene --release --example make_goldens

use std::path::PathBuf;

use phosphene::axon_map::{build_axon_map, TrajectoryParams};
use phosphene::encoding::EncoderSpec;
use phosphene::fixation::{proxy_saliency, save_tensor, PatchGrid, Tensor};
use phosphene::harness::generate_synthetic_dataset;
use phosphene::implant::GridSpec;
use phosphene::percept::DecayParams;
use phosphene::pipeline::{downsampling_pipeline_with, fixation_pipeline_with, ReferenceOperator};
use phosphene::{Image, Result};

fn tensor(img: &Image) -> Result<Tensor> {
    Tensor::new(
        vec![img.rows(), img.cols()],
        img.data().iter().map(|&v| v as f32).collect(),
    )
}

fn main() -> Result<()> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let image = generate_synthetic_dataset(1, 2024)?.swap_remove(3).image;
    save_tensor(&tensor(&image)?, dir.join("fixture_image.atnf"))?;

    let grid = GridSpec::default().build::<f64>()?;
    let params = TrajectoryParams {
        n_bundles: 60,
        ..Default::default()
    };
    let patches = PatchGrid::default();
    let sal = proxy_saliency(&image, &patches)?;

    let a = DecayParams::preset_a();
    let map = build_axon_map(grid.window(3.0 * a.rho_um)?, (28, 28), &params)?;
    let op = ReferenceOperator {
        grid: &grid,
        map: &map,
        decay: a,
    };
    let out = fixation_pipeline_with(&op, &image, &sal, 0.1, &EncoderSpec::Identity, &grid, &patches)?;
    save_tensor(&tensor(&out.canvas.normalized())?, dir.join("golden_fixation_a.atnf"))?;

    let b = DecayParams::preset_b();
    let map = build_axon_map(grid.window(3.0 * b.rho_um)?, (56, 56), &params)?;
    let op = ReferenceOperator {
        grid: &grid,
        map: &map,
        decay: b,
    };
    let frame = downsampling_pipeline_with(&op, &image, &EncoderSpec::Identity, &grid)?;
    save_tensor(&tensor(&frame.normalized())?, dir.join("golden_downsampling_b.atnf"))?;
    println!("wrote goldens to {}", dir.display());
    Ok(())
}
