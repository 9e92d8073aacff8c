//! Batch evaluation harness: dataset, simulation setup, nearest-centroid
//! scoring and report files.

pub mod classify;
pub mod config;
pub mod dataset;
pub mod io;
pub mod metrics;

use std::fs::File;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

pub use classify::{classify, featurize, fit_centroids, Centroids, FEATURE_SIDE};
pub use config::{DatasetSpec, DecayChoice, PipelineKind, Preset, RunConfig, Variant};
pub use dataset::{
    derive_seed, generate_synthetic_dataset, load_image_dir, stratified_split, Sample, CLASS_NAMES, N_CLASSES,
};
pub use metrics::{percept_metrics, PerceptMetrics};

use crate::axon_map::{build_axon_map, cache_key, load_axon_map_for, save_axon_map, AxonMap, TrajectoryParams};
use crate::encoding::EncoderSpec;
use crate::error::{Error, Result};
use crate::fixation::{load_tensor, proxy_saliency, reduce_attention, PatchGrid, SaliencyMap};
use crate::geometry::RetinalRect;
use crate::implant::ElectrodeGrid;
use crate::percept::{render_percept, AxonPerceptModel, DecayParams, Normalization, PerceptFrame};
use crate::pipeline::{downsampling_pipeline_with, fixation_pipeline_with};
use crate::raster::Raster;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Disabled,
    Hit,
    Built,
}

/// Loads the axon map for `(params, window, dims)` from `cache_dir` or builds
/// and stores it. A cache file with the right name but wrong contents is an
/// error, not a silent rebuild.
pub fn obtain_axon_map(
    params: &TrajectoryParams,
    window: RetinalRect<f64>,
    dims: (usize, usize),
    cache_dir: Option<&Path>,
) -> Result<(AxonMap<f64>, CacheStatus)> {
    let Some(dir) = cache_dir else {
        return Ok((build_axon_map(window, dims, params)?, CacheStatus::Disabled));
    };
    let key = cache_key(params, &window, dims);
    let path = cache_path(dir, key);
    if path.exists() {
        return Ok((load_axon_map_for(&path, key)?, CacheStatus::Hit));
    }
    let map = build_axon_map(window, dims, params)?;
    io::create_dir(dir)?;
    save_axon_map(&map, &path)?;
    Ok((map, CacheStatus::Built))
}

pub fn cache_path(dir: &Path, key: u64) -> PathBuf {
    dir.join(format!("axonmap-{key:016x}.axmp"))
}

/// Implant, decay constants and the two axon maps a run needs.
pub struct Simulation {
    pub grid: ElectrodeGrid<f64>,
    pub decay: DecayParams<f64>,
    pub prune_sigma: f64,
    pub patches: PatchGrid,
    /// Map for individual fixation glances.
    pub glance_map: AxonMap<f64>,
    /// Map for full-image (downsampling) percepts.
    pub render_map: AxonMap<f64>,
    pub cache: [CacheStatus; 2],
}

impl Simulation {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid.build::<f64>()?;
        let decay = cfg.decay.params();
        let window = grid.window(cfg.window_margin_rho * decay.rho_um)?;
        let cache_dir = cfg.cache_dir.as_deref();
        let [fr, fc] = cfg.fixation_dims;
        let [rr, rc] = cfg.render_dims;
        let (glance_map, c0) = obtain_axon_map(&cfg.trajectory, window, (fr, fc), cache_dir)?;
        let (render_map, c1) = obtain_axon_map(&cfg.trajectory, window, (rr, rc), cache_dir)?;
        Ok(Simulation {
            grid,
            decay,
            prune_sigma: cfg.prune_sigma,
            patches: PatchGrid::default(),
            glance_map,
            render_map,
            cache: [c0, c1],
        })
    }

    pub fn glance_model(&self) -> Result<AxonPerceptModel<'_, f64>> {
        AxonPerceptModel::new(&self.grid, &self.glance_map, self.decay, self.prune_sigma)
    }

    pub fn render_model(&self) -> Result<AxonPerceptModel<'_, f64>> {
        AxonPerceptModel::new(&self.grid, &self.render_map, self.decay, self.prune_sigma)
    }
}

/// Attention-derived saliency if `attention_dir` holds `<id>.atnf`, proxy
/// saliency otherwise.
pub fn saliency_for(sample: &Sample, attention_dir: Option<&Path>, patches: &PatchGrid) -> Result<SaliencyMap<f64>> {
    match attention_dir {
        Some(dir) => reduce_attention(&load_tensor(dir.join(format!("{}.atnf", sample.id)))?, patches),
        None => proxy_saliency(&sample.image, patches),
    }
}

pub fn load_dataset(cfg: &RunConfig) -> Result<Vec<Sample>> {
    match &cfg.dataset {
        DatasetSpec::Synthetic { n_per_class } => generate_synthetic_dataset(*n_per_class, cfg.seed),
        DatasetSpec::ImageDir { dir } => load_image_dir(dir),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalRow {
    pub id: String,
    pub variant: String,
    pub true_class: usize,
    pub predicted_class: usize,
    pub rms_contrast: f64,
    pub coverage: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VariantSummary {
    pub variant: String,
    pub pipeline: PipelineKind,
    pub encoder: EncoderSpec,
    /// Fixation ratio; absent for the downsampling pipeline.
    pub ratio: Option<f64>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub seed: u64,
    pub n_train: usize,
    pub n_val: usize,
    pub variants: Vec<VariantSummary>,
    #[serde(skip)]
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    pub fn accuracy(&self, label: &str) -> Option<f64> {
        self.variants.iter().find(|v| v.variant == label).map(|v| v.accuracy)
    }
}

/// Dataset, split and saliency shared by all variants of a run.
pub struct Prepared {
    pub samples: Vec<Sample>,
    pub saliency: Vec<SaliencyMap<f64>>,
    pub train: Vec<usize>,
    pub val: Vec<usize>,
}

impl Prepared {
    pub fn new(cfg: &RunConfig, patches: &PatchGrid) -> Result<Self> {
        let samples = load_dataset(cfg)?;
        let labels: Vec<usize> = samples.iter().map(|s| s.label).collect();
        let (train, val) = stratified_split(&labels, cfg.train_fraction, cfg.seed)?;
        let saliency = samples
            .par_iter()
            .map(|s| saliency_for(s, cfg.attention_dir.as_deref(), patches))
            .collect::<Result<Vec<_>>>()?;
        Ok(Prepared {
            samples,
            saliency,
            train,
            val,
        })
    }
}

/// Percept of one sample under one variant.
pub fn simulate_sample(
    sim: &Simulation,
    glance: &AxonPerceptModel<'_, f64>,
    render: &AxonPerceptModel<'_, f64>,
    image: &Raster<f64>,
    saliency: &SaliencyMap<f64>,
    variant: &Variant,
    ratio: f64,
) -> Result<PerceptFrame<f64>> {
    match variant.pipeline {
        PipelineKind::Fixation => fixation_pipeline_with(
            glance,
            image,
            saliency,
            ratio,
            &variant.encoder,
            &sim.grid,
            &sim.patches,
        )
        .map(|o| o.canvas),
        PipelineKind::Downsampling => downsampling_pipeline_with(render, image, &variant.encoder, &sim.grid),
    }
}

/// Scores one variant: percepts for every sample, centroids from the training
/// split, predictions for the validation split. Writes validation percepts
/// as PNG under `png_dir` when given.
pub fn run_variant(
    sim: &Simulation,
    data: &Prepared,
    variant: &Variant,
    ratio: f64,
    png_dir: Option<&Path>,
) -> Result<(VariantSummary, Vec<EvalRow>)> {
    let glance = sim.glance_model()?;
    let render = sim.render_model()?;
    let label = variant.label();
    let mut is_val = vec![false; data.samples.len()];
    data.val.iter().for_each(|&i| is_val[i] = true);
    let per_sample = data
        .samples
        .par_iter()
        .zip(&data.saliency)
        .zip(&is_val)
        .map(|((s, sal), &val)| {
            let frame = simulate_sample(sim, &glance, &render, &s.image, sal, variant, ratio)?;
            if let (true, Some(dir)) = (val, png_dir) {
                io::save_png(
                    &render_percept(&frame, Normalization::GlobalMax)?,
                    dir.join(format!("{}.png", s.id)),
                )?;
            }
            let metrics = if val { Some(percept_metrics(&frame)) } else { None };
            Ok((featurize(frame.intensities())?, metrics))
        })
        .collect::<Result<Vec<_>>>()?;

    let train_x: Vec<Vec<f64>> = data.train.iter().map(|&i| per_sample[i].0.clone()).collect();
    let train_y: Vec<usize> = data.train.iter().map(|&i| data.samples[i].label).collect();
    let centroids = Centroids::fit(&train_x, &train_y, N_CLASSES)?;

    let mut rows: Vec<EvalRow> = data
        .val
        .iter()
        .map(|&i| {
            let (feature, metrics) = &per_sample[i];
            let m = metrics.expect("validation metrics");
            EvalRow {
                id: data.samples[i].id.clone(),
                variant: label.clone(),
                true_class: data.samples[i].label,
                predicted_class: centroids.classify(feature),
                rms_contrast: m.rms_contrast,
                coverage: m.coverage,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.id.cmp(&b.id));
    let correct = rows.iter().filter(|r| r.true_class == r.predicted_class).count();
    let total = rows.len();
    let summary = VariantSummary {
        variant: label,
        pipeline: variant.pipeline,
        encoder: variant.encoder,
        ratio: (variant.pipeline == PipelineKind::Fixation).then_some(ratio),
        correct,
        total,
        accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
    };
    Ok((summary, rows))
}

/// Runs `f` on a dedicated pool of `threads` workers (0 = all cores).
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Runs every configured variant and writes `rows.csv`, `summary.json` and
/// (optionally) `percepts/<variant>/<id>.png` under `cfg.output_dir`.
/// Rows are flushed after each variant, so a failure keeps earlier results.
pub fn evaluate(cfg: &RunConfig) -> Result<EvalReport> {
    cfg.validate()?;
    with_threads(cfg.threads, || evaluate_in_pool(cfg))?
}

fn evaluate_in_pool(cfg: &RunConfig) -> Result<EvalReport> {
    let sim = Simulation::from_config(cfg)?;
    let data = Prepared::new(cfg, &sim.patches)?;
    let out = &cfg.output_dir;
    io::create_dir(out)?;
    let csv_path = out.join("rows.csv");
    let csv_err = |source| Error::Csv {
        path: csv_path.clone(),
        source,
    };
    let file = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut writer = csv::Writer::from_writer(file);

    let mut report = EvalReport {
        seed: cfg.seed,
        n_train: data.train.len(),
        n_val: data.val.len(),
        variants: Vec::new(),
        rows: Vec::new(),
    };
    for variant in &cfg.variants {
        let png_dir = cfg.write_percepts.then(|| out.join("percepts").join(variant.label()));
        let (summary, rows) = run_variant(&sim, &data, variant, cfg.ratio, png_dir.as_deref())?;
        for row in &rows {
            writer.serialize(row).map_err(csv_err)?;
        }
        writer.flush().map_err(|e| Error::io(&csv_path, e))?;
        report.variants.push(summary);
        report.rows.extend(rows);
    }
    io::write_json(&report, out.join("summary.json"))?;
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub ratio: f64,
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

/// Fixation-pipeline accuracy at each ratio, same data and split throughout.
/// Nothing is written to disk.
pub fn ratio_sweep(cfg: &RunConfig, ratios: &[f64], encoder: EncoderSpec) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    with_threads(cfg.threads, || {
        let sim = Simulation::from_config(cfg)?;
        let data = Prepared::new(cfg, &sim.patches)?;
        let variant = Variant::new(PipelineKind::Fixation, encoder);
        ratios
            .iter()
            .map(|&ratio| {
                let (s, _) = run_variant(&sim, &data, &variant, ratio, None)?;
                Ok(SweepPoint {
                    ratio,
                    correct: s.correct,
                    total: s.total,
                    accuracy: s.accuracy,
                })
            })
            .collect()
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config(dir: &Path) -> RunConfig {
        RunConfig {
            dataset: DatasetSpec::Synthetic { n_per_class: 3 },
            trajectory: TrajectoryParams {
                n_bundles: 80,
                ..Default::default()
            },
            fixation_dims: [28, 28],
            render_dims: [56, 56],
            decay: DecayChoice::Preset(Preset::A),
            output_dir: dir.join("out"),
            threads: 1,
            ..Default::default()
        }
    }

    #[test]
    fn cache_builds_then_hits() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path());
        cfg.cache_dir = Some(dir.path().join("cache"));
        let first = Simulation::from_config(&cfg).unwrap();
        assert_eq!(first.cache, [CacheStatus::Built, CacheStatus::Built]);
        let second = Simulation::from_config(&cfg).unwrap();
        assert_eq!(second.cache, [CacheStatus::Hit, CacheStatus::Hit]);
        assert_eq!(first.glance_map, second.glance_map);
        assert_eq!(first.render_map, second.render_map);
    }

    #[test]
    fn evaluate_writes_consistent_reports() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path());
        cfg.variants.push(Variant::new(
            PipelineKind::Fixation,
            EncoderSpec::Gamma { gamma: 2.0, gain: 1.0 },
        ));
        let report = evaluate(&cfg).unwrap();
        assert_eq!((report.n_train, report.n_val), (20, 10));
        assert_eq!(report.rows.len(), 30);
        let csv_text = std::fs::read_to_string(cfg.output_dir.join("rows.csv")).unwrap();
        assert_eq!(csv_text.lines().count(), 31);
        assert!(csv_text.starts_with("id,variant,true_class,predicted_class,rms_contrast,coverage\n"));
        for s in &report.variants {
            let rows: Vec<_> = report.rows.iter().filter(|r| r.variant == s.variant).collect();
            let correct = rows.iter().filter(|r| r.true_class == r.predicted_class).count();
            assert_eq!((correct, rows.len()), (s.correct, s.total));
            assert_eq!(s.accuracy, correct as f64 / rows.len() as f64);
            assert!(rows.windows(2).all(|w| w[0].id < w[1].id));
        }
        let pngs = std::fs::read_dir(cfg.output_dir.join("percepts/fixation-identity"))
            .unwrap()
            .count();
        assert_eq!(pngs, 10);
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(cfg.output_dir.join("summary.json")).unwrap()).unwrap();
        assert_eq!(summary["variants"].as_array().unwrap().len(), 3);
    }

    #[test]
    fn rerun_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path());
        cfg.write_percepts = false;
        evaluate(&cfg).unwrap();
        let a = std::fs::read(cfg.output_dir.join("rows.csv")).unwrap();
        let a_json = std::fs::read(cfg.output_dir.join("summary.json")).unwrap();
        cfg.output_dir = dir.path().join("again");
        cfg.threads = 3;
        evaluate(&cfg).unwrap();
        assert_eq!(std::fs::read(cfg.output_dir.join("rows.csv")).unwrap(), a);
        assert_eq!(std::fs::read(cfg.output_dir.join("summary.json")).unwrap(), a_json);
    }

    #[test]
    fn missing_attention_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = small_config(dir.path());
        cfg.attention_dir = Some(dir.path().join("nope"));
        assert_eq!(evaluate(&cfg).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn sweep_reports_each_ratio() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_config(dir.path());
        let pts = ratio_sweep(&cfg, &[0.05, 1.0], EncoderSpec::Identity).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.total == 10));
        assert!(!cfg.output_dir.exists());
    }

    #[test]
    fn gamma_raises_contrast_on_mid_gray_checker() {
        let dir = tempfile::tempdir().unwrap();
        let img = Raster::from_fn(224, 224, |r, c| if (r / 56 + c / 56) % 2 == 0 { 0.35 } else { 0.65 });
        let gamma = EncoderSpec::Gamma { gamma: 2.0, gain: 1.0 };
        for preset in [Preset::A, Preset::B] {
            let cfg = RunConfig {
                decay: DecayChoice::Preset(preset),
                ..small_config(dir.path())
            };
            let sim = Simulation::from_config(&cfg).unwrap();
            let glance = sim.glance_model().unwrap();
            let sal = proxy_saliency(&img, &sim.patches).unwrap();
            let run = |enc: &EncoderSpec| {
                let out = fixation_pipeline_with(&glance, &img, &sal, 1.0, enc, &sim.grid, &sim.patches).unwrap();
                percept_metrics(&out.canvas)
            };
            let (mi, mg) = (run(&EncoderSpec::Identity), run(&gamma));
            assert!(mg.rms_contrast > mi.rms_contrast, "{preset:?}: {mg:?} vs {mi:?}");
        }
    }
}
