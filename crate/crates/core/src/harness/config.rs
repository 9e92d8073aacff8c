//! JSON run configuration. Every field has a default, so `{}` is a valid
//! config: the synthetic dataset with 50 images per class, preset B, the
//! 14×14 implant and both pipelines with the identity encoder.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::axon_map::TrajectoryParams;
use crate::encoding::EncoderSpec;
use crate::error::{Error, Result};
use crate::implant::GridSpec;
use crate::percept::{DecayParams, DEFAULT_PRUNE_SIGMA};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetSpec {
    Synthetic {
        n_per_class: usize,
    },
    /// A directory holding `labels.csv` (`id,label`) and `<id>.png`.
    ImageDir {
        dir: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DecayChoice {
    Preset(Preset),
    Custom(DecayParams<f64>),
}

impl DecayChoice {
    pub fn params(&self) -> DecayParams<f64> {
        match *self {
            DecayChoice::Preset(Preset::A) => DecayParams::preset_a(),
            DecayChoice::Preset(Preset::B) => DecayParams::preset_b(),
            DecayChoice::Custom(p) => p,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PipelineKind {
    Fixation,
    Downsampling,
}

impl fmt::Display for PipelineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PipelineKind::Fixation => "fixation",
            PipelineKind::Downsampling => "downsampling",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    pub pipeline: PipelineKind,
    #[serde(default)]
    pub encoder: EncoderSpec,
}

impl Variant {
    pub fn new(pipeline: PipelineKind, encoder: EncoderSpec) -> Self {
        Variant { pipeline, encoder }
    }

    pub fn label(&self) -> String {
        format!("{}-{}", self.pipeline, self.encoder.label())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    /// Directory of `<id>.atnf` attention tensors; proxy saliency otherwise.
    pub attention_dir: Option<PathBuf>,
    pub ratio: f64,
    /// Encoder for the single-image commands.
    pub encoder: EncoderSpec,
    pub variants: Vec<Variant>,
    pub grid: GridSpec,
    pub decay: DecayChoice,
    pub trajectory: TrajectoryParams,
    /// Render raster of each fixation glance.
    pub fixation_dims: [usize; 2],
    /// Render raster of the downsampling percept.
    pub render_dims: [usize; 2],
    /// Render window = electrode bounding box expanded by this many ρ.
    pub window_margin_rho: f64,
    pub prune_sigma: f64,
    pub train_fraction: f64,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// 0 = all available cores.
    pub threads: usize,
    pub cache_dir: Option<PathBuf>,
    pub write_percepts: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dataset: DatasetSpec::Synthetic { n_per_class: 50 },
            attention_dir: None,
            ratio: 0.1,
            encoder: EncoderSpec::Identity,
            variants: vec![
                Variant::new(PipelineKind::Fixation, EncoderSpec::Identity),
                Variant::new(PipelineKind::Downsampling, EncoderSpec::Identity),
            ],
            grid: GridSpec::default(),
            decay: DecayChoice::Preset(Preset::B),
            trajectory: TrajectoryParams::default(),
            fixation_dims: [112, 112],
            render_dims: [224, 224],
            window_margin_rho: 3.0,
            prune_sigma: DEFAULT_PRUNE_SIGMA,
            train_fraction: 0.8,
            output_dir: PathBuf::from("out"),
            seed: 0,
            threads: 0,
            cache_dir: None,
            write_percepts: true,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if let DatasetSpec::Synthetic { n_per_class: 0 } = self.dataset {
            return bad("dataset.n_per_class must be at least 1".into());
        }
        if !(self.ratio > 0.0 && self.ratio <= 1.0) {
            return bad(format!("ratio must be in (0, 1], got {}", self.ratio));
        }
        self.encoder.validate()?;
        if self.variants.is_empty() {
            return bad("at least one variant is required".into());
        }
        for v in &self.variants {
            v.encoder.validate()?;
        }
        if self.grid.rows == 0 || self.grid.cols == 0 || !(self.grid.spacing_um > 0.0) {
            return bad("grid needs rows, cols >= 1 and positive spacing".into());
        }
        self.decay.params().validate()?;
        self.trajectory.validate()?;
        if self.fixation_dims.contains(&0) || self.render_dims.contains(&0) {
            return bad("render dims must be nonzero".into());
        }
        if !(self.window_margin_rho >= 0.0 && self.window_margin_rho.is_finite()) {
            return bad(format!(
                "window_margin_rho must be >= 0, got {}",
                self.window_margin_rho
            ));
        }
        if !(self.prune_sigma > 0.0) {
            return bad(format!("prune_sigma must be positive, got {}", self.prune_sigma));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return bad(format!("train_fraction must be in (0, 1), got {}", self.train_fraction));
        }
        Ok(())
    }
}
