//! Simulated prosthetic vision with salient-patch fixations.
//!
//! The core types are generic over the scalar type; the aliases below fix
//! it to `f64` (or `f32` where noted) for everyday use.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod axon_map;
pub mod encoding;
pub mod error;
pub mod fixation;
pub mod geometry;
pub mod harness;
pub mod implant;
pub mod percept;
pub mod pipeline;
pub mod raster;
pub mod scalar;

pub use error::{CacheError, Error, Result, TensorError};
pub use scalar::Scalar;

pub type Grid = implant::ElectrodeGrid<f64>;
pub type Grid32 = implant::ElectrodeGrid<f32>;
pub type Map = axon_map::AxonMap<f64>;
pub type Map32 = axon_map::AxonMap<f32>;
pub type Frame = percept::PerceptFrame<f64>;
pub type Frame32 = percept::PerceptFrame<f32>;
pub type Image = raster::Raster<f64>;
pub type Image32 = raster::Raster<f32>;
pub type Stim = implant::Stimulus<f64>;
pub type Decay = percept::DecayParams<f64>;
pub type Saliency = fixation::SaliencyMap<f64>;
