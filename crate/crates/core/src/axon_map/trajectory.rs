//! Nerve fiber bundle trajectories.
//!
//! The default model is an exponential-relaxation spiral around the optic
//! disc: bundle `i` leaves the disc at angle `φ0` and, as the arc parameter
//! `r` grows, its disc-centered angle relaxes toward ±180° (the raphe side)
//! with angular constant `τ`:
//!
//! ```text
//! φ(r) = φt + (φ0 − φt)·exp(−(r − r0)/τ),   φt = +180° if φ0 > 0 else −180°
//! ```
//!
//! Other trajectory families plug in through [`TrajectoryModel`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{deg_to_um_with, RetinalPoint, VisualFieldPoint, UM_PER_DEG};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryParams {
    pub n_bundles: usize,
    pub r0_deg: f64,
    pub r_max_deg: f64,
    pub dr_deg: f64,
    pub tau_deg: f64,
    pub optic_disc: VisualFieldPoint<f64>,
    pub um_per_deg: f64,
}

impl Default for TrajectoryParams {
    fn default() -> Self {
        Self {
            n_bundles: 500,
            r0_deg: 2.0,
            r_max_deg: 45.0,
            dr_deg: 0.25,
            tau_deg: 45.0,
            optic_disc: VisualFieldPoint::new(15.0, 2.0),
            um_per_deg: UM_PER_DEG,
        }
    }
}

impl TrajectoryParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n_bundles < 4 {
            return bad(format!("n_bundles must be >= 4, got {}", self.n_bundles));
        }
        if !(self.r0_deg > 0.0 && self.r0_deg < self.r_max_deg && self.r_max_deg.is_finite()) {
            return bad(format!(
                "need 0 < r0_deg < r_max_deg, got r0 = {}, r_max = {}",
                self.r0_deg, self.r_max_deg
            ));
        }
        if !(self.dr_deg > 0.0 && self.dr_deg <= 1.0) {
            return bad(format!("dr_deg must be in (0, 1], got {}", self.dr_deg));
        }
        if !(self.tau_deg > 0.0 && self.tau_deg.is_finite()) {
            return bad(format!("tau_deg must be positive, got {}", self.tau_deg));
        }
        if !self.optic_disc.is_valid() {
            return bad(format!(
                "optic disc {:?} is not a valid visual-field point",
                self.optic_disc
            ));
        }
        if !(self.um_per_deg > 0.0 && self.um_per_deg.is_finite()) {
            return bad(format!("um_per_deg must be positive, got {}", self.um_per_deg));
        }
        Ok(())
    }

    /// Seed angle of bundle `i`, in degrees. Never exactly 0° or ±180°.
    pub fn seed_angle(&self, i: usize) -> f64 {
        -180.0 + (i as f64 + 0.5) * 360.0 / self.n_bundles as f64
    }

    /// Arc parameters `r0, r0 + dr, …` up to `r_max`.
    pub fn radii(&self) -> impl Iterator<Item = f64> + '_ {
        let steps = ((self.r_max_deg - self.r0_deg) / self.dr_deg + 1e-9).floor() as usize;
        (0..=steps).map(move |k| self.r0_deg + k as f64 * self.dr_deg)
    }

    pub fn optic_disc_um(&self) -> RetinalPoint<f64> {
        deg_to_um_with(self.optic_disc, self.um_per_deg)
    }
}

/// Disc-centered bundle angle at arc parameter `r` for seed angle `phi0`.
pub fn spiral_angle(phi0: f64, r: f64, r0: f64, tau: f64) -> f64 {
    let target = if phi0 > 0.0 { 180.0 } else { -180.0 };
    target + (phi0 - target) * (-(r - r0) / tau).exp()
}

/// A fiber bundle polyline ordered from the optic disc outward.
#[derive(Clone, Debug, PartialEq)]
pub struct AxonBundle<T> {
    pub vertices: Vec<RetinalPoint<T>>,
    /// Cumulative arc length at each vertex; `arc_um[0] == 0`.
    pub arc_um: Vec<T>,
}

impl<T: Scalar> AxonBundle<T> {
    /// Builds a bundle from disc-outward polyline vertices (µm). Coordinates and
    /// arc lengths are rounded to `f32` so that the binary cache round-trips
    /// exactly for every scalar type.
    pub fn from_polyline(points: &[RetinalPoint<f64>]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "bundle needs at least 2 vertices, got {}",
                points.len()
            )));
        }
        let snapped: Vec<RetinalPoint<f64>> = points
            .iter()
            .map(|p| RetinalPoint::new(p.x_um as f32 as f64, p.y_um as f32 as f64))
            .collect();
        let mut arc = Vec::with_capacity(snapped.len());
        let mut acc = 0.0f64;
        arc.push(0.0f32);
        for w in snapped.windows(2) {
            acc += w[0].dist(&w[1]);
            let a = acc as f32;
            if !(a > *arc.last().unwrap()) {
                return Err(Error::InvalidParameter(
                    "bundle vertices must be distinct with strictly increasing arc length".into(),
                ));
            }
            arc.push(a);
        }
        Ok(Self {
            vertices: snapped
                .iter()
                .map(|p| RetinalPoint::new(T::lit(p.x_um), T::lit(p.y_um)))
                .collect(),
            arc_um: arc.into_iter().map(|a| T::lit(a as f64)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Source of fiber bundle geometry.
pub trait TrajectoryModel: Sync {
    /// Parameters identifying this geometry (hashed into cache keys).
    fn params(&self) -> &TrajectoryParams;

    /// Bundle polylines in retinal micrometers, each ordered disc-outward.
    fn polylines(&self) -> Result<Vec<Vec<RetinalPoint<f64>>>>;
}

/// The exponential-relaxation spiral described in the module docs.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpiralTrajectory {
    pub params: TrajectoryParams,
}

impl SpiralTrajectory {
    pub fn new(params: TrajectoryParams) -> Self {
        Self { params }
    }
}

impl TrajectoryModel for SpiralTrajectory {
    fn params(&self) -> &TrajectoryParams {
        &self.params
    }

    fn polylines(&self) -> Result<Vec<Vec<RetinalPoint<f64>>>> {
        let p = &self.params;
        p.validate()?;
        let disc = p.optic_disc;
        Ok((0..p.n_bundles)
            .map(|i| {
                let phi0 = p.seed_angle(i);
                p.radii()
                    .map(|r| {
                        let phi = spiral_angle(phi0, r, p.r0_deg, p.tau_deg).to_radians();
                        deg_to_um_with(
                            VisualFieldPoint::new(disc.x_deg + r * phi.cos(), disc.y_deg + r * phi.sin()),
                            p.um_per_deg,
                        )
                    })
                    .collect()
            })
            .collect())
    }
}

pub fn build_bundles<T: Scalar>(params: &TrajectoryParams) -> Result<Vec<AxonBundle<T>>> {
    bundles_from_model(&SpiralTrajectory::new(*params))
}

pub fn bundles_from_model<T: Scalar>(model: &dyn TrajectoryModel) -> Result<Vec<AxonBundle<T>>> {
    model
        .polylines()?
        .iter()
        .map(|line| AxonBundle::from_polyline(line))
        .collect()
}
