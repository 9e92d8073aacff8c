use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RetinalRect;
use crate::raster::Raster;
use crate::scalar::Scalar;

/// Radial (ρ) and axonal (λ) decay constants, in micrometers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayParams<T> {
    pub rho_um: T,
    pub lambda_um: T,
}

impl<T: Scalar> DecayParams<T> {
    pub fn new(rho_um: T, lambda_um: T) -> Result<Self> {
        let d = Self { rho_um, lambda_um };
        d.validate()?;
        Ok(d)
    }

    /// Near-ideal setting: ρ = 150 µm, λ = 100 µm.
    pub fn preset_a() -> Self {
        Self {
            rho_um: T::lit(150.0),
            lambda_um: T::lit(100.0),
        }
    }

    /// Subject-derived setting: ρ = 437 µm, λ = 1420 µm.
    pub fn preset_b() -> Self {
        Self {
            rho_um: T::lit(437.0),
            lambda_um: T::lit(1420.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: T| v > T::zero() && v.is_finite();
        if !ok(self.rho_um) || !ok(self.lambda_um) {
            return Err(Error::InvalidParameter(format!(
                "decay constants must be positive, got rho = {}, lambda = {}",
                self.rho_um, self.lambda_um
            )));
        }
        Ok(())
    }
}

/// A predicted percept: nonnegative intensities over a retinal window.
#[derive(Clone, Debug, PartialEq)]
pub struct PerceptFrame<T> {
    intensities: Raster<T>,
    render_window: RetinalRect<T>,
    raw_max: T,
}

impl<T: Scalar> PerceptFrame<T> {
    pub fn new(intensities: Raster<T>, render_window: RetinalRect<T>) -> Result<Self> {
        if let Some(bad) = intensities.data().iter().find(|v| !(**v >= T::zero() && v.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "percept intensities must be finite and >= 0, found {bad}"
            )));
        }
        let raw_max = intensities.max_value();
        Ok(Self {
            intensities,
            render_window,
            raw_max,
        })
    }

    pub fn intensities(&self) -> &Raster<T> {
        &self.intensities
    }

    pub fn render_window(&self) -> &RetinalRect<T> {
        &self.render_window
    }

    /// Peak intensity before any normalization.
    pub fn raw_max(&self) -> T {
        self.raw_max
    }

    pub fn dims(&self) -> (usize, usize) {
        self.intensities.dims()
    }

    /// Intensities divided by `raw_max`; an all-zero frame stays zero.
    pub fn normalized(&self) -> Raster<T> {
        if self.raw_max > T::zero() {
            let m = self.raw_max;
            self.intensities.map(|v| v / m)
        } else {
            self.intensities.clone()
        }
    }
}
