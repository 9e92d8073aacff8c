//! Static stimulus encoders applied between the camera image and the
//! electrode array.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EncoderSpec {
    #[default]
    Identity,
    /// `clamp(gain · x^gamma, 0, 1)`, elementwise.
    Gamma { gamma: f64, gain: f64 },
}

impl EncoderSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EncoderSpec::Identity => Ok(()),
            EncoderSpec::Gamma { gamma, gain } => {
                if gamma > 0.0 && gamma.is_finite() && gain > 0.0 && gain.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!(
                        "gamma encoder needs gamma > 0 and gain > 0, got gamma = {gamma}, gain = {gain}"
                    )))
                }
            }
        }
    }

    /// Short name used in reports and file names.
    pub fn label(&self) -> &'static str {
        match self {
            EncoderSpec::Identity => "identity",
            EncoderSpec::Gamma { .. } => "gamma",
        }
    }
}

pub fn apply_encoder<T: Scalar>(patch: &Raster<T>, spec: &EncoderSpec) -> Result<Raster<T>> {
    spec.validate()?;
    if !patch.is_unit_range() {
        return Err(Error::InvalidParameter("encoder input must lie in [0, 1]".into()));
    }
    Ok(match *spec {
        EncoderSpec::Identity => patch.clone(),
        EncoderSpec::Gamma { gamma, gain } => {
            let (g, k) = (T::lit(gamma), T::lit(gain));
            patch.map(|v| (k * v.powf(g)).max(T::zero()).min(T::one()))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_is_bit_exact() {
        let p = Raster::new(1, 4, vec![0.0, 0.1, 0.33333, 1.0]).unwrap();
        assert_eq!(apply_encoder(&p, &EncoderSpec::Identity).unwrap(), p);
    }

    #[test]
    fn gamma_one_gain_one_is_identity() {
        let p = Raster::new(1, 4, vec![0.0, 0.1, 0.33333, 1.0]).unwrap();
        let spec = EncoderSpec::Gamma { gamma: 1.0, gain: 1.0 };
        assert_eq!(apply_encoder(&p, &spec).unwrap(), p);
    }

    #[test]
    fn square_root_of_quarter() {
        let p = Raster::new(1, 1, vec![0.25f64]).unwrap();
        let out = apply_encoder(&p, &EncoderSpec::Gamma { gamma: 0.5, gain: 1.0 }).unwrap();
        assert_eq!(out.data(), &[0.5]);
    }

    #[test]
    fn gain_clamps() {
        let p = Raster::new(1, 2, vec![0.5f64, 0.9]).unwrap();
        let out = apply_encoder(&p, &EncoderSpec::Gamma { gamma: 1.0, gain: 3.0 }).unwrap();
        assert_eq!(out.data(), &[1.0, 1.0]);
    }

    #[test]
    fn invalid_specs_and_inputs() {
        let p = Raster::new(1, 1, vec![0.5f64]).unwrap();
        for spec in [
            EncoderSpec::Gamma { gamma: 0.0, gain: 1.0 },
            EncoderSpec::Gamma { gamma: 1.0, gain: -1.0 },
            EncoderSpec::Gamma {
                gamma: f64::NAN,
                gain: 1.0,
            },
        ] {
            assert!(apply_encoder(&p, &spec).is_err());
        }
        let out_of_range = Raster::new(1, 1, vec![1.5f64]).unwrap();
        assert!(apply_encoder(&out_of_range, &EncoderSpec::Identity).is_err());
    }

    #[test]
    fn serde_shape() {
        let s: EncoderSpec = serde_json::from_str(r#"{"kind":"gamma","gamma":2.0,"gain":1.0}"#).unwrap();
        assert_eq!(s, EncoderSpec::Gamma { gamma: 2.0, gain: 1.0 });
        let i: EncoderSpec = serde_json::from_str(r#"{"kind":"identity"}"#).unwrap();
        assert_eq!(i, EncoderSpec::Identity);
    }

    proptest! {
        #[test]
        fn output_in_unit_range(v in 0.0f64..=1.0, gamma in 0.05f64..5.0, gain in 0.05f64..5.0) {
            let p = Raster::new(1, 1, vec![v]).unwrap();
            let out = apply_encoder(&p, &EncoderSpec::Gamma { gamma, gain }).unwrap();
            prop_assert!(out.is_unit_range());
        }
    }
}
