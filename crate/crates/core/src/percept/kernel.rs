//! Distance-decay kernels.
//!
//! Both engines are generic over the kernel, so the oracles compare like with
//! like whatever functional form is plugged in.

use crate::scalar::Scalar;

pub trait DecayKernel<T: Scalar>: Sync {
    /// Falloff with squared Euclidean distance from an electrode.
    fn radial(&self, dist_sq: T, rho: T) -> T;

    /// Falloff with arc length along a bundle, measured from the soma.
    fn axonal(&self, arc: T, lambda: T) -> T;
}

/// `exp(−d²/(2ρ²))` and `exp(−L²/(2λ²))`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Gaussian;

impl<T: Scalar> DecayKernel<T> for Gaussian {
    #[inline]
    fn radial(&self, dist_sq: T, rho: T) -> T {
        (-dist_sq / (T::lit(2.0) * rho * rho)).exp()
    }

    #[inline]
    fn axonal(&self, arc: T, lambda: T) -> T {
        (-(arc * arc) / (T::lit(2.0) * lambda * lambda)).exp()
    }
}

/// `exp(−d/ρ)` and `exp(−L/λ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Exponential;

impl<T: Scalar> DecayKernel<T> for Exponential {
    #[inline]
    fn radial(&self, dist_sq: T, rho: T) -> T {
        (-dist_sq.sqrt() / rho).exp()
    }

    #[inline]
    fn axonal(&self, arc: T, lambda: T) -> T {
        (-arc.abs() / lambda).exp()
    }
}
