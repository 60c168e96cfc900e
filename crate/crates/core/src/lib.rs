//! Verification laboratory for the central limit theorem of stationary
//! linear processes with dependent innovations.
//!
//! The crate computes window coefficients and variance asymptotics of
//! moving sums exactly, evaluates the sufficient conditions for the CLT
//! (projective, mixingale, Bernoulli-shift, functional-of-i.i.d.) against
//! analytic certificates, constructs the divergence counterexample
//! sequence, and confirms distributional convergence by deterministic
//! Monte Carlo.
//!
//! Numeric kernels are generic over the scalar type (`f32`/`f64`) through
//! [`num::Real`]; samplers and reports are pinned to `f64`. The default
//! scalar for every generic type is `f64`.

pub mod conditions;
pub mod error;
pub mod harness;
pub mod innovations;
pub mod num;
pub mod quad;
pub mod rng;
pub mod special;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
pub use num::Real;

/// Default scalar used by the concrete aliases below.
pub type Scalar = f64;

/// Convenience aliases at the crate root for the common `f64` case.
pub type WeightSequence = weights::WeightSequence<Scalar>;
pub type WindowCoefficients = weights::WindowCoefficients<Scalar>;
pub type AutocovarianceFunction = spectral::AutocovarianceFunction<Scalar>;
pub type LongRunVariance = spectral::LongRunVariance<Scalar>;
