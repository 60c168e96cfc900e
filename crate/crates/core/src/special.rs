//! Normal CDF and related special-function evaluations.
//!
//! The standard normal CDF is evaluated through `libm`'s erf/erfc
//! (the FDLIBM rational approximations, |error| < 1 ulp, far inside the
//! 1e-10 budget needed for KS distances at the 1e-2 scale). The same
//! evaluator backs simulation targets and test assertions.

use crate::num::Real;

/// Standard normal CDF Φ(x).
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// Φ(x / σ) for a centered normal with variance `variance`.
#[inline]
pub fn normal_cdf_var(x: f64, variance: f64) -> f64 {
    normal_cdf(x / variance.sqrt())
}

/// Generic-scalar wrapper; evaluation happens in f64 precision.
#[inline]
pub fn normal_cdf_generic<T: Real>(x: T) -> T {
    T::of(normal_cdf(x.as_f64()))
}

/// Inverse of Φ by bisection, used by tests as an independent route.
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1)");
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
