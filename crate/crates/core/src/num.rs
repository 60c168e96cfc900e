//! Scalar abstraction and compensated summation.
//!
//! The numeric kernels of this crate (window coefficients, bilinear
//! variance forms, smoothness functionals, goodness-of-fit statistics)
//! are generic over a floating scalar so they can run in `f32` or `f64`.
//! Samplers and report types are pinned to `f64`.

use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign, SubAssign};

/// Floating scalar usable by the numeric kernels: `f32` or `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` constant.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("finite f64 constant")
    }

    /// Lossy conversion to `f64` (exact for f32/f64).
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier-compensated accumulator.
///
/// Running error stays O(eps) independent of the number of terms, which
/// matters for normalizers that mix magnitudes across supports of
/// millions of entries.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<T: Real> {
    sum: T,
    comp: T,
}

impl<T: Real> Default for CompensatedSum<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

/// Compensated sum of an iterator.
pub fn csum<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    let mut acc = CompensatedSum::new();
    for x in iter {
        acc.add(x);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        // 1 + 1e-16 repeated: naive f64 sum loses the small terms.
        let mut acc = CompensatedSum::<f64>::new();
        acc.add(1.0);
        for _ in 0..1_000_000 {
            acc.add(1e-16);
        }
        let exact = 1.0 + 1e-10;
        assert!((acc.value() - exact).abs() < 1e-15);
    }

    #[test]
    fn csum_matches_naive_on_small_inputs() {
        let xs = [0.1f64, 0.2, 0.3, -0.4];
        let naive: f64 = xs.iter().sum();
        assert!((csum(xs.iter().copied()) - naive).abs() < 1e-15);
    }

    #[test]
    fn real_trait_works_for_f32() {
        let x = f32::of(0.5);
        assert_eq!(x, 0.5f32);
        assert_eq!(x.as_f64(), 0.5f64);
    }
}
