//! Autocovariances, spectral density at zero, and exact variance forms.
//!
//! The long-run variance `2 pi f(0) = gamma(0) + 2 sum_{k>=1} gamma(k)` is
//! a certified number only when the covariance tail is; otherwise the
//! outcome is the first-class value `PossiblyUnbounded` carrying the
//! partial-sum trace (the divergence example lives exactly there).
//!
//! `Var(S_n)` is always computed analytically from `gamma` as a Toeplitz
//! bilinear form over the certified window support, never by Monte Carlo:
//! `Var(S_n) = sum_m w(m) gamma(m)` with lag weights
//! `w(m) = sum_j b_{n,j} b_{n,j+m}`, evaluated by direct dot products or
//! transform-based convolution depending on size.

use crate::error::{Error, Result};
use crate::innovations::{CausalCoeffs, GMap, InnovationKind, InnovationModel};
use crate::num::{csum, CompensatedSum, Real};
use crate::weights::{diff_sq_sum, window_coefficients, WeightSequence, WindowCoefficients};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Work threshold above which lag weights go through the FFT route.
const FFT_WORK_THRESHOLD: u128 = 200_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovSource {
    Analytic,
    TruncatedSeries,
}

/// `gamma(k) = E[xi_0 xi_k]` for `0 <= k <= k_max`, symmetric in `k`.
#[derive(Debug, Clone)]
pub struct AutocovarianceFunction<T: Real = f64> {
    values: Vec<T>,
    /// Certified bound on `sum_{k > k_max} |gamma(k)|`, when one exists.
    tail_bound: Option<T>,
    source: CovSource,
}

impl<T: Real> AutocovarianceFunction<T> {
    pub fn new(values: Vec<T>, tail_bound: Option<T>, source: CovSource) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Precondition("need at least gamma(0)".into()));
        }
        let g0 = values[0];
        if g0 < T::zero() {
            return Err(Error::Precondition("gamma(0) must be nonnegative".into()));
        }
        let slack = T::of(1e-9) * (T::one() + g0);
        if values.iter().any(|g| g.abs() > g0 + slack) {
            return Err(Error::Precondition(
                "|gamma(k)| must not exceed gamma(0)".into(),
            ));
        }
        Ok(Self {
            values,
            tail_bound,
            source,
        })
    }

    /// White noise with the given variance.
    pub fn iid(variance: T) -> Self {
        Self {
            values: vec![variance],
            tail_bound: Some(T::zero()),
            source: CovSource::Analytic,
        }
    }

    pub fn k_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `gamma(k)` by symmetry; zero beyond `k_max` (the certified tail
    /// accounts for the truncation).
    pub fn at(&self, k: i64) -> T {
        let k = k.unsigned_abs() as usize;
        self.values.get(k).copied().unwrap_or_else(T::zero)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn tail_bound(&self) -> Option<T> {
        self.tail_bound
    }

    pub fn source(&self) -> CovSource {
        self.source
    }

    /// `gamma(0) + 2 sum |gamma(k)|` plus tail: bound for `2 pi ||f||_inf`.
    pub fn abs_sum_bound(&self) -> Option<T> {
        let tail = self.tail_bound?;
        let s = csum(self.values[1..].iter().map(|g| g.abs()));
        Some(self.values[0] + T::of(2.0) * (s + tail))
    }
}

/// Evaluation rule `f(lambda) = (1/2pi) [gamma(0) + 2 sum gamma(k) cos(k lambda)]`.
#[derive(Debug, Clone, Copy)]
pub struct SpectralDensity<'a, T: Real = f64> {
    cov: &'a AutocovarianceFunction<T>,
}

impl<'a, T: Real> SpectralDensity<'a, T> {
    pub fn new(cov: &'a AutocovarianceFunction<T>) -> Self {
        Self { cov }
    }

    pub fn eval(&self, lambda: T) -> T {
        let mut acc = CompensatedSum::new();
        for (k, g) in self.cov.values.iter().enumerate().skip(1) {
            acc.add(*g * (T::of(k as f64) * lambda).cos());
        }
        (self.cov.values[0] + T::of(2.0) * acc.value()) / T::of(2.0 * std::f64::consts::PI)
    }

    /// Certified sup bound `(1/2pi)(gamma(0) + 2 sum |gamma(k)|)`.
    pub fn sup_bound(&self) -> Option<T> {
        self.cov
            .abs_sum_bound()
            .map(|b| b / T::of(2.0 * std::f64::consts::PI))
    }
}

/// Outcome of the long-run-variance computation.
#[derive(Debug, Clone, PartialEq)]
pub enum LongRunVariance<T: Real = f64> {
    /// `2 pi f(0)` with a certified absolute error bound.
    Value { value: T, error_bound: T },
    /// The covariance tail is not certified summable; the partial sums
    /// `sum_{k <= K} gamma(k)` are reported instead of a number.
    PossiblyUnbounded { partial_sums: Vec<(usize, T)> },
}

/// `2 pi f(0) = gamma(0) + 2 sum_{k >= 1} gamma(k)`, certified, or the
/// partial-sum trace when the tail is not certified.
pub fn long_run_variance<T: Real>(cov: &AutocovarianceFunction<T>) -> LongRunVariance<T> {
    match cov.tail_bound() {
        Some(tail) => {
            let s = csum(cov.values[1..].iter().copied());
            LongRunVariance::Value {
                value: cov.values[0] + T::of(2.0) * s,
                error_bound: T::of(2.0) * tail,
            }
        }
        None => {
            let mut acc = CompensatedSum::new();
            let mut trace = Vec::new();
            for (k, g) in cov.values.iter().enumerate() {
                acc.add(*g);
                if k.is_power_of_two() || k == 0 || k == cov.values.len() - 1 {
                    trace.push((k, acc.value()));
                }
            }
            LongRunVariance::PossiblyUnbounded {
                partial_sums: trace,
            }
        }
    }
}

/// Lag weights `w(m) = sum_j d_j d_{j+m}` for `m = 0..=max_lag`.
///
/// Direct compensated dot products for moderate work, transform-based
/// autocorrelation (zero-padded, so no circular wrap) beyond the
/// threshold; both routes are deterministic and the choice depends only
/// on the input sizes.
pub fn lag_weights<T: Real>(d: &[T], max_lag: usize) -> Vec<T> {
    let len = d.len();
    let m_max = max_lag.min(len.saturating_sub(1));
    let work = len as u128 * (m_max as u128 + 1);
    if work <= FFT_WORK_THRESHOLD {
        let mut out = Vec::with_capacity(m_max + 1);
        for m in 0..=m_max {
            let mut acc = CompensatedSum::new();
            for j in 0..len - m {
                acc.add(d[j] * d[j + m]);
            }
            out.push(acc.value());
        }
        out
    } else {
        let size = (len + m_max + 1).next_power_of_two();
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(size);
        let ifft = planner.plan_fft_inverse(size);
        let mut buf: Vec<Complex<f64>> = d
            .iter()
            .map(|v| Complex::new(v.as_f64(), 0.0))
            .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
            .take(size)
            .collect();
        fft.process(&mut buf);
        for z in buf.iter_mut() {
            *z = Complex::new(z.norm_sqr(), 0.0);
        }
        ifft.process(&mut buf);
        let scale = 1.0 / size as f64;
        (0..=m_max).map(|m| T::of(buf[m].re * scale)).collect()
    }
}

/// Bilinear variance form `E (sum_j d_j xi_j)^2 = sum_{j,k} d_j d_k gamma(j-k)`
/// for a finite coefficient array `d`.
pub fn weighted_variance<T: Real>(cov: &AutocovarianceFunction<T>, d: &[T]) -> Result<T> {
    if d.is_empty() {
        return Err(Error::Precondition("empty coefficient array".into()));
    }
    let needed = d.len() - 1;
    if needed > cov.k_max() && cov.tail_bound().is_none() {
        return Err(Error::LagOutOfRange {
            lag: needed,
            k_max: cov.k_max(),
        });
    }
    let m_max = needed.min(cov.k_max());
    let w = lag_weights(d, m_max);
    let mut acc = CompensatedSum::new();
    acc.add(w[0] * cov.at(0));
    for (m, wm) in w.iter().enumerate().skip(1) {
        acc.add(T::of(2.0) * *wm * cov.at(m as i64));
    }
    Ok(acc.value())
}

/// One row of the variance-ratio trace.
#[derive(Debug, Clone, Copy)]
pub struct VarianceRatioPoint<T: Real = f64> {
    pub n: usize,
    pub ratio: T,
    /// Certified absolute error bound from covariance-tail truncation.
    pub error_bound: T,
}

/// `Var(S_n) / b_n^2` for each window size, computed exactly from
/// `gamma` over the certified support.
pub fn variance_ratio_trace<T: Real>(
    a: &WeightSequence<T>,
    cov: &AutocovarianceFunction<T>,
    n_list: &[usize],
    rel_tail_tol: f64,
) -> Result<Vec<VarianceRatioPoint<T>>> {
    let mut out = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let w = window_coefficients(a, n, rel_tail_tol)?;
        out.push(variance_ratio_point(&w, cov)?);
    }
    Ok(out)
}

/// Single variance-ratio evaluation on an already-computed window.
pub fn variance_ratio_point<T: Real>(
    w: &WindowCoefficients<T>,
    cov: &AutocovarianceFunction<T>,
) -> Result<VarianceRatioPoint<T>> {
    let values = w.values();
    let needed = values.len() - 1;
    if needed > cov.k_max() && cov.tail_bound().is_none() {
        return Err(Error::LagOutOfRange {
            lag: needed,
            k_max: cov.k_max(),
        });
    }
    let m_max = needed.min(cov.k_max());
    let lw = lag_weights(values, m_max);
    let mut acc = CompensatedSum::new();
    acc.add(lw[0] * cov.at(0));
    for (m, wm) in lw.iter().enumerate().skip(1) {
        acc.add(T::of(2.0) * *wm * cov.at(m as i64));
    }
    let var = acc.value();
    // Lags beyond k_max contribute at most 2 * tail * w(0).
    let tail_err = cov.tail_bound().unwrap_or_else(T::zero) * T::of(2.0) * lw[0];
    Ok(VarianceRatioPoint {
        n: w.n(),
        ratio: var / w.bn_sq(),
        error_bound: tail_err / w.bn_sq(),
    })
}

/// The first-difference smoothness ratio `(1/sum d^2) sum_j |d_j - d_{j-1}|^2` for an
/// arbitrary finite array (shared kernel with the window functionals).
pub fn smoothness_condition_a3<T: Real>(d: &[T]) -> Result<T> {
    let dn_sq = csum(d.iter().map(|v| *v * *v));
    if !(dn_sq > T::zero()) {
        return Err(Error::Precondition(
            "smoothness ratio needs a nonzero array".into(),
        ));
    }
    Ok(diff_sq_sum(d) / dn_sq)
}

/// `gamma(k) = sum_{j >= 0} u_{k+j} u_j` for a causal coefficient family,
/// with a certified covariance tail when the family is absolutely
/// summable (geometric, finite) and none for the blockwise example.
pub fn autocov_causal_linear(u: &CausalCoeffs, k_max: usize) -> Result<AutocovarianceFunction> {
    u.validate()?;
    match u {
        CausalCoeffs::Delta => AutocovarianceFunction::new(
            std::iter::once(1.0)
                .chain(std::iter::repeat(0.0))
                .take(k_max + 1)
                .collect(),
            Some(0.0),
            CovSource::Analytic,
        ),
        CausalCoeffs::Geometric { rho } => {
            let g0 = 1.0 / (1.0 - rho * rho);
            let values: Vec<f64> = (0..=k_max).map(|k| rho.powi(k as i32) * g0).collect();
            // sum_{k > k_max} gamma(k) = g0 rho^(k_max+1) / (1 - rho).
            let tail = g0 * rho.powi(k_max as i32 + 1) / (1.0 - rho);
            AutocovarianceFunction::new(values, Some(tail), CovSource::Analytic)
        }
        CausalCoeffs::Table(t) => {
            let mut values = vec![0.0f64; k_max + 1];
            for (k, v) in values.iter_mut().enumerate() {
                let mut acc = CompensatedSum::<f64>::new();
                for j in 0..t.len().saturating_sub(k) {
                    acc.add(t[j + k] * t[j]);
                }
                *v = acc.value();
            }
            AutocovarianceFunction::new(values, Some(0.0), CovSource::Analytic)
        }
        CausalCoeffs::Blockwise(c) => {
            let table = c.u_table();
            let mut values = vec![0.0f64; k_max + 1];
            for (k, v) in values.iter_mut().enumerate() {
                let mut acc = CompensatedSum::<f64>::new();
                for j in 0..table.len().saturating_sub(k) {
                    acc.add(table[j + k] * table[j]);
                }
                *v = acc.value();
            }
            // No certified summable tail: sum u_i diverges blockwise, so
            // sum_k gamma(k) >= u_{j0} sum_k u_{k+j0} is unbounded.
            AutocovarianceFunction::new(values, None, CovSource::TruncatedSeries)
        }
    }
}

/// Partial sums `sum_{k=0}^{K} gamma(k)` for a causal family via the
/// prefix identity `sum_{k<=K} gamma(k) = sum_j u_j (U(j+K) - U(j-1))`,
/// the boundedness-dichotomy trace.
pub fn causal_gamma_partial_sums(u: &CausalCoeffs, k_list: &[usize]) -> Vec<(usize, f64)> {
    match u {
        CausalCoeffs::Geometric { rho } => k_list
            .iter()
            .map(|&k| {
                let v = (1.0 - rho.powi(k as i32 + 1)) / ((1.0 - rho) * (1.0 - rho * rho));
                (k, v)
            })
            .collect(),
        CausalCoeffs::Delta => k_list.iter().map(|&k| (k, 1.0)).collect(),
        CausalCoeffs::Table(t) => gamma_partials_from_table(t, k_list),
        CausalCoeffs::Blockwise(c) => gamma_partials_from_table(c.u_table(), k_list),
    }
}

fn gamma_partials_from_table(t: &[f64], k_list: &[usize]) -> Vec<(usize, f64)> {
    let mut prefix = Vec::with_capacity(t.len() + 1);
    let mut acc = CompensatedSum::<f64>::new();
    prefix.push(0.0);
    for &v in t {
        acc.add(v);
        prefix.push(acc.value());
    }
    let total = *prefix.last().unwrap();
    let pre = |idx: i64| -> f64 {
        if idx < 0 {
            0.0
        } else if (idx as usize) < prefix.len() - 1 {
            prefix[(idx + 1) as usize]
        } else {
            total
        }
    };
    k_list
        .iter()
        .map(|&k| {
            let mut s = CompensatedSum::<f64>::new();
            for (j, &uj) in t.iter().enumerate() {
                if uj != 0.0 {
                    s.add(uj * (pre(j as i64 + k as i64) - pre(j as i64 - 1)));
                }
            }
            (k, s.value())
        })
        .collect()
}

/// Analytic autocovariance of an innovation model, when certified.
pub fn model_autocovariance(model: &InnovationModel, k_max: usize) -> Result<AutocovarianceFunction> {
    let white = |variance: f64| {
        AutocovarianceFunction::new(
            std::iter::once(variance)
                .chain(std::iter::repeat(0.0))
                .take(k_max + 1)
                .collect(),
            Some(0.0),
            CovSource::Analytic,
        )
    };
    match model.kind() {
        InnovationKind::Iid(_) => white(1.0),
        InnovationKind::MdsProduct { .. } | InnovationKind::NonergodicScale { .. } => {
            white(model.variance()?)
        }
        InnovationKind::CausalLinear { u } => autocov_causal_linear(u, k_max),
        InnovationKind::BernoulliShift { g, .. } => match g {
            GMap::Linear => {
                let values: Vec<f64> = (0..=k_max).map(|k| 0.5f64.powi(k as i32) / 12.0).collect();
                let tail = 0.5f64.powi(k_max as i32) / 12.0;
                AutocovarianceFunction::new(values, Some(tail), CovSource::Analytic)
            }
            GMap::HalfIndicator => white(0.25),
            GMap::Square => {
                // gamma(k) = 2^-k / 12 + 4^-k / 180.
                let values: Vec<f64> = (0..=k_max)
                    .map(|k| 0.5f64.powi(k as i32) / 12.0 + 0.25f64.powi(k as i32) / 180.0)
                    .collect();
                let tail =
                    0.5f64.powi(k_max as i32) / 12.0 + 0.25f64.powi(k_max as i32) / 540.0;
                AutocovarianceFunction::new(values, Some(tail), CovSource::Analytic)
            }
            GMap::SingularSin { .. } => Err(Error::NoAnalyticStructure {
                model: model.name(),
            }),
        },
    }
}
