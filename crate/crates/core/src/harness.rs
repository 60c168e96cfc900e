//! Monte Carlo verification of the distributional conclusions: simulate
//! `S_n / b_n`, compare against the target normal or normal-mixture law,
//! check the variance limit empirically, and evaluate the weighted-square
//! functional.
//!
//! Replicates are independent units keyed by `(master_seed, index)`;
//! they may run on any number of worker threads and the aggregation is
//! index-ordered, so reports are byte-identical regardless of
//! parallelism.

use crate::error::{Error, Result};
use crate::innovations::InnovationModel;
use crate::num::CompensatedSum;
use crate::rng::CounterRng;
use crate::special::normal_cdf_var;
use crate::weights::{window_coefficients, WeightSequence, WindowCoefficients};
use rayon::prelude::*;
use serde::Serialize;

/// Target law for `S_n / b_n`: centered normal or a finite scale mixture.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum TargetLaw {
    Normal { variance: f64 },
    Mixture { components: Vec<MixtureComponent> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub variance: f64,
}

impl TargetLaw {
    pub fn normal(variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(Error::Precondition(format!(
                "target variance must be positive, got {variance}"
            )));
        }
        Ok(TargetLaw::Normal { variance })
    }

    pub fn mixture(components: Vec<MixtureComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Precondition("mixture needs components".into()));
        }
        if components.iter().any(|c| !(c.variance > 0.0) || c.weight < 0.0) {
            return Err(Error::Precondition(
                "mixture variances must be positive and weights nonnegative".into(),
            ));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!(
                "mixture weights must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(TargetLaw::Mixture { components })
    }

    /// Cumulative distribution function of the target law.
    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            TargetLaw::Normal { variance } => normal_cdf_var(x, *variance),
            TargetLaw::Mixture { components } => components
                .iter()
                .map(|c| c.weight * normal_cdf_var(x, c.variance))
                .sum(),
        }
    }

    /// Mean variance of the law (for diagnostics).
    pub fn variance(&self) -> f64 {
        match self {
            TargetLaw::Normal { variance } => *variance,
            TargetLaw::Mixture { components } => {
                components.iter().map(|c| c.weight * c.variance).sum()
            }
        }
    }
}

/// `x -> sum_i w_i Phi(x / sqrt(v_i))`, validated.
pub fn mixture_cdf(components: Vec<MixtureComponent>) -> Result<impl Fn(f64) -> f64> {
    let law = TargetLaw::mixture(components)?;
    Ok(move |x: f64| law.cdf(x))
}

/// Defaults shared by configs and the CLI.
pub const DEFAULT_KS_THRESHOLD: f64 = 0.05;
pub const DEFAULT_REL_TAIL_TOL: f64 = 1e-2;

/// A complete simulation experiment.
#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub model: InnovationModel,
    pub weights: WeightSequence<f64>,
    pub n: usize,
    pub replicates: usize,
    pub master_seed: u64,
    pub rel_tail_tol: f64,
    pub target: TargetLaw,
    pub ks_threshold: f64,
}

impl SimulationConfig {
    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Precondition("need at least one replicate".into()));
        }
        if self.n == 0 {
            return Err(Error::Precondition("window length n must be >= 1".into()));
        }
        if !(self.ks_threshold > 0.0 && self.ks_threshold < 1.0) {
            return Err(Error::Precondition("ks threshold must lie in (0,1)".into()));
        }
        Ok(())
    }
}

/// Monte Carlo summary of one CLT experiment.
#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub ks_distance: f64,
    pub ks_threshold: f64,
    pub target: TargetLaw,
    pub replicates: usize,
    pub n: usize,
    pub pass: bool,
    /// Wall-clock duration; excluded from serialized reports so reruns
    /// are byte-identical (the CLI routes it to the metadata file).
    #[serde(skip)]
    pub runtime_ms: u64,
}

/// `S_n = sum_j b_{n,j} xi_j` over the certified support for one path.
pub fn simulate_sn(
    model: &InnovationModel,
    weights: &WeightSequence<f64>,
    n: usize,
    seed: u64,
    rel_tail_tol: f64,
) -> Result<f64> {
    let w = window_coefficients(weights, n, rel_tail_tol)?;
    sn_on_window(model, &w, CounterRng::new(seed))
}

/// The same weighted sum against a precomputed window.
pub fn sn_on_window(
    model: &InnovationModel,
    w: &WindowCoefficients<f64>,
    rng: CounterRng,
) -> Result<f64> {
    let path = model.sample_path(w.j_lo(), w.j_hi(), rng)?;
    let mut acc = CompensatedSum::<f64>::new();
    for (b, xi) in w.values().iter().zip(&path) {
        acc.add(b * xi);
    }
    Ok(acc.value())
}

/// All normalized replicate values `S_n / b_n`, index-keyed and
/// order-deterministic under any worker count.
pub fn replicate_values(config: &SimulationConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let w = window_coefficients(&config.weights, config.n, config.rel_tail_tol)?;
    let bn = w.bn_sq().sqrt();
    let master = CounterRng::new(config.master_seed);
    let values: Vec<Result<f64>> = (0..config.replicates)
        .into_par_iter()
        .map(|r| sn_on_window(&config.model, &w, master.derive(r as u64)).map(|s| s / bn))
        .collect();
    let mut out = Vec::with_capacity(values.len());
    for (idx, v) in values.into_iter().enumerate() {
        match v {
            Ok(x) => out.push(x),
            Err(e) => {
                return Err(Error::Precondition(format!(
                    "replicate {idx} failed: {e}"
                )))
            }
        }
    }
    Ok(out)
}

/// Two-sided Kolmogorov-Smirnov distance of a sample against a CDF.
pub fn ks_statistic(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / m - f).max(f - i as f64 / m);
    }
    d
}

/// Run the Monte Carlo CLT experiment.
pub fn monte_carlo_clt(config: &SimulationConfig) -> Result<CltReport> {
    let start = std::time::Instant::now();
    let values = replicate_values(config)?;
    let report = clt_report_from_values(&values, config, start.elapsed().as_millis() as u64);
    Ok(report)
}

fn clt_report_from_values(values: &[f64], config: &SimulationConfig, runtime_ms: u64) -> CltReport {
    let m = values.len() as f64;
    let mean = crate::num::csum(values.iter().copied()) / m;
    let var = crate::num::csum(values.iter().map(|v| (v - mean) * (v - mean))) / m;
    let ks = ks_statistic(values, |x| config.target.cdf(x));
    CltReport {
        empirical_mean: mean,
        empirical_variance: var,
        ks_distance: ks,
        ks_threshold: config.ks_threshold,
        target: config.target.clone(),
        replicates: values.len(),
        n: config.n,
        pass: ks < config.ks_threshold,
        runtime_ms,
    }
}

/// Sample variance of `S_n / b_n` with a confidence half-width from the
/// empirical fourth moment (`1.96 sqrt((m4 - v^2)/R)`).
pub fn empirical_variance_ratio(config: &SimulationConfig) -> Result<(f64, f64)> {
    if config.replicates < 30 {
        return Err(Error::Precondition(
            "variance ratio needs at least 30 replicates for a meaningful interval".into(),
        ));
    }
    let values = replicate_values(config)?;
    let m = values.len() as f64;
    let mean = crate::num::csum(values.iter().copied()) / m;
    let var = crate::num::csum(values.iter().map(|v| (v - mean) * (v - mean))) / (m - 1.0);
    let m4 = crate::num::csum(values.iter().map(|v| (v - mean).powi(4))) / m;
    let half_width = 1.96 * ((m4 - var * var).max(0.0) / m).sqrt();
    Ok((var, half_width))
}

/// `(1/b_n^2) sum_j b_{n,j}^2 xi_j^2` for one sampled path.
pub fn weighted_square_functional(
    model: &InnovationModel,
    weights: &WeightSequence<f64>,
    n: usize,
    seed: u64,
    rel_tail_tol: f64,
) -> Result<f64> {
    let w = window_coefficients(weights, n, rel_tail_tol)?;
    let path = model.sample_path(w.j_lo(), w.j_hi(), CounterRng::new(seed))?;
    Ok(weighted_square_kernel(w.values(), w.bn_sq(), &path))
}

/// The functional on an explicit path (test hook for injected paths).
pub fn weighted_square_kernel(b: &[f64], bn_sq: f64, path: &[f64]) -> f64 {
    let mut acc = CompensatedSum::<f64>::new();
    for (bj, xi) in b.iter().zip(path) {
        acc.add(bj * bj * xi * xi);
    }
    acc.value() / bn_sq
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::innovations::{IidDistribution, PredictableFactor, ScaleComponent};
    use crate::special::normal_quantile;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn iid_normal() -> InnovationModel {
        InnovationModel::iid(IidDistribution::StandardNormal)
    }

    fn delta_config(n: usize, replicates: usize, seed: u64) -> SimulationConfig {
        SimulationConfig {
            model: iid_normal(),
            weights: WeightSequence::partial_sum_delta(),
            n,
            replicates,
            master_seed: seed,
            rel_tail_tol: 1e-9,
            target: TargetLaw::normal(1.0).unwrap(),
            ks_threshold: DEFAULT_KS_THRESHOLD,
        }
    }

    #[test]
    fn sn_delta_weights_is_plain_partial_sum() {
        let model = iid_normal();
        let n = 64usize;
        let rng = CounterRng::new(7);
        let w = window_coefficients(&WeightSequence::partial_sum_delta(), n, 1e-9).unwrap();
        let s = sn_on_window(&model, &w, rng).unwrap();
        let path = model.sample_path(-(n as i64), -1, rng).unwrap();
        let direct: f64 = path.iter().sum();
        assert_relative_eq!(s, direct, max_relative = 1e-12);
    }

    #[test]
    fn sn_matches_double_sum_oracle() {
        // Finite weights a_0 = a_1 = 1, n = 3: S_n must equal the direct
        // double sum over k of the linear process on the same path.
        let model = iid_normal();
        let a = WeightSequence::finite_support(0, vec![1.0, 1.0]).unwrap();
        let n = 3usize;
        let rng = CounterRng::new(12345);
        let w = window_coefficients(&a, n, 1e-9).unwrap();
        let s = sn_on_window(&model, &w, rng).unwrap();
        // X_k = sum_j a_{k+j} xi_j: support of j for k in 1..=3 is
        // [-3, 0]; sample the same indices.
        let path = model.sample_path(w.j_lo(), w.j_hi(), rng).unwrap();
        let xi = |j: i64| path[(j - w.j_lo()) as usize];
        let mut oracle = 0.0;
        for k in 1..=3i64 {
            for j in w.j_lo()..=w.j_hi() {
                let a_kj = a.value(k + j);
                if a_kj != 0.0 {
                    oracle += a_kj * xi(j);
                }
            }
        }
        assert_relative_eq!(s, oracle, max_relative = 1e-12);
    }

    #[test]
    fn sn_is_deterministic() {
        let model = iid_normal();
        let a = WeightSequence::geometric(0.5).unwrap();
        let s1 = simulate_sn(&model, &a, 16, 99, 1e-6).unwrap();
        let s2 = simulate_sn(&model, &a, 16, 99, 1e-6).unwrap();
        assert_eq!(s1, s2);
    }

    #[test]
    fn mixture_cdf_examples() {
        let cdf = mixture_cdf(vec![
            MixtureComponent {
                weight: 0.5,
                variance: 1.0,
            },
            MixtureComponent {
                weight: 0.5,
                variance: 4.0,
            },
        ])
        .unwrap();
        assert_abs_diff_eq!(cdf(0.0), 0.5, epsilon = 1e-14);
        let expect = 0.5 * crate::special::normal_cdf(1.0) + 0.5 * crate::special::normal_cdf(0.5);
        assert_abs_diff_eq!(cdf(1.0), expect, epsilon = 1e-13);
        // Monotone with limits 0 and 1.
        let mut prev = 0.0;
        for i in -400..=400 {
            let v = cdf(i as f64 / 40.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert!(cdf(-12.0) < 1e-9 && cdf(12.0) > 1.0 - 1e-9);
        // Single component at zero: symmetry.
        let single = TargetLaw::normal(2.5).unwrap();
        assert_abs_diff_eq!(single.cdf(0.0), 0.5, epsilon = 1e-14);
        // Invalid weights rejected.
        assert!(mixture_cdf(vec![MixtureComponent {
            weight: 0.7,
            variance: 1.0
        }])
        .is_err());
    }

    #[test]
    fn ks_on_inverse_cdf_grid_is_half_over_m() {
        // Exact inverse-CDF grid of size m: D = 1/(2m) up to 1e-12.
        let m = 500usize;
        let grid: Vec<f64> = (0..m)
            .map(|i| normal_quantile((i as f64 + 0.5) / m as f64))
            .collect();
        let d = ks_statistic(&grid, crate::special::normal_cdf);
        assert_abs_diff_eq!(d, 0.5 / m as f64, epsilon = 1e-12);
    }

    #[test]
    fn exact_normal_case_beats_one_percent_critical_value_mostly() {
        // S_n/b_n is exactly standard normal here, so the KS distance
        // stays below the asymptotic 1% critical value 1.628/sqrt(m) in
        // at least 95% of meta-repetitions.
        let critical = 1.628 / (2000.0f64).sqrt();
        let mut below = 0;
        for meta in 0..100u64 {
            let cfg = delta_config(16, 2000, 1000 + meta);
            let rep = monte_carlo_clt(&cfg).unwrap();
            if rep.ks_distance < critical {
                below += 1;
            }
        }
        assert!(below >= 95, "only {below}/100 below the 1% critical value");
    }

    #[test]
    fn variance_ratio_ci_covers_unity() {
        let mut covered = 0;
        for meta in 0..100u64 {
            let cfg = delta_config(16, 2000, 31_000 + meta);
            let (ratio, hw) = empirical_variance_ratio(&cfg).unwrap();
            if (ratio - 1.0).abs() <= hw {
                covered += 1;
            }
        }
        assert!(covered >= 90, "coverage {covered}/100");
    }

    #[test]
    fn variance_ratio_needs_replicates() {
        let cfg = delta_config(8, 10, 1);
        assert!(matches!(
            empirical_variance_ratio(&cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn mds_innovations_satisfy_clt_without_condition_checking() {
        // Martingale-difference innovations: the CLT needs no condition
        // checks; target variance is the analytic second moment.
        let h = PredictableFactor::TanhDefault;
        let sigma_sq = h.square_moment().unwrap();
        let cfg = SimulationConfig {
            model: InnovationModel::mds_product(h).unwrap(),
            weights: WeightSequence::partial_sum_delta(),
            n: 256,
            replicates: 2000,
            master_seed: 777,
            rel_tail_tol: 1e-9,
            target: TargetLaw::normal(sigma_sq).unwrap(),
            ks_threshold: DEFAULT_KS_THRESHOLD,
        };
        let rep = monte_carlo_clt(&cfg).unwrap();
        assert!(rep.pass, "ks = {}", rep.ks_distance);
    }

    #[test]
    fn nonergodic_matches_mixture_law() {
        let cfg = SimulationConfig {
            model: InnovationModel::nonergodic_scale(vec![
                ScaleComponent {
                    probability: 0.5,
                    scale: 1.0,
                },
                ScaleComponent {
                    probability: 0.5,
                    scale: 2.0,
                },
            ])
            .unwrap(),
            weights: WeightSequence::partial_sum_delta(),
            n: 128,
            replicates: 2000,
            master_seed: 2024,
            rel_tail_tol: 1e-9,
            target: TargetLaw::mixture(vec![
                MixtureComponent {
                    weight: 0.5,
                    variance: 1.0,
                },
                MixtureComponent {
                    weight: 0.5,
                    variance: 4.0,
                },
            ])
            .unwrap(),
            ks_threshold: DEFAULT_KS_THRESHOLD,
        };
        let rep = monte_carlo_clt(&cfg).unwrap();
        assert!(rep.pass, "ks = {}", rep.ks_distance);
        // Pooled variance approaches E[eta] = 2.5 even though the law is
        // not normal.
        assert_abs_diff_eq!(rep.empirical_variance, 2.5, epsilon = 0.25);
    }

    #[test]
    fn weighted_square_functional_examples() {
        // iid variance 1, delta weights, long path: near 1.
        let v = weighted_square_functional(
            &iid_normal(),
            &WeightSequence::partial_sum_delta(),
            100_000,
            5,
            1e-9,
        )
        .unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 0.05);
        // Injected zero path: exactly zero.
        let w = window_coefficients(&WeightSequence::partial_sum_delta(), 64, 1e-9).unwrap();
        let zeros = vec![0.0; w.support_len()];
        assert_eq!(weighted_square_kernel(w.values(), w.bn_sq(), &zeros), 0.0);
    }

    #[test]
    fn weighted_square_identifies_realized_scale() {
        let model = InnovationModel::nonergodic_scale(vec![
            ScaleComponent {
                probability: 0.5,
                scale: 1.0,
            },
            ScaleComponent {
                probability: 0.5,
                scale: 2.0,
            },
        ])
        .unwrap();
        let master = CounterRng::new(909);
        let mut seen_four = false;
        for r in 0..20u64 {
            let rng = master.derive(r);
            let scale = model.realized_scale(rng).unwrap();
            if scale == 2.0 {
                // Compute the functional with the same replicate stream.
                let w =
                    window_coefficients(&WeightSequence::partial_sum_delta(), 100_000, 1e-9)
                        .unwrap();
                let path = model.sample_path(w.j_lo(), w.j_hi(), rng).unwrap();
                let v = weighted_square_kernel(w.values(), w.bn_sq(), &path);
                assert_abs_diff_eq!(v, 4.0, epsilon = 0.1);
                seen_four = true;
                break;
            }
        }
        assert!(seen_four, "no scale-2 path among 20 replicates");
    }

    #[test]
    fn reports_identical_across_worker_counts() {
        let cfg = delta_config(64, 500, 4242);
        let pool1 = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let pool4 = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let r1 = pool1.install(|| monte_carlo_clt(&cfg)).unwrap();
        let r4 = pool4.install(|| monte_carlo_clt(&cfg)).unwrap();
        let j1 = serde_json::to_string(&r1).unwrap();
        let j4 = serde_json::to_string(&r4).unwrap();
        assert_eq!(j1, j4);
        let v1 = pool1.install(|| replicate_values(&cfg)).unwrap();
        let v4 = pool4.install(|| replicate_values(&cfg)).unwrap();
        assert_eq!(v1, v4);
    }
}
