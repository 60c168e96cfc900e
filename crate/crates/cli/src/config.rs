//! Experiment configuration schema.
//!
//! One JSON file describes one experiment. Unknown fields are rejected;
//! fields belonging to a different model or weight kind are rejected by
//! the builders with a named diagnostic.

use linproc::conditions::{AlphaKind, AlphaSequence, QuantileFunction};
use linproc::harness::{MixtureComponent, TargetLaw};
use linproc::innovations::{
    CausalCoeffs, GMap, IidDistribution, InnovationModel, PredictableFactor, PsiSequence,
    ScaleComponent,
};
use linproc::weights::WeightSequence;
use serde::Deserialize;

pub type BuildResult<T> = Result<T, String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    VarianceTrace,
    Clt,
    Conditions,
    Counterexample,
    Lemmas,
}

/// Top-level configuration file.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub weights: Option<WeightSpec>,
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub n_list: Option<Vec<usize>>,
    #[serde(default)]
    pub replicates: Option<usize>,
    #[serde(default)]
    pub master_seed: Option<u64>,
    #[serde(default)]
    pub rel_tail_tol: Option<f64>,
    #[serde(default)]
    pub ks_threshold: Option<f64>,
    #[serde(default)]
    pub target: Option<TargetSpec>,
    /// Relative tolerance on the final variance-trace point.
    #[serde(default)]
    pub target_tolerance: Option<f64>,
    /// Autocovariance truncation order for analytic models.
    #[serde(default)]
    pub k_max: Option<usize>,
    /// Dump raw replicate values as a one-column CSV.
    #[serde(default)]
    pub dump_replicates: Option<bool>,
    /// Condition checks (experiment = "conditions").
    #[serde(default)]
    pub checks: Option<Vec<ConditionCheckSpec>>,
    /// Counterexample inputs.
    #[serde(default)]
    pub psi: Option<PsiSpec>,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub n_cap: Option<usize>,
    /// Lemma-trace block size p.
    #[serde(default)]
    pub block_size: Option<usize>,
    /// Random-instance count for the numeric-inequality property run.
    #[serde(default)]
    pub wu_trials: Option<usize>,
}

impl ConfigFile {
    pub fn validate(&self) -> BuildResult<()> {
        if self.schema_version != 1 {
            return Err(format!(
                "unsupported schema_version {} (expected 1)",
                self.schema_version
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: String,
    #[serde(default)]
    pub distribution: Option<String>,
    #[serde(default)]
    pub h: Option<HSpec>,
    #[serde(default)]
    pub u: Option<CoeffSpec>,
    #[serde(default)]
    pub g: Option<GMapSpec>,
    #[serde(default)]
    pub bit_depth: Option<u32>,
    #[serde(default)]
    pub components: Option<Vec<ComponentSpec>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HSpec {
    pub kind: String,
    #[serde(default)]
    pub breaks: Option<Vec<f64>>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffSpec {
    pub kind: String,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub psi: Option<PsiSpec>,
    #[serde(default)]
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GMapSpec {
    pub kind: String,
    #[serde(default)]
    pub p: Option<f64>,
    #[serde(default)]
    pub a: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub probability: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub kind: String,
    #[serde(default)]
    pub offset: Option<i64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default)]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PsiSpec {
    pub kind: String,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub kind: String,
    #[serde(default)]
    pub variance: Option<f64>,
    #[serde(default)]
    pub components: Option<Vec<TargetComponentSpec>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetComponentSpec {
    pub weight: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionCheckSpec {
    pub condition: String,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub g: Option<GMapSpec>,
    #[serde(default)]
    pub t: Option<f64>,
    #[serde(default)]
    pub shells: Option<usize>,
    #[serde(default)]
    pub n_cap: Option<usize>,
    #[serde(default)]
    pub k_cap: Option<usize>,
    #[serde(default)]
    pub q: Option<QSpec>,
    #[serde(default)]
    pub alpha: Option<AlphaSpec>,
    #[serde(default)]
    pub alpha_kind: Option<String>,
    #[serde(default)]
    pub moment_t: Option<f64>,
    /// Expected verdict; the run fails when the evaluated verdict differs.
    #[serde(default)]
    pub expect: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QSpec {
    pub kind: String,
    #[serde(default)]
    pub value: Option<f64>,
    #[serde(default)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaSpec {
    pub kind: String,
    #[serde(default)]
    pub coeff: Option<f64>,
    #[serde(default)]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
}

fn reject_foreign<T>(field: &Option<T>, name: &str, kind: &str) -> BuildResult<()> {
    if field.is_some() {
        Err(format!("field `{name}` does not apply to kind `{kind}`"))
    } else {
        Ok(())
    }
}

fn required<T: Clone>(field: &Option<T>, name: &str, kind: &str) -> BuildResult<T> {
    field
        .clone()
        .ok_or_else(|| format!("kind `{kind}` requires field `{name}`"))
}

impl ModelSpec {
    pub fn build(&self) -> BuildResult<InnovationModel> {
        let kind = self.kind.as_str();
        match kind {
            "iid" => {
                reject_foreign(&self.h, "h", kind)?;
                reject_foreign(&self.u, "u", kind)?;
                reject_foreign(&self.g, "g", kind)?;
                reject_foreign(&self.bit_depth, "bit_depth", kind)?;
                reject_foreign(&self.components, "components", kind)?;
                let dist = match self.distribution.as_deref() {
                    None | Some("standard-normal") => IidDistribution::StandardNormal,
                    Some("rademacher") => IidDistribution::Rademacher,
                    Some("centered-uniform") => IidDistribution::CenteredUniform,
                    Some(other) => return Err(format!("unknown iid distribution `{other}`")),
                };
                Ok(InnovationModel::iid(dist))
            }
            "mds-product" => {
                reject_foreign(&self.distribution, "distribution", kind)?;
                reject_foreign(&self.u, "u", kind)?;
                reject_foreign(&self.g, "g", kind)?;
                reject_foreign(&self.components, "components", kind)?;
                let h = match &self.h {
                    None => PredictableFactor::TanhDefault,
                    Some(spec) => spec.build()?,
                };
                InnovationModel::mds_product(h).map_err(|e| e.to_string())
            }
            "causal-linear" => {
                reject_foreign(&self.distribution, "distribution", kind)?;
                reject_foreign(&self.h, "h", kind)?;
                reject_foreign(&self.g, "g", kind)?;
                reject_foreign(&self.components, "components", kind)?;
                let u = required(&self.u, "u", kind)?.build()?;
                InnovationModel::causal_linear(u).map_err(|e| e.to_string())
            }
            "bernoulli-shift" => {
                reject_foreign(&self.distribution, "distribution", kind)?;
                reject_foreign(&self.h, "h", kind)?;
                reject_foreign(&self.u, "u", kind)?;
                reject_foreign(&self.components, "components", kind)?;
                let g = required(&self.g, "g", kind)?.build()?;
                InnovationModel::bernoulli_shift(g, self.bit_depth.unwrap_or(64))
                    .map_err(|e| e.to_string())
            }
            "nonergodic-scale" => {
                reject_foreign(&self.distribution, "distribution", kind)?;
                reject_foreign(&self.h, "h", kind)?;
                reject_foreign(&self.u, "u", kind)?;
                reject_foreign(&self.g, "g", kind)?;
                reject_foreign(&self.bit_depth, "bit_depth", kind)?;
                let comps = required(&self.components, "components", kind)?
                    .iter()
                    .map(|c| ScaleComponent {
                        probability: c.probability,
                        scale: c.scale,
                    })
                    .collect();
                InnovationModel::nonergodic_scale(comps).map_err(|e| e.to_string())
            }
            other => Err(format!("unknown model kind `{other}`")),
        }
    }
}

impl HSpec {
    fn build(&self) -> BuildResult<PredictableFactor> {
        match self.kind.as_str() {
            "tanh-default" => Ok(PredictableFactor::TanhDefault),
            "table" => Ok(PredictableFactor::Table {
                breaks: required(&self.breaks, "breaks", "table")?,
                values: required(&self.values, "values", "table")?,
            }),
            other => Err(format!("unknown predictable factor kind `{other}`")),
        }
    }
}

impl CoeffSpec {
    pub fn build(&self) -> BuildResult<CausalCoeffs> {
        let kind = self.kind.as_str();
        match kind {
            "delta" => Ok(CausalCoeffs::Delta),
            "geometric" => Ok(CausalCoeffs::Geometric {
                rho: required(&self.rho, "rho", kind)?,
            }),
            "table" => Ok(CausalCoeffs::Table(required(&self.values, "values", kind)?)),
            "blockwise" => {
                let psi = required(&self.psi, "psi", kind)?.build()?;
                let cutoff = required(&self.cutoff, "cutoff", kind)?;
                let c = linproc::innovations::blockwise_divergence_weights(psi, cutoff)
                    .map_err(|e| e.to_string())?;
                Ok(CausalCoeffs::Blockwise(c))
            }
            other => Err(format!("unknown coefficient kind `{other}`")),
        }
    }
}

impl GMapSpec {
    pub fn build(&self) -> BuildResult<GMap> {
        let g = match self.kind.as_str() {
            "linear" => GMap::Linear,
            "square" => GMap::Square,
            "half-indicator" => GMap::HalfIndicator,
            "singular-sin" => GMap::SingularSin {
                p: required(&self.p, "p", "singular-sin")?,
                a: required(&self.a, "a", "singular-sin")?,
            },
            other => return Err(format!("unknown map kind `{other}`")),
        };
        g.validate().map_err(|e| e.to_string())?;
        Ok(g)
    }
}

impl WeightSpec {
    pub fn build(&self) -> BuildResult<WeightSequence<f64>> {
        let kind = self.kind.as_str();
        match kind {
            "partial-sum-delta" => Ok(WeightSequence::partial_sum_delta()),
            "finite-support" => WeightSequence::finite_support(
                self.offset.unwrap_or(0),
                required(&self.values, "values", kind)?,
            )
            .map_err(|e| e.to_string()),
            "power-decay" => WeightSequence::power_decay(required(&self.beta, "beta", kind)?)
                .map_err(|e| e.to_string()),
            "geometric" => WeightSequence::geometric(required(&self.ratio, "ratio", kind)?)
                .map_err(|e| e.to_string()),
            other => Err(format!("unknown weight kind `{other}`")),
        }
    }
}

impl PsiSpec {
    pub fn build(&self) -> BuildResult<PsiSequence> {
        match self.kind.as_str() {
            "inverse-log" => Ok(PsiSequence::InverseLog),
            "inverse-power" => Ok(PsiSequence::InversePower {
                theta: required(&self.theta, "theta", "inverse-power")?,
            }),
            "zero" => Ok(PsiSequence::Zero),
            "table" => Ok(PsiSequence::Table(required(
                &self.values,
                "values",
                "table",
            )?)),
            other => Err(format!("unknown psi kind `{other}`")),
        }
    }
}

impl TargetSpec {
    pub fn build(&self) -> BuildResult<TargetLaw> {
        match self.kind.as_str() {
            "normal" => TargetLaw::normal(required(&self.variance, "variance", "normal")?)
                .map_err(|e| e.to_string()),
            "mixture" => {
                let comps = required(&self.components, "components", "mixture")?
                    .iter()
                    .map(|c| MixtureComponent {
                        weight: c.weight,
                        variance: c.variance,
                    })
                    .collect();
                TargetLaw::mixture(comps).map_err(|e| e.to_string())
            }
            other => Err(format!("unknown target kind `{other}`")),
        }
    }
}

impl QSpec {
    pub fn build(&self) -> BuildResult<QuantileFunction> {
        let q = match self.kind.as_str() {
            "constant" => QuantileFunction::Constant(required(&self.value, "value", "constant")?),
            "inverse-power" => QuantileFunction::InversePower {
                p: required(&self.p, "p", "inverse-power")?,
            },
            other => return Err(format!("unknown quantile kind `{other}`")),
        };
        q.validate().map_err(|e| e.to_string())?;
        Ok(q)
    }
}

impl AlphaSpec {
    pub fn build(&self) -> BuildResult<AlphaSequence> {
        let a = match self.kind.as_str() {
            "zero" => AlphaSequence::Zero,
            "geometric" => AlphaSequence::Geometric {
                coeff: required(&self.coeff, "coeff", "geometric")?,
                ratio: required(&self.ratio, "ratio", "geometric")?,
            },
            "power-law" => AlphaSequence::PowerLaw {
                coeff: self.coeff.unwrap_or(1.0),
                theta: required(&self.theta, "theta", "power-law")?,
            },
            "finite-lag" => AlphaSequence::FiniteLag(required(&self.values, "values", "finite-lag")?),
            other => return Err(format!("unknown alpha kind `{other}`")),
        };
        a.validate().map_err(|e| e.to_string())?;
        Ok(a)
    }
}

pub fn parse_alpha_kind(s: Option<&str>) -> BuildResult<AlphaKind> {
    match s {
        None | Some("alpha-bar") => Ok(AlphaKind::MixingaleBar),
        Some("alpha") => Ok(AlphaKind::StrongMixing),
        Some(other) => Err(format!("unknown alpha family `{other}`")),
    }
}
