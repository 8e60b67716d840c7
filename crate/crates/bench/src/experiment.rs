//! Batched runs: generate instances, compare each policy to the DP optimum.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tfokp::instances::simulate_prediction;
use tfokp::oracles::{compute_dstar, opt_dp_with_budget, DEFAULT_DP_BUDGET};
use tfokp::seeds::derive_seed;
use tfokp::{run, BoundContext, Error, GeneratorSpec64, Instance64, PolicySpec64};

use crate::cr::Cr;
use crate::stats::{cdf, summarize, CdfPoint, Summary};

/// Where LA-ECT gets its prediction from in an experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    /// `d⋆(1 + η)` per instance, `η ~ N(0, σ)`.
    #[default]
    Simulated,
    /// The `prediction` given in the policy spec.
    Fixed,
}

// Seed streams kept apart from the instance stream.
const PREDICTION_STREAM: u64 = 0x5052_4544;
const THRESHOLD_STREAM: u64 = 0x5448_5245;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub policies: Vec<PolicySpec64>,
    pub generator: GeneratorSpec64,
    pub n_instances: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub prediction_sigma: f64,
    #[serde(default)]
    pub predictions: PredictionSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dp_budget: Option<u128>,
}

impl ExperimentSpec {
    pub fn new(policies: Vec<PolicySpec64>, generator: GeneratorSpec64, n_instances: usize, seed: u64) -> Self {
        ExperimentSpec {
            policies,
            generator,
            n_instances,
            seed,
            prediction_sigma: 0.0,
            predictions: PredictionSource::Simulated,
            output: None,
            dp_budget: None,
        }
    }

    pub fn validate(&self) -> tfokp::Result<()> {
        if self.n_instances == 0 {
            return Err(Error::InvalidInstance("n_instances must be at least 1".into()));
        }
        if self.policies.is_empty() {
            return Err(Error::InvalidInstance("no policies given".into()));
        }
        if !(self.prediction_sigma >= 0.0 && self.prediction_sigma.is_finite()) {
            return Err(Error::InvalidInstance(format!(
                "prediction_sigma must be >= 0, got {}",
                self.prediction_sigma
            )));
        }
        let mut names: Vec<String> = self.policies.iter().map(|p| p.name()).collect();
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidInstance(format!("duplicate policy {}", w[0])));
        }
        Ok(())
    }
}

/// Per-instance oracle quantities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceInfo {
    pub index: usize,
    pub fingerprint: String,
    pub items: usize,
    pub opt: f64,
    pub d_star: Option<f64>,
    pub d_max: Option<f64>,
    /// `d_max / d⋆`.
    pub rho: Option<f64>,
}

/// LA-ECT's ratio against its consistency bound `(ϱ + 2)/γ` on one instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyCheck {
    pub instance: usize,
    pub policy: String,
    pub gamma: f64,
    pub prediction: f64,
    pub d_star: f64,
    pub rho: f64,
    pub cr: Cr,
    pub bound: Cr,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyResult {
    pub spec: PolicySpec64,
    pub crs: Vec<Cr>,
    pub summary: Summary,
    pub cdf: Vec<CdfPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub seed: u64,
    pub prediction_sigma: f64,
    pub n_instances: usize,
    pub evaluated: usize,
    /// Instances whose DP exceeded the budget.
    pub skipped: usize,
    pub instances: Vec<InstanceInfo>,
    pub policies: BTreeMap<String, PolicyResult>,
    pub consistency: Vec<ConsistencyCheck>,
}

impl ExperimentReport {
    pub fn crs(&self, policy: &str) -> Option<&[Cr]> {
        self.policies.get(policy).map(|p| p.crs.as_slice())
    }

    pub fn summary(&self, policy: &str) -> Option<&Summary> {
        self.policies.get(policy).map(|p| &p.summary)
    }

    /// Rows of the `policy,cr,cdf` CSV.
    pub fn cdf_rows(&self) -> Vec<(String, Cr, f64)> {
        self.policies
            .iter()
            .flat_map(|(name, r)| r.cdf.iter().map(move |p| (name.clone(), p.cr, p.cdf)))
            .collect()
    }
}

/// The concrete policy run on instance `index`: LA-ECT gets the instance's
/// prediction, ZCL-Randomized a fresh threshold seed.
pub fn instantiate(
    spec: &PolicySpec64,
    exp: &ExperimentSpec,
    index: usize,
    inst: &Instance64,
    d_star: Option<f64>,
) -> tfokp::Result<PolicySpec64> {
    let base = derive_seed(exp.seed, index as u64);
    Ok(match *spec {
        PolicySpec64::LaEct { gamma, prediction } => {
            let prediction = match (exp.predictions, d_star) {
                (PredictionSource::Simulated, Some(d)) => simulate_prediction(
                    d,
                    exp.prediction_sigma,
                    derive_seed(base, PREDICTION_STREAM),
                    inst.lower,
                    inst.upper,
                )?,
                _ => prediction,
            };
            PolicySpec64::LaEct { gamma, prediction }
        }
        PolicySpec64::ZclRandomized { seed } => PolicySpec64::ZclRandomized {
            seed: derive_seed(seed ^ base, THRESHOLD_STREAM),
        },
        ref other => other.clone(),
    })
}

struct Evaluated {
    info: InstanceInfo,
    crs: Vec<Cr>,
    checks: Vec<ConsistencyCheck>,
}

fn evaluate(exp: &ExperimentSpec, index: usize) -> tfokp::Result<Option<Evaluated>> {
    let inst = exp.generator.generate_nth(index, exp.seed)?;
    let budget = exp.dp_budget.unwrap_or(DEFAULT_DP_BUDGET);
    let opt = match opt_dp_with_budget(&inst, budget) {
        Ok(r) => r.value,
        Err(Error::Budget { cells, .. }) => {
            log::warn!("instance {index}: DP needs {cells} cells, skipped");
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let ctx = BoundContext::new(inst.lower, inst.upper)?;
    let d_star = if inst.is_empty() { None } else { Some(compute_dstar(&inst)?) };
    let d_max = inst.max_density();
    let rho = d_star.zip(d_max).map(|(s, m)| m / s);
    let mut crs = Vec::with_capacity(exp.policies.len());
    let mut checks = Vec::new();
    for spec in &exp.policies {
        let concrete = instantiate(spec, exp, index, &inst, d_star)?;
        concrete.validate(&ctx)?;
        let cr = Cr::from_values(opt, run(&concrete, &inst)?.final_value);
        if let (PolicySpec64::LaEct { gamma, prediction }, Some(ds), Some(r)) = (concrete, d_star, rho) {
            let bound = tfokp::numerics::bound_laect_consistency(r, gamma)?;
            checks.push(ConsistencyCheck {
                instance: index,
                policy: spec.name(),
                gamma,
                prediction,
                d_star: ds,
                rho: r,
                cr,
                bound: Cr(bound),
                holds: cr.0 <= bound * (1.0 + 1e-9),
            });
        }
        crs.push(cr);
    }
    Ok(Some(Evaluated {
        info: InstanceInfo {
            index,
            fingerprint: inst.fingerprint(),
            items: inst.len(),
            opt,
            d_star,
            d_max,
            rho,
        },
        crs,
        checks,
    }))
}

/// Runs every policy on `n_instances` generated instances, in parallel over
/// instances with results assembled in index order.
pub fn run_experiment(exp: &ExperimentSpec) -> tfokp::Result<ExperimentReport> {
    exp.validate()?;
    let results: Vec<Option<Evaluated>> = (0..exp.n_instances)
        .into_par_iter()
        .map(|i| evaluate(exp, i))
        .collect::<tfokp::Result<_>>()?;

    let mut per_policy: Vec<Vec<Cr>> = vec![Vec::new(); exp.policies.len()];
    let mut instances = Vec::new();
    let mut consistency = Vec::new();
    let mut skipped = 0;
    for r in results {
        match r {
            None => skipped += 1,
            Some(e) => {
                for (k, cr) in e.crs.into_iter().enumerate() {
                    per_policy[k].push(cr);
                }
                instances.push(e.info);
                consistency.extend(e.checks);
            }
        }
    }
    let policies = exp
        .policies
        .iter()
        .zip(per_policy)
        .map(|(spec, crs)| {
            let result = PolicyResult {
                spec: spec.clone(),
                summary: summarize(&crs),
                cdf: cdf(&crs),
                crs,
            };
            (spec.name(), result)
        })
        .collect();
    Ok(ExperimentReport {
        seed: exp.seed,
        prediction_sigma: exp.prediction_sigma,
        n_instances: exp.n_instances,
        evaluated: instances.len(),
        skipped,
        instances,
        policies,
        consistency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use tfokp::instances::{GeneratorKind, InnateDistribution};

    fn traces(n: usize) -> GeneratorSpec64 {
        GeneratorSpec64::unbounded(GeneratorKind::TraceSynth {
            n,
            mu: 10.0,
            seed: 0,
            weight_menu: None,
            value_ratio: None,
            innate: InnateDistribution::LogUniform,
        })
    }

    fn spec() -> ExperimentSpec {
        ExperimentSpec::new(
            vec![
                PolicySpec64::Zcl,
                PolicySpec64::Ect { alpha: 0.5 },
                PolicySpec64::LaEct { gamma: 1.0, prediction: 1.0 },
                PolicySpec64::ZclRandomized { seed: 3 },
            ],
            traces(200),
            12,
            9,
        )
    }

    #[test]
    fn deterministic_and_order_independent() {
        let a = run_experiment(&spec()).unwrap();
        let b = run_experiment(&spec()).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        let mut rev = spec();
        rev.policies.reverse();
        let c = run_experiment(&rev).unwrap();
        assert_eq!(a.policies, c.policies);
        assert_eq!(a.evaluated, 12);
        for r in a.policies.values() {
            assert!(r.crs.iter().all(|c| c.0 >= 1.0));
        }
    }

    #[test]
    fn perfect_predictions_record_consistency() {
        let r = run_experiment(&spec()).unwrap();
        assert_eq!(r.consistency.len(), 12);
        assert!(r.consistency.iter().all(|c| c.holds && c.prediction == c.d_star));
    }

    #[test]
    fn budget_skips_instances() {
        let mut s = spec();
        s.dp_budget = Some(10);
        let r = run_experiment(&s).unwrap();
        assert_eq!((r.evaluated, r.skipped), (0, 12));
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec();
        s.n_instances = 0;
        assert!(run_experiment(&s).is_err());
        let mut s = spec();
        s.policies.push(PolicySpec64::Zcl);
        assert!(run_experiment(&s).is_err());
        let mut s = spec();
        s.policies.push(PolicySpec64::Ect { alpha: 0.01 });
        assert!(run_experiment(&s).is_err());
    }
}
