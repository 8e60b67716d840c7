//! LA-ECT robustness against bad predictions and CR against prediction noise.

use rand::Rng;
use serde::{Deserialize, Serialize};
use tfokp::numerics::bound_laect_robustness;
use tfokp::seeds::{derive_seed, rng};
use tfokp::{BoundContext, Error, PolicySpec64};

use crate::cr::Cr;
use crate::curves::Solved;
use crate::experiment::{run_experiment, ExperimentSpec};

/// Adversarial prediction used for every instance of a robustness sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BadPrediction {
    Lower,
    Upper,
    /// `count` predictions drawn uniformly from `[L, U]`.
    Random { count: usize, seed: u64 },
}

impl BadPrediction {
    fn values(&self, lower: f64, upper: f64) -> Vec<(String, f64)> {
        match *self {
            BadPrediction::Lower => vec![("L".into(), lower)],
            BadPrediction::Upper => vec![("U".into(), upper)],
            BadPrediction::Random { count, seed } => {
                (0..count)
                    .map(|i| {
                        let mut r = rng(derive_seed(seed, i as u64));
                        let u: f64 = r.random();
                        ("random".into(), lower + (upper - lower) * u)
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    pub gamma: f64,
    pub prediction: String,
    pub worst_cr: Cr,
    pub bound: Cr,
}

impl RobustnessRow {
    pub fn conforms(&self, slack: f64) -> bool {
        self.worst_cr.0 <= self.bound.0 * (1.0 + slack)
    }
}

/// Worst CR of LA-ECT[γ] over the instances for each kind of bad
/// prediction; random predictions are pooled into one row per γ.
pub fn robustness_sweep(
    gammas: &[f64],
    predictions: &[BadPrediction],
    solved: &Solved,
) -> tfokp::Result<Vec<RobustnessRow>> {
    let first = solved
        .instances
        .first()
        .ok_or_else(|| Error::InvalidInstance("empty family".into()))?;
    let ctx = BoundContext::new(first.lower, first.upper)?;
    let mut rows = Vec::new();
    for &gamma in gammas {
        let bound = Cr(bound_laect_robustness(&ctx, gamma)?);
        for choice in predictions {
            let mut worst: Option<(String, Cr)> = None;
            for (label, prediction) in choice.values(ctx.lower, ctx.upper) {
                let cr = solved.max_cr(&PolicySpec64::LaEct { gamma, prediction })?;
                if worst.as_ref().is_none_or(|(_, w)| cr.0 > w.0) {
                    worst = Some((label, cr));
                }
            }
            if let Some((label, worst_cr)) = worst {
                rows.push(RobustnessRow {
                    gamma,
                    prediction: label,
                    worst_cr,
                    bound,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRow {
    pub sigma: f64,
    pub policy: String,
    pub mean_cr: Option<f64>,
    pub p90_cr: Option<Cr>,
    pub max_cr: Option<Cr>,
}

/// Re-runs `base` once per `σ` and summarizes each policy.
pub fn prediction_error_sweep(base: &ExperimentSpec, sigmas: &[f64]) -> tfokp::Result<Vec<NoiseRow>> {
    let mut rows = Vec::new();
    for &sigma in sigmas {
        let mut spec = base.clone();
        spec.prediction_sigma = sigma;
        let report = run_experiment(&spec)?;
        for (name, r) in &report.policies {
            rows.push(NoiseRow {
                sigma,
                policy: name.clone(),
                mean_cr: r.summary.mean,
                p90_cr: r.summary.p90,
                max_cr: r.summary.max,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::Family;
    use tfokp::instances::gen_x_nondecreasing;

    #[test]
    fn full_trust_in_a_bad_prediction_is_unbounded() {
        let solved = Solved::new(vec![gen_x_nondecreasing(1.0, 20, 4, 1.0, 5.0).unwrap()]).unwrap();
        let rows = robustness_sweep(&[1.0], &[BadPrediction::Upper], &solved).unwrap();
        assert_eq!(rows[0].worst_cr, Cr::INFINITE);
        assert_eq!(rows[0].bound, Cr::INFINITE);
    }

    #[test]
    fn zero_trust_meets_the_zcl_bound() {
        let solved = Solved::family(&Family::new(1.0, 5.0, 50, 10, 11)).unwrap();
        let preds = [
            BadPrediction::Lower,
            BadPrediction::Upper,
            BadPrediction::Random { count: 3, seed: 1 },
        ];
        let rows = robustness_sweep(&[0.0, 0.5], &preds, &solved).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.conforms(0.05)), "{rows:?}");
    }
}
