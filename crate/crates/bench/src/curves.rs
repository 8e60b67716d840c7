//! Bound curves over α and their empirical counterpart on the `I_x` family.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tfokp::algorithms::{expected_value_randomized, outcome, Policy};
use tfokp::instances::{gen_x_nondecreasing, x_grid};
use tfokp::numerics::{bound_baseline_cr, bound_pareto_beta};
use tfokp::{opt_dp, BoundContext, BoundContext64, Error, Instance64, PolicySpec64};

use crate::cr::Cr;

/// The adversarial family `{I_x}` over a batch-aligned grid of `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family {
    #[serde(rename = "L")]
    pub lower: f64,
    #[serde(rename = "U")]
    pub upper: f64,
    pub m: u32,
    pub n_batches: u32,
    pub x_points: usize,
}

impl Family {
    pub fn new(lower: f64, upper: f64, m: u32, n_batches: u32, x_points: usize) -> Self {
        Family {
            lower,
            upper,
            m,
            n_batches,
            x_points,
        }
    }

    pub fn context(&self) -> tfokp::Result<BoundContext64> {
        BoundContext::new(self.lower, self.upper)
    }

    pub fn xs(&self) -> Vec<f64> {
        x_grid(self.x_points, self.n_batches, self.lower, self.upper)
    }

    pub fn instances(&self) -> tfokp::Result<Vec<Instance64>> {
        self.xs()
            .into_iter()
            .map(|x| gen_x_nondecreasing(x, self.m, self.n_batches, self.lower, self.upper))
            .collect()
    }
}

/// Instances paired with their DP optimum, computed once.
pub struct Solved {
    pub instances: Vec<Instance64>,
    pub opt: Vec<f64>,
}

impl Solved {
    pub fn new(instances: Vec<Instance64>) -> tfokp::Result<Self> {
        let opt = instances
            .par_iter()
            .map(|i| opt_dp(i).map(|r| r.value))
            .collect::<tfokp::Result<_>>()?;
        Ok(Solved { instances, opt })
    }

    pub fn family(f: &Family) -> tfokp::Result<Self> {
        Self::new(f.instances()?)
    }

    /// Per-instance CRs of a deterministic policy.
    pub fn crs(&self, spec: &PolicySpec64) -> tfokp::Result<Vec<Cr>> {
        self.instances
            .par_iter()
            .zip(&self.opt)
            .map(|(inst, &opt)| {
                let ctx = BoundContext::new(inst.lower, inst.upper)?;
                let policy = Policy::new(spec.clone(), ctx)?;
                Ok(Cr::from_values(opt, outcome(&policy, inst).value))
            })
            .collect()
    }

    pub fn max_cr(&self, spec: &PolicySpec64) -> tfokp::Result<Cr> {
        Ok(self
            .crs(spec)?
            .into_iter()
            .fold(Cr(1.0), |a, b| if b.0 > a.0 { b } else { a }))
    }
}

/// One row of the `alpha,lower_bound,baseline_bound,ect_empirical` table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub alpha: f64,
    pub lower_bound: f64,
    pub baseline_bound: f64,
    pub ect_empirical: Cr,
}

impl CurveRow {
    /// `lower ≤ ECT·(1+slack)`, `ECT ≤ lower·(1+slack)` and `lower ≤ baseline`.
    pub fn conforms(&self, slack: f64) -> bool {
        let e = self.ect_empirical.0;
        self.lower_bound <= e * (1.0 + slack)
            && e <= self.lower_bound * (1.0 + slack)
            && self.lower_bound <= self.baseline_bound * (1.0 + 1e-12)
    }
}

/// `n` evenly spaced α values on `[α₀, 1]`.
pub fn alpha_grid(ctx: &BoundContext64, n: usize) -> Vec<f64> {
    let a0 = ctx.alpha_min();
    match n {
        0 => Vec::new(),
        1 => vec![a0],
        _ => (0..n)
            .map(|i| a0 + (1.0 - a0) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// The three curves over `alphas`; the empirical column is the worst CR of
/// ECT[α] on the family.
pub fn pareto_curves(family: &Family, alphas: &[f64]) -> tfokp::Result<Vec<CurveRow>> {
    let ctx = family.context()?;
    for &a in alphas {
        ctx.check_alpha(a)?;
    }
    let solved = Solved::family(family)?;
    alphas
        .iter()
        .map(|&alpha| {
            Ok(CurveRow {
                alpha,
                lower_bound: bound_pareto_beta(&ctx, alpha)?,
                baseline_bound: bound_baseline_cr(&ctx, alpha)?,
                ect_empirical: solved.max_cr(&PolicySpec64::Ect { alpha })?,
            })
        })
        .collect()
}

/// One row of the `policy,z,threshold` table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub policy: String,
    pub z: f64,
    pub threshold: f64,
}

/// Threshold functions sampled at `points` utilizations in `[0, 1]`.
pub fn threshold_table(
    ctx: &BoundContext64,
    specs: &[PolicySpec64],
    points: usize,
) -> tfokp::Result<Vec<ThresholdRow>> {
    if points < 2 {
        return Err(Error::InvalidInstance("need at least 2 points".into()));
    }
    let mut rows = Vec::new();
    for spec in specs {
        let policy = Policy::new(spec.clone(), *ctx)?;
        for i in 0..points {
            let z = i as f64 / (points - 1) as f64;
            rows.push(ThresholdRow {
                policy: spec.name(),
                z,
                threshold: policy.threshold(z),
            });
        }
    }
    Ok(rows)
}

/// OPT against the Monte Carlo mean value of ZCL-Randomized on one instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectationRow {
    pub x: f64,
    pub opt: f64,
    pub mean_value: f64,
    pub ratio: Cr,
}

pub fn randomized_expectation(
    family: &Family,
    trials: usize,
    seed: u64,
) -> tfokp::Result<Vec<ExpectationRow>> {
    let solved = Solved::family(family)?;
    let xs = family.xs();
    solved
        .instances
        .par_iter()
        .enumerate()
        .map(|(i, inst)| {
            let est = expected_value_randomized(inst, trials, tfokp::seeds::derive_seed(seed, i as u64))?;
            Ok(ExpectationRow {
                x: xs[i],
                opt: solved.opt[i],
                mean_value: est.mean,
                ratio: Cr::from_values(solved.opt[i], est.mean),
            })
        })
        .collect()
}
