//! Empirical conditional time-independent fairness audits.
//!
//! A probe item of density `x` and weight `1/m` is inserted into a base
//! instance at several arrival positions. A probe arriving at utilization `z`
//! is in scope for the interval `A = [a, b]` when both `z` and `z + 1/m` lie
//! in `A`. In-scope decisions for the same `(instance, x)` must not depend on
//! the position.

use std::fmt;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::algorithms::{run_with, Policy, PolicySpec};
use crate::error::{Error, Result};
use crate::instances::{gen_gadget, GadgetKind, GadgetParams};
use crate::model::{Instance, Item};
use crate::numerics::BoundContext;
use crate::scalar::Scalar;
use crate::seeds::derive_seed;

/// Cap on witnesses kept per report.
pub const MAX_WITNESSES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// No probe ever arrived inside the interval.
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Two in-scope arrivals of the same probe with different outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Witness<T> {
    pub fingerprint: String,
    pub base: Instance<T>,
    pub probe_density: T,
    /// 0-based insertion positions.
    pub positions: [usize; 2],
    pub decisions: [bool; 2],
    pub utilizations: [T; 2],
}

/// Acceptance frequency of one probe at one position across threshold draws.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionFrequency {
    pub instance: usize,
    pub probe_density: f64,
    pub position: usize,
    pub in_scope: usize,
    pub accepted: usize,
    pub frequency: f64,
    pub pooled: f64,
    pub half_width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct AuditReport<T> {
    pub policy: PolicySpec<T>,
    pub alpha: T,
    pub interval: [T; 2],
    pub verdict: Verdict,
    pub witnesses: Vec<Witness<T>>,
    /// In-scope probes, i.e. those counted toward the verdict.
    pub probes_in_scope: usize,
    /// Probes with `z + w` in `A` but arriving before `a`.
    pub boundary_items: usize,
    /// Probes with `z + w` outside `A`.
    pub excluded: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub frequencies: Vec<PositionFrequency>,
    pub scope: String,
}

impl<T: Scalar> fmt::Display for AuditReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{} on A = [{:.6}, {:.6}]: {}",
            self.policy, self.interval[0], self.interval[1], self.verdict
        )?;
        writeln!(
            f,
            "  probes in scope {}, boundary {}, excluded {}",
            self.probes_in_scope, self.boundary_items, self.excluded
        )?;
        for w in &self.witnesses {
            writeln!(
                f,
                "  witness {}: density {} at positions {:?} -> {:?} (z = {:.6}, {:.6})",
                w.fingerprint,
                w.probe_density,
                w.positions,
                w.decisions,
                w.utilizations[0],
                w.utilizations[1]
            )?;
        }
        write!(f, "  scope: {}", self.scope)
    }
}

#[derive(Clone, Debug, Default)]
pub struct AuditOptions<T> {
    /// Explicit `A`; otherwise the policy's default interval of width `α`.
    pub interval: Option<[T; 2]>,
    /// Insertion positions; all positions `0..=n` by default.
    pub positions: Option<Vec<usize>>,
    /// Threshold draws per position for randomized policies.
    pub trials: usize,
    pub seed: u64,
}

/// Left end of the interval where `spec` is expected to be fair.
pub fn default_anchor<T: Scalar>(spec: &PolicySpec<T>, ctx: &BoundContext<T>) -> T {
    match *spec {
        PolicySpec::LaEct { gamma, prediction } => ctx
            .kappa(gamma, ctx.clamp_prediction(prediction))
            .max(T::zero()),
        _ => T::zero(),
    }
}

/// `[a, min(a + α, 1)]` with the policy's anchor `a`.
pub fn default_interval<T: Scalar>(spec: &PolicySpec<T>, ctx: &BoundContext<T>, alpha: T) -> [T; 2] {
    let a = default_anchor(spec, ctx);
    [a, (a + alpha).min(T::one())]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scope {
    In,
    Boundary,
    Out,
}

fn scope_of<T: Scalar>(units: u64, m: u32, a: T, b: T) -> Scope {
    let mf = T::from_count(m as u64);
    let z = T::from_count(units) / mf;
    let z_next = T::from_count(units + 1) / mf;
    let tol = T::lit(1e-12);
    if z_next < a - tol || z_next > b + tol {
        Scope::Out
    } else if z < a - tol {
        Scope::Boundary
    } else {
        Scope::In
    }
}

/// Decision on the item at `pos` and the fill (in units) it met.
fn decision_at<T: Scalar>(policy: &Policy<T>, inst: &Instance<T>, pos: usize) -> (bool, u64) {
    let mut prefix = inst.clone();
    prefix.items.truncate(pos + 1);
    let mut rule = policy;
    let exec = run_with(&mut rule, &prefix);
    let accepted = exec.decisions[pos].accepted;
    let before = if accepted {
        exec.final_units - inst.units(pos)
    } else {
        exec.final_units
    };
    (accepted, before)
}

fn check_inputs<T: Scalar>(alpha: T, interval: [T; 2], bases: &[Instance<T>], probes: &[T]) -> Result<()> {
    if !(alpha >= T::zero() && alpha <= T::one()) {
        return Err(Error::parameter("alpha", alpha.as_f64(), "[0, 1]"));
    }
    let [a, b] = interval;
    if !(a >= T::zero() && a <= b && b <= T::one()) {
        return Err(Error::parameter("interval", a.as_f64(), "0 <= a <= b <= 1"));
    }
    if bases.is_empty() || probes.is_empty() {
        return Err(Error::InvalidInstance(
            "audit needs at least one base instance and one probe density".into(),
        ));
    }
    let (l, u) = (bases[0].lower, bases[0].upper);
    if bases.iter().any(|b| b.lower != l || b.upper != u) {
        return Err(Error::InvalidInstance("base instances disagree on [L, U]".into()));
    }
    if probes.iter().any(|&x| !(x >= l && x <= u)) {
        return Err(Error::InvalidInstance(format!("probe densities must lie in [{l}, {u}]")));
    }
    Ok(())
}

fn positions_for<T>(inst: &Instance<T>, opts: &AuditOptions<T>) -> Vec<usize> {
    match &opts.positions {
        Some(p) => p.iter().copied().filter(|&p| p <= inst.items.len()).collect(),
        None => (0..=inst.items.len()).collect(),
    }
}

fn scope_text<T: Scalar>(bases: &[Instance<T>], probes: &[T], draws: Option<usize>) -> String {
    let mut s = format!(
        "{} base instance(s), {} probe density(ies), probe weight 1/m",
        bases.len(),
        probes.len()
    );
    if let Some(n) = draws {
        s.push_str(&format!(", {n} threshold draws per position"));
    }
    s.push_str("; the verdict covers only these inputs");
    s
}

/// Audits a deterministic policy for α-CTIF on `A`.
pub fn audit_ctif<T: Scalar>(
    spec: &PolicySpec<T>,
    alpha: T,
    bases: &[Instance<T>],
    probes: &[T],
    opts: &AuditOptions<T>,
) -> Result<AuditReport<T>> {
    if spec.is_randomized() {
        return audit_randomized_ctif(spec, bases, probes, opts, alpha);
    }
    let first = bases
        .first()
        .ok_or_else(|| Error::InvalidInstance("no base instance".into()))?;
    let ctx = BoundContext::new(first.lower, first.upper)?;
    let interval = opts
        .interval
        .unwrap_or_else(|| default_interval(spec, &ctx, alpha));
    check_inputs(alpha, interval, bases, probes)?;
    let policy = Policy::new(spec.clone(), ctx)?;

    let mut report = AuditReport {
        policy: spec.clone(),
        alpha,
        interval,
        verdict: Verdict::Inconclusive,
        witnesses: Vec::new(),
        probes_in_scope: 0,
        boundary_items: 0,
        excluded: 0,
        frequencies: Vec::new(),
        scope: scope_text(bases, probes, None),
    };
    let mut failed = false;
    for base in bases {
        let m = base.granularity;
        let positions = positions_for(base, opts);
        for &x in probes {
            let probe = Item::with_density(x, 1, m);
            // first in-scope observation of each outcome
            let mut seen: [Option<(usize, T)>; 2] = [None, None];
            for &pos in &positions {
                let inst = base.with_inserted(pos, probe);
                let (accepted, units) = decision_at(&policy, &inst, pos);
                match scope_of(units, m, interval[0], interval[1]) {
                    Scope::Out => report.excluded += 1,
                    Scope::Boundary => report.boundary_items += 1,
                    Scope::In => {
                        report.probes_in_scope += 1;
                        let z = T::from_count(units) / T::from_count(m as u64);
                        seen[accepted as usize].get_or_insert((pos, z));
                    }
                }
            }
            if let [Some((p_rej, z_rej)), Some((p_acc, z_acc))] = seen {
                failed = true;
                if report.witnesses.len() < MAX_WITNESSES {
                    let (first, second) = if p_acc < p_rej {
                        ((p_acc, z_acc, true), (p_rej, z_rej, false))
                    } else {
                        ((p_rej, z_rej, false), (p_acc, z_acc, true))
                    };
                    report.witnesses.push(Witness {
                        fingerprint: base.fingerprint(),
                        base: base.clone(),
                        probe_density: x,
                        positions: [first.0, second.0],
                        decisions: [first.2, second.2],
                        utilizations: [first.1, second.1],
                    });
                }
            }
        }
    }
    report.verdict = if failed {
        Verdict::Fail
    } else if report.probes_in_scope == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(report)
}

/// Re-runs a witness, returning the decisions at its two positions.
pub fn replay_witness<T: Scalar>(spec: &PolicySpec<T>, w: &Witness<T>) -> Result<[bool; 2]> {
    let ctx = BoundContext::new(w.base.lower, w.base.upper)?;
    let policy = Policy::new(spec.clone(), ctx)?;
    let probe = Item::with_density(w.probe_density, 1, w.base.granularity);
    let decide = |pos: usize| decision_at(&policy, &w.base.with_inserted(pos, probe), pos).0;
    Ok([decide(w.positions[0]), decide(w.positions[1])])
}

/// Two-sided normal quantile giving joint `confidence` over `k` comparisons.
fn bonferroni_z(confidence: f64, k: usize) -> f64 {
    let tail = (1.0 - confidence) / (2.0 * k.max(1) as f64);
    Normal::standard().inverse_cdf(1.0 - tail)
}

/// Audits a randomized policy: for each base instance and probe density,
/// acceptance frequencies over independent threshold draws must agree across
/// positions within joint 99% binomial intervals around the pooled rate.
///
/// Base instances whose total weight leaves room for the probe keep the
/// probe's admissibility independent of the drawn threshold.
pub fn audit_randomized_ctif<T: Scalar>(
    spec: &PolicySpec<T>,
    bases: &[Instance<T>],
    probes: &[T],
    opts: &AuditOptions<T>,
    alpha: T,
) -> Result<AuditReport<T>> {
    const CONFIDENCE: f64 = 0.99;
    if !spec.is_randomized() {
        return Err(Error::InvalidInstance(format!(
            "{spec} is deterministic; use audit_ctif"
        )));
    }
    if opts.trials < 1000 {
        return Err(Error::parameter("trials", opts.trials as f64, "[1000, inf)"));
    }
    let first = bases
        .first()
        .ok_or_else(|| Error::InvalidInstance("no base instance".into()))?;
    let ctx = BoundContext::new(first.lower, first.upper)?;
    let interval = opts
        .interval
        .unwrap_or_else(|| default_interval(spec, &ctx, alpha));
    check_inputs(alpha, interval, bases, probes)?;

    let mut report = AuditReport {
        policy: spec.clone(),
        alpha,
        interval,
        verdict: Verdict::Inconclusive,
        witnesses: Vec::new(),
        probes_in_scope: 0,
        boundary_items: 0,
        excluded: 0,
        frequencies: Vec::new(),
        scope: scope_text(bases, probes, Some(opts.trials)),
    };
    let mut stream = 0u64;
    for (bi, base) in bases.iter().enumerate() {
        let m = base.granularity;
        for &x in probes {
            let probe = Item::with_density(x, 1, m);
            for pos in positions_for(base, opts) {
                let inst = base.with_inserted(pos, probe);
                let (mut in_scope, mut accepted) = (0usize, 0usize);
                for _ in 0..opts.trials {
                    let seed = derive_seed(opts.seed, stream);
                    stream += 1;
                    let policy = Policy::new(PolicySpec::ZclRandomized { seed }, ctx)?;
                    let (acc, units) = decision_at(&policy, &inst, pos);
                    match scope_of(units, m, interval[0], interval[1]) {
                        Scope::Out => report.excluded += 1,
                        Scope::Boundary => report.boundary_items += 1,
                        Scope::In => {
                            in_scope += 1;
                            accepted += acc as usize;
                        }
                    }
                }
                report.probes_in_scope += in_scope;
                if in_scope > 0 {
                    report.frequencies.push(PositionFrequency {
                        instance: bi,
                        probe_density: x.as_f64(),
                        position: pos,
                        in_scope,
                        accepted,
                        frequency: accepted as f64 / in_scope as f64,
                        pooled: 0.0,
                        half_width: 0.0,
                    });
                }
            }
        }
    }

    let z = bonferroni_z(CONFIDENCE, report.frequencies.len());
    let mut failed = false;
    let mut groups: Vec<(usize, f64)> = report
        .frequencies
        .iter()
        .map(|f| (f.instance, f.probe_density))
        .collect();
    groups.dedup();
    for (bi, x) in groups {
        let members: Vec<usize> = (0..report.frequencies.len())
            .filter(|&i| {
                let f = &report.frequencies[i];
                f.instance == bi && f.probe_density == x
            })
            .collect();
        let total: usize = members.iter().map(|&i| report.frequencies[i].in_scope).sum();
        let hits: usize = members.iter().map(|&i| report.frequencies[i].accepted).sum();
        let pooled = hits as f64 / total as f64;
        for &i in &members {
            let f = &mut report.frequencies[i];
            f.pooled = pooled;
            f.half_width = z * (pooled * (1.0 - pooled) / f.in_scope as f64).sqrt();
            if (f.frequency - pooled).abs() > f.half_width + 1e-12 {
                failed = true;
            }
        }
    }
    report.verdict = if failed {
        Verdict::Fail
    } else if report.probes_in_scope == 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(report)
}

/// Acceptance of one contiguous stretch of a gadget under one policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SegmentOutcome<T> {
    pub label: String,
    pub start: usize,
    pub end: usize,
    pub density: T,
    pub offered: usize,
    pub accepted: usize,
    /// Accepted when the segment arrives on an empty knapsack.
    pub accepted_alone: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct PolicyDemo<T> {
    pub policy: PolicySpec<T>,
    pub segments: Vec<SegmentOutcome<T>>,
    /// Some same-density items were treated differently by arrival time.
    pub position_dependent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct TifDemo<T> {
    pub gadget: String,
    pub fingerprint: String,
    pub policies: Vec<PolicyDemo<T>>,
}

impl<T: Scalar> fmt::Display for TifDemo<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gadget {} ({})", self.gadget, self.fingerprint)?;
        for p in &self.policies {
            writeln!(
                f,
                "  {}: {}",
                p.policy,
                if p.position_dependent {
                    "acceptance depends on arrival time"
                } else {
                    "no discrepancy observed"
                }
            )?;
            for s in &p.segments {
                let pct = |k: usize| 100.0 * k as f64 / s.offered.max(1) as f64;
                writeln!(
                    f,
                    "    {:<9} items {}..{} density {}: accepted {}/{} ({:.0}%), alone {}/{} ({:.0}%)",
                    s.label,
                    s.start + 1,
                    s.end,
                    s.density,
                    s.accepted,
                    s.offered,
                    pct(s.accepted),
                    s.accepted_alone,
                    s.offered,
                    pct(s.accepted_alone)
                )?;
            }
        }
        Ok(())
    }
}

fn segments<T: Scalar>(kind: GadgetKind, inst: &Instance<T>) -> Vec<(String, usize, usize)> {
    let n = inst.len();
    match kind {
        GadgetKind::DuplicatedSuffix => vec![
            ("original".to_string(), 0, n / 2),
            ("suffix".to_string(), n / 2, n),
        ],
        GadgetKind::SmallThenLarge => vec![
            ("small".to_string(), 0, n.saturating_sub(1)),
            ("large".to_string(), n.saturating_sub(1), n),
        ],
        GadgetKind::TwoDensity => {
            let split = (0..n)
                .position(|j| inst.density(j) != inst.density(0))
                .unwrap_or(n);
            vec![("low".to_string(), 0, split), ("high".to_string(), split, n)]
        }
    }
}

/// Runs ZCL, ECT[1/2] and the constant threshold `L` on a gadget and reports
/// how acceptance of identical-density items varies with arrival time.
pub fn demonstrate_tif_impossibility<T: Scalar>(
    gadget: &str,
    params: &GadgetParams<T>,
) -> Result<TifDemo<T>> {
    let kind: GadgetKind = gadget.parse()?;
    let inst = gen_gadget(gadget, params)?;
    let ctx = BoundContext::new(inst.lower, inst.upper)?;
    let half = T::lit(0.5).max(ctx.alpha_min());
    let specs = [
        PolicySpec::Zcl,
        PolicySpec::Ect { alpha: half },
        PolicySpec::Constant { phi: inst.lower },
    ];
    let segs = segments(kind, &inst);
    let mut policies = Vec::new();
    for spec in specs {
        let policy = Policy::new(spec.clone(), ctx)?;
        let mut rule = &policy;
        let full = run_with(&mut rule, &inst);
        let mut out = Vec::new();
        for (label, start, end) in &segs {
            if start == end {
                continue;
            }
            let mut alone = inst.clone();
            alone.items = inst.items[*start..*end].to_vec();
            let mut rule = &policy;
            let alone_run = run_with(&mut rule, &alone);
            out.push(SegmentOutcome {
                label: label.clone(),
                start: *start,
                end: *end,
                density: inst.density(*start),
                offered: end - start,
                accepted: full.decisions[*start..*end].iter().filter(|d| d.accepted).count(),
                accepted_alone: alone_run.decisions.iter().filter(|d| d.accepted).count(),
            });
        }
        let position_dependent = out.iter().any(|s| s.accepted != s.accepted_alone)
            || out.windows(2).any(|w| {
                w[0].density == w[1].density
                    && (w[0].accepted == w[0].offered) != (w[1].accepted == w[1].offered)
            });
        policies.push(PolicyDemo {
            policy: spec,
            segments: out,
            position_dependent,
        });
    }
    Ok(TifDemo {
        gadget: gadget.to_string(),
        fingerprint: inst.fingerprint(),
        policies,
    })
}
