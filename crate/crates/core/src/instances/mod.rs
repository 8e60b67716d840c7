//! Instance generators, gadgets and file I/O.

mod generators;
mod io;

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub use generators::{
    batch_count, common_granularity, duplicated_suffix, gen_gadget, gen_x_nondecreasing,
    sample_prediction_noise, simulate_prediction, small_then_large, synth_trace, two_density,
    x_grid, GadgetKind, GadgetParams, InnateDistribution, TraceConfig, DEFAULT_VALUE_RATIO,
    DEFAULT_WEIGHT_MENU,
};
pub use io::{ingest, ingest_checked, sidecar_path, write_instance, Ingested, Metadata};

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::scalar::Scalar;
use crate::seeds::derive_seed;

/// What to generate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", bound = "T: Scalar")]
pub enum GeneratorKind<T> {
    /// A single `I_x`.
    XNonDecreasing { x: T, m: u32, n_batches: u32 },
    /// The `I_x` family over `points` batch-aligned values of `x`; the
    /// `i`-th instance cycles through the grid.
    XFamily { points: usize, m: u32, n_batches: u32 },
    TraceSynth {
        n: usize,
        mu: T,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        weight_menu: Option<Vec<T>>,
        #[serde(default)]
        value_ratio: Option<T>,
        #[serde(default)]
        innate: InnateDistribution,
    },
    Gadget {
        name: String,
        #[serde(default)]
        params: GadgetParams<T>,
    },
    FromFile { path: PathBuf },
}

/// A generator plus the density range `[L, U]`.
///
/// `L` and `U` are required for `x_non_decreasing`, `x_family` and gadgets.
/// For traces they default to `1` and `value_ratio · μ`; for files they come
/// from the sidecar and, when given, must agree with it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GeneratorSpec<T> {
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<T>,
    #[serde(rename = "U", default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<T>,
    #[serde(flatten)]
    pub kind: GeneratorKind<T>,
}

impl<T: Scalar> GeneratorSpec<T> {
    pub fn new(kind: GeneratorKind<T>, lower: T, upper: T) -> Self {
        GeneratorSpec {
            lower: Some(lower),
            upper: Some(upper),
            kind,
        }
    }

    pub fn unbounded(kind: GeneratorKind<T>) -> Self {
        GeneratorSpec {
            lower: None,
            upper: None,
            kind,
        }
    }

    fn required_bounds(&self) -> Result<(T, T)> {
        Ok((
            self.lower.ok_or(Error::MissingParam("L"))?,
            self.upper.ok_or(Error::MissingParam("U"))?,
        ))
    }

    fn trace_config(&self, seed: u64) -> Option<TraceConfig<T>> {
        match &self.kind {
            GeneratorKind::TraceSynth {
                n,
                mu,
                weight_menu,
                value_ratio,
                innate,
                ..
            } => {
                let mut cfg = TraceConfig::new(*n, *mu, seed);
                if let Some(menu) = weight_menu {
                    cfg.weight_menu = menu.clone();
                }
                if let Some(r) = value_ratio {
                    cfg.value_ratio = *r;
                }
                cfg.innate = *innate;
                Some(cfg)
            }
            _ => None,
        }
    }

    /// Number of distinct instances the generator yields before repeating,
    /// `None` when seeded generation makes every index distinct.
    pub fn period(&self) -> Option<usize> {
        match &self.kind {
            GeneratorKind::TraceSynth { .. } => None,
            GeneratorKind::XFamily { points, .. } => Some((*points).max(1)),
            _ => Some(1),
        }
    }

    /// The instance this generator describes, using its own seed.
    pub fn generate(&self) -> Result<Instance<T>> {
        let seed = match &self.kind {
            GeneratorKind::TraceSynth { seed, .. } => *seed,
            _ => 0,
        };
        self.build(0, seed)
    }

    /// The `i`-th instance of an experiment seeded with `seed`. Traces use
    /// the derived seed `derive_seed(seed, i)`.
    pub fn generate_nth(&self, i: usize, seed: u64) -> Result<Instance<T>> {
        self.build(i, derive_seed(seed, i as u64))
    }

    fn build(&self, i: usize, seed: u64) -> Result<Instance<T>> {
        let inst = match &self.kind {
            GeneratorKind::XNonDecreasing { x, m, n_batches } => {
                let (l, u) = self.required_bounds()?;
                gen_x_nondecreasing(*x, *m, *n_batches, l, u)?
            }
            GeneratorKind::XFamily {
                points,
                m,
                n_batches,
            } => {
                let (l, u) = self.required_bounds()?;
                let grid = x_grid(*points, *n_batches, l, u);
                gen_x_nondecreasing(grid[i % grid.len()], *m, *n_batches, l, u)?
            }
            GeneratorKind::TraceSynth { .. } => {
                let cfg = self.trace_config(seed).expect("trace kind");
                let mut inst = synth_trace(&cfg)?;
                let (l, u) = cfg.bounds();
                let lower = self.lower.unwrap_or(l);
                let upper = self.upper.unwrap_or(u);
                if lower > l || upper < u {
                    return Err(Error::InvalidInstance(format!(
                        "declared [{lower}, {upper}] does not cover trace range [{l}, {u}]"
                    )));
                }
                if lower != l || upper != u {
                    log::info!("trace range [{l}, {u}] overridden by [{lower}, {upper}]");
                }
                inst.lower = lower;
                inst.upper = upper;
                inst
            }
            GeneratorKind::Gadget { name, params } => {
                let mut params = params.clone();
                params.lower = params.lower.or(self.lower);
                params.upper = params.upper.or(self.upper);
                gen_gadget(name, &params)?
            }
            GeneratorKind::FromFile { path } => {
                let inst = ingest(path)?;
                if self.lower.is_some_and(|l| l != inst.lower)
                    || self.upper.is_some_and(|u| u != inst.upper)
                {
                    return Err(Error::InvalidInstance(format!(
                        "{}: declared bounds disagree with sidecar [{}, {}]",
                        path.display(),
                        inst.lower,
                        inst.upper
                    )));
                }
                inst
            }
        };
        Ok(inst)
    }
}
