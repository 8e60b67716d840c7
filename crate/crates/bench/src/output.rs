//! CSV and JSON writers for harness tables.

use std::io::Write;

use serde::Serialize;

use crate::curves::{CurveRow, ThresholdRow};
use crate::experiment::ExperimentReport;
use crate::sweep::{NoiseRow, RobustnessRow};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map_or_else(String::new, T::to_string)
}

pub fn write_json<W: Write, T: Serialize>(out: W, value: &T) -> anyhow::Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// `policy,cr,cdf`.
pub fn write_cdf_csv<W: Write>(out: W, report: &ExperimentReport) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["policy", "cr", "cdf"])?;
    for (policy, cr, cdf) in report.cdf_rows() {
        w.write_record([policy, cr.to_string(), cdf.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `alpha,lower_bound,baseline_bound,ect_empirical`.
pub fn write_curves_csv<W: Write>(out: W, rows: &[CurveRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["alpha", "lower_bound", "baseline_bound", "ect_empirical"])?;
    for r in rows {
        w.write_record([
            r.alpha.to_string(),
            r.lower_bound.to_string(),
            r.baseline_bound.to_string(),
            r.ect_empirical.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `policy,z,threshold`.
pub fn write_thresholds_csv<W: Write>(out: W, rows: &[ThresholdRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["policy", "z", "threshold"])?;
    for r in rows {
        w.write_record([r.policy.clone(), r.z.to_string(), r.threshold.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// `gamma,prediction,worst_cr,bound`.
pub fn write_robustness_csv<W: Write>(out: W, rows: &[RobustnessRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gamma", "prediction", "worst_cr", "bound"])?;
    for r in rows {
        w.write_record([
            r.gamma.to_string(),
            r.prediction.clone(),
            r.worst_cr.to_string(),
            r.bound.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `sigma,policy,mean_cr,p90_cr,max_cr`.
pub fn write_noise_csv<W: Write>(out: W, rows: &[NoiseRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["sigma", "policy", "mean_cr", "p90_cr", "max_cr"])?;
    for r in rows {
        w.write_record([
            r.sigma.to_string(),
            r.policy.clone(),
            opt(&r.mean_cr),
            opt(&r.p90_cr),
            opt(&r.max_cr),
        ])?;
    }
    w.flush()?;
    Ok(())
}
