//! Summaries and empirical CDFs over competitive ratios.

use serde::{Deserialize, Serialize};

use crate::cr::Cr;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub count: usize,
    pub infinite: usize,
    /// Mean over finite ratios only.
    pub mean: Option<f64>,
    pub max: Option<Cr>,
    pub p50: Option<Cr>,
    pub p90: Option<Cr>,
    pub p99: Option<Cr>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfPoint {
    pub cr: Cr,
    pub cdf: f64,
}

fn sorted(crs: &[Cr]) -> Vec<Cr> {
    let mut v = crs.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Nearest-rank percentile, `q` in `[0, 1]`.
pub fn percentile(crs: &[Cr], q: f64) -> Option<Cr> {
    if crs.is_empty() {
        return None;
    }
    let v = sorted(crs);
    let rank = (q * v.len() as f64).ceil().max(1.0) as usize;
    Some(v[rank.min(v.len()) - 1])
}

pub fn summarize(crs: &[Cr]) -> Summary {
    let finite: Vec<f64> = crs.iter().filter(|c| c.is_finite()).map(|c| c.0).collect();
    Summary {
        count: crs.len(),
        infinite: crs.len() - finite.len(),
        mean: (!finite.is_empty()).then(|| finite.iter().sum::<f64>() / finite.len() as f64),
        max: percentile(crs, 1.0),
        p50: percentile(crs, 0.5),
        p90: percentile(crs, 0.9),
        p99: percentile(crs, 0.99),
    }
}

/// Step CDF: one point per observation, `cdf = rank / n`. Infinite ratios
/// sit at the tail.
pub fn cdf(crs: &[Cr]) -> Vec<CdfPoint> {
    let n = crs.len() as f64;
    sorted(crs)
        .into_iter()
        .enumerate()
        .map(|(i, cr)| CdfPoint {
            cr,
            cdf: (i + 1) as f64 / n,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_skips_infinity_in_mean() {
        let crs = [Cr(1.0), Cr(3.0), Cr::INFINITE, Cr(2.0)];
        let s = summarize(&crs);
        assert_eq!(s.mean, Some(2.0));
        assert_eq!(s.max, Some(Cr::INFINITE));
        assert_eq!(s.infinite, 1);
        assert_eq!(s.p50, Some(Cr(2.0)));
        assert_eq!(summarize(&[]).mean, None);
    }

    #[test]
    fn cdf_is_monotone_and_normalized() {
        let crs = [Cr(1.5), Cr(1.0), Cr::INFINITE, Cr(1.2)];
        let c = cdf(&crs);
        assert_eq!(c.last().unwrap().cdf, 1.0);
        assert_eq!(c.last().unwrap().cr, Cr::INFINITE);
        assert!(c.windows(2).all(|w| w[0].cdf < w[1].cdf && w[0].cr <= w[1].cr));
    }

    #[test]
    fn percentiles() {
        let crs: Vec<Cr> = (1..=10).map(|i| Cr(i as f64)).collect();
        assert_eq!(percentile(&crs, 0.9), Some(Cr(9.0)));
        assert_eq!(percentile(&crs, 0.0), Some(Cr(1.0)));
    }
}
