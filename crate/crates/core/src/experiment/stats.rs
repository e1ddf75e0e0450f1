use super::run::RegretCurve;
use crate::error::{Error, Result};

/// z-value of a two-sided 95% normal interval.
pub const Z_95: f64 = 1.96;

/// Per-episode mean cumulative regret across seeds with a 95% normal
/// confidence half-width.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub mean: Vec<f64>,
    pub ci_half_width: Vec<f64>,
    pub num_seeds: usize,
}

impl AggregateCurve {
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }

    pub fn final_ci(&self) -> f64 {
        self.ci_half_width.last().copied().unwrap_or(0.0)
    }

    /// Mean cumulative regret at 1-based `episode`.
    pub fn mean_at(&self, episode: usize) -> f64 {
        self.mean[episode - 1]
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }
}

/// Mean and `1.96 * s / sqrt(n)` of the cumulative curves; needs two or more.
pub fn aggregate(curves: &[RegretCurve]) -> Result<AggregateCurve> {
    if curves.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "aggregation needs at least 2 curves, got {}",
            curves.len()
        )));
    }
    aggregate_columns(curves.iter().map(|c| c.cumulative.as_slice()))
}

/// [`aggregate`] that also accepts a single curve, whose interval is
/// undefined and reported as zero.
pub fn summarize(curves: &[RegretCurve]) -> Result<AggregateCurve> {
    match curves {
        [] => Err(Error::InvalidParameter("no curves to summarize".into())),
        [only] => Ok(AggregateCurve {
            mean: only.cumulative.clone(),
            ci_half_width: vec![0.0; only.cumulative.len()],
            num_seeds: 1,
        }),
        _ => aggregate(curves),
    }
}

/// Column-wise mean and normal half-width over equal-length series.
pub fn aggregate_columns<'a>(series: impl Iterator<Item = &'a [f64]>) -> Result<AggregateCurve> {
    let series: Vec<&[f64]> = series.collect();
    let n = series.len();
    let len = series.first().map_or(0, |s| s.len());
    if series.iter().any(|s| s.len() != len) {
        return Err(Error::InvalidParameter("curves differ in length".into()));
    }
    let mut mean = Vec::with_capacity(len);
    let mut ci = Vec::with_capacity(len);
    for k in 0..len {
        let m = series.iter().map(|s| s[k]).sum::<f64>() / n as f64;
        let half = if n < 2 {
            0.0
        } else {
            let var = series.iter().map(|s| (s[k] - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            Z_95 * var.sqrt() / (n as f64).sqrt()
        };
        mean.push(m);
        ci.push(half);
    }
    Ok(AggregateCurve {
        mean,
        ci_half_width: ci,
        num_seeds: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(seed: u64, per: &[f64]) -> RegretCurve {
        let mut cumulative = Vec::new();
        let mut total = 0.0;
        for r in per {
            total += r;
            cumulative.push(total);
        }
        RegretCurve {
            seed,
            per_episode_regret: per.to_vec(),
            cumulative,
            variation_trace: vec![1.0; per.len()],
            value_gap: per.to_vec(),
        }
    }

    #[test]
    fn identical_curves_have_no_spread() {
        let a = aggregate(&[curve(1, &[1.0, 2.0]), curve(2, &[1.0, 2.0])]).unwrap();
        assert_eq!(a.ci_half_width, vec![0.0, 0.0]);
        assert_eq!(a.mean, vec![1.0, 3.0]);
    }

    #[test]
    fn two_point_interval() {
        // Cumulative values {0, 2}: mean 1, sample std sqrt(2).
        let a = aggregate(&[curve(1, &[0.0]), curve(2, &[2.0])]).unwrap();
        assert_eq!(a.mean, vec![1.0]);
        let expected = 1.96 * 2f64.sqrt() / 2f64.sqrt();
        assert!((a.ci_half_width[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn mean_of_prefix_sums_is_prefix_sum_of_means() {
        let curves = [curve(1, &[0.5, 1.0, 0.0]), curve(2, &[1.5, 0.0, 2.0]), curve(3, &[0.1, 0.2, 0.3])];
        let a = aggregate(&curves).unwrap();
        let mut running = 0.0;
        for k in 0..3 {
            running += curves.iter().map(|c| c.per_episode_regret[k]).sum::<f64>() / 3.0;
            assert!((a.mean[k] - running).abs() < 1e-12);
        }
    }

    #[test]
    fn needs_two_curves() {
        assert!(aggregate(&[curve(1, &[1.0])]).is_err());
        let single = summarize(&[curve(1, &[1.0])]).unwrap();
        assert_eq!(single.ci_half_width, vec![0.0]);
        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn rejects_ragged_curves() {
        assert!(aggregate(&[curve(1, &[1.0]), curve(2, &[1.0, 2.0])]).is_err());
    }
}
