//! External variation factors `L_k` and their normalization into `[0, 1]`.

use std::fmt;

use rand::Rng;
use rand_distr::{Beta, Distribution};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariationProcess {
    /// i.i.d. two-level factor: `eps0` with probability `rho`, else `1 - eps1`.
    BinaryIid { eps0: f64, eps1: f64, rho: f64 },
    /// `eps0` on even episodes, `1 - eps1` on odd ones.
    PeriodicSquareWave { eps0: f64, eps1: f64 },
    BetaIid { alpha: f64, beta: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationThresholds {
    l_min: f64,
    l_max: f64,
}

impl NormalizationThresholds {
    pub fn new(l_min: f64, l_max: f64) -> Result<Self> {
        if !(l_min.is_finite() && l_max.is_finite() && l_min < l_max) {
            return Err(Error::InvalidParameter(format!(
                "thresholds need l_min < l_max, got ({l_min}, {l_max})"
            )));
        }
        Ok(Self { l_min, l_max })
    }

    pub fn l_min(&self) -> f64 {
        self.l_min
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    /// Clamp to `[l_min, l_max]` and rescale affinely onto `[0, 1]`.
    pub fn normalize(&self, level: f64) -> f64 {
        let clamped = level.clamp(self.l_min, self.l_max);
        (clamped - self.l_min) / (self.l_max - self.l_min)
    }
}

pub fn normalize(level: f64, thresholds: &NormalizationThresholds) -> f64 {
    thresholds.normalize(level)
}

impl VariationProcess {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            VariationProcess::BinaryIid { eps0, eps1, rho } => {
                check_levels(eps0, eps1)?;
                if !(0.0..=1.0).contains(&rho) {
                    return bad(format!("rho must lie in [0, 1], got {rho}"));
                }
            }
            VariationProcess::PeriodicSquareWave { eps0, eps1 } => check_levels(eps0, eps1)?,
            VariationProcess::BetaIid { alpha, beta } => {
                if !(alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite()) {
                    return bad(format!("Beta parameters must be positive, got ({alpha}, {beta})"));
                }
            }
            VariationProcess::Constant { value } => {
                if !(value >= 0.0 && value.is_finite()) {
                    return bad(format!("constant level must be nonnegative, got {value}"));
                }
            }
        }
        Ok(())
    }

    /// Draw `L_k` for episode `k >= 1`. Only the i.i.d. kinds consume `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> f64 {
        debug_assert!(k >= 1, "episodes are 1-based");
        match *self {
            VariationProcess::BinaryIid { eps0, eps1, rho } => {
                if rng.random::<f64>() < rho {
                    eps0
                } else {
                    1.0 - eps1
                }
            }
            VariationProcess::PeriodicSquareWave { eps0, eps1 } => {
                if k.is_multiple_of(2) {
                    eps0
                } else {
                    1.0 - eps1
                }
            }
            VariationProcess::BetaIid { alpha, beta } => Beta::new(alpha, beta)
                .expect("validated Beta parameters")
                .sample(rng),
            VariationProcess::Constant { value } => value,
        }
    }

    /// Thresholds to use when none are configured explicitly. Two-level
    /// processes map onto `{0, 1}` exactly; Beta uses the 5% quantiles.
    pub fn default_thresholds(&self) -> Result<NormalizationThresholds> {
        match *self {
            VariationProcess::BinaryIid { eps0, eps1, .. }
            | VariationProcess::PeriodicSquareWave { eps0, eps1 } => {
                NormalizationThresholds::new(eps0, 1.0 - eps1)
            }
            VariationProcess::BetaIid { .. } => quantile_thresholds(self, DEFAULT_THRESHOLD_RHO),
            VariationProcess::Constant { .. } => NormalizationThresholds::new(0.0, 1.0),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            VariationProcess::BinaryIid { .. } => "binary",
            VariationProcess::PeriodicSquareWave { .. } => "square_wave",
            VariationProcess::BetaIid { .. } => "beta",
            VariationProcess::Constant { .. } => "constant",
        }
    }
}

impl fmt::Display for VariationProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            VariationProcess::BinaryIid { eps0, eps1, rho } => {
                write!(f, "binary:eps0={eps0},eps1={eps1},rho={rho}")
            }
            VariationProcess::PeriodicSquareWave { eps0, eps1 } => {
                write!(f, "square_wave:eps0={eps0},eps1={eps1}")
            }
            VariationProcess::BetaIid { alpha, beta } => write!(f, "beta:alpha={alpha},beta={beta}"),
            VariationProcess::Constant { value } => write!(f, "constant:value={value}"),
        }
    }
}

fn check_levels(eps0: f64, eps1: f64) -> Result<()> {
    if !(eps0 >= 0.0 && eps1 >= 0.0 && eps0 < 1.0 - eps1) {
        return Err(Error::InvalidParameter(format!(
            "two-level factor needs eps0, eps1 >= 0 and eps0 < 1 - eps1, got eps0={eps0}, eps1={eps1}"
        )));
    }
    Ok(())
}

pub fn sample_variation<R: Rng + ?Sized>(process: &VariationProcess, k: usize, rng: &mut R) -> f64 {
    process.sample(k, rng)
}

pub const DEFAULT_THRESHOLD_RHO: f64 = 0.05;
const BISECTION_TOLERANCE: f64 = 1e-10;

/// Thresholds with `P(L <= l_min) = rho` and `P(L >= l_max) = rho`.
///
/// Binary processes return their two support points whatever `rho` is.
pub fn quantile_thresholds(process: &VariationProcess, rho: f64) -> Result<NormalizationThresholds> {
    process.validate()?;
    match *process {
        VariationProcess::BinaryIid { eps0, eps1, .. } => NormalizationThresholds::new(eps0, 1.0 - eps1),
        VariationProcess::BetaIid { alpha, beta } => {
            if !(rho > 0.0 && rho < 0.5) {
                return Err(Error::InvalidParameter(format!(
                    "quantile rho must lie in (0, 0.5), got {rho}"
                )));
            }
            let cdf = |x: f64| beta_reg(alpha, beta, x);
            let l_min = bisect_quantile(cdf, rho);
            let l_max = bisect_quantile(cdf, 1.0 - rho);
            NormalizationThresholds::new(l_min, l_max)
        }
        other => Err(Error::Unsupported(format!(
            "quantile thresholds are only defined for binary and beta processes, not {}",
            other.kind_name()
        ))),
    }
}

/// Smallest `x` in `[0, 1]` with `cdf(x) >= target`, to within the bisection tolerance.
fn bisect_quantile(cdf: impl Fn(f64) -> f64, target: f64) -> f64 {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > BISECTION_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
