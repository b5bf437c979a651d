//! Prior distributions over the alternative interval.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::quadrature::adaptive_simpson;
use crate::error::{Error, Result};

/// Density handle of a custom prior.
pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Cells of the tabulated CDF used to sample custom priors.
const SAMPLER_CELLS: usize = 4096;
const NORMALIZATION_TOL: f64 = 1e-8;

/// Distribution of voters' peaks with support `[m, M]`.
#[derive(Clone)]
pub enum PriorSpec {
    Uniform {
        lower: f64,
        upper: f64,
    },
    Custom {
        lower: f64,
        upper: f64,
        label: String,
        density: Density,
    },
}

impl fmt::Debug for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PriorSpec({self})")
    }
}

impl fmt::Display for PriorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PriorSpec::Uniform { lower, upper } => write!(f, "uniform[{lower}, {upper}]"),
            PriorSpec::Custom { lower, upper, label, .. } => write!(f, "{label}[{lower}, {upper}]"),
        }
    }
}

fn check_support(m: f64, upper: f64) -> Result<()> {
    if m.is_finite() && upper.is_finite() && m < upper {
        Ok(())
    } else {
        Err(Error::InvalidPrior(format!("support [{m}, {upper}] is not a proper interval")))
    }
}

impl PriorSpec {
    pub fn uniform(lower: f64, upper: f64) -> Result<Self> {
        check_support(lower, upper)?;
        Ok(PriorSpec::Uniform { lower, upper })
    }

    /// Custom prior; the density must be bounded, nonnegative and integrate
    /// to 1 on `[m, M]`.
    pub fn custom(lower: f64, upper: f64, label: impl Into<String>, density: Density) -> Result<Self> {
        check_support(lower, upper)?;
        let prior = PriorSpec::Custom {
            lower,
            upper,
            label: label.into(),
            density,
        };
        let mass = prior.mass(lower, upper)?;
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidPrior(format!("density integrates to {mass}, not 1")));
        }
        Ok(prior)
    }

    /// Custom prior whose density is rescaled to integrate to 1.
    pub fn custom_normalized(lower: f64, upper: f64, label: impl Into<String>, density: Density) -> Result<Self> {
        check_support(lower, upper)?;
        let label = label.into();
        let raw = PriorSpec::Custom {
            lower,
            upper,
            label: label.clone(),
            density: density.clone(),
        };
        let mass = raw.mass(lower, upper)?;
        if !(mass > 0.0) {
            return Err(Error::InvalidPrior("density has no mass".into()));
        }
        Self::custom(lower, upper, label, Arc::new(move |x| density(x) / mass))
    }

    /// Piecewise-linear density through `(x, p(x))` points spanning the support.
    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidPrior("a tabulated density needs at least two points".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::InvalidPrior("tabulated x values must increase strictly".into()));
        }
        if let Some(&(x, p)) = points.iter().find(|(_, p)| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::DensityEvaluation {
                x,
                reason: format!("tabulated density {p} is not a finite nonnegative number"),
            });
        }
        let (m, upper) = (points[0].0, points[points.len() - 1].0);
        let pts = Arc::new(points);
        Self::custom_normalized(
            m,
            upper,
            "tabulated",
            Arc::new(move |x| {
                let j = pts.partition_point(|&(xj, _)| xj <= x).clamp(1, pts.len() - 1);
                let ((x0, p0), (x1, p1)) = (pts[j - 1], pts[j]);
                p0 + (p1 - p0) * ((x - x0) / (x1 - x0)).clamp(0.0, 1.0)
            }),
        )
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            PriorSpec::Uniform { lower, upper } | PriorSpec::Custom { lower, upper, .. } => (*lower, *upper),
        }
    }

    /// `p(x)`; zero outside the support.
    pub fn density(&self, x: f64) -> Result<f64> {
        let (m, upper) = self.support();
        if x < m || x > upper {
            return Ok(0.0);
        }
        match self {
            PriorSpec::Uniform { .. } => Ok(1.0 / (upper - m)),
            PriorSpec::Custom { density, .. } => {
                let p = density(x);
                if p.is_finite() && p >= 0.0 {
                    Ok(p)
                } else {
                    Err(Error::DensityEvaluation {
                        x,
                        reason: format!("density returned {p}"),
                    })
                }
            }
        }
    }

    /// `∫_a^b p`.
    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        adaptive_simpson(|x| self.density(x), a, b, NORMALIZATION_TOL * 1e-2)
    }

    /// Sampler reproducing this prior from uniform draws.
    pub fn sampler(&self) -> Result<Sampler> {
        let (m, upper) = self.support();
        match self {
            PriorSpec::Uniform { .. } => Ok(Sampler::Uniform { m, width: upper - m }),
            PriorSpec::Custom { .. } => {
                let step = (upper - m) / SAMPLER_CELLS as f64;
                let xs: Vec<f64> = (0..=SAMPLER_CELLS)
                    .map(|j| if j == SAMPLER_CELLS { upper } else { m + step * j as f64 })
                    .collect();
                let mut cdf = Vec::with_capacity(xs.len());
                let mut acc = 0.0;
                cdf.push(0.0);
                for w in xs.windows(2) {
                    acc += self.mass(w[0], w[1])?;
                    cdf.push(acc);
                }
                Ok(Sampler::Tabulated { xs, cdf })
            }
        }
    }
}

/// Inverse-CDF sampler.
#[derive(Debug, Clone)]
pub enum Sampler {
    Uniform { m: f64, width: f64 },
    Tabulated { xs: Vec<f64>, cdf: Vec<f64> },
}

impl Sampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match self {
            Sampler::Uniform { m, width } => m + width * u,
            Sampler::Tabulated { xs, cdf } => {
                let target = u * cdf[cdf.len() - 1];
                let j = cdf.partition_point(|&c| c <= target).clamp(1, cdf.len() - 1);
                let (c0, c1) = (cdf[j - 1], cdf[j]);
                let t = if c1 > c0 { (target - c0) / (c1 - c0) } else { 0.5 };
                xs[j - 1] + (xs[j] - xs[j - 1]) * t
            }
        }
    }
}
