//! Closed-form densities and distribution functions used as oracles.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::special::{erf, erf_complement};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceDistribution {
    /// `χ²` with one degree of freedom, `φ = ½ ln(1 + 2λ)`.
    ChiSquared1,
    /// `φ = √λ`.
    InverseGaussian,
    /// The stable law with `α = ½`; the same law as [`Self::InverseGaussian`].
    LevyHalfStable,
}

impl FromStr for ReferenceDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi-squared-1df" => Ok(Self::ChiSquared1),
            "inverse-gaussian" => Ok(Self::InverseGaussian),
            "levy-half-stable" => Ok(Self::LevyHalfStable),
            other => Err(Error::Spec {
                spec: other.to_string(),
                reason: "expected chi-squared-1df, inverse-gaussian or levy-half-stable".into(),
            }),
        }
    }
}

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("x must be positive, got {x}")))
    }
}

pub fn reference_pdf(dist: ReferenceDistribution, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(match dist {
        ReferenceDistribution::ChiSquared1 => (-x / 2.0).exp() / (2.0 * PI * x).sqrt(),
        ReferenceDistribution::InverseGaussian | ReferenceDistribution::LevyHalfStable => {
            (-1.0 / (4.0 * x)).exp() / (4.0 * PI * x * x * x).sqrt()
        }
    })
}

pub fn reference_cdf(dist: ReferenceDistribution, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(match dist {
        ReferenceDistribution::ChiSquared1 => erf((x / 2.0).sqrt()),
        ReferenceDistribution::InverseGaussian | ReferenceDistribution::LevyHalfStable => {
            erf_complement(1.0 / (2.0 * x.sqrt()))
        }
    })
}
