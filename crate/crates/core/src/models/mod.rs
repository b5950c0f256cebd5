//! Catalog of Laplace exponents `φ` of non-negative infinitely divisible
//! laws, with exact derivatives.
//!
//! Besides `φ` and the raw derivatives `φ^(n)`, every model exposes the
//! normalized sequence `b_n(λ) = λ^n φ^(n)(λ) / (n-1)!`. These stay of moderate
//! size for any `λ` and `n`, and they are what the derivative engine consumes.

mod custom;
mod exponents;
mod grammar;
mod reference;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::real::{ln_factorial, Real};

pub use custom::phi_derivatives_quadrature;
pub use exponents::{uniform_mix_coefficients, uniform_mix_coefficients_recursive};
pub use grammar::{format_spec, parse_spec, CATALOG_NAMES};
pub use reference::{reference_cdf, reference_pdf, ReferenceDistribution};

/// Adaptive quadrature settings for user-supplied Lévy densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub relative_tolerance: f64,
    pub max_subdivisions: usize,
    /// Jump size where `(0, ∞)` is split between the small-jump and tail parts.
    pub tail_split: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            relative_tolerance: 1e-10,
            max_subdivisions: 2000,
            tail_split: 1.0,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0 && self.relative_tolerance <= 1e-4) {
            return Err(Error::parameter(
                "relative_tolerance",
                format!("must lie in (0, 1e-4], got {}", self.relative_tolerance),
            ));
        }
        if self.max_subdivisions < 16 {
            return Err(Error::parameter(
                "max_subdivisions",
                format!("must be at least 16, got {}", self.max_subdivisions),
            ));
        }
        if !(self.tail_split > 0.0 && self.tail_split.is_finite()) {
            return Err(Error::parameter("tail_split", "must be positive and finite"));
        }
        Ok(())
    }
}

/// A Lévy density `u ↦ Π′(u)` on `(0, ∞)` with its quadrature settings.
#[derive(Clone)]
pub struct CustomDensity {
    pub density: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub config: QuadratureConfig,
    pub label: String,
}

impl CustomDensity {
    pub fn new(
        label: impl Into<String>,
        config: QuadratureConfig,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        CustomDensity {
            density: Arc::new(density),
            config,
            label: label.into(),
        }
    }
}

impl fmt::Debug for CustomDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomDensity")
            .field("label", &self.label)
            .field("config", &self.config)
            .finish_non_exhaustive()
    }
}

impl PartialEq for CustomDensity {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.density, &other.density)
            && self.config == other.config
            && self.label == other.label
    }
}

/// One `(α_j, d_j)` pair of a discrete stable mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StableComponent {
    pub alpha: f64,
    pub weight: f64,
}

/// Laplace exponent of a non-negative infinitely divisible law with zero drift.
#[derive(Debug, Clone, PartialEq)]
pub enum LaplaceExponentModel {
    /// `Σ c_i χ²_1`: `φ = Σ ½ ln(1 + 2 c_i λ)`.
    ChiSquaredSum { weights: Vec<f64> },
    /// `φ = √λ`.
    InverseGaussian,
    /// `φ = (cλ)^α`, `0 < α < 1`.
    AlphaStable { alpha: f64, scale: f64 },
    /// `φ = Σ d_j λ^{α_j}` with `Σ d_j = 1`.
    StableMixtureDiscrete { components: Vec<StableComponent> },
    /// `φ = ∫_0^1 λ^β dβ = (λ - 1)/ln λ`.
    UniformStableMix,
    /// `∫ e^{-s/η} dL_s` with `L` Poisson: `φ = η Ein(λ)`.
    OuPoisson { eta: f64 },
    /// `∫ e^{-s/η} dL_s` with `L` Gamma(κ, θ): `φ = ηκ L2(1 + λθ)`.
    OuGamma { eta: f64, kappa: f64, theta: f64 },
    /// Law of `c X`: `φ(λ) = φ_X(cλ)`.
    Scaled { factor: f64, inner: Box<LaplaceExponentModel> },
    /// Sum of independent members.
    Sum(Vec<LaplaceExponentModel>),
    CustomLevyDensity(CustomDensity),
}

impl LaplaceExponentModel {
    pub fn chi_squared() -> Self {
        LaplaceExponentModel::ChiSquaredSum { weights: vec![1.0] }
    }

    pub fn alpha_stable(alpha: f64) -> Self {
        LaplaceExponentModel::AlphaStable { alpha, scale: 1.0 }
    }

    pub fn stable_mixture(pairs: &[(f64, f64)]) -> Self {
        LaplaceExponentModel::StableMixtureDiscrete {
            components: pairs
                .iter()
                .map(|&(alpha, weight)| StableComponent { alpha, weight })
                .collect(),
        }
    }

    pub fn ou_gamma(eta: f64, kappa: f64) -> Self {
        LaplaceExponentModel::OuGamma { eta, kappa, theta: 1.0 }
    }

    pub fn scaled(factor: f64, inner: LaplaceExponentModel) -> Self {
        LaplaceExponentModel::Scaled {
            factor,
            inner: Box::new(inner),
        }
    }

    pub fn custom(density: CustomDensity) -> Self {
        LaplaceExponentModel::CustomLevyDensity(density)
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::parameter(field, format!("must be positive and finite, got {v}")))
    }
}

fn stability_index(field: &str, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::parameter(field, format!("index outside (0,1): {alpha}")))
    }
}

fn normalize(model: LaplaceExponentModel) -> Result<LaplaceExponentModel> {
    use LaplaceExponentModel as M;
    Ok(match model {
        M::ChiSquaredSum { weights } => {
            if weights.is_empty() {
                return Err(Error::parameter("weights", "at least one weight required"));
            }
            for w in &weights {
                positive("weights", *w)?;
            }
            M::ChiSquaredSum { weights }
        }
        M::InverseGaussian => M::InverseGaussian,
        M::AlphaStable { alpha, scale } => {
            stability_index("alpha", alpha)?;
            positive("scale", scale)?;
            M::AlphaStable { alpha, scale }
        }
        M::StableMixtureDiscrete { components } => {
            if components.is_empty() {
                return Err(Error::parameter("components", "at least one component required"));
            }
            for c in &components {
                stability_index("alphas", c.alpha)?;
                if !(c.weight >= 0.0 && c.weight.is_finite()) {
                    return Err(Error::parameter("weights", format!("must be non-negative, got {}", c.weight)));
                }
            }
            let total: f64 = components.iter().map(|c| c.weight).sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(Error::parameter("weights", format!("must sum to 1, got {total}")));
            }
            M::StableMixtureDiscrete { components }
        }
        M::UniformStableMix => M::UniformStableMix,
        M::OuPoisson { eta } => {
            positive("eta", eta)?;
            M::OuPoisson { eta }
        }
        M::OuGamma { eta, kappa, theta } => {
            positive("eta", eta)?;
            positive("kappa", kappa)?;
            positive("theta", theta)?;
            M::OuGamma { eta, kappa, theta }
        }
        M::Scaled { factor, inner } => {
            positive("factor", factor)?;
            match normalize(*inner)? {
                M::Scaled { factor: f2, inner } => M::Scaled { factor: factor * f2, inner },
                other => M::Scaled { factor, inner: Box::new(other) },
            }
        }
        M::Sum(members) => {
            if members.is_empty() {
                return Err(Error::parameter("members", "a sum needs at least one member"));
            }
            M::Sum(members.into_iter().map(normalize).collect::<Result<_>>()?)
        }
        M::CustomLevyDensity(d) => {
            d.config.validate()?;
            custom::check_integrability(&d)?;
            M::CustomLevyDensity(d)
        }
    })
}

/// Checks every parameter invariant and returns the normalized model.
pub fn validate(model: LaplaceExponentModel) -> Result<ValidatedModel> {
    normalize(model).map(ValidatedModel)
}

/// A model whose parameters have been checked; the only type the numerical
/// routines accept.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedModel(LaplaceExponentModel);

impl TryFrom<LaplaceExponentModel> for ValidatedModel {
    type Error = Error;

    fn try_from(model: LaplaceExponentModel) -> Result<Self> {
        validate(model)
    }
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("λ must be positive and finite, got {lambda}")))
    }
}

impl ValidatedModel {
    pub fn model(&self) -> &LaplaceExponentModel {
        &self.0
    }

    pub fn into_inner(self) -> LaplaceExponentModel {
        self.0
    }

    /// `φ(λ)`.
    pub fn phi<T: Real>(&self, lambda: T) -> Result<T> {
        check_lambda(lambda)?;
        exponents::phi(&self.0, lambda)
    }

    /// `b_n(λ) = λ^n φ^(n)(λ) / (n-1)!` for `n = 1..=n_max` (index `n - 1`).
    pub fn normalized_derivatives<T: Real>(&self, lambda: T, n_max: usize) -> Result<Vec<T>> {
        check_lambda(lambda)?;
        if n_max == 0 {
            return Ok(Vec::new());
        }
        exponents::normalized(&self.0, lambda, n_max)
    }

    /// `φ^(n)(λ)` for `n = 1..=n_max` (index `n - 1`). Entries may leave the
    /// floating-point range for large `n`; the normalized form never does.
    pub fn phi_derivatives<T: Real>(&self, lambda: T, n_max: usize) -> Result<Vec<T>> {
        let b = self.normalized_derivatives(lambda, n_max)?;
        let ln_lambda = lambda.ln();
        let mut ln_fact = T::zero();
        Ok(b
            .into_iter()
            .enumerate()
            .map(|(i, bn)| {
                let n = i + 1;
                if n > 1 {
                    ln_fact += T::from_usize(n - 1).ln();
                }
                bn * (ln_fact - T::from_usize(n) * ln_lambda).exp()
            })
            .collect())
    }
}

/// `φ(λ)` for a validated model.
pub fn phi<T: Real>(model: &ValidatedModel, lambda: T) -> Result<T> {
    model.phi(lambda)
}

/// `φ^(1..=n_max)(λ)` for a validated model.
pub fn phi_derivatives<T: Real>(model: &ValidatedModel, lambda: T, n_max: usize) -> Result<Vec<T>> {
    model.phi_derivatives(lambda, n_max)
}

/// `(n-1)!` helper shared by the submodules.
pub(crate) fn ln_gamma_int<T: Real>(n: usize) -> T {
    ln_factorial::<T>(n.saturating_sub(1))
}
