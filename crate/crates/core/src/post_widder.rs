//! Post-Widder approximants of the density, distribution function and density
//! derivatives.
//!
//! With `λ = k/x` and the normalized coefficients `t_j` of the ψ table:
//!
//! ```text
//! f_k(x)     = (-1)^{k-1} λ t_{k-1}
//! F_k(x)     = Σ_{m=0}^{k-1} (-1)^m t_m
//! f^(q)_k(x) = (-1)^{k-1} λ^{q+1} Σ_{j=0}^{q∧(k-1)} C(q,j) t_{k-1-j}
//! ```
//!
//! The factorials and powers of `λ` cancel exactly in these forms, so no
//! prefactor is ever formed explicitly.

use crate::derivatives::PsiDerivativeTable;
use crate::error::{Error, Result};
use crate::models::ValidatedModel;
use crate::real::{alternating_sign, Real};
use crate::special::pascal_row;

/// What a Post-Widder sequence approximates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PwTarget {
    Pdf,
    Cdf,
    /// The q-th derivative of the density (requires `f^(j)(0) = 0`, `j < q`).
    PdfDerivative(usize),
}

fn check<T: Real>(table: &PsiDerivativeTable<T>, k: usize, x: T) -> Result<()> {
    if !(x > T::zero() && x.is_finite()) {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    if k == 0 {
        return Err(Error::Contract("Post-Widder index k must be at least 1".into()));
    }
    if table.order() + 1 < k {
        return Err(Error::Contract(format!(
            "f_{k} needs a ψ table of order {}, got {}",
            k - 1,
            table.order()
        )));
    }
    let lambda = T::from_usize(k) / x;
    if ((table.lambda() - lambda) / lambda).abs() > T::from_f64(1e-12) {
        return Err(Error::Contract(format!(
            "ψ table built at λ = {} but f_{k}({x}) needs λ = {lambda}",
            table.lambda()
        )));
    }
    Ok(())
}

/// `value · e^{ln_scale}` without underflowing through an intermediate.
fn rescale<T: Real>(value: T, ln_scale: T) -> T {
    if ln_scale == T::zero() || value == T::zero() {
        return value;
    }
    let magnitude = (value.abs().ln() + ln_scale).exp();
    if value.is_sign_negative() {
        -magnitude
    } else {
        magnitude
    }
}

/// `f_k(x) = (-1)^{k-1}/(k-1)! (k/x)^k ψ^(k-1)(k/x)`.
pub fn pw_pdf_approximant<T: Real>(table: &PsiDerivativeTable<T>, k: usize, x: T) -> Result<T> {
    check(table, k, x)?;
    let (u, s) = table.scaled_coefficients();
    Ok(rescale(alternating_sign::<T>(k - 1) * u[k - 1] * table.lambda(), s))
}

/// `F_k(x) = Σ_{j=0}^{k-1} (-1)^{k+j-1}/(k-j-1)! (k/x)^{k-j-1} ψ^(k-j-1)(k/x)`.
///
/// Every term is non-negative for a completely monotone `ψ`; they are added
/// smallest first.
pub fn pw_cdf_approximant<T: Real>(table: &PsiDerivativeTable<T>, k: usize, x: T) -> Result<T> {
    check(table, k, x)?;
    let (u, s) = table.scaled_coefficients();
    let mut terms: Vec<T> = (0..k).map(|m| alternating_sign::<T>(m) * u[m]).collect();
    terms.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).expect("finite terms"));
    let sum: T = terms.into_iter().sum();
    Ok(rescale(sum, s))
}

/// Approximant of `f^(q)(x)`, the transform being `λ^q ψ(λ)`.
pub fn pw_pdf_derivative_approximant<T: Real>(
    table: &PsiDerivativeTable<T>,
    q: usize,
    k: usize,
    x: T,
) -> Result<T> {
    check(table, k, x)?;
    let (u, s) = table.scaled_coefficients();
    let row = pascal_row(q);
    let sum: T = (0..=q.min(k - 1))
        .map(|j| row.get::<T>(j) * u[k - 1 - j])
        .sum();
    let lambda = table.lambda();
    Ok(rescale(
        alternating_sign::<T>(k - 1) * sum * lambda.powi(q as i32 + 1),
        s,
    ))
}

pub fn pw_approximant<T: Real>(table: &PsiDerivativeTable<T>, target: PwTarget, k: usize, x: T) -> Result<T> {
    match target {
        PwTarget::Pdf => pw_pdf_approximant(table, k, x),
        PwTarget::Cdf => pw_cdf_approximant(table, k, x),
        PwTarget::PdfDerivative(q) => pw_pdf_derivative_approximant(table, q, k, x),
    }
}

/// Builds the order `k-1` table at `λ = k/x` and evaluates the approximant.
pub fn approximant_for_model<T: Real>(model: &ValidatedModel, target: PwTarget, k: usize, x: T) -> Result<T> {
    if !(x > T::zero() && x.is_finite()) {
        return Err(Error::Domain(format!("x must be positive, got {x}")));
    }
    if k == 0 {
        return Err(Error::Contract("Post-Widder index k must be at least 1".into()));
    }
    let lambda = T::from_usize(k) / x;
    let table = PsiDerivativeTable::for_model(model, lambda, k - 1)?;
    pw_approximant(&table, target, k, x)
}

/// Approximants `P_j` at the indices `k_1 < … < k_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct PwSequence<T> {
    pub x: T,
    pub indices: Vec<usize>,
    pub target: PwTarget,
    pub approximants: Vec<T>,
}

impl<T: Real> PwSequence<T> {
    pub fn new(x: T, target: PwTarget) -> Self {
        PwSequence {
            x,
            indices: Vec::new(),
            target,
            approximants: Vec::new(),
        }
    }

    pub fn build(model: &ValidatedModel, x: T, indices: &[usize], target: PwTarget) -> Result<Self> {
        let mut seq = Self::new(x, target);
        for &k in indices {
            seq.push(model, k)?;
        }
        Ok(seq)
    }

    /// Appends `P` at index `k`, which must exceed every index so far.
    pub fn push(&mut self, model: &ValidatedModel, k: usize) -> Result<T> {
        if k == 0 || self.indices.last().is_some_and(|&last| k <= last) {
            return Err(Error::Contract(format!(
                "indices must be strictly increasing from 1, got {k} after {:?}",
                self.indices.last()
            )));
        }
        let value = approximant_for_model(model, self.target, k, self.x)?;
        self.indices.push(k);
        self.approximants.push(value);
        Ok(value)
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}
