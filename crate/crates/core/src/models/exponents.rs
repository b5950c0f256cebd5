//! Closed forms of `φ` and of the normalized derivatives `b_n` per variant.

use super::{custom, LaplaceExponentModel as M};
use crate::error::Result;
use crate::real::{alternating_sign, Real};
use crate::special::{dilog_l2_shifted, ein, normalized_stirling_row, regularized_lower_gamma_sequence};

pub(super) fn phi<T: Real>(model: &M, lambda: T) -> Result<T> {
    let half = T::from_f64(0.5);
    Ok(match model {
        M::ChiSquaredSum { weights } => weights
            .iter()
            .map(|&c| half * (T::from_f64(2.0 * c) * lambda).ln_1p())
            .sum(),
        M::InverseGaussian => lambda.sqrt(),
        M::AlphaStable { alpha, scale } => (T::from_f64(*scale) * lambda).powf(T::from_f64(*alpha)),
        M::StableMixtureDiscrete { components } => components
            .iter()
            .map(|c| T::from_f64(c.weight) * lambda.powf(T::from_f64(c.alpha)))
            .sum(),
        M::UniformStableMix => uniform_mix_coefficients(lambda, 0)[0],
        M::OuPoisson { eta } => T::from_f64(*eta) * ein(lambda),
        M::OuGamma { eta, kappa, theta } => {
            T::from_f64(eta * kappa) * dilog_l2_shifted(lambda * T::from_f64(*theta))
        }
        M::Scaled { factor, inner } => phi(inner, T::from_f64(*factor) * lambda)?,
        M::Sum(members) => {
            let mut acc = T::zero();
            for m in members {
                acc += phi(m, lambda)?;
            }
            acc
        }
        M::CustomLevyDensity(d) => T::from_f64(custom::phi_quadrature(d, lambda.to_f64())?),
    })
}

pub(super) fn normalized<T: Real>(model: &M, lambda: T, n_max: usize) -> Result<Vec<T>> {
    Ok(match model {
        M::ChiSquaredSum { weights } => {
            let mut out = vec![T::zero(); n_max];
            for &c in weights {
                let two_c_lambda = T::from_f64(2.0 * c) * lambda;
                let r = two_c_lambda / (T::one() + two_c_lambda);
                let mut power = T::from_f64(0.5);
                for (i, slot) in out.iter_mut().enumerate() {
                    power *= r;
                    *slot += alternating_sign::<T>(i) * power;
                }
            }
            out
        }
        M::InverseGaussian => {
            // (√λ/2) Π_{m=1}^{n-1} (m - ½)/m
            let mut coeff = lambda.sqrt() * T::from_f64(0.5);
            (0..n_max)
                .map(|i| {
                    if i > 0 {
                        coeff = coeff * T::from_f64(i as f64 - 0.5) / T::from_usize(i);
                    }
                    alternating_sign::<T>(i) * coeff
                })
                .collect()
        }
        M::AlphaStable { alpha, scale } => {
            let lead = (T::from_f64(*scale) * lambda).powf(T::from_f64(*alpha));
            falling_factorial_ratios(*alpha, n_max)
                .into_iter()
                .map(|p| lead * p)
                .collect()
        }
        M::StableMixtureDiscrete { components } => {
            let mut out = vec![T::zero(); n_max];
            for c in components {
                let lead = T::from_f64(c.weight) * lambda.powf(T::from_f64(c.alpha));
                for (slot, p) in out.iter_mut().zip(falling_factorial_ratios::<T>(c.alpha, n_max)) {
                    *slot += lead * p;
                }
            }
            out
        }
        M::UniformStableMix => {
            let c = uniform_mix_coefficients(lambda, n_max);
            (1..=n_max)
                .map(|n| {
                    let row = normalized_stirling_row(n);
                    (1..=n)
                        .map(|m| T::from_parts(row[m].hi(), row[m].lo()) * c[m])
                        .sum()
                })
                .collect()
        }
        M::OuPoisson { eta } => {
            let eta = T::from_f64(*eta);
            regularized_lower_gamma_sequence(n_max, lambda)
                .into_iter()
                .enumerate()
                .map(|(i, p)| alternating_sign::<T>(i) * eta * p)
                .collect()
        }
        M::OuGamma { eta, kappa, theta } => {
            let scale = T::from_f64(eta * kappa);
            ou_gamma_tails(lambda * T::from_f64(*theta), n_max)
                .into_iter()
                .enumerate()
                .map(|(i, t)| alternating_sign::<T>(i) * scale * t)
                .collect()
        }
        M::Scaled { factor, inner } => normalized(inner, T::from_f64(*factor) * lambda, n_max)?,
        M::Sum(members) => {
            let mut out = vec![T::zero(); n_max];
            for m in members {
                for (slot, v) in out.iter_mut().zip(normalized(m, lambda, n_max)?) {
                    *slot += v;
                }
            }
            out
        }
        M::CustomLevyDensity(d) => custom::normalized_quadrature(d, lambda.to_f64(), n_max)?
            .into_iter()
            .map(T::from_f64)
            .collect(),
    })
}

/// `p_n = Π_{m=0}^{n-1} (α - m) / (n-1)!` for `n = 1..=n_max`.
fn falling_factorial_ratios<T: Real>(alpha: f64, n_max: usize) -> Vec<T> {
    let alpha = T::from_f64(alpha);
    let mut p = alpha;
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        out.push(p);
        p = p * (alpha - T::from_usize(n)) / T::from_usize(n);
    }
    out
}

/// `tail_n(y) = Σ_{m>=n} z^m/m` with `z = y/(1+y)`, for `n = 1..=n_max`.
/// `tail_1 = ln(1+y)`.
fn ou_gamma_tails<T: Real>(y: T, n_max: usize) -> Vec<T> {
    let z = y / (T::one() + y);
    let mut powers = Vec::with_capacity(n_max + 1);
    let mut zp = T::one();
    for _ in 0..=n_max {
        powers.push(zp);
        zp *= z;
    }
    let top = if z <= T::from_f64(0.99) {
        let mut sum = T::zero();
        let mut zm = powers[n_max];
        let mut m = n_max;
        loop {
            let term = zm / T::from_usize(m);
            sum += term;
            if term <= T::epsilon() * sum || m > n_max + 100_000 {
                break;
            }
            zm *= z;
            m += 1;
        }
        sum
    } else {
        let head: T = (1..n_max).map(|m| powers[m] / T::from_usize(m)).sum();
        y.ln_1p() - head
    };
    let mut out = vec![T::zero(); n_max];
    out[n_max - 1] = top;
    for n in (1..n_max).rev() {
        out[n - 1] = out[n] + powers[n] / T::from_usize(n);
    }
    out
}

/// `c_m(λ) = ∫_0^1 β^m λ^β dβ` for `m = 0..=m_max`.
///
/// Evaluated from positive-term series in `L = ln λ` on both sides of
/// `λ = 1`: `Σ_j L^j / ((m+j+1) j!)` for `L >= 0`, and
/// `e^L Σ_j (-L)^j / ((m+1)...(m+j+1))` for `L < 0`.
pub fn uniform_mix_coefficients<T: Real>(lambda: T, m_max: usize) -> Vec<T> {
    let l = lambda.ln();
    (0..=m_max)
        .map(|m| {
            let mf = T::from_usize(m);
            let mut sum = T::zero();
            let mut j = 0usize;
            if l >= T::zero() {
                let mut power = T::one(); // L^j / j!
                loop {
                    let term = power / (mf + T::from_usize(j + 1));
                    sum += term;
                    j += 1;
                    if (j >= 18 && term <= T::epsilon() * sum) || j > 100_000 {
                        break;
                    }
                    power = power * l / T::from_usize(j);
                }
                sum
            } else {
                let neg = -l;
                let mut term = T::one() / (mf + T::one());
                loop {
                    sum += term;
                    j += 1;
                    if (j >= 18 && term <= T::epsilon() * sum) || j > 100_000 {
                        break;
                    }
                    term = term * neg / (mf + T::from_usize(j + 1));
                }
                l.exp() * sum
            }
        })
        .collect()
}

/// The integration-by-parts recursion `c_m = (λ - m c_{m-1}) / ln λ` from
/// `c_0 = (λ - 1)/ln λ`. Errors grow like `m!/|ln λ|^m`, so it is only usable
/// for small `m` away from `λ = 1`.
pub fn uniform_mix_coefficients_recursive<T: Real>(lambda: T, m_max: usize) -> Vec<T> {
    let l = lambda.ln();
    let mut out = Vec::with_capacity(m_max + 1);
    let mut c = (lambda - T::one()) / l;
    out.push(c);
    for m in 1..=m_max {
        c = (lambda - T::from_usize(m) * c) / l;
        out.push(c);
    }
    out
}
