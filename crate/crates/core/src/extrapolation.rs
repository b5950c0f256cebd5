//! Extrapolation of a Post-Widder sequence to `h = 1/k → 0`, with the
//! Bulirsch-Stoer companion estimate used for error control.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::double_double::DoubleDouble;
use crate::error::{Error, Result};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExtrapolationMethod {
    #[default]
    Polynomial,
    Rational,
}

/// Choice of the companion constant `α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum AlphaRule {
    /// `α = 1 + 2/(k_{N+1}/k_1 - 1)`.
    #[default]
    Derivation,
    /// `α = 1 + 2/(k_{N+1}/k_1 + 1)`.
    StepFive,
}

fn check_indices(ks: &[usize]) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::Contract("extrapolation needs at least one point".into()));
    }
    for (i, &k) in ks.iter().enumerate() {
        if k == 0 {
            return Err(Error::Contract("indices must be positive".into()));
        }
        if ks[..i].contains(&k) {
            return Err(Error::Contract(format!("duplicate index k = {k}")));
        }
    }
    Ok(())
}

fn weight_cache() -> &'static RwLock<HashMap<Vec<usize>, Arc<Vec<DoubleDouble>>>> {
    static CACHE: OnceLock<RwLock<HashMap<Vec<usize>, Arc<Vec<DoubleDouble>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Lagrange weights `c_i = Π_{j≠i} k_i/(k_i - k_j)` of the value at `h = 0`,
/// computed once per index set.
pub fn polynomial_weights(ks: &[usize]) -> Result<Arc<Vec<DoubleDouble>>> {
    check_indices(ks)?;
    if let Some(w) = weight_cache().read().expect("weight cache poisoned").get(ks) {
        return Ok(Arc::clone(w));
    }
    let weights: Vec<DoubleDouble> = ks
        .iter()
        .map(|&ki| {
            let kf = DoubleDouble::from(ki as f64);
            ks.iter()
                .filter(|&&kj| kj != ki)
                .fold(DoubleDouble::ONE, |acc, &kj| {
                    acc * kf / DoubleDouble::from(ki as f64 - kj as f64)
                })
        })
        .collect();
    let total: DoubleDouble = weights.iter().copied().sum();
    if (total - DoubleDouble::ONE).abs().to_f64() > 1e-10 {
        return Err(Error::Contract(format!("extrapolation weights sum to {total}, not 1")));
    }
    let weights = Arc::new(weights);
    weight_cache()
        .write()
        .expect("weight cache poisoned")
        .insert(ks.to_vec(), Arc::clone(&weights));
    Ok(weights)
}

/// `P_N(0) = Σ c_i P_i`.
pub fn polynomial_extrapolate<T: Real>(points: &[(usize, T)]) -> Result<T> {
    let ks: Vec<usize> = points.iter().map(|p| p.0).collect();
    let weights = polynomial_weights(&ks)?;
    Ok(weights
        .iter()
        .zip(points)
        .map(|(c, &(_, v))| T::from_parts(c.hi(), c.lo()) * v)
        .sum())
}

/// `R_N(0)` from the Bulirsch-Stoer rational tableau.
///
/// With `D = R^{i+1}_{m-1} - R^i_{m-1}` and `E = R^{i+1}_{m-1} - R^{i+1}_{m-2}`:
/// `R^i_m = R^{i+1}_{m-1} + D / ((h_i/h_{i+m})(1 - D/E) - 1)`, `R^i_{-1} = 0`.
/// The result interpolates with numerator degree `⌊(N-1)/2⌋` and denominator
/// degree `⌈(N-1)/2⌉` in `h`.
pub fn rational_extrapolate<T: Real>(points: &[(usize, T)]) -> Result<T> {
    let ks: Vec<usize> = points.iter().map(|p| p.0).collect();
    check_indices(&ks)?;
    let n = points.len();
    let mut prev2: Vec<T> = vec![T::zero(); n + 1];
    let mut prev: Vec<T> = points.iter().map(|p| p.1).collect();
    for m in 1..n {
        let mut next = Vec::with_capacity(n - m);
        for i in 0..n - m {
            let upper = prev[i + 1];
            let d = upper - prev[i];
            if d == T::zero() {
                next.push(upper);
                continue;
            }
            let e = upper - prev2[i + 1];
            if e == T::zero() {
                return Err(Error::Instability { column: m });
            }
            // h_i / h_{i+m} = k_{i+m} / k_i
            let ratio = T::from_usize(ks[i + m]) / T::from_usize(ks[i]);
            let scaled = ratio * (T::one() - d / e);
            let denominator = scaled - T::one();
            let floor = T::epsilon() * T::from_f64(16.0) * (scaled.abs() + T::one());
            if denominator.abs() <= floor {
                return Err(Error::Instability { column: m });
            }
            let value = upper + d / denominator;
            if !value.is_finite() {
                return Err(Error::Instability { column: m });
            }
            next.push(value);
        }
        prev2 = prev;
        prev = next;
    }
    Ok(prev[0])
}

pub fn extrapolate_with<T: Real>(points: &[(usize, T)], method: ExtrapolationMethod) -> Result<T> {
    match method {
        ExtrapolationMethod::Polynomial => polynomial_extrapolate(points),
        ExtrapolationMethod::Rational => rational_extrapolate(points),
    }
}

/// The companion constant for a sequence starting at `k_first` whose newest
/// index is `k_latest`.
pub fn bs_alpha(k_first: usize, k_latest: usize, rule: AlphaRule) -> f64 {
    let ratio = k_latest as f64 / k_first as f64;
    match rule {
        AlphaRule::Derivation => 1.0 + 2.0 / (ratio - 1.0),
        AlphaRule::StepFive => 1.0 + 2.0 / (ratio + 1.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate<T> {
    pub alpha: T,
    pub abs_error: T,
    /// `+∞` when `|current| <= tiny`; use the absolute estimate there.
    pub rel_error: T,
}

/// `abs = (1 + α)|current - previous|`, which equals `|P_N - P̃_N|` for
/// `previous = P_N(0)`, `current = P_{N+1}(0)`.
pub fn error_estimate<T: Real>(ks: &[usize], current: T, previous: T, rule: AlphaRule, tiny: T) -> ErrorEstimate<T> {
    let alpha = T::from_f64(bs_alpha(ks[0], *ks.last().expect("non-empty"), rule));
    let abs_error = (T::one() + alpha) * (current - previous).abs();
    let rel_error = if current.abs() > tiny {
        abs_error / current.abs()
    } else {
        T::from_f64(f64::INFINITY)
    };
    ErrorEstimate { alpha, abs_error, rel_error }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrapolationOutcome<T> {
    /// `(P_N(0) + P̃_N(0)) / 2`.
    pub value: T,
    /// `P_N(0)`, from all points but the newest.
    pub primary_estimate: T,
    /// `P̃_N(0) = (1 + α) P_{N+1}(0) - α P_N(0)`.
    pub companion: T,
    /// `P_{N+1}(0)`, from all points.
    pub latest: T,
    pub alpha: T,
    pub abs_error_estimate: T,
    pub rel_error_estimate: T,
    pub points_used: usize,
}

/// Extrapolates with all points and with all but the newest, and forms the
/// companion estimate. Needs at least two points.
pub fn extrapolate<T: Real>(
    points: &[(usize, T)],
    method: ExtrapolationMethod,
    rule: AlphaRule,
    tiny: T,
) -> Result<ExtrapolationOutcome<T>> {
    if points.len() < 2 {
        return Err(Error::Contract("an error estimate needs at least two points".into()));
    }
    let latest = extrapolate_with(points, method)?;
    let primary = extrapolate_with(&points[..points.len() - 1], method)?;
    let ks: Vec<usize> = points.iter().map(|p| p.0).collect();
    let est = error_estimate(&ks, latest, primary, rule, tiny);
    let companion = (T::one() + est.alpha) * latest - est.alpha * primary;
    Ok(ExtrapolationOutcome {
        value: (primary + companion) / T::from_f64(2.0),
        primary_estimate: primary,
        companion,
        latest,
        alpha: est.alpha,
        abs_error_estimate: est.abs_error,
        rel_error_estimate: est.rel_error,
        points_used: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::double_double::DoubleDouble as Dd;
    use crate::models::{reference_pdf, validate, LaplaceExponentModel, ReferenceDistribution};
    use crate::post_widder::{PwSequence, PwTarget};
    use proptest::prelude::*;

    fn pts(ks: &[usize], f: impl Fn(f64) -> f64) -> Vec<(usize, f64)> {
        ks.iter().map(|&k| (k, f(1.0 / k as f64))).collect()
    }

    #[test]
    fn single_point_is_identity() {
        assert_eq!(polynomial_extrapolate(&[(10, 0.3f64)]).unwrap(), 0.3);
        assert_eq!(rational_extrapolate(&[(10, 0.3f64)]).unwrap(), 0.3);
    }

    #[test]
    fn two_point_weights() {
        let w = polynomial_weights(&[10, 20]).unwrap();
        assert_eq!(w[0].to_f64(), -1.0);
        assert_eq!(w[1].to_f64(), 2.0);
        let l = 0.7;
        let v = polynomial_extrapolate(&pts(&[10, 20], |h| l + 3.0 * h)).unwrap();
        assert!((v - l).abs() < 1e-15);
    }

    #[test]
    fn quadratic_annihilated_by_three_points() {
        let v = polynomial_extrapolate(&pts(&[10, 20, 30], |h| 0.25 + 2.0 * h - 7.0 * h * h)).unwrap();
        assert!((v - 0.25).abs() < 1e-12);
    }

    #[test]
    fn duplicate_indices_rejected() {
        assert!(matches!(polynomial_extrapolate(&[(10, 1.0f64), (10, 2.0)]), Err(Error::Contract(_))));
        assert!(matches!(rational_extrapolate(&[(10, 1.0f64), (10, 2.0)]), Err(Error::Contract(_))));
        assert!(matches!(polynomial_weights(&[]), Err(Error::Contract(_))));
    }

    #[test]
    fn weights_are_cached() {
        let a = polynomial_weights(&[10, 20, 30, 40]).unwrap();
        let b = polynomial_weights(&[10, 20, 30, 40]).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn rational_examples() {
        let c = rational_extrapolate(&pts(&[10, 20, 30, 40], |_| 0.42)).unwrap();
        assert_eq!(c, 0.42);
        let r = rational_extrapolate(&pts(&[10, 20, 30, 40], |h| 1.0 / (1.0 + h))).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r = rational_extrapolate(&pts(&[10, 20, 30, 40], |h| (1.0 + 2.0 * h) / (1.0 + h + h * h))).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let r = rational_extrapolate(&pts(&[10, 20, 30], |h| (2.0 - h) / (1.0 + 5.0 * h))).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rational_instability_is_reported() {
        // E = 0 with D ≠ 0 at the second column.
        let err = rational_extrapolate(&[(10, 1.0f64), (20, 0.0), (30, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::Instability { .. }), "{err:?}");
    }

    #[test]
    fn chi_squared_rational_beats_polynomial() {
        let m = validate(LaplaceExponentModel::chi_squared()).unwrap();
        let ks: Vec<usize> = (1..=6).map(|j| 10 * j).collect();
        let seq = PwSequence::build(&m, Dd::from(1.0), &ks, PwTarget::Pdf).unwrap();
        let points: Vec<(usize, Dd)> = ks.iter().copied().zip(seq.approximants.iter().copied()).collect();
        let exact = reference_pdf(ReferenceDistribution::ChiSquared1, 1.0).unwrap();
        let p = (polynomial_extrapolate(&points).unwrap().to_f64() - exact).abs();
        let r = (rational_extrapolate(&points).unwrap().to_f64() - exact).abs();
        assert!(r < p, "rational {r:e} vs polynomial {p:e}");
    }

    #[test]
    fn alpha_rules() {
        assert!((bs_alpha(10, 80, AlphaRule::Derivation) - 9.0 / 7.0).abs() < 1e-15);
        assert!((bs_alpha(10, 80, AlphaRule::StepFive) - 11.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn stationary_sequence_has_zero_estimate() {
        let e = error_estimate(&[10, 20], 0.5f64, 0.5, AlphaRule::Derivation, 1e-300);
        assert_eq!(e.abs_error, 0.0);
        assert_eq!(e.rel_error, 0.0);
        let near_zero = error_estimate(&[10, 20], 1e-320f64, 0.0, AlphaRule::Derivation, 1e-300);
        assert!(near_zero.rel_error.is_infinite());
    }

    #[test]
    fn chi_squared_estimate_bounds_error_at_six_points() {
        let m = validate(LaplaceExponentModel::chi_squared()).unwrap();
        let ks: Vec<usize> = (1..=6).map(|j| 10 * j).collect();
        let seq = PwSequence::build(&m, 1.0f64, &ks, PwTarget::Pdf).unwrap();
        let points: Vec<(usize, f64)> = ks.iter().copied().zip(seq.approximants.iter().copied()).collect();
        let out = extrapolate(&points, ExtrapolationMethod::Polynomial, AlphaRule::Derivation, 1e-300).unwrap();
        let exact = reference_pdf(ReferenceDistribution::ChiSquared1, 1.0).unwrap();
        assert!(out.abs_error_estimate >= (out.value - exact).abs());
        assert!(out.abs_error_estimate >= (out.latest - exact).abs());
        assert_eq!(out.points_used, 6);
    }

    #[test]
    fn outcome_value_between_primary_and_companion() {
        let points = pts(&[10, 20, 30, 40], |h| 1.0 + h + 3.0 * h.powi(4));
        let out = extrapolate(&points, ExtrapolationMethod::Polynomial, AlphaRule::Derivation, 1e-300).unwrap();
        let lo = out.primary_estimate.min(out.companion);
        let hi = out.primary_estimate.max(out.companion);
        assert!(lo <= out.value && out.value <= hi);
        assert!((out.abs_error_estimate - (out.primary_estimate - out.companion).abs()).abs() < 1e-15);
        assert!(extrapolate(&points[..1], ExtrapolationMethod::Polynomial, AlphaRule::Derivation, 1e-300).is_err());
    }

    fn schedule() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::btree_set(1usize..200, 1..=8).prop_map(|s| s.into_iter().collect())
    }

    proptest! {
        #[test]
        fn weights_sum_to_one(ks in schedule()) {
            let w = polynomial_weights(&ks).unwrap();
            let total: Dd = w.iter().copied().sum();
            prop_assert!((total - Dd::ONE).abs().to_f64() < 1e-10);
        }

        #[test]
        fn polynomial_exact_on_polynomials(n in 1usize..=8, coeffs in prop::collection::vec(-1.0f64..1.0, 8), a0 in 1.0f64..2.0) {
            let ks: Vec<usize> = (1..=n).map(|j| 10 * j).collect();
            let f = |h: f64| a0 + (1..n).map(|m| coeffs[m] * h.powi(m as i32)).sum::<f64>();
            let v = polynomial_extrapolate(&pts(&ks, f)).unwrap();
            prop_assert!(((v - a0) / a0).abs() < 1e-11);
        }

        #[test]
        fn rational_exact_on_diagonal_rationals(
            n in 2usize..=6,
            num in prop::collection::vec(-1.0f64..1.0, 3),
            den in prop::collection::vec(0.0f64..1.0, 3),
            a0 in 1.0f64..2.0,
        ) {
            let p = (n - 1) / 2;
            let q = n - 1 - p;
            let ks: Vec<usize> = (1..=n).map(|j| 10 * j).collect();
            let f = |h: Dd| {
                let mut top = Dd::from(a0);
                for i in 1..=p { top += Dd::from(num[i - 1]) * h.powi(i as i32); }
                let mut bottom = Dd::ONE;
                for i in 1..=q { bottom += Dd::from(den[i - 1]) * h.powi(i as i32); }
                top / bottom
            };
            let points: Vec<(usize, Dd)> = ks.iter().map(|&k| (k, f(Dd::ONE / Dd::from(k as f64)))).collect();
            match rational_extrapolate(&points) {
                Ok(v) => prop_assert!(((v - Dd::from(a0)) / Dd::from(a0)).abs().to_f64() < 1e-20),
                Err(Error::Instability { .. }) => {}
                Err(e) => prop_assert!(false, "{e}"),
            }
        }
    }
}
