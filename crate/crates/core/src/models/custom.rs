//! Quadrature fallback for models given by a Lévy density.
//!
//! All integrals run in `t = ln u`, which turns the Gamma-shaped kernels
//! `(λu)^n e^{-λu}` into bumps of width `~1/√n` around `ln(n/λ)`.

use super::{ln_gamma_int, CustomDensity, QuadratureConfig};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_real_line};

fn breakpoints(mut points: Vec<f64>) -> Vec<f64> {
    points.retain(|p| p.is_finite());
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
}

pub(super) fn phi_quadrature(d: &CustomDensity, lambda: f64) -> Result<f64> {
    let density = &d.density;
    let cfg = &d.config;
    let f = |t: f64| {
        let u = t.exp();
        -(-lambda * u).exp_m1() * u * density(u)
    };
    let points = breakpoints(vec![cfg.tail_split.ln(), -lambda.ln()]);
    Ok(integrate_real_line(f, &points, cfg.relative_tolerance, 0.0, cfg.max_subdivisions, true)?.value)
}

fn normalized_order(
    density: &dyn Fn(f64) -> f64,
    cfg: &QuadratureConfig,
    lambda: f64,
    n: usize,
) -> Result<f64> {
    let nf = n as f64;
    let ln_lambda = lambda.ln();
    let ln_gamma: f64 = ln_gamma_int(n);
    let f = |t: f64| {
        let u = t.exp();
        (nf * (ln_lambda + t) - lambda * u - ln_gamma).exp() * u * density(u)
    };
    let peak = (nf / lambda).ln();
    let width = 3.0 / nf.sqrt();
    let points = breakpoints(vec![cfg.tail_split.ln(), peak - width, peak, peak + width]);
    let value = integrate_real_line(f, &points, cfg.relative_tolerance, 0.0, cfg.max_subdivisions, true)?.value;
    Ok(if n % 2 == 1 { value } else { -value })
}

pub(super) fn normalized_quadrature(d: &CustomDensity, lambda: f64, n_max: usize) -> Result<Vec<f64>> {
    (1..=n_max)
        .map(|n| normalized_order(&*d.density, &d.config, lambda, n))
        .collect()
}

/// `φ^(n)(λ) = (-1)^{n+1} ∫_0^∞ u^n e^{-λu} Π′(u) du` for `n = 1..=n_max`,
/// each order integrated to `cfg.relative_tolerance`.
pub fn phi_derivatives_quadrature(
    density: &dyn Fn(f64) -> f64,
    cfg: &QuadratureConfig,
    lambda: f64,
    n_max: usize,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("λ must be positive and finite, got {lambda}")));
    }
    (1..=n_max)
        .map(|n| {
            let b = normalized_order(density, cfg, lambda, n)?;
            let ln_gamma: f64 = ln_gamma_int(n);
            Ok(b * (ln_gamma - n as f64 * lambda.ln()).exp())
        })
        .collect()
}

/// Spot check of `∫ (1 ∧ u) Π′(u) du < ∞`: the density must be non-negative
/// on a sample grid, and both `∫_0^s u Π′` and `∫_s^∞ Π′` (in `t = ln u`)
/// must converge with a negligible contribution from far out in `t`.
pub(super) fn check_integrability(d: &CustomDensity) -> Result<()> {
    let density = &d.density;
    for i in -12..=12 {
        let u = 10f64.powf(i as f64 * 0.5);
        let v = density(u);
        if v < 0.0 || v.is_nan() {
            return Err(Error::parameter(
                "density",
                format!("`{}` must be non-negative, got {v} at u = {u}", d.label),
            ));
        }
    }
    let t0 = d.config.tail_split.ln();
    let budget = d.config.max_subdivisions.max(200);
    // Quadrature drops non-finite samples, which would hide divergence.
    let blew_up = std::cell::Cell::new(false);
    let watch = |v: f64| {
        if !v.is_finite() {
            blew_up.set(true);
        }
        v
    };
    let small = |t: f64| {
        let u = t.exp();
        watch(u * u * density(u))
    };
    let large = |t: f64| {
        let u = t.exp();
        watch(u * density(u))
    };
    let parts: [(&str, &dyn Fn(f64) -> f64, (f64, f64), (f64, f64)); 2] = [
        ("small jumps", &small, (t0 - 250.0, t0), (t0 - 300.0, t0 - 250.0)),
        ("tail", &large, (t0, t0 + 250.0), (t0 + 250.0, t0 + 300.0)),
    ];
    for (part, f, (a, b), (ea, eb)) in parts {
        let bulk = integrate(f, a, b, 1e-6, 1e-300, budget);
        let edge = integrate(f, ea, eb, 1e-6, 1e-300, budget);
        let ok = match (bulk, edge) {
            (Ok(bulk), Ok(edge)) => {
                bulk.value.is_finite() && edge.value.is_finite() && edge.value <= 0.05 * bulk.value.max(1e-300)
            }
            _ => false,
        } && !blew_up.get();
        if !ok {
            return Err(Error::parameter(
                "density",
                format!("`{}` does not look integrable against 1 ∧ u ({part})", d.label),
            ));
        }
    }
    Ok(())
}
