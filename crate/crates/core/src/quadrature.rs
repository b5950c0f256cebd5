//! Globally adaptive Gauss-Legendre quadrature.
//!
//! Each interval carries a 15-point rule on its two halves; the difference
//! against the rule on the whole interval is the local error estimate. The
//! interval with the largest estimate is bisected until the summed estimate
//! meets the requested relative tolerance.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const ORDER: usize = 15;

fn gauss_legendre() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = ORDER;
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn rule<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        let v = f(mid + half * x);
        if v.is_finite() {
            acc += w * v;
        }
    }
    acc * half
}

#[derive(Debug)]
struct Segment {
    piece: usize,
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl Segment {
    fn new<F: Fn(f64) -> f64>(f: &F, piece: usize, a: f64, b: f64, whole: f64) -> Self {
        let m = 0.5 * (a + b);
        let left = rule(f, a, m);
        let right = rule(f, m, b);
        let error = (left + right - whole).abs();
        Segment { piece, a, b, left, right, error }
    }

    fn value(&self) -> f64 {
        self.left + self.right
    }
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Outcome of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

/// Integrates `f` over the finite interval `[a, b]` to relative tolerance
/// `rel_tol` (with an absolute floor `abs_tol`) using at most
/// `max_subdivisions` bisections.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, subdivisions: 0 });
    }
    adaptive(&[&f], &[(a, b)], rel_tol, abs_tol, max_subdivisions)
}

/// One global refinement loop over several pieces, each with its own
/// integrand, so the tolerance applies to the total.
fn adaptive(
    pieces: &[&dyn Fn(f64) -> f64],
    ranges: &[(f64, f64)],
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<Integral> {
    let mut heap = BinaryHeap::new();
    for (i, (f, &(a, b))) in pieces.iter().zip(ranges).enumerate() {
        if a < b {
            let whole = rule(f, a, b);
            heap.push(Segment::new(f, i, a, b, whole));
        }
    }
    let mut subdivisions = 0;
    loop {
        let (value, error) = heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value(), e + s.error));
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Integral { value, error, subdivisions });
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::Integration { partial: value, error, subdivisions });
        }
        let worst = heap.pop().expect("heap is never empty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a || m >= worst.b {
            // Interval exhausted at machine resolution; accept its estimate.
            heap.push(Segment { error: 0.0, ..worst });
            continue;
        }
        let f = pieces[worst.piece];
        heap.push(Segment::new(&f, worst.piece, worst.a, m, worst.left));
        heap.push(Segment::new(&f, worst.piece, m, worst.b, worst.right));
        subdivisions += 1;
    }
}

/// Integrates over `[a, ∞)` through the map `x = a + s/(1-s)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<Integral> {
    integrate_real_line(f, &[a], rel_tol, abs_tol, max_subdivisions, false)
}

/// Integrates over `(-∞, ∞)` (or `[breakpoints[0], ∞)` when `from_first` is
/// false) with the given sorted interior breakpoints. The outer half-lines
/// are mapped to `[0, 1)` by `t = b ± s/(1-s)`.
pub fn integrate_real_line<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
    include_left_tail: bool,
) -> Result<Integral> {
    assert!(!breakpoints.is_empty());
    let first = breakpoints[0];
    let last = *breakpoints.last().expect("non-empty");
    let guard = |v: f64| if v.is_finite() { v } else { 0.0 };
    let left = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - s;
        guard(f(first - s / d) / (d * d))
    };
    let right = |s: f64| {
        if s >= 1.0 {
            return 0.0;
        }
        let d = 1.0 - s;
        guard(f(last + s / d) / (d * d))
    };
    let middle = |t: f64| f(t);
    let mut pieces: Vec<&dyn Fn(f64) -> f64> = Vec::new();
    let mut ranges = Vec::new();
    if include_left_tail {
        pieces.push(&left);
        ranges.push((0.0, 1.0));
    }
    for w in breakpoints.windows(2) {
        pieces.push(&middle);
        ranges.push((w[0], w[1]));
    }
    pieces.push(&right);
    ranges.push((0.0, 1.0));
    adaptive(&pieces, &ranges, rel_tol, abs_tol, max_subdivisions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_integrate_polynomials_exactly() {
        // A 15-point rule is exact through degree 29.
        let v = rule(&|x: f64| x.powi(28), -1.0, 1.0);
        assert!((v - 2.0 / 29.0).abs() < 1e-15);
        let (_, w) = gauss_legendre();
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn smooth_integrand() {
        let r = integrate(|x: f64| x.exp(), 0.0, 1.0, 1e-13, 0.0, 100).unwrap();
        assert!((r.value - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity() {
        let r = integrate(|x: f64| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 0.0, 2000).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn infinite_range() {
        let r = integrate_to_infinity(|x: f64| (-x).exp(), 0.0, 1e-12, 0.0, 500).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subdivision_budget_exhaustion_reports_partial() {
        let err = integrate(|x: f64| (1.0 / x).sin() / x, 1e-6, 1.0, 1e-14, 0.0, 3).unwrap_err();
        assert!(matches!(err, Error::Integration { subdivisions: 3, .. }));
    }

    #[test]
    fn whole_real_line_with_breakpoints() {
        // Gaussian bump far from the origin plus a slowly decaying left tail.
        let f = |t: f64| (-(t - 30.0).powi(2)).exp() + if t < 0.0 { (0.1 * t).exp() } else { 0.0 };
        let r = integrate_real_line(f, &[0.0, 29.0, 31.0], 1e-12, 0.0, 2000, true).unwrap();
        let expected = std::f64::consts::PI.sqrt() + 10.0;
        assert!((r.value - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn zero_integrand_converges_immediately() {
        let r = integrate(|_| 0.0, 0.0, 5.0, 1e-10, 0.0, 16).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.subdivisions, 0);
    }
}
