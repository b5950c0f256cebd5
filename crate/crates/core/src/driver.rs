//! Pointwise inversion: Post-Widder approximants at a schedule of indices,
//! extrapolated incrementally until the companion estimate meets the
//! tolerance.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::double_double::DoubleDouble;
use crate::error::{Error, Result};
use crate::extrapolation::{extrapolate, AlphaRule, ExtrapolationMethod, ExtrapolationOutcome};
use crate::models::ValidatedModel;
use crate::post_widder::{approximant_for_model, PwTarget};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    Double,
    Extended,
}

impl Precision {
    pub fn default_max_points(self) -> usize {
        match self {
            Precision::Double => 8,
            Precision::Extended => 20,
        }
    }

    /// Largest index accepted in a schedule.
    pub fn max_index(self) -> usize {
        match self {
            Precision::Double => DOUBLE_INDEX_CAP,
            Precision::Extended => EXTENDED_INDEX_CAP,
        }
    }
}

pub const DOUBLE_INDEX_CAP: usize = 200;
pub const EXTENDED_INDEX_CAP: usize = 250;

/// Which extrapolant is reported as the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Estimate {
    /// `P_{N+1}(0)`, extrapolated from every point computed.
    #[default]
    Latest,
    /// `(P_N(0) + P̃_N(0)) / 2`.
    Refined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodUsed {
    Polynomial,
    Rational,
    RationalFallbackPolynomial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InversionConfig {
    /// Strictly increasing indices; only the first `max_points` are used
    /// before any extension.
    pub k_schedule: Vec<usize>,
    pub max_points: usize,
    pub tolerance: f64,
    pub method: ExtrapolationMethod,
    pub target: PwTarget,
    pub precision: Precision,
    pub tiny_threshold: f64,
    pub alpha_rule: AlphaRule,
    pub estimate: Estimate,
    /// Extended precision only: keep appending `last + extension_step` up to
    /// `extension_cap` if the schedule runs out unconverged.
    pub extension_step: usize,
    pub extension_cap: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self::new(Precision::Double)
    }
}

pub fn default_schedule(n: usize) -> Vec<usize> {
    (1..=n).map(|j| 10 * j).collect()
}

impl InversionConfig {
    pub fn new(precision: Precision) -> Self {
        let n = precision.default_max_points();
        InversionConfig {
            k_schedule: default_schedule(n),
            max_points: n,
            tolerance: 1e-6,
            method: ExtrapolationMethod::Polynomial,
            target: PwTarget::Pdf,
            precision,
            tiny_threshold: 1e-300,
            alpha_rule: AlphaRule::Derivation,
            estimate: Estimate::Latest,
            extension_step: 10,
            extension_cap: EXTENDED_INDEX_CAP,
        }
    }

    pub fn with_target(mut self, target: PwTarget) -> Self {
        self.target = target;
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_method(mut self, method: ExtrapolationMethod) -> Self {
        self.method = method;
        self
    }

    /// Uses `k_j = 10j` for `j = 1..=n`.
    pub fn with_max_points(mut self, n: usize) -> Self {
        self.k_schedule = default_schedule(n);
        self.max_points = n;
        self
    }

    pub fn with_schedule(mut self, schedule: Vec<usize>) -> Self {
        self.max_points = schedule.len();
        self.k_schedule = schedule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::parameter("tolerance", format!("must be positive, got {}", self.tolerance)));
        }
        if self.max_points < 2 {
            return Err(Error::parameter("max_points", format!("must be at least 2, got {}", self.max_points)));
        }
        if self.k_schedule.len() < self.max_points {
            return Err(Error::parameter(
                "k_schedule",
                format!("has {} entries but max_points is {}", self.k_schedule.len(), self.max_points),
            ));
        }
        if self.k_schedule[0] == 0 || self.k_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::parameter("k_schedule", "must be strictly increasing positive integers"));
        }
        let cap = self.precision.max_index();
        let last = self.k_schedule[self.max_points - 1];
        if last > cap {
            return Err(Error::parameter(
                "k_schedule",
                format!("index {last} exceeds {cap} in {:?} precision", self.precision),
            ));
        }
        if !(self.tiny_threshold >= 0.0) {
            return Err(Error::parameter("tiny_threshold", "must be non-negative"));
        }
        if self.extension_step == 0 {
            return Err(Error::parameter("extension_step", "must be positive"));
        }
        Ok(())
    }

    fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let base = &self.k_schedule[..self.max_points];
        let last = base[base.len() - 1];
        let extra = match self.precision {
            Precision::Extended if self.extension_cap > last => {
                Some((1..).map(move |i| last + i * self.extension_step).take_while(move |&k| k <= self.extension_cap))
            }
            _ => None,
        };
        base.iter().copied().chain(extra.into_iter().flatten())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InversionResult {
    pub x: f64,
    pub value: f64,
    pub abs_error_estimate: f64,
    pub rel_error_estimate: f64,
    pub points_used: usize,
    /// Largest Post-Widder index evaluated.
    pub k_max: usize,
    pub converged: bool,
    pub clamped: bool,
    pub method_used: MethodUsed,
}

struct Run<T> {
    outcome: ExtrapolationOutcome<T>,
    converged: bool,
    fell_back: bool,
    k_max: usize,
}

fn iterate<T: Real>(model: &ValidatedModel, x: f64, cfg: &InversionConfig) -> Result<Run<T>> {
    let xt = T::from_f64(x);
    let tol = T::from_f64(cfg.tolerance);
    let tiny = T::from_f64(cfg.tiny_threshold);
    let mut method = cfg.method;
    let mut fell_back = false;
    let mut points: Vec<(usize, T)> = Vec::new();
    let mut best: Option<Run<T>> = None;
    for k in cfg.indices() {
        let p = approximant_for_model(model, cfg.target, k, xt)?;
        if !p.is_finite() {
            break;
        }
        points.push((k, p));
        if points.len() < 2 {
            continue;
        }
        let outcome = match extrapolate(&points, method, cfg.alpha_rule, tiny) {
            Err(Error::Instability { .. }) if method == ExtrapolationMethod::Rational => {
                method = ExtrapolationMethod::Polynomial;
                fell_back = true;
                extrapolate(&points, method, cfg.alpha_rule, tiny)?
            }
            other => other?,
        };
        let converged = if outcome.latest.abs() > tiny {
            outcome.rel_error_estimate <= tol
        } else {
            outcome.abs_error_estimate <= tol
        };
        let done = converged || points.len() >= cfg.max_points && cfg.precision == Precision::Double;
        best = Some(Run {
            outcome,
            converged,
            fell_back,
            k_max: k,
        });
        if done {
            break;
        }
    }
    best.ok_or_else(|| Error::Capacity(format!("no finite approximants at x = {x} in {:?} precision", cfg.precision)))
}

fn finish<T: Real>(x: f64, run: Run<T>, cfg: &InversionConfig) -> InversionResult {
    let o = run.outcome;
    let raw = match cfg.estimate {
        Estimate::Latest => o.latest,
        Estimate::Refined => o.value,
    }
    .to_f64();
    let abs = o.abs_error_estimate.to_f64();
    let mut converged = run.converged;
    let (lo, hi) = match cfg.target {
        PwTarget::Pdf => (Some(0.0), None),
        PwTarget::Cdf => (Some(0.0), Some(1.0)),
        PwTarget::PdfDerivative(_) => (None, None),
    };
    let mut value = raw;
    if let Some(lo) = lo.filter(|&lo| raw < lo) {
        value = lo;
    }
    if let Some(hi) = hi.filter(|&hi| raw > hi) {
        value = hi;
    }
    let clamped = value != raw;
    // An overshoot beyond the estimate means the estimate was wrong.
    if clamped && (raw - value).abs() > abs {
        converged = false;
    }
    InversionResult {
        x,
        value,
        abs_error_estimate: abs,
        rel_error_estimate: o.rel_error_estimate.to_f64(),
        points_used: o.points_used,
        k_max: run.k_max,
        converged,
        clamped,
        method_used: match (cfg.method, run.fell_back) {
            (ExtrapolationMethod::Polynomial, _) => MethodUsed::Polynomial,
            (ExtrapolationMethod::Rational, false) => MethodUsed::Rational,
            (ExtrapolationMethod::Rational, true) => MethodUsed::RationalFallbackPolynomial,
        },
    }
}

/// Inverts at a single point. Running out of points without meeting the
/// tolerance is reported through `converged`, not as an error.
pub fn evaluate(model: &ValidatedModel, x: f64, cfg: &InversionConfig) -> Result<InversionResult> {
    cfg.validate()?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("x must be positive and finite, got {x}")));
    }
    Ok(match cfg.precision {
        Precision::Double => finish(x, iterate::<f64>(model, x, cfg)?, cfg),
        Precision::Extended => finish(x, iterate::<DoubleDouble>(model, x, cfg)?, cfg),
    })
}

/// `evaluate` at every point, concurrently; results are index-aligned.
pub fn evaluate_grid(model: &ValidatedModel, xs: &[f64], cfg: &InversionConfig) -> Vec<Result<InversionResult>> {
    xs.par_iter().map(|&x| evaluate(model, x, cfg)).collect()
}
