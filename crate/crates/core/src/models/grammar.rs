//! Compact text form of catalog models.
//!
//! ```text
//! spec    := name [ ":" params ]
//! params  := param { ("," | ";") param-or-value }
//! param   := key "=" number
//! ```
//!
//! A token containing `=` starts a new key; bare numbers extend the list of the
//! key before them, so `chi2:weights=1,0.5` and
//! `stable-mix:alphas=0.4,0.8;weights=0.3,0.7` both parse. Keys with a default
//! may be omitted.

use super::{LaplaceExponentModel as M, StableComponent};
use crate::error::{Error, Result};

/// Names accepted by [`parse_spec`].
pub const CATALOG_NAMES: &[&str] = &[
    "chi2",
    "inverse-gaussian",
    "alpha-stable",
    "stable-mix",
    "uniform-mix",
    "ou-poisson",
    "ou-gamma",
];

fn spec_error(spec: &str, reason: impl Into<String>) -> Error {
    Error::Spec {
        spec: spec.to_string(),
        reason: reason.into(),
    }
}

struct Params<'a> {
    spec: &'a str,
    entries: Vec<(String, Vec<f64>)>,
}

impl<'a> Params<'a> {
    fn parse(spec: &'a str, text: &str) -> Result<Self> {
        let mut entries: Vec<(String, Vec<f64>)> = Vec::new();
        for token in text.split([',', ';']).map(str::trim) {
            if token.is_empty() {
                return Err(spec_error(spec, "empty parameter"));
            }
            let (key, value) = match token.split_once('=') {
                Some((k, v)) => (Some(k.trim()), v.trim()),
                None => (None, token),
            };
            let number: f64 = value
                .parse()
                .map_err(|_| spec_error(spec, format!("`{value}` is not a number")))?;
            match key {
                Some(k) => {
                    if entries.iter().any(|(e, _)| e == k) {
                        return Err(spec_error(spec, format!("key `{k}` given twice")));
                    }
                    entries.push((k.to_string(), vec![number]));
                }
                None => match entries.last_mut() {
                    Some((_, list)) => list.push(number),
                    None => return Err(spec_error(spec, format!("value `{value}` has no key"))),
                },
            }
        }
        Ok(Params { spec, entries })
    }

    fn take_list(&mut self, key: &str) -> Option<Vec<f64>> {
        let pos = self.entries.iter().position(|(k, _)| k == key)?;
        Some(self.entries.remove(pos).1)
    }

    fn scalar(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        match self.take_list(key) {
            Some(list) if list.len() == 1 => Ok(list[0]),
            Some(_) => Err(spec_error(self.spec, format!("`{key}` takes a single value"))),
            None => default.ok_or_else(|| spec_error(self.spec, format!("missing `{key}`"))),
        }
    }

    fn list(&mut self, key: &str, default: Option<Vec<f64>>) -> Result<Vec<f64>> {
        match self.take_list(key) {
            Some(list) => Ok(list),
            None => default.ok_or_else(|| spec_error(self.spec, format!("missing `{key}`"))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.entries.first() {
            Some((k, _)) => Err(spec_error(self.spec, format!("unknown key `{k}`"))),
            None => Ok(()),
        }
    }
}

/// Parses a model from its text form. Parameters are not range-checked here;
/// pass the result through [`validate`](super::validate).
pub fn parse_spec(spec: &str) -> Result<M> {
    let trimmed = spec.trim();
    let (name, rest) = match trimmed.split_once(':') {
        Some((n, r)) => (n.trim(), Some(r)),
        None => (trimmed, None),
    };
    let mut p = match rest {
        Some(r) => Params::parse(spec, r)?,
        None => Params { spec, entries: Vec::new() },
    };
    let model = match name {
        "chi2" => M::ChiSquaredSum {
            weights: p.list("weights", Some(vec![1.0]))?,
        },
        "inverse-gaussian" | "ig" => M::InverseGaussian,
        "alpha-stable" => M::AlphaStable {
            alpha: p.scalar("alpha", None)?,
            scale: p.scalar("c", Some(1.0))?,
        },
        "stable-mix" => {
            let alphas = p.list("alphas", None)?;
            let weights = p.list("weights", None)?;
            if alphas.len() != weights.len() {
                return Err(spec_error(spec, "`alphas` and `weights` differ in length"));
            }
            M::StableMixtureDiscrete {
                components: alphas
                    .into_iter()
                    .zip(weights)
                    .map(|(alpha, weight)| StableComponent { alpha, weight })
                    .collect(),
            }
        }
        "uniform-mix" => M::UniformStableMix,
        "ou-poisson" => M::OuPoisson {
            eta: p.scalar("eta", Some(1.0))?,
        },
        "ou-gamma" => M::OuGamma {
            eta: p.scalar("eta", Some(1.0))?,
            kappa: p.scalar("kappa", Some(1.0))?,
            theta: p.scalar("theta", Some(1.0))?,
        },
        other => {
            return Err(spec_error(
                spec,
                format!("unknown distribution `{other}`; valid names: {}", CATALOG_NAMES.join(", ")),
            ))
        }
    };
    p.finish()?;
    Ok(model)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}

fn render(name: &str, params: &[(&str, Vec<f64>)]) -> String {
    if params.is_empty() {
        return name.to_string();
    }
    let sep = if params.iter().any(|(_, v)| v.len() > 1) { ";" } else { "," };
    let body: Vec<String> = params.iter().map(|(k, v)| format!("{k}={}", join(v))).collect();
    format!("{name}:{}", body.join(sep))
}

/// Prints a catalog model in the form [`parse_spec`] reads back.
/// Combinators and custom densities have no text form.
pub fn format_spec(model: &M) -> Result<String> {
    Ok(match model {
        M::ChiSquaredSum { weights } => render("chi2", &[("weights", weights.clone())]),
        M::InverseGaussian => render("inverse-gaussian", &[]),
        M::AlphaStable { alpha, scale } => {
            render("alpha-stable", &[("alpha", vec![*alpha]), ("c", vec![*scale])])
        }
        M::StableMixtureDiscrete { components } => render(
            "stable-mix",
            &[
                ("alphas", components.iter().map(|c| c.alpha).collect()),
                ("weights", components.iter().map(|c| c.weight).collect()),
            ],
        ),
        M::UniformStableMix => render("uniform-mix", &[]),
        M::OuPoisson { eta } => render("ou-poisson", &[("eta", vec![*eta])]),
        M::OuGamma { eta, kappa, theta } => render(
            "ou-gamma",
            &[("eta", vec![*eta]), ("kappa", vec![*kappa]), ("theta", vec![*theta])],
        ),
        M::Scaled { .. } | M::Sum(_) | M::CustomLevyDensity(_) => {
            return Err(spec_error("<model>", "combinators and custom densities have no text form"))
        }
    })
}
