//! Density evaluation with backend selection and fallback.

use crate::catalog::{detect_case, eval_case};
use crate::contour::inverse_mellin_contour;
use crate::error::{Error, Result};
use crate::expr::ConvolutionSpec;
use crate::quad::{convolution_density_quad, QuadConfig};
use crate::result::EvalResult;
use crate::sampling::mc_density;
use crate::series::{eval_by_residues, Side};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// A series value is only accepted when its error estimate is below this
/// relative level; otherwise the next backend is tried.
const SERIES_REL_ACCEPT: f64 = 1e-8;
const SERIES_ABS_ACCEPT: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendChoice {
    /// Catalog closed form, then generic residues, then quadrature.
    Series,
    Quad,
    Contour,
    Mc,
    /// Same route as `Series`.
    Auto,
}

impl FromStr for BackendChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "series" => BackendChoice::Series,
            "quad" => BackendChoice::Quad,
            "contour" => BackendChoice::Contour,
            "mc" => BackendChoice::Mc,
            "auto" => BackendChoice::Auto,
            _ => return Err(Error::Domain(format!("unknown backend {s:?}"))),
        })
    }
}

impl fmt::Display for BackendChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendChoice::Series => "series",
            BackendChoice::Quad => "quad",
            BackendChoice::Contour => "contour",
            BackendChoice::Mc => "mc",
            BackendChoice::Auto => "auto",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub quad: QuadConfig,
    /// Series truncation tolerance.
    pub series_tol: f64,
    pub max_terms: usize,
    pub seed: u64,
    pub mc_samples: usize,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig { quad: QuadConfig::default(), series_tol: 1e-13, max_terms: 10_000, seed: 0, mc_samples: 1_000_000 }
    }
}

fn check_support(spec: &ConvolutionSpec, u: f64) -> Result<()> {
    let upper = spec.support_upper();
    if u > 0.0 && u < upper && u.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("u = {u} outside the support (0, {upper})")))
    }
}

fn accept_series(r: &EvalResult) -> bool {
    r.value.is_finite() && r.error <= SERIES_REL_ACCEPT * r.value.abs() + SERIES_ABS_ACCEPT
}

/// Series route: catalog case if the spec fits one, generic residues, then
/// quadrature. Rejections are collected into `diagnostics.fallback`.
fn series_route(spec: &ConvolutionSpec, u: f64, cfg: &DensityConfig) -> Result<EvalResult> {
    let mut notes = Vec::new();
    let attempt = |label: &str, r: Result<EvalResult>, notes: &mut Vec<String>| -> Result<Option<EvalResult>> {
        match r {
            Ok(r) if accept_series(&r) => Ok(Some(r)),
            Ok(r) => {
                notes.push(format!("{label}: error estimate {:.2e} too large", r.error));
                Ok(None)
            }
            Err(e) if e.is_recoverable() => {
                notes.push(format!("{label}: {e}"));
                Ok(None)
            }
            Err(e) => Err(e),
        }
    };
    if let Some(case) = detect_case(spec) {
        if let Some(r) = attempt(&format!("catalog {case}"), eval_case(case, spec, u), &mut notes)? {
            return Ok(r);
        }
    }
    let expr = spec.transform()?;
    let r = eval_by_residues(&expr, u, Side::Auto, cfg.series_tol, cfg.max_terms);
    if let Some(mut r) = attempt("residues", r, &mut notes)? {
        if !notes.is_empty() {
            r.diagnostics.fallback = Some(notes.join("; "));
        }
        return Ok(r);
    }
    let mut r = convolution_density_quad(spec, u, &cfg.quad)?;
    r.diagnostics.fallback = Some(notes.join("; "));
    Ok(r)
}

/// Density of the product or ratio at u with the chosen backend.
///
/// Points outside the open support are a domain error.
pub fn density(spec: &ConvolutionSpec, u: f64, choice: BackendChoice, cfg: &DensityConfig) -> Result<EvalResult> {
    check_support(spec, u)?;
    match choice {
        BackendChoice::Series | BackendChoice::Auto => series_route(spec, u, cfg),
        BackendChoice::Quad => match convolution_density_quad(spec, u, &cfg.quad) {
            Err(e) if e.is_recoverable() => {
                let mut r = inverse_mellin_contour(&spec.transform()?, u, None, None, &cfg.quad)?;
                r.diagnostics.fallback = Some(format!("quad: {e}"));
                Ok(r)
            }
            r => r,
        },
        BackendChoice::Contour => {
            let expr = spec.transform()?;
            match inverse_mellin_contour(&expr, u, None, None, &cfg.quad) {
                Err(e) if e.is_recoverable() || matches!(e, Error::Unsupported(_)) => {
                    let mut r = convolution_density_quad(spec, u, &cfg.quad)?;
                    r.diagnostics.fallback = Some(format!("contour: {e}"));
                    Ok(r)
                }
                r => r,
            }
        }
        BackendChoice::Mc => mc_density(spec, u, cfg.seed, cfg.mc_samples),
    }
}
