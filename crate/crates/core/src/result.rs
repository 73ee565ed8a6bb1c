use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Series,
    Quad,
    Contour,
    Mc,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Series => "series",
            Backend::Quad => "quad",
            Backend::Contour => "contour",
            Backend::Mc => "mc",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Series terms or contour octaves summed.
    pub terms: usize,
    pub evaluations: usize,
    pub subdivisions: usize,
    /// Set when the requested backend could not evaluate and another one did.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fallback: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    /// Absolute error estimate.
    pub error: f64,
    pub backend: Backend,
    pub diagnostics: Diagnostics,
}

impl EvalResult {
    pub fn new(value: f64, error: f64, backend: Backend) -> Self {
        EvalResult { value, error, backend, diagnostics: Diagnostics::default() }
    }
}
