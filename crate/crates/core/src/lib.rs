//! Densities of products and ratios of independent pathway-family random
//! variables, computed through their Mellin transforms.
//!
//! Four backends evaluate the same density and are expected to agree:
//! residue series ([`series`]), convolution quadrature ([`quad`]),
//! Mellin-Barnes contour inversion ([`contour`]) and Monte Carlo
//! ([`sampling`]). [`density`] routes between them with fallbacks.

pub mod catalog;
pub mod contour;
mod dd;
pub mod density;
pub mod error;
pub mod expr;
pub mod matrix;
pub mod pathway;
pub mod quad;
pub mod result;
pub mod sampling;
pub mod series;
pub mod special;
pub mod verify;

pub use catalog::{detect_case, eval_case, printed_formula, CaseId};
pub use contour::inverse_mellin_contour;
pub use density::{density, BackendChoice};
pub use error::{Error, Result};
pub use expr::{ConvolutionSpec, GammaExpr, GammaFactor, HFunctionParams, Kind, PoleSet};
pub use pathway::{Family, PathwayModel, Strip};
pub use quad::{mellin_numeric, product_density_quad, ratio_density_quad, QuadConfig};
pub use result::{Backend, Diagnostics, EvalResult};
pub use sampling::{mc_verify, sample_convolution, McReport};
pub use series::{eval_by_residues, Side};
pub use special::{gamma_signed, hyp_series, log_gamma, pochhammer, HypSeriesSpec};
