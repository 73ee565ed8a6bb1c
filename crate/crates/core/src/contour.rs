//! Numerical inversion of a Mellin transform along a Mellin–Barnes contour.

use crate::error::{Error, Result};
use crate::expr::GammaExpr;
use crate::quad::{qag, QuadConfig};
use crate::result::{Backend, EvalResult};
use num_complex::Complex64;
use std::f64::consts::{E, PI};

const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;
const GAMMA_R: f64 = 10.900511;
const GAMMA_DK: [f64; 11] = [
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];

const FIRST_OCTAVE: f64 = 20.0;
const MAX_DOUBLINGS: usize = 15;
/// Bend of the contour rays away from the vertical when slopes are balanced.
const BEND: f64 = PI / 3.0;
const BOUNDARY_BAND: f64 = 1e-3;

fn ln_gamma_right(z: Complex64) -> Complex64 {
    let mut s = Complex64::new(GAMMA_DK[0], 0.0);
    for (i, d) in GAMMA_DK.iter().enumerate().skip(1) {
        s += d / (z + (i as f64 - 1.0));
    }
    let w = z - 0.5;
    s.ln() + LN_2_SQRT_E_OVER_PI + w * ((w + GAMMA_R) / E).ln()
}

/// ln sin(πz) up to a multiple of 2πi, without overflow for large |Im z|.
fn ln_sin_pi(z: Complex64) -> Complex64 {
    let i = Complex64::i();
    if z.im >= 5.0 {
        -i * PI * z + (1.0 - (2.0 * i * PI * z).exp()).ln() + (i / 2.0).ln()
    } else if z.im <= -5.0 {
        i * PI * z + (1.0 - (-2.0 * i * PI * z).exp()).ln() + (-i / 2.0).ln()
    } else {
        (PI * z).sin().ln()
    }
}

/// ln Γ(z) on some branch; only exp of the result is meaningful.
pub(crate) fn ln_gamma_complex(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        ln_gamma_right(z)
    } else {
        LN_PI - ln_sin_pi(z) - ln_gamma_right(1.0 - z)
    }
}

fn ln_expr(expr: &GammaExpr, s: Complex64, ln_u: f64) -> Complex64 {
    let mut l = expr.ln_constant - s * (expr.scale.ln() + ln_u);
    for f in &expr.num {
        l += ln_gamma_complex(f.offset + f.slope * s);
    }
    for f in &expr.den {
        l -= ln_gamma_complex(f.offset + f.slope * s);
    }
    l
}

/// Ray angle from the real axis for the upper half of the contour.
fn ray_angle(expr: &GammaExpr, u: f64) -> Result<f64> {
    let kappa = expr.kappa();
    if kappa > 1e-12 {
        return Ok(PI / 2.0);
    }
    if kappa < -1e-12 {
        return Err(Error::Unsupported(format!("integrand grows along the contour (slope excess {kappa})")));
    }
    let mu = expr.mu();
    let x = expr.effective_argument(u);
    let left = if mu > 1e-12 {
        true
    } else if mu < -1e-12 {
        false
    } else {
        if x.ln().abs() < BOUNDARY_BAND {
            return Err(Error::SlowDecay(format!("balanced expression at effective argument {x}")));
        }
        x < 1.0
    };
    Ok(if left { PI / 2.0 + BEND } else { PI / 2.0 - BEND })
}

/// g(u) = (1/2πi)∫ expr(s)·u^(−s) ds along c + r·e^{±iψ}, r ≥ 0.
///
/// `c` defaults to the strip abscissa and `truncation` to the first octave
/// length; the integration range doubles until the last octave is negligible.
pub fn inverse_mellin_contour(
    expr: &GammaExpr,
    u: f64,
    c: Option<f64>,
    truncation: Option<f64>,
    cfg: &QuadConfig,
) -> Result<EvalResult> {
    cfg.validate()?;
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("u must be positive, got {u}")));
    }
    let c = c.unwrap_or_else(|| expr.strip.abscissa());
    if !expr.strip.contains(c) {
        return Err(Error::OutOfStrip { s: c, lower: expr.strip.lower, upper: expr.strip.upper });
    }
    let psi = ray_angle(expr, u)?;
    let dir = Complex64::from_polar(1.0, psi);
    let ln_u = u.ln();
    let shift = ln_expr(expr, Complex64::new(c, 0.0), ln_u).re;
    let point = |r: f64| ln_expr(expr, c + r * dir, ln_u) - shift;
    let f = |r: f64| ((point(r)).exp() * dir).im;
    let modulus = |r: f64| point(r).re.exp();

    let scale = shift.exp();
    let abs = cfg.abs_tol / scale;
    let mut lo = 0.0;
    let mut hi = truncation.unwrap_or(FIRST_OCTAVE);
    let mut total: f64 = 0.0;
    let mut err = 0.0;
    let mut evals = 0;
    let mut subs = 0;
    for octave in 0..=MAX_DOUBLINGS {
        let tol = abs.max(cfg.rel_tol * total.abs());
        let part = qag(f, &[lo, 0.5 * (lo + hi), hi], 0.25 * tol, 0.25 * cfg.rel_tol, cfg.max_subdivisions)?;
        let mass = qag(modulus, &[lo, hi], f64::MAX, 1e-2, 8).map(|o| o.value).unwrap_or(f64::INFINITY);
        total += part.value;
        err += part.error;
        evals += part.evaluations;
        subs += part.subdivisions;
        if octave > 0 && mass < tol {
            let mut r = EvalResult::new(total * scale / PI, (err + mass) * scale / PI, Backend::Contour);
            r.diagnostics.terms = octave + 1;
            r.diagnostics.evaluations = evals;
            r.diagnostics.subdivisions = subs;
            return Ok(r);
        }
        lo = hi;
        hi *= 2.0;
    }
    Err(Error::SlowDecay(format!("contour tail still significant at |s − c| = {lo}")))
}
