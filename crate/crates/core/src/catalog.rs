//! Closed-form hypergeometric series for the fourteen explicit product and
//! ratio pairings.
//!
//! Parameter names follow the problem statements, where the x-power of a
//! model is written x^α, so every problem α is the model `alpha − 1`.

use crate::error::{Error, Result};
use crate::expr::{ConvolutionSpec, Kind};
use crate::pathway::{Family, PathwayModel};
use crate::result::{Backend, EvalResult};
use crate::series::{eval_near_branch, BOUNDARY_BAND};
use crate::special::{
    gamma_signed, hyp_series_dd, hyp_series_log, ln_add, ln_gamma_pos, HypSeriesSpec, LogSum, SignedLog, DEFAULT_MAX_TERMS,
};
use serde::{Deserialize, Serialize};
use crate::dd::{self, D};
use std::fmt;
use std::str::FromStr;

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseId {
    P2_1,
    P2_2,
    P2_3,
    P2_4,
    P2_5,
    P2_6,
    P2_7,
    P3_1,
    P3_2,
    P3_3,
    P3_4,
    P3_5,
    P3_6,
    P3_7,
}

/// Where the series of a case converge.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branches {
    /// One series in the effective argument, valid everywhere.
    Entire,
    /// One series in the effective argument, which falls as u grows.
    EntireInverse,
    /// Separate series below and above effective argument 1.
    Split,
}

use CaseId::*;

impl CaseId {
    pub const ALL: [CaseId; 14] = [P2_1, P2_2, P2_3, P2_4, P2_5, P2_6, P2_7, P3_1, P3_2, P3_3, P3_4, P3_5, P3_6, P3_7];

    pub fn kind(self) -> Kind {
        if self <= P2_7 {
            Kind::Product
        } else {
            Kind::Ratio
        }
    }

    pub fn branches(self) -> Branches {
        match self {
            P2_1 | P2_4 | P2_6 | P3_3 | P3_5 | P3_7 => Branches::Entire,
            P3_2 | P3_4 => Branches::EntireInverse,
            P2_2 | P2_3 | P2_5 | P2_7 | P3_1 | P3_6 => Branches::Split,
        }
    }

    /// Short description of the family pattern (f1 first).
    pub fn pattern(self) -> &'static str {
        match self {
            P2_1 => "product: standard type-2 beta × gamma",
            P2_2 => "product: standard type-2 beta × standard type-2 beta",
            P2_3 => "product: standard type-1 beta × standard type-1 beta",
            P2_4 => "product: standard type-1 beta × gamma",
            P2_5 => "product: standard type-1 beta × standard type-2 beta",
            P2_6 => "product: gamma × gamma",
            P2_7 => "product: type-2 beta × type-2 beta, common delta",
            P3_1 => "ratio: gamma over gamma",
            P3_2 => "ratio: standard type-2 beta over gamma",
            P3_3 => "ratio: gamma over standard type-2 beta",
            P3_4 => "ratio: standard type-1 beta over gamma",
            P3_5 => "ratio: gamma over standard type-1 beta",
            P3_6 => "ratio: standard type-1 beta over standard type-1 beta",
            P3_7 => "ratio: generalized gamma over type-2 beta, common delta",
        }
    }

    /// Family of (f1, f2) in the normalized order.
    pub fn families(self) -> (Family, Family) {
        use Family::*;
        match self {
            P2_1 => (Type2Beta, GenGamma),
            P2_2 | P2_7 => (Type2Beta, Type2Beta),
            P2_3 => (Type1Beta, Type1Beta),
            P2_4 => (Type1Beta, GenGamma),
            P2_5 => (Type1Beta, Type2Beta),
            P2_6 | P3_1 => (GenGamma, GenGamma),
            P3_2 => (GenGamma, Type2Beta),
            P3_3 | P3_7 => (Type2Beta, GenGamma),
            P3_4 => (GenGamma, Type1Beta),
            P3_5 => (Type1Beta, GenGamma),
            P3_6 => (Type1Beta, Type1Beta),
        }
    }

    /// Do the normalized (f1, f2) models fit the pattern?
    fn accepts(self, f1: &PathwayModel, f2: &PathwayModel) -> bool {
        let (a, b) = self.families();
        if f1.family != a || f2.family != b {
            return false;
        }
        let unit_delta = |m: &PathwayModel| m.delta == 1.0;
        let std = |m: &PathwayModel| m.is_standard();
        let beta_std = |m: &PathwayModel| m.family == Family::GenGamma || std(m);
        match self {
            P2_7 | P3_7 => f1.delta == f2.delta,
            P2_6 | P3_1 => unit_delta(f1) && unit_delta(f2),
            _ => beta_std(f1) && beta_std(f2) && unit_delta(f1) && unit_delta(f2),
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .iter()
            .copied()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::PatternMismatch(format!("unknown case id {s:?}")))
    }
}

/// The spec with f1/f2 reordered to the case's convention, if it fits.
pub fn match_case(case: CaseId, spec: &ConvolutionSpec) -> Result<ConvolutionSpec> {
    if spec.kind != case.kind() {
        return Err(Error::PatternMismatch(format!("{case} needs a {:?} spec", case.kind())));
    }
    if case.accepts(&spec.f1, &spec.f2) {
        return Ok(*spec);
    }
    if spec.kind == Kind::Product && case.accepts(&spec.f2, &spec.f1) {
        return Ok(ConvolutionSpec { kind: spec.kind, f1: spec.f2, f2: spec.f1 });
    }
    Err(Error::PatternMismatch(format!("{} does not fit {case} ({})", describe(spec), case.pattern())))
}

fn describe(spec: &ConvolutionSpec) -> String {
    format!("{:?} of {} and {}", spec.kind, spec.f1, spec.f2)
}

/// The catalog case a spec falls under, preferring the specific cases over
/// the common-delta ones.
pub fn detect_case(spec: &ConvolutionSpec) -> Option<CaseId> {
    CaseId::ALL.iter().copied().find(|&c| match_case(c, spec).is_ok())
}

/// The argument that decides which series branch applies.
pub fn effective_argument(case: CaseId, spec: &ConvolutionSpec, u: f64) -> Result<f64> {
    let s = match_case(case, spec)?;
    let (f1, f2) = (s.f1, s.f2);
    Ok(match case {
        P2_1 | P2_4 | P3_3 | P3_5 => f2.a * u,
        P2_2 | P2_3 | P2_5 | P3_6 => u,
        P2_6 => f1.a * f2.a * u,
        P2_7 => f1.a * f2.a * u.powf(f1.delta),
        P3_1 => f2.a * u / f1.a,
        P3_2 | P3_4 => f1.a / u,
        P3_7 => f2.a * u.powf(f1.delta) / f1.a,
    })
}

/// Inverse of [`effective_argument`].
pub fn u_from_effective(case: CaseId, spec: &ConvolutionSpec, x: f64) -> Result<f64> {
    let s = match_case(case, spec)?;
    let (f1, f2) = (s.f1, s.f2);
    Ok(match case {
        P2_1 | P2_4 | P3_3 | P3_5 => x / f2.a,
        P2_2 | P2_3 | P2_5 | P3_6 => x,
        P2_6 => x / (f1.a * f2.a),
        P2_7 => (x / (f1.a * f2.a)).powf(1.0 / f1.delta),
        P3_1 => x * f1.a / f2.a,
        P3_2 | P3_4 => f1.a / x,
        P3_7 => (x * f1.a / f2.a).powf(1.0 / f1.delta),
    })
}

/// Series are summed to the last representable digit; the two-series forms
/// cancel, so truncation error is amplified by the cancellation ratio.
const CASE_TOL: f64 = 1e-17;
/// Relative error above which a Γ²Γ² case switches to its 1 − y form.
const CONTINUE_ABOVE: f64 = 1e-10;
/// Largest |1 − y| at which that form is used.
const CONTINUE_WITHIN: f64 = 0.5;

fn simple_pole(case: CaseId, what: &str, d: f64) -> Result<()> {
    if (d - d.round()).abs() < 1e-9 {
        Err(Error::SimplePoleViolation(format!("{case}: {what} = {d} is an integer")))
    } else {
        Ok(())
    }
}

/// Running sum of gamma-weighted hypergeometric terms.
///
/// Summed in double-double while every piece fits, since the two-series
/// forms can cancel to many digits; the log-scale sum covers the rest.
struct Terms {
    sum: LogSum,
    ln_err: f64,
    /// ln Σ|term|·(relative condition number in its rounded inputs).
    ln_cond: f64,
    /// Double-double sum and its truncation error, dropped on overflow.
    dd: Option<(D, f64)>,
}

impl Terms {
    fn new() -> Self {
        Terms { sum: LogSum::new(), ln_err: f64::NEG_INFINITY, ln_cond: f64::NEG_INFINITY, dd: Some((D::ZERO, 0.0)) }
    }

    /// Π Γ(num)/Π Γ(den)·exp(ln_rest)·pFq(a; b; z).
    fn add(&mut self, num: &[f64], den: &[f64], ln_rest: f64, a: &[f64], b: &[f64], z: f64) -> Result<()> {
        if !z.is_finite() {
            return Err(Error::NoConvergence { what: format!("series argument {z}"), value: f64::NAN, error: f64::INFINITY });
        }
        let mut coef = SignedLog::from_ln(ln_rest);
        for &x in num {
            let (s, l) = gamma_signed(x)?;
            coef = coef.mul(SignedLog { sign: s, ln_abs: l });
        }
        for &x in den {
            match gamma_signed(x) {
                Ok((s, l)) => coef = coef.div(SignedLog { sign: s, ln_abs: l }),
                // 1/Γ at a pole: the whole term vanishes
                Err(Error::Pole(_)) => return Ok(()),
                Err(e) => return Err(e),
            }
        }
        let spec = HypSeriesSpec::new(a, b, z);
        let h = hyp_series_log(&spec, CASE_TOL, DEFAULT_MAX_TERMS)?;
        self.sum.add(coef.mul(h.value));
        self.ln_err = ln_add(self.ln_err, coef.ln_abs + h.ln_error);
        let cond = 2.0 + ln_rest.abs() + num.iter().chain(den).map(|&x| gamma_sensitivity(x)).sum::<f64>()
            + hyp_sensitivity(&spec);
        self.ln_cond = ln_add(self.ln_cond, coef.ln_abs + h.value.ln_abs + cond.ln());
        if let Some((sum, err)) = self.dd {
            self.dd = dd_coefficient(num, den, ln_rest).zip(hyp_series_dd(&spec, DEFAULT_MAX_TERMS)?).and_then(
                |(c, (v, tail))| {
                    let t = c * v;
                    t.hi().is_finite().then(|| (sum + t, err + c.hi().abs() * tail))
                },
            );
        }
        Ok(())
    }

    fn finish(self, ln_mult: f64, terms: usize) -> EvalResult {
        // rounding of the derived parameters is amplified by the cancellation
        let round = ln_add(self.ln_cond, self.sum.ln_abs_sum()) + f64::EPSILON.ln();
        let (v, err) = match self.dd {
            Some((sum, trunc)) if sum.hi() != 0.0 && (sum.hi() * ln_mult.exp()).is_finite() => {
                let m = ln_mult.exp();
                (sum.to_f64() * m, trunc * m + (round + ln_mult).exp())
            }
            _ => {
                let round = round + 8f64.ln();
                (self.sum.value().scale_ln(ln_mult).to_f64(), (ln_add(self.ln_err, round) + ln_mult).exp())
            }
        };
        let mut r = EvalResult::new(v, err, Backend::Series);
        r.diagnostics.terms = terms;
        r
    }
}

const SENS_STEP: f64 = 1e-6;

/// |x ψ(x)| by central difference.
fn gamma_sensitivity(x: f64) -> f64 {
    let h = SENS_STEP * x.abs().max(1e-3);
    match (gamma_signed(x + h), gamma_signed(x - h)) {
        (Ok((_, a)), Ok((_, b))) => (x * (a - b) / (2.0 * h)).abs(),
        _ => 1.0 / SENS_STEP,
    }
}

/// Σ |p ∂ln|F|/∂p| over the parameters and argument of a pFq.
fn hyp_sensitivity(spec: &HypSeriesSpec) -> f64 {
    let ln_f = |s: &HypSeriesSpec| hyp_series_log(s, 1e-10, DEFAULT_MAX_TERMS).ok().map(|h| h.value.ln_abs);
    let Some(base) = ln_f(spec) else { return 1.0 / SENS_STEP };
    let mut total = 0.0;
    let n = spec.numerator_params.len() + spec.denominator_params.len() + 1;
    for i in 0..n {
        let mut s = spec.clone();
        let x = if i < spec.numerator_params.len() {
            &mut s.numerator_params[i]
        } else if i < n - 1 {
            &mut s.denominator_params[i - spec.numerator_params.len()]
        } else {
            &mut s.argument
        };
        if *x == 0.0 || (*x <= 0.0 && *x == x.round()) {
            continue;
        }
        *x *= 1.0 + SENS_STEP;
        total += match ln_f(&s) {
            Some(l) if l.is_finite() => ((l - base) / SENS_STEP).abs(),
            _ => 1.0 / SENS_STEP,
        };
    }
    total
}

/// Π Γ(num)/Π Γ(den)·exp(ln_rest) in double-double.
fn dd_coefficient(num: &[f64], den: &[f64], ln_rest: f64) -> Option<D> {
    let mut c = dd::exp(D::from(ln_rest));
    for &x in num {
        c *= dd::gamma(D::from(x))?;
    }
    for &x in den {
        c = c / dd::gamma(D::from(x))?;
    }
    c.hi().is_finite().then_some(c)
}

fn boundary(x: f64) -> Result<()> {
    if x.ln().abs() < BOUNDARY_BAND {
        Err(Error::BoundaryRegion { x })
    } else {
        Ok(())
    }
}

fn lg(x: f64) -> f64 {
    ln_gamma_pos(x)
}

/// Density at u from the case's closed-form series.
///
/// Near the branch point the two series of P2_2 and P2_7 cancel to many
/// digits; there the sum is replaced by its expansion in 1 − y.
pub fn eval_case(case: CaseId, spec: &ConvolutionSpec, u: f64) -> Result<EvalResult> {
    let direct = eval_impl(case, spec, u, false);
    if !matches!(case, P2_2 | P2_7) {
        return direct;
    }
    let poor = match &direct {
        Ok(r) => !(r.error <= CONTINUE_ABOVE * r.value.abs()),
        Err(Error::BoundaryRegion { .. }) => true,
        Err(_) => false,
    };
    if poor && (1.0 - effective_argument(case, spec, u)?).abs() <= CONTINUE_WITHIN {
        let mut r = eval_near_branch(&match_case(case, spec)?.transform()?, u)?;
        r.diagnostics.fallback = Some("expansion about the branch point".into());
        return Ok(r);
    }
    direct
}

/// The case formula in its printed form, typos included.
/// Differs from [`eval_case`] only for P2_6, P2_7 and P3_1.
pub fn printed_formula(case: CaseId, spec: &ConvolutionSpec, u: f64) -> Result<f64> {
    Ok(printed_eval(case, spec, u)?.value)
}

pub(crate) fn printed_eval(case: CaseId, spec: &ConvolutionSpec, u: f64) -> Result<EvalResult> {
    eval_impl(case, spec, u, true)
}

fn eval_impl(case: CaseId, spec: &ConvolutionSpec, u: f64, verbatim: bool) -> Result<EvalResult> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("u must be positive, got {u}")));
    }
    let s = match_case(case, spec)?;
    let (f1, f2) = (s.f1, s.f2);
    let lu = u.ln();
    let mut t = Terms::new();
    let ln_mult;
    match case {
        P2_1 => {
            let (al, be) = (f1.alpha - 1.0, f1.beta_or_zero());
            let (rho, a) = (f2.alpha - 1.0, f2.a);
            simple_pole(case, "alpha − rho", al - rho)?;
            ln_mult = a.ln() - lg(al + 1.0) - lg(be) - lg(rho + 1.0);
            let x = a * u;
            t.add(&[rho - al, 1.0 + al + be], &[], al * x.ln(), &[be + 1.0 + al], &[1.0 + al - rho], x)?;
            t.add(&[1.0 + be + rho, al - rho], &[], rho * x.ln(), &[be + 1.0 + rho], &[1.0 + rho - al], x)?;
        }
        P2_2 => {
            let (a1, b1, a2, b2) = (f1.alpha - 1.0, f1.beta_or_zero(), f2.alpha - 1.0, f2.beta_or_zero());
            ln_mult = -lg(a1 + 1.0) - lg(b1) - lg(a2 + 1.0) - lg(b2);
            boundary(u)?;
            if u < 1.0 {
                simple_pole(case, "alpha1 − alpha2", a1 - a2)?;
                for (p, q) in [(a1, a2), (a2, a1)] {
                    t.add(&[q - p, b1 + 1.0 + p, b2 + 1.0 + p], &[], p * lu, &[b1 + 1.0 + p, b2 + 1.0 + p], &[1.0 + p - q], u)?;
                }
            } else {
                simple_pole(case, "beta1 − beta2", b1 - b2)?;
                for (p, q) in [(b1, b2), (b2, b1)] {
                    t.add(
                        &[a1 + 1.0 + p, a2 + 1.0 + p, q - p],
                        &[],
                        -(p + 1.0) * lu,
                        &[a1 + p + 1.0, a2 + p + 1.0],
                        &[1.0 + p - q],
                        1.0 / u,
                    )?;
                }
            }
        }
        P2_3 => {
            let (a1, b1, a2, b2) = (f1.alpha - 1.0, f1.beta_or_zero(), f2.alpha - 1.0, f2.beta_or_zero());
            ln_mult = lg(a1 + 1.0 + b1) - lg(a1 + 1.0) + lg(a2 + 1.0 + b2) - lg(a2 + 1.0);
            boundary(u)?;
            if u < 1.0 {
                simple_pole(case, "alpha1 − alpha2", a1 - a2)?;
                for ((p, bp), (q, bq)) in [((a1, b1), (a2, b2)), ((a2, b2), (a1, b1))] {
                    t.add(&[q - p], &[bp, q + bq - p], p * lu, &[1.0 - bp, 1.0 + p - q - bq], &[1.0 + p - q], u)?;
                }
            }
        }
        P2_4 => {
            let (al, be) = (f1.alpha - 1.0, f1.beta_or_zero());
            let (ga, a) = (f2.alpha - 1.0, f2.a);
            simple_pole(case, "alpha − gamma", al - ga)?;
            ln_mult = lg(al + 1.0 + be) - lg(al + 1.0) + a.ln() - lg(ga + 1.0);
            let x = a * u;
            t.add(&[ga - al], &[be], al * x.ln(), &[1.0 - be], &[1.0 + al - ga], -x)?;
            t.add(&[al - ga], &[al + be - ga], ga * x.ln(), &[1.0 + ga - al - be], &[1.0 + ga - al], -x)?;
        }
        P2_5 => {
            let (al, be) = (f1.alpha - 1.0, f1.beta_or_zero());
            let (ga, de) = (f2.alpha - 1.0, f2.beta_or_zero());
            ln_mult = lg(al + 1.0 + be) - lg(al + 1.0) - lg(ga + 1.0) - lg(de);
            boundary(u)?;
            if u < 1.0 {
                simple_pole(case, "alpha − gamma", al - ga)?;
                t.add(&[ga - al, 1.0 + de + al], &[be], al * lu, &[1.0 + de + al, 1.0 - be], &[1.0 + al - ga], -u)?;
                t.add(
                    &[al - ga, 1.0 + de + ga],
                    &[al + be - ga],
                    ga * lu,
                    &[1.0 + de + ga, 1.0 + ga - al - be],
                    &[1.0 + ga - al],
                    -u,
                )?;
            } else {
                t.add(
                    &[al + 1.0 + de, ga + 1.0 + de],
                    &[al + be + 1.0 + de],
                    -(1.0 + de) * lu,
                    &[al + 1.0 + de, ga + 1.0 + de],
                    &[al + be + 1.0 + de],
                    -1.0 / u,
                )?;
            }
        }
        P2_6 => {
            let (a1, s1, a2, s2) = (f1.alpha - 1.0, f1.a, f2.alpha - 1.0, f2.a);
            simple_pole(case, "alpha1 − alpha2", a1 - a2)?;
            ln_mult = s1.ln() + s2.ln() - lg(a1 + 1.0) - lg(a2 + 1.0);
            let x = s1 * s2 * u;
            // printed as (a1 a1 u)^alpha2 in the second term
            let x2 = if verbatim { s1 * s1 * u } else { x };
            t.add(&[a2 - a1], &[], a1 * x.ln(), &[], &[1.0 + a1 - a2], x)?;
            t.add(&[a1 - a2], &[], a2 * x2.ln(), &[], &[1.0 + a2 - a1], x)?;
        }
        P2_7 => {
            let d = f1.delta;
            let (a1, b1, s1) = (f1.alpha - 1.0, f1.beta_or_zero(), f1.a);
            let (a2, b2, s2) = (f2.alpha - 1.0, f2.beta_or_zero(), f2.a);
            ln_mult = (s1.ln() + s2.ln()) / d - lg((a1 + 1.0) / d) - lg(b1) - lg((a2 + 1.0) / d) - lg(b2) + d.ln();
            let lx = (s1 * s2).ln() / d + lu;
            let big_x = s1 * s2 * u.powf(d);
            boundary(big_x)?;
            if big_x < 1.0 {
                simple_pole(case, "(alpha1 − alpha2)/delta", (a1 - a2) / d)?;
                // printed with a1 a1 u^delta as the first series argument
                let z_first = if verbatim { s1 * s1 * u.powf(d) } else { big_x };
                for ((p, q), z) in [((a1, a2), z_first), ((a2, a1), big_x)] {
                    let (c1, c2) = (b1 + (p + 1.0) / d, b2 + (p + 1.0) / d);
                    t.add(&[(q - p) / d, c1, c2], &[], p * lx, &[c1, c2], &[1.0 + (p - q) / d], z)?;
                }
            } else {
                simple_pole(case, "beta1 − beta2", b1 - b2)?;
                for (p, q) in [(b1, b2), (b2, b1)] {
                    let (c1, c2) = (p + (a1 + 1.0) / d, p + (a2 + 1.0) / d);
                    t.add(&[c1, c2, q - p], &[], -(p * d + 1.0) * lx, &[c1, c2], &[1.0 + p - q], 1.0 / big_x)?;
                }
            }
        }
        P3_1 => {
            let (a1, s1, a2, s2) = (f1.alpha - 1.0, f1.a, f2.alpha - 1.0, f2.a);
            let n = a1 + a2 + 2.0;
            if verbatim {
                // closed form with the printed constant a1^(α1+1) a2^(α2+1)/Γ(α1+1)²
                let l = (a1 + 1.0) * s1.ln() + (a2 + 1.0) * s2.ln() - 2.0 * lg(a1 + 1.0) + lg(n) + a2 * lu
                    - n * (s1 + s2 * u).ln();
                return Ok(EvalResult::new(l.exp(), 0.0, Backend::Series));
            }
            ln_mult = lg(n) - lg(a1 + 1.0) - lg(a2 + 1.0) - lu;
            let x = s2 * u / s1;
            boundary(x)?;
            if x < 1.0 {
                t.add(&[], &[], (a2 + 1.0) * x.ln(), &[n], &[], -x)?;
            } else {
                t.add(&[], &[], -(a1 + 1.0) * x.ln(), &[n], &[], -1.0 / x)?;
            }
        }
        P3_2 => {
            let (a1, s1) = (f1.alpha - 1.0, f1.a);
            let (a2, b2) = (f2.alpha - 1.0, f2.beta_or_zero());
            simple_pole(case, "beta2 − alpha1 − 1", b2 - a1 - 1.0)?;
            ln_mult = -s1.ln() - lg(a1 + 1.0) - lg(a2 + 1.0) - lg(b2);
            let x = s1 / u;
            t.add(&[a2 + b2 + 1.0, 1.0 + a1 - b2], &[], (1.0 + b2) * x.ln(), &[1.0 + a2 + b2], &[b2 - a1], x)?;
            t.add(&[2.0 + a1 + a2, b2 - a1 - 1.0], &[], (2.0 + a1) * x.ln(), &[2.0 + a1 + a2], &[2.0 + a1 - b2], x)?;
        }
        P3_3 => {
            let (ga, de) = (f1.alpha - 1.0, f1.beta_or_zero());
            let (al, a) = (f2.alpha - 1.0, f2.a);
            simple_pole(case, "delta − 1 − alpha", de - 1.0 - al)?;
            ln_mult = a.ln() - lg(al + 1.0) - lg(ga + 1.0) - lg(de);
            let x = a * u;
            t.add(&[de - 1.0 - al, 2.0 + ga + al], &[], al * x.ln(), &[2.0 + ga + al], &[2.0 + al - de], x)?;
            t.add(&[1.0 + ga + de, 1.0 + al - de], &[], (de - 1.0) * x.ln(), &[1.0 + ga + de], &[de - al], x)?;
        }
        P3_4 => {
            let (ga, a) = (f1.alpha - 1.0, f1.a);
            let (al, be) = (f2.alpha - 1.0, f2.beta_or_zero());
            ln_mult = lg(al + 1.0 + be) - a.ln() - lg(al + 1.0) - lg(ga + 1.0);
            let n = 2.0 + al + ga;
            t.add(&[n], &[n + be], -(ga + 2.0) * (u / a).ln(), &[n], &[n + be], -a / u)?;
        }
        P3_5 => {
            let (al, be) = (f1.alpha - 1.0, f1.beta_or_zero());
            let (ga, a) = (f2.alpha - 1.0, f2.a);
            ln_mult = a.ln() + lg(al + 1.0 + be) - lg(ga + 1.0) - lg(al + 1.0);
            let n = 2.0 + al + ga;
            let x = a * u;
            t.add(&[n], &[n + be], ga * x.ln(), &[n], &[n + be], -x)?;
        }
        P3_6 => {
            let (a1, b1, a2, b2) = (f1.alpha - 1.0, f1.beta_or_zero(), f2.alpha - 1.0, f2.beta_or_zero());
            ln_mult = lg(a1 + 1.0 + b1) + lg(a2 + 1.0 + b2) - lg(a1 + 1.0) - lg(a2 + 1.0);
            let n = 2.0 + a1 + a2;
            boundary(u)?;
            if u < 1.0 {
                t.add(&[n], &[n + b1, b2], a2 * lu, &[1.0 - b2, n], &[n + b1], u)?;
            } else {
                t.add(&[n], &[n + b2, b1], -(2.0 + a1) * lu, &[1.0 - b1, n], &[n + b2], 1.0 / u)?;
            }
        }
        P3_7 => {
            let d = f1.delta;
            let (al, be, a) = (f1.alpha - 1.0, f1.beta_or_zero(), f1.a);
            let (ga, b) = (f2.alpha - 1.0, f2.a);
            let g1 = (ga + 1.0) / d;
            simple_pole(case, "(gamma+1)/delta − beta", g1 - be)?;
            ln_mult = (b.ln() - a.ln()) / d - lg((al + 1.0) / d) - lg(be) - lg(g1) + d.ln();
            let lx = (b / a).ln() / d + lu;
            let big_x = b * u.powf(d) / a;
            let c = (2.0 + al + ga) / d;
            t.add(&[be - g1, c], &[], ga * lx, &[c], &[1.0 + g1 - be], big_x)?;
            let c2 = (al + 1.0) / d + be;
            t.add(&[g1 - be, c2], &[], (be * d - 1.0) * lx, &[c2], &[1.0 + be - g1], big_x)?;
        }
    }
    Ok(t.finish(ln_mult, 1))
}
