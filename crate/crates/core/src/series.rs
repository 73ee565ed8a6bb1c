//! Inverse Mellin transform as a sum of residues over one pole family side.

use crate::error::{Error, Result};
use crate::expr::{GammaExpr, GammaFactor, POLE_TOL};
use crate::result::{Backend, EvalResult};
use crate::special::{gamma_signed, hyp_series_log, ln_add, HypSeriesSpec, LogSum, SeriesSum, SignedLog};
use serde::{Deserialize, Serialize};

/// Half-width of the refused band around effective argument 1, in ln.
pub const BOUNDARY_BAND: f64 = 1e-3;
const BALANCE_TOL: f64 = 1e-12;
const ZERO_SUM_POLES: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Auto,
    Left,
    Right,
}

/// Side whose residue series converges at u, or why there is none.
pub fn choose_side(expr: &GammaExpr, u: f64, side: Side) -> Result<Side> {
    let mu = expr.mu();
    let x = expr.effective_argument(u);
    let natural = if mu > BALANCE_TOL {
        Side::Left
    } else if mu < -BALANCE_TOL {
        Side::Right
    } else {
        if x.ln().abs() < BOUNDARY_BAND {
            return Err(Error::BoundaryRegion { x });
        }
        if x < 1.0 {
            Side::Left
        } else {
            Side::Right
        }
    };
    match side {
        Side::Auto => Ok(natural),
        s if s == natural => Ok(s),
        s => Err(Error::DivergentSeries(format!(
            "{s:?} residue series diverges (slope balance {mu}, effective argument {x})"
        ))),
    }
}

/// Density value at u from the residues of expr·u^(−s).
pub fn eval_by_residues(expr: &GammaExpr, u: f64, side: Side, tol: f64, max_terms: usize) -> Result<EvalResult> {
    let s = residue_sum(expr, u, side, tol, max_terms)?;
    let mut r = EvalResult::new(s.value.to_f64(), s.error(), Backend::Series);
    r.diagnostics.terms = s.terms;
    Ok(r)
}

/// Distance of w from the nearest non-positive integer, and that integer's index.
fn near_pole(w: f64) -> Option<u64> {
    let n = (-w).round();
    (n >= 0.0 && (w + n).abs() < POLE_TOL).then_some(n as u64)
}

fn ln_factorial(n: u64) -> f64 {
    crate::special::ln_gamma_pos(n as f64 + 1.0)
}

struct Residue {
    term: SignedLog,
    /// Magnitude of the logs that went into the term; scales its rounding error.
    mag: f64,
}

fn residue_at(expr: &GammaExpr, s0: f64, ln_x: f64) -> Result<Residue> {
    let mut sign = 1.0;
    let mut l = expr.ln_constant - s0 * ln_x;
    let mut mag = expr.ln_constant.abs() + (s0 * ln_x).abs();
    let mut order: i32 = 0;
    let mut apply = |f: &GammaFactor, up: bool| -> Result<()> {
        let w = f.arg(s0);
        let dir = if up { 1.0 } else { -1.0 };
        match near_pole(w) {
            Some(n) => {
                let lf = ln_factorial(n);
                let par = if n % 2 == 0 { 1.0 } else { -1.0 };
                sign *= par * f.slope.signum();
                // Γ near −n: (−1)^n/(n!·b·(s−s0)); its reciprocal carries (−1)^n·n!·b·(s−s0)
                l += dir * (-lf - f.slope.abs().ln());
                mag += lf;
                order += if up { 1 } else { -1 };
            }
            None => {
                let (g, lg) = gamma_signed(w)?;
                sign *= g;
                l += dir * lg;
                mag += lg.abs();
            }
        }
        Ok(())
    };
    for f in &expr.num {
        apply(f, true)?;
    }
    for f in &expr.den {
        apply(f, false)?;
    }
    match order {
        o if o <= 0 => Ok(Residue { term: SignedLog::ZERO, mag }),
        1 => Ok(Residue { term: SignedLog { sign, ln_abs: l }, mag }),
        o => Err(Error::PoleCollision(format!("pole of order {o} at s = {s0}"))),
    }
}

pub(crate) fn residue_sum(expr: &GammaExpr, u: f64, side: Side, tol: f64, max_terms: usize) -> Result<SeriesSum> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(Error::Domain(format!("u must be positive, got {u}")));
    }
    let side = choose_side(expr, u, side)?;
    let left = side == Side::Left;
    let fams: Vec<GammaFactor> =
        expr.num.iter().copied().filter(|f| (f.slope > 0.0) == left).collect();
    if fams.is_empty() {
        return Ok(SeriesSum { value: SignedLog::ZERO, ln_error: f64::NEG_INFINITY, terms: 0 });
    }
    let ln_x = expr.scale.ln() + u.ln();
    let mu = expr.mu().abs();
    let ln_eff = expr.effective_argument(u).ln();
    if mu > BALANCE_TOL && (if left { ln_eff } else { -ln_eff }) / mu > (max_terms as f64).ln() + 1.0 {
        // terms grow until about the pole index x^(1/|mu|)
        return Err(Error::NoConvergence {
            what: format!("residue series at u = {u}"),
            value: f64::NAN,
            error: f64::INFINITY,
        });
    }
    let window = 3 * fams.len();
    let mut next = vec![0usize; fams.len()];
    let mut acc = LogSum::new();
    let mut round = f64::NEG_INFINITY;
    let mut recent: Vec<f64> = Vec::with_capacity(window);
    let mut small_run = 0;
    let ln_tol = tol.ln();
    let ln_eps = f64::EPSILON.ln();
    for k in 0..max_terms {
        // next pole in the walking direction
        let mut s0 = if left { f64::NEG_INFINITY } else { f64::INFINITY };
        for (f, &nu) in fams.iter().zip(&next) {
            let s = f.pole(nu);
            if (left && s > s0) || (!left && s < s0) {
                s0 = s;
            }
        }
        for (f, nu) in fams.iter().zip(next.iter_mut()) {
            if (f.pole(*nu) - s0).abs() < POLE_TOL {
                *nu += 1;
            }
        }
        let r = residue_at(expr, s0, ln_x)?;
        let t = if left { r.term } else { r.term.neg() };
        acc.add(t);
        if !t.is_zero() {
            round = ln_add(round, t.ln_abs + ln_eps + (r.mag + 10.0).ln());
        }
        if recent.len() == window {
            recent.remove(0);
        }
        recent.push(t.ln_abs);
        let sum = acc.value();
        if sum.is_zero() {
            if k + 1 >= ZERO_SUM_POLES {
                return Ok(SeriesSum { value: SignedLog::ZERO, ln_error: round, terms: k + 1 });
            }
            small_run = 0;
            continue;
        }
        if t.is_zero() || t.ln_abs <= ln_tol + sum.ln_abs {
            small_run += 1;
        } else {
            small_run = 0;
        }
        if small_run >= window {
            let tail = recent.iter().fold(f64::NEG_INFINITY, |a, &b| ln_add(a, b));
            // geometric continuation for balanced series
            let tail = if expr.mu().abs() <= BALANCE_TOL {
                let x = expr.effective_argument(u);
                let r = if left { x } else { 1.0 / x };
                tail - (1.0 - r.min(0.999)).ln()
            } else {
                tail
            };
            return Ok(SeriesSum { value: sum, ln_error: ln_add(tail, round), terms: k + 1 });
        }
    }
    let v = acc.value().to_f64();
    Err(Error::NoConvergence {
        what: format!("residue series at u = {u}"),
        value: v,
        error: recent.last().map_or(f64::NAN, |l| l.exp()),
    })
}

/// Inverse transform of C·z^(−s)·Γ(p1+ds)Γ(p2+ds)Γ(q1−ds)Γ(q2−ds) around
/// y = (z·u)^(1/d) = 1, where both residue series cancel badly:
///
/// (C/d)·Γ(p1+q1)Γ(p1+q2)Γ(p2+q1)Γ(p2+q2)/Γ(Σ)·y^p1·2F1(p1+q1, p1+q2; Σ; 1 − y).
///
/// Unsupported for any other gamma structure.
pub fn eval_near_branch(expr: &GammaExpr, u: f64) -> Result<EvalResult> {
    let unsupported = || Error::Unsupported("continuation needs Γ(p+ds)²Γ(q−ds)² with no denominator".into());
    if !expr.den.is_empty() || expr.num.len() != 4 {
        return Err(unsupported());
    }
    let d = expr.num.iter().map(|f| f.slope.abs()).fold(0.0, f64::max);
    let (pos, neg): (Vec<&GammaFactor>, Vec<&GammaFactor>) = expr.num.iter().partition(|f| f.slope > 0.0);
    if pos.len() != 2 || expr.num.iter().any(|f| (f.slope.abs() - d).abs() > 1e-12 * d) {
        return Err(unsupported());
    }
    let (p1, p2, q1, q2) = (pos[0].offset, pos[1].offset, neg[0].offset, neg[1].offset);
    let ln_y = (expr.scale.ln() + u.ln()) / d;
    let w = -ln_y.exp_m1();
    if !(w.abs() < 1.0 - crate::special::UNIT_CIRCLE_EPS) {
        return Err(Error::DivergentSeries(format!("continuation needs |1 − y| < 1, got {w}")));
    }
    let sum = p1 + p2 + q1 + q2;
    let mut coef = SignedLog { sign: 1.0, ln_abs: expr.ln_constant - d.ln() + p1 * ln_y };
    for x in [p1 + q1, p1 + q2, p2 + q1, p2 + q2] {
        let (sg, l) = gamma_signed(x)?;
        coef = coef.mul(SignedLog { sign: sg, ln_abs: l });
    }
    let (sg, l) = gamma_signed(sum)?;
    coef = coef.div(SignedLog { sign: sg, ln_abs: l });
    let h = hyp_series_log(&HypSeriesSpec::new(&[p1 + q1, p1 + q2], &[sum], w), 1e-17, 10_000)?;
    let v = coef.mul(h.value);
    let err = (coef.ln_abs + h.ln_error).exp() + 16.0 * f64::EPSILON * v.to_f64().abs();
    let mut r = EvalResult::new(v.to_f64(), err, Backend::Series);
    r.diagnostics.terms = h.terms;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ConvolutionSpec;
    use crate::pathway::PathwayModel;
    use crate::special::{hyp_value, log_gamma};
    use proptest::prelude::*;

    fn ex(num: Vec<(f64, f64)>, den: Vec<(f64, f64)>, scale: f64) -> GammaExpr {
        let f = |v: Vec<(f64, f64)>| v.into_iter().map(|(a, b)| GammaFactor::new(a, b)).collect();
        GammaExpr::new(1.0, scale, f(num), f(den)).unwrap()
    }

    fn run(e: &GammaExpr, u: f64) -> Result<EvalResult> {
        eval_by_residues(e, u, Side::Auto, 1e-12, 10_000)
    }

    #[test]
    fn gamma_s_is_exponential() {
        let e = ex(vec![(0.0, 1.0)], vec![], 1.0);
        let r = run(&e, 1.0).unwrap();
        assert!((r.value - (-1f64).exp()).abs() < 4e-15);
        assert!(r.error < 1e-11);
        let r = run(&e, 7.5).unwrap();
        assert!((r.value - (-7.5f64).exp()).abs() <= r.error && r.error < 1e-10);
    }

    #[test]
    fn exponential_ratio_away_from_one() {
        let e = ex(vec![(0.0, 1.0), (2.0, -1.0)], vec![], 1.0);
        for u in [0.1, 0.5, 0.9, 1.2, 2.0, 10.0] {
            let r = run(&e, u).unwrap();
            let want = (1.0 + u).powi(-2);
            assert!((r.value - want).abs() < 1e-11 * want, "u={u} {}", r.value);
            assert!(r.error >= (r.value - want).abs());
        }
        assert!(matches!(run(&e, 1.0), Err(Error::BoundaryRegion { .. })));
    }

    #[test]
    fn double_poles_are_refused() {
        let e = ex(vec![(0.0, 1.0), (0.0, 1.0)], vec![], 1.0);
        assert!(matches!(run(&e, 1.0), Err(Error::PoleCollision(_))));
    }

    #[test]
    fn wrong_side_is_divergent() {
        let e = ex(vec![(0.0, 1.0)], vec![], 1.0);
        assert!(matches!(
            eval_by_residues(&e, 1.0, Side::Right, 1e-12, 100),
            Err(Error::DivergentSeries(_))
        ));
        let e = ex(vec![(0.0, 1.0), (2.0, -1.0)], vec![], 1.0);
        assert!(matches!(
            eval_by_residues(&e, 3.0, Side::Left, 1e-12, 100),
            Err(Error::DivergentSeries(_))
        ));
    }

    #[test]
    fn two_uniforms_cancel_to_log() {
        let u1 = PathwayModel::type1_beta(1.0, 1.0, 1.0, 1.0).unwrap();
        let e = ConvolutionSpec::product(u1, u1).transform().unwrap();
        assert!(matches!(run(&e, 1.0), Err(Error::BoundaryRegion { .. })));
        // 1/s^2: double pole at 0, refused
        assert!(matches!(run(&e, 0.3), Err(Error::PoleCollision(_))));
        assert_eq!(run(&e, 1.5).unwrap().value, 0.0);
    }

    #[test]
    fn uniform_times_beta_terminates() {
        // simple poles at −0.5, 0, −1 and nothing else
        let f1 = PathwayModel::type1_beta(1.5, 1.0, 1.0, 1.0).unwrap();
        let f2 = PathwayModel::type1_beta(1.0, 2.0, 1.0, 1.0).unwrap();
        let e = ConvolutionSpec::product(f1, f2).transform().unwrap();
        // f1 = 1.5 x^0.5, f2 = 2(1−x): g(u) = ∫_u^1 f1(u/v) f2(v) dv/v = 3 u^0.5 ∫_u^1 v^(−1.5)(1−v) dv
        for u in [0.1f64, 0.4, 0.8] {
            let inner = 2.0 * (u.powf(-0.5) - 1.0) - 2.0 * (1.0 - u.sqrt());
            let want = 3.0 * u.sqrt() * inner;
            let r = run(&e, u).unwrap();
            assert!((r.value - want).abs() < 1e-12 * want, "u={u}: {} vs {want}", r.value);
        }
    }

    #[test]
    fn gen_gamma_product_matches_hypergeometric_form() {
        // Γ(α+s)Γ(ρ+s)u^(−s): left series = Γ(ρ−α)u^α 0F1(;1+α−ρ;u) + (α<->ρ)
        let (al, rho) = (0.3, 1.1);
        let e = ex(vec![(al, 1.0), (rho, 1.0)], vec![], 1.0);
        for u in [0.2f64, 1.0, 4.0] {
            let t = |p: f64, q: f64| {
                let (sg, lg) = gamma_signed(q - p).unwrap();
                sg * (lg + p * u.ln()).exp() * hyp_value(&[], &[1.0 + p - q], u).unwrap()
            };
            let want = t(al, rho) + t(rho, al);
            let r = run(&e, u).unwrap();
            assert!((r.value - want).abs() < 1e-12 * want.abs() + r.error, "u={u}");
        }
    }

    #[test]
    fn right_series_of_gamma_ratio() {
        // Γ(s)Γ(b−s)/Γ(b) is the Mellin transform of (1+x)^(−b)
        let b = 2.7;
        let mut e = ex(vec![(0.0, 1.0), (b, -1.0)], vec![], 1.0);
        e.ln_constant = -log_gamma(b).unwrap();
        for u in [0.05, 0.5, 3.0, 40.0] {
            let r = run(&e, u).unwrap();
            let want = (1.0 + u).powf(-b);
            assert!((r.value - want).abs() < 1e-11 * want, "u={u}");
        }
    }

    #[test]
    fn branch_expansion_matches_quadrature() {
        let t2 = |a, b, sc, d| PathwayModel::type2_beta(a, b, sc, d).unwrap();
        for spec in [
            ConvolutionSpec::product(t2(2.17, 2.19, 1.0, 1.0), t2(2.04, 1.29, 1.0, 1.0)),
            ConvolutionSpec::product(t2(1.75, 1.69, 0.53, 1.37), t2(1.4, 1.07, 1.95, 1.37)),
        ] {
            let e = spec.transform().unwrap();
            for x in [0.6f64, 0.95, 1.0, 1.05, 1.4] {
                let u = x.powf(e.num[0].slope.abs()) / e.scale;
                let r = eval_near_branch(&e, u).unwrap();
                let q = crate::quad::convolution_density_quad(&spec, u, &Default::default()).unwrap();
                assert!((r.value - q.value).abs() < 1e-8 * q.value, "u={u}: {} vs {}", r.value, q.value);
                assert!(r.error < 1e-12 * r.value);
            }
        }
        let gg = ex(vec![(0.5, 1.0), (1.0, 1.0)], vec![], 1.0);
        assert!(matches!(eval_near_branch(&gg, 1.0), Err(Error::Unsupported(_))));
    }

    proptest! {
        #[test]
        fn two_sides_agree_when_both_converge_like_a_beta_prime(b in 1.2f64..4.0, c in 0.1f64..0.9) {
            // (1+x)^(−b) has left and right series that meet at x = 1
            let mut e = ex(vec![(c, 1.0), (b - c, -1.0)], vec![], 1.0);
            e.ln_constant = -log_gamma(b).unwrap();
            for u in [0.3, 0.7, 1.4, 3.0] {
                let r = run(&e, u).unwrap();
                let want = u.powf(c) * (1.0 + u).powf(-b);
                prop_assert!((r.value - want).abs() < 1e-10 * want);
            }
        }
    }
}
