//! Adaptive Gauss–Kronrod quadrature of the convolution integrals and of
//! numerical Mellin transforms.

use crate::error::{Error, Result};
use crate::expr::{ConvolutionSpec, Kind};
use crate::pathway::{Family, PathwayModel};
use crate::result::{Backend, EvalResult};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Drop in ln integrand that sets the scale of the infinite maps.
const DECADE_DROP: f64 = 20.0;
const SCAN_POINTS: usize = 801;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Overrides the endpoint exponent used for the power map at finite limits.
    pub singularity_exponent_hint: Option<f64>,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { abs_tol: 1e-10, rel_tol: 1e-9, max_subdivisions: 2000, singularity_exponent_hint: None }
    }
}

impl QuadConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) || self.max_subdivisions < 10 {
            return Err(Error::Domain(format!("bad quadrature config {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct QuadOut {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
    pub subdivisions: usize,
}

impl QuadOut {
    pub(crate) fn zero() -> Self {
        QuadOut { value: 0.0, error: 0.0, evaluations: 0, subdivisions: 0 }
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Segment {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// 21-point Kronrod rule with the QUADPACK error scaling.
fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let hl = half.abs();
    let result = resk * half;
    resabs *= hl;
    resasc *= hl;
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

/// Globally adaptive bisection starting from the given breakpoints.
pub(crate) fn qag<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], abs_tol: f64, rel_tol: f64, max_sub: usize) -> Result<QuadOut> {
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    let (mut total, mut err) = (0.0, 0.0);
    for w in breaks.windows(2) {
        let (v, e) = gk21(&mut f, w[0], w[1]);
        evals += 21;
        total += v;
        err += e;
        heap.push(Segment { a: w[0], b: w[1], value: v, error: e });
    }
    let mut subdivisions = 0;
    let mut done: Vec<Segment> = Vec::new();
    loop {
        if !total.is_finite() || !err.is_finite() {
            return Err(Error::NoConvergence { what: "quadrature (non-finite integrand)".into(), value: total, error: err });
        }
        if err <= abs_tol.max(rel_tol * total.abs()) {
            break;
        }
        if subdivisions >= max_sub {
            return Err(Error::NoConvergence { what: "adaptive quadrature".into(), value: total, error: err });
        }
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if !(seg.a < mid && mid < seg.b) {
            // cannot split further; keep its contribution as is
            done.push(seg);
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = gk21(&mut f, seg.a, mid);
        let (v2, e2) = gk21(&mut f, mid, seg.b);
        evals += 42;
        subdivisions += 1;
        total += v1 + v2 - seg.value;
        err += e1 + e2 - seg.error;
        heap.push(Segment { a: seg.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: seg.b, value: v2, error: e2 });
        if subdivisions % 64 == 0 {
            // refresh the running sums against drift
            total = heap.iter().chain(&done).map(|s| s.value).sum();
            err = heap.iter().chain(&done).map(|s| s.error).sum();
        }
    }
    let value: f64 = heap.iter().chain(&done).map(|s| s.value).sum();
    let error: f64 = heap.iter().chain(&done).map(|s| s.error).sum();
    if error > abs_tol.max(rel_tol * value.abs()) {
        return Err(Error::NoConvergence { what: "adaptive quadrature".into(), value, error });
    }
    Ok(QuadOut { value, error, evaluations: evals, subdivisions })
}

/// Power that removes an endpoint singularity gap^p.
fn power_for(p: f64) -> f64 {
    if p < 0.0 {
        1.0 / (1.0 + p.max(-0.95))
    } else {
        1.0
    }
}

/// One half of an integration line seen from the split point.
#[derive(Clone, Copy, Debug)]
struct Piece {
    /// +1 walks toward larger t.
    dir: f64,
    split: f64,
    /// Finite end, or None for an infinite tail with scale `sigma`.
    end: Option<f64>,
    k: f64,
    sigma: f64,
}

/// Integrate exp(g(t, t − lo, hi − t) − shift) over (lo, hi) split at `split`.
/// g returns the log integrand; the two gap arguments are exact near finite ends.
#[allow(clippy::too_many_arguments)]
pub(crate) fn integrate_line<G: FnMut(f64, f64, f64) -> f64>(
    mut g: G,
    lo: f64,
    hi: f64,
    exp_lo: f64,
    exp_hi: f64,
    split: f64,
    sigma: (f64, f64),
    shift: f64,
    cfg: &QuadConfig,
) -> Result<QuadOut> {
    let hint = |p: f64| cfg.singularity_exponent_hint.map_or(p, |h| p.min(h));
    let pieces = [
        Piece { dir: -1.0, split, end: lo.is_finite().then_some(lo), k: power_for(hint(exp_lo)), sigma: sigma.0 },
        Piece { dir: 1.0, split, end: hi.is_finite().then_some(hi), k: power_for(hint(exp_hi)), sigma: sigma.1 },
    ];
    let mut eval = |r: f64| -> f64 {
        let (piece, r) = if r < 1.0 { (&pieces[0], r) } else { (&pieces[1], r - 1.0) };
        let (t, d_lo, d_hi, ln_jac) = match piece.end {
            Some(end) => {
                let len = (piece.split - end).abs();
                let gap = len * r.powf(piece.k);
                let ln_jac = (len * piece.k).ln() + (piece.k - 1.0) * r.ln();
                if piece.dir < 0.0 {
                    (end + gap, gap, hi - (end + gap), ln_jac)
                } else {
                    (end - gap, (end - gap) - lo, gap, ln_jac)
                }
            }
            None => {
                // r runs from the far end (0) to the split (1)
                let q = 1.0 - r;
                let x = piece.sigma * q / (1.0 - q);
                let ln_jac = piece.sigma.ln() - 2.0 * (1.0 - q).ln();
                let t = piece.split + piece.dir * x;
                (t, t - lo, hi - t, ln_jac)
            }
        };
        let l = g(t, d_lo, d_hi) + ln_jac - shift;
        if l.is_nan() {
            0.0
        } else {
            l.exp()
        }
    };
    let abs = cfg.abs_tol * (-shift).exp();
    let mut out = qag(&mut eval, &[0.0, 1.0, 2.0], abs, cfg.rel_tol, cfg.max_subdivisions)
        .map_err(|e| rescale_err(e, shift))?;
    let s = shift.exp();
    out.value *= s;
    out.error *= s;
    Ok(out)
}

fn rescale_err(e: Error, shift: f64) -> Error {
    match e {
        Error::NoConvergence { what, value, error } => {
            Error::NoConvergence { what, value: value * shift.exp(), error: error * shift.exp() }
        }
        e => e,
    }
}

/// One density factor of a convolution integrand: f(exp(sign·t + offset)).
#[derive(Clone, Copy, Debug)]
struct Term {
    model: PathwayModel,
    sign: f64,
    offset: f64,
}

/// exp(Σ ln f_j(e^{σ_j t + c_j}) + k·t + c) on its natural t-domain.
#[derive(Clone, Debug)]
struct LogIntegrand {
    terms: [Term; 2],
    k: f64,
    c: f64,
}

impl LogIntegrand {
    /// Domain (lo, hi) and the edge exponents there.
    fn domain(&self) -> (f64, f64, f64, f64) {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for t in &self.terms {
            let top = t.model.ln_support_upper();
            if !top.is_finite() {
                continue;
            }
            if t.sign > 0.0 {
                hi = hi.min(top - t.offset);
            } else {
                lo = lo.max(t.offset - top);
            }
        }
        let mut e_lo = 0.0;
        let mut e_hi = 0.0;
        for t in &self.terms {
            if t.model.family != Family::Type1Beta {
                continue;
            }
            let top = t.model.ln_support_upper();
            let ex = t.model.beta_or_zero() - 1.0;
            if t.sign > 0.0 && (top - t.offset - hi).abs() <= 1e-12 * (1.0 + hi.abs()) {
                e_hi += ex;
            }
            if t.sign < 0.0 && (t.offset - top - lo).abs() <= 1e-12 * (1.0 + lo.abs()) {
                e_lo += ex;
            }
        }
        (lo, hi, e_lo, e_hi)
    }

    fn ln_eval(&self, t: f64, d_lo: f64, d_hi: f64, lo: f64, hi: f64) -> f64 {
        let mut l = self.k * t + self.c;
        for term in &self.terms {
            let y = term.sign * t + term.offset;
            let m = &term.model;
            l += if m.family == Family::Type1Beta {
                let top = m.ln_support_upper();
                let gap = if term.sign > 0.0 {
                    (top - term.offset - hi) + d_hi
                } else {
                    (lo - (term.offset - top)) + d_lo
                };
                m.ln_pdf_log_gap(y, gap)
            } else {
                m.ln_pdf_log(y)
            };
        }
        l
    }

    fn integrate(&self, cfg: &QuadConfig) -> Result<QuadOut> {
        let (lo, hi, e_lo, e_hi) = self.domain();
        if !(lo < hi) {
            return Ok(QuadOut { value: 0.0, error: 0.0, evaluations: 0, subdivisions: 0 });
        }
        let reach = 40.0 + self.terms.iter().map(|t| t.offset.abs()).fold(0.0, f64::max);
        let a = lo.max(-reach);
        let b = hi.min(reach);
        let (a, b) = if a < b { (a, b) } else { (lo.max(hi - 1.0), hi.min(lo + 1.0)) };
        let mut grid = Vec::with_capacity(SCAN_POINTS);
        for i in 0..SCAN_POINTS {
            let t = a + (b - a) * (i as f64 + 0.5) / SCAN_POINTS as f64;
            let l = self.ln_eval(t, t - lo, hi - t, lo, hi);
            grid.push((t, if l.is_nan() { f64::NEG_INFINITY } else { l }));
        }
        let (imax, &(t_peak, l_peak)) = grid
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
            .expect("non-empty scan");
        // below the smallest subnormal even after any width factor
        if l_peak < -1000.0 {
            return Ok(QuadOut { value: 0.0, error: 0.0, evaluations: SCAN_POINTS, subdivisions: 0 });
        }
        let drop_left = grid[..imax].iter().rev().find(|p| p.1 < l_peak - DECADE_DROP).map(|p| t_peak - p.0);
        let drop_right = grid[imax..].iter().find(|p| p.1 < l_peak - DECADE_DROP).map(|p| p.0 - t_peak);
        let sigma = (
            drop_left.unwrap_or(t_peak - a).max(0.5) / 4.0,
            drop_right.unwrap_or(b - t_peak).max(0.5) / 4.0,
        );
        let mut out = integrate_line(
            |t, dl, dh| self.ln_eval(t, dl, dh, lo, hi),
            lo,
            hi,
            e_lo,
            e_hi,
            t_peak,
            sigma,
            l_peak,
            cfg,
        )?;
        out.evaluations += SCAN_POINTS;
        Ok(out)
    }
}

fn combine(a: QuadOut, b: QuadOut) -> EvalResult {
    let value = 0.5 * (a.value + b.value);
    let error = a.error.max(b.error).max(0.5 * (a.value - b.value).abs());
    let mut r = EvalResult::new(value, error, Backend::Quad);
    r.diagnostics.evaluations = a.evaluations + b.evaluations;
    r.diagnostics.subdivisions = a.subdivisions + b.subdivisions;
    r
}

fn check_u(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("u must be positive and finite, got {u}")))
    }
}

/// Both orderings of ∫ f1(u/v) f2(v) dv/v, evaluated separately.
pub(crate) fn product_parts(spec: &ConvolutionSpec, u: f64, cfg: &QuadConfig) -> Result<(QuadOut, QuadOut)> {
    let lu = u.ln();
    let a = LogIntegrand {
        terms: [Term { model: spec.f1, sign: -1.0, offset: lu }, Term { model: spec.f2, sign: 1.0, offset: 0.0 }],
        k: 0.0,
        c: 0.0,
    };
    let b = LogIntegrand {
        terms: [Term { model: spec.f1, sign: 1.0, offset: 0.0 }, Term { model: spec.f2, sign: -1.0, offset: lu }],
        k: 0.0,
        c: 0.0,
    };
    Ok((a.integrate(cfg)?, b.integrate(cfg)?))
}

/// ∫ (v/u²) f1(v/u) f2(v) dv and ∫ v f1(v) f2(uv) dv.
pub(crate) fn ratio_parts(spec: &ConvolutionSpec, u: f64, cfg: &QuadConfig) -> Result<(QuadOut, QuadOut)> {
    let lu = u.ln();
    let a = LogIntegrand {
        terms: [Term { model: spec.f1, sign: 1.0, offset: -lu }, Term { model: spec.f2, sign: 1.0, offset: 0.0 }],
        k: 2.0,
        c: -2.0 * lu,
    };
    let b = LogIntegrand {
        terms: [Term { model: spec.f1, sign: 1.0, offset: 0.0 }, Term { model: spec.f2, sign: 1.0, offset: lu }],
        k: 2.0,
        c: 0.0,
    };
    Ok((a.integrate(cfg)?, b.integrate(cfg)?))
}

/// Density of u = x1·x2 by direct quadrature of the convolution integral.
pub fn product_density_quad(spec: &ConvolutionSpec, u: f64, cfg: &QuadConfig) -> Result<EvalResult> {
    if spec.kind != Kind::Product {
        return Err(Error::PatternMismatch("product_density_quad needs a product spec".into()));
    }
    cfg.validate()?;
    check_u(u)?;
    let (a, b) = product_parts(spec, u, cfg)?;
    Ok(combine(a, b))
}

/// Density of u = x2/x1 by direct quadrature of the convolution integral.
pub fn ratio_density_quad(spec: &ConvolutionSpec, u: f64, cfg: &QuadConfig) -> Result<EvalResult> {
    if spec.kind != Kind::Ratio {
        return Err(Error::PatternMismatch("ratio_density_quad needs a ratio spec".into()));
    }
    cfg.validate()?;
    check_u(u)?;
    let (a, b) = ratio_parts(spec, u, cfg)?;
    Ok(combine(a, b))
}

/// Quadrature backend for either kind.
pub fn convolution_density_quad(spec: &ConvolutionSpec, u: f64, cfg: &QuadConfig) -> Result<EvalResult> {
    match spec.kind {
        Kind::Product => product_density_quad(spec, u, cfg),
        Kind::Ratio => ratio_density_quad(spec, u, cfg),
    }
}

/// A density on (0, upper) with known power behavior at its ends.
pub trait Density {
    /// ln f(x).
    fn ln_pdf(&self, x: f64) -> f64;
    /// ln f(x) given gap = upper − x exactly; only used for finite supports.
    fn ln_pdf_gap(&self, x: f64, _gap: f64) -> f64 {
        self.ln_pdf(x)
    }
    fn support_upper(&self) -> f64 {
        f64::INFINITY
    }
    /// q with f(x) ~ x^q as x -> 0.
    fn exponent_at_zero(&self) -> f64 {
        0.0
    }
    /// Power at the upper end: (upper − x)^q for finite supports, x^q at infinity
    /// (−∞ for faster than any power).
    fn exponent_at_upper(&self) -> f64 {
        f64::NEG_INFINITY
    }
}

impl<F: Fn(f64) -> f64> Density for F {
    fn ln_pdf(&self, x: f64) -> f64 {
        self(x).ln()
    }
}

impl Density for PathwayModel {
    fn ln_pdf(&self, x: f64) -> f64 {
        PathwayModel::ln_pdf(self, x)
    }
    fn ln_pdf_gap(&self, x: f64, gap: f64) -> f64 {
        let u = self.support_upper();
        let gap_log = -(-gap / u).ln_1p();
        self.ln_pdf_log_gap(x.ln(), gap_log)
    }
    fn support_upper(&self) -> f64 {
        PathwayModel::support_upper(self)
    }
    fn exponent_at_zero(&self) -> f64 {
        self.alpha - 1.0
    }
    fn exponent_at_upper(&self) -> f64 {
        match self.family {
            Family::GenGamma => f64::NEG_INFINITY,
            Family::Type2Beta => -self.beta_or_zero() * self.delta - 1.0,
            Family::Type1Beta => self.beta_or_zero() - 1.0,
        }
    }
}

/// ∫ x^(s−1) f(x) dx, with x = w/(1−w) on an infinite support.
pub fn mellin_numeric<D: Density + ?Sized>(pdf: &D, s: f64, cfg: &QuadConfig) -> Result<EvalResult> {
    cfg.validate()?;
    let upper = pdf.support_upper();
    let p0 = s - 1.0 + pdf.exponent_at_zero();
    let q = pdf.exponent_at_upper();
    let out = if upper.is_finite() {
        let g = |x: f64, _dl: f64, gap: f64| (s - 1.0) * x.ln() + pdf.ln_pdf_gap(x, gap);
        let shift = g(0.5 * upper, 0.5 * upper, 0.5 * upper);
        integrate_line(g, 0.0, upper, p0, q, 0.5 * upper, (1.0, 1.0), shift.max(-700.0), cfg)?
    } else {
        let p1 = if q == f64::NEG_INFINITY { 0.0 } else { -s - 1.0 - q };
        // w = d_lo and 1 − w = d_hi, so x = d_lo/d_hi exactly
        let g = |_w: f64, dl: f64, dh: f64| {
            let x = dl / dh;
            (s - 1.0) * x.ln() + pdf.ln_pdf(x) - 2.0 * dh.ln()
        };
        let shift = g(0.5, 0.5, 0.5);
        integrate_line(g, 0.0, 1.0, p0, p1, 0.5, (1.0, 1.0), shift.max(-700.0), cfg)?
    };
    let mut r = EvalResult::new(out.value, out.error, Backend::Quad);
    r.diagnostics.evaluations = out.evaluations;
    r.diagnostics.subdivisions = out.subdivisions;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn gk21_is_exact_on_polynomials() {
        let (v, _) = gk21(&mut |x: f64| x.powi(20) + 3.0 * x, 0.0, 1.0);
        assert!((v - (1.0 / 21.0 + 1.5)).abs() < 1e-15);
    }

    #[test]
    fn qag_handles_a_sqrt_cusp() {
        let out = qag(|x: f64| x.sqrt().ln(), &[0.0, 1.0], 1e-12, 1e-12, 2000).unwrap();
        assert!((out.value + 0.5).abs() < 1e-11);
        assert!(out.error >= (out.value + 0.5).abs());
    }

    #[test]
    fn qag_reports_failure() {
        let r = qag(|x: f64| 1.0 / x, &[0.0, 1.0], 1e-12, 1e-12, 20);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn mellin_examples() {
        let e = PathwayModel::gen_gamma(1.0, 1.0, 1.0).unwrap();
        let r = mellin_numeric(&e, 3.0, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
        let u = PathwayModel::type1_beta(1.0, 1.0, 1.0, 1.0).unwrap();
        let r = mellin_numeric(&u, 2.0, &cfg()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-10);
        let t = PathwayModel::type2_beta(1.0, 1.0, 1.0, 1.0).unwrap();
        let r = mellin_numeric(&t, 1.5, &cfg()).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-9);
        // closures work as densities too
        let r = mellin_numeric(&|x: f64| (-x).exp(), 3.0, &cfg()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn mellin_near_strip_edges() {
        let t = PathwayModel::type2_beta(0.7, 0.9, 1.6, 1.3).unwrap();
        let st = t.strip();
        let ex = t.mellin_transform();
        for s in [st.lower + 0.05, st.upper - 0.05] {
            let r = mellin_numeric(&t, s, &cfg()).unwrap();
            let want = ex.eval(s).unwrap();
            assert!((r.value - want).abs() < 1e-7 * want, "s={s}: {} vs {want}", r.value);
        }
    }

    #[test]
    fn product_examples() {
        let u1 = PathwayModel::type1_beta(1.0, 1.0, 1.0, 1.0).unwrap();
        let spec = ConvolutionSpec::product(u1, u1);
        let r = product_density_quad(&spec, (-1f64).exp(), &cfg()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert_eq!(product_density_quad(&spec, 1.5, &cfg()).unwrap().value, 0.0);

        let e = PathwayModel::gen_gamma(1.0, 1.0, 1.0).unwrap();
        let spec = ConvolutionSpec::product(e, e);
        let r = product_density_quad(&spec, 1.0, &cfg()).unwrap();
        // 2K0(2) by the independent series K0(x) = −(ln(x/2)+γ)I0(x) + Σ (x²/4)^k H_k/(k!)²
        let k0 = bessel_k0_series(2.0);
        assert!((r.value - 2.0 * k0).abs() < 1e-9, "{}", r.value);
    }

    fn bessel_k0_series(x: f64) -> f64 {
        let gamma_e = 0.577_215_664_901_532_9;
        let q = x * x / 4.0;
        let (mut i0, mut rest, mut term, mut h) = (0.0, 0.0, 1.0, 0.0);
        for k in 0..60 {
            if k > 0 {
                term *= q / (k as f64 * k as f64);
                h += 1.0 / k as f64;
            }
            i0 += term;
            rest += term * h;
        }
        -((x / 2.0).ln() + gamma_e) * i0 + rest
    }

    #[test]
    fn ratio_examples() {
        let e = PathwayModel::gen_gamma(1.0, 1.0, 1.0).unwrap();
        let spec = ConvolutionSpec::ratio(e, e);
        for (u, want) in [(1.0, 0.25), (3.0, 1.0 / 16.0)] {
            let r = ratio_density_quad(&spec, u, &cfg()).unwrap();
            assert!((r.value - want).abs() < 1e-10, "u={u}");
        }
        assert!(matches!(product_density_quad(&spec, 1.0, &cfg()), Err(Error::PatternMismatch(_))));
    }

    #[test]
    fn edge_singularities_are_resolved() {
        // beta < 1 on both type-1 factors puts integrable spikes at the domain ends
        let f1 = PathwayModel::type1_beta(1.3, 0.6, 1.0, 1.0).unwrap();
        let f2 = PathwayModel::type1_beta(0.8, 0.7, 1.0, 1.0).unwrap();
        let spec = ConvolutionSpec::product(f1, f2);
        let r = product_density_quad(&spec, 0.4, &cfg()).unwrap();
        assert!(r.error < 1e-8 * r.value.max(1.0));
        assert!(r.diagnostics.subdivisions < 2000);
    }
}
