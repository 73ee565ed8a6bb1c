//! Mellin transforms in gamma-factor normal form
//! C·z^(−s)·Π Γ(a_i + b_i s) / Π Γ(c_j + d_j s), and the operations on them.

use crate::error::{Error, Result};
use crate::pathway::{PathwayModel, Strip};
use crate::special::gamma_signed;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Pole tolerance used when comparing pole positions.
pub const POLE_TOL: f64 = 1e-9;
const COLLISION_DEPTH: usize = 50;

/// Γ(offset + slope·s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaFactor {
    pub offset: f64,
    pub slope: f64,
}

impl GammaFactor {
    pub fn new(offset: f64, slope: f64) -> Self {
        GammaFactor { offset, slope }
    }

    pub fn arg(&self, s: f64) -> f64 {
        self.offset + self.slope * s
    }

    /// The factor seen from s -> 2 − s.
    pub fn reflect(&self) -> Self {
        GammaFactor { offset: self.offset + 2.0 * self.slope, slope: -self.slope }
    }

    /// ν-th pole in s: offset + slope·s = −ν.
    pub fn pole(&self, nu: usize) -> f64 {
        -(self.offset + nu as f64) / self.slope
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaExpr {
    /// ln C.
    pub ln_constant: f64,
    /// z in z^(−s).
    pub scale: f64,
    pub num: Vec<GammaFactor>,
    pub den: Vec<GammaFactor>,
    pub strip: Strip,
}

impl GammaExpr {
    /// Validated constructor; the strip is taken from the numerator poles.
    pub fn new(constant: f64, scale: f64, num: Vec<GammaFactor>, den: Vec<GammaFactor>) -> Result<Self> {
        if !(constant > 0.0) || !(scale > 0.0) {
            return Err(Error::Domain(format!("constant {constant} and scale {scale} must be positive")));
        }
        if num.iter().chain(&den).any(|f| f.slope == 0.0 || !f.slope.is_finite()) {
            return Err(Error::Domain("gamma factor slopes must be nonzero".into()));
        }
        let strip = natural_strip(&num)?;
        Ok(Self::from_parts(constant.ln(), scale, num, den, strip))
    }

    pub(crate) fn from_parts(
        ln_constant: f64,
        scale: f64,
        num: Vec<GammaFactor>,
        den: Vec<GammaFactor>,
        strip: Strip,
    ) -> Self {
        GammaExpr { ln_constant, scale, num, den, strip }
    }

    pub fn constant(&self) -> f64 {
        self.ln_constant.exp()
    }

    /// Value at s as (sign, ln|value|), ignoring the strip.
    pub fn ln_eval_unchecked(&self, s: f64) -> Result<(f64, f64)> {
        let mut sign = 1.0;
        let mut l = self.ln_constant - s * self.scale.ln();
        for f in &self.num {
            let (g, lg) = gamma_signed(f.arg(s))?;
            sign *= g;
            l += lg;
        }
        for f in &self.den {
            match gamma_signed(f.arg(s)) {
                Ok((g, lg)) => {
                    sign *= g;
                    l -= lg;
                }
                Err(Error::Pole(_)) => return Ok((0.0, f64::NEG_INFINITY)),
                Err(e) => return Err(e),
            }
        }
        Ok((sign, l))
    }

    /// Value at s inside the strip.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if !self.strip.contains(s) {
            return Err(Error::OutOfStrip { s, lower: self.strip.lower, upper: self.strip.upper });
        }
        let (sign, l) = self.ln_eval_unchecked(s)?;
        Ok(sign * l.exp())
    }

    /// Transform of the product of the two underlying variables.
    pub fn product(&self, other: &GammaExpr) -> Result<GammaExpr> {
        let strip = self.strip.intersect(&other.strip)?;
        Ok(GammaExpr {
            ln_constant: self.ln_constant + other.ln_constant,
            scale: self.scale * other.scale,
            num: self.num.iter().chain(&other.num).copied().collect(),
            den: self.den.iter().chain(&other.den).copied().collect(),
            strip,
        })
    }

    /// s -> 2 − s.
    pub fn reflect(&self) -> GammaExpr {
        GammaExpr {
            ln_constant: self.ln_constant - 2.0 * self.scale.ln(),
            scale: 1.0 / self.scale,
            num: self.num.iter().map(GammaFactor::reflect).collect(),
            den: self.den.iter().map(GammaFactor::reflect).collect(),
            strip: self.strip.reflect(),
        }
    }

    /// Transform of x2/x1, where `self` belongs to x2 and `den` to x1.
    pub fn ratio(&self, den: &GammaExpr) -> Result<GammaExpr> {
        self.product(&den.reflect())
    }

    /// Signed slope balance μ = Σ b − Σ d.
    pub fn mu(&self) -> f64 {
        self.num.iter().map(|f| f.slope).sum::<f64>() - self.den.iter().map(|f| f.slope).sum::<f64>()
    }

    /// Absolute slope balance κ = Σ|b| − Σ|d|; sets the decay on vertical lines.
    pub fn kappa(&self) -> f64 {
        self.num.iter().map(|f| f.slope.abs()).sum::<f64>()
            - self.den.iter().map(|f| f.slope.abs()).sum::<f64>()
    }

    /// ln ρ, with ρ the radius of convergence of the residue series when μ = 0.
    pub fn ln_radius(&self) -> f64 {
        let t = |f: &GammaFactor| f.slope * f.slope.abs().ln();
        self.num.iter().map(t).sum::<f64>() - self.den.iter().map(t).sum::<f64>()
    }

    /// z·u/ρ: below 1 the left residue series converges, above 1 the right one.
    pub fn effective_argument(&self, u: f64) -> f64 {
        (self.scale.ln() + u.ln() - self.ln_radius()).exp()
    }

    pub fn poles(&self) -> PoleSet {
        PoleSet::of(self)
    }

    /// H-function parameters for the kernel Π Γ(b_j+B_j s)·Π Γ(1−a_j−A_j s)·z^(−s).
    pub fn to_h_function(&self) -> HFunctionParams {
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        for f in &self.num {
            if f.slope > 0.0 {
                lower.push((f.offset, f.slope));
            } else {
                upper.push((1.0 - f.offset, -f.slope));
            }
        }
        let (m, n) = (lower.len(), upper.len());
        for f in &self.den {
            if f.slope > 0.0 {
                upper.push((f.offset, f.slope));
            } else {
                lower.push((1.0 - f.offset, -f.slope));
            }
        }
        HFunctionParams {
            m,
            n,
            p: upper.len(),
            q: lower.len(),
            upper,
            lower,
            prefactor: self.constant(),
            argument_scale: self.scale,
        }
    }
}

/// Strip bounded by the first pole of every numerator factor.
pub fn natural_strip(num: &[GammaFactor]) -> Result<Strip> {
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for f in num {
        let s0 = f.pole(0);
        if f.slope > 0.0 {
            lower = lower.max(s0);
        } else {
            upper = upper.min(s0);
        }
    }
    Strip::new(lower, upper)
}

fn fmt_num(x: f64) -> String {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{r}").replace('-', "−")
    }
}

impl fmt::Display for GammaFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let slope = match self.slope.abs() {
            b if b == 1.0 => "s".to_string(),
            b => format!("{}s", fmt_num(b)),
        };
        if self.offset == 0.0 {
            let sign = if self.slope < 0.0 { "−" } else { "" };
            write!(f, "Γ({sign}{slope})")
        } else {
            let sign = if self.slope < 0.0 { "−" } else { "+" };
            write!(f, "Γ({}{sign}{slope})", fmt_num(self.offset))
        }
    }
}

impl fmt::Display for GammaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.ln_constant.abs() > 1e-14 {
            write!(f, "{}·", fmt_num(self.constant()))?;
        }
        if self.num.is_empty() {
            f.write_str("1")?;
        }
        for g in &self.num {
            write!(f, "{g}")?;
        }
        if !self.den.is_empty() {
            f.write_str("/[")?;
            for g in &self.den {
                write!(f, "{g}")?;
            }
            f.write_str("]")?;
        }
        if (self.scale - 1.0).abs() < 1e-14 {
            f.write_str("·u^{−s}")
        } else {
            write!(f, "·({}u)^{{−s}}", fmt_num(self.scale))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Product,
    Ratio,
}

/// Two independent pathway variables combined as u = x1·x2 or u = x2/x1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionSpec {
    pub kind: Kind,
    pub f1: PathwayModel,
    pub f2: PathwayModel,
}

impl ConvolutionSpec {
    pub fn product(f1: PathwayModel, f2: PathwayModel) -> Self {
        ConvolutionSpec { kind: Kind::Product, f1, f2 }
    }

    /// u = x2/x1 with f1 the density of the denominator x1.
    pub fn ratio(f1: PathwayModel, f2: PathwayModel) -> Self {
        ConvolutionSpec { kind: Kind::Ratio, f1, f2 }
    }

    /// Mellin transform of the density of u.
    pub fn transform(&self) -> Result<GammaExpr> {
        let m1 = self.f1.mellin_transform();
        let m2 = self.f2.mellin_transform();
        match self.kind {
            Kind::Product => m1.product(&m2),
            Kind::Ratio => m2.ratio(&m1),
        }
    }

    /// Upper end of the support of u.
    pub fn support_upper(&self) -> f64 {
        match self.kind {
            Kind::Product => self.f1.support_upper() * self.f2.support_upper(),
            Kind::Ratio => f64::INFINITY,
        }
    }
}

/// Mellin–Barnes parameters (m, n, p, q) with upper pairs (a_j, A_j) and lower
/// pairs (b_j, B_j).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HFunctionParams {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
    pub upper: Vec<(f64, f64)>,
    pub lower: Vec<(f64, f64)>,
    pub prefactor: f64,
    pub argument_scale: f64,
}

impl HFunctionParams {
    /// True when every A_j and B_j is 1, i.e. a Meijer G-function.
    pub fn is_g_function(&self) -> bool {
        self.upper.iter().chain(&self.lower).all(|p| (p.1 - 1.0).abs() < 1e-14)
    }

    /// The gamma-factor expression of the Mellin–Barnes kernel.
    pub fn to_gamma_expr(&self) -> Result<GammaExpr> {
        if self.upper.len() != self.p || self.lower.len() != self.q || self.m > self.q || self.n > self.p {
            return Err(Error::Domain("inconsistent H-function indices".into()));
        }
        let mut num = Vec::new();
        let mut den = Vec::new();
        for (j, &(b, bb)) in self.lower.iter().enumerate() {
            if j < self.m {
                num.push(GammaFactor::new(b, bb));
            } else {
                den.push(GammaFactor::new(1.0 - b, -bb));
            }
        }
        for (j, &(a, aa)) in self.upper.iter().enumerate() {
            if j < self.n {
                num.push(GammaFactor::new(1.0 - a, -aa));
            } else {
                den.push(GammaFactor::new(a, aa));
            }
        }
        GammaExpr::new(self.prefactor, self.argument_scale, num, den)
    }
}

impl fmt::Display for HFunctionParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = self.is_g_function();
        let pairs = |v: &[(f64, f64)]| {
            v.iter()
                .map(|&(x, w)| if g { fmt_num(x) } else { format!("({}, {})", fmt_num(x), fmt_num(w)) })
                .collect::<Vec<_>>()
                .join(", ")
        };
        let arg = if (self.argument_scale - 1.0).abs() < 1e-14 {
            "u".to_string()
        } else {
            format!("{}u", fmt_num(self.argument_scale))
        };
        let pre = if (self.prefactor - 1.0).abs() < 1e-14 {
            String::new()
        } else {
            format!("{}·", fmt_num(self.prefactor))
        };
        write!(
            f,
            "{pre}{}^{{{},{}}}_{{{},{}}}[{arg} | upper: {}; lower: {}]",
            if g { "G" } else { "H" },
            self.m,
            self.n,
            self.p,
            self.q,
            pairs(&self.upper),
            pairs(&self.lower)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleSide {
    Left,
    Right,
}

/// The poles of one numerator factor: s_ν = −(offset + ν)/slope, ν = 0, 1, …
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleSequence {
    pub factor_index: usize,
    pub factor: GammaFactor,
}

impl PoleSequence {
    pub fn nth(&self, nu: usize) -> f64 {
        self.factor.pole(nu)
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..).map(move |nu| self.nth(nu))
    }

    /// Index ν with s_ν = s, if any.
    pub fn index_of(&self, s: f64) -> Option<usize> {
        let nu = -(self.factor.offset + self.factor.slope * s);
        let r = nu.round();
        (r >= 0.0 && (nu - r).abs() * (1.0 / self.factor.slope.abs()) < POLE_TOL).then_some(r as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Collision {
    pub side: PoleSide,
    pub first: usize,
    pub second: usize,
    pub s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleSet {
    pub left: Vec<PoleSequence>,
    pub right: Vec<PoleSequence>,
    pub collisions: Vec<Collision>,
}

impl PoleSet {
    fn of(expr: &GammaExpr) -> PoleSet {
        let mut left = Vec::new();
        let mut right = Vec::new();
        for (i, f) in expr.num.iter().enumerate() {
            let seq = PoleSequence { factor_index: i, factor: *f };
            if f.slope > 0.0 {
                left.push(seq);
            } else {
                right.push(seq);
            }
        }
        let mut collisions = Vec::new();
        for (side, seqs) in [(PoleSide::Left, &left), (PoleSide::Right, &right)] {
            for (i, a) in seqs.iter().enumerate() {
                for b in &seqs[i + 1..] {
                    let hit = (0..=COLLISION_DEPTH)
                        .map(|nu| a.nth(nu))
                        .find(|&s| b.index_of(s).is_some_and(|k| k <= COLLISION_DEPTH));
                    if let Some(s) = hit {
                        collisions.push(Collision { side, first: a.factor_index, second: b.factor_index, s });
                    }
                }
            }
        }
        PoleSet { left, right, collisions }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::log_gamma;

    fn g(o: f64, b: f64) -> GammaFactor {
        GammaFactor::new(o, b)
    }

    #[test]
    fn eval_examples() {
        let e = GammaExpr::new(1.0, 1.0, vec![g(0.0, 1.0)], vec![]).unwrap();
        assert!((e.eval(5.0).unwrap() - 24.0).abs() < 1e-12);
        let e = GammaExpr::new(1.0, 1.0, vec![g(0.0, 1.0), g(2.0, -1.0)], vec![]).unwrap();
        assert!((e.eval(1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(e.eval(2.5), Err(Error::OutOfStrip { .. })));
        let m = PathwayModel::type2_beta(2.0, 3.0, 1.0, 1.0).unwrap();
        assert!((m.mellin_transform().eval(1.0).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn model_transforms() {
        let e = PathwayModel::gen_gamma(1.0, 1.0, 1.0).unwrap().mellin_transform();
        assert_eq!(e.num, vec![g(0.0, 1.0)]);
        assert!(e.den.is_empty());
        assert_eq!(e.strip, Strip { lower: 0.0, upper: f64::INFINITY });
        let u = PathwayModel::type1_beta(1.0, 1.0, 1.0, 1.0).unwrap().mellin_transform();
        for s in [0.3, 1.0, 2.5] {
            assert!((u.eval(s).unwrap() - 1.0 / s).abs() < 1e-14);
        }
        let t = PathwayModel::type2_beta(1.0, 1.0, 1.0, 1.0).unwrap().mellin_transform();
        assert_eq!(t.strip, Strip { lower: 0.0, upper: 2.0 });
        let want = (log_gamma(1.5).unwrap() + log_gamma(0.5).unwrap()).exp();
        assert!((t.eval(1.5).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn product_and_strips() {
        let e = GammaExpr::new(1.0, 1.0, vec![g(0.0, 1.0)], vec![]).unwrap();
        let sq = e.product(&e).unwrap();
        assert_eq!(sq.num.len(), 2);
        assert_eq!(sq.strip, Strip { lower: 0.0, upper: f64::INFINITY });
        let a = Strip { lower: 0.0, upper: 2.0 };
        let b = Strip { lower: 1.0, upper: 3.0 };
        assert_eq!(a.intersect(&b).unwrap(), Strip { lower: 1.0, upper: 2.0 });
        assert_eq!(a.intersect(&Strip { lower: 2.5, upper: 3.0 }), Err(Error::EmptyStrip));
    }

    #[test]
    fn product_of_type2_beta_and_gamma_structure() {
        // type-2 beta std (problem alpha 0, beta 2) times gamma (rho 1, a 1)
        let f1 = PathwayModel::type2_beta(1.0, 2.0, 1.0, 1.0).unwrap();
        let f2 = PathwayModel::gen_gamma(2.0, 1.0, 1.0).unwrap();
        let e = ConvolutionSpec::product(f1, f2).transform().unwrap();
        assert_eq!(e.num, vec![g(0.0, 1.0), g(3.0, -1.0), g(1.0, 1.0)]);
        assert_eq!(e.to_string(), "Γ(s)Γ(3−s)Γ(1+s)·u^{−s}");
    }

    #[test]
    fn ratio_of_exponentials() {
        let e1 = PathwayModel::gen_gamma(1.0, 1.0, 1.0).unwrap();
        let r = ConvolutionSpec::ratio(e1, e1).transform().unwrap();
        assert_eq!(r.num, vec![g(0.0, 1.0), g(2.0, -1.0)]);
        assert_eq!(r.strip, Strip { lower: 0.0, upper: 2.0 });
        assert_eq!(r.to_string(), "Γ(s)Γ(2−s)·u^{−s}");
        let back = GammaExpr::new(1.0, 1.0, vec![g(2.0, -1.0)], vec![]).unwrap().reflect();
        assert_eq!(back.num, vec![g(0.0, 1.0)]);
    }

    #[test]
    fn reflection_preserves_eval() {
        let e = GammaExpr::new(1.7, 0.6, vec![g(0.4, 0.8), g(2.1, -0.5)], vec![g(1.3, 0.4)]).unwrap();
        let r = e.reflect();
        let s = 0.7;
        assert!(r.strip.contains(s) && e.strip.contains(2.0 - s));
        let (a, b) = (r.eval(s).unwrap(), e.eval(2.0 - s).unwrap());
        assert!((a - b).abs() < 1e-13 * b.abs());
    }

    #[test]
    fn h_function_examples() {
        let e = GammaExpr::new(1.0, 1.0, vec![g(0.0, 1.0), g(2.0, -1.0)], vec![]).unwrap();
        let h = e.to_h_function();
        assert_eq!((h.m, h.n, h.p, h.q), (1, 1, 1, 1));
        assert_eq!(h.lower, vec![(0.0, 1.0)]);
        assert_eq!(h.upper, vec![(-1.0, 1.0)]);
        assert!(h.is_g_function());

        // P2_7 shape with delta = 2: lower (alpha_j/delta, 1/delta), upper (1−beta_j−1/delta, 1/delta)
        let d = 2.0;
        let (a1, b1, a2, b2) = (0.3, 1.4, 0.9, 2.2);
        let f1 = PathwayModel::type2_beta(a1 + 1.0, b1, 1.0, d).unwrap();
        let f2 = PathwayModel::type2_beta(a2 + 1.0, b2, 1.0, d).unwrap();
        let h = ConvolutionSpec::product(f1, f2).transform().unwrap().to_h_function();
        assert_eq!((h.m, h.n, h.p, h.q), (2, 2, 2, 2));
        let close = |x: (f64, f64), y: (f64, f64)| (x.0 - y.0).abs() < 1e-14 && (x.1 - y.1).abs() < 1e-14;
        assert!(close(h.lower[0], (a1 / d, 1.0 / d)) && close(h.lower[1], (a2 / d, 1.0 / d)));
        assert!(close(h.upper[0], (1.0 - b1 - 1.0 / d, 1.0 / d)));
        assert!(close(h.upper[1], (1.0 - b2 - 1.0 / d, 1.0 / d)));

        // type-2 beta times gamma reduces to G^{2,1}_{1,2}[au | −beta; alpha, rho]
        let (al, rho, be, a) = (0.4, 1.3, 2.0, 1.7);
        let f1 = PathwayModel::type2_beta(al + 1.0, be, 1.0, 1.0).unwrap();
        let f2 = PathwayModel::gen_gamma(rho + 1.0, a, 1.0).unwrap();
        let h = ConvolutionSpec::product(f1, f2).transform().unwrap().to_h_function();
        assert_eq!((h.m, h.n, h.p, h.q), (2, 1, 1, 2));
        assert!(close(h.upper[0], (-be, 1.0)));
        assert!(close(h.lower[0], (al, 1.0)) && close(h.lower[1], (rho, 1.0)));
        assert!((h.argument_scale - a).abs() < 1e-15);
    }

    #[test]
    fn h_with_denominators_matches_printed_g_symbol() {
        // two standard type-1 betas: G^{2,0}_{2,2}[u | alpha1+beta1, alpha2+beta2; alpha1, alpha2]
        let (a1, b1, a2, b2) = (0.2, 1.5, 0.7, 2.5);
        let f1 = PathwayModel::type1_beta(a1 + 1.0, b1, 1.0, 1.0).unwrap();
        let f2 = PathwayModel::type1_beta(a2 + 1.0, b2, 1.0, 1.0).unwrap();
        let h = ConvolutionSpec::product(f1, f2).transform().unwrap().to_h_function();
        assert_eq!((h.m, h.n, h.p, h.q), (2, 0, 2, 2));
        let low: Vec<f64> = h.lower.iter().map(|p| p.0).collect();
        assert!((low[0] - a1).abs() < 1e-14 && (low[1] - a2).abs() < 1e-14);
        let up: Vec<f64> = h.upper.iter().map(|p| p.0).collect();
        assert!((up[0] - (a1 + b1)).abs() < 1e-14 && (up[1] - (a2 + b2)).abs() < 1e-14);
    }

    #[test]
    fn poles_examples() {
        let e = GammaExpr::new(1.0, 1.0, vec![g(0.0, 1.0)], vec![]).unwrap();
        let p = e.poles();
        assert_eq!(p.left[0].iter().take(3).collect::<Vec<_>>(), vec![0.0, -1.0, -2.0]);
        assert!(p.right.is_empty() && p.collisions.is_empty());

        let e = GammaExpr::new(1.0, 1.0, vec![g(2.5, 1.0), g(0.5, 1.0)], vec![]).unwrap();
        assert_eq!(e.poles().collisions.len(), 1);
        let e = GammaExpr::new(1.0, 1.0, vec![g(2.5, 1.0), g(0.7, 1.0)], vec![]).unwrap();
        assert!(e.poles().collisions.is_empty());

        // Γ((alpha+s)/delta) with alpha 1, delta 2
        let e = GammaExpr::new(1.0, 1.0, vec![g(0.5, 0.5)], vec![]).unwrap();
        assert_eq!(e.poles().left[0].iter().take(3).collect::<Vec<_>>(), vec![-1.0, -3.0, -5.0]);
    }

    #[test]
    fn balance_quantities() {
        let e = GammaExpr::new(1.0, 3.0, vec![g(0.0, 1.0), g(2.0, -1.0)], vec![]).unwrap();
        assert_eq!(e.mu(), 0.0);
        assert_eq!(e.kappa(), 2.0);
        assert!((e.effective_argument(0.5) - 1.5).abs() < 1e-14);
    }
}
