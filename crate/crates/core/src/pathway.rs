//! The three pathway density families: generalized type-1 beta, type-2 beta
//! and gamma, all written with a power map y = a·x^delta.

use crate::error::{Error, Result};
use crate::expr::{GammaExpr, GammaFactor};
use crate::special::ln_gamma_pos;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Gamma};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Type1Beta,
    Type2Beta,
    GenGamma,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Type1Beta => "Type1Beta",
            Family::Type2Beta => "Type2Beta",
            Family::GenGamma => "GenGamma",
        })
    }
}

/// Open interval of real s on which a Mellin transform converges.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Strip {
    pub lower: f64,
    pub upper: f64,
}

impl Strip {
    pub fn new(lower: f64, upper: f64) -> Result<Strip> {
        if lower < upper {
            Ok(Strip { lower, upper })
        } else {
            Err(Error::EmptyStrip)
        }
    }

    pub fn contains(&self, s: f64) -> bool {
        self.lower < s && s < self.upper
    }

    pub fn intersect(&self, other: &Strip) -> Result<Strip> {
        Strip::new(self.lower.max(other.lower), self.upper.min(other.upper))
    }

    /// Image under s -> 2 - s.
    pub fn reflect(&self) -> Strip {
        Strip { lower: 2.0 - self.upper, upper: 2.0 - self.lower }
    }

    /// Default contour abscissa: the midpoint, or one unit inside a finite end.
    pub fn abscissa(&self) -> f64 {
        match (self.lower.is_finite(), self.upper.is_finite()) {
            (true, true) => 0.5 * (self.lower + self.upper),
            (true, false) => self.lower + 1.0,
            (false, true) => self.upper - 1.0,
            (false, false) => 0.0,
        }
    }
}

impl fmt::Display for Strip {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = |x: f64| {
            if x == f64::INFINITY {
                "∞".to_string()
            } else if x == f64::NEG_INFINITY {
                "−∞".to_string()
            } else {
                format!("{x}")
            }
        };
        write!(f, "({}, {})", end(self.lower), end(self.upper))
    }
}

#[derive(Deserialize)]
struct RawModel {
    family: Family,
    alpha: f64,
    #[serde(default)]
    beta: Option<f64>,
    a: f64,
    delta: f64,
}

impl TryFrom<RawModel> for PathwayModel {
    type Error = Error;
    fn try_from(r: RawModel) -> Result<Self> {
        PathwayModel::new(r.family, r.alpha, r.beta, r.a, r.delta)
    }
}

/// A validated pathway model. The density carries x^(alpha-1).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct PathwayModel {
    pub family: Family,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub a: f64,
    pub delta: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("{name} must be positive and finite, got {v}")))
    }
}

fn softplus(w: f64) -> f64 {
    w.max(0.0) + (-w.abs()).exp().ln_1p()
}

/// c·l with 0·(±∞) = 0.
fn xlogy(c: f64, l: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * l
    }
}

impl PathwayModel {
    pub fn new(family: Family, alpha: f64, beta: Option<f64>, a: f64, delta: f64) -> Result<Self> {
        positive("alpha", alpha)?;
        positive("a", a)?;
        positive("delta", delta)?;
        match (family, beta) {
            (Family::GenGamma, None) => {}
            (Family::GenGamma, Some(_)) => {
                return Err(Error::InvalidModel("GenGamma takes no beta".into()))
            }
            (_, Some(b)) => positive("beta", b)?,
            (_, None) => return Err(Error::InvalidModel(format!("{family} needs beta"))),
        }
        Ok(PathwayModel { family, alpha, beta, a, delta })
    }

    pub fn gen_gamma(alpha: f64, a: f64, delta: f64) -> Result<Self> {
        Self::new(Family::GenGamma, alpha, None, a, delta)
    }

    pub fn type1_beta(alpha: f64, beta: f64, a: f64, delta: f64) -> Result<Self> {
        Self::new(Family::Type1Beta, alpha, Some(beta), a, delta)
    }

    pub fn type2_beta(alpha: f64, beta: f64, a: f64, delta: f64) -> Result<Self> {
        Self::new(Family::Type2Beta, alpha, Some(beta), a, delta)
    }

    /// beta, or 0 for GenGamma.
    pub fn beta_or_zero(&self) -> f64 {
        self.beta.unwrap_or(0.0)
    }

    /// a == 1 and delta == 1.
    pub fn is_standard(&self) -> bool {
        self.a == 1.0 && self.delta == 1.0
    }

    /// Log of the normalizing constant.
    pub fn ln_norm(&self) -> f64 {
        let (al, a, d) = (self.alpha, self.a, self.delta);
        let base = d.ln() + (al / d) * a.ln() - ln_gamma_pos(al / d);
        match self.family {
            Family::GenGamma => base,
            Family::Type1Beta | Family::Type2Beta => {
                let b = self.beta_or_zero();
                base + ln_gamma_pos(al / d + b) - ln_gamma_pos(b)
            }
        }
    }

    /// Right end of the support, infinite except for Type1Beta.
    pub fn support_upper(&self) -> f64 {
        match self.family {
            Family::Type1Beta => self.a.powf(-1.0 / self.delta),
            _ => f64::INFINITY,
        }
    }

    /// ln of [`Self::support_upper`].
    pub fn ln_support_upper(&self) -> f64 {
        match self.family {
            Family::Type1Beta => -self.a.ln() / self.delta,
            _ => f64::INFINITY,
        }
    }

    /// ln f(e^y).
    pub fn ln_pdf_log(&self, y: f64) -> f64 {
        let w = self.a.ln() + self.delta * y;
        let c = self.ln_norm() + xlogy(self.alpha - 1.0, y);
        match self.family {
            Family::GenGamma => c - w.exp(),
            Family::Type2Beta => c - (self.alpha / self.delta + self.beta_or_zero()) * softplus(w),
            Family::Type1Beta => {
                if w >= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    c + xlogy(self.beta_or_zero() - 1.0, (-w.exp_m1()).ln())
                }
            }
        }
    }

    /// ln f(e^y) given the exact distance `gap` = ln(support_upper) − y, which
    /// keeps the type-1 edge factor accurate when y is close to the edge.
    pub fn ln_pdf_log_gap(&self, y: f64, gap: f64) -> f64 {
        match self.family {
            Family::Type1Beta => {
                if gap <= 0.0 {
                    return if self.beta_or_zero() == 1.0 && gap == 0.0 {
                        self.ln_norm() + xlogy(self.alpha - 1.0, y)
                    } else {
                        f64::NEG_INFINITY
                    };
                }
                let w = -self.delta * gap;
                self.ln_norm()
                    + xlogy(self.alpha - 1.0, y)
                    + xlogy(self.beta_or_zero() - 1.0, (-w.exp_m1()).ln())
            }
            _ => self.ln_pdf_log(y),
        }
    }

    /// ln f(x); −∞ off the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 || x.is_nan() {
            return f64::NEG_INFINITY;
        }
        self.ln_pdf_log(x.ln())
    }

    /// Density at x, 0 off the support.
    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// Mellin transform as a gamma-factor expression.
    pub fn mellin_transform(&self) -> GammaExpr {
        let (al, a, d) = (self.alpha, self.a, self.delta);
        let inv = 1.0 / d;
        let lead = GammaFactor::new((al - 1.0) * inv, inv);
        let scale = a.powf(inv);
        let strip = self.strip();
        match self.family {
            Family::GenGamma => {
                let lc = inv * a.ln() - ln_gamma_pos(al * inv);
                GammaExpr::from_parts(lc, scale, vec![lead], vec![], strip)
            }
            Family::Type2Beta => {
                let b = self.beta_or_zero();
                let lc = inv * a.ln() - ln_gamma_pos(al * inv) - ln_gamma_pos(b);
                let tail = GammaFactor::new(b + inv, -inv);
                GammaExpr::from_parts(lc, scale, vec![lead, tail], vec![], strip)
            }
            Family::Type1Beta => {
                let b = self.beta_or_zero();
                let lc = inv * a.ln() + ln_gamma_pos(al * inv + b) - ln_gamma_pos(al * inv);
                let den = GammaFactor::new(al * inv + b - inv, inv);
                GammaExpr::from_parts(lc, scale, vec![lead], vec![den], strip)
            }
        }
    }

    pub fn strip(&self) -> Strip {
        let lower = 1.0 - self.alpha;
        let upper = match self.family {
            Family::Type2Beta => self.beta_or_zero() * self.delta + 1.0,
            _ => f64::INFINITY,
        };
        Strip { lower, upper }
    }

    /// E[x^k] for k > −alpha (and k < beta·delta for Type2Beta).
    pub fn moment(&self, k: f64) -> Result<f64> {
        self.mellin_transform().eval(k + 1.0)
    }

    /// n draws from `rng`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        let shape = self.alpha / self.delta;
        let p = 1.0 / self.delta;
        let a = self.a;
        let map = move |y: f64| (y / a).powf(p);
        match self.family {
            Family::GenGamma => {
                let g = Gamma::new(shape, 1.0).expect("valid shape");
                (0..n).map(|_| map(g.sample(rng))).collect()
            }
            Family::Type2Beta => {
                let g1 = Gamma::new(shape, 1.0).expect("valid shape");
                let g2 = Gamma::new(self.beta_or_zero(), 1.0).expect("valid shape");
                (0..n).map(|_| map(g1.sample(rng) / g2.sample(rng))).collect()
            }
            Family::Type1Beta => {
                let b = Beta::new(shape, self.beta_or_zero()).expect("valid shape");
                (0..n).map(|_| map(b.sample(rng))).collect()
            }
        }
    }

    /// n i.i.d. draws, deterministic in `seed`.
    pub fn sample(&self, seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }
}

impl fmt::Display for PathwayModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.beta {
            Some(b) => write!(f, "{}(alpha={}, beta={}, a={}, delta={})", self.family, self.alpha, b, self.a, self.delta),
            None => write!(f, "{}(alpha={}, a={}, delta={})", self.family, self.alpha, self.a, self.delta),
        }
    }
}
