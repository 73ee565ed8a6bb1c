//! Double-double arithmetic with exp, ln, sin(πx) and Γ.
//!
//! Used where two large series cancel and the coefficients must be known to
//! well beyond one ulp.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub};

/// hi + lo with |lo| ≤ ulp(hi)/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct D {
    hi: f64,
    lo: f64,
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl D {
    pub const ZERO: D = D { hi: 0.0, lo: 0.0 };
    pub const ONE: D = D { hi: 1.0, lo: 0.0 };
    const LN_2: D = D { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };
    const PI: D = D { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };

    #[cfg(test)]
    pub fn new(hi: f64, lo: f64) -> D {
        let (hi, lo) = two_sum(hi, lo);
        D { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl From<f64> for D {
    fn from(x: f64) -> D {
        D { hi: x, lo: 0.0 }
    }
}

impl Add for D {
    type Output = D;
    fn add(self, o: D) -> D {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        D { hi, lo }
    }
}

impl Add<f64> for D {
    type Output = D;
    fn add(self, o: f64) -> D {
        let (s, e) = two_sum(self.hi, o);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        D { hi, lo }
    }
}

impl Neg for D {
    type Output = D;
    fn neg(self) -> D {
        D { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for D {
    type Output = D;
    fn sub(self, o: D) -> D {
        self + (-o)
    }
}

impl Sub<f64> for D {
    type Output = D;
    fn sub(self, o: f64) -> D {
        self + (-o)
    }
}

impl Mul for D {
    type Output = D;
    fn mul(self, o: D) -> D {
        let (p, e) = two_prod(self.hi, o.hi);
        let e = e + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        D { hi, lo }
    }
}

impl Mul<f64> for D {
    type Output = D;
    fn mul(self, o: f64) -> D {
        let (p, e) = two_prod(self.hi, o);
        let (hi, lo) = quick_two_sum(p, e + self.lo * o);
        D { hi, lo }
    }
}

impl Div for D {
    type Output = D;
    fn div(self, o: D) -> D {
        let q1 = self.hi / o.hi;
        let r = self - o * q1;
        let q2 = r.hi / o.hi;
        let r = r - o * q2;
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        D { hi, lo } + q3
    }
}

impl Div<f64> for D {
    type Output = D;
    fn div(self, o: f64) -> D {
        self / D::from(o)
    }
}

impl AddAssign for D {
    fn add_assign(&mut self, o: D) {
        *self = *self + o;
    }
}

impl MulAssign for D {
    fn mul_assign(&mut self, o: D) {
        *self = *self * o;
    }
}

const EXP_HALVINGS: i32 = 10;
const STIRLING_FROM: f64 = 40.0;

/// B_2k for k = 1..=12 as numerator/denominator.
const BERNOULLI: [(f64, f64); 12] = [
    (1.0, 6.0),
    (-1.0, 30.0),
    (1.0, 42.0),
    (-1.0, 30.0),
    (5.0, 66.0),
    (-691.0, 2730.0),
    (7.0, 6.0),
    (-3617.0, 510.0),
    (43867.0, 798.0),
    (-174611.0, 330.0),
    (854513.0, 138.0),
    (-236364091.0, 2730.0),
];

fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

pub(crate) fn exp(x: D) -> D {
    if x.hi() > 709.8 {
        return D::from(f64::INFINITY);
    }
    if x.hi() < -745.0 {
        return D::ZERO;
    }
    let k = (x.hi() / D::LN_2.hi()).round();
    let r = (x - D::LN_2 * k) * pow2(-EXP_HALVINGS);
    let mut term = D::ONE;
    let mut sum = D::ONE;
    for n in 1..=14 {
        term = term * r / n as f64;
        sum += term;
    }
    for _ in 0..EXP_HALVINGS {
        sum = sum * sum;
    }
    // split the power of two so neither factor overflows
    let k = k as i32;
    sum * pow2(k / 2) * pow2(k - k / 2)
}

pub(crate) fn ln(x: D) -> D {
    let mut y = D::from(x.hi().ln());
    for _ in 0..2 {
        y = y + x * exp(-y) - 1.0;
    }
    y
}

/// sin(πx).
pub(crate) fn sin_pi(x: D) -> D {
    let n = x.hi().round();
    let r = x - n;
    let pr = D::PI * r;
    let p2 = pr * pr;
    let mut term = pr;
    let mut sum = pr;
    for k in 1..=22 {
        term = -term * p2 / ((2 * k) * (2 * k + 1)) as f64;
        sum += term;
    }
    if n % 2.0 == 0.0 {
        sum
    } else {
        -sum
    }
}

fn ln_gamma_large(y: D) -> D {
    let half_ln_2pi = ln(D::PI * 2.0) * 0.5;
    let inv = D::ONE / y;
    let inv2 = inv * inv;
    let mut pw = inv;
    let mut series = D::ZERO;
    for (k, &(num, den)) in BERNOULLI.iter().enumerate() {
        let k2 = 2.0 * (k + 1) as f64;
        series += pw * (D::from(num) / (den * k2 * (k2 - 1.0)));
        pw *= inv2;
    }
    (y - 0.5) * ln(y) - y + half_ln_2pi + series
}

/// Γ(x), None at the poles and past the f64 range.
pub(crate) fn gamma(x: D) -> Option<D> {
    if x.hi() <= 0.0 && x.hi() == x.hi().round() && x.lo == 0.0 {
        return None;
    }
    if x.hi() < 0.5 {
        // Γ(x) = π / (sin(πx) Γ(1 − x))
        let g = gamma(D::ONE - x)?;
        let v = D::PI / (sin_pi(x) * g);
        return v.hi().is_finite().then_some(v);
    }
    if x.hi() > 171.0 {
        return None;
    }
    let mut y = x;
    let mut prod = D::ONE;
    while y.hi() < STIRLING_FROM {
        prod *= y;
        y = y + 1.0;
    }
    let v = exp(ln_gamma_large(y)) / prod;
    v.hi().is_finite().then_some(v)
}
