//! Real matrix-variate gamma densities and symmetric products of SPD
//! matrices, checked by Monte Carlo.

use crate::error::{Error, Result};
use crate::result::{Backend, EvalResult};
use crate::sampling::substream;
use crate::special::log_gamma;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

const SYMMETRY_TOL: f64 = 1e-12;
const EIGEN_FLOOR: f64 = 1e-12;
/// Relative standard error above which an MC density estimate is refused.
pub const MAX_REL_SE: f64 = 0.05;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Symmetric positive definite matrix, serialized as row-major nested arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SpdMatrix(DMatrix<f64>);

impl SpdMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::NotSpd(format!("shape {}×{}", m.nrows(), m.ncols())));
        }
        let scale = m.amax().max(f64::MIN_POSITIVE);
        if (&m - m.transpose()).amax() > SYMMETRY_TOL * scale {
            return Err(Error::NotSpd("not symmetric".into()));
        }
        let lo = m.clone().symmetric_eigen().eigenvalues.min();
        if !(lo > 0.0) {
            return Err(Error::NotSpd(format!("smallest eigenvalue {lo:e}")));
        }
        Ok(SpdMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::NotSpd("rows of unequal length".into()));
        }
        SpdMatrix::new(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
    }

    pub fn identity(p: usize) -> Self {
        SpdMatrix(DMatrix::identity(p, p))
    }

    pub fn scaled_identity(p: usize, t: f64) -> Result<Self> {
        SpdMatrix::new(DMatrix::identity(p, p) * t)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.row_iter().map(|r| r.iter().copied().collect()).collect()
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn ln_det(&self) -> f64 {
        let c = self.0.clone().cholesky().expect("SPD");
        2.0 * c.l().diagonal().iter().map(|d| d.ln()).sum::<f64>()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn inverse(&self) -> SpdMatrix {
        let inv = self.0.clone().cholesky().expect("SPD").inverse();
        SpdMatrix(symmetrize(inv))
    }

    /// Spectral square root; eigenvalues below 1e-12 are rejected.
    pub fn sqrt(&self) -> Result<SpdMatrix> {
        self.spectral_power(0.5)
    }

    /// Spectral inverse square root.
    pub fn inv_sqrt(&self) -> Result<SpdMatrix> {
        self.spectral_power(-0.5)
    }

    fn spectral_power(&self, k: f64) -> Result<SpdMatrix> {
        let e = self.0.clone().symmetric_eigen();
        if let Some(&l) = e.eigenvalues.iter().find(|&&l| l < EIGEN_FLOOR) {
            return Err(Error::NotSpd(format!("eigenvalue {l:e} below floor")));
        }
        let d = DMatrix::from_diagonal(&e.eigenvalues.map(|l| l.powf(k)));
        Ok(SpdMatrix(symmetrize(&e.eigenvectors * d * e.eigenvectors.transpose())))
    }
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

impl TryFrom<Vec<Vec<f64>>> for SpdMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SpdMatrix::from_rows(&rows)
    }
}

impl From<SpdMatrix> for Vec<Vec<f64>> {
    fn from(m: SpdMatrix) -> Self {
        m.to_rows()
    }
}

/// ln Γ_p(α) = p(p−1)/4·ln π + Σ_k ln Γ(α − k/2).
pub fn ln_multivariate_gamma(alpha: f64, p: usize) -> Result<f64> {
    if p == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    if !(alpha > (p as f64 - 1.0) / 2.0) {
        return Err(Error::Domain(format!("Γ_{p}({alpha}) needs alpha > {}", (p as f64 - 1.0) / 2.0)));
    }
    let mut l = (p * (p - 1)) as f64 / 4.0 * LN_PI;
    for k in 0..p {
        l += log_gamma(alpha - k as f64 / 2.0)?;
    }
    Ok(l)
}

pub fn multivariate_gamma(alpha: f64, p: usize) -> Result<f64> {
    Ok(ln_multivariate_gamma(alpha, p)?.exp())
}

/// Density |B|^α/Γ_p(α)·|X|^(α−(p+1)/2)·exp(−tr(BX)) on SPD matrices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixGammaModel {
    pub alpha: f64,
    pub b: SpdMatrix,
}

impl MatrixGammaModel {
    pub fn new(alpha: f64, b: SpdMatrix) -> Result<Self> {
        let p = b.dim();
        if !(alpha > (p as f64 - 1.0) / 2.0) || !alpha.is_finite() {
            return Err(Error::InvalidModel(format!("alpha = {alpha} must exceed {}", (p as f64 - 1.0) / 2.0)));
        }
        Ok(MatrixGammaModel { alpha, b })
    }

    pub fn dim(&self) -> usize {
        self.b.dim()
    }

    pub fn ln_pdf(&self, x: &SpdMatrix) -> Result<f64> {
        let p = self.dim();
        if x.dim() != p {
            return Err(Error::DimensionMismatch { expected: p, found: x.dim() });
        }
        let ex = self.alpha - (p as f64 + 1.0) / 2.0;
        Ok(self.alpha * self.b.ln_det() - ln_multivariate_gamma(self.alpha, p)? + ex * x.ln_det()
            - (self.b.matrix() * x.matrix()).trace())
    }
}

/// Density at an arbitrary square matrix; 0 off the SPD cone.
pub fn matrix_gamma_pdf(model: &MatrixGammaModel, x: &DMatrix<f64>) -> Result<f64> {
    let p = model.dim();
    if x.nrows() != p || x.ncols() != p {
        return Err(Error::DimensionMismatch { expected: p, found: x.nrows() });
    }
    match SpdMatrix::new(x.clone()) {
        Ok(x) => Ok(model.ln_pdf(&x)?.exp()),
        Err(_) => Ok(0.0),
    }
}

fn draw_one<R: Rng + ?Sized>(model: &MatrixGammaModel, l: &DMatrix<f64>, rng: &mut R) -> SpdMatrix {
    let p = model.dim();
    let mut t = DMatrix::<f64>::zeros(p, p);
    for i in 0..p {
        let shape = model.alpha - i as f64 / 2.0;
        let g: f64 = Gamma::new(shape, 1.0).expect("valid shape").sample(rng);
        t[(i, i)] = g.sqrt();
        for j in 0..i {
            let z: f64 = StandardNormal.sample(rng);
            t[(i, j)] = z * std::f64::consts::FRAC_1_SQRT_2;
        }
    }
    let lt = l * t;
    SpdMatrix(symmetrize(&lt * lt.transpose()))
}

/// Bartlett draws: X = L·T·Tᵀ·Lᵀ with L the Cholesky factor of B⁻¹.
pub fn sample_matrix_gamma(model: &MatrixGammaModel, seed: u64, n: usize) -> Vec<SpdMatrix> {
    sample_with(model, &mut substream(seed, "matrix"), n)
}

fn sample_with<R: Rng + ?Sized>(model: &MatrixGammaModel, rng: &mut R, n: usize) -> Vec<SpdMatrix> {
    let l = model.b.inverse().0.cholesky().expect("SPD").l();
    (0..n).map(|_| draw_one(model, &l, rng)).collect()
}

/// X2^(1/2)·X1·X2^(1/2).
pub fn symmetric_product(x1: &SpdMatrix, x2: &SpdMatrix) -> Result<SpdMatrix> {
    if x1.dim() != x2.dim() {
        return Err(Error::DimensionMismatch { expected: x1.dim(), found: x2.dim() });
    }
    let r = x2.sqrt()?;
    SpdMatrix::new(symmetrize(r.matrix() * x1.matrix() * r.matrix()))
}

/// Two MC estimates of the symmetric-product density at U.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricProductEstimate {
    /// V drawn from f2, f1 evaluated at V^(−1/2)·U·V^(−1/2).
    pub primary: EvalResult,
    /// Roles of f1 and f2 swapped.
    pub swapped: EvalResult,
}

fn mixed_estimate(
    outer: &MatrixGammaModel,
    inner: &MatrixGammaModel,
    u: &SpdMatrix,
    seed: u64,
    label: &str,
    n: usize,
) -> Result<EvalResult> {
    let p = u.dim() as f64;
    let draws = sample_with(outer, &mut substream(seed, label), n);
    let (mut s, mut s2) = (0.0, 0.0);
    for v in &draws {
        let w = v.inv_sqrt()?;
        let inner_arg = SpdMatrix::new(symmetrize(w.matrix() * u.matrix() * w.matrix()))?;
        let x = (inner.ln_pdf(&inner_arg)? - 0.5 * (p + 1.0) * v.ln_det()).exp();
        s += x;
        s2 += x * x;
    }
    let nf = n as f64;
    let mean = s / nf;
    let se = ((s2 / nf - mean * mean).max(0.0) / (nf - 1.0).max(1.0)).sqrt();
    let mut r = EvalResult::new(mean, se, Backend::Mc);
    r.diagnostics.evaluations = n;
    if !(se <= MAX_REL_SE * mean.abs()) {
        return Err(Error::HighVariance { rel_se: se / mean.abs() });
    }
    Ok(r)
}

/// Density of X2^(1/2)·X1·X2^(1/2) at U as E_V[f1(V^(−1/2)UV^(−1/2))·|V|^(−(p+1)/2)]
/// with V ~ f2, plus the swapped representation.
pub fn symmetric_product_density_mc(
    models: (&MatrixGammaModel, &MatrixGammaModel),
    u: &SpdMatrix,
    seed: u64,
    n: usize,
) -> Result<SymmetricProductEstimate> {
    let (f1, f2) = models;
    let p = u.dim();
    if !(1..=3).contains(&p) {
        return Err(Error::Domain(format!("dimension {p} outside 1..=3")));
    }
    for m in [f1, f2] {
        if m.dim() != p {
            return Err(Error::DimensionMismatch { expected: p, found: m.dim() });
        }
    }
    Ok(SymmetricProductEstimate {
        primary: mixed_estimate(f2, f1, u, seed, "v2", n)?,
        swapped: mixed_estimate(f1, f2, u, seed, "v1", n)?,
    })
}

/// Histogram-box estimate of the symmetric-product density at t·I: the
/// fraction of sampled products within ±h of t·I in every free entry,
/// divided by the box volume (2h)^(p(p+1)/2).
pub fn symmetric_product_box_density(
    models: (&MatrixGammaModel, &MatrixGammaModel),
    t: f64,
    h: f64,
    seed: u64,
    n: usize,
) -> Result<EvalResult> {
    let (f1, f2) = models;
    let p = f1.dim();
    if f2.dim() != p {
        return Err(Error::DimensionMismatch { expected: p, found: f2.dim() });
    }
    let x1 = sample_with(f1, &mut substream(seed, "x1"), n);
    let x2 = sample_with(f2, &mut substream(seed, "x2"), n);
    let mut hits = 0usize;
    for (a, b) in x1.iter().zip(&x2) {
        let u = symmetric_product(a, b)?;
        let inside = (0..p).all(|i| {
            (0..=i).all(|j| {
                let target = if i == j { t } else { 0.0 };
                (u.matrix()[(i, j)] - target).abs() < h
            })
        });
        hits += inside as usize;
    }
    let vol = (2.0 * h).powi((p * (p + 1) / 2) as i32);
    let q = hits as f64 / n as f64;
    let se = (q.max(1.0 / n as f64) * (1.0 - q) / n as f64).sqrt();
    let mut r = EvalResult::new(q / vol, se / vol, Backend::Mc);
    r.diagnostics.evaluations = n;
    Ok(r)
}
