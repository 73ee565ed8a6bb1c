//! Monte Carlo samples of products and ratios, and pointwise checks of a
//! density against them.

use crate::error::{Error, Result};
use crate::expr::{ConvolutionSpec, Kind};
use crate::result::{Backend, EvalResult};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Expected count aimed for in each evaluated bin.
const TARGET_COUNT: f64 = 10_000.0;
const MIN_HALF_WIDTH: f64 = 0.005;
const MAX_HALF_WIDTH: f64 = 0.25;
/// Half-width in ln u of the bin used for a single density estimate.
const POINT_HALF_WIDTH: f64 = 0.02;
pub const PASS_Z: f64 = 4.0;

fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Independent stream for `label` under a master seed.
pub fn substream(seed: u64, label: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(fnv1a(label));
    rng
}

/// n draws of x1·x2 (product) or x2/x1 (ratio).
pub fn sample_convolution(spec: &ConvolutionSpec, seed: u64, n: usize) -> Vec<f64> {
    let x1 = spec.f1.sample_with(&mut substream(seed, "x1"), n);
    let x2 = spec.f2.sample_with(&mut substream(seed, "x2"), n);
    x1.iter()
        .zip(&x2)
        .map(|(a, b)| match spec.kind {
            Kind::Product => a * b,
            Kind::Ratio => b / a,
        })
        .collect()
}

fn count_in(sorted: &[f64], lo: f64, hi: f64) -> usize {
    sorted.partition_point(|&x| x < hi) - sorted.partition_point(|&x| x < lo)
}

/// Histogram density over consecutive bins given by `edges`, normalized by
/// the number of samples inside the binned range.
pub fn histogram(samples: &[f64], edges: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let counts: Vec<usize> = edges.windows(2).map(|w| count_in(&sorted, w[0], w[1])).collect();
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().zip(edges.windows(2)).map(|(&c, w)| c as f64 / (total as f64 * (w[1] - w[0]))).collect()
}

fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            let dp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                x[i] = -z;
                x[n - 1 - i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                w[n - 1 - i] = w[i];
                break;
            }
        }
    }
    (x, w)
}

/// ∫ g(u) du over [lo, hi], 16-point Gauss-Legendre in ln u.
fn bin_mass<F: Fn(f64) -> f64>(g: &F, lo: f64, hi: f64) -> f64 {
    let (x, w) = gauss_legendre(16);
    let (a, b) = (lo.ln(), hi.ln());
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(&t, &wt)| {
        let u = (m + h * t).exp();
        wt * h * u * g(u)
    }).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub n: usize,
    pub eval_points: Vec<f64>,
    /// Histogram density estimates at the points.
    pub empirical: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Backend density at the points.
    pub analytic: Vec<f64>,
    pub z_scores: Vec<f64>,
    pub max_z: f64,
    pub passed: bool,
}

/// Compare `backend` against a histogram of n samples at each point.
///
/// Bins are log-symmetric around each point, wide enough for about 10^4
/// expected counts, and the backend is integrated over the same bin, so the
/// z-score carries no discretization bias.
pub fn mc_verify<F: Fn(f64) -> f64>(
    spec: &ConvolutionSpec,
    backend: F,
    seed: u64,
    n: usize,
    eval_points: &[f64],
) -> Result<McReport> {
    let upper = spec.support_upper();
    if n == 0 {
        return Err(Error::Domain("need at least one sample".into()));
    }
    if let Some(&u) = eval_points.iter().find(|&&u| !(u > 0.0 && u < upper)) {
        return Err(Error::Domain(format!("evaluation point {u} outside the support")));
    }
    let mut sorted = sample_convolution(spec, seed, n);
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut rep = McReport {
        n,
        eval_points: eval_points.to_vec(),
        empirical: vec![],
        std_errors: vec![],
        analytic: vec![],
        z_scores: vec![],
        max_z: 0.0,
        passed: false,
    };
    for &u in eval_points {
        let g = backend(u);
        let w = (TARGET_COUNT / (nf * g.abs() * u)).clamp(MIN_HALF_WIDTH, MAX_HALF_WIDTH);
        let lo = u * (-w).exp();
        let hi = (u * w.exp()).min(upper);
        let width = hi - lo;
        let p_model = bin_mass(&backend, lo, hi);
        let count = count_in(&sorted, lo, hi);
        let p_hat = count as f64 / nf;
        let se = (p_hat.max(1.0 / nf) * (1.0 - p_hat) / nf).sqrt();
        let z = (p_hat - p_model) / se;
        rep.empirical.push(p_hat / width);
        rep.std_errors.push(se / width);
        rep.analytic.push(g);
        rep.z_scores.push(z);
        rep.max_z = rep.max_z.max(z.abs());
    }
    if rep.max_z.is_nan() {
        rep.max_z = f64::INFINITY;
    }
    rep.passed = rep.max_z <= PASS_Z;
    Ok(rep)
}

/// Histogram estimate of the density at a single point.
pub fn mc_density(spec: &ConvolutionSpec, u: f64, seed: u64, n: usize) -> Result<EvalResult> {
    let upper = spec.support_upper();
    if !(u > 0.0 && u < upper) || n == 0 {
        return Err(Error::Domain(format!("u = {u} outside the support or no samples")));
    }
    let samples = sample_convolution(spec, seed, n);
    let lo = u * (-POINT_HALF_WIDTH).exp();
    let hi = (u * POINT_HALF_WIDTH.exp()).min(upper);
    let count = samples.iter().filter(|&&x| x >= lo && x < hi).count();
    let p = count as f64 / n as f64;
    let se = (p.max(1.0 / n as f64) * (1.0 - p) / n as f64).sqrt();
    let mut r = EvalResult::new(p / (hi - lo), se / (hi - lo), Backend::Mc);
    r.diagnostics.evaluations = n;
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathway::PathwayModel;
    use proptest::prelude::*;

    fn mean_se(x: &[f64]) -> (f64, f64) {
        let n = x.len() as f64;
        let m = x.iter().sum::<f64>() / n;
        let v = x.iter().map(|y| (y - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (v / n).sqrt())
    }

    #[test]
    fn sample_examples() {
        let u1 = PathwayModel::type1_beta(1.0, 1.0, 1.0, 1.0).unwrap();
        let (m, se) = mean_se(&sample_convolution(&ConvolutionSpec::product(u1, u1), 1, 100_000));
        assert!((m - 0.25).abs() < 4.0 * se);

        let e = PathwayModel::gen_gamma(1.0, 1.0, 1.0).unwrap();
        let s = sample_convolution(&ConvolutionSpec::ratio(e, e), 2, 100_000);
        let p = s.iter().filter(|&&x| x <= 1.0).count() as f64 / 1e5;
        assert!((p - 0.5).abs() < 4.0 * (0.25f64 / 1e5).sqrt());

        let g = PathwayModel::gen_gamma(2.0, 1.0, 1.0).unwrap();
        let (m, se) = mean_se(&sample_convolution(&ConvolutionSpec::product(g, g), 3, 100_000));
        assert!((m - 4.0).abs() < 4.0 * se);
    }

    #[test]
    fn determinism_and_stream_independence() {
        let g = PathwayModel::gen_gamma(2.0, 1.0, 1.0).unwrap();
        let spec = ConvolutionSpec::product(g, g);
        assert_eq!(sample_convolution(&spec, 9, 50), sample_convolution(&spec, 9, 50));
        assert_ne!(sample_convolution(&spec, 9, 50), sample_convolution(&spec, 10, 50));
        // same model in both slots must still get different draws
        let x1 = g.sample_with(&mut substream(9, "x1"), 5);
        let x2 = g.sample_with(&mut substream(9, "x2"), 5);
        assert_ne!(x1, x2);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(16);
        for k in 0..32 {
            let q: f64 = x.iter().zip(&w).map(|(t, wt)| wt * t.powi(k)).sum();
            let exact = if k % 2 == 1 { 0.0 } else { 2.0 / (k as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn mc_verify_two_uniforms() {
        let u1 = PathwayModel::type1_beta(1.0, 1.0, 1.0, 1.0).unwrap();
        let spec = ConvolutionSpec::product(u1, u1);
        let r = mc_verify(&spec, |u: f64| -u.ln(), 11, 1_000_000, &[0.2, 0.5, 0.8]).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.std_errors.iter().all(|&s| s > 0.0));
        let bad = mc_verify(&spec, |u: f64| -1.1 * u.ln(), 11, 1_000_000, &[0.2, 0.5, 0.8]).unwrap();
        assert!(!bad.passed);
        assert!(mc_verify(&spec, |u: f64| -u.ln(), 11, 1000, &[1.2]).is_err());
    }

    proptest! {
        #[test]
        fn histogram_integrates_to_one(seed in 0u64..1000, bins in 1usize..40) {
            let g = PathwayModel::gen_gamma(1.5, 1.0, 1.0).unwrap();
            let s = sample_convolution(&ConvolutionSpec::ratio(g, g), seed, 2000);
            let edges: Vec<f64> = (0..=bins).map(|i| 0.1 + 3.0 * i as f64 / bins as f64).collect();
            let d = histogram(&s, &edges);
            let total: f64 = d.iter().zip(edges.windows(2)).map(|(d, w)| d * (w[1] - w[0])).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
