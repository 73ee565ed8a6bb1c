//! Acceptance criteria, one pass/fail line each.
//!
//! Runs as a plain binary so the lines are always printed.

use mellin_core::catalog::CaseId;
use mellin_core::density::{density, BackendChoice, DensityConfig};
use mellin_core::matrix::{
    ln_multivariate_gamma, multivariate_gamma, symmetric_product_density_mc, MatrixGammaModel, SpdMatrix,
};
use mellin_core::sampling::substream;
use mellin_core::special::log_gamma;
use mellin_core::verify::{case_notes, mc_case, normalization, nth_draw, verify_case, VerifyOptions};
use mellin_core::{
    eval_case, inverse_mellin_contour, mellin_numeric, product_density_quad, ratio_density_quad, ConvolutionSpec,
    PathwayModel, QuadConfig,
};
use rand::Rng;
use std::path::Path;
use std::time::Instant;

struct Outcome {
    passed: bool,
    detail: String,
}

fn report(n: usize, name: &str, budget_s: Option<f64>, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let mut o = f();
    let secs = t.elapsed().as_secs_f64();
    if let Some(b) = budget_s {
        if secs > b {
            o.passed = false;
            o.detail.push_str(&format!("; over the {b:.0} s budget"));
        }
    }
    let tag = if o.passed { "PASS" } else { "FAIL" };
    println!("criterion {n} [{tag}] {name}: {} ({secs:.1} s)", o.detail);
    o.passed
}

fn closure() -> Outcome {
    let opts = VerifyOptions { normalization: false, ..Default::default() };
    let mut worst: f64 = 0.0;
    let mut points = 0;
    let mut failures = vec![];
    for case in CaseId::ALL {
        let r = verify_case(case, &opts);
        worst = worst.max(r.max_deviation.worst_ratio);
        points += r.points;
        for f in r.failures.iter().take(3) {
            failures.push(format!("{case}: {f}"));
        }
    }
    for f in &failures {
        println!("    {f}");
    }
    Outcome {
        passed: failures.is_empty(),
        detail: format!("{points} points, worst deviation/tolerance {worst:.3}"),
    }
}

fn normalization_all() -> Outcome {
    let cfg = DensityConfig::default();
    let mut worst: f64 = 0.0;
    let mut failures = vec![];
    for case in CaseId::ALL {
        for i in 0..10 {
            let spec = nth_draw(case, 0, i);
            match normalization(case, &spec, &cfg) {
                Ok(r) => {
                    let d = (r.value - 1.0).abs();
                    worst = worst.max(d);
                    if d > 1e-6 {
                        failures.push(format!("{case} draw {i}: ∫g = {:.9}", r.value));
                    }
                }
                Err(e) => failures.push(format!("{case} draw {i}: {e}")),
            }
        }
    }
    for f in &failures {
        println!("    {f}");
    }
    Outcome { passed: failures.is_empty(), detail: format!("140 integrals, max |∫g − 1| = {worst:.2e}") }
}

/// ∫₀^∞ v^(−1)·exp(−v − u/v) dv by the trapezoid rule in ln v, which
/// converges geometrically for this doubly-exponentially decaying integrand.
fn bessel_integral(u: f64) -> f64 {
    let h = 0.01;
    (-4000..=4000).map(|k| {
        let t = k as f64 * h;
        h * (-(t.exp()) - u * (-t).exp()).exp()
    }).sum()
}

fn anchors() -> Outcome {
    let tight = QuadConfig { abs_tol: 1e-14, rel_tol: 1e-12, ..Default::default() };
    let mut msgs = vec![];
    let mut worst: f64 = 0.0;
    // gamma over gamma against its closed form
    for (a1, s1, a2, s2) in [(0.0, 1.0, 0.0, 1.0), (0.7, 1.5, 0.7, 0.6), (0.3, 0.8, 1.4, 1.7), (-0.3, 2.0, 0.5, 0.5)] {
        let spec = ConvolutionSpec::ratio(
            PathwayModel::gen_gamma(a1 + 1.0, s1, 1.0).unwrap(),
            PathwayModel::gen_gamma(a2 + 1.0, s2, 1.0).unwrap(),
        );
        let n = a1 + a2 + 2.0;
        for u in [0.2, 0.7, 1.9, 6.0] {
            let l = (a1 + 1.0) * f64::ln(s1) + (a2 + 1.0) * f64::ln(s2) - log_gamma(a1 + 1.0).unwrap()
                - log_gamma(a2 + 1.0).unwrap()
                + log_gamma(n).unwrap()
                + a2 * f64::ln(u)
                - n * f64::ln(s1 + s2 * u);
            let want = l.exp();
            let vals = [
                eval_case(CaseId::P3_1, &spec, u).map(|r| r.value),
                ratio_density_quad(&spec, u, &tight).map(|r| r.value),
                inverse_mellin_contour(&spec.transform().unwrap(), u, None, None, &tight).map(|r| r.value),
            ];
            for (name, v) in ["series", "quad", "contour"].iter().zip(vals) {
                match v {
                    Ok(v) => {
                        worst = worst.max((v - want).abs());
                        if (v - want).abs() > 1e-10 {
                            msgs.push(format!("gamma ratio {name} u={u}: {v} vs {want}"));
                        }
                    }
                    Err(e) => msgs.push(format!("gamma ratio {name} u={u}: {e}")),
                }
            }
        }
    }
    // two uniforms: −ln u
    let uni = PathwayModel::type1_beta(1.0, 1.0, 1.0, 1.0).unwrap();
    let spec = ConvolutionSpec::product(uni, uni);
    let cfg = DensityConfig::default();
    for u in [0.05, (-1f64).exp(), 0.6, 0.95] {
        for choice in [BackendChoice::Series, BackendChoice::Quad, BackendChoice::Contour] {
            match density(&spec, u, choice, &cfg) {
                Ok(r) if (r.value + u.ln()).abs() <= 1e-9 => worst = worst.max((r.value + u.ln()).abs()),
                Ok(r) => msgs.push(format!("uniforms {choice} u={u}: {} vs {}", r.value, -u.ln())),
                Err(e) => msgs.push(format!("uniforms {choice} u={u}: {e}")),
            }
        }
    }
    // two unit exponentials at u = 1
    let e = PathwayModel::gen_gamma(1.0, 1.0, 1.0).unwrap();
    let want = bessel_integral(1.0);
    let spec = ConvolutionSpec::product(e, e);
    for choice in [BackendChoice::Series, BackendChoice::Quad, BackendChoice::Contour] {
        match density(&spec, 1.0, choice, &cfg) {
            Ok(r) if (r.value - want).abs() <= 1e-8 => worst = worst.max((r.value - want).abs()),
            Ok(r) => msgs.push(format!("exponentials {choice}: {} vs {want}", r.value)),
            Err(e) => msgs.push(format!("exponentials {choice}: {e}")),
        }
    }
    match product_density_quad(&spec, 1.0, &tight) {
        Ok(r) if (r.value - want).abs() <= 1e-8 => {}
        r => msgs.push(format!("exponentials tight quad: {r:?}")),
    }
    for m in &msgs {
        println!("    {m}");
    }
    Outcome { passed: msgs.is_empty(), detail: format!("max abs deviation {worst:.2e}") }
}

fn mellin_pairs() -> Outcome {
    let mut rng = substream(4, "mellin-pairs");
    let cfg = QuadConfig::default();
    let mut worst: f64 = 0.0;
    let mut msgs = vec![];
    for i in 0..30 {
        let alpha = rng.random_range(0.6..3.0);
        let beta = rng.random_range(0.7..3.0);
        let a = rng.random_range(0.5..2.0);
        let delta = rng.random_range(0.7..2.0);
        let m = match i % 3 {
            0 => PathwayModel::gen_gamma(alpha, a, delta),
            1 => PathwayModel::type1_beta(alpha, beta, a, delta),
            _ => PathwayModel::type2_beta(alpha, beta, a, delta),
        }
        .unwrap();
        let strip = m.strip();
        let hi = strip.upper.min(strip.lower + 4.0);
        let expr = m.mellin_transform();
        for w in [0.15, 0.3, 0.5, 0.7, 0.85] {
            let s = strip.lower + w * (hi - strip.lower);
            let sym = expr.eval(s).unwrap();
            match mellin_numeric(&m, s, &cfg) {
                Ok(r) => {
                    let d = (r.value - sym).abs() / sym;
                    worst = worst.max(d);
                    if d > 1e-7 {
                        msgs.push(format!("{m} s={s:.4}: {} vs {sym}", r.value));
                    }
                }
                Err(e) => msgs.push(format!("{m} s={s:.4}: {e}")),
            }
        }
    }
    for m in &msgs {
        println!("    {m}");
    }
    Outcome { passed: msgs.is_empty(), detail: format!("150 pairs, max relative deviation {worst:.2e}") }
}

fn monte_carlo() -> Outcome {
    let mut msgs = vec![];
    let mut worst: f64 = 0.0;
    let mut weakest_detection = f64::INFINITY;
    for case in CaseId::ALL {
        match mc_case(case, 0, 1_000_000, 1.0) {
            Ok(r) => {
                worst = worst.max(r.max_z);
                if !r.passed {
                    msgs.push(format!("{case}: max z {:.2} at {:?}", r.max_z, r.z_scores));
                }
            }
            Err(e) => msgs.push(format!("{case}: {e}")),
        }
        match mc_case(case, 0, 1_000_000, 1.1) {
            Ok(r) => {
                weakest_detection = weakest_detection.min(r.max_z);
                if r.passed {
                    msgs.push(format!("{case}: ×1.1 perturbation not detected (max z {:.2})", r.max_z));
                }
            }
            Err(e) => msgs.push(format!("{case}: {e}")),
        }
    }
    for m in &msgs {
        println!("    {m}");
    }
    Outcome {
        passed: msgs.is_empty(),
        detail: format!("max z {worst:.2} (limit 4), weakest ×1.1 detection z {weakest_detection:.1}"),
    }
}

fn matrix_variate() -> Outcome {
    let mut msgs = vec![];
    for a in [0.6, 1.0, 2.5, 7.0] {
        if ln_multivariate_gamma(a, 1).unwrap() != log_gamma(a).unwrap() {
            msgs.push(format!("Γ_1({a}) differs from Γ({a})"));
        }
    }
    let g22 = multivariate_gamma(2.0, 2).unwrap();
    if (g22 - std::f64::consts::FRAC_PI_2).abs() > 1e-12 {
        msgs.push(format!("Γ_2(2) = {g22}"));
    }
    // p = 1 against the scalar quadrature pipeline
    let (a1, b1, a2, b2, u) = (1.7, 1.3, 2.4, 0.8, 1.6);
    let m1 = MatrixGammaModel::new(a1, SpdMatrix::from_rows(&[vec![b1]]).unwrap()).unwrap();
    let m2 = MatrixGammaModel::new(a2, SpdMatrix::from_rows(&[vec![b2]]).unwrap()).unwrap();
    let scalar = ConvolutionSpec::product(
        PathwayModel::gen_gamma(a1, b1, 1.0).unwrap(),
        PathwayModel::gen_gamma(a2, b2, 1.0).unwrap(),
    );
    let exact = product_density_quad(&scalar, u, &QuadConfig::default()).unwrap().value;
    let mut z_scalar: f64 = 0.0;
    match symmetric_product_density_mc((&m1, &m2), &SpdMatrix::from_rows(&[vec![u]]).unwrap(), 6, 1_000_000) {
        Ok(r) => {
            for e in [&r.primary, &r.swapped] {
                let z = (e.value - exact).abs() / e.error;
                z_scalar = z_scalar.max(z);
                if z > 3.0 {
                    msgs.push(format!("p=1: {} ± {} vs scalar {exact}", e.value, e.error));
                }
            }
        }
        Err(e) => msgs.push(format!("p=1: {e}")),
    }
    // p = 2, the two representations
    let m = MatrixGammaModel::new(2.0, SpdMatrix::identity(2)).unwrap();
    let mut z_pair = f64::NAN;
    match symmetric_product_density_mc((&m, &m), &SpdMatrix::identity(2), 7, 1_000_000) {
        Ok(r) => {
            let se = (r.primary.error.powi(2) + r.swapped.error.powi(2)).sqrt();
            z_pair = (r.primary.value - r.swapped.value).abs() / se;
            if z_pair > 3.0 {
                msgs.push(format!("p=2: {:?} vs {:?}", r.primary, r.swapped));
            }
        }
        Err(e) => msgs.push(format!("p=2: {e}")),
    }
    for m in &msgs {
        println!("    {m}");
    }
    Outcome {
        passed: msgs.is_empty(),
        detail: format!("Γ_2(2) − π/2 = {:.1e}, p=1 max z {z_scalar:.2}, p=2 z {z_pair:.2}", g22 - std::f64::consts::FRAC_PI_2),
    }
}

fn case_notes_ledger() -> Outcome {
    let a = case_notes(0);
    let b = case_notes(0);
    let mut msgs = vec![];
    if a != b {
        msgs.push("CASE_NOTES differs between runs".to_string());
    }
    let mut corrected = 0;
    for line in a.lines().filter(|l| l.starts_with("| P")) {
        let cols: Vec<&str> = line.split('|').map(str::trim).collect();
        // | case | pattern | status | deviation | note |
        match cols[3] {
            "corrected" => {
                corrected += 1;
                if cols[4].parse::<f64>().is_err() || cols[5].is_empty() {
                    msgs.push(format!("corrected entry without measured deviation: {line}"));
                }
            }
            "confirmed" => {}
            _ => msgs.push(format!("bad entry: {line}")),
        }
    }
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../CASE_NOTES.md");
    if let Err(e) = std::fs::write(&root, &a) {
        msgs.push(format!("writing CASE_NOTES.md: {e}"));
    }
    for m in &msgs {
        println!("    {m}");
    }
    Outcome { passed: msgs.is_empty(), detail: format!("14 entries, {corrected} corrected, written to CASE_NOTES.md") }
}

fn main() {
    let results = [
        report(1, "fourteen-case closure (series/quad/contour)", Some(300.0), closure),
        report(2, "normalization", Some(120.0), normalization_all),
        report(3, "closed-form anchors", None, anchors),
        report(4, "Mellin-pair suite", Some(30.0), mellin_pairs),
        report(5, "Monte Carlo confirmation", Some(180.0), monte_carlo),
        report(6, "matrix-variate", Some(120.0), matrix_variate),
        report(7, "case notes ledger", None, case_notes_ledger),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
