use clap::{Args, Parser, Subcommand, ValueEnum};
use mellin_core::density::DensityConfig;
use mellin_core::matrix::{
    multivariate_gamma, sample_matrix_gamma, symmetric_product, symmetric_product_density_mc, MatrixGammaModel,
    SpdMatrix,
};
use mellin_core::verify::{nth_draw, verify_case, CaseReport, VerifyOptions};
use mellin_core::{
    density, detect_case, product_density_quad, BackendChoice, CaseId, ConvolutionSpec, Error, EvalResult,
    PathwayModel, QuadConfig,
};
use serde::Serialize;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_CONFIG: u8 = 2;
const EXIT_EVAL: u8 = 3;
const EXIT_VERIFY: u8 = 4;
const EXIT_MATRIX: u8 = 5;

#[derive(Parser)]
#[command(name = "mellin", version, about = "Densities of products and ratios of pathway-family variables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Mellin transform of the convolution and its H-function parameters.
    Transform {
        #[command(flatten)]
        input: SpecInput,
        #[command(flatten)]
        output: Output,
    },
    /// Tabulate the density on a grid.
    Density {
        #[command(flatten)]
        input: SpecInput,
        /// series, quad, contour, mc or all
        #[arg(long, default_value = "series")]
        backend: String,
        /// min:max:count[:log]
        #[arg(long)]
        grid: String,
        /// Monte Carlo samples per point.
        #[arg(long, default_value_t = 200_000)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Cross-backend verification of one catalog case or all of them.
    Verify {
        /// Case id (P2_1 … P3_7) or "all".
        #[arg(long, default_value = "all")]
        case: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Fewer draws and grid points.
        #[arg(long)]
        quick: bool,
        /// Also run the Monte Carlo histogram check.
        #[arg(long)]
        mc: bool,
        /// Monte Carlo sample count.
        #[arg(long)]
        n: Option<usize>,
        /// Multiply the series values by this factor before comparing.
        #[arg(long, default_value_t = 1.0)]
        inject_perturbation: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Matrix-variate gamma symmetric product demo.
    MatrixDemo {
        #[arg(long, default_value_t = 2)]
        p: usize,
        /// alpha1,alpha2
        #[arg(long, default_value = "2,2", value_delimiter = ',')]
        alphas: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Args)]
struct SpecInput {
    /// Spec JSON, inline or a file path.
    #[arg(long)]
    spec: Option<String>,
    /// Catalog case id; without --spec a seeded parameter draw is used.
    #[arg(long)]
    case: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn config(msg: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, msg: msg.into() }
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn parse_spec(s: &str) -> Run<ConvolutionSpec> {
    let text = if s.trim_start().starts_with('{') {
        s.to_string()
    } else {
        std::fs::read_to_string(s).map_err(|e| Failure::config(format!("cannot read {s}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Failure::config(format!("invalid spec JSON: {e}")))
}

fn parse_case(s: &str) -> Run<CaseId> {
    s.parse().map_err(|e: Error| Failure::config(e.to_string()))
}

impl SpecInput {
    fn resolve(&self) -> Run<(ConvolutionSpec, Option<CaseId>)> {
        let case = self.case.as_deref().map(parse_case).transpose()?;
        match (&self.spec, case) {
            (Some(s), case) => {
                let spec = parse_spec(s)?;
                let detected = detect_case(&spec);
                if let Some(c) = case {
                    if detected != Some(c) {
                        return Err(Failure::config(format!("spec does not fit case {c}")));
                    }
                }
                Ok((spec, detected))
            }
            (None, Some(c)) => Ok((nth_draw(c, self.seed, 0), Some(c))),
            (None, None) => Err(Failure::config("one of --spec or --case is required")),
        }
    }
}

fn emit(output: &Output, text: &str) -> Run<()> {
    match &output.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct TransformReport {
    case: Option<CaseId>,
    spec: ConvolutionSpec,
    transform: String,
    strip: (f64, f64),
    left_poles: Vec<String>,
    right_poles: Vec<String>,
    collisions: Vec<String>,
    h_function: mellin_core::HFunctionParams,
}

fn cmd_transform(input: &SpecInput, output: &Output) -> Run<()> {
    let (spec, case) = input.resolve()?;
    let expr = spec.transform().map_err(|e| Failure::config(e.to_string()))?;
    let poles = expr.poles();
    let seq = |s: &mellin_core::expr::PoleSequence| {
        let f = s.factor;
        format!("{f}: s = {}, {}, {}, …", s.nth(0) + 0.0, s.nth(1) + 0.0, s.nth(2) + 0.0)
    };
    let collisions: Vec<String> = poles
        .collisions
        .iter()
        .map(|c| format!("factors {} and {} share the pole s = {} ({:?} side)", c.first, c.second, c.s, c.side))
        .collect();
    let rep = TransformReport {
        case,
        spec,
        transform: expr.to_string(),
        strip: (expr.strip.lower, expr.strip.upper),
        left_poles: poles.left.iter().map(seq).collect(),
        right_poles: poles.right.iter().map(seq).collect(),
        collisions,
        h_function: expr.to_h_function(),
    };
    let text = match output.format {
        Some(Format::Json) => to_json(&rep),
        Some(Format::Csv) => return Err(Failure::config("transform has no CSV form")),
        None => {
            let mut t = String::new();
            if let Some(c) = rep.case {
                let _ = writeln!(t, "case: {c} ({})", c.pattern());
            }
            let _ = writeln!(t, "M(s) = {}", rep.transform);
            let _ = writeln!(t, "strip: {}", expr.strip);
            for (side, list) in [("left", &rep.left_poles), ("right", &rep.right_poles)] {
                for p in list {
                    let _ = writeln!(t, "{side} poles {p}");
                }
            }
            for c in &rep.collisions {
                let _ = writeln!(t, "warning: pole collision, {c}");
            }
            let _ = write!(t, "{}", rep.h_function);
            if !t.ends_with('\n') {
                t.push('\n');
            }
            t
        }
    };
    emit(output, &text)
}

struct Grid {
    min: f64,
    max: f64,
    count: usize,
    log: bool,
}

fn parse_grid(s: &str) -> Run<Grid> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Failure::config(format!("grid {s:?} is not min:max:count[:log]"));
    if !(3..=4).contains(&parts.len()) {
        return Err(bad());
    }
    let min: f64 = parts[0].parse().map_err(|_| bad())?;
    let max: f64 = parts[1].parse().map_err(|_| bad())?;
    let count: usize = parts[2].parse().map_err(|_| bad())?;
    let log = match parts.get(3) {
        None | Some(&"lin") | Some(&"linear") => false,
        Some(&"log") => true,
        Some(_) => return Err(bad()),
    };
    if count == 0 || !(min.is_finite() && max.is_finite()) {
        return Err(Failure::config("grid count must be at least 1 and the ends finite"));
    }
    if count > 1 && !(min < max) {
        return Err(Failure::config("grid min must be below max"));
    }
    if log && !(min > 0.0) {
        return Err(Failure::config("log grid needs min > 0"));
    }
    Ok(Grid { min, max, count, log })
}

impl Grid {
    fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let n = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / n;
                if i == self.count - 1 {
                    self.max
                } else if self.log {
                    (self.min.ln() + t * (self.max / self.min).ln()).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

/// Shortest round-trip form, exponent notation outside [1e-4, 1e15).
fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Serialize)]
struct Row {
    u: f64,
    requested: BackendChoice,
    value: f64,
    abs_error: f64,
    backend: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    fallback: Option<String>,
}

fn cmd_density(input: &SpecInput, backend: &str, grid: &str, n: usize, output: &Output) -> Run<()> {
    let (spec, _) = input.resolve()?;
    let grid = parse_grid(grid)?;
    let choices = if backend.eq_ignore_ascii_case("all") {
        vec![BackendChoice::Series, BackendChoice::Quad, BackendChoice::Contour, BackendChoice::Mc]
    } else {
        vec![backend.parse::<BackendChoice>().map_err(|e| Failure::config(e.to_string()))?]
    };
    let cfg = DensityConfig { seed: input.seed, mc_samples: n, ..Default::default() };
    let points = grid.points();
    let results: Vec<Vec<mellin_core::Result<EvalResult>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = points
            .iter()
            .map(|&u| {
                let (spec, cfg, choices) = (&spec, &cfg, &choices);
                scope.spawn(move || choices.iter().map(|&c| density(spec, u, c, cfg)).collect())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (&u, per_u) in points.iter().zip(results) {
        for (&c, r) in choices.iter().zip(per_u) {
            match r {
                Ok(r) => rows.push(Row {
                    u,
                    requested: c,
                    value: r.value,
                    abs_error: r.error,
                    backend: r.backend.to_string(),
                    fallback: r.diagnostics.fallback,
                }),
                Err(e) => failures.push(format!("u = {u}, {c}: {e}")),
            }
        }
    }
    let text = match output.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut t = String::from("u,value,abs_error,backend\n");
            for r in &rows {
                let _ = writeln!(t, "{},{},{},{}", num(r.u), num(r.value), num(r.abs_error), r.backend);
            }
            t
        }
    };
    emit(output, &text)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: EXIT_EVAL, msg: failures.join("\n") })
    }
}

#[derive(Serialize)]
struct VerifyReport {
    passed: bool,
    seed: u64,
    quick: bool,
    perturbation: f64,
    cases: Vec<CaseReport>,
}

fn cmd_verify(
    case: &str,
    seed: u64,
    quick: bool,
    mc: bool,
    n: Option<usize>,
    perturbation: f64,
    output: &Output,
) -> Run<()> {
    let cases = if case.eq_ignore_ascii_case("all") { CaseId::ALL.to_vec() } else { vec![parse_case(case)?] };
    if !(perturbation.is_finite() && perturbation > 0.0) {
        return Err(Failure::config("perturbation must be positive"));
    }
    let base = if quick { VerifyOptions::quick() } else { VerifyOptions::default() };
    let mc_samples = (mc || n.is_some()).then(|| n.unwrap_or(if quick { 100_000 } else { 1_000_000 }));
    let opts = VerifyOptions { seed, perturbation, mc_samples, ..base };
    let reports: Vec<CaseReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = cases.iter().map(|&c| scope.spawn(move || verify_case(c, &opts))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let passed = reports.iter().all(|r| r.passed);
    let rep = VerifyReport { passed, seed, quick, perturbation, cases: reports };
    if output.format == Some(Format::Csv) {
        return Err(Failure::config("verify reports are JSON only"));
    }
    emit(output, &to_json(&rep))?;
    if passed {
        Ok(())
    } else {
        let failed: Vec<String> = rep.cases.iter().filter(|r| !r.passed).map(|r| r.case.to_string()).collect();
        Err(Failure { code: EXIT_VERIFY, msg: format!("verification failed: {}", failed.join(", ")) })
    }
}

#[derive(Serialize)]
struct Estimate {
    value: f64,
    std_error: f64,
}

impl From<&EvalResult> for Estimate {
    fn from(r: &EvalResult) -> Self {
        Estimate { value: r.value, std_error: r.error }
    }
}

#[derive(Serialize)]
struct MatrixReport {
    p: usize,
    alphas: [f64; 2],
    seed: u64,
    n: usize,
    multivariate_gamma: [f64; 2],
    u: Vec<Vec<f64>>,
    primary: Estimate,
    swapped: Estimate,
    z: f64,
    representations_agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    scalar_reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scalar_z: Option<f64>,
    spd_products_checked: usize,
    max_det_rel_error: f64,
    passed: bool,
}

const SPD_CHECKS: usize = 100;
const Z_LIMIT: f64 = 3.0;

fn matrix_failure(e: Error) -> Failure {
    Failure { code: EXIT_MATRIX, msg: e.to_string() }
}

fn cmd_matrix_demo(p: usize, alphas: &[f64], seed: u64, n: usize, output: &Output) -> Run<()> {
    if !(1..=3).contains(&p) {
        return Err(Failure::config(format!("p = {p}; only 1, 2 and 3 are supported")));
    }
    let &[a1, a2] = alphas else {
        return Err(Failure::config("--alphas takes exactly two values"));
    };
    let model = |a: f64| MatrixGammaModel::new(a, SpdMatrix::identity(p)).map_err(|e| Failure::config(e.to_string()));
    let (m1, m2) = (model(a1)?, model(a2)?);
    let gp = [multivariate_gamma(a1, p).map_err(matrix_failure)?, multivariate_gamma(a2, p).map_err(matrix_failure)?];

    // symmetric products of sampled pairs must stay SPD and multiply determinants
    let x1 = sample_matrix_gamma(&m1, seed ^ 1, SPD_CHECKS);
    let x2 = sample_matrix_gamma(&m2, seed ^ 2, SPD_CHECKS);
    let mut max_det = 0.0f64;
    for (a, b) in x1.iter().zip(&x2) {
        let u = symmetric_product(a, b).map_err(matrix_failure)?;
        let want = a.det() * b.det();
        max_det = max_det.max((u.det() - want).abs() / want);
    }

    let u = SpdMatrix::identity(p);
    let est = symmetric_product_density_mc((&m1, &m2), &u, seed, n).map_err(matrix_failure)?;
    let se = est.primary.error.hypot(est.swapped.error);
    let z = (est.primary.value - est.swapped.value).abs() / se;
    let (scalar_reference, scalar_z) = if p == 1 {
        let spec = ConvolutionSpec::product(
            PathwayModel::gen_gamma(a1, 1.0, 1.0).map_err(|e| Failure::config(e.to_string()))?,
            PathwayModel::gen_gamma(a2, 1.0, 1.0).map_err(|e| Failure::config(e.to_string()))?,
        );
        let exact = product_density_quad(&spec, 1.0, &QuadConfig::default()).map_err(matrix_failure)?.value;
        (Some(exact), Some((est.primary.value - exact).abs() / est.primary.error))
    } else {
        (None, None)
    };
    let agree = z <= Z_LIMIT && scalar_z.is_none_or(|s| s <= Z_LIMIT);
    let passed = agree && max_det < 1e-9;
    let rep = MatrixReport {
        p,
        alphas: [a1, a2],
        seed,
        n,
        multivariate_gamma: gp,
        u: u.to_rows(),
        primary: (&est.primary).into(),
        swapped: (&est.swapped).into(),
        z,
        representations_agree: agree,
        scalar_reference,
        scalar_z,
        spd_products_checked: SPD_CHECKS,
        max_det_rel_error: max_det,
        passed,
    };
    if output.format == Some(Format::Csv) {
        return Err(Failure::config("matrix-demo reports are JSON only"));
    }
    emit(output, &to_json(&rep))?;
    if passed {
        Ok(())
    } else {
        Err(Failure { code: EXIT_MATRIX, msg: "matrix invariant check failed".into() })
    }
}

fn run(cli: Cli) -> Run<()> {
    match cli.command {
        Command::Transform { input, output } => cmd_transform(&input, &output),
        Command::Density { input, backend, grid, n, output } => cmd_density(&input, &backend, &grid, n, &output),
        Command::Verify { case, seed, quick, mc, n, inject_perturbation, output } => {
            cmd_verify(&case, seed, quick, mc, n, inject_perturbation, &output)
        }
        Command::MatrixDemo { p, alphas, seed, n, output } => cmd_matrix_demo(p, &alphas, seed, n, &output),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
