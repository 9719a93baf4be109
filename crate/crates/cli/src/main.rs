#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod failure;
mod output;
mod verify;

use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;

use fhle_core::estimates::{growth_exponent, singular_rho_check, singular_scaling_check, weighted_trace_scaling_check};
use fhle_core::exponents::{classify, jl_scan, large_p_limit, singular_amplitude, Verdict, DEFAULT_SCAN_NODES};
use fhle_core::extension::{
    degenerate_residual, extend_radial, neumann_trace, Analytic, HalfSpaceField, HalfSpaceGrid, RadialProfile, TailModel,
};
use fhle_core::kernels::{a_constant, hardy_integral, kernel_K, KernelSpec};
use fhle_core::monotonicity::{energy_curve, Bubble, EnergyOptions, Homogeneous, SphereCoefficient};
use fhle_core::specfun::{hardy_gamma, lambda_alpha, ProblemParams, SobolevExponent};

use failure::Failure;
use output::{emit_json, num, opt_num};

#[derive(Parser)]
#[command(name = "fhle", version, about = "Constants, kernels, extensions and energies for the fractional Henon-Lane-Emden equation")]
#[command(args_override_self = true)]
struct Cli {
    /// Emit machine-readable JSON with a schema version field.
    #[arg(long, global = true)]
    json: bool,
    /// Read flags from a key=value or JSON file; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Liouville verdict, Sobolev exponent and stability margin of one tuple.
    Classify(Tuple),
    /// Classification table along one parameter axis.
    Sweep(SweepArgs),
    /// Sign changes of the stability margin in p above the Sobolev exponent.
    Jl(JlArgs),
    /// The singular solution and its growth laws.
    Singular(SingularArgs),
    /// Values of the kernel K_alpha and the normalisation-free constant identity.
    Kernel(KernelArgs),
    /// Extension of a radial profile to the upper half-space and its Neumann trace.
    Extend(ExtendArgs),
    /// Monotonicity energy as a function of the radius.
    Energy(EnergyArgs),
    /// Run a verification suite.
    Verify {
        #[arg(value_enum, default_value = "all")]
        suite: verify::Suite,
        /// Multiplies every tolerance; values below 1 tighten the checks.
        #[arg(long, default_value_t = 1.0)]
        tolerance_scale: f64,
    },
}

#[derive(Args)]
struct Tuple {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long)]
    p: f64,
    /// Upper end of the threshold scan reported with the verdict.
    #[arg(long, default_value_t = 1e4)]
    p_max: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    P,
    N,
    S,
    A,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Spacing {
    Linear,
    Geometric,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    axis: Axis,
    #[arg(long)]
    lo: f64,
    #[arg(long)]
    hi: f64,
    #[arg(long)]
    count: usize,
    #[arg(long, value_enum, default_value = "linear")]
    spacing: Spacing,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct JlArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long, default_value_t = 1e4)]
    p_max: f64,
    #[arg(long, default_value_t = DEFAULT_SCAN_NODES)]
    nodes: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GrowthCheck {
    None,
    Scaling,
    Rho,
    Trace,
}

#[derive(Args)]
struct SingularArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value = "none")]
    check: GrowthCheck,
    #[arg(long, value_delimiter = ',', default_values_t = [10.0, 100.0, 1000.0, 10000.0])]
    radii: Vec<f64>,
    /// Decay of the cut-off for the rho check.
    #[arg(long)]
    m: Option<f64>,
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    s: f64,
    /// Kernel index; defaults to (2s+a)/(p-1) when --p is given.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    c: Vec<f64>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    /// Also evaluate A_{n,s,a} against the integral Hardy constant.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProfileKind {
    Poisson,
    Gaussian,
}

#[derive(Args)]
struct ExtendArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    s: f64,
    #[arg(long, value_enum, default_value = "poisson")]
    profile: ProfileKind,
    /// Sampled profile as CSV with columns r,u; overrides --profile.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Power-law decay u ~ r^{-e} continuing sampled input.
    #[arg(long)]
    tail_exponent: Option<f64>,
    #[arg(long, default_value_t = 5.0)]
    r_max: f64,
    /// Field snapshot destination (r,y,value).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Neumann trace destination (r,u).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldKind {
    Homogeneous,
    Bubble,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Coefficient {
    Proof,
    Statement,
}

#[derive(Args)]
struct EnergyArgs {
    #[arg(long, value_enum)]
    field: FieldKind,
    #[arg(long)]
    n: u32,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    a: f64,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    lambda_min: f64,
    #[arg(long, default_value_t = 4.0)]
    lambda_max: f64,
    #[arg(long, default_value_t = 7)]
    count: usize,
    #[arg(long, value_enum, default_value = "proof")]
    coefficient: Coefficient,
    /// CSV destination; standard output when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    match run(args) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

fn run(args: Vec<String>) -> Result<u8, Failure> {
    let args = config::expand(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(0);
            }
            return Err(Failure::Invalid(e.render().to_string().trim_end().to_string()));
        }
    };
    configure_threads()?;
    let json = cli.json;
    match cli.command {
        Command::Classify(t) => cmd_classify(&t),
        Command::Sweep(a) => cmd_sweep(&a, json),
        Command::Jl(a) => cmd_jl(&a, json),
        Command::Singular(a) => cmd_singular(&a, json),
        Command::Kernel(a) => cmd_kernel(&a, json),
        Command::Extend(a) => cmd_extend(&a, json),
        Command::Energy(a) => cmd_energy(&a, json),
        Command::Verify { suite, tolerance_scale } => cmd_verify(suite, tolerance_scale, json),
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("FHLE_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::Invalid(format!("FHLE_THREADS={raw} is not a positive integer")))?;
    // a pool may already exist when called twice from tests; that is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn sobolev_json(ps: &Option<SobolevExponent<f64>>) -> serde_json::Value {
    match ps {
        Some(SobolevExponent::Finite(v)) => json!(v),
        Some(SobolevExponent::Infinite) => json!("inf"),
        None => serde_json::Value::Null,
    }
}

fn cmd_classify(t: &Tuple) -> Result<u8, Failure> {
    let params = ProblemParams { n: t.n, s: t.s, a: t.a, p: t.p };
    let out = classify(&params);
    if out.verdict == Verdict::Invalid {
        return Err(Failure::Invalid(out.reason.unwrap_or_else(|| "invalid parameters".into())));
    }
    let jl = match out.p_sobolev {
        Some(SobolevExponent::Finite(_)) if t.s < 1.0 => jl_scan(t.n, t.s, t.a, t.p_max, DEFAULT_SCAN_NODES)?
            .first()
            .map(|b| json!(b.root))
            .unwrap_or(serde_json::Value::Null),
        _ => serde_json::Value::Null,
    };
    emit_json(json!({
        "command": "classify",
        "n": t.n, "s": t.s, "a": t.a, "p": t.p,
        "verdict": out.verdict.as_str(),
        "p_sobolev": sobolev_json(&out.p_sobolev),
        "margin": out.margin,
        "jl_threshold": jl,
    }))?;
    Ok(0)
}

fn sweep_nodes(a: &SweepArgs) -> Result<Vec<f64>, Failure> {
    if !(a.lo < a.hi) || a.count < 2 {
        return Err(Failure::Invalid(format!("empty range: lo={} hi={} count={}", a.lo, a.hi, a.count)));
    }
    if a.spacing == Spacing::Geometric && !(a.lo > 0.0) {
        return Err(Failure::Invalid("geometric spacing needs lo > 0".into()));
    }
    let last = (a.count - 1) as f64;
    let nodes: Vec<f64> = (0..a.count)
        .map(|k| {
            let t = k as f64 / last;
            match a.spacing {
                _ if k + 1 == a.count => a.hi,
                Spacing::Linear => a.lo + (a.hi - a.lo) * t,
                Spacing::Geometric => a.lo * (a.hi / a.lo).powf(t),
            }
        })
        .collect();
    if a.axis == Axis::N {
        for &v in &nodes {
            if (v - v.round()).abs() > 1e-9 || v < 1.0 {
                return Err(Failure::Invalid(format!("dimension node {v} is not a positive integer")));
            }
        }
        return Ok(nodes.iter().map(|v| v.round()).collect());
    }
    Ok(nodes)
}

struct SweepRow {
    axis_value: f64,
    p_sobolev: Option<SobolevExponent<f64>>,
    margin: Option<f64>,
    verdict: Verdict,
    lambda_alpha: Option<f64>,
    amplitude: Option<f64>,
}

fn sweep_row(axis: Axis, v: f64, base: &ProblemParams<f64>) -> SweepRow {
    let mut params = *base;
    match axis {
        Axis::P => params.p = v,
        Axis::N => params.n = v as u32,
        Axis::S => params.s = v,
        Axis::A => params.a = v,
    }
    let out = classify(&params);
    let valid = out.verdict != Verdict::Invalid;
    let lam = params
        .alpha()
        .filter(|_| valid && params.s < 1.0)
        .and_then(|alpha| lambda_alpha(&params, alpha).ok());
    let amplitude = if valid { singular_amplitude(&params).ok() } else { None };
    SweepRow {
        axis_value: v,
        p_sobolev: out.p_sobolev,
        margin: out.margin,
        verdict: out.verdict,
        lambda_alpha: lam,
        amplitude,
    }
}

fn cmd_sweep(a: &SweepArgs, json: bool) -> Result<u8, Failure> {
    let nodes = sweep_nodes(a)?;
    let need = |name: &str, v: Option<f64>, axis: Axis| -> Result<f64, Failure> {
        match v {
            Some(x) => Ok(x),
            None if a.axis == axis => Ok(f64::NAN),
            None => Err(Failure::Invalid(format!("--{name} is required when sweeping another axis"))),
        }
    };
    let base = ProblemParams {
        n: match (a.n, a.axis) {
            (Some(n), _) => n,
            (None, Axis::N) => 1,
            (None, _) => return Err(Failure::Invalid("--n is required when sweeping another axis".into())),
        },
        s: need("s", a.s, Axis::S)?,
        a: a.a.unwrap_or(0.0),
        p: need("p", a.p, Axis::P)?,
    };
    let rows: Vec<SweepRow> = nodes.par_iter().map(|&v| sweep_row(a.axis, v, &base)).collect();
    let axis_text = |v: f64| if a.axis == Axis::N { format!("{}", v as u32) } else { num(v) };
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["axis_value", "p_sobolev", "margin", "verdict", "lambda_alpha", "amplitude_A"])
            .map_err(|e| Failure::Io(e.to_string()))?;
        for r in &rows {
            let ps = match r.p_sobolev {
                Some(SobolevExponent::Finite(v)) => num(v),
                Some(SobolevExponent::Infinite) => "inf".into(),
                None => String::new(),
            };
            w.write_record([
                axis_text(r.axis_value),
                ps,
                opt_num(r.margin),
                r.verdict.as_str().to_string(),
                opt_num(r.lambda_alpha),
                opt_num(r.amplitude),
            ])
            .map_err(|e| Failure::Io(e.to_string()))?;
        }
        w.flush()?;
    }
    match &a.output {
        Some(path) => output::write_file(path, &buf)?,
        None if !json => io::stdout().write_all(&buf)?,
        None => {}
    }
    if json {
        let rows: Vec<_> = rows
            .iter()
            .map(|r| {
                json!({
                    "axis_value": r.axis_value,
                    "p_sobolev": sobolev_json(&r.p_sobolev),
                    "margin": r.margin,
                    "verdict": r.verdict.as_str(),
                    "lambda_alpha": r.lambda_alpha,
                    "amplitude_A": r.amplitude,
                })
            })
            .collect();
        let axis = match a.axis {
            Axis::P => "p",
            Axis::N => "n",
            Axis::S => "s",
            Axis::A => "a",
        };
        emit_json(json!({
            "command": "sweep",
            "axis": axis,
            "output": a.output.as_ref().map(|p| p.display().to_string()),
            "rows": rows,
        }))?;
    }
    Ok(0)
}

fn cmd_jl(a: &JlArgs, json: bool) -> Result<u8, Failure> {
    let roots = jl_scan(a.n, a.s, a.a, a.p_max, a.nodes)?;
    let limit = large_p_limit(a.n, a.s, a.a)?;
    let hardy = hardy_gamma(a.n, a.s)?;
    if json {
        emit_json(json!({
            "command": "jl",
            "n": a.n, "s": a.s, "a": a.a, "p_max": a.p_max,
            "roots": roots,
            "large_p_limit": limit,
            "hardy_constant": hardy,
        }))?;
    } else {
        let mut out = io::stdout().lock();
        if roots.is_empty() {
            writeln!(out, "no sign change of the margin up to p = {}", num(a.p_max))?;
        }
        for r in &roots {
            writeln!(out, "root {} in [{}, {}], margin {}", num(r.root), num(r.lo), num(r.hi), num(r.residual))?;
        }
        writeln!(out, "lim p*lambda(alpha) = {} vs Lambda = {}", num(limit), num(hardy))?;
    }
    Ok(0)
}

fn cmd_singular(a: &SingularArgs, json: bool) -> Result<u8, Failure> {
    let params = ProblemParams::new(a.n, a.s, a.a, a.p)?;
    let amplitude = singular_amplitude(&params)?;
    let report = match a.check {
        GrowthCheck::None => None,
        GrowthCheck::Scaling => Some(singular_scaling_check(&params, &a.radii)?),
        GrowthCheck::Trace => Some(weighted_trace_scaling_check(&params, &a.radii)?),
        GrowthCheck::Rho => {
            let m = a.m.ok_or_else(|| Failure::Invalid("--m is required for the rho check".into()))?;
            Some(singular_rho_check(&params, m, &a.radii)?)
        }
    };
    if json {
        emit_json(json!({
            "command": "singular",
            "params": params,
            "amplitude": amplitude,
            "decay": params.beta(),
            "alpha": params.alpha(),
            "growth_exponent": growth_exponent(&params),
            "report": report,
        }))?;
    } else {
        let mut out = io::stdout().lock();
        writeln!(out, "u_s = A |x|^(-beta), A = {}, beta = {}", num(amplitude), num(params.beta()))?;
        writeln!(out, "growth exponent {}", num(growth_exponent(&params)))?;
        if let Some(r) = report {
            writeln!(out, "{} slope {} (expected {})", r.check, num(r.slope_measured), num(r.slope_expected))?;
            for (x, v) in r.radii.iter().zip(&r.values) {
                writeln!(out, "{},{}", num(*x), num(*v))?;
            }
        }
    }
    Ok(0)
}

fn cmd_kernel(a: &KernelArgs, json: bool) -> Result<u8, Failure> {
    let params = match a.p {
        Some(p) => Some(ProblemParams::new(a.n, a.s, a.a, p)?),
        None => None,
    };
    let alpha = match (a.alpha, &params) {
        (Some(x), _) => Some(x),
        (None, Some(pp)) => Some(pp.beta()),
        (None, None) if a.c.is_empty() => None,
        (None, None) => return Err(Failure::Invalid("--alpha or --p is required to evaluate the kernel".into())),
    };
    let mut values = Vec::new();
    if let Some(alpha) = alpha {
        let mut spec = KernelSpec::new(a.n, a.s, alpha)?;
        if let Some(c) = a.cutoff {
            spec = spec.with_cutoff(c)?;
        }
        values = a.c.par_iter().map(|&c| kernel_K(&spec, c)).collect::<fhle_core::Result<Vec<f64>>>()?;
    }
    let identity = match &params {
        Some(pp) => {
            let a_const = a_constant(pp)?;
            let hardy = hardy_integral(a.n, a.s)?;
            let lam = lambda_alpha(pp, pp.alpha().unwrap_or(0.0))?;
            Some((a_const, hardy, lam / hardy_gamma(a.n, a.s)?))
        }
        None => None,
    };
    if json {
        let table: Vec<_> = a.c.iter().zip(&values).map(|(c, k)| json!({"c": c, "K": k})).collect();
        emit_json(json!({
            "command": "kernel",
            "n": a.n, "s": a.s, "alpha": alpha,
            "values": table,
            "identity": identity.map(|(ac, h, r)| json!({
                "a_constant": ac,
                "hardy_integral": h,
                "ratio": ac / h,
                "lambda_over_hardy": r,
            })),
        }))?;
    } else {
        let mut out = io::stdout().lock();
        if !values.is_empty() {
            writeln!(out, "c,K")?;
            for (c, k) in a.c.iter().zip(&values) {
                writeln!(out, "{},{}", num(*c), num(*k))?;
            }
        }
        if let Some((ac, h, r)) = identity {
            writeln!(out, "A = {}, hardy integral = {}", num(ac), num(h))?;
            writeln!(out, "A/hardy = {} vs lambda/Lambda = {}", num(ac / h), num(r))?;
        }
    }
    Ok(0)
}

fn cmd_extend(a: &ExtendArgs, json: bool) -> Result<u8, Failure> {
    let grid = HalfSpaceGrid::standard(a.r_max, a.s)?;
    let field: HalfSpaceField<f64> = match &a.input {
        Some(path) => {
            let raw = RadialProfile::from_csv_path(path, TailModel::Unspecified)?;
            let tail = match a.tail_exponent {
                Some(e) => RadialProfile::power_tail(raw.r_max(), *raw.u.last().unwrap_or(&0.0), e),
                None => TailModel::Unspecified,
            };
            let profile = RadialProfile::new(raw.r, raw.u, tail)?;
            extend_radial(&profile, &grid, a.n, a.s)?
        }
        None => match a.profile {
            ProfileKind::Poisson => extend_radial(&Analytic(|x: f64| 1.0 / (1.0 + x * x)), &grid, a.n, a.s)?,
            ProfileKind::Gaussian => extend_radial(&Analytic(|x: f64| (-x * x).exp()), &grid, a.n, a.s)?,
        },
    };
    let residual = degenerate_residual(&field)?;
    let trace = if a.s < 1.0 { Some(neumann_trace(&field)?) } else { None };
    if let Some(path) = &a.output {
        let mut buf = Vec::new();
        field.write_csv(&mut buf)?;
        output::write_file(path, &buf)?;
    }
    if let (Some(path), Some(t)) = (&a.trace, &trace) {
        let mut buf = Vec::new();
        t.write_csv(&mut buf)?;
        output::write_file(path, &buf)?;
    }
    if json {
        emit_json(json!({
            "command": "extend",
            "n": a.n, "s": a.s,
            "nr": grid.nr(), "ny": grid.ny(),
            "residual": residual,
            "trace": trace.as_ref().map(|t| json!({"r": t.r, "u": t.u})),
        }))?;
    } else {
        let mut out = io::stdout().lock();
        writeln!(out, "grid {} x {}, normalised residual {}", grid.nr(), grid.ny(), num(residual))?;
        if a.trace.is_none() {
            if let Some(t) = &trace {
                writeln!(out, "r,trace")?;
                for (r, u) in t.r.iter().zip(&t.u) {
                    writeln!(out, "{},{}", num(*r), num(*u))?;
                }
            }
        }
    }
    Ok(0)
}

fn cmd_energy(a: &EnergyArgs, json: bool) -> Result<u8, Failure> {
    if !(a.lambda_min > 0.0 && a.lambda_min < a.lambda_max) || a.count < 2 {
        return Err(Failure::Invalid("need 0 < lambda-min < lambda-max and count >= 2".into()));
    }
    let last = (a.count - 1) as f64;
    let lambdas: Vec<f64> = (0..a.count)
        .map(|k| if k + 1 == a.count { a.lambda_max } else { a.lambda_min * (a.lambda_max / a.lambda_min).powf(k as f64 / last) })
        .collect();
    let opts = EnergyOptions {
        coefficient: match a.coefficient {
            Coefficient::Proof => SphereCoefficient::ProofConsistent,
            Coefficient::Statement => SphereCoefficient::Statement,
        },
        ..EnergyOptions::default()
    };
    let curve = match a.field {
        FieldKind::Homogeneous => {
            let (s, p) = match (a.s, a.p) {
                (Some(s), Some(p)) => (s, p),
                _ => return Err(Failure::Invalid("--s and --p are required for the homogeneous field".into())),
            };
            let params = ProblemParams::new(a.n, s, a.a, p)?;
            energy_curve(&Homogeneous::for_params(&params), &params, &lambdas, &opts)?
        }
        FieldKind::Bubble => {
            let bubble = Bubble::<f64>::new(a.n)?;
            energy_curve(&bubble, &bubble.params(), &lambdas, &opts)?
        }
    };
    let mut buf = Vec::new();
    curve.write_csv(&mut buf)?;
    match &a.output {
        Some(path) => output::write_file(path, &buf)?,
        None if !json => io::stdout().write_all(&buf)?,
        None => {}
    }
    if json {
        emit_json(json!({
            "command": "energy",
            "output": a.output.as_ref().map(|p| p.display().to_string()),
            "drift": curve.drift(),
            "curve": curve,
        }))?;
    }
    Ok(0)
}

fn cmd_verify(suite: verify::Suite, scale: f64, json: bool) -> Result<u8, Failure> {
    if !(scale >= 0.0 && scale.is_finite()) {
        return Err(Failure::Invalid(format!("tolerance scale {scale} must be finite and nonnegative")));
    }
    let checks = verify::run(suite, scale);
    let failed = checks.iter().filter(|c| !c.pass).count();
    if json {
        emit_json(json!({
            "command": "verify",
            "passed": checks.len() - failed,
            "failed": failed,
            "checks": checks,
        }))?;
    } else {
        let mut out = BufWriter::new(io::stdout().lock());
        for c in &checks {
            writeln!(out, "{}", c.line())?;
        }
        writeln!(out, "{} passed, {} failed", checks.len() - failed, failed)?;
        out.flush()?;
    }
    if failed > 0 {
        return Err(Failure::Verification(format!("{failed} invariant(s) failed")));
    }
    Ok(0)
}
