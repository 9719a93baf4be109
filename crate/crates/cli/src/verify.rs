//! Desk-scale verification suites behind `fhle verify`.

use clap::ValueEnum;
use rayon::prelude::*;
use serde::Serialize;

use fhle_core::estimates::{rho_eval, rho_r_eval, rho_ratio_bounds, singular_scaling_check, weighted_trace_scaling_check, CutoffSpec, PhiModel};
use fhle_core::exponents::{jl_threshold, margin_via_lambda, stability_margin};
use fhle_core::extension::{extend_radial, frac_laplacian_oracle, neumann_trace, Analytic, HalfSpaceGrid, RadialFunction};
use fhle_core::kernels::{a_constant, hardy_integral, kernel_K, KernelSpec};
use fhle_core::monotonicity::{
    energy_derivative_first_order, energy_first_order, energy_first_order_parts, Bubble, EnergyOptions, Homogeneous, SphereCoefficient,
};
use fhle_core::specfun::{hardy_gamma, kappa_s, lambda_alpha, ProblemParams};
use fhle_core::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Constants,
    Kernels,
    Extension,
    Energy,
    Estimates,
    All,
}

/// One verified invariant: `|measured - expected| <= tolerance` unless the
/// check states otherwise in its name.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub measured: Option<f64>,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub error: Option<String>,
}

impl Check {
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        match (&self.measured, &self.error) {
            (Some(m), _) => format!(
                "{} {} (measured {:.16e}, expected {:.16e}, tolerance {:.1e})",
                self.name, verdict, m, self.expected, self.tolerance
            ),
            (None, Some(e)) => format!("{} {} ({e})", self.name, verdict),
            (None, None) => format!("{} {}", self.name, verdict),
        }
    }
}

type Job = (&'static str, String, f64, f64, Box<dyn Fn() -> Result<f64> + Send + Sync>);

fn close(suite: &'static str, name: impl Into<String>, expected: f64, tolerance: f64, f: impl Fn() -> Result<f64> + Send + Sync + 'static) -> Job {
    (suite, name.into(), expected, tolerance, Box::new(f))
}

/// A predicate recorded as measured 1 (true) or 0 (false).
fn holds(suite: &'static str, name: impl Into<String>, f: impl Fn() -> Result<bool> + Send + Sync + 'static) -> Job {
    close(suite, name, 1.0, 0.0, move || f().map(|b| if b { 1.0 } else { 0.0 }))
}

fn max_dev(values: impl IntoIterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0f64, |acc, v| Ok(acc.max(v?.abs())))
}

fn params(n: u32, s: f64, a: f64, p: f64) -> Result<ProblemParams<f64>> {
    ProblemParams::new(n, s, a, p)
}

fn constants() -> Vec<Job> {
    const S: &str = "constants";
    vec![
        close(S, "κ_{0.5}=1", 1.0, 1e-12, || kappa_s(0.5)),
        close(S, "κ_s·κ_{1−s}=1", 0.0, 1e-12, || {
            max_dev((1..10).map(|k| {
                let s = k as f64 / 10.0;
                Ok(kappa_s(s)? * kappa_s(1.0 - s)? - 1.0)
            }))
        }),
        close(S, "λ(0)=Λ", 0.0, 1e-12, || {
            max_dev([(2, 0.5), (3, 0.5), (3, 0.75), (5, 0.25), (10, 0.5)].map(|(n, s)| {
                let lam = lambda_alpha(&params(n, s, 0.0, 100.0)?, 0.0)?;
                let hardy = hardy_gamma(n, s)?;
                Ok((lam - hardy) / hardy)
            }))
        }),
        close(S, "λ(1/3)=3^{−1/2} at (n,s)=(3,0.5)", 3f64.sqrt().recip(), 1e-12, || {
            lambda_alpha(&params(3, 0.5, 0.0, 100.0)?, 1.0 / 3.0)
        }),
        close(S, "Λ_{3,0.5}=2/π", 2.0 / std::f64::consts::PI, 1e-12, || hardy_gamma(3, 0.5)),
        close(S, "stability margin equals the multiplier route", 0.0, 1e-10, || {
            let mut panel = Vec::new();
            for n in [2u32, 3, 5, 8] {
                for s in [0.2, 0.5, 0.8] {
                    for a in [0.0, 1.5] {
                        for scale in [1.1, 2.0, 7.0] {
                            let ps = (n as f64 + 2.0 * s + 2.0 * a) / (n as f64 - 2.0 * s);
                            panel.push(params(n, s, a, ps * scale)?);
                        }
                    }
                }
            }
            max_dev(panel.iter().map(|pp| {
                let (m, v) = (stability_margin(pp)?, margin_via_lambda(pp)?);
                Ok((m - v) / m.abs().max(v.abs()).max(1e-300))
            }))
        }),
        holds(S, "no JL root at (n,s,a)=(3,0.5,0)", || Ok(jl_threshold(3, 0.5, 0.0, 1e4)?.is_none())),
        holds(S, "no JL root at (n,s,a)=(3,0.5,1)", || Ok(jl_threshold(3, 0.5, 1.0, 1e4)?.is_none())),
        close(S, "margin at the JL root of (n,s,a)=(10,0.5,0)", 0.0, 1e-8, || {
            let root = jl_threshold(10, 0.5, 0.0, 1e4)?.ok_or_else(|| fhle_core::Error::NonConvergent("no root found".into()))?;
            stability_margin(&params(10, 0.5, 0.0, root.root)?)
        }),
    ]
}

const IDENTITY_PANEL: [(u32, f64, f64, f64); 3] = [(3, 0.5, 1.0, 4.0), (2, 0.25, 0.0, 4.0), (4, 0.75, 1.0, 5.0)];

fn kernels() -> Vec<Job> {
    const S: &str = "kernels";
    let mut jobs = vec![
        close(S, "K_1(0)=1/2 at (n,s)=(3,0.5)", 0.5, 1e-8, || kernel_K(&KernelSpec::new(3, 0.5, 1.0)?, 0.0)),
        close(S, "K_α=K_{n−2s−α} at (n,s,α,c)=(3,0.5,0.3,0.2)", 0.0, 1e-8, || {
            let k = kernel_K(&KernelSpec::new(3, 0.5, 0.3)?, 0.2)?;
            Ok(k - kernel_K(&KernelSpec::new(3, 0.5, 1.7)?, 0.2)?)
        }),
    ];
    for (n, s, a, p) in IDENTITY_PANEL {
        jobs.push(close(
            S,
            format!("A/hardy_integral=λ(α)/Λ at (n,s,a,p)=({n},{s},{a},{p})"),
            0.0,
            1e-4,
            move || {
                let pp = params(n, s, a, p)?;
                let lhs = a_constant(&pp)? / hardy_integral(n, s)?;
                let rhs = lambda_alpha(&pp, pp.alpha().unwrap_or(0.0))? / hardy_gamma(n, s)?;
                Ok((lhs - rhs) / rhs)
            },
        ));
        jobs.push(holds(S, format!("p·A>hardy_integral ⇔ margin>0 at ({n},{s},{a},{p})"), move || {
            let pp = params(n, s, a, p)?;
            Ok((p * a_constant(&pp)? > hardy_integral(n, s)?) == (stability_margin(&pp)? > 0.0))
        }));
    }
    jobs
}

fn poisson(x: f64) -> f64 {
    1.0 / (1.0 + x * x)
}

fn extension() -> Vec<Job> {
    const S: &str = "extension";
    vec![
        close(S, "harmonic extension of 1/(1+x²) matches (1+y)/(x²+(1+y)²)", 0.0, 1e-4, || {
            let grid = HalfSpaceGrid::uniform(5.0, 26, 2.0, 11, 0.0)?;
            let field = extend_radial(&Analytic(poisson), &grid, 1, 0.5)?;
            let ny = grid.ny();
            max_dev((0..grid.nr() * ny).map(|k| {
                let (r, y) = (grid.r_nodes[k / ny], grid.y_nodes[k % ny]);
                Ok(field.values[k] - (1.0 + y) / (r * r + (1.0 + y) * (1.0 + y)))
            }))
        }),
        close(S, "trace identity for the Poisson profile", 0.0, 1e-2, || {
            let u = Analytic(poisson);
            let grid = HalfSpaceGrid::standard(5.0, 0.5)?;
            let trace = neumann_trace(&extend_radial(&u, &grid, 1, 0.5)?)?;
            let oracle = frac_laplacian_oracle(&u, 1, 0.5, &trace.r)?;
            let kappa = kappa_s(0.5)?;
            let scale = oracle.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            max_dev(trace.r.iter().zip(&oracle).map(|(&r, &o)| Ok((trace.value(r) - kappa * o) / scale)))
        }),
    ]
}

fn energy() -> Vec<Job> {
    const S: &str = "energy";
    vec![
        close(S, "first-order energy constant on a homogeneous field over λ∈[1,4]", 0.0, 1e-4, || {
            let pp = params(3, 0.5, 0.0, 4.0)?;
            let h = Homogeneous::for_params(&pp);
            let base = energy_first_order(&h, &pp, 1.0)?;
            max_dev([1.5, 2.0, 3.0, 4.0].map(|l| Ok((energy_first_order(&h, &pp, l)? - base) / base.abs().max(1e-300))))
        }),
        close(S, "dE/dλ=0 on a homogeneous field", 0.0, 1e-10, || {
            let pp = params(3, 0.5, 0.0, 4.0)?;
            energy_derivative_first_order(&Homogeneous::for_params(&pp), &pp, 2.0)
        }),
        holds(S, "dE/dλ≥0 on the bubble", || {
            let bubble = Bubble::<f64>::new(3)?;
            let pp = bubble.params();
            for l in [0.5, 1.0, 2.0, 4.0] {
                if energy_derivative_first_order(&bubble, &pp, l)? < 0.0 {
                    return Ok(false);
                }
            }
            Ok(true)
        }),
        close(S, "dE/dλ matches differences of E on the bubble", 0.0, 1e-4, || bubble_mismatch(SphereCoefficient::ProofConsistent)),
        holds(S, "(p+1) sphere coefficient breaks the derivative identity", || {
            Ok(bubble_mismatch(SphereCoefficient::Statement)?.abs() > 1e-2)
        }),
    ]
}

/// Relative gap between the centred difference of `E` and `dE/dlambda` on the
/// three-dimensional bubble at `lambda = 1.3`.
pub fn bubble_mismatch(coefficient: SphereCoefficient) -> Result<f64> {
    let bubble = Bubble::<f64>::new(3)?;
    let pp = bubble.params();
    let opts = EnergyOptions { coefficient, ..EnergyOptions::default() };
    let (l, h) = (1.3, 1e-3);
    let e = |x: f64| energy_first_order_parts(&bubble, &pp, x, &opts).map(|p| p.total());
    let fd = (e(l + h)? - e(l - h)?) / (2.0 * h);
    let d = energy_derivative_first_order(&bubble, &pp, l)?;
    Ok((fd - d) / d)
}

fn estimates() -> Vec<Job> {
    const S: &str = "estimates";
    vec![
        close(S, "ρ_R=R^{−2s}ρ(·/R) at (n,s,m,R,x)=(1,0.25,1,10,3)", 0.0, 1e-6, || {
            let spec = CutoffSpec::new(1.0, 10.0, PhiModel::One)?;
            let lhs = rho_r_eval(&spec, 3.0, 1, 0.25)?;
            let rhs = 10f64.powf(-0.5) * rho_eval(&spec, 0.3, 1, 0.25)?;
            Ok((lhs - rhs) / rhs)
        }),
        holds(S, "ρ ratio bound c₂/c₁<50 over |x|≤100 at (n,s,m)=(1,0.25,1)", || {
            let spec = CutoffSpec::new(1.0, 1.0, PhiModel::One)?;
            let radii: Vec<f64> = (0..=100).map(|k| k as f64).collect();
            Ok(rho_ratio_bounds(&spec, 1, 0.25, &radii)?.ratio < 50.0)
        }),
        close(S, "singular scaling slope at (3,0.5,1,4)", 2.0 / 3.0, 1e-6, || {
            Ok(singular_scaling_check(&params(3, 0.5, 1.0, 4.0)?, &[1.0, 10.0, 100.0, 1000.0])?.slope_measured)
        }),
        close(S, "weighted trace slope at (3,0.5,1,4)", 8.0 / 3.0, 1e-6, || {
            Ok(weighted_trace_scaling_check(&params(3, 0.5, 1.0, 4.0)?, &[1.0, 10.0, 100.0])?.slope_measured)
        }),
    ]
}

pub fn run(suite: Suite, tolerance_scale: f64) -> Vec<Check> {
    let jobs: Vec<Job> = match suite {
        Suite::Constants => constants(),
        Suite::Kernels => kernels(),
        Suite::Extension => extension(),
        Suite::Energy => energy(),
        Suite::Estimates => estimates(),
        Suite::All => [constants(), kernels(), extension(), energy(), estimates()].into_iter().flatten().collect(),
    };
    jobs.into_par_iter()
        .map(|(suite, name, expected, tolerance, f)| (suite, name, expected, tolerance * tolerance_scale, f))
        .map(|(suite, name, expected, tolerance, f)| match f() {
            Ok(m) => Check {
                suite,
                name,
                measured: Some(m),
                expected,
                tolerance,
                pass: (m - expected).abs() <= tolerance,
                error: None,
            },
            Err(e) => Check {
                suite,
                name,
                measured: None,
                expected,
                tolerance,
                pass: false,
                error: Some(e.to_string()),
            },
        })
        .collect()
}
