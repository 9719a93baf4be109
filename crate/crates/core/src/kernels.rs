//! Spherical kernels of the homogeneous-solution equation.
//!
//! For `u = r^{-beta} psi(theta)` the singular-integral form of `(-Delta)^s`
//! splits into a multiple of `psi(theta)`, with coefficient `A_{n,s,a}`, plus
//! a difference term against the folded kernel `K_beta`. All integrands
//! depend on `theta` and `sigma` only through `c = <theta, sigma>`, so sphere
//! integrals reduce to one dimension in `c`.
//!
//! Both constants here omit the normalisation of the singular integral; their
//! ratio with the Gamma forms is the measured constant [`c_norm`].

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_jacobi, sphere_area, tanh_sinh, Tolerance};
use crate::scalar::Real;
use crate::specfun::{hardy_gamma, ProblemParams, SobolevExponent};

/// Default exclusion distance from `c = 1`.
pub const DEFAULT_CUTOFF: f64 = 1e-6;

/// Kernel `K_alpha` in dimension `n` and order `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec<T> {
    pub alpha: T,
    pub n: u32,
    pub s: T,
    /// Evaluations are refused for `c > 1 - cutoff_delta`.
    pub cutoff_delta: T,
}

impl<T: Real> KernelSpec<T> {
    pub fn new(n: u32, s: T, alpha: T) -> Result<Self> {
        let spec = Self {
            alpha,
            n,
            s,
            cutoff_delta: T::lit(DEFAULT_CUTOFF),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_cutoff(mut self, cutoff_delta: T) -> Result<Self> {
        self.cutoff_delta = cutoff_delta;
        self.validate()?;
        Ok(self)
    }

    /// Kernel of the homogeneous-solution equation, `alpha = (2s+a)/(p-1)`.
    pub fn for_params(params: &ProblemParams<T>) -> Result<Self> {
        Self::new(params.n, params.s, params.beta())
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.s)?;
        if !(self.cutoff_delta > T::zero() && self.cutoff_delta < T::one()) {
            return Err(Error::InvalidParams(format!(
                "cutoff_delta={} must lie in (0, 1)",
                self.cutoff_delta.as_f64()
            )));
        }
        let n = T::from_count(self.n as usize);
        let two = T::lit(2.0);
        if self.n < 1 || !(n > two * self.s) {
            return Err(Error::DimensionTooSmall {
                n: self.n,
                two_s: (two * self.s).as_f64(),
            });
        }
        if !(n - T::one() - self.alpha > -T::one()) || !(two * self.s - T::one() + self.alpha > -T::one()) {
            return Err(Error::NonConvergent(format!(
                "t-exponents {} and {} must exceed -1",
                (n - T::one() - self.alpha).as_f64(),
                (two * self.s - T::one() + self.alpha).as_f64()
            )));
        }
        Ok(())
    }

    fn half_power(&self) -> T {
        (T::from_count(self.n as usize) + T::lit(2.0) * self.s) / T::lit(2.0)
    }
}

fn check_order<T: Real>(s: T) -> Result<()> {
    if s > T::zero() && s < T::one() {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(s.as_f64()))
    }
}

fn inner_tol<T: Real>() -> Tolerance<T> {
    Tolerance::new(T::lit(1e-16), T::lit(1e-11)).with_max_level(10)
}

fn outer_tol<T: Real>() -> Tolerance<T> {
    Tolerance::new(T::lit(1e-14), T::lit(1e-9)).with_max_level(10)
}

/// `ln(u^2 + 2(1-u) eps)`, the log of `t^2 + 1 - 2tc` with `u = 1-t`, `eps = 1-c`,
/// evaluated without underflow.
fn ln_distance<T: Real>(u: T, eps: T) -> T {
    let q = T::lit(2.0) * (T::one() - u) * eps;
    let m = u.max(q.sqrt());
    if m == T::zero() {
        return T::neg_infinity();
    }
    let ratio = u / m;
    T::lit(2.0) * m.ln() + (ratio * ratio + q / m / m).ln()
}

/// `ln t` from `t` and `u = 1 - t`.
fn ln_t<T: Real>(t: T, u: T) -> T {
    if u < T::lit(0.5) {
        (-u).ln_1p()
    } else {
        t.ln()
    }
}

/// Integral of `f(t, u)`, `u = 1 - t`, over `t in [0, 1]`, taken in `u` and
/// split where the near-diagonal peak of width `sqrt(eps)` ends.
fn integrate_t<T, F>(eps: T, f: F, tol: Tolerance<T>) -> Result<T>
where
    T: Real,
    F: Fn(T, T) -> T,
{
    let w = eps.sqrt();
    if eps > T::zero() && w < T::lit(0.25) {
        let near = tanh_sinh(|u, _, _| f(T::one() - u, u), T::zero(), w, tol)?;
        let far = tanh_sinh(|u, _, t| f(t, u), w, T::one(), tol)?;
        Ok(near.value + far.value)
    } else {
        Ok(tanh_sinh(|u, _, t| f(t, u), T::zero(), T::one(), tol)?.value)
    }
}

/// `K_alpha(c) = int_0^1 (t^{n-1-alpha} + t^{2s-1+alpha}) / (t^2 + 1 - 2tc)^{(n+2s)/2} dt`.
#[allow(non_snake_case)]
pub fn kernel_K<T: Real>(spec: &KernelSpec<T>, c: T) -> Result<T> {
    spec.validate()?;
    if !(c >= -T::one()) {
        return Err(Error::OutOfRange {
            what: "c",
            value: c.as_f64(),
            range: "[-1, 1 - cutoff_delta]",
        });
    }
    let limit = T::one() - spec.cutoff_delta;
    if c > limit {
        return Err(Error::SingularEvaluation {
            c: c.as_f64(),
            limit: limit.as_f64(),
        });
    }
    kernel_unchecked(spec, T::one() - c)
}

fn kernel_unchecked<T: Real>(spec: &KernelSpec<T>, eps: T) -> Result<T> {
    let n = T::from_count(spec.n as usize);
    let e1 = n - T::one() - spec.alpha;
    let e2 = T::lit(2.0) * spec.s - T::one() + spec.alpha;
    let k = spec.half_power();
    integrate_t(
        eps,
        |t, u| {
            let lt = ln_t(t, u);
            let ld = ln_distance(u, eps);
            (e1 * lt - k * ld).exp() + (e2 * lt - k * ld).exp()
        },
        Tolerance::new(T::lit(1e-300), T::lit(1e-10)).with_max_level(10),
    )
}

/// Numerator of the folded constants,
/// `(1 - t^{-g}) t^{n-1} + (1 - t^g) t^{2s-1}`, which vanishes to second
/// order at `t = 1`.
struct FoldNumerator<T> {
    exps: [T; 4],
    /// Taylor coefficients in `ln t` from the quadratic term on.
    series: Vec<T>,
}

const FOLD_SERIES_TERMS: usize = 28;
const FOLD_SERIES_RADIUS: f64 = 0.1;

impl<T: Real> FoldNumerator<T> {
    fn new(n: u32, s: T, gamma: T) -> Self {
        let a = T::from_count(n as usize) - T::one();
        let b = T::lit(2.0) * s - T::one();
        let exps = [a, a - gamma, b, b + gamma];
        let mut series = Vec::with_capacity(FOLD_SERIES_TERMS);
        let mut powers = [T::one(); 4];
        let mut fact = T::one();
        for m in 1..FOLD_SERIES_TERMS + 2 {
            fact = fact * T::from_count(m);
            for (p, e) in powers.iter_mut().zip(&exps) {
                *p = *p * *e;
            }
            if m >= 2 {
                series.push((powers[0] - powers[1] + powers[2] - powers[3]) / fact);
            }
        }
        Self { exps, series }
    }

    /// Sign and log-magnitude of the numerator at `t`, `u = 1 - t`.
    fn log_abs(&self, t: T, u: T) -> Option<(T, T)> {
        let l = ln_t(t, u);
        let (v, extra) = if l.abs() <= T::lit(FOLD_SERIES_RADIUS) {
            let mut acc = T::zero();
            for &c in self.series.iter().rev() {
                acc = acc * l + c;
            }
            (acc, T::lit(2.0) * l.abs().ln())
        } else {
            let [a, ag, b, bg] = self.exps;
            let v = (a * l).exp() - (ag * l).exp() + (b * l).exp() - (bg * l).exp();
            (v, T::zero())
        };
        if v == T::zero() || !v.is_finite() {
            return None;
        }
        Some((v.signum(), v.abs().ln() + extra))
    }
}

/// `int_{S^{n-1}} int_0^1 N(t) / (t^2 + 1 - 2tc)^{(n+2s)/2} dt dsigma`.
fn folded_constant<T: Real>(n: u32, s: T, gamma: T) -> Result<T> {
    let num = FoldNumerator::new(n, s, gamma);
    let k = (T::from_count(n as usize) + T::lit(2.0) * s) / T::lit(2.0);
    let shift_power = k - T::lit(1.5);
    // inner integral scaled by eps^{k - 3/2}, which is bounded as eps -> 0
    let inner = |eps: T, scaled: bool| -> Result<T> {
        let shift = if scaled { shift_power * eps.ln() } else { T::zero() };
        integrate_t(
            eps,
            |t, u| match num.log_abs(t, u) {
                Some((sign, ln_n)) => sign * (ln_n - k * ln_distance(u, eps) + shift).exp(),
                None => T::zero(),
            },
            inner_tol(),
        )
    };
    if n == 1 {
        return Ok(inner(T::zero(), false)? + inner(T::lit(2.0), false)?);
    }
    let area = sphere_area::<T>(n - 2);
    let wexp = (T::from_count(n as usize) - T::lit(3.0)) / T::lit(2.0);
    let failure = std::cell::RefCell::new(None);
    let est = tanh_sinh(
        |_, one_plus_c, eps| {
            if eps <= T::zero() || failure.borrow().is_some() {
                return T::zero();
            }
            match inner(eps, true) {
                Ok(j) => area * one_plus_c.powf(wexp) * eps.powf(-s) * j,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    T::zero()
                }
            }
        },
        -T::one(),
        T::one(),
        outer_tol(),
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(est?.value)
}

fn require_supercritical<T: Real>(params: &ProblemParams<T>) -> Result<()> {
    params.validate()?;
    check_order(params.s)?;
    match params.p_sobolev() {
        SobolevExponent::Finite(ps) if params.p > ps => Ok(()),
        ps => Err(Error::NotSupercritical {
            p: params.p.as_f64(),
            p_sobolev: ps.as_real().as_f64(),
        }),
    }
}

/// `A_{n,s,a} = int_0^inf int_{S^{n-1}} (1 - t^{-beta}) t^{n-1} / (t^2 + 1 - 2t<theta,sigma>)^{(n+2s)/2}`,
/// the coefficient of `psi(theta)` in the homogeneous-solution equation.
pub fn a_constant<T: Real>(params: &ProblemParams<T>) -> Result<T> {
    check_order(params.s)?;
    require_supercritical(params)?;
    folded_constant(params.n, params.s, params.beta())
}

/// Integral form of the Hardy constant: the same fold with exponent `(n-2s)/2`.
pub fn hardy_integral<T: Real>(n: u32, s: T) -> Result<T> {
    check_order(s)?;
    let nf = T::from_count(n as usize);
    let two = T::lit(2.0);
    if n < 1 || !(nf > two * s) {
        return Err(Error::DimensionTooSmall {
            n,
            two_s: (two * s).as_f64(),
        });
    }
    folded_constant(n, s, (nf - two * s) / two)
}

type NormKey = (u32, u64, usize);

fn norm_cache() -> &'static RwLock<HashMap<NormKey, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<NormKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// `hardy_integral(n, s) / hardy_gamma(n, s)`, cached per `(n, s)`.
pub fn c_norm<T: Real>(n: u32, s: T) -> Result<T> {
    let key = (n, s.as_f64().to_bits(), std::mem::size_of::<T>());
    if let Some(&v) = norm_cache().read().expect("cache lock").get(&key) {
        return Ok(T::lit(v));
    }
    let v = hardy_integral(n, s)? / hardy_gamma(n, s)?;
    norm_cache()
        .write()
        .expect("cache lock")
        .entry(key)
        .or_insert(v.as_f64());
    Ok(v)
}

/// A zonal function `psi` on `S^{n-1}`, sampled in the cosine `c` of the
/// polar angle.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalProfile<T> {
    pub n: u32,
    pub nodes: Vec<T>,
    /// Quadrature weights including the surface factor; they sum to `|S^{n-1}|`.
    pub weights: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> SphericalProfile<T> {
    /// Samples `psi` on `m` Gauss-Jacobi nodes for the weight
    /// `(1-c^2)^{(n-3)/2}`; for `n = 1` the sphere is `{-1, 1}`.
    pub fn sample<F: Fn(T) -> T>(n: u32, m: usize, psi: F) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        let (nodes, weights) = if n == 1 {
            (vec![-T::one(), T::one()], vec![T::one(), T::one()])
        } else {
            if m < 2 {
                return Err(Error::InvalidParams("profile needs at least two nodes".into()));
            }
            let e = (T::from_count(n as usize) - T::lit(3.0)) / T::lit(2.0);
            let rule = gauss_jacobi(m, e, e);
            let area = sphere_area::<T>(n - 2);
            (rule.nodes, rule.weights.into_iter().map(|w| w * area).collect())
        };
        let values = nodes.iter().map(|&c| psi(c)).collect();
        Self::from_parts(n, nodes, weights, values)
    }

    pub fn constant(n: u32, m: usize, value: T) -> Result<Self> {
        Self::sample(n, m, |_| value)
    }

    pub fn from_parts(n: u32, nodes: Vec<T>, weights: Vec<T>, values: Vec<T>) -> Result<Self> {
        if nodes.len() != weights.len() || nodes.len() != values.len() || nodes.is_empty() {
            return Err(Error::InvalidParams("profile arrays differ in length".into()));
        }
        if weights.iter().any(|&w| !(w > T::zero())) {
            return Err(Error::InvalidParams("profile weights must be positive".into()));
        }
        if nodes.iter().any(|&c| !(c >= -T::one() && c <= T::one())) {
            return Err(Error::InvalidParams("profile nodes must lie in [-1, 1]".into()));
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParams("profile nodes must increase".into()));
        }
        Ok(Self {
            n,
            nodes,
            weights,
            values,
        })
    }

    /// Sum of the weights, `|S^{n-1}|` for a well-formed profile.
    pub fn total_weight(&self) -> T {
        self.weights.iter().copied().sum()
    }

    /// Barycentric interpolant through the samples.
    pub fn eval(&self, c: T) -> T {
        Interpolant::new(self).eval(c)
    }
}

/// Barycentric form of the polynomial through the profile samples.
struct Interpolant<'a, T> {
    profile: &'a SphericalProfile<T>,
    weights: Vec<T>,
}

impl<'a, T: Real> Interpolant<'a, T> {
    fn new(profile: &'a SphericalProfile<T>) -> Self {
        let x = &profile.nodes;
        let m = x.len();
        let mut w = vec![T::one(); m];
        for j in 0..m {
            for k in 0..m {
                if j != k {
                    w[j] = w[j] / (x[j] - x[k]);
                }
            }
        }
        let scale = w.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
        let weights = w.into_iter().map(|v| v / scale).collect();
        Self { profile, weights }
    }

    fn eval(&self, c: T) -> T {
        let p = self.profile;
        if p.nodes.len() == 1 {
            return p.values[0];
        }
        let mut num = T::zero();
        let mut den = T::zero();
        for ((&x, &v), &w) in p.nodes.iter().zip(&p.values).zip(&self.weights) {
            let d = c - x;
            if d == T::zero() {
                return v;
            }
            num = num + w / d * v;
            den = den + w / d;
        }
        num / den
    }
}

/// Averages of the zonal profile over the circles `<theta, sigma> = c`
/// around a fixed `theta`.
struct LatitudeMean<T> {
    /// Cosines of the azimuth with normalised weights.
    azimuth: Vec<(T, T)>,
}

impl<T: Real> LatitudeMean<T> {
    fn new(n: u32) -> Self {
        let azimuth = if n <= 2 {
            let half = T::lit(0.5);
            vec![(-T::one(), half), (T::one(), half)]
        } else {
            let e = (T::from_count(n as usize) - T::lit(4.0)) / T::lit(2.0);
            let rule = gauss_jacobi(24, e, e);
            let total: T = rule.weights.iter().copied().sum();
            rule.nodes
                .into_iter()
                .zip(rule.weights)
                .map(|(x, w)| (x, w / total))
                .collect()
        };
        Self { azimuth }
    }

    fn mean(&self, profile: &Interpolant<'_, T>, c_theta: T, c: T) -> T {
        let s_theta = (T::one() - c_theta * c_theta).max(T::zero()).sqrt();
        let s_c = (T::one() - c * c).max(T::zero()).sqrt();
        self.azimuth
            .iter()
            .map(|&(x, w)| {
                let pole = (c * c_theta + s_c * s_theta * x).max(-T::one()).min(T::one());
                w * profile.eval(pole)
            })
            .sum()
    }
}

/// Largest nodal residual of
/// `psi A + int K_beta(<theta, sigma>) (psi(theta) - psi(sigma)) dsigma - |psi|^{p-1} psi`.
///
/// The difference term is integrated over `c <= 1 - cutoff` after averaging
/// `psi` over each latitude circle, so the integrand is integrable at the
/// diagonal.
pub fn homogeneous_residual<T: Real>(profile: &SphericalProfile<T>, params: &ProblemParams<T>) -> Result<T> {
    homogeneous_residual_with_cutoff(profile, params, T::lit(DEFAULT_CUTOFF))
}

pub fn homogeneous_residual_with_cutoff<T: Real>(
    profile: &SphericalProfile<T>,
    params: &ProblemParams<T>,
    cutoff: T,
) -> Result<T> {
    let diff = difference_term(profile, params, cutoff)?;
    let a = a_constant(params)?;
    let p = params.p;
    Ok(profile
        .values
        .iter()
        .zip(diff)
        .map(|(&v, d)| (v * a + d - v.abs().powf(p - T::one()) * v).abs())
        .fold(T::zero(), T::max))
}

/// `int_{<theta,sigma> <= 1-cutoff} K_beta(<theta, sigma>) (psi(theta) - psi(sigma)) dsigma`
/// at every node `theta` of the profile.
pub fn difference_term<T: Real>(
    profile: &SphericalProfile<T>,
    params: &ProblemParams<T>,
    cutoff: T,
) -> Result<Vec<T>> {
    if profile.n != params.n {
        return Err(Error::InvalidParams(format!(
            "profile lives on S^{} but n = {}",
            profile.n as i64 - 1,
            params.n
        )));
    }
    let spec = KernelSpec::for_params(params)?.with_cutoff(cutoff)?;
    if params.n == 1 {
        let k_opposite = kernel_K(&spec, -T::one())?;
        let m = profile.values.len();
        return Ok((0..m)
            .map(|i| k_opposite * (profile.values[i] - profile.values[m - 1 - i]))
            .collect());
    }
    let interp = Interpolant::new(profile);
    let means = LatitudeMean::new(params.n);
    let area = sphere_area::<T>(params.n - 2);
    let wexp = (params.dim() - T::lit(3.0)) / T::lit(2.0);
    let upper = T::one() - cutoff;
    let mut out = Vec::with_capacity(profile.nodes.len());
    for (&c_theta, &v) in profile.nodes.iter().zip(&profile.values) {
        let failure = std::cell::RefCell::new(None);
        let diff = tanh_sinh(
            |c, one_plus_c, d| {
                if failure.borrow().is_some() {
                    return T::zero();
                }
                let eps = d + cutoff;
                let delta = v - means.mean(&interp, c_theta, c);
                if delta == T::zero() {
                    return T::zero();
                }
                match kernel_unchecked(&spec, eps) {
                    Ok(k) => area * (one_plus_c * eps).powf(wexp) * k * delta,
                    Err(e) => {
                        *failure.borrow_mut() = Some(e);
                        T::zero()
                    }
                }
            },
            -T::one(),
            upper,
            Tolerance::new(T::lit(1e-12), T::lit(1e-8)).with_max_level(8),
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        out.push(diff?.value);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_symmetric_point() {
        let spec = KernelSpec::new(3, 0.5f64, 1.0).unwrap();
        let k = kernel_K(&spec, 0.0).unwrap();
        assert!((k - 0.5).abs() < 1e-10, "{k}");
    }

    #[test]
    fn kernel_rejects_diagonal() {
        let spec = KernelSpec::new(3, 0.5f64, 0.3).unwrap();
        assert!(matches!(kernel_K(&spec, 1.0 - 1e-7), Err(Error::SingularEvaluation { .. })));
        assert!(kernel_K(&spec, 1.0 - 1e-6).unwrap() > 0.0);
        assert!(matches!(KernelSpec::new(3, 1.5f64, 0.3), Err(Error::UnsupportedOrder(_))));
        assert!(matches!(KernelSpec::new(3, 0.5f64, 3.5), Err(Error::NonConvergent(_))));
    }

    #[test]
    fn fold_numerator_series_matches_direct() {
        let num = FoldNumerator::new(5, 0.3f64, 1.1);
        for &u in &[1e-3, 0.02, 0.09] {
            let t = 1.0 - u;
            let (sign, l) = num.log_abs(t, u).unwrap();
            let lt = t.ln();
            let direct = (4.0 * lt).exp() - (2.9 * lt).exp() + (-0.4 * lt).exp() - (0.7 * lt).exp();
            assert!((sign * l.exp() - direct).abs() <= 1e-9 * direct.abs(), "{u}");
        }
    }

    #[test]
    fn ln_distance_survives_underflow() {
        let v = ln_distance(1e-200f64, 1e-250);
        assert!((v - (2e-250f64).ln()).abs() < 1e-10);
        let v = ln_distance(1e-160f64, 1e-330);
        assert!((v - (-320.0 * 10f64.ln())).abs() < 1e-10);
        let v = ln_distance(0.0f64, 1e-300);
        assert!((v - (2e-300f64).ln()).abs() < 1e-10);
    }

    #[test]
    fn profile_weights_cover_sphere() {
        for n in 1..=6 {
            let p = SphericalProfile::<f64>::constant(n, 12, 1.0).unwrap();
            let area: f64 = sphere_area(n - 1);
            assert!((p.total_weight() - area).abs() < 1e-10 * area, "n={n}");
        }
    }

    #[test]
    fn interpolation_reproduces_polynomials() {
        let p = SphericalProfile::<f64>::sample(3, 10, |c| c * c * c - 2.0 * c).unwrap();
        for &c in &[-0.93, -0.1, 0.42, 0.999] {
            assert!((p.eval(c) - (c * c * c - 2.0 * c)).abs() < 1e-12);
        }
    }

    #[test]
    fn hardy_integral_normalisation() {
        use crate::specfun::singular_integral_constant;
        for &(n, s) in &[(3u32, 0.5f64), (2, 0.25), (1, 0.25)] {
            let cn = c_norm(n, s).unwrap();
            let expected = 1.0 / singular_integral_constant(n, s).unwrap();
            assert!((cn - expected).abs() < 1e-7 * expected, "n={n} s={s}: {cn} vs {expected}");
        }
    }

    #[test]
    fn kernel_symmetry_and_monotonicity() {
        for &c in &[-1.0, -0.4, 0.0, 0.7, 0.999] {
            let k = |alpha: f64| kernel_K(&KernelSpec::new(3, 0.5, alpha).unwrap(), c).unwrap();
            let (a, b) = (k(0.3), k(1.7));
            assert!((a - b).abs() < 1e-8 * a, "c={c}: {a} {b}");
            assert!(k(0.3) > k(0.6) && k(0.6) > k(0.9) && k(0.9) > k(1.0));
        }
    }

    #[test]
    fn a_constant_vanishes_for_large_p() {
        let params = ProblemParams::new(3, 0.5f64, 1.0, 1e7).unwrap();
        let a = a_constant(&params).unwrap();
        let base = a_constant(&ProblemParams::new(3, 0.5f64, 1.0, 4.0).unwrap()).unwrap();
        assert!(a > 0.0 && a < 1e-5 * base, "{a}");
        assert!(matches!(
            a_constant(&ProblemParams::new(3, 0.5f64, 1.0, 2.5).unwrap()),
            Err(Error::NotSupercritical { .. })
        ));
        assert!(matches!(
            a_constant(&ProblemParams::new(5, 1.5f64, 1.0, 9.0).unwrap()),
            Err(Error::UnsupportedOrder(_))
        ));
    }

    #[test]
    fn residual_of_constant_profiles() {
        let params = ProblemParams::new(3, 0.5f64, 1.0, 4.0).unwrap();
        let a = a_constant(&params).unwrap();
        let amp = a.powf(1.0 / 3.0);
        let zero = SphericalProfile::constant(3, 6, 0.0).unwrap();
        assert_eq!(homogeneous_residual(&zero, &params).unwrap(), 0.0);
        let root = SphericalProfile::constant(3, 6, amp).unwrap();
        assert!(homogeneous_residual(&root, &params).unwrap() < 1e-6);
        let double = SphericalProfile::constant(3, 6, 2.0 * amp).unwrap();
        let expected = (2.0 * amp * a * (1.0 - 8.0f64)).abs();
        let r = homogeneous_residual(&double, &params).unwrap();
        assert!((r - expected).abs() < 1e-8 * expected);
    }

    #[test]
    fn zonal_harmonics_are_eigenfunctions() {
        // the difference operator commutes with rotations, so Legendre
        // polynomials in c are eigenfunctions
        let params = ProblemParams::new(3, 0.5f64, 1.0, 4.0).unwrap();
        let p2 = |c: f64| 1.5 * c * c - 0.5;
        let profile = SphericalProfile::sample(3, 8, p2).unwrap();
        let d = difference_term(&profile, &params, 1e-6).unwrap();
        let ratios: Vec<f64> = d.iter().zip(&profile.values).map(|(d, v)| d / v).collect();
        for r in &ratios {
            assert!(*r > 0.0);
            assert!((r - ratios[0]).abs() < 1e-3 * ratios[0], "{ratios:?}");
        }
    }
}
