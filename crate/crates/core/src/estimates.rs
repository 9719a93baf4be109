//! The cut-off mass `rho(x) = int (eta(x) - eta(y))^2 |x - y|^{-n-2s} dy` for
//! `eta = (1 + |x|^2)^{-m/2}`, its scaled variant `rho_R` and the growth laws
//! of weighted integrals of the singular solution.

use std::cell::RefCell;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exponents::singular_amplitude;
use crate::quadrature::{exp_sinh, gauss_legendre, sphere_area, tanh_sinh, Tolerance};
use crate::scalar::Real;
use crate::specfun::ProblemParams;

/// Radial cut-off `phi` multiplying `eta(x/R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PhiModel<T> {
    One,
    /// 1 on `[0, inner]`, 0 from `outer` on, quintic smootherstep between.
    SmoothBump { inner: T, outer: T },
}

impl<T: Real> PhiModel<T> {
    pub fn eval(&self, r: T) -> T {
        match *self {
            PhiModel::One => T::one(),
            PhiModel::SmoothBump { inner, outer } => {
                if r <= inner {
                    T::one()
                } else if r >= outer {
                    T::zero()
                } else {
                    let t = (outer - r) / (outer - inner);
                    t * t * t * (t * (t * T::lit(6.0) - T::lit(15.0)) + T::lit(10.0))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffSpec<T> {
    /// Decay exponent of `eta`.
    pub m: T,
    /// Scale `R >= 1`.
    pub r_scale: T,
    pub phi: PhiModel<T>,
}

impl<T: Real> CutoffSpec<T> {
    pub fn new(m: T, r_scale: T, phi: PhiModel<T>) -> Result<Self> {
        if !(r_scale >= T::one()) {
            return Err(Error::InvalidParams(format!("R = {} must be at least 1", r_scale.as_f64())));
        }
        if let PhiModel::SmoothBump { inner, outer } = phi {
            if !(inner >= T::zero() && inner < outer) {
                return Err(Error::InvalidParams("bump needs 0 <= inner < outer".into()));
            }
        }
        Ok(Self { m, r_scale, phi })
    }

    /// `eta(x/R) phi(x)`.
    pub fn eta_r(&self, r: T) -> T {
        let z = r / self.r_scale;
        (T::one() + z * z).powf(-self.m / T::lit(2.0)) * self.phi.eval(r)
    }

    pub fn validate(&self, n: u32) -> Result<()> {
        let half_n = T::from_count(n as usize) / T::lit(2.0);
        if !(self.m > half_n) {
            return Err(Error::NonIntegrable {
                m: self.m.as_f64(),
                half_n: half_n.as_f64(),
            });
        }
        Ok(())
    }

    fn features(&self) -> Vec<T> {
        let mut f = vec![self.r_scale];
        if let PhiModel::SmoothBump { inner, outer } = self.phi {
            f.push(inner);
            f.push(outer);
        }
        f
    }
}

fn capture<T: Real, F: Fn(T, T, T) -> Result<T>>(f: F, a: T, b: T, tol: Tolerance<T>) -> Result<T> {
    let failure = RefCell::new(None);
    let est = tanh_sinh(
        |x, da, db| {
            if failure.borrow().is_some() {
                return T::zero();
            }
            f(x, da, db).unwrap_or_else(|e| {
                *failure.borrow_mut() = Some(e);
                T::zero()
            })
        },
        a,
        b,
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(est?.value)
}

fn capture_tail<T: Real, F: Fn(T) -> Result<T>>(f: F, a: T, tol: Tolerance<T>) -> Result<T> {
    let failure = RefCell::new(None);
    let est = exp_sinh(
        |x, _| {
            if failure.borrow().is_some() {
                return T::zero();
            }
            f(x).unwrap_or_else(|e| {
                *failure.borrow_mut() = Some(e);
                T::zero()
            })
        },
        a,
        tol,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(est?.value)
}

fn check_order<T: Real>(s: T) -> Result<()> {
    if s > T::zero() && s < T::one() {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(s.as_f64()))
    }
}

/// `int (f(|x|) - f(|x + z|))^2 |z|^{-n-2s} dz` for radial `f`, with
/// breakpoints where `|x + z|` crosses the feature radii of `f`.
fn radial_mass<T: Real, F: Fn(T) -> T + Sync>(f: &F, features: &[T], x: T, n: u32, s: T, rel: T) -> Result<T> {
    let x = x.abs();
    let fx = f(x);
    let scale = f(T::zero()).abs().max(fx.abs());
    // rho is of order scale^2 L^{-2s} with L the smallest feature radius
    let length = features.iter().fold(T::infinity(), |a, &b| if b > T::zero() { a.min(b) } else { a });
    let typical = scale * scale * length.powf(-T::lit(2.0) * s);
    let tol = Tolerance::new(T::lit(1e-15) * typical, rel).with_max_level(10);
    let wexp = (T::from_count(n as usize) - T::lit(3.0)) / T::lit(2.0);
    let exponent = -T::one() - T::lit(2.0) * s;
    // angular mean of (f(x) - f(x + t omega))^2 over the unit sphere
    let shell = |t: T| -> Result<T> {
        if n == 1 {
            let a = fx - f(x + t);
            let b = fx - f((x - t).abs());
            return Ok(a * a + b * b);
        }
        let diff = (x - t) * (x - t);
        let area = sphere_area::<T>(n - 2);
        // rounding in f(x) - f(d) leaves noise of order eps t
        let floor = T::lit(1e-14) * scale * scale * t.min(T::one());
        let inner_tol = Tolerance::new(floor.max(T::min_positive_value()), rel * T::lit(0.1)).with_max_level(10);
        let v = capture(
            |_, one_plus_c, one_minus_c| {
                let d = (diff + T::lit(2.0) * x * t * one_plus_c).max(T::zero()).sqrt();
                let g = fx - f(d);
                Ok((one_plus_c * one_minus_c).powf(wexp) * g * g)
            },
            -T::one(),
            T::one(),
            inner_tol,
        )?;
        Ok(area * v)
    };
    let mut edges = vec![T::zero()];
    let mut candidates: Vec<T> = vec![x];
    for &q in features {
        candidates.push(q);
        candidates.push(x + q);
        candidates.push((x - q).abs());
    }
    candidates.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    for c in candidates {
        let last = edges[edges.len() - 1];
        if c > last * (T::one() + T::lit(1e-9)) + T::lit(1e-300) {
            edges.push(c);
        }
    }
    // below t0 the shell is t^2 |f'(x)|^2 |S^{n-1}| / n to leading order
    let t0 = T::lit(1e-6) * edges.get(1).copied().unwrap_or(length);
    let h = T::lit(1e-4) * length.min(T::one());
    let slope = (f(x + h) - f((x - h).abs())) / (T::lit(2.0) * h);
    let nf = T::from_count(n as usize);
    let two_minus = T::lit(2.0) - T::lit(2.0) * s;
    let mut total = slope * slope * sphere_area::<T>(n - 1) / nf * t0.powf(two_minus) / two_minus;
    edges[0] = t0;
    for w in edges.windows(2) {
        total = total + capture(|t, _, _| Ok(t.powf(exponent) * shell(t)?), w[0], w[1], tol)?;
    }
    total = total + capture_tail(|t| Ok(t.powf(exponent) * shell(t)?), edges[edges.len() - 1], tol)?;
    Ok(total)
}

/// Relative accuracy of [`rho_eval`] and [`rho_r_eval`].
pub const RHO_TOL: f64 = 1e-11;

/// `rho(x)` with `eta = (1 + |x|^2)^{-m/2}`; `spec.r_scale` and `spec.phi` are ignored.
pub fn rho_eval<T: Real>(spec: &CutoffSpec<T>, x_radius: T, n: u32, s: T) -> Result<T> {
    check_order(s)?;
    spec.validate(n)?;
    let m = spec.m;
    let eta = move |r: T| (T::one() + r * r).powf(-m / T::lit(2.0));
    radial_mass(&eta, &[T::one()], x_radius, n, s, T::lit(RHO_TOL))
}

/// `rho_R(x)` with `eta_R(x) = eta(x/R) phi(x)`.
pub fn rho_r_eval<T: Real>(spec: &CutoffSpec<T>, x_radius: T, n: u32, s: T) -> Result<T> {
    check_order(s)?;
    spec.validate(n)?;
    rho_r_with(spec, x_radius, n, s, T::lit(RHO_TOL))
}

fn rho_r_with<T: Real>(spec: &CutoffSpec<T>, x_radius: T, n: u32, s: T, rel: T) -> Result<T> {
    let eta = |r: T| spec.eta_r(r);
    radial_mass(&eta, &spec.features(), x_radius, n, s, rel)
}

/// Least-squares slope of `ln values` against `ln radii`.
pub fn loglog_slope<T: Real>(radii: &[T], values: &[T]) -> T {
    let k = T::from_count(radii.len());
    let xs: Vec<T> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<T> = values.iter().map(|v| v.abs().ln()).collect();
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / k;
    let my = ys.iter().fold(T::zero(), |a, &b| a + b) / k;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (&x, &y) in xs.iter().zip(&ys) {
        sxy = sxy + (x - mx) * (y - my);
        sxx = sxx + (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Outcome of a growth-law check, serialised as one JSON record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingReport<T> {
    pub check: String,
    pub params: ProblemParams<T>,
    pub radii: Vec<T>,
    pub values: Vec<T>,
    pub slope_expected: T,
    pub slope_measured: T,
    /// Slope of the same integrals evaluated by quadrature.
    pub slope_quadrature: Option<T>,
    pub max_ratio: Option<T>,
}

impl<T: Real> ScalingReport<T> {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Extreme values of `rho(x) (1 + |x|^2)^{n/2 + s}` over the given radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioBounds<T> {
    pub c1: T,
    pub c2: T,
    pub ratio: T,
}

pub fn rho_ratio_bounds<T: Real>(spec: &CutoffSpec<T>, n: u32, s: T, radii: &[T]) -> Result<RatioBounds<T>> {
    let e = T::from_count(n as usize) / T::lit(2.0) + s;
    let vals = radii
        .par_iter()
        .map(|&x| Ok(rho_eval(spec, x, n, s)? * (T::one() + x * x).powf(e)))
        .collect::<Result<Vec<T>>>()?;
    let c1 = vals.iter().fold(T::infinity(), |a, &b| a.min(b));
    let c2 = vals.iter().fold(T::zero(), |a, &b| a.max(b));
    Ok(RatioBounds { c1, c2, ratio: c2 / c1 })
}

/// Largest `rho_R(x) / (eta(x/R)^2 |x|^{-n-2s} + R^{-2s} rho(x/R))` over `radii > 0`.
pub fn rho_r_bound_constant<T: Real>(spec: &CutoffSpec<T>, n: u32, s: T, radii: &[T]) -> Result<T> {
    let r = spec.r_scale;
    let nf = T::from_count(n as usize);
    let vals = radii
        .par_iter()
        .filter(|x| **x > T::zero())
        .map(|&x| {
            let lhs = rho_r_eval(spec, x, n, s)?;
            let z = x / r;
            let eta = (T::one() + z * z).powf(-spec.m / T::lit(2.0));
            let rhs = eta * eta * x.powf(-nf - T::lit(2.0) * s) + r.powf(-T::lit(2.0) * s) * rho_eval(spec, z, n, s)?;
            Ok(lhs / rhs)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(vals.into_iter().fold(T::zero(), |a, b| a.max(b)))
}

/// `n - (2s(p+1) + 2a)/(p-1)`.
pub fn growth_exponent<T: Real>(params: &ProblemParams<T>) -> T {
    let (s, a, p) = (params.s, params.a, params.p);
    params.dim() - (T::lit(2.0) * s * (p + T::one()) + T::lit(2.0) * a) / (p - T::one())
}

fn check_radii<T: Real>(radii: &[T]) -> Result<()> {
    if radii.len() < 2 || !radii.windows(2).all(|w| w[0] < w[1]) || !(radii[0] > T::zero()) {
        return Err(Error::InvalidParams("need at least two increasing positive radii".into()));
    }
    Ok(())
}

/// `int_{B_R} |x|^a u_s^{p+1}` for the singular solution `u_s = A |x|^{-(2s+a)/(p-1)}`:
/// `|S^{n-1}| A^{p+1} R^e / e` when `e > 0`, and the exterior integral
/// `|S^{n-1}| A^{p+1} R^e / |e|` when `e < 0`.
pub fn singular_scaling_check<T: Real>(params: &ProblemParams<T>, radii: &[T]) -> Result<ScalingReport<T>> {
    check_radii(radii)?;
    let e = growth_exponent(params);
    if e.abs() < T::lit(1e-12) {
        return Err(Error::ExponentZero);
    }
    let amp = singular_amplitude(params)?;
    let n = params.n;
    let c = sphere_area::<T>(n - 1) * amp.powf(params.p + T::one());
    let values: Vec<T> = radii.iter().map(|&r| c * r.powf(e) / e.abs()).collect();
    // the same integrals by quadrature of the radial power
    let power = params.a - params.beta() * (params.p + T::one()) + params.dim() - T::one();
    let tol = Tolerance::new(T::lit(1e-300), T::lit(1e-12)).with_max_level(10);
    let quad = radii
        .iter()
        .map(|&r| {
            let v = if e > T::zero() {
                tanh_sinh(|t, _, _| t.powf(power), T::zero(), r, tol)?.value
            } else {
                exp_sinh(|t, _| t.powf(power), r, tol)?.value
            };
            Ok(c * v)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(ScalingReport {
        check: "singular_boundary_integral".into(),
        params: *params,
        radii: radii.to_vec(),
        slope_measured: loglog_slope(radii, &values),
        slope_quadrature: Some(loglog_slope(radii, &quad)),
        values,
        slope_expected: e,
        max_ratio: None,
    })
}

/// `int u_s^2 rho_R dx` for the singular solution with `phi = 1`, whose
/// growth in `R` is compared with `R^e`.
pub fn singular_rho_check<T: Real>(params: &ProblemParams<T>, m: T, radii: &[T]) -> Result<ScalingReport<T>> {
    check_radii(radii)?;
    check_order(params.s)?;
    let nf = params.dim();
    let half_n = nf / T::lit(2.0);
    let upper = half_n + params.s * (params.p + T::one()) / T::lit(2.0);
    if !(m > half_n && m < upper) {
        return Err(Error::InvalidParams(format!(
            "m = {} outside ({}, {})",
            m.as_f64(),
            half_n.as_f64(),
            upper.as_f64()
        )));
    }
    let amp = singular_amplitude(params)?;
    let beta = params.beta();
    let n = params.n;
    let s = params.s;
    let near_power = nf - T::lit(2.0) * beta;
    if !(near_power > T::zero()) {
        return Err(Error::InvalidParams("u_s^2 is not integrable at the origin".into()));
    }
    let rule = gauss_legendre::<T>(10);
    let decade = T::lit(10.0).ln();
    let values = radii
        .par_iter()
        .map(|&r| {
            let spec = CutoffSpec::new(m, r, PhiModel::One)?;
            let rho = |x: T| rho_r_with(&spec, x, n, s, T::lit(1e-10));
            // integrand x^{n-1-2 beta} rho_R(x) is smooth in ln x; rho_R is flat
            // below 1e-3 R and decays like |x|^{-n-2s} beyond 1e6 R
            let lo = r * T::lit(1e-3);
            let hi = r * T::lit(1e6);
            let mut total = rho(T::zero())? * lo.powf(near_power) / near_power;
            for k in 0..9 {
                let a = lo.ln() + decade * T::from_count(k);
                for (&u, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let x = (a + decade * (u + T::one()) / T::lit(2.0)).exp();
                    total = total + w * decade / T::lit(2.0) * x.powf(near_power) * rho(x)?;
                }
            }
            total = total + hi.powf(near_power) * rho(hi)? / (T::lit(2.0) * beta + T::lit(2.0) * s);
            Ok(sphere_area::<T>(n - 1) * amp * amp * total)
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(ScalingReport {
        check: "singular_rho_mass".into(),
        params: *params,
        radii: radii.to_vec(),
        slope_measured: loglog_slope(radii, &values),
        slope_quadrature: None,
        values,
        slope_expected: growth_exponent(params),
        max_ratio: None,
    })
}

/// `int_{B_R} y^w u_e^2` for the homogeneous model field
/// `u_e = |X|^{-beta} (1 + y/(2|X|))`, `w = 1 - 2s` for `s < 1` and `3 - 2s`
/// for `1 < s < 2`. The growth exponent is `n + 1 + w - 2 beta`.
pub fn weighted_trace_scaling_check<T: Real>(params: &ProblemParams<T>, radii: &[T]) -> Result<ScalingReport<T>> {
    check_radii(radii)?;
    params.validate()?;
    let two = T::lit(2.0);
    let s = params.s;
    let w = if s < T::one() { T::one() - two * s } else { T::lit(3.0) - two * s };
    let beta = params.beta();
    let slope = params.dim() + T::one() + w - two * beta;
    if slope.abs() < T::lit(1e-12) {
        return Err(Error::ExponentZero);
    }
    if slope < T::zero() {
        return Err(Error::InvalidParams("model field not square integrable near the origin".into()));
    }
    let n = params.n;
    let nm1 = params.dim() - T::one();
    let tol = Tolerance::new(T::lit(1e-300), T::lit(1e-12)).with_max_level(10);
    let g = |cos_phi: T| T::one() + cos_phi / two;
    // angular factor over the upper half of S^n
    let theta = capture(
        |phi, _, to_top| {
            let c = to_top.sin();
            let jac = if n == 1 { T::one() } else { phi.sin().powf(nm1) };
            Ok(jac * c.powf(w) * g(c) * g(c))
        },
        T::zero(),
        T::PI() / two,
        tol,
    )? * sphere_area::<T>(n - 1);
    let values: Vec<T> = radii.iter().map(|&r| theta * r.powf(slope) / slope).collect();
    // full ball quadrature of the field
    let quad = radii
        .iter()
        .map(|&r| {
            capture(
                |rho, _, _| {
                    let sphere = capture(
                        |phi, _, to_top| {
                            let c = to_top.sin();
                            let jac = if n == 1 { T::one() } else { phi.sin().powf(nm1) };
                            let u = rho.powf(-beta) * g(c);
                            Ok(jac * (rho * c).powf(w) * u * u)
                        },
                        T::zero(),
                        T::PI() / two,
                        tol,
                    )?;
                    Ok(rho.powf(params.dim()) * sphere)
                },
                T::zero(),
                r,
                Tolerance::new(T::lit(1e-300), T::lit(1e-10)).with_max_level(10),
            )
            .map(|v| v * sphere_area::<T>(n - 1))
        })
        .collect::<Result<Vec<T>>>()?;
    Ok(ScalingReport {
        check: "weighted_trace_integral".into(),
        params: *params,
        radii: radii.to_vec(),
        slope_measured: loglog_slope(radii, &values),
        slope_quadrature: Some(loglog_slope(radii, &quad)),
        values,
        slope_expected: slope,
        max_ratio: None,
    })
}
