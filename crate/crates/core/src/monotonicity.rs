//! Monotonicity-formula energies on half-space fields: the rescaling
//! `u_e^lambda(X) = lambda^beta u_e(lambda X)`, the first-order energy and its
//! derivative, the weighted Laplacian `Delta_b` and the higher-order energy.
//!
//! Every `d/dr` below is the radial derivative in `|X|`. Integrals over `B_lambda`
//! use polar coordinates `r = rho sin(phi)`, `y = rho cos(phi)`.

use std::cell::RefCell;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{fmt_real, HalfSpaceField, HalfSpaceFunction};
use crate::quadrature::{sphere_area, tanh_sinh, Tolerance};
use crate::scalar::Real;
use crate::specfun::{kappa_s, ProblemParams};

/// Coefficient of the `int y^{1-2s} u^2` sphere term in the first-order energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SphereCoefficient {
    /// `(s + a/2)/(p - 1)`, the value the derivative identity requires.
    ProofConsistent,
    /// `(s + a/2)/(p + 1)`.
    Statement,
}

#[derive(Debug, Clone, Copy)]
pub struct EnergyOptions<T> {
    pub coefficient: SphereCoefficient,
    /// Constant in front of the nonlinear term of the higher-order energy.
    pub c_ns: T,
    pub rel_tol: T,
    /// Step of the centred differences in `lambda`, relative to `lambda`.
    pub fd_step: T,
}

impl<T: Real> Default for EnergyOptions<T> {
    fn default() -> Self {
        Self {
            coefficient: SphereCoefficient::ProofConsistent,
            c_ns: T::one(),
            rel_tol: T::lit(1e-10),
            fd_step: T::lit(1e-3),
        }
    }
}

/// A closed-form field; the gradient comes from centred differences.
#[derive(Debug, Clone, Copy)]
pub struct ClosedForm<F>(pub F);

impl<T: Real, F: Fn(T, T) -> T + Sync> HalfSpaceFunction<T> for ClosedForm<F> {
    fn value(&self, r: T, y: T) -> Result<T> {
        Ok((self.0)(r.abs(), y))
    }
}

/// A closed-form field with an exact gradient `(d/dr, d/dy)`.
#[derive(Debug, Clone, Copy)]
pub struct ClosedFormGrad<F, G> {
    pub value: F,
    pub gradient: G,
}

impl<T: Real, F: Fn(T, T) -> T + Sync, G: Fn(T, T) -> (T, T) + Sync> HalfSpaceFunction<T> for ClosedFormGrad<F, G> {
    fn value(&self, r: T, y: T) -> Result<T> {
        Ok((self.value)(r.abs(), y))
    }

    fn gradient(&self, r: T, y: T) -> Result<(T, T)> {
        Ok((self.gradient)(r.abs(), y))
    }
}

/// `|X|^{-beta} amplitude (1 + tilt y/|X|)`, homogeneous of degree `-beta`.
#[derive(Debug, Clone, Copy)]
pub struct Homogeneous<T> {
    pub beta: T,
    pub amplitude: T,
    pub tilt: T,
}

impl<T: Real> Homogeneous<T> {
    pub fn for_params(params: &ProblemParams<T>) -> Self {
        Self {
            beta: params.beta(),
            amplitude: T::one(),
            tilt: T::lit(0.5),
        }
    }
}

impl<T: Real> HalfSpaceFunction<T> for Homogeneous<T> {
    fn value(&self, r: T, y: T) -> Result<T> {
        let rho = r.hypot(y);
        Ok(self.amplitude * rho.powf(-self.beta) * (T::one() + self.tilt * y / rho))
    }

    fn gradient(&self, r: T, y: T) -> Result<(T, T)> {
        let r = r.abs();
        let rho = r.hypot(y);
        let rb = self.amplitude * rho.powf(-self.beta);
        let g = T::one() + self.tilt * y / rho;
        let rho2 = rho * rho;
        // d(y/rho)/dr = -r y / rho^3, d(y/rho)/dy = r^2 / rho^3
        let dr = rb * (-self.beta * r / rho2 * g - self.tilt * r * y / (rho2 * rho));
        let dy = rb * (-self.beta * y / rho2 * g + self.tilt * r * r / (rho2 * rho));
        Ok((dr, dy))
    }
}

/// `A ((1 + y)^2 + r^2)^{-(n-1)/2}` with `A^{p-1} = n - 1`: the harmonic
/// extension of the exact solution of `(-Delta)^{1/2} u = u^p`,
/// `p = (n+1)/(n-1)`.
#[derive(Debug, Clone, Copy)]
pub struct Bubble<T> {
    pub n: u32,
    pub amplitude: T,
}

impl<T: Real> Bubble<T> {
    pub fn new(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { n, two_s: 1.0 });
        }
        let nf = T::from_count(n as usize);
        let p = (nf + T::one()) / (nf - T::one());
        Ok(Self {
            n,
            amplitude: (nf - T::one()).powf(T::one() / (p - T::one())),
        })
    }

    pub fn params(&self) -> ProblemParams<T> {
        let nf = T::from_count(self.n as usize);
        ProblemParams::new(self.n, T::lit(0.5), T::zero(), (nf + T::one()) / (nf - T::one())).expect("valid bubble parameters")
    }
}

impl<T: Real> HalfSpaceFunction<T> for Bubble<T> {
    fn value(&self, r: T, y: T) -> Result<T> {
        let e = (T::from_count(self.n as usize) - T::one()) / T::lit(2.0);
        let q = (T::one() + y) * (T::one() + y) + r * r;
        Ok(self.amplitude * q.powf(-e))
    }

    fn gradient(&self, r: T, y: T) -> Result<(T, T)> {
        let e = (T::from_count(self.n as usize) - T::one()) / T::lit(2.0);
        let q = (T::one() + y) * (T::one() + y) + r * r;
        let d = -T::lit(2.0) * e * self.amplitude * q.powf(-e - T::one());
        Ok((d * r.abs(), d * (T::one() + y)))
    }
}

/// `lambda^beta f(lambda X)`, `beta = (2s + a)/(p - 1)`.
pub struct Rescaled<'a, F> {
    pub inner: &'a F,
    pub lambda: f64,
    pub beta: f64,
}

impl<'a, T: Real, F: HalfSpaceFunction<T>> HalfSpaceFunction<T> for Rescaled<'a, F> {
    fn value(&self, r: T, y: T) -> Result<T> {
        let l = T::lit(self.lambda);
        Ok(l.powf(T::lit(self.beta)) * self.inner.value(l * r, l * y)?)
    }

    fn gradient(&self, r: T, y: T) -> Result<(T, T)> {
        let l = T::lit(self.lambda);
        let (dr, dy) = self.inner.gradient(l * r, l * y)?;
        let f = l.powf(T::lit(self.beta) + T::one());
        Ok((f * dr, f * dy))
    }
}

/// The rescaling of a closed-form or otherwise unbounded field.
pub fn rescaled<'a, T: Real, F: HalfSpaceFunction<T>>(f: &'a F, params: &ProblemParams<T>, lambda: T) -> Result<Rescaled<'a, F>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParams("lambda must be positive".into()));
    }
    Ok(Rescaled {
        inner: f,
        lambda: lambda.as_f64(),
        beta: params.beta().as_f64(),
    })
}

/// Resamples `lambda^beta u_e(lambda X)` on the grid of `field`, whose
/// parameters supply `beta`.
pub fn rescale<T: Real>(field: &HalfSpaceField<T>, lambda: T) -> Result<HalfSpaceField<T>> {
    let params = field
        .params
        .ok_or_else(|| Error::InvalidParams("rescaling needs the field's (a, p)".into()))?;
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParams("lambda must be positive".into()));
    }
    if lambda == T::one() {
        return Ok(field.clone());
    }
    let scale = lambda.powf(params.beta());
    let g = &field.grid;
    let ny = g.ny();
    let values = (0..g.nr() * ny)
        .into_par_iter()
        .map(|k| Ok(scale * field.value(lambda * g.r_nodes[k / ny], lambda * g.y_nodes[k % ny])?))
        .collect::<Result<Vec<T>>>()?;
    let boundary = g
        .r_nodes
        .iter()
        .map(|&r| Ok(scale * field.value(lambda * r, T::zero())?))
        .collect::<Result<Vec<T>>>()?;
    Ok(HalfSpaceField::from_parts(g.clone(), values, boundary, field.n, field.s)?.with_params(params))
}

fn first_error<T: Real, F: Fn(T, T, T) -> Result<T>>(
    f: F,
    a: T,
    b: T,
    tol: Tolerance<T>,
) -> Result<T> {
    let failure = RefCell::new(None);
    let est = tanh_sinh(
        |x, da, db| {
            if failure.borrow().is_some() {
                return T::zero();
            }
            match f(x, da, db) {
                Ok(v) => v,
                Err(e) => {
                    *failure.borrow_mut() = Some(e);
                    T::zero()
                }
            }
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

/// `int_{dB_radius cap R^{n+1}_+} g(r, y) dsigma`.
fn sphere_integral<T: Real, G: Fn(T, T) -> Result<T>>(n: u32, radius: T, g: &G, tol: Tolerance<T>) -> Result<T> {
    let half_pi = T::PI() / T::lit(2.0);
    let nm1 = T::from_count(n as usize) - T::one();
    let v = first_error(
        |phi, _, to_top| {
            // y = radius cos(phi) = radius sin(pi/2 - phi)
            let r = radius * phi.sin();
            let y = radius * to_top.sin();
            let jac = if n == 1 { T::one() } else { phi.sin().powf(nm1) };
            Ok(jac * g(r, y)?)
        },
        T::zero(),
        half_pi,
        tol,
    )?;
    Ok(sphere_area::<T>(n - 1) * radius.powi(n as i32) * v)
}

/// `int_{B_lambda cap R^{n+1}_+} g(r, y) dX`.
fn ball_integral<T: Real, G: Fn(T, T) -> Result<T>>(n: u32, lambda: T, g: &G, tol: Tolerance<T>) -> Result<T> {
    let inner = Tolerance::new(tol.abs, tol.rel * T::lit(0.1)).with_max_level(tol.max_level);
    first_error(|rho, _, _| sphere_integral(n, rho, g, inner), T::zero(), lambda, tol)
}

/// `|S^{n-1}| int_0^lambda r^{n-1} g(r) dr`.
fn flat_integral<T: Real, G: Fn(T) -> Result<T>>(n: u32, lambda: T, g: &G, tol: Tolerance<T>) -> Result<T> {
    let nm1 = T::from_count(n as usize) - T::one();
    let v = first_error(|r, _, _| Ok(r.powf(nm1) * g(r)?), T::zero(), lambda, tol)?;
    Ok(sphere_area::<T>(n - 1) * v)
}

fn radial_derivative<T: Real>(r: T, y: T, grad: (T, T)) -> T {
    let rho = r.hypot(y);
    if rho == T::zero() {
        return T::zero();
    }
    (r * grad.0 + y * grad.1) / rho
}

fn check_first_order<T: Real>(params: &ProblemParams<T>, lambda: T) -> Result<()> {
    params.validate()?;
    if !(params.s > T::zero() && params.s < T::one()) {
        return Err(Error::UnsupportedOrder(params.s.as_f64()));
    }
    if !(lambda > T::zero()) {
        return Err(Error::InvalidParams("lambda must be positive".into()));
    }
    Ok(())
}

fn tolerance<T: Real>(opts: &EnergyOptions<T>) -> Tolerance<T> {
    Tolerance::new(T::lit(1e-15), opts.rel_tol).with_max_level(9)
}

/// The terms of an energy at one radius; `total` is their sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyParts<T> {
    pub bulk: T,
    pub nonlinear: T,
    pub sphere: Vec<T>,
}

impl<T: Real> EnergyParts<T> {
    pub fn total(&self) -> T {
        self.bulk + self.nonlinear + self.sphere.iter().fold(T::zero(), |acc, &v| acc + v)
    }
}

/// `E(u_e, lambda)` for `0 < s < 1`.
pub fn energy_first_order<T: Real, F: HalfSpaceFunction<T>>(field: &F, params: &ProblemParams<T>, lambda: T) -> Result<T> {
    Ok(energy_first_order_parts(field, params, lambda, &EnergyOptions::default())?.total())
}

pub fn energy_first_order_parts<T: Real, F: HalfSpaceFunction<T>>(
    field: &F,
    params: &ProblemParams<T>,
    lambda: T,
    opts: &EnergyOptions<T>,
) -> Result<EnergyParts<T>> {
    check_first_order(params, lambda)?;
    let tol = tolerance(opts);
    let (n, s, a, p) = (params.n, params.s, params.a, params.p);
    let w = T::one() - T::lit(2.0) * s;
    let e = (T::lit(2.0) * s * (p + T::one()) + T::lit(2.0) * a) / (p - T::one()) - params.dim();
    let bulk = ball_integral(
        n,
        lambda,
        &|r, y| {
            let (gr, gy) = field.gradient(r, y)?;
            Ok(y.powf(w) * (gr * gr + gy * gy))
        },
        tol,
    )?;
    let nonlinear = flat_integral(n, lambda, &|r| Ok(r.powf(a) * field.value(r, T::zero())?.abs().powf(p + T::one())), tol)?;
    let sphere = sphere_integral(
        n,
        lambda,
        &|r, y| {
            let u = field.value(r, y)?;
            Ok(y.powf(w) * u * u)
        },
        tol,
    )?;
    let denom = match opts.coefficient {
        SphereCoefficient::ProofConsistent => p - T::one(),
        SphereCoefficient::Statement => p + T::one(),
    };
    let coef = (s + a / T::lit(2.0)) / denom;
    Ok(EnergyParts {
        bulk: lambda.powf(e) * bulk / T::lit(2.0),
        nonlinear: -lambda.powf(e) * kappa_s(s)? / (p + T::one()) * nonlinear,
        sphere: vec![lambda.powf(e - T::one()) * coef * sphere],
    })
}

/// `lambda^{(2s(p+1)+2a)/(p-1) - n} int_{dB_lambda} y^{1-2s} (d_r u_e + beta u_e / r)^2`.
pub fn energy_derivative_first_order<T: Real, F: HalfSpaceFunction<T>>(field: &F, params: &ProblemParams<T>, lambda: T) -> Result<T> {
    check_first_order(params, lambda)?;
    let tol = tolerance(&EnergyOptions::default());
    let (s, a, p) = (params.s, params.a, params.p);
    let beta = params.beta();
    let w = T::one() - T::lit(2.0) * s;
    let e = (T::lit(2.0) * s * (p + T::one()) + T::lit(2.0) * a) / (p - T::one()) - params.dim();
    let v = sphere_integral(
        params.n,
        lambda,
        &|r, y| {
            let u = field.value(r, y)?;
            let d = radial_derivative(r, y, field.gradient(r, y)?) + beta * u / lambda;
            Ok(y.powf(w) * d * d)
        },
        tol,
    )?;
    Ok(lambda.powf(e) * v)
}

/// Energies at increasing radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyCurve<T> {
    pub lambdas: Vec<T>,
    pub values: Vec<T>,
    pub parts: Vec<EnergyParts<T>>,
    pub rel_tol: T,
    pub fd_step: Option<T>,
}

impl<T: Real> EnergyCurve<T> {
    /// Columns `lambda,E,part_bulk,part_nonlinear,part_sphere_1,...`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let spheres = self.parts.first().map_or(0, |p| p.sphere.len());
        let mut header = vec!["lambda".to_string(), "E".into(), "part_bulk".into(), "part_nonlinear".into()];
        header.extend((1..=spheres).map(|k| format!("part_sphere_{k}")));
        w.write_record(&header)?;
        for ((l, v), parts) in self.lambdas.iter().zip(&self.values).zip(&self.parts) {
            let mut row = vec![fmt_real(*l), fmt_real(*v), fmt_real(parts.bulk), fmt_real(parts.nonlinear)];
            row.extend(parts.sphere.iter().map(|&x| fmt_real(x)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Largest `|E(lambda) - E(lambda_0)|`.
    pub fn drift(&self) -> T {
        let first = self.values.first().copied().unwrap_or_else(T::zero);
        self.values.iter().fold(T::zero(), |acc, &v| acc.max((v - first).abs()))
    }
}

/// First-order (`0 < s < 1`) or higher-order (`1 < s < 2`) energies at each radius.
pub fn energy_curve<T: Real, F: HalfSpaceFunction<T>>(
    field: &F,
    params: &ProblemParams<T>,
    lambdas: &[T],
    opts: &EnergyOptions<T>,
) -> Result<EnergyCurve<T>> {
    if !lambdas.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParams("radii must be strictly increasing".into()));
    }
    let higher = params.s > T::one();
    let parts = lambdas
        .par_iter()
        .map(|&l| {
            if higher {
                energy_higher_order_parts(field, params, l, opts)
            } else {
                energy_first_order_parts(field, params, l, opts)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergyCurve {
        lambdas: lambdas.to_vec(),
        values: parts.iter().map(EnergyParts::total).collect(),
        parts,
        rel_tol: opts.rel_tol,
        fd_step: if higher { Some(opts.fd_step) } else { None },
    })
}

/// Discrete `Delta_b = d_rr + (n-1)/r d_r + d_yy + (b/y) d_y` on the grid of
/// `field`, with `b` its weight exponent. The result lives on the grid
/// without the last radius and the lowest and highest heights; its boundary
/// row is extrapolated quadratically from the three lowest heights.
pub fn delta_b<T: Real>(field: &HalfSpaceField<T>) -> Result<HalfSpaceField<T>> {
    let g = &field.grid;
    if g.nr() < 3 || g.ny() < 5 {
        return Err(Error::GridTooCoarse(format!(
            "Delta_b needs at least 3 radii and 5 heights, got {} x {}",
            g.nr(),
            g.ny()
        )));
    }
    let b = g.weight_exponent;
    let nm1 = T::from_count(field.n as usize) - T::one();
    let r = &g.r_nodes;
    let y = &g.y_nodes;
    // three-point first and second derivatives on a non-uniform stencil
    let diff = |xm: T, x0: T, xp: T, um: T, u0: T, up: T| -> (T, T) {
        let hm = x0 - xm;
        let hp = xp - x0;
        let d1 = (up * hm * hm - um * hp * hp + u0 * (hp * hp - hm * hm)) / (hm * hp * (hm + hp));
        let d2 = T::lit(2.0) * (up * hm + um * hp - u0 * (hm + hp)) / (hm * hp * (hm + hp));
        (d1, d2)
    };
    let mut values = Vec::with_capacity((g.nr() - 1) * (g.ny() - 2));
    for i in 0..g.nr() - 1 {
        for j in 1..g.ny() - 1 {
            let radial = if i == 0 {
                // even in r: d_rr + (n-1)/r d_r -> n d_rr at the axis
                let h = r[1];
                let d2 = T::lit(2.0) * (field.at(1, j) - field.at(0, j)) / (h * h);
                (nm1 + T::one()) * d2
            } else {
                let (d1, d2) = diff(r[i - 1], r[i], r[i + 1], field.at(i - 1, j), field.at(i, j), field.at(i + 1, j));
                d2 + nm1 / r[i] * d1
            };
            let (d1, d2) = diff(y[j - 1], y[j], y[j + 1], field.at(i, j - 1), field.at(i, j), field.at(i, j + 1));
            values.push(radial + d2 + b / y[j] * d1);
        }
    }
    let ny = g.ny() - 2;
    let ys: Vec<T> = y[1..g.ny() - 1].to_vec();
    let boundary = (0..g.nr() - 1)
        .map(|i| {
            let v = |j: usize| values[i * ny + j];
            let (y0, y1, y2) = (ys[0], ys[1], ys[2]);
            // Lagrange extrapolation to y = 0
            v(0) * (y1 * y2) / ((y0 - y1) * (y0 - y2))
                + v(1) * (y0 * y2) / ((y1 - y0) * (y1 - y2))
                + v(2) * (y0 * y1) / ((y2 - y0) * (y2 - y1))
        })
        .collect();
    let grid = crate::extension::HalfSpaceGrid::new(r[..g.nr() - 1].to_vec(), ys, b)?;
    let mut out = HalfSpaceField::from_parts(grid, values, boundary, field.n, field.s)?;
    out.params = field.params;
    Ok(out)
}

/// Pointwise `Delta_b f` by centred differences with step `h`, taking `f`
/// even in `r` and in `y`.
pub fn laplacian_b_at<T: Real, F: HalfSpaceFunction<T>>(f: &F, n: u32, b: T, r: T, y: T, h: T) -> Result<T> {
    let two = T::lit(2.0);
    let nm1 = T::from_count(n as usize) - T::one();
    let u0 = f.value(r, y)?;
    let urp = f.value(r + h, y)?;
    let urm = f.value((r - h).abs(), y)?;
    let uyp = f.value(r, y + h)?;
    let uym = f.value(r, (y - h).abs())?;
    let rr = (urp - two * u0 + urm) / (h * h);
    let yy = (uyp - two * u0 + uym) / (h * h);
    let floor = h * T::lit(1e-2);
    let radial = if r < floor { (nm1 + T::one()) * rr } else { rr + nm1 / r * (urp - urm) / (two * h) };
    let vertical = if y < floor { (b + T::one()) * yy } else { yy + b / y * (uyp - uym) / (two * h) };
    Ok(radial + vertical)
}

/// The two dimension conditions of the higher-order energy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport<T> {
    pub n: u32,
    /// `(p+4s+2a-1)/(p+2s+a-1) + (2s+a)/(p-1) - b`.
    pub first_rhs: T,
    pub first_holds: bool,
    pub first_margin: T,
    /// `(2s(p+1)+2a)/(p-1)`.
    pub second_rhs: T,
    pub second_holds: bool,
    pub second_margin: T,
    /// The second condition implies the first on this tuple.
    pub implication_consistent: bool,
}

pub fn dimension_conditions<T: Real>(params: &ProblemParams<T>) -> DimensionReport<T> {
    let (s, a, p) = (params.s, params.a, params.p);
    let two = T::lit(2.0);
    let nf = params.dim();
    let first_rhs = (p + T::lit(4.0) * s + two * a - T::one()) / (p + two * s + a - T::one()) + (two * s + a) / (p - T::one()) - params.b();
    let second_rhs = (two * s * (p + T::one()) + two * a) / (p - T::one());
    let first_holds = nf > first_rhs;
    let second_holds = nf > second_rhs;
    DimensionReport {
        n: params.n,
        first_rhs,
        first_holds,
        first_margin: nf - first_rhs,
        second_rhs,
        second_holds,
        second_margin: nf - second_rhs,
        implication_consistent: !second_holds || first_holds,
    }
}

/// `E(u_e, lambda)` for `1 < s < 2` with the default options and the given
/// relative step for the `d/dr` terms.
pub fn energy_higher_order<T: Real, F: HalfSpaceFunction<T>>(field: &F, params: &ProblemParams<T>, lambda: T, fd_step: T) -> Result<T> {
    let opts = EnergyOptions {
        fd_step,
        ..EnergyOptions::default()
    };
    Ok(energy_higher_order_parts(field, params, lambda, &opts)?.total())
}

pub fn energy_higher_order_parts<T: Real, F: HalfSpaceFunction<T>>(
    field: &F,
    params: &ProblemParams<T>,
    lambda: T,
    opts: &EnergyOptions<T>,
) -> Result<EnergyParts<T>> {
    params.validate()?;
    let (n, s, a, p) = (params.n, params.s, params.a, params.p);
    if !(s > T::one() && s < T::lit(2.0)) {
        return Err(Error::UnsupportedOrder(s.as_f64()));
    }
    let dims = dimension_conditions(params);
    if !dims.first_holds {
        return Err(Error::DimensionConditionViolated {
            lhs: n as f64,
            rhs: dims.first_rhs.as_f64(),
        });
    }
    if !(lambda > T::zero() && opts.fd_step > T::zero() && opts.fd_step < T::lit(0.5)) {
        return Err(Error::InvalidParams("need lambda > 0 and 0 < fd_step < 1/2".into()));
    }
    // the bulk integrand carries second differences, good to about 1e-10
    let tol = Tolerance::new(T::lit(1e-15), opts.rel_tol.max(T::lit(1e-7))).with_max_level(9);
    let two = T::lit(2.0);
    let nf = params.dim();
    let b = params.b();
    let w = T::lit(3.0) - two * s;
    let beta = params.beta();
    let e = (two * s * (p + T::one()) + two * a) / (p - T::one()) - nf;
    let q = (T::lit(4.0) * s + two * a) / (p - T::one());
    let k = -(s + a / two) / (p - T::one()) * ((p + two * s + a - T::one()) / (p - T::one()) - nf - b);

    let h_lap = T::lit(1e-3) * lambda;
    let bulk = ball_integral(
        n,
        lambda,
        &|r, y| {
            let l = laplacian_b_at(field, n, b, r, y, h_lap)?;
            Ok(y.powf(w) * l * l / two)
        },
        tol,
    )?;
    let nonlinear = flat_integral(n, lambda, &|r| Ok(r.powf(a) * field.value(r, T::zero())?.abs().powf(p + T::one())), tol)?;
    let s0 = |rad: T| sphere_integral(n, rad, &|r, y| {
        let u = field.value(r, y)?;
        Ok(y.powf(w) * u * u)
    }, tol);
    let s1 = |rad: T| sphere_integral(n, rad, &|r, y| {
        let u = field.value(r, y)?;
        let d = beta / rad * u + radial_derivative(r, y, field.gradient(r, y)?);
        Ok(y.powf(w) * d * d)
    }, tol);
    let s2 = |rad: T| sphere_integral(n, rad, &|r, y| {
        let grad = field.gradient(r, y)?;
        let dr = radial_derivative(r, y, grad);
        Ok(y.powf(w) * (grad.0 * grad.0 + grad.1 * grad.1 - dr * dr))
    }, tol);
    let h = opts.fd_step * lambda;
    let ddr = |g: &dyn Fn(T) -> Result<T>| -> Result<T> { Ok((g(lambda + h)? - g(lambda - h)?) / (two * h)) };

    let t2 = k * lambda.powf(-T::lit(3.0) + two * s + q - nf) * s0(lambda)?;
    let t3 = k * ddr(&|rad| Ok(rad.powf(q + two * s - two - nf) * s0(rad)?))?;
    let t4 = lambda.powi(3) / two * ddr(&|rad| Ok(rad.powf(q + two * s - T::lit(3.0) - nf) * s1(rad)?))?;
    let t5 = ddr(&|rad| Ok(rad.powf(e) * s2(rad)?))? / two;
    let t6 = lambda.powf(e - T::one()) * s2(lambda)? / two;
    Ok(EnergyParts {
        bulk: lambda.powf(e) * bulk,
        nonlinear: -lambda.powf(e) * opts.c_ns / (p + T::one()) * nonlinear,
        sphere: vec![t2, t3, t4, t5, t6],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn homogeneous_case() -> (ProblemParams<f64>, Homogeneous<f64>) {
        let params = ProblemParams::new(3, 0.5, 0.0, 4.0).unwrap();
        let h = Homogeneous::for_params(&params);
        (params, h)
    }

    #[test]
    fn homogeneous_field_has_constant_energy() {
        let (params, h) = homogeneous_case();
        let e: Vec<f64> = [1.0, 2.0, 4.0].iter().map(|&l| energy_first_order(&h, &params, l).unwrap()).collect();
        assert!(e.iter().all(|v| (v - e[0]).abs() < 1e-8), "{e:?}");
        let d = energy_derivative_first_order(&h, &params, 2.5).unwrap();
        assert!(d.abs() < 1e-10, "{d}");
    }

    #[test]
    fn zero_field_has_zero_energy() {
        let params = ProblemParams::new(2, 0.3, 1.0, 3.0).unwrap();
        let z = ClosedForm(|_r: f64, _y: f64| 0.0);
        assert_eq!(energy_first_order(&z, &params, 1.7).unwrap(), 0.0);
        assert_eq!(energy_derivative_first_order(&z, &params, 1.7).unwrap(), 0.0);
        let hp = ProblemParams::new(10, 1.5, 1.0, 3.0).unwrap();
        assert_eq!(energy_higher_order(&z, &hp, 1.3, 1e-3).unwrap(), 0.0);
    }

    #[test]
    fn bubble_derivative_matches_differences() {
        let bubble = Bubble::<f64>::new(3).unwrap();
        let params = bubble.params();
        let l = 1.3;
        let h = 1e-3;
        let fd = (energy_first_order(&bubble, &params, l + h).unwrap() - energy_first_order(&bubble, &params, l - h).unwrap()) / (2.0 * h);
        let d = energy_derivative_first_order(&bubble, &params, l).unwrap();
        assert!(d > 0.0);
        assert!((fd - d).abs() < 1e-5 * d.abs().max(1.0), "{fd} vs {d}");
    }

    #[test]
    fn delta_b_on_polynomials() {
        let b = 0.4;
        let grid = crate::extension::HalfSpaceGrid::new(
            vec![0.0, 0.3, 0.5, 0.9, 1.4],
            vec![0.1, 0.2, 0.45, 0.7, 1.0, 1.6],
            b,
        )
        .unwrap();
        let ny = grid.ny();
        let make = |f: &dyn Fn(f64, f64) -> f64| {
            let vals: Vec<f64> = (0..grid.nr() * ny).map(|k| f(grid.r_nodes[k / ny], grid.y_nodes[k % ny])).collect();
            let bd: Vec<f64> = grid.r_nodes.iter().map(|&r| f(r, 0.0)).collect();
            HalfSpaceField::from_parts(grid.clone(), vals, bd, 4, 1.3).unwrap()
        };
        let out = delta_b(&make(&|_r, y| y * y)).unwrap();
        assert!(out.values.iter().chain(&out.boundary).all(|v| (v - (2.0 + 2.0 * b)).abs() < 1e-10));
        let out = delta_b(&make(&|r, _y| r * r)).unwrap();
        assert!(out.values.iter().all(|v| (v - 8.0).abs() < 1e-10));
    }

    #[test]
    fn dimension_condition_examples() {
        let d = dimension_conditions(&ProblemParams::new(10, 1.5f64, 1.0, 3.0).unwrap());
        assert!(d.first_holds && d.second_holds && d.implication_consistent);
        assert!((d.first_rhs - 11.0 / 3.0).abs() < 1e-12);
        assert!((d.second_rhs - 7.0).abs() < 1e-12);
        let d = dimension_conditions(&ProblemParams::new(4, 1.5f64, 0.0, 2.0).unwrap());
        assert!(!d.first_holds && !d.second_holds && d.implication_consistent);
        assert!((d.first_rhs - 4.75).abs() < 1e-12);
        assert!((d.second_rhs - 9.0).abs() < 1e-12);
        let bad = ProblemParams::new(4, 1.5, 0.0, 2.0).unwrap();
        let z = ClosedForm(|_r: f64, _y: f64| 0.0);
        assert!(matches!(energy_higher_order(&z, &bad, 1.0, 1e-3), Err(Error::DimensionConditionViolated { .. })));
    }
}
