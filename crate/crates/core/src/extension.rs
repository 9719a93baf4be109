//! Extension of radial boundary data to the upper half-space by the Poisson
//! kernel `P(x, y; t) = p_{n,s} y^{2s} (|x-t|^2 + y^2)^{-(n+2s)/2}`, the
//! weighted residual of `div(y^{1-2s} grad u_e) = 0`, the weighted Neumann
//! trace and an independent spectral evaluation of `(-Delta)^s`.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{exp_sinh, fourier_half_line, gauss_jacobi, gauss_legendre, sphere_area, tanh_sinh, GaussRule, Oscillator, Tolerance};
use crate::scalar::Real;
use crate::specfun::ProblemParams;

/// Behaviour of boundary data beyond its last sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailModel<T> {
    /// No model: the data is taken as zero past the last sample and the
    /// resulting truncation error is estimated.
    Unspecified,
    Constant(T),
    /// `u(r) = amplitude * r^{-exponent}`.
    Power { amplitude: T, exponent: T },
}

/// A radial function `u(|x|)` on `R^n`.
pub trait RadialFunction<T: Real>: Sync {
    fn value(&self, r: T) -> T;

    /// For data truncated without a tail model: the last represented radius
    /// and a bound on `|u|` near it.
    fn truncation(&self) -> Option<(T, T)> {
        None
    }
}

/// A closed-form radial function.
#[derive(Debug, Clone, Copy)]
pub struct Analytic<F>(pub F);

impl<T: Real, F: Fn(T) -> T + Sync> RadialFunction<T> for Analytic<F> {
    fn value(&self, r: T) -> T {
        (self.0)(r.abs())
    }
}

/// Samples `(r_i, u_i)` with `r_0 = 0`, interpolated by a cubic spline with
/// zero slope at the origin and continued by a tail model.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile<T> {
    pub r: Vec<T>,
    pub u: Vec<T>,
    pub tail: TailModel<T>,
    second: Vec<T>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ProfileRow {
    r: f64,
    u: f64,
}

impl<T: Real> RadialProfile<T> {
    pub fn new(r: Vec<T>, u: Vec<T>, tail: TailModel<T>) -> Result<Self> {
        if r.len() != u.len() {
            return Err(Error::InvalidParams("r and u differ in length".into()));
        }
        if r.len() < 4 {
            return Err(Error::GridTooCoarse("a radial profile needs at least 4 samples".into()));
        }
        if r[0] != T::zero() {
            return Err(Error::InvalidParams("radial samples must start at r = 0".into()));
        }
        if !r.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParams("radii must be strictly increasing".into()));
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("profile values must be finite".into()));
        }
        let last = r.len() - 1;
        let end_slope = match tail {
            TailModel::Unspecified => None,
            TailModel::Constant(_) => Some(T::zero()),
            TailModel::Power { exponent, .. } => Some(-exponent * u[last] / r[last]),
        };
        let second = spline_second_derivatives(&r, &u, T::zero(), end_slope);
        Ok(Self { r, u, tail, second })
    }

    /// Samples `f` at the radii `r`.
    pub fn sample<F: Fn(T) -> T>(r: Vec<T>, f: F, tail: TailModel<T>) -> Result<Self> {
        let u = r.iter().map(|&x| f(x)).collect();
        Self::new(r, u, tail)
    }

    /// Power-law tail `u ~ r^{-exponent}` matched to the last sample.
    pub fn power_tail(last_r: T, last_u: T, exponent: T) -> TailModel<T> {
        TailModel::Power {
            amplitude: last_u * last_r.powf(exponent),
            exponent,
        }
    }

    pub fn r_max(&self) -> T {
        self.r[self.r.len() - 1]
    }

    /// Reads a two-column CSV with header `r,u`.
    pub fn read_csv<R: Read>(reader: R, tail: TailModel<T>) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut r = Vec::new();
        let mut u = Vec::new();
        for row in rdr.deserialize::<ProfileRow>() {
            let row = row?;
            r.push(T::lit(row.r));
            u.push(T::lit(row.u));
        }
        Self::new(r, u, tail)
    }

    pub fn from_csv_path<P: AsRef<Path>>(path: P, tail: TailModel<T>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, tail)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["r", "u"])?;
        for (&r, &u) in self.r.iter().zip(&self.u) {
            w.write_record([fmt_real(r), fmt_real(u)])?;
        }
        w.flush()?;
        Ok(())
    }
}

impl<T: Real> RadialFunction<T> for RadialProfile<T> {
    fn value(&self, r: T) -> T {
        let r = r.abs();
        let last = self.r.len() - 1;
        if r > self.r[last] {
            return match self.tail {
                TailModel::Unspecified => T::zero(),
                TailModel::Constant(c) => c,
                TailModel::Power { amplitude, exponent } => amplitude * r.powf(-exponent),
            };
        }
        let k = match self.r.binary_search_by(|x| x.partial_cmp(&r).expect("finite radius")) {
            Ok(i) => return self.u[i],
            Err(i) => i - 1,
        };
        let h = self.r[k + 1] - self.r[k];
        let a = (self.r[k + 1] - r) / h;
        let b = (r - self.r[k]) / h;
        let six = T::lit(6.0);
        a * self.u[k]
            + b * self.u[k + 1]
            + ((a * a * a - a) * self.second[k] + (b * b * b - b) * self.second[k + 1]) * h * h / six
    }

    fn truncation(&self) -> Option<(T, T)> {
        match self.tail {
            TailModel::Unspecified => {
                let m = self.u.len();
                let from = m - (m / 10).max(2);
                let bound = self.u[from..].iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
                Some((self.r_max(), bound))
            }
            _ => None,
        }
    }
}

/// Second derivatives of the cubic spline with slope `start_slope` at the
/// first node and either a clamped or natural condition at the last.
fn spline_second_derivatives<T: Real>(x: &[T], y: &[T], start_slope: T, end_slope: Option<T>) -> Vec<T> {
    let m = x.len();
    let six = T::lit(6.0);
    let mut sub = vec![T::zero(); m];
    let mut diag = vec![T::zero(); m];
    let mut sup = vec![T::zero(); m];
    let mut rhs = vec![T::zero(); m];
    let h0 = x[1] - x[0];
    diag[0] = h0 / T::lit(3.0);
    sup[0] = h0 / six;
    rhs[0] = (y[1] - y[0]) / h0 - start_slope;
    for i in 1..m - 1 {
        let hl = x[i] - x[i - 1];
        let hr = x[i + 1] - x[i];
        sub[i] = hl / six;
        diag[i] = (hl + hr) / T::lit(3.0);
        sup[i] = hr / six;
        rhs[i] = (y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl;
    }
    let hn = x[m - 1] - x[m - 2];
    match end_slope {
        Some(slope) => {
            sub[m - 1] = hn / six;
            diag[m - 1] = hn / T::lit(3.0);
            rhs[m - 1] = slope - (y[m - 1] - y[m - 2]) / hn;
        }
        None => {
            diag[m - 1] = T::one();
        }
    }
    // Thomas algorithm
    for i in 1..m {
        let w = sub[i] / diag[i - 1];
        diag[i] = diag[i] - w * sup[i - 1];
        rhs[i] = rhs[i] - w * rhs[i - 1];
    }
    let mut out = vec![T::zero(); m];
    out[m - 1] = rhs[m - 1] / diag[m - 1];
    for i in (0..m - 1).rev() {
        out[i] = (rhs[i] - sup[i] * out[i + 1]) / diag[i];
    }
    out
}

pub(crate) fn fmt_real<T: Real>(v: T) -> String {
    format!("{:.16e}", v.as_f64())
}

fn check_order<T: Real>(s: T) -> Result<()> {
    if s > T::zero() && s < T::one() {
        Ok(())
    } else {
        Err(Error::UnsupportedOrder(s.as_f64()))
    }
}

/// `|S^{n-1}| int_0^inf y^{2s} rho^{n-1} (rho^2 + y^2)^{-(n+2s)/2} drho`, the
/// unnormalised Poisson kernel mass at height `y`.
pub fn poisson_mass<T: Real>(n: u32, s: T, y: T) -> Result<T> {
    check_order(s)?;
    if n < 1 || !(y > T::zero()) {
        return Err(Error::InvalidParams("need n >= 1 and y > 0".into()));
    }
    let nf = T::from_count(n as usize);
    let k = (nf + T::lit(2.0) * s) / T::lit(2.0);
    let f = |rho: T| y.powf(T::lit(2.0) * s) * rho.powf(nf - T::one()) * (rho * rho + y * y).powf(-k);
    let tol = Tolerance::new(T::lit(1e-300), T::lit(1e-12)).with_max_level(10);
    let near = tanh_sinh(|x, _, _| f(x), T::zero(), y, tol)?.value;
    let far = exp_sinh(|x, _| f(x), y, tol)?.value;
    Ok(sphere_area::<T>(n - 1) * (near + far))
}

/// `p_{n,s}`, the constant making the Poisson kernel a probability density,
/// obtained by normalising the kernel numerically at unit height.
pub fn poisson_normalization<T: Real>(n: u32, s: T) -> Result<T> {
    Ok(T::one() / poisson_mass(n, s, T::one())?)
}

/// Rectangular grid in `(r, y)` with `r_0 = 0` and `y_0 > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceGrid<T> {
    pub r_nodes: Vec<T>,
    pub y_nodes: Vec<T>,
    /// Exponent `w` of the weight `y^w`: `1 - 2s` for the extension problem.
    pub weight_exponent: T,
}

impl<T: Real> HalfSpaceGrid<T> {
    pub fn new(r_nodes: Vec<T>, y_nodes: Vec<T>, weight_exponent: T) -> Result<Self> {
        if r_nodes.len() < 2 || y_nodes.is_empty() {
            return Err(Error::GridTooCoarse("grid needs r and y nodes".into()));
        }
        if r_nodes[0] != T::zero() {
            return Err(Error::InvalidParams("r nodes must start at 0".into()));
        }
        if !(y_nodes[0] > T::zero()) {
            return Err(Error::InvalidParams("y nodes must be positive".into()));
        }
        if !r_nodes.windows(2).all(|w| w[0] < w[1]) || !y_nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidParams("grid nodes must be strictly increasing".into()));
        }
        Ok(Self {
            r_nodes,
            y_nodes,
            weight_exponent,
        })
    }

    /// `nr + 1` equispaced radii on `[0, r_max]`, heights `y_max j / ny`, `j = 1..=ny`.
    pub fn uniform(r_max: T, nr: usize, y_max: T, ny: usize, weight_exponent: T) -> Result<Self> {
        if nr < 1 || ny < 1 {
            return Err(Error::GridTooCoarse("need at least one interval per direction".into()));
        }
        let r = (0..=nr).map(|i| r_max * T::from_count(i) / T::from_count(nr)).collect();
        let y = (1..=ny).map(|j| y_max * T::from_count(j) / T::from_count(ny)).collect();
        Self::new(r, y, weight_exponent)
    }

    /// Adds `count` heights `y_0 q^k`, `k = 1..=count`, below the lowest node.
    pub fn with_geometric_bottom(mut self, count: usize, ratio: T) -> Result<Self> {
        if !(ratio > T::zero() && ratio < T::one()) {
            return Err(Error::InvalidParams("geometric ratio must lie in (0, 1)".into()));
        }
        let y0 = self.y_nodes[0];
        let mut extra: Vec<T> = (1..=count).map(|k| y0 * ratio.powi(k as i32)).collect();
        extra.reverse();
        extra.extend(self.y_nodes);
        self.y_nodes = extra;
        Ok(self)
    }

    /// Radial step 0.1 on `[0, r_max]`, heights 0.1 to 4 in steps of 0.1 and
    /// eight halvings below, for the weight `y^{1-2s}`.
    pub fn standard(r_max: T, s: T) -> Result<Self> {
        let nr = (r_max * T::lit(10.0)).round().to_usize().unwrap_or(0);
        let step = T::lit(0.1);
        Self::uniform(step * T::from_count(nr), nr, T::lit(4.0), 40, T::one() - T::lit(2.0) * s)?
            .with_geometric_bottom(8, T::lit(0.5))
    }

    pub fn nr(&self) -> usize {
        self.r_nodes.len()
    }

    pub fn ny(&self) -> usize {
        self.y_nodes.len()
    }

    pub fn r_max(&self) -> T {
        self.r_nodes[self.nr() - 1]
    }

    pub fn y_max(&self) -> T {
        self.y_nodes[self.ny() - 1]
    }
}

/// A function on the closed upper half-space, radial in `x`.
pub trait HalfSpaceFunction<T: Real>: Sync {
    fn value(&self, r: T, y: T) -> Result<T>;

    /// `(d/dr, d/dy)`; centred differences unless overridden.
    fn gradient(&self, r: T, y: T) -> Result<(T, T)> {
        let h = T::lit(1e-4) * (T::one() + r.abs().max(y.abs()));
        let dr = if r > h {
            (self.value(r + h, y)? - self.value(r - h, y)?) / (T::lit(2.0) * h)
        } else {
            // even in r
            (self.value(r + h, y)? - self.value((r - h).abs(), y)?) / (T::lit(2.0) * h)
        };
        let dy = if y > h {
            (self.value(r, y + h)? - self.value(r, y - h)?) / (T::lit(2.0) * h)
        } else {
            (self.value(r, y + h)? - self.value(r, y)?) / h
        };
        Ok((dr, dy))
    }
}

/// Tolerances for [`PoissonExtension`].
#[derive(Debug, Clone, Copy)]
pub struct ExtensionOptions<T> {
    /// Relative accuracy of the convolution quadrature.
    pub rel_tol: T,
    /// Absolute accuracy floor, in units of the data.
    pub abs_tol: T,
    /// Largest admissible estimate of the error from truncated data.
    pub truncation_tol: T,
    /// Gauss-Jacobi nodes for the angular integral (`n >= 2`).
    pub angular_nodes: usize,
}

impl<T: Real> Default for ExtensionOptions<T> {
    fn default() -> Self {
        Self {
            rel_tol: T::lit(1e-10),
            abs_tol: T::lit(1e-12),
            truncation_tol: T::lit(1e-8),
            angular_nodes: 40,
        }
    }
}

/// The Poisson extension of radial data, evaluated pointwise by quadrature
/// in the subtracted form
/// `u_e(x, y) = u(x) + p_{n,s} int (1 + |z|^2)^{-(n+2s)/2} (u(x + yz) - u(x)) dz`.
pub struct PoissonExtension<'a, T, U> {
    pub u: &'a U,
    pub n: u32,
    pub s: T,
    norm: T,
    angular: Option<GaussRule<T>>,
    opts: ExtensionOptions<T>,
}

impl<'a, T: Real, U: RadialFunction<T>> PoissonExtension<'a, T, U> {
    pub fn new(u: &'a U, n: u32, s: T) -> Result<Self> {
        Self::with_options(u, n, s, ExtensionOptions::default())
    }

    pub fn with_options(u: &'a U, n: u32, s: T, opts: ExtensionOptions<T>) -> Result<Self> {
        check_order(s)?;
        let norm = poisson_normalization(n, s)?;
        let angular = if n >= 2 {
            let e = (T::from_count(n as usize) - T::lit(3.0)) / T::lit(2.0);
            let mut rule = gauss_jacobi(opts.angular_nodes, e, e);
            let area = sphere_area::<T>(n - 2);
            rule.weights.iter_mut().for_each(|w| *w = *w * area);
            Some(rule)
        } else {
            None
        };
        Ok(Self {
            u,
            n,
            s,
            norm,
            angular,
            opts,
        })
    }

    pub fn normalization(&self) -> T {
        self.norm
    }

    /// Bound on the error caused by data truncated at `r_end` for points
    /// with `|x| <= r_reach` and height at most `y_reach`.
    pub fn truncation_estimate(&self, r_reach: T, y_reach: T) -> T {
        match self.u.truncation() {
            None => T::zero(),
            Some((r_end, bound)) => {
                if bound == T::zero() {
                    return T::zero();
                }
                let gap = r_end - r_reach;
                if !(gap > T::zero()) {
                    return bound;
                }
                let two_s = T::lit(2.0) * self.s;
                let mass = self.norm * sphere_area::<T>(self.n - 1) / two_s * (y_reach / gap).powf(two_s);
                bound * mass.min(T::one())
            }
        }
    }

    /// `u_e(r, y) - u(r)`.
    pub fn excess(&self, r: T, y: T) -> Result<T> {
        if y == T::zero() {
            return Ok(T::zero());
        }
        let r = r.abs();
        let base = self.u.value(r);
        let nf = T::from_count(self.n as usize);
        let k = (nf + T::lit(2.0) * self.s) / T::lit(2.0);
        let g = |rho: T| -> T {
            let shell = match &self.angular {
                None => self.u.value(r + y * rho) + self.u.value((r - y * rho).abs()) - T::lit(2.0) * base,
                Some(rule) => {
                    let yr = y * rho;
                    let diff = (r - yr) * (r - yr);
                    rule.nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(|(&c, &w)| {
                            let rr = (diff + T::lit(2.0) * r * yr * (T::one() + c)).max(T::zero()).sqrt();
                            w * (self.u.value(rr) - base)
                        })
                        .sum()
                }
            };
            rho.powf(nf - T::one()) * (T::one() + rho * rho).powf(-k) * shell
        };
        let tol = Tolerance::new(self.opts.abs_tol, self.opts.rel_tol).with_max_level(10);
        // the kernel lives on rho < 1; the data near the origin sits at rho = r / y
        let mut edges = vec![T::zero(), T::one()];
        let pivot = r / y;
        if pivot > T::lit(2.0) {
            edges.push(pivot);
        }
        let mut total = T::zero();
        for w in edges.windows(2) {
            total = total + tanh_sinh(|x, _, _| g(x), w[0], w[1], tol)?.value;
        }
        total = total + exp_sinh(|x, _| g(x), edges[edges.len() - 1], tol)?.value;
        Ok(self.norm * total)
    }
}

impl<'a, T: Real, U: RadialFunction<T>> HalfSpaceFunction<T> for PoissonExtension<'a, T, U> {
    fn value(&self, r: T, y: T) -> Result<T> {
        Ok(self.u.value(r.abs()) + self.excess(r, y)?)
    }
}

/// A field `u_e(r_i, y_j)` sampled on a [`HalfSpaceGrid`], together with its
/// boundary values `u(r_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpaceField<T> {
    pub grid: HalfSpaceGrid<T>,
    /// Row-major in `r`: `values[i * ny + j] = u_e(r_i, y_j)`.
    pub values: Vec<T>,
    pub boundary: Vec<T>,
    pub n: u32,
    pub s: T,
    /// Henon weight and exponent, needed by the energies and the rescaling.
    pub params: Option<ProblemParams<T>>,
}

impl<T: Real> HalfSpaceField<T> {
    pub fn from_parts(grid: HalfSpaceGrid<T>, values: Vec<T>, boundary: Vec<T>, n: u32, s: T) -> Result<Self> {
        if values.len() != grid.nr() * grid.ny() || boundary.len() != grid.nr() {
            return Err(Error::InvalidParams("field arrays do not match the grid".into()));
        }
        if values.iter().chain(&boundary).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("field values must be finite".into()));
        }
        Ok(Self {
            grid,
            values,
            boundary,
            n,
            s,
            params: None,
        })
    }

    /// Samples a half-space function on the grid; the boundary row is its value at `y = 0`.
    pub fn sample<F: HalfSpaceFunction<T>>(f: &F, grid: HalfSpaceGrid<T>, n: u32, s: T) -> Result<Self> {
        let ny = grid.ny();
        let nodes: Vec<(usize, usize)> = (0..grid.nr()).flat_map(|i| (0..ny).map(move |j| (i, j))).collect();
        let values = nodes
            .par_iter()
            .map(|&(i, j)| f.value(grid.r_nodes[i], grid.y_nodes[j]))
            .collect::<Result<Vec<T>>>()?;
        let boundary = grid
            .r_nodes
            .par_iter()
            .map(|&r| f.value(r, T::zero()))
            .collect::<Result<Vec<T>>>()?;
        Self::from_parts(grid, values, boundary, n, s)
    }

    pub fn with_params(mut self, params: ProblemParams<T>) -> Self {
        self.params = Some(params);
        self
    }

    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[i * self.grid.ny() + j]
    }

    /// Writes `r,y,value` rows, boundary first (`y = 0`), in grid order.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["r", "y", "value"])?;
        for (i, &r) in self.grid.r_nodes.iter().enumerate() {
            w.write_record([fmt_real(r), fmt_real(T::zero()), fmt_real(self.boundary[i])])?;
            for (j, &y) in self.grid.y_nodes.iter().enumerate() {
                w.write_record([fmt_real(r), fmt_real(y), fmt_real(self.at(i, j))])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    fn locate(nodes: &[T], x: T) -> Option<usize> {
        let m = nodes.len();
        if x < nodes[0] || x > nodes[m - 1] {
            return None;
        }
        let idx = nodes.partition_point(|&v| v <= x);
        Some(idx.saturating_sub(1).min(m - 2))
    }

    /// Local cubic Lagrange stencil of up to four nodes around `x`.
    fn stencil(nodes: &[T], k: usize) -> std::ops::Range<usize> {
        let m = nodes.len();
        let lo = k.saturating_sub(1).min(m.saturating_sub(4));
        lo..(lo + 4).min(m)
    }

    fn lagrange(nodes: &[T], range: std::ops::Range<usize>, x: T) -> Vec<(usize, T, T)> {
        // (index, weight, derivative weight)
        let idx: Vec<usize> = range.collect();
        idx.iter()
            .map(|&a| {
                let mut w = T::one();
                let mut dw = T::zero();
                for &b in &idx {
                    if b == a {
                        continue;
                    }
                    let denom = nodes[a] - nodes[b];
                    let mut term = T::one() / denom;
                    for &c in &idx {
                        if c != a && c != b {
                            term = term * (x - nodes[c]) / (nodes[a] - nodes[c]);
                        }
                    }
                    dw = dw + term;
                    w = w * (x - nodes[b]) / denom;
                }
                (a, w, dw)
            })
            .collect()
    }

    fn interpolate(&self, r: T, y: T) -> Result<(T, T, T)> {
        // the boundary row joins the grid as y = 0
        let mut ys = Vec::with_capacity(self.grid.ny() + 1);
        ys.push(T::zero());
        ys.extend_from_slice(&self.grid.y_nodes);
        let r = r.abs();
        let (ki, kj) = match (Self::locate(&self.grid.r_nodes, r), Self::locate(&ys, y)) {
            (Some(a), Some(b)) => (a, b),
            _ => {
                return Err(Error::DomainExceeded {
                    r: r.as_f64(),
                    y: y.as_f64(),
                })
            }
        };
        let wr = Self::lagrange(&self.grid.r_nodes, Self::stencil(&self.grid.r_nodes, ki), r);
        let wy = Self::lagrange(&ys, Self::stencil(&ys, kj), y);
        let sample = |i: usize, j: usize| if j == 0 { self.boundary[i] } else { self.at(i, j - 1) };
        let mut v = T::zero();
        let mut dr = T::zero();
        let mut dy = T::zero();
        for &(i, a, da) in &wr {
            for &(j, b, db) in &wy {
                let f = sample(i, j);
                v = v + a * b * f;
                dr = dr + da * b * f;
                dy = dy + a * db * f;
            }
        }
        Ok((v, dr, dy))
    }
}

impl<T: Real> HalfSpaceFunction<T> for HalfSpaceField<T> {
    fn value(&self, r: T, y: T) -> Result<T> {
        Ok(self.interpolate(r, y)?.0)
    }

    fn gradient(&self, r: T, y: T) -> Result<(T, T)> {
        let (_, dr, dy) = self.interpolate(r, y)?;
        Ok((dr, dy))
    }
}

/// Poisson extension of `u` sampled on `grid`.
pub fn extend_radial<T: Real, U: RadialFunction<T>>(u: &U, grid: &HalfSpaceGrid<T>, n: u32, s: T) -> Result<HalfSpaceField<T>> {
    extend_radial_with(u, grid, n, s, ExtensionOptions::default())
}

pub fn extend_radial_with<T: Real, U: RadialFunction<T>>(
    u: &U,
    grid: &HalfSpaceGrid<T>,
    n: u32,
    s: T,
    opts: ExtensionOptions<T>,
) -> Result<HalfSpaceField<T>> {
    let ext = PoissonExtension::with_options(u, n, s, opts)?;
    let estimate = ext.truncation_estimate(grid.r_max(), grid.y_max());
    if estimate > opts.truncation_tol {
        return Err(Error::TailUnspecified {
            estimate: estimate.as_f64(),
            tolerance: opts.truncation_tol.as_f64(),
        });
    }
    HalfSpaceField::sample(&ext, grid.clone(), n, s)
}

/// `int_a^b y^{-w} dy`.
fn weight_integral<T: Real>(a: T, b: T, w: T) -> T {
    let e = T::one() - w;
    if e.abs() < T::lit(1e-12) {
        (b / a).ln()
    } else {
        (b.powf(e) - a.powf(e)) / e
    }
}

/// Discrete `y^{-w} div(y^w grad u)` at an interior node, in radial coordinates.
fn weighted_operator<T: Real>(field: &HalfSpaceField<T>, i: usize, j: usize) -> T {
    let g = &field.grid;
    let r = &g.r_nodes;
    let y = &g.y_nodes;
    let w = g.weight_exponent;
    let two = T::lit(2.0);
    let nm1 = T::from_count(field.n as usize) - T::one();
    let u = |a: usize, b: usize| field.at(a, b);
    // radial part: flux r^{n-1} u_r at the half nodes
    let rp = (r[i] + r[i + 1]) / two;
    let rm = (r[i] + r[i - 1]) / two;
    let flux_p = rp.powf(nm1) * (u(i + 1, j) - u(i, j)) / (r[i + 1] - r[i]);
    let flux_m = rm.powf(nm1) * (u(i, j) - u(i - 1, j)) / (r[i] - r[i - 1]);
    let radial = (flux_p - flux_m) / (r[i].powf(nm1) * (r[i + 1] - r[i - 1]) / two);
    // vertical part: flux y^w u_y with weights exact for y^{1-w}
    let fy_p = (u(i, j + 1) - u(i, j)) / weight_integral(y[j], y[j + 1], w);
    let fy_m = (u(i, j) - u(i, j - 1)) / weight_integral(y[j - 1], y[j], w);
    let vertical = (fy_p - fy_m) / ((y[j + 1] - y[j - 1]) / two) / y[j].powf(w);
    radial + vertical
}

/// Largest `|y^{-w} div(y^w grad u_e)|` over interior nodes, relative to
/// `max |u_e|`, with `w` the grid weight exponent.
pub fn degenerate_residual<T: Real>(field: &HalfSpaceField<T>) -> Result<T> {
    let r_max = field.grid.r_max();
    let y_max = field.grid.y_max();
    degenerate_residual_in(field, (T::zero(), r_max), (T::zero(), y_max))
}

/// [`degenerate_residual`] restricted to nodes inside `r_range x y_range`.
pub fn degenerate_residual_in<T: Real>(field: &HalfSpaceField<T>, r_range: (T, T), y_range: (T, T)) -> Result<T> {
    let g = &field.grid;
    if g.nr() < 4 || g.ny() < 4 {
        return Err(Error::GridTooCoarse(format!(
            "residual needs at least 4 nodes per direction, got {} x {}",
            g.nr(),
            g.ny()
        )));
    }
    let scale = field.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    if scale == T::zero() {
        return Ok(T::zero());
    }
    let mut worst = T::zero();
    for i in 1..g.nr() - 1 {
        let r = g.r_nodes[i];
        if r < r_range.0 || r > r_range.1 {
            continue;
        }
        for j in 1..g.ny() - 1 {
            let y = g.y_nodes[j];
            if y < y_range.0 || y > y_range.1 {
                continue;
            }
            worst = worst.max(weighted_operator(field, i, j).abs());
        }
    }
    Ok(worst / scale)
}

/// Tolerance used to flag unstable extrapolation in [`neumann_trace`].
pub const TRACE_TOL: f64 = 1e-6;

/// `-lim_{y -> 0} y^{1-2s} d_y u_e` at every radial node.
///
/// Uses `D(y) = -2s (u_e(y) - u) / y^{2s}`, which shares the limit and
/// expands in `y^{2-2s}, y^2, y^{4-2s}, y^4, ...`, evaluated on the geometric
/// levels below `0.1 (r_1 - r_0)` and extrapolated by Richardson's scheme.
pub fn neumann_trace<T: Real>(field: &HalfSpaceField<T>) -> Result<RadialProfile<T>> {
    let g = &field.grid;
    let s = field.s;
    check_order(s)?;
    let threshold = T::lit(0.1) * (g.r_nodes[1] - g.r_nodes[0]);
    let levels: Vec<usize> = (0..g.ny()).filter(|&j| g.y_nodes[j] < threshold).collect();
    if levels.len() < 3 {
        return Err(Error::GridTooCoarse(format!(
            "trace needs at least 3 heights below {}, found {}",
            threshold.as_f64(),
            levels.len()
        )));
    }
    let ratio = g.y_nodes[levels[0]] / g.y_nodes[levels[1]];
    for w in levels.windows(2) {
        let q = g.y_nodes[w[0]] / g.y_nodes[w[1]];
        if (q - ratio).abs() > T::lit(1e-9) * ratio {
            return Err(Error::GridTooCoarse("trace heights must be geometric".into()));
        }
    }
    let two = T::lit(2.0);
    let exponents: Vec<T> = (0..levels.len())
        .map(|k| {
            let pair = T::from_count(k / 2 + 1) * two;
            if k % 2 == 0 {
                pair - two * s
            } else {
                pair
            }
        })
        .collect();
    // top level first, each step divides y by 1/ratio
    let order: Vec<usize> = levels.iter().rev().copied().collect();
    let mut scale = T::zero();
    let mut values = Vec::with_capacity(g.nr());
    let mut worst_spread = T::zero();
    for i in 0..g.nr() {
        let base = field.boundary[i];
        let mut table: Vec<T> = order
            .iter()
            .map(|&j| {
                let y = g.y_nodes[j];
                -two * s * (field.at(i, j) - base) / y.powf(two * s)
            })
            .collect();
        let mut prev_best = table[table.len() - 1];
        let mut best = prev_best;
        for e in exponents.iter().take(order.len() - 1) {
            let f = ratio.powf(*e);
            let next: Vec<T> = table.windows(2).map(|w| (w[1] - f * w[0]) / (T::one() - f)).collect();
            prev_best = best;
            best = next[next.len() - 1];
            table = next;
        }
        worst_spread = worst_spread.max((best - prev_best).abs());
        scale = scale.max(best.abs());
        values.push(best);
    }
    let tol = T::lit(TRACE_TOL) * scale.max(T::one());
    if worst_spread > T::lit(10.0) * tol {
        return Err(Error::ExtrapolationUnstable {
            spread: worst_spread.as_f64(),
        });
    }
    RadialProfile::new(g.r_nodes.clone(), values, TailModel::Unspecified)
}

/// Fraction of the spectral mass allowed beyond the band limit.
pub const ALIASING_FRACTION: f64 = 1e-6;

const BAND_LIMITS: [f64; 6] = [4.0, 8.0, 16.0, 32.0, 64.0, 128.0];

/// Radial Fourier transform, `n = 1` or `3`.
fn radial_transform<T: Real, U: RadialFunction<T>>(u: &U, n: u32, xi: T) -> Result<T> {
    let tol = Tolerance::new(T::lit(1e-15), T::lit(1e-11)).with_max_level(9);
    match n {
        1 => Ok(T::lit(2.0) * fourier_half_line(|r| u.value(r), xi, Oscillator::Cosine, tol)?),
        3 => {
            let v = fourier_half_line(|r| r * u.value(r), xi, Oscillator::Sine, tol)?;
            Ok(T::lit(4.0) * T::PI() * v / xi)
        }
        other => Err(Error::UnsupportedDimension(other)),
    }
}

/// Composite Gauss-Legendre nodes on `[0, xi_max]`: geometric panels near
/// the origin, then panels of width one half.
fn spectral_nodes<T: Real>(from: T, to: T, rule: &GaussRule<T>) -> Vec<(T, T)> {
    let mut edges = Vec::new();
    if from == T::zero() {
        edges.push(T::zero());
        let mut e = T::lit(0.5).powi(12);
        while e < T::lit(0.5) {
            edges.push(e);
            e = e * T::lit(2.0);
        }
        edges.push(T::lit(0.5));
    } else {
        edges.push(from);
    }
    let mut e = edges[edges.len() - 1];
    while e < to {
        e = (e + T::lit(0.5)).min(to);
        edges.push(e);
    }
    let mut out = Vec::new();
    for w in edges.windows(2) {
        let half = (w[1] - w[0]) / T::lit(2.0);
        let mid = (w[1] + w[0]) / T::lit(2.0);
        for (&x, &wt) in rule.nodes.iter().zip(&rule.weights) {
            out.push((mid + half * x, half * wt));
        }
    }
    out
}

/// `(-Delta)^s u` at the radii `r` by forward radial Fourier transform, the
/// multiplier `|xi|^{2s}` and inverse transform over a band-limited grid.
pub fn frac_laplacian_oracle<T: Real, U: RadialFunction<T>>(u: &U, n: u32, s: T, r: &[T]) -> Result<Vec<T>> {
    if n != 1 && n != 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    if !(s > T::zero() && s < T::one()) {
        return Err(Error::UnsupportedOrder(s.as_f64()));
    }
    let rule = gauss_legendre::<T>(10);
    let two_s = T::lit(2.0) * s;
    let nm1 = T::from_count(n as usize - 1);
    let weigh = |nodes: &[(T, T)]| -> Result<Vec<(T, T, T)>> {
        nodes
            .par_iter()
            .map(|&(xi, w)| Ok((xi, w, xi.powf(two_s) * radial_transform(u, n, xi)?)))
            .collect()
    };
    let mass = |pts: &[(T, T, T)]| -> T { pts.iter().map(|&(xi, w, v)| w * v.abs() * xi.powf(nm1)).sum() };
    let mut spectrum = weigh(&spectral_nodes(T::zero(), T::lit(BAND_LIMITS[0]), &rule))?;
    let mut accepted = false;
    let mut last = (0.0, 0.0);
    for &band in &BAND_LIMITS {
        let band = T::lit(band);
        let tail = weigh(&spectral_nodes(band, band * T::lit(2.0), &rule))?;
        let tail_mass = mass(&tail);
        spectrum.extend(tail);
        let total = mass(&spectrum);
        last = (tail_mass.as_f64(), total.as_f64());
        if tail_mass <= T::lit(ALIASING_FRACTION) * total {
            accepted = true;
            break;
        }
    }
    if !accepted {
        return Err(Error::AliasingDetected {
            tail: last.0,
            mass: last.1,
        });
    }
    let pi = T::PI();
    Ok(r.iter()
        .map(|&x| {
            let x = x.abs();
            match n {
                1 => spectrum.iter().map(|&(xi, w, v)| w * v * (xi * x).cos()).sum::<T>() / pi,
                _ => {
                    let sum: T = spectrum
                        .iter()
                        .map(|&(xi, w, v)| {
                            let kernel = if x == T::zero() { xi * xi } else { xi * (xi * x).sin() / x };
                            w * v * kernel
                        })
                        .sum();
                    sum / (T::lit(2.0) * pi * pi)
                }
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma_ratio;

    fn poisson_profile(x: f64) -> f64 {
        1.0 / (1.0 + x * x)
    }

    #[test]
    fn normalization_matches_gamma_form() {
        for &(n, s) in &[(1u32, 0.5f64), (1, 0.25), (2, 0.75), (3, 0.5), (5, 0.3)] {
            let num = poisson_normalization(n, s).unwrap();
            let exact = gamma_ratio(&[(n as f64 + 2.0 * s) / 2.0], &[s]).unwrap() / std::f64::consts::PI.powf(n as f64 / 2.0);
            assert!((num - exact).abs() < 1e-10 * exact, "n={n} s={s}: {num} vs {exact}");
        }
        let p = poisson_normalization(1, 0.5f64).unwrap();
        assert!((p - 1.0 / std::f64::consts::PI).abs() < 1e-12);
        for &y in &[0.3, 7.0] {
            let m = poisson_mass(2, 0.4f64, y).unwrap() * poisson_normalization(2, 0.4).unwrap();
            assert!((m - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn spline_profile_reproduces_data() {
        let r: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let p = RadialProfile::sample(r, poisson_profile, RadialProfile::power_tail(10.0, poisson_profile(10.0), 2.0)).unwrap();
        for &x in &[0.0, 0.013, 0.71, 3.333, 9.99] {
            let e = (p.value(x) - poisson_profile(x)).abs();
            assert!(e < 5e-7, "x={x}: {e}");
        }
        let amp = poisson_profile(10.0) * 100.0;
        assert!((p.value(40.0) - amp / 1600.0).abs() < 1e-15);
        assert!((p.value(-2.0) - p.value(2.0)).abs() == 0.0);
    }

    #[test]
    fn constant_data_extends_to_constant() {
        let grid = HalfSpaceGrid::uniform(2.0, 4, 2.0, 4, 0.0f64).unwrap();
        let u = RadialProfile::sample((0..8).map(|i| i as f64).collect(), |_| 1.0, TailModel::Constant(1.0)).unwrap();
        let field = extend_radial(&u, &grid, 3, 0.3).unwrap();
        assert!(field.values.iter().all(|v| (v - 1.0).abs() < 1e-13));
    }

    #[test]
    fn harmonic_extension_of_poisson_profile() {
        let u = Analytic(poisson_profile);
        let ext = PoissonExtension::new(&u, 1, 0.5f64).unwrap();
        assert!((ext.value(0.0, 1.0).unwrap() - 0.5).abs() < 1e-10);
        assert!((ext.value(1.0, 1.0).unwrap() - 0.4).abs() < 1e-10);
        for &(x, y) in &[(0.3, 1e-3), (4.0, 0.02), (2.5, 3.0)] {
            let exact = (1.0 + y) / (x * x + (1.0 + y) * (1.0 + y));
            assert!((ext.value(x, y).unwrap() - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn trace_of_poisson_profile() {
        let u = Analytic(poisson_profile);
        let grid = HalfSpaceGrid::standard(3.0, 0.5).unwrap();
        let field = extend_radial(&u, &grid, 1, 0.5).unwrap();
        let trace = neumann_trace(&field).unwrap();
        for (&x, &d) in trace.r.iter().zip(&trace.u) {
            let exact = (1.0 - x * x) / ((1.0 + x * x) * (1.0 + x * x));
            assert!((d - exact).abs() < 1e-5, "x={x}: {d} vs {exact}");
        }
        let coarse = HalfSpaceGrid::uniform(3.0, 30, 1.0, 10, 0.0).unwrap();
        let field = extend_radial(&u, &coarse, 1, 0.5).unwrap();
        assert!(matches!(neumann_trace(&field), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn sampled_field_interpolates() {
        let u = Analytic(poisson_profile);
        let grid = HalfSpaceGrid::uniform(3.0, 60, 2.0, 40, 0.0).unwrap();
        let field = extend_radial(&u, &grid, 1, 0.5).unwrap();
        let (x, y) = (1.234, 0.567);
        let exact = (1.0 + y) / (x * x + (1.0 + y) * (1.0 + y));
        assert!((field.value(x, y).unwrap() - exact).abs() < 1e-6);
        let (_, dy) = field.gradient(x, y).unwrap();
        let ey = (x * x - (1.0 + y) * (1.0 + y)) / (x * x + (1.0 + y) * (1.0 + y)).powi(2);
        assert!((dy - ey).abs() < 1e-4);
        assert!(matches!(field.value(3.5, 0.1), Err(Error::DomainExceeded { .. })));
        let mut buf = Vec::new();
        field.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 61 * 41);
    }

    #[test]
    fn truncated_data_needs_a_tail() {
        let r: Vec<f64> = (0..=20).map(|i| i as f64 * 0.25).collect();
        let u = RadialProfile::sample(r, poisson_profile, TailModel::Unspecified).unwrap();
        let grid = HalfSpaceGrid::uniform(4.0, 4, 1.0, 4, 0.0).unwrap();
        assert!(matches!(extend_radial(&u, &grid, 1, 0.5), Err(Error::TailUnspecified { .. })));
    }

    #[test]
    fn null_solution_of_weighted_operator() {
        let s = 0.3f64;
        let grid = HalfSpaceGrid::new(
            (0..8).map(|i| i as f64 * 0.5).collect(),
            vec![0.01, 0.03, 0.1, 0.2, 0.5, 0.9, 1.4],
            1.0 - 2.0 * s,
        )
        .unwrap();
        let ny = grid.ny();
        let values: Vec<f64> = (0..grid.nr() * ny).map(|k| grid.y_nodes[k % ny].powf(2.0 * s)).collect();
        let field = HalfSpaceField::from_parts(grid, values, vec![0.0; 8], 2, s).unwrap();
        assert!(degenerate_residual(&field).unwrap() < 1e-12);
        let grid = HalfSpaceGrid::uniform(1.0, 3, 1.0, 2, 0.0).unwrap();
        let field = HalfSpaceField::from_parts(grid, vec![1.0; 8], vec![1.0; 4], 1, 0.5).unwrap();
        assert!(matches!(degenerate_residual(&field), Err(Error::GridTooCoarse(_))));
    }

    #[test]
    fn oracle_on_poisson_profile() {
        let u = Analytic(poisson_profile);
        let r = [0.0, 0.5, 1.0, 2.0, 5.0];
        let v = frac_laplacian_oracle(&u, 1, 0.5f64, &r).unwrap();
        for (&x, &got) in r.iter().zip(&v) {
            let exact = (1.0 - x * x) / ((1.0 + x * x) * (1.0 + x * x));
            assert!((got - exact).abs() < 1e-6, "x={x}: {got} vs {exact}");
        }
        assert!(matches!(frac_laplacian_oracle(&u, 2, 0.5, &r), Err(Error::UnsupportedDimension(2))));
    }

    #[test]
    fn oracle_in_three_dimensions() {
        // (-Delta)^s e^{-r^2} at r = 0: 4 Gamma(3/2 + s) / Gamma(3/2)
        let u = Analytic(|r: f64| (-r * r).exp());
        for &s in &[0.25f64, 0.5, 0.75] {
            let v = frac_laplacian_oracle(&u, 3, s, &[0.0, 1e-3]).unwrap();
            let exact = 4f64.powf(s) * gamma_ratio(&[1.5 + s], &[1.5]).unwrap();
            assert!((v[0] - exact).abs() < 1e-6 * exact, "s={s}: {} vs {exact}", v[0]);
            assert!((v[1] - v[0]).abs() < 1e-5 * exact);
        }
    }

    #[test]
    fn oracle_near_order_one() {
        // the multiplier moves the value by O(1 - s): about 3e-3 at the origin
        let u = Analytic(|r: f64| (-r * r).exp());
        let s = 0.999f64;
        let r = [0.0, 0.5, 1.2, 2.0];
        let v = frac_laplacian_oracle(&u, 1, s, &r).unwrap();
        let exact0 = 4f64.powf(s) * gamma_ratio(&[0.5 + s], &[0.5]).unwrap();
        assert!((v[0] - exact0).abs() < 1e-8, "{} vs {exact0}", v[0]);
        for (&x, &got) in r.iter().zip(&v) {
            let minus_second = (2.0 - 4.0 * x * x) * (-x * x).exp();
            assert!((got - minus_second).abs() < 5e-3, "x={x}: {got} vs {minus_second}");
        }

    }
}
