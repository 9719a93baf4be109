//! The stability condition for supercritical exponents, the amplitude of the
//! singular solution, the threshold where the condition fails and the
//! resulting classification verdict.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specfun::{hardy_gamma, lambda_alpha, log_gamma_ratio, ProblemParams, SobolevExponent};

/// `|p - p_S| <= CRITICAL_BAND * max(1, p_S)` counts as the critical exponent.
pub const CRITICAL_BAND: f64 = 1e-12;

/// Default number of geometric scan nodes for [`jl_threshold`].
pub const DEFAULT_SCAN_NODES: usize = 512;

/// Bisection stops once the bracket is narrower than this.
pub const BISECTION_WIDTH: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Subcritical,
    Critical,
    SupercriticalTheoremApplies,
    SupercriticalTheoremSilent,
    Invalid,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Subcritical => "Subcritical",
            Verdict::Critical => "Critical",
            Verdict::SupercriticalTheoremApplies => "SupercriticalTheoremApplies",
            Verdict::SupercriticalTheoremSilent => "SupercriticalTheoremSilent",
            Verdict::Invalid => "Invalid",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Verdict of the Liouville theorem for one parameter tuple.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationOutcome<T> {
    pub verdict: Verdict,
    /// Stability margin, present for supercritical exponents.
    pub margin: Option<T>,
    /// Sobolev exponent, absent only when the parameters are invalid.
    pub p_sobolev: Option<SobolevExponent<T>>,
    /// Validation message for [`Verdict::Invalid`].
    pub reason: Option<String>,
}

/// A sign change of the stability margin refined by bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootBracket<T> {
    pub lo: T,
    pub hi: T,
    pub root: T,
    /// Margin evaluated at `root`.
    pub residual: T,
}

fn require_supercritical<T: Real>(params: &ProblemParams<T>) -> Result<T> {
    params.validate()?;
    match params.p_sobolev() {
        SobolevExponent::Finite(ps) if params.p > ps => Ok(ps),
        ps => Err(Error::NotSupercritical {
            p: params.p.as_f64(),
            p_sobolev: ps.as_real().as_f64(),
        }),
    }
}

/// Left minus right side of the stability condition
///
/// `p G(n/2 - q) G(s + q) / (G(q) G((n-2s)/2 - q)) - G((n+2s)/4)^2 / G((n-2s)/4)^2`,
/// `q = (s + a/2)/(p - 1)`; the condition holds iff the result is positive.
pub fn stability_margin<T: Real>(params: &ProblemParams<T>) -> Result<T> {
    require_supercritical(params)?;
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let n = params.dim();
    let s = params.s;
    let q = params.beta() / two;
    let lhs = params.p.ln()
        + log_gamma_ratio(&[n / two - q, s + q], &[q, (n - two * s) / two - q])?;
    let rhs = log_gamma_ratio(&[(n + two * s) / four; 2], &[(n - two * s) / four; 2])?;
    Ok(lhs.exp() - rhs.exp())
}

/// Amplitude `A = lambda(alpha)^{1/(p-1)}` of `u_s = A |x|^{-(2s+a)/(p-1)}`.
pub fn singular_amplitude<T: Real>(params: &ProblemParams<T>) -> Result<T> {
    require_supercritical(params)?;
    let alpha = params.alpha().expect("finite p_S implies n > 2s");
    let lam = lambda_alpha(params, alpha)?;
    Ok(lam.powf(T::one() / (params.p - T::one())))
}

/// Classification of `(n, s, a, p)`; validation failures become [`Verdict::Invalid`].
pub fn classify<T: Real>(params: &ProblemParams<T>) -> ClassificationOutcome<T> {
    let invalid = |reason: String, ps| ClassificationOutcome {
        verdict: Verdict::Invalid,
        margin: None,
        p_sobolev: ps,
        reason: Some(reason),
    };
    if let Err(e) = params.validate() {
        return invalid(e.to_string(), None);
    }
    let ps = params.p_sobolev();
    let plain = |verdict| ClassificationOutcome {
        verdict,
        margin: None,
        p_sobolev: Some(ps),
        reason: None,
    };
    let ps_value = match ps {
        SobolevExponent::Infinite => return plain(Verdict::Subcritical),
        SobolevExponent::Finite(v) => v,
    };
    let band = T::lit(CRITICAL_BAND) * ps_value.max(T::one());
    if (params.p - ps_value).abs() <= band {
        return plain(Verdict::Critical);
    }
    if params.p < ps_value {
        return plain(Verdict::Subcritical);
    }
    match stability_margin(params) {
        Ok(m) => ClassificationOutcome {
            verdict: if m > T::zero() {
                Verdict::SupercriticalTheoremApplies
            } else {
                Verdict::SupercriticalTheoremSilent
            },
            margin: Some(m),
            p_sobolev: Some(ps),
            reason: None,
        },
        Err(e) => invalid(e.to_string(), Some(ps)),
    }
}

/// Every sign change of the margin on a geometric grid of `nodes` points in
/// `(p_S (1 + 1e-9), p_max]`, each refined by bisection.
pub fn jl_scan<T: Real>(n: u32, s: T, a: T, p_max: T, nodes: usize) -> Result<Vec<RootBracket<T>>> {
    let base = ProblemParams::new(n, s, a, p_max)?;
    let ps = match base.p_sobolev() {
        SobolevExponent::Finite(v) => v,
        SobolevExponent::Infinite => {
            return Err(Error::DimensionTooSmall {
                n,
                two_s: (T::lit(2.0) * s).as_f64(),
            })
        }
    };
    if nodes < 2 {
        return Err(Error::InvalidParams("scan needs at least two nodes".into()));
    }
    let p_lo = ps * (T::one() + T::lit(1e-9));
    if !(p_max > p_lo) {
        return Err(Error::InvalidParams(format!(
            "p_max={} must exceed p_S={}",
            p_max.as_f64(),
            ps.as_f64()
        )));
    }
    let ratio = (p_max / p_lo).ln() / T::from_count(nodes - 1);
    let grid: Vec<T> = (0..nodes)
        .map(|i| {
            if i == nodes - 1 {
                p_max
            } else {
                p_lo * (ratio * T::from_count(i)).exp()
            }
        })
        .collect();
    let margin = |p: T| stability_margin(&base.with_p(p));
    let values = grid
        .par_iter()
        .map(|&p| margin(p))
        .collect::<Result<Vec<T>>>()?;
    let mut brackets = Vec::new();
    for i in 0..nodes - 1 {
        let (f0, f1) = (values[i], values[i + 1]);
        if f0 == T::zero() {
            brackets.push(RootBracket {
                lo: grid[i],
                hi: grid[i],
                root: grid[i],
                residual: f0,
            });
            continue;
        }
        if (f0 > T::zero()) != (f1 > T::zero()) && f1 != T::zero() {
            brackets.push(bisect(&margin, grid[i], grid[i + 1], f0)?);
        }
    }
    Ok(brackets)
}

fn bisect<T: Real, F: Fn(T) -> Result<T>>(f: &F, lo: T, hi: T, f_lo: T) -> Result<RootBracket<T>> {
    let (mut lo, mut hi, mut f_lo) = (lo, hi, f_lo);
    let width = T::lit(BISECTION_WIDTH);
    while hi - lo > width {
        let mid = lo + (hi - lo) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == T::zero() {
            return Ok(RootBracket {
                lo,
                hi,
                root: mid,
                residual: fm,
            });
        }
        if (fm > T::zero()) == (f_lo > T::zero()) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    let root = lo + (hi - lo) / T::lit(2.0);
    Ok(RootBracket {
        lo,
        hi,
        root,
        residual: f(root)?,
    })
}

/// The smallest exponent above `p_S` where the stability condition fails, or
/// `None` when the margin stays positive up to `p_max`.
pub fn jl_threshold<T: Real>(n: u32, s: T, a: T, p_max: T) -> Result<Option<RootBracket<T>>> {
    Ok(jl_scan(n, s, a, p_max, DEFAULT_SCAN_NODES)?.into_iter().next())
}

/// `lim_{p -> inf} p lambda(alpha(p)) = (2s+a) 2^{2s-1} G(n/2) G(s) / G((n-2s)/2)`.
pub fn large_p_limit<T: Real>(n: u32, s: T, a: T) -> Result<T> {
    let two = T::lit(2.0);
    let nf = T::from_count(n as usize);
    let lr = log_gamma_ratio(&[nf / two, s], &[(nf - two * s) / two])?;
    Ok((two * s + a) * (lr + (two * s - T::one()) * two.ln()).exp())
}

/// `(p lambda(alpha) - Lambda) / 2^{2s}`, the margin through the multiplier route.
pub fn margin_via_lambda<T: Real>(params: &ProblemParams<T>) -> Result<T> {
    require_supercritical(params)?;
    let alpha = params.alpha().expect("finite p_S implies n > 2s");
    let scale = T::lit(2.0).powf(T::lit(2.0) * params.s);
    Ok((params.p * lambda_alpha(params, alpha)? - hardy_gamma(params.n, params.s)?) / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32, s: f64, a: f64, p: f64) -> ProblemParams<f64> {
        ProblemParams::new(n, s, a, p).unwrap()
    }

    #[test]
    fn margin_reference_values() {
        let m = stability_margin(&params(3, 0.5, 1.0, 4.0)).unwrap();
        assert!((m - 0.836_390_652_195_460_857_48).abs() < 1e-13);
        // unscaled p lambda - Lambda = 4/sqrt 3 - 2/pi
        let unscaled = 4.0 / 3f64.sqrt() - 2.0 / std::f64::consts::PI;
        assert!((2.0 * m - unscaled).abs() < 1e-13);
        let m = stability_margin(&params(10, 0.5, 0.0, 1e6)).unwrap();
        assert!((m - (-0.186_562_539_929_037_272_37)).abs() < 1e-9, "{m}");
    }

    #[test]
    fn margin_near_sobolev_exponent() {
        let ps = 3.0;
        let m = stability_margin(&params(3, 0.5, 1.0, ps * (1.0 + 1e-9))).unwrap();
        let limit = (ps - 1.0) * hardy_gamma(3, 0.5f64).unwrap() / 2.0;
        assert!((m - limit).abs() < 1e-7);
    }

    #[test]
    fn margin_requires_supercritical() {
        assert!(matches!(
            stability_margin(&params(3, 0.5, 1.0, 3.0)),
            Err(Error::NotSupercritical { .. })
        ));
        assert!(matches!(
            stability_margin(&params(1, 0.75, 0.0, 3.0)),
            Err(Error::NotSupercritical { .. })
        ));
    }

    #[test]
    fn amplitude_values() {
        let a = singular_amplitude(&params(3, 0.5, 1.0, 4.0)).unwrap();
        assert!((a - 3f64.powf(-1.0 / 6.0)).abs() < 1e-13);
        // p -> p_S: A^{p-1} -> Lambda
        let a = singular_amplitude(&params(3, 0.5, 1.0, 3.0 + 1e-9)).unwrap();
        assert!((a.powf(2.0) - 2.0 / std::f64::consts::PI).abs() < 1e-7);
        let gaps: Vec<f64> = [1e2, 1e4, 1e6]
            .iter()
            .map(|&p| (singular_amplitude(&params(3, 0.5, 1.0, p)).unwrap() - 1.0).abs())
            .collect();
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2] && gaps[2] < 1e-4, "{gaps:?}");
    }

    #[test]
    fn large_p_limits() {
        let l10 = large_p_limit(10, 0.5f64, 0.0).unwrap();
        assert!((l10 - 3.657_142_857_142_857_142_9).abs() < 1e-13);
        let l3 = large_p_limit(3, 0.5f64, 1.0).unwrap();
        assert!((l3 - std::f64::consts::PI).abs() < 1e-13);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify(&params(3, 0.5, 1.0, 2.0)).verdict, Verdict::Subcritical);
        assert_eq!(classify(&params(3, 0.5, 1.0, 3.0)).verdict, Verdict::Critical);
        let out = classify(&params(3, 0.5, 1.0, 4.0));
        assert_eq!(out.verdict, Verdict::SupercriticalTheoremApplies);
        assert!(out.margin.unwrap() > 0.0);
        assert_eq!(classify(&params(10, 0.5, 0.0, 1e6)).verdict, Verdict::SupercriticalTheoremSilent);
        assert_eq!(classify(&params(1, 0.75, 0.0, 50.0)).verdict, Verdict::Subcritical);
        let bad = ProblemParams { n: 3, s: 1.0, a: 1.0, p: 2.0 };
        let out = classify(&bad);
        assert_eq!(out.verdict, Verdict::Invalid);
        assert!(out.reason.unwrap().contains("s=1 unsupported"));
    }

    #[test]
    fn threshold_absent_in_low_dimension() {
        assert!(jl_threshold(3, 0.5f64, 1.0, 1e6).unwrap().is_none());
        assert!(jl_threshold(3, 0.5f64, 0.0, 1e6).unwrap().is_none());
    }

    #[test]
    fn threshold_present_in_dimension_ten() {
        let r = jl_threshold(10, 0.5f64, 0.0, 1e6).unwrap().expect("root");
        assert!(r.lo <= r.root && r.root <= r.hi);
        assert!(r.hi - r.lo <= 1e-10 * r.root.max(1.0) + 1e-10);
        assert!(r.residual.abs() < 1e-8);
        let below = stability_margin(&params(10, 0.5, 0.0, r.root - 1e-3)).unwrap();
        let above = stability_margin(&params(10, 0.5, 0.0, r.root + 1e-3)).unwrap();
        assert!(below > 0.0 && above < 0.0);
        // truncated scan misses it
        assert!(jl_threshold(10, 0.5f64, 0.0, r.root * 0.99).unwrap().is_none());
    }
}
