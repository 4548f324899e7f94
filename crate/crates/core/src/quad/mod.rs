//! Adaptive quadrature of complex integrands on finite and infinite real
//! domains, principal values, root bracketing and Chebyshev tables.
//!
//! Everything is built on a 21-point Gauss-Kronrod rule with global
//! bisection. Infinite tails are mapped through `k = K/t`; tails carrying an
//! oscillation `cos(ωk)` are instead summed half-period by half-period and the
//! partial sums accelerated with Wynn's epsilon algorithm.

mod cheb;
mod gk;
mod pv;
mod roots;
mod tail;

use std::ops::Add;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use cheb::Chebyshev;
pub use pv::{principal_value, principal_value_with, upper_boundary_integral, PoleSpec};
pub use roots::find_root;
pub use tail::wynn_epsilon;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadResult {
    pub value: C64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadResult {
    pub fn zero() -> Self {
        Self { value: C64::new(0.0, 0.0), abs_error_estimate: 0.0, evaluations: 0 }
    }

    pub fn scale(self, factor: C64) -> Self {
        Self {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.norm(),
            evaluations: self.evaluations,
        }
    }
}

impl Add for QuadResult {
    type Output = QuadResult;

    fn add(self, rhs: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + rhs.value,
            abs_error_estimate: self.abs_error_estimate + rhs.abs_error_estimate,
            evaluations: self.evaluations + rhs.evaluations,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    Interval(f64, f64),
    /// `[a, ∞)`
    UpperHalfLine(f64),
    /// `(-∞, b]`
    LowerHalfLine(f64),
    FullLine,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Budget of subintervals per adaptive run.
    pub max_subdivisions: usize,
    /// Number of subintervals bisected per round. Values above one hand
    /// larger batches to the evaluator.
    pub batch: usize,
    /// Angular frequency of a `cos(ωk)` factor in the integrand. When set,
    /// infinite tails are summed over half periods with epsilon acceleration.
    pub oscillation: Option<f64>,
    pub max_cycles: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_subdivisions: 4000,
            batch: 1,
            oscillation: None,
            max_cycles: 2000,
        }
    }
}

impl QuadConfig {
    pub fn with_tol(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }

    pub fn rel(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn oscillating(mut self, omega: f64) -> Self {
        self.oscillation = (omega > 0.0).then_some(omega);
        self
    }

    pub fn batched(mut self, batch: usize) -> Self {
        self.batch = batch.max(1);
        self
    }

    pub fn subdivisions(mut self, n: usize) -> Self {
        self.max_subdivisions = n;
        self
    }

    fn split(&self, parts: usize) -> Self {
        Self { abs_tol: self.abs_tol / parts as f64, ..*self }
    }
}

/// Integrates `f` over `domain` to absolute tolerance `tol`.
pub fn integrate_line<F>(f: F, domain: Domain, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> C64,
{
    integrate(&f, domain, &[], &QuadConfig::with_tol(tol))
}

/// Integrates `f` over `domain`, starting the subdivision at `breakpoints`.
pub fn integrate<F>(f: &F, domain: Domain, breakpoints: &[f64], cfg: &QuadConfig) -> Result<QuadResult>
where
    F: Fn(f64) -> C64 + ?Sized,
{
    let eval = |xs: &[f64]| xs.iter().map(|&x| f(x)).collect::<Vec<_>>();
    integrate_batched(&eval, domain, breakpoints, cfg)
}

/// Like [`integrate`], with the integrand evaluated on batches of abscissae.
pub fn integrate_batched<E>(eval: &E, domain: Domain, breakpoints: &[f64], cfg: &QuadConfig) -> Result<QuadResult>
where
    E: Fn(&[f64]) -> Vec<C64> + ?Sized,
{
    match domain {
        Domain::Interval(a, b) => {
            if a == b {
                return Ok(QuadResult::zero());
            }
            if b < a {
                let r = integrate_batched(eval, Domain::Interval(b, a), breakpoints, cfg)?;
                return Ok(r.scale(C64::new(-1.0, 0.0)));
            }
            gk::adaptive_batched(eval, &pieces(a, b, breakpoints), cfg)
        }
        Domain::UpperHalfLine(a) => {
            let k = tail_start(a, breakpoints.iter().copied().filter(|&x| x > a).fold(a, f64::max));
            let cfg2 = cfg.split(2);
            let core = gk::adaptive_batched(eval, &pieces(a, k, breakpoints), &cfg2)?;
            Ok(core + upper_tail(eval, k, &cfg2)?)
        }
        Domain::LowerHalfLine(b) => {
            let mirrored: Vec<f64> = breakpoints.iter().map(|x| -x).collect();
            let flipped = |xs: &[f64]| {
                let m: Vec<f64> = xs.iter().map(|x| -x).collect();
                eval(&m)
            };
            let flipped: &dyn Fn(&[f64]) -> Vec<C64> = &flipped;
            integrate_batched(flipped, Domain::UpperHalfLine(-b), &mirrored, cfg)
        }
        Domain::FullLine => {
            let lo = breakpoints.iter().copied().fold(0.0, f64::min);
            let hi = breakpoints.iter().copied().fold(0.0, f64::max);
            let ku = tail_start(0.0, hi);
            let kl = -tail_start(0.0, -lo);
            let cfg3 = cfg.split(3);
            let core = gk::adaptive_batched(eval, &pieces(kl, ku, breakpoints), &cfg3)?;
            let upper = upper_tail(eval, ku, &cfg3)?;
            let flipped = |xs: &[f64]| {
                let m: Vec<f64> = xs.iter().map(|x| -x).collect();
                eval(&m)
            };
            let lower = upper_tail(&flipped, -kl, &cfg3)?;
            Ok(core + upper + lower)
        }
    }
}

fn tail_start(a: f64, last_break: f64) -> f64 {
    a.max(last_break) + 1.0 + 0.25 * last_break.abs().max(a.abs())
}

fn upper_tail<E>(eval: &E, k: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    E: Fn(&[f64]) -> Vec<C64> + ?Sized,
{
    match cfg.oscillation {
        Some(omega) => tail::oscillatory_tail(eval, k, omega, cfg),
        None => {
            // k = K/t maps [K, ∞) onto (0, 1]; algebraic decay ~1/k² becomes
            // a bounded integrand.
            let mapped = |ts: &[f64]| {
                let xs: Vec<f64> = ts.iter().map(|&t| k / t).collect();
                let fv = eval(&xs);
                fv.into_iter().zip(ts).map(|(v, &t)| v * (k / (t * t))).collect::<Vec<_>>()
            };
            gk::adaptive_batched(&mapped, &[(0.0, 0.5), (0.5, 1.0)], cfg)
        }
    }
}

/// Splits `[a, b]` at the breakpoints that fall strictly inside it.
fn pieces(a: f64, b: f64, breakpoints: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&x| x.is_finite() && x > a && x < b)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut lo = a;
    for c in cuts {
        if c - lo > 1e-12 * (1.0 + c.abs()) {
            out.push((lo, c));
            lo = c;
        }
    }
    out.push((lo, b));
    out
}
