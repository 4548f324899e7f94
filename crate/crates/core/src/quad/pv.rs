//! Cauchy principal values by symmetric subtraction of a simple pole.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{integrate, integrate_batched, Domain, QuadConfig, QuadResult};
use crate::error::{Error, Result};

/// Fraction of the folding window next to the pole that is not sampled.
const INNER_FRACTION: f64 = 1e-4;

/// A simple pole of the integrand: `f(x) ≈ residue_density/(x - location)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleSpec {
    pub location: f64,
    pub residue_density: C64,
}

impl PoleSpec {
    pub fn new(location: f64, residue_density: C64) -> Result<Self> {
        if !location.is_finite() || !residue_density.re.is_finite() || !residue_density.im.is_finite() {
            return Err(Error::InvalidParameter("pole location and residue must be finite".into()));
        }
        Ok(Self { location, residue_density })
    }

    /// Value of the integral when the pole is displaced as
    /// `residue_density/(x - location - i0)`, which is how `1/(z - ω(k))`
    /// behaves at `z = ω(k0) + i0` for increasing `ω`.
    pub fn upper_boundary_value(&self, pv: C64) -> C64 {
        pv + C64::new(0.0, std::f64::consts::PI) * self.residue_density
    }
}

/// Principal value of `∫ f` over `domain` with a simple pole at
/// `pole.location`.
pub fn principal_value<F>(f: F, domain: Domain, pole: PoleSpec, tol: f64) -> Result<QuadResult>
where
    F: Fn(f64) -> C64,
{
    principal_value_with(&f, domain, pole, &[], &QuadConfig::with_tol(tol))
}

pub fn principal_value_with<F>(
    f: &F,
    domain: Domain,
    pole: PoleSpec,
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult>
where
    F: Fn(f64) -> C64 + ?Sized,
{
    let p = pole.location;
    let (lo, hi) = match domain {
        Domain::Interval(a, b) => (a.min(b), a.max(b)),
        Domain::UpperHalfLine(a) => (a, f64::INFINITY),
        Domain::LowerHalfLine(b) => (f64::NEG_INFINITY, b),
        Domain::FullLine => (f64::NEG_INFINITY, f64::INFINITY),
    };
    if !(p > lo && p < hi) {
        return Err(Error::Domain(format!("pole {p} must lie strictly inside the integration domain")));
    }
    if let Domain::Interval(a, b) = domain {
        if b < a {
            let r = principal_value_with(f, Domain::Interval(b, a), pole, breakpoints, cfg)?;
            return Ok(r.scale(C64::new(-1.0, 0.0)));
        }
    }
    let reach = 0.5 * (1.0 + p.abs());
    let w = reach.min(p - lo).min(hi - p);
    let cfg3 = QuadConfig { abs_tol: cfg.abs_tol / 3.0, ..*cfg };
    let c = pole.residue_density;

    // The window [p - w, p + w] folded onto t ∈ (0, w]; the c/t terms cancel
    // exactly in exact arithmetic and remove the singular part numerically.
    let folded = |ts: &[f64]| {
        ts.iter()
            .map(|&t| {
                let (xp, xm) = (p + t, p - t);
                (f(xp) - c / (xp - p)) + (f(xm) - c / (xm - p))
            })
            .collect::<Vec<_>>()
    };
    // The folded integrand is even in t. Near t = 0 it also carries a
    // spurious 2cδ/t² from the rounding δ of the pole location, so the
    // innermost piece comes from an even polynomial fit of g,
    // kept well inside the nearest breakpoint that is not itself lost in
    // the rounding of the pole location.
    let unresolved = 1e6 * f64::EPSILON * p.abs();
    let nearest = breakpoints
        .iter()
        .map(|&x| (x - p).abs())
        .filter(|&t| t > unresolved)
        .fold(f64::INFINITY, f64::min);
    let floor = 1e3 * f64::EPSILON * p.abs();
    // ∫_0^t g for g = g0 + a t² + b t⁴ sampled at t, 2t, 3t; the b term
    // serves as the error estimate
    let inner_at = |t: f64| {
        let g = folded(&[t, 2.0 * t, 3.0 * t]);
        let (d1, d2) = (g[1] - g[0], g[2] - g[1]);
        let b_t4 = (d2 / 5.0 - d1 / 3.0) / 8.0;
        let a_t2 = d1 / 3.0 - 5.0 * b_t4;
        let g0 = g[0] - a_t2 - b_t4;
        QuadResult {
            value: t * (g0 + a_t2 / 3.0 + b_t4 / 5.0),
            abs_error_estimate: t * (b_t4.norm() + f64::EPSILON * g[0].norm()),
            evaluations: 3,
        }
    };
    let mut t_min = (INNER_FRACTION * w).min(0.1 * nearest).max(floor).min(0.1 * w);
    let mut inner = inner_at(t_min);
    while inner.abs_error_estimate > cfg3.abs_tol && 0.1 * t_min > floor {
        let next = inner_at(0.1 * t_min);
        if next.abs_error_estimate >= inner.abs_error_estimate {
            break;
        }
        t_min *= 0.1;
        inner = next;
    }
    let window_breaks: Vec<f64> = breakpoints
        .iter()
        .map(|&x| (x - p).abs())
        .filter(|&t| t > t_min && t < w)
        .collect();
    let core = integrate_batched(&folded, Domain::Interval(t_min, w), &window_breaks, &cfg3)? + inner;

    let left = if p - w > lo {
        let dom = if lo.is_finite() { Domain::Interval(lo, p - w) } else { Domain::LowerHalfLine(p - w) };
        integrate(f, dom, breakpoints, &cfg3)?
    } else {
        QuadResult::zero()
    };
    let right = if p + w < hi {
        let dom = if hi.is_finite() { Domain::Interval(p + w, hi) } else { Domain::UpperHalfLine(p + w) };
        integrate(f, dom, breakpoints, &cfg3)?
    } else {
        QuadResult::zero()
    };
    Ok(core + left + right)
}

/// `∫_a^b f` with simple poles displaced as `c/(x − p − i0)`: each pole is
/// treated on its own symmetric window `[p − w, p + w]` and contributes
/// `PV + iπc`. Windows must lie inside `[a, b]` and must not overlap.
pub fn upper_boundary_integral<F>(
    f: &F,
    (a, b): (f64, f64),
    poles: &[(PoleSpec, f64)],
    breakpoints: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult>
where
    F: Fn(f64) -> C64 + ?Sized,
{
    let mut sorted = poles.to_vec();
    sorted.sort_by(|x, y| x.0.location.total_cmp(&y.0.location));
    let parts = 2 * sorted.len() + 1;
    let sub = QuadConfig { abs_tol: cfg.abs_tol / parts as f64, ..*cfg };
    let mut total = QuadResult::zero();
    let mut failure: Option<String> = None;
    let mut add = |piece: Result<QuadResult>, map: &dyn Fn(QuadResult) -> QuadResult| -> Result<()> {
        match piece {
            Ok(r) => total = total + map(r),
            Err(Error::NonConvergence { context, best }) => {
                failure.get_or_insert(context);
                total = total + map(best);
            }
            Err(err) => return Err(err),
        }
        Ok(())
    };
    let same = |r: QuadResult| r;
    let mut lo = a;
    for (pole, w) in sorted {
        let (l, r) = (pole.location - w, pole.location + w);
        if !(w > 0.0) || l < lo || r > b {
            return Err(Error::Domain(format!(
                "pole window [{l}, {r}] does not fit inside [{lo}, {b}]"
            )));
        }
        add(integrate(f, Domain::Interval(lo, l), breakpoints, &sub), &same)?;
        let pv = principal_value_with(f, Domain::Interval(l, r), pole, breakpoints, &sub);
        add(pv, &|r| QuadResult { value: pole.upper_boundary_value(r.value), ..r })?;
        lo = r;
    }
    add(integrate(f, Domain::Interval(lo, b), breakpoints, &sub), &same)?;
    match failure {
        None => Ok(total),
        Some(context) => Err(Error::NonConvergence { context, best: total }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn odd_integrand_vanishes() {
        let f = |x: f64| C64::new(1.0 / (x * (x * x + 1.0)), 0.0);
        let pole = PoleSpec::new(0.0, C64::new(1.0, 0.0)).unwrap();
        let r = principal_value(f, Domain::FullLine, pole, 1e-12).unwrap();
        assert!(r.value.norm() < 1e-11, "{r:?}");
    }

    #[test]
    fn shifted_pole() {
        // PV ∫ dx 1/((x-1)(x²+1)) = -π/2
        let f = |x: f64| C64::new(1.0 / ((x - 1.0) * (x * x + 1.0)), 0.0);
        let pole = PoleSpec::new(1.0, C64::new(0.5, 0.0)).unwrap();
        let r = principal_value(f, Domain::FullLine, pole, 1e-12).unwrap();
        assert!((r.value.re + PI / 2.0).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn finite_interval() {
        // PV ∫_{-1}^{2} dx/x = ln 2
        let f = |x: f64| C64::new(1.0 / x, 0.0);
        let pole = PoleSpec::new(0.0, C64::new(1.0, 0.0)).unwrap();
        let r = principal_value(f, Domain::Interval(-1.0, 2.0), pole, 1e-12).unwrap();
        assert!((r.value.re - 2f64.ln()).abs() < 1e-11);
        let pole_on_breakpoint = principal_value_with(
            &f,
            Domain::Interval(-1.0, 2.0),
            pole,
            &[0.0, 1.0],
            &QuadConfig::with_tol(1e-12),
        )
        .unwrap();
        assert!((pole_on_breakpoint.value.re - 2f64.ln()).abs() < 1e-11);
    }

    #[test]
    fn two_poles_on_a_finite_interval() {
        // ∫_0^3 dx [1/(x − 1 − i0) + 2/(x − 2 − i0)] = ln 2 + 2 ln(1/2) + 3iπ
        let f = |x: f64| C64::new(1.0 / (x - 1.0) + 2.0 / (x - 2.0), 0.0);
        let poles = [
            (PoleSpec::new(2.0, C64::new(2.0, 0.0)).unwrap(), 0.3),
            (PoleSpec::new(1.0, C64::new(1.0, 0.0)).unwrap(), 0.1),
        ];
        let r = upper_boundary_integral(&f, (0.0, 3.0), &poles, &[], &QuadConfig::with_tol(1e-12)).unwrap();
        let exact = C64::new(2f64.ln() - 2.0 * 2f64.ln(), 3.0 * PI);
        assert!((r.value - exact).norm() < 1e-11, "{r:?}");
        let overlapping = [(poles[0].0, 0.8), (poles[1].0, 0.5)];
        assert!(upper_boundary_integral(&f, (0.0, 3.0), &overlapping, &[], &QuadConfig::with_tol(1e-12)).is_err());
    }

    #[test]
    fn narrow_peak_next_to_the_pole_is_resolved() {
        // PV ∫_{-1}^{1} [1/(x − p) + ε/((x − c)² + ε²)] with c − p far inside the fold window
        let (p, c, eps) = (0.1, 0.1 + 1e-6, 1e-8);
        let f = |x: f64| C64::new(1.0 / (x - p) + eps / ((x - c).powi(2) + eps * eps), 0.0);
        let pole = PoleSpec::new(p, C64::new(1.0, 0.0)).unwrap();
        let breaks = [c - 1e-7, c, c + 1e-7];
        let r = principal_value_with(&f, Domain::Interval(-1.0, 1.0), pole, &breaks, &QuadConfig::with_tol(1e-9)).unwrap();
        let exact = ((1.0 - p) / (1.0 + p)).ln() + ((1.0 - c) / eps).atan() + ((1.0 + c) / eps).atan();
        assert!((r.value.re - exact).abs() < 1e-7, "{} vs {exact}", r.value.re);
    }

    #[test]
    fn pole_outside_domain_rejected() {
        let f = |x: f64| C64::new(1.0 / x, 0.0);
        let pole = PoleSpec::new(3.0, C64::new(1.0, 0.0)).unwrap();
        assert!(principal_value(f, Domain::Interval(-1.0, 2.0), pole, 1e-10).is_err());
    }

    #[test]
    fn matches_epsilon_extrapolation() {
        // ∫_0^∞ dk e^{-k²/4}/(ω0 - ω(k) + iε) as ε → 0 against PV - iπ·residue.
        let w0 = 1.1f64;
        let k0 = (w0 * w0 - 1.0).sqrt();
        let smooth = |k: f64| (-k * k / 4.0).exp();
        let f = |k: f64| C64::new(smooth(k) / (w0 - k.hypot(1.0)), 0.0);
        // near k0: ω0 - ω(k) ≈ -c0 (k - k0), so the residue density is -smooth(k0)/c0
        let c0 = k0 / w0;
        let pole = PoleSpec::new(k0, C64::new(-smooth(k0) / c0, 0.0)).unwrap();
        let pv = principal_value(f, Domain::UpperHalfLine(0.0), pole, 1e-12).unwrap();
        // 1/(ω0 + iε - ω) → PV - iπ δ(ω0 - ω): δ in k carries 1/c0
        let boundary = pv.value - C64::new(0.0, PI * smooth(k0) / c0);

        let at = |eps: f64| {
            let g = move |k: f64| smooth(k) / (C64::new(w0, eps) - k.hypot(1.0));
            let breaks: Vec<f64> = [0.05, 5e-3, 5e-4, 5e-5, 0.0]
                .iter()
                .flat_map(|h| [k0 - h, k0 + h])
                .collect();
            integrate(&g, Domain::UpperHalfLine(0.0), &breaks, &QuadConfig::with_tol(1e-11))
                .unwrap()
                .value
        };
        let (a, b, c) = (at(1e-3), at(1e-4), at(1e-5));
        // first-order Richardson on the last two, checked for consistency with the first
        let rich = c + (c - b) / 9.0;
        let rich_coarse = b + (b - a) / 9.0;
        assert!((rich - rich_coarse).norm() < 1e-5 * rich.norm());
        assert!((boundary - rich).norm() < 1e-6 * boundary.norm(), "{boundary} vs {rich}");
        assert!((pole.upper_boundary_value(pv.value) - boundary).norm() < 1e-15);
    }
}
