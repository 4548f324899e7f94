//! Self-energy integrals in reduced form: `M = 1`, `λ = 1`.
//!
//! `S_s(z; d) = ∫dk (1 + s cos kd) / (ω(k)(z − ω(k)))`, so that
//! `Σ_s(z) = λ² S_s(z)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quad::{integrate, Domain, QuadConfig, QuadResult};

/// Upper bound on breakpoints placed at half periods of `cos(kd)`.
const MAX_PERIOD_BREAKS: usize = 400;

/// Distance beyond the resonant momentum where the finite part ends and the
/// tail treatment takes over.
const TAIL_OFFSET: f64 = 10.0;

/// `√(z² − 1)` on the branch with non-negative imaginary part for
/// `Im z ≥ 0`. Real arguments are taken from above (`+i0`).
pub(crate) fn on_shell_root(z: C64) -> C64 {
    let z = if z.im == 0.0 { C64::new(z.re, 0.0) } else { z };
    let q2 = (z - 1.0) * (z + 1.0);
    let q2 = if q2.im == 0.0 { C64::new(q2.re, 0.0) } else { q2 };
    let p = q2.sqrt();
    if z.re < 0.0 {
        // keep the branch continuous from the upper half plane
        -p
    } else {
        p
    }
}

/// Reduced self-energy by direct quadrature. Real `z` is read as `z + i0`;
/// `Im z < 0` is obtained by Schwarz reflection of the first-sheet function.
pub(crate) fn sigma_unit(z: C64, s: f64, d: f64, tol: f64) -> Result<QuadResult> {
    if z.im < 0.0 {
        let r = sigma_unit(z.conj(), s, d, tol)?;
        return Ok(QuadResult { value: r.value.conj(), ..r });
    }
    let z = C64::new(z.re, z.im.abs());
    if (z - 1.0).norm() == 0.0 {
        return Err(Error::BranchPoint(1.0));
    }
    let oscillating = d > 0.0 && s != 0.0;
    let cfg = QuadConfig::with_tol(tol).rel(tol).subdivisions(20_000);

    let pole = if z.re > 0.0 {
        let p = on_shell_root(z);
        (p.im * d.max(1.0) <= 2.0).then_some(p)
    } else {
        None
    };

    let k_end = pole.map_or(0.0, |p| p.re.max(0.0)) + TAIL_OFFSET;
    let mut breaks = Vec::new();
    if let Some(p) = pole {
        if p.re > 0.0 {
            breaks.push(p.re);
            let w = p.im.abs().max(1e-300);
            for m in [1.0, 10.0, 100.0] {
                breaks.push(p.re - m * w);
                breaks.push(p.re + m * w);
            }
        }
        if p.re.abs() < 0.5 && p.im.abs() > 0.0 {
            // peak of width |p| at the origin just below threshold
            let w = p.norm();
            breaks.extend([w, 4.0 * w, 16.0 * w]);
        }
    }
    if oscillating {
        let half = PI / d;
        let n = ((k_end / half) as usize).min(MAX_PERIOD_BREAKS);
        let step = k_end / n.max(1) as f64;
        breaks.extend((1..n).map(|j| j as f64 * step));
    }

    let weight = move |k: f64| 1.0 + s * (k * d).cos();
    let core = match pole {
        Some(p) => {
            // (h − P)(k) rewritten without cancellation:
            // (1 + s cos kd)/(ω(z + ω)) + s d² sinc((k + p)d/2) sinc((k − p)d/2)
            let cp = 1.0 + s * (p * d).cos();
            let f = move |k: f64| {
                let w = k.hypot(1.0);
                let smooth = weight(k) / (w * (z + w));
                if s == 0.0 || d == 0.0 {
                    smooth
                } else {
                    smooth + s * d * d * sinc((k + p) * (0.5 * d)) * sinc((k - p) * (0.5 * d))
                }
            };
            let r = integrate(&f, Domain::Interval(0.0, k_end), &breaks, &cfg)?;
            let lp = (p + k_end).ln() - (p - k_end).ln();
            QuadResult { value: r.value + cp / p * lp, ..r }
        }
        None => {
            let f = move |k: f64| {
                let w = k.hypot(1.0);
                weight(k) / (w * (z - w))
            };
            integrate(&f, Domain::Interval(0.0, k_end), &breaks, &cfg)?
        }
    };

    let smooth_weight = if oscillating { 1.0 } else { 1.0 + s };
    let smooth = move |k: f64| {
        let w = k.hypot(1.0);
        smooth_weight / (w * (z - w))
    };
    let mut total = core + integrate(&smooth, Domain::UpperHalfLine(k_end), &[], &cfg)?;
    if oscillating {
        let osc = move |k: f64| {
            let w = k.hypot(1.0);
            s * (k * d).cos() / (w * (z - w))
        };
        total = total + integrate(&osc, Domain::UpperHalfLine(k_end), &[], &cfg.oscillating(d))?;
    }
    let mut total = total.scale(C64::new(2.0, 0.0));
    if z.im == 0.0 && z.re < 1.0 {
        total.value.im = 0.0;
    }
    Ok(total)
}

fn sinc(x: C64) -> C64 {
    if x.norm() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Closed form of the reduced self-energy with the `O(e^{−d})` correction
/// dropped. Valid for `Re z > 0`.
pub(crate) fn sigma_unit_analytic(z: C64, s: f64, d: f64) -> Result<C64> {
    if z.re <= 0.0 {
        return Err(Error::Domain(format!("closed form requires Re z > 0, got {z}")));
    }
    if z.im < 0.0 {
        return sigma_unit_analytic(z.conj(), s, d).map(|v| v.conj());
    }
    if (z - 1.0).norm() == 0.0 {
        return Err(Error::BranchPoint(1.0));
    }
    let p = on_shell_root(z);
    let i = C64::i();
    let log = (z + p).ln();
    let phase = (i * p * d).exp();
    Ok(2.0 / p * (log - i * PI * (1.0 + s * phase)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lorentz_simpson(z: C64, s: f64, d: f64, l: f64, n: usize) -> C64 {
        let f = |k: f64| {
            let w = k.hypot(1.0);
            (1.0 + s * (k * d).cos()) / (w * (z - w))
        };
        let h = 2.0 * l / n as f64;
        let mut acc = f(-l) + f(l);
        for j in 1..n {
            acc += f(-l + j as f64 * h) * if j % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * (h / 3.0)
    }

    #[test]
    fn exact_imaginary_part_above_threshold() {
        for &(x, s, d) in &[(1.1, 1.0, 3.42), (1.3, -1.0, 2.0), (2.7, 1.0, 0.0), (1.02, -1.0, 7.0)] {
            let k = ((x - 1.0f64) * (x + 1.0)).sqrt();
            let r = sigma_unit(C64::new(x, 0.0), s, d, 1e-12).unwrap();
            let exact = -2.0 * PI * (1.0 + s * (k * d).cos()) / k;
            assert!((r.value.im - exact).abs() <= 1e-12 * exact.abs().max(1.0), "{x} {s} {d}: {}", r.value);
        }
    }

    #[test]
    fn real_below_threshold() {
        for &x in &[-3.0, -0.2, 0.0, 0.4, 0.9, 0.999] {
            let r = sigma_unit(C64::new(x, 0.0), 1.0, 2.0, 1e-12).unwrap();
            assert_eq!(r.value.im, 0.0);
            assert!(r.value.re < 0.0);
        }
    }

    #[test]
    fn complex_argument_against_truncated_simpson() {
        // Simpson over [-L, L] plus the exact tail of the d = 0 integrand
        let z = C64::new(2.0, 0.5);
        let l = 400.0;
        let brute = lorentz_simpson(z, 1.0, 0.0, l, 2_000_000);
        // ∫_{|k|>L} 2/(ω(z-ω)) ≈ -4/L to O(L^{-2})
        let tail = C64::new(-4.0 / l, 0.0) + C64::new(-4.0, 0.0) * z / (2.0 * l * l);
        let r = sigma_unit(z, 1.0, 0.0, 1e-12).unwrap();
        assert!((r.value - brute - tail).norm() < 1e-7, "{} vs {}", r.value, brute + tail);
    }

    #[test]
    fn coincident_atoms_double_the_single_atom_integral() {
        // ∫dk 1/(ω(z − ω)) = (2/p)(log(z + p) − iπ) exactly; at d = 0 the
        // symmetric weight is 2 and the antisymmetric one vanishes.
        let z = C64::new(1.4, 0.3);
        let p = on_shell_root(z);
        let exact = 4.0 / p * ((z + p).ln() - C64::new(0.0, PI));
        let num = sigma_unit(z, 1.0, 0.0, 1e-12).unwrap().value;
        let zero = sigma_unit(z, -1.0, 0.0, 1e-12).unwrap().value;
        assert!(zero.norm() < 1e-12);
        assert!((num - exact).norm() < 1e-10 * exact.norm(), "{num} vs {exact}");
    }

    #[test]
    fn closed_form_at_large_distance() {
        let z = C64::new(1.05, 0.1);
        let d = 12.0;
        for s in [1.0, -1.0] {
            let num = sigma_unit(z, s, d, 1e-12).unwrap().value;
            let an = sigma_unit_analytic(z, s, d).unwrap();
            assert!((num - an).norm() < 1e-4, "{num} vs {an}");
        }
    }

    #[test]
    fn reflection() {
        let z = C64::new(0.7, 0.2);
        let a = sigma_unit(z, 1.0, 1.5, 1e-12).unwrap().value;
        let b = sigma_unit(z.conj(), 1.0, 1.5, 1e-12).unwrap().value;
        assert!((a.conj() - b).norm() < 1e-15);
    }
}
