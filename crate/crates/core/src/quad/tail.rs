//! Oscillatory tails: half-period cycle sums with epsilon acceleration.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{gk, QuadConfig, QuadResult};
use crate::error::{Error, Result};

/// Wynn's epsilon extrapolation of a sequence of partial sums.
///
/// Returns the entry of the highest even column on the last diagonal. When
/// two neighbouring entries coincide the sequence has converged and that
/// value is returned.
pub fn wynn_epsilon(sums: &[C64]) -> C64 {
    let n = sums.len();
    if n == 0 {
        return C64::new(0.0, 0.0);
    }
    let mut prev = vec![C64::new(0.0, 0.0); n + 1];
    let mut cur = sums.to_vec();
    let mut best = sums[n - 1];
    let mut column = 0usize;
    while cur.len() >= 2 {
        let mut next = Vec::with_capacity(cur.len() - 1);
        for j in 0..cur.len() - 1 {
            let diff = cur[j + 1] - cur[j];
            let scale = cur[j + 1].norm().max(cur[j].norm());
            if diff.norm() <= 4.0 * f64::EPSILON * scale || diff.norm() < 1e-300 {
                return if column % 2 == 0 { cur[cur.len() - 1] } else { best };
            }
            next.push(prev[j + 1] + diff.inv());
        }
        column += 1;
        if column % 2 == 0 {
            best = next[next.len() - 1];
        }
        prev = cur;
        cur = next;
    }
    best
}

/// `∫_K^∞ f` for an integrand of the form `g(k)·cos(ωk + φ) + h(k)` with `h`
/// decaying fast enough that cycle sums converge on their own.
pub(crate) fn oscillatory_tail<E>(eval: &E, k: f64, omega: f64, cfg: &QuadConfig) -> Result<QuadResult>
where
    E: Fn(&[f64]) -> Vec<C64> + ?Sized,
{
    let half_period = PI / omega;
    let target = cfg.abs_tol.max(1e-300);
    let cycle_cfg = QuadConfig { abs_tol: 0.02 * target, rel_tol: 0.0, ..*cfg };
    let window = 40;

    let mut sums: Vec<C64> = Vec::new();
    let mut acc = C64::new(0.0, 0.0);
    let mut cycle_err = 0.0;
    let mut evaluations = 0;
    let mut estimates: Vec<C64> = Vec::new();
    let mut small_run = 0;

    for j in 0..cfg.max_cycles {
        let a = k + j as f64 * half_period;
        let r = gk::adaptive_batched(eval, &[(a, a + half_period)], &cycle_cfg)?;
        evaluations += r.evaluations;
        cycle_err += r.abs_error_estimate;
        acc += r.value;
        sums.push(acc);

        small_run = if r.value.norm() < 0.01 * target { small_run + 1 } else { 0 };
        if small_run >= 3 {
            return Ok(QuadResult { value: acc, abs_error_estimate: cycle_err + 3.0 * r.value.norm(), evaluations });
        }

        if sums.len() >= 5 {
            let start = sums.len().saturating_sub(window);
            let est = wynn_epsilon(&sums[start..]);
            estimates.push(est);
            let m = estimates.len();
            if m >= 4 && sums.len() >= 10 {
                let e = (est - estimates[m - 2]).norm()
                    + (est - estimates[m - 3]).norm()
                    + (est - estimates[m - 4]).norm();
                if 10.0 * e <= target.max(cfg.rel_tol * est.norm()) {
                    return Ok(QuadResult { value: est, abs_error_estimate: e + cycle_err, evaluations });
                }
            }
        }
    }
    let value = estimates.last().copied().unwrap_or(acc);
    Err(Error::NonConvergence {
        context: format!("oscillatory tail from {k} with frequency {omega}"),
        best: QuadResult { value, abs_error_estimate: f64::INFINITY, evaluations },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn epsilon_accelerates_alternating_series() {
        // 1 - 1/2 + 1/3 - ... = ln 2
        let mut s = C64::new(0.0, 0.0);
        let mut sums = Vec::new();
        for n in 1..=20 {
            s += C64::new(if n % 2 == 1 { 1.0 } else { -1.0 } / n as f64, 0.0);
            sums.push(s);
        }
        let est = wynn_epsilon(&sums);
        assert!((est.re - 2f64.ln()).abs() < 1e-12, "{est}");
        assert!((sums[19].re - 2f64.ln()).abs() > 1e-2);
    }

    #[test]
    fn epsilon_of_geometric_series_is_exact() {
        let q = C64::new(0.3, 0.4);
        let mut s = C64::new(0.0, 0.0);
        let mut p = C64::new(1.0, 0.0);
        let mut sums = Vec::new();
        for _ in 0..3 {
            s += p;
            p *= q;
            sums.push(s);
        }
        let exact = 1.0 / (1.0 - q);
        assert!((wynn_epsilon(&sums) - exact).norm() < 1e-14);
    }
}
