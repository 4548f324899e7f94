//! Lazily filled Chebyshev tables of the reduced self-energy on the real
//! axis (`u + i0`), keyed by the reduced distance.
//!
//! Three regions are covered:
//! * above threshold, in the momentum `k = √(u² − 1) ∈ (0, K_MAX]`, storing
//!   `k·S(u)` which stays finite at threshold;
//! * just below threshold, `u ∈ [1/2, 1)`, in `κ = √(1 − u²)`, storing
//!   `κ·S(u)`;
//! * further below, `u ∈ [U_MIN, 1/2)`, storing `S(u)` directly.
//!
//! Arguments outside these ranges fall back to direct quadrature.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;

use super::numeric::sigma_unit;
use crate::error::{Error, Result};
use crate::quad::Chebyshev;

pub(crate) const K_MAX: f64 = 40.0;
pub(crate) const U_MIN: f64 = -40.0;
const KAPPA_MAX: f64 = 0.866_025_403_784_438_6;
const DEGREE: usize = 24;
const MAX_DEPTH: usize = 8;

#[derive(Debug)]
struct Region {
    lo: f64,
    width: f64,
    pieces: Vec<OnceLock<Vec<Chebyshev>>>,
}

impl Region {
    fn new(lo: f64, hi: f64, max_width: f64) -> Self {
        let n = ((hi - lo) / max_width).ceil().max(1.0) as usize;
        Self { lo, width: (hi - lo) / n as f64, pieces: (0..n).map(|_| OnceLock::new()).collect() }
    }

    fn eval<F>(&self, x: f64, build: F) -> C64
    where
        F: Fn(f64) -> C64,
    {
        let idx = (((x - self.lo) / self.width) as usize).min(self.pieces.len() - 1);
        let parts = self.pieces[idx].get_or_init(|| {
            let a = self.lo + idx as f64 * self.width;
            let mut out = Vec::new();
            fit_adaptive(&build, a, a + self.width, 0, &mut out);
            out
        });
        let i = parts.partition_point(|c| c.interval().1 < x).min(parts.len() - 1);
        parts[i].eval(x)
    }
}

fn fit_adaptive<F>(f: &F, a: f64, b: f64, depth: usize, out: &mut Vec<Chebyshev>)
where
    F: Fn(f64) -> C64,
{
    let c = Chebyshev::fit(f, a, b, DEGREE + 1);
    let scale = c.eval(0.5 * (a + b)).norm().max(1e-3);
    if c.tail_magnitude() <= 1e-11 * scale || depth >= MAX_DEPTH {
        if depth >= MAX_DEPTH {
            log::warn!("self-energy table piece [{a}, {b}] did not reach interpolation tolerance");
        }
        out.push(c);
        return;
    }
    let m = 0.5 * (a + b);
    fit_adaptive(f, a, m, depth + 1, out);
    fit_adaptive(f, m, b, depth + 1, out);
}

#[derive(Debug)]
struct SectorTable {
    s: f64,
    above: Region,
    near: Region,
    below: Region,
}

/// Reduced self-energies `S_±(u + i0)` for one distance.
#[derive(Debug)]
pub struct SelfEnergyTable {
    d: f64,
    tol: f64,
    sectors: [SectorTable; 2],
}

impl SelfEnergyTable {
    /// `d` is the distance in units of `1/M`; `tol` the accuracy of the
    /// underlying quadratures.
    pub fn new(d: f64, tol: f64) -> Self {
        let oscillation_width = if d > 0.0 { 1.5 / d } else { f64::INFINITY };
        let sector = |s: f64| SectorTable {
            s,
            above: Region::new(0.0, K_MAX, oscillation_width.min(0.25)),
            near: Region::new(0.0, KAPPA_MAX, oscillation_width.min(0.2)),
            below: Region::new(U_MIN, 0.5, oscillation_width.min(0.5)),
        };
        Self { d, tol, sectors: [sector(1.0), sector(-1.0)] }
    }

    pub fn distance(&self) -> f64 {
        self.d
    }

    fn direct(&self, s: f64, u: f64) -> C64 {
        match sigma_unit(C64::new(u, 0.0), s, self.d, self.tol) {
            Ok(r) => r.value,
            Err(e) => {
                log::warn!("self-energy quadrature at u = {u}: {e}");
                e.best_estimate().map_or(C64::new(f64::NAN, f64::NAN), |b| b.value)
            }
        }
    }

    /// `S_s(u + i0)` for real `u`, `sector` index 0 for `s = +1`, 1 for `s = −1`.
    pub fn eval(&self, sector: usize, u: f64) -> Result<C64> {
        let t = &self.sectors[sector];
        let s = t.s;
        if u > 1.0 {
            let k = ((u - 1.0) * (u + 1.0)).sqrt();
            if k > K_MAX {
                return Ok(self.direct(s, u));
            }
            let v = t.above.eval(k, |k| k * self.direct(s, k.hypot(1.0)));
            Ok(v / k)
        } else if u < 1.0 {
            if u >= 0.5 {
                let kappa = ((1.0 - u) * (1.0 + u)).sqrt();
                let v = t.near.eval(kappa, |kp| kp * self.direct(s, ((1.0 - kp) * (1.0 + kp)).sqrt()));
                Ok(C64::new(v.re / kappa, 0.0))
            } else if u >= U_MIN {
                let v = t.below.eval(u, |x| self.direct(s, x));
                Ok(C64::new(v.re, 0.0))
            } else {
                Ok(self.direct(s, u))
            }
        } else {
            Err(Error::BranchPoint(u))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_direct_quadrature() {
        let d = 3.4;
        let table = SelfEnergyTable::new(d, 1e-12);
        for (i, s) in [1.0, -1.0].into_iter().enumerate() {
            for &u in &[-55.0, -7.3, 0.1, 0.49, 0.5, 0.77, 0.999_99, 1.000_01, 1.1, 1.7, 12.0, 45.0] {
                let t = table.eval(i, u).unwrap();
                let direct = sigma_unit(C64::new(u, 0.0), s, d, 1e-12).unwrap().value;
                assert!((t - direct).norm() <= 1e-9 * direct.norm().max(1.0), "s={s} u={u}: {t} vs {direct}");
            }
        }
        assert!(table.eval(0, 1.0).is_err());
    }
}
