//! Truncated vertex correction `X_s(k, z)`, the resummed two-excitation
//! self-energy `Σ₂(z)` and the propagator `G₂(z)`.
//!
//! Everything on [`PairSystem`] works in units of `M`; the free functions
//! take physical parameters and convert.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, SymmetrySector};
use crate::quad::{integrate, upper_boundary_integral, Domain, PoleSpec, QuadConfig, QuadResult};
use crate::selfenergy::{Boundary, ComplexEnergy, U_MIN};
use crate::system::PairSystem;

/// Below this modulus of `ω0 + σ_s − ω(k)` the vertex is taken from the
/// derivative limit of its difference quotient.
pub const DENOMINATOR_FLOOR: f64 = 1e-8;

/// Step of the symmetric difference used by the derivative limit.
const DERIVATIVE_STEP: f64 = 1e-5;

/// Accuracy of `Σ₂` quadratures relative to the on-shell `|σ₂|`.
pub const SIGMA2_TOL: f64 = 1e-10;

/// Lowest energy `u = z − ω(q)` reached by the finite part of the `Σ₂`
/// integral; beyond it the dressing is dropped.
const U_FLOOR: f64 = U_MIN + 10.0;

/// Smallest principal-value window, relative to the pole momentum, that the
/// folded quadrature can resolve.
const MIN_POLE_WINDOW: f64 = 1e5 * f64::EPSILON;

/// Resonances of the `Σ₂` integrand narrower than this, relative to their
/// momentum, are integrated as poles on the real axis.
const NARROW_RESONANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexValue {
    pub x: C64,
    pub sector: SymmetrySector,
    pub k: f64,
    pub z: ComplexEnergy,
    /// Set when the denominator fell below [`DENOMINATOR_FLOOR`] and the
    /// derivative limit was used.
    pub derivative_fallback: bool,
}

/// Which dressing enters the `Σ₂` integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dressing {
    /// Vertex correction and shifted one-excitation self-energy included.
    Full,
    /// Both set to zero; the integral reduces to `Σ₂⁽²⁾`.
    Zeroed,
}

/// `√(ω² − 1)` if `ω > 1`.
pub(crate) fn momentum_at(omega: f64) -> Option<f64> {
    (omega > 1.0).then(|| ((omega - 1.0) * (omega + 1.0)).sqrt())
}

impl PairSystem {
    /// `A_s(z) = Σ_s(z − ω0 − σ_s)`, the `k`-independent half of the vertex.
    pub(crate) fn vertex_shift(&self, sector: SymmetrySector, z: C64) -> Result<C64> {
        let sigma = if z.im < 0.0 { self.sigma_s(sector).conj() } else { self.sigma_s(sector) };
        self.sigma_at(sector, z - self.reduced().omega0 - sigma)
    }

    /// `X_s` from its ingredients: `a = A_s(z)`, photon energy `w = ω(k)` and
    /// `sig_b = Σ_s(z − w)`.
    pub(crate) fn vertex_from(
        &self,
        sector: SymmetrySector,
        a: C64,
        w: f64,
        z: C64,
        sig_b: C64,
    ) -> Result<(C64, bool)> {
        let sigma = if z.im < 0.0 { self.sigma_s(sector).conj() } else { self.sigma_s(sector) };
        let den = self.reduced().omega0 + sigma - w;
        if den.norm() >= DENOMINATOR_FLOOR {
            return Ok(((a - sig_b) / den, false));
        }
        let b = z - w;
        let h = DERIVATIVE_STEP;
        let slope = (self.sigma_at(sector, b + h)? - self.sigma_at(sector, b - h)?) / (2.0 * h);
        Ok((-slope, true))
    }

    /// Truncated vertex `X_s(k, z)` in units of `M`. For `Im z < 0` the
    /// value is the conjugate of the one at `z̄`.
    pub fn vertex_x(&self, sector: SymmetrySector, k: f64, z: C64) -> Result<(C64, bool)> {
        if z.im < 0.0 {
            let (x, flag) = self.vertex_x(sector, k, z.conj())?;
            return Ok((x.conj(), flag));
        }
        let w = k.hypot(1.0);
        let a = self.vertex_shift(sector, z)?;
        let sig_b = self.sigma_at(sector, z - w)?;
        self.vertex_from(sector, a, w, z, sig_b)
    }

    /// Lower edge of the branch cut of `Σ₂` on the real axis.
    pub fn sigma2_cut_onset(&self, dressing: Dressing) -> f64 {
        match (dressing, self.dressed_pole()) {
            (Dressing::Zeroed, _) => self.reduced().omega0 + 1.0,
            (Dressing::Full, Some(p)) => 1.0 + p.pole.energy,
            (Dressing::Full, None) => 2.0,
        }
    }

    /// `Σ₂(z)` in units of `M`; real `z` is read as `z + i0`.
    pub fn sigma2_full(&self, z: C64, dressing: Dressing) -> Result<QuadResult> {
        self.sigma2_full_with(z, dressing, SIGMA2_TOL)
    }

    pub fn sigma2_full_with(&self, z: C64, dressing: Dressing, rel_tol: f64) -> Result<QuadResult> {
        self.sigma2_full_budget(z, dressing, rel_tol, 20_000)
    }

    /// As [`Self::sigma2_full_with`] with a cap on quadrature subintervals.
    pub(crate) fn sigma2_full_budget(&self, z: C64, dressing: Dressing, rel_tol: f64, max_subdivisions: usize) -> Result<QuadResult> {
        if z.im < 0.0 {
            let r = self.sigma2_full_budget(z.conj(), dressing, rel_tol, max_subdivisions)?;
            return Ok(QuadResult { value: r.value.conj(), ..r });
        }
        let red = *self.reduced();
        let w0 = red.omega0;
        let l2 = self.lambda2();
        let e = z.re;
        let a = match dressing {
            Dressing::Full => [
                self.vertex_shift(SymmetrySector::Symmetric, z)?,
                self.vertex_shift(SymmetrySector::Antisymmetric, z)?,
            ],
            Dressing::Zeroed => [C64::new(0.0, 0.0); 2],
        };

        let free = |q: f64| {
            let w = q.hypot(1.0);
            2.0 * l2 / (w * (z - w0 - w))
        };

        let q_end = momentum_at(e - U_FLOOR).unwrap_or(1.0).max(1.0);
        let mut breaks = vec![];
        let q_t = momentum_at(e - 1.0);
        breaks.extend(q_t);
        let mut resonance = |q: f64, halfwidth: f64| {
            let dq = (halfwidth + z.im) * q.hypot(1.0) / q;
            breaks.push(q);
            for m in [1.0, 10.0, 100.0] {
                if dq > 0.0 {
                    breaks.push(q - m * dq);
                    breaks.push(q + m * dq);
                }
            }
        };
        match dressing {
            Dressing::Full => {
                for sector in SymmetrySector::BOTH {
                    let sig = self.sigma_s(sector);
                    let halfwidth = -sig.im;
                    if let Some(q) = momentum_at(e - w0 - sig.re) {
                        resonance(q, halfwidth);
                    }
                    if let Some(q) = momentum_at(w0 + sig.re) {
                        resonance(q, halfwidth);
                    }
                }
            }
            Dressing::Zeroed => {
                if let Some(q) = momentum_at(e - w0) {
                    resonance(q, 0.0);
                }
            }
        }

        let mut poles = Vec::new();
        let mut merged: Vec<(f64, C64)> = Vec::new();
        let mut analytic = C64::new(0.0, 0.0);
        if z.im == 0.0 {
            match dressing {
                Dressing::Full => {
                    // (location, residue density, interval the window must stay in)
                    let mut found: Vec<(f64, C64, (f64, f64))> = Vec::new();
                    if let Some(dp) = self.dressed_pole() {
                        if let Some(qp) = momentum_at(e - dp.pole.energy).filter(|&qp| qp < q_end) {
                            let wp = qp.hypot(1.0);
                            let sector = SymmetrySector::Symmetric;
                            let sig_b = self.sigma_real(sector, dp.pole.energy)?;
                            let (x, _) = self.vertex_from(sector, a[0], wp, z, sig_b)?;
                            let weight = l2 / wp * (1.0 + (qp * red.d).cos());
                            let c = weight * (1.0 + x) / (dp.slope * (-qp / wp));
                            found.push((qp, c, (q_t.unwrap_or(0.0), q_end)));
                        }
                    }
                    for (i, sector) in SymmetrySector::BOTH.into_iter().enumerate() {
                        if let Some((qr, c)) = self.narrow_resonance(z, sector, a[i], q_end)? {
                            found.push((qr, c, (0.0, q_t.unwrap_or(q_end))));
                        }
                    }
                    found.sort_by(|x, y| x.0.total_cmp(&y.0));
                    for (j, &(q, c, (lo, hi))) in found.iter().enumerate() {
                        let mut room = (q - lo).min(hi - q);
                        if j > 0 {
                            room = room.min(q - found[j - 1].0);
                        }
                        if j + 1 < found.len() {
                            room = room.min(found[j + 1].0 - q);
                        }
                        let win = 0.5 * room.min(1.0);
                        if win >= MIN_POLE_WINDOW * q {
                            poles.push((PoleSpec::new(q, c)?, win));
                            breaks.push(q);
                        } else {
                            // too close to a threshold to fold: subtract the pole and
                            // add its integral over [0, q_end] in closed form
                            merged.push((q, c));
                            analytic += c * C64::new(((q_end - q) / q).ln(), PI);
                        }
                    }
                }
                Dressing::Zeroed => {
                    if let Some(q0) = momentum_at(e - w0).filter(|&q0| q0 < q_end) {
                        let w = q0.hypot(1.0);
                        let c = 2.0 * l2 / w / (-q0 / w);
                        let win = 0.5 * q0.min(q_end - q0).min(1.0);
                        poles.push((PoleSpec::new(q0, C64::new(c, 0.0))?, win));
                    }
                }
            }
        }

        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let integrand = |q: f64| -> C64 {
            // a node exactly on a subtracted pole moves by one ulp
            let q = if merged.iter().any(|&(qp, _)| q == qp) { q.next_up() } else { q };
            match self.sigma2_integrand(z, q, dressing, &a) {
                Ok(v) => merged.iter().fold(v, |acc, &(qp, c)| acc - c / (q - qp)),
                Err(err) => {
                    failure.borrow_mut().get_or_insert(err);
                    C64::new(f64::NAN, f64::NAN)
                }
            }
        };
        let cfg = QuadConfig::with_tol(rel_tol * self.sigma2().norm()).subdivisions(max_subdivisions);
        let finite = upper_boundary_integral(&integrand, (0.0, q_end), &poles, &breaks, &cfg);
        if let Some(err) = failure.borrow_mut().take() {
            return Err(err);
        }
        let tail = integrate(&free, Domain::UpperHalfLine(q_end), &[], &cfg);
        let mut total = QuadResult::zero();
        let mut failure = None;
        for part in [finite, tail] {
            match part {
                Ok(r) => total = total + r,
                Err(Error::NonConvergence { context, best }) => {
                    failure.get_or_insert(context);
                    total = total + best;
                }
                Err(err) => return Err(err),
            }
        }
        total.value += analytic;
        if dressing == Dressing::Full {
            // the dressing decays like q⁻³ beyond the finite part
            let at_end = self.sigma2_integrand(z, q_end, dressing, &a)? - free(q_end);
            total.abs_error_estimate += at_end.norm() * q_end / 2.0;
        }
        let total = total.scale(C64::new(2.0, 0.0));
        match failure {
            None => Ok(total),
            Some(context) => Err(Error::NonConvergence { context, best: total }),
        }
    }

    /// Resonance of one sector of the `Σ₂` integrand at real `z` whose width
    /// in `q` is too small to resolve by bisection, as `(q_r, residue density)`
    /// of `c/(q − q_r − i0)`.
    fn narrow_resonance(&self, z: C64, sector: SymmetrySector, a: C64, q_end: f64) -> Result<Option<(f64, C64)>> {
        let red = self.reduced();
        let (e, w0) = (z.re, red.omega0);
        let sig = self.sigma_s(sector);
        let Some(mut q) = momentum_at(e - w0 - sig.re) else {
            return Ok(None);
        };
        if -sig.im * q.hypot(1.0) >= NARROW_RESONANCE * q * q {
            return Ok(None);
        }
        // Newton on Re(b − ω0 − Σ_s(b)), b = e − ω(q)
        let h = DERIVATIVE_STEP;
        let mut slope = 0.0;
        for _ in 0..8 {
            let w = q.hypot(1.0);
            let b = e - w;
            let den = b - w0 - self.sigma_real(sector, b)?.re;
            let ds = (self.sigma_real(sector, b + h)?.re - self.sigma_real(sector, b - h)?.re) / (2.0 * h);
            slope = -(q / w) * (1.0 - ds);
            let step = den / slope;
            q -= step;
            if !(q > 0.0) {
                return Ok(None);
            }
            if step.abs() <= 4.0 * f64::EPSILON * q {
                break;
            }
        }
        if q >= q_end {
            return Ok(None);
        }
        let w = q.hypot(1.0);
        let sig_b = self.sigma_real(sector, e - w)?;
        let (x, _) = self.vertex_from(sector, a, w, z, sig_b)?;
        let weight = self.lambda2() / w * (1.0 + sector.sign() * (q * red.d).cos());
        Ok(Some((q, weight * (1.0 + x) / slope)))
    }

    /// Both sectors of the `Σ₂` integrand at momentum `q ≥ 0`.
    fn sigma2_integrand(&self, z: C64, q: f64, dressing: Dressing, a: &[C64; 2]) -> Result<C64> {
        let red = self.reduced();
        let w = q.hypot(1.0);
        let g2 = self.lambda2() / w;
        let mut acc = C64::new(0.0, 0.0);
        for (i, sector) in SymmetrySector::BOTH.into_iter().enumerate() {
            let weight = g2 * (1.0 + sector.sign() * (q * red.d).cos());
            let b = z - w;
            acc += match dressing {
                Dressing::Zeroed => weight / (b - red.omega0),
                Dressing::Full => {
                    let sig_b = self.sigma_at(sector, b)?;
                    let (x, _) = self.vertex_from(sector, a[i], w, z, sig_b)?;
                    weight * (1.0 + x) / (b - red.omega0 - sig_b)
                }
            };
        }
        Ok(acc)
    }

    /// `G₂(z) = 1/(z − 2ω0 − Σ₂(z))` in units of `1/M`.
    pub fn propagator_g2(&self, z: C64) -> Result<C64> {
        let s2 = self.sigma2_full(z, Dressing::Full)?.value;
        Ok(1.0 / (z - 2.0 * self.reduced().omega0 - s2))
    }

    /// Rejects real arguments on the cut unless they carry the `+i0`
    /// prescription, and returns `z` in units of `M`.
    pub(crate) fn reduce_energy(&self, z: ComplexEnergy, onset: f64) -> Result<C64> {
        let zr = z.value / self.params().m;
        if z.boundary == Boundary::Plain && zr.im == 0.0 && zr.re >= onset {
            return Err(Error::Domain(format!(
                "{} lies on the branch cut starting at {}; use the +i0 boundary value",
                z.value.re,
                onset * self.params().m
            )));
        }
        Ok(zr)
    }
}

/// `X_s(k, z)` for physical parameters.
pub fn vertex_x(params: &ModelParams, sector: SymmetrySector, k: f64, z: ComplexEnergy) -> Result<VertexValue> {
    let sys = PairSystem::new(params)?;
    let zr = sys.reduce_energy(z, 1.0)?;
    let (x, derivative_fallback) = sys.vertex_x(sector, k / params.m, zr)?;
    Ok(VertexValue { x, sector, k, z, derivative_fallback })
}

/// `Σ₂(z)` for physical parameters.
pub fn sigma2_full(params: &ModelParams, z: ComplexEnergy, dressing: Dressing) -> Result<C64> {
    let sys = PairSystem::new(params)?;
    let zr = sys.reduce_energy(z, sys.sigma2_cut_onset(dressing))?;
    Ok(sys.sigma2_full(zr, dressing)?.value * params.m)
}

/// `G₂(z)` for physical parameters.
pub fn propagator_g2(params: &ModelParams, z: ComplexEnergy) -> Result<C64> {
    let sys = PairSystem::new(params)?;
    let zr = sys.reduce_energy(z, sys.sigma2_cut_onset(Dressing::Full))?;
    Ok(sys.propagator_g2(zr)? / params.m)
}
