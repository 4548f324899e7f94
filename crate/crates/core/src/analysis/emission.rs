//! Parallel and antiparallel emission probabilities.
//!
//! Both photons of a quadrant are integrated in the coordinates
//! `E = ω1 + ω2`, `y = (ω1 − ω2)/2`, with `dk1 dk2 = ω1ω2/(k1k2) dE dy`. For
//! fixed `E` every point shares the factors of [`EnergySlice`], so `Σ₂` is
//! evaluated once per outer node. Exchange symmetry folds `y < 0` onto
//! `y > 0`, and `y = Y(1 − (1 − τ)²)`, `Y = E/2 − M`, removes the `1/k2`
//! endpoint singularity.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::amplitude::EnergySlice;
use crate::error::{Error, Result};
use crate::model::{ModelParams, SymmetrySector};
use crate::par::Parallelism;
use crate::quad::{integrate, integrate_batched, Domain, QuadConfig, QuadResult};
use crate::system::PairSystem;

use super::closed_form_probabilities;

/// Multiples of a resonance half-width at which breakpoints are placed.
const WIDTH_MULTIPLES: [f64; 5] = [0.25, 1.0, 4.0, 16.0, 64.0];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmissionOptions {
    /// Absolute accuracy goal for each probability.
    pub tol: f64,
    /// Upper limit of the pair energy above `2ω0`, in units of `M`.
    pub energy_span: f64,
    /// Allowed deviation of `P⇔ + P⇌` from one before the report is flagged.
    pub norm_tolerance: f64,
    pub parallelism: Parallelism,
}

impl Default for EmissionOptions {
    fn default() -> Self {
        Self { tol: 1e-6, energy_span: 20.0, norm_tolerance: 0.02, parallelism: Parallelism::default() }
    }
}

impl EmissionOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn sequential(mut self) -> Self {
        self.parallelism = Parallelism::Sequential;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || !(self.energy_span > 0.0) || !(self.norm_tolerance > 0.0) {
            return Err(Error::InvalidParameter(format!("emission options must be positive: {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmissionReport {
    pub params: ModelParams,
    pub p_parallel: f64,
    pub p_antiparallel: f64,
    pub ratio: f64,
    /// `R·(δP⇔/P⇔ + δP⇌/P⇌)`.
    pub ratio_error: f64,
    pub norm: f64,
    /// Quadrature error estimate shared by both probabilities.
    pub quad_error: f64,
    /// Estimated probability beyond the upper energy limit (not included).
    pub tail_estimate: f64,
    pub closed_form_ratio: f64,
    pub flagged: bool,
    pub flags: Vec<String>,
    pub energy_nodes: usize,
}

/// Which half of the `y` range a density sample comes from. The production
/// path uses only [`Half::Upper`]; the lower half exists to check the fold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) enum Half {
    Upper,
    Lower,
}

/// Collects hard errors and soft quadrature failures from worker closures.
#[derive(Default)]
struct Issues {
    error: Mutex<Option<Error>>,
    inexact: AtomicBool,
}

impl Issues {
    fn record(&self, e: Error) {
        if let Ok(mut slot) = self.error.lock() {
            slot.get_or_insert(e);
        }
    }

    fn take(&self) -> Option<Error> {
        self.error.lock().ok().and_then(|mut slot| slot.take())
    }
}

impl PairSystem {
    /// Jacobian-weighted `(P(k1, k2), P(k1, −k2))` at pair energy `e` and
    /// fold coordinate `tau`, packed as real and imaginary parts.
    pub(crate) fn pair_density(&self, slice: &EnergySlice, e: f64, tau: f64, half: Half) -> Result<C64> {
        let yy = 0.5 * e - 1.0;
        let r = 1.0 - tau;
        // the photon whose energy approaches M as τ → 1
        let w_soft = 1.0 + yy * r * r;
        let w_hard = 1.0 + yy * (2.0 - r * r);
        let k_soft = r * (yy * (w_soft + 1.0)).sqrt();
        let k_hard = ((w_hard - 1.0) * (w_hard + 1.0)).sqrt();
        if k_hard == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let jac = 2.0 * w_soft * w_hard * yy.sqrt() / (k_hard * (w_soft + 1.0).sqrt());
        let ((k1, w1), (k2, w2)) = match half {
            Half::Upper => ((k_hard, w_hard), (k_soft, w_soft)),
            Half::Lower => ((k_soft, w_soft), (k_hard, w_hard)),
        };
        let par = self.amplitude_on_shell(slice, (k1, w1), (k2, w2))?.norm_sqr();
        let anti = self.amplitude_on_shell(slice, (k1, w1), (-k2, w2))?.norm_sqr();
        Ok(C64::new(jac * par, jac * anti))
    }

    /// Half-widths of the single-excitation resonances used for breakpoints.
    fn resonance_halfwidths(&self) -> [f64; 2] {
        let floor = 5e-4 * self.on_shell().gamma_atom;
        SymmetrySector::BOTH.map(|s| (-self.sigma_s(s).im).max(floor))
    }

    /// `τ` breakpoints for `y ∈ [0, Y]` at the resonances `ω_j ≈ ω0 + δ_s`.
    fn fold_breakpoints(&self, e: f64) -> Vec<f64> {
        let yy = 0.5 * e - 1.0;
        let widths = self.resonance_halfwidths();
        let mut ys = Vec::new();
        for (i, sector) in SymmetrySector::BOTH.into_iter().enumerate() {
            let centre = (0.5 * e - self.reduced().omega0 - self.sigma_s(sector).re).abs();
            ys.push(centre);
            for m in WIDTH_MULTIPLES {
                ys.push(centre - m * widths[i]);
                ys.push(centre + m * widths[i]);
            }
        }
        ys.into_iter()
            .filter(|&y| y > 0.0 && y < yy)
            .map(|y| 1.0 - (1.0 - y / yy).sqrt())
            .collect()
    }

    /// `2∫dy J (P⇔, P⇌)` over `y ∈ [y_lo, y_hi] ⊂ [0, Y]` at pair energy `e`,
    /// or over the whole range when `window` is `None`.
    pub(crate) fn energy_density(
        &self,
        slice: &EnergySlice,
        e: f64,
        window: Option<(f64, f64)>,
        half: Half,
        cfg: &QuadConfig,
    ) -> Result<QuadResult> {
        let yy = 0.5 * e - 1.0;
        if yy <= 0.0 {
            return Ok(QuadResult::zero());
        }
        let to_tau = |y: f64| 1.0 - (1.0 - (y / yy).clamp(0.0, 1.0)).sqrt();
        let (t_lo, t_hi) = match window {
            Some((lo, hi)) => (to_tau(lo.max(0.0)), to_tau(hi.min(yy))),
            None => (0.0, 1.0),
        };
        if t_hi <= t_lo {
            return Ok(QuadResult::zero());
        }
        let failure: Mutex<Option<Error>> = Mutex::new(None);
        let f = |tau: f64| match self.pair_density(slice, e, tau, half) {
            Ok(v) => v,
            Err(err) => {
                if let Ok(mut slot) = failure.lock() {
                    slot.get_or_insert(err);
                }
                C64::new(f64::NAN, f64::NAN)
            }
        };
        let breaks = self.fold_breakpoints(e);
        let r = integrate(&f, Domain::Interval(t_lo, t_hi), &breaks, cfg);
        if let Some(err) = failure.lock().ok().and_then(|mut s| s.take()) {
            return Err(err);
        }
        Ok(r?.scale(C64::new(2.0, 0.0)))
    }

    /// Centre and half-width of the pair-energy resonance, `2ω0 + Re σ₂` and
    /// `|Im σ₂|`.
    fn pair_resonance(&self) -> (f64, f64) {
        let s2 = self.sigma2();
        (2.0 * self.reduced().omega0 + s2.re, -s2.im)
    }

    fn energy_breakpoints(&self, e_hi: f64) -> Vec<f64> {
        let (ec, h) = self.pair_resonance();
        let w0 = self.reduced().omega0;
        let mut es = vec![ec, w0 + 1.0];
        for m in WIDTH_MULTIPLES.into_iter().chain([256.0, 1024.0]) {
            es.push(ec - m * h);
            es.push(ec + m * h);
        }
        let widths = self.resonance_halfwidths();
        for (i, sector) in SymmetrySector::BOTH.into_iter().enumerate() {
            let c = 2.0 * (w0 + self.sigma_s(sector).re);
            es.push(c);
            // photon at rest next to a dressed atom: Σ₂ has a square-root edge
            es.push(w0 + 1.0 + self.sigma_s(sector).re);
            for m in [1.0, 4.0, 16.0] {
                es.push(c - 2.0 * m * widths[i]);
                es.push(c + 2.0 * m * widths[i]);
            }
        }
        es.retain(|&e| e > 2.0 && e < e_hi);
        es
    }

    /// Integrates `(P⇔, P⇌)` over pair energies in `[e_lo, e_hi]`, restricting
    /// each `y` integral to `window(e)` when given. Returns the result, the
    /// number of outer nodes and whether any inner quadrature fell short.
    fn integrate_energies<W>(&self, (e_lo, e_hi): (f64, f64), window: W, opts: &EmissionOptions) -> Result<(QuadResult, usize, bool)>
    where
        W: Fn(f64) -> Option<Option<(f64, f64)>> + Sync,
    {
        let (ec, h) = self.pair_resonance();
        let phi = |e: f64| ((e - ec) / h).atan();
        let (p_lo, p_hi) = (phi(e_lo), phi(e_hi));
        let breaks: Vec<f64> = self.energy_breakpoints(e_hi).into_iter().filter(|&e| e > e_lo).map(phi).collect();

        let issues = Issues::default();
        let nodes = std::sync::atomic::AtomicUsize::new(0);
        let span = p_hi - p_lo;
        let node_value = |p: &f64| -> C64 {
            let t = p.tan();
            let e = ec + h * t;
            let jac = h * (1.0 + t * t);
            let Some(win) = window(e) else {
                return C64::new(0.0, 0.0);
            };
            nodes.fetch_add(1, Ordering::Relaxed);
            let inner_cfg = QuadConfig::with_tol(0.1 * opts.tol / (jac * span)).rel(0.1 * opts.tol).subdivisions(2000);
            let slice = match self.energy_slice(C64::new(e, 0.0)) {
                Ok(s) => s,
                Err(err) => {
                    log::debug!("energy slice at E = {e}: {err}");
                    issues.record(err);
                    return C64::new(f64::NAN, f64::NAN);
                }
            };
            match self.energy_density(&slice, e, win, Half::Upper, &inner_cfg) {
                Ok(r) => r.value * jac,
                Err(err) => match err.best_estimate() {
                    Some(best) => {
                        log::warn!("inner quadrature at E = {e}: {err}");
                        issues.inexact.store(true, Ordering::Relaxed);
                        best.value * jac
                    }
                    None => {
                        issues.record(err);
                        C64::new(f64::NAN, f64::NAN)
                    }
                },
            }
        };
        let eval = |ps: &[f64]| opts.parallelism.map(ps, node_value);
        let cfg = QuadConfig::with_tol(opts.tol).batched(16).subdivisions(4000);
        let outer = integrate_batched(&eval, Domain::Interval(p_lo, p_hi), &breaks, &cfg);
        if let Some(err) = issues.take() {
            return Err(err);
        }
        let mut inexact = issues.inexact.load(Ordering::Relaxed);
        let outer = match outer {
            Ok(r) => r,
            Err(err) => match err.best_estimate() {
                Some(best) => {
                    log::warn!("energy quadrature: {err}");
                    inexact = true;
                    best
                }
                None => return Err(err),
            },
        };
        Ok((outer, nodes.into_inner(), inexact))
    }

    /// Parallel and antiparallel emission probabilities.
    pub fn emission(&self, opts: &EmissionOptions) -> Result<EmissionReport> {
        opts.validate()?;
        let (ec, _) = self.pair_resonance();
        let e_max = 2.0 * self.reduced().omega0 + opts.energy_span;
        let (r, nodes, inexact) = self.integrate_energies((2.0, e_max), |_| Some(None), opts)?;

        // the density per unit pair energy falls off like (E − E_c)⁻² or faster
        let slice = self.energy_slice(C64::new(e_max, 0.0))?;
        let cfg = QuadConfig::with_tol(opts.tol).rel(1e-3);
        let at_end = self.energy_density(&slice, e_max, None, Half::Upper, &cfg)?;
        let tail_estimate = at_end.value.norm() * (e_max - ec);

        let (p_par, p_anti) = (r.value.re, r.value.im);
        let quad_error = r.abs_error_estimate;
        let norm = p_par + p_anti;
        let mut flags = Vec::new();
        if inexact {
            flags.push("quadrature did not reach the requested accuracy".to_string());
        }
        if (norm - 1.0).abs() > opts.norm_tolerance {
            flags.push(format!("norm {norm:.6} outside 1 ± {}", opts.norm_tolerance));
        }
        let ratio = p_par / p_anti;
        let ratio_error = ratio * (quad_error / p_par.abs() + quad_error / p_anti.abs());
        let k0d = self.params().k0d();
        Ok(EmissionReport {
            params: *self.params(),
            p_parallel: p_par,
            p_antiparallel: p_anti,
            ratio,
            ratio_error,
            norm,
            quad_error,
            tail_estimate,
            closed_form_ratio: closed_form_probabilities(k0d).2,
            flagged: !flags.is_empty(),
            flags,
            energy_nodes: nodes,
        })
    }

    /// Probability carried by the square windows `|k1 ∓ k0|, |k2 ∓ k0| ≤ half_width`
    /// around the four on-shell points (units of `M`).
    pub fn peak_window_mass(&self, half_width: f64, opts: &EmissionOptions) -> Result<f64> {
        let k0 = self.on_shell().k0;
        let k_lo = (k0 - half_width).max(0.0);
        let (w_lo, w_hi) = (k_lo.hypot(1.0), (k0 + half_width).hypot(1.0));
        // ω1, ω2 ∈ [w_lo, w_hi] with ω1 + ω2 = E and y = (ω1 − ω2)/2 ≥ 0
        let window = |e: f64| {
            let hi = (w_hi - 0.5 * e).min(0.5 * e - w_lo);
            (hi > 0.0).then_some(Some((0.0, hi)))
        };
        let (r, _, _) = self.integrate_energies((2.0 * w_lo, 2.0 * w_hi), window, opts)?;
        Ok(r.value.re + r.value.im)
    }
}

/// Parallel and antiparallel emission probabilities for physical parameters.
pub fn emission_probabilities(params: &ModelParams, tol: f64) -> Result<EmissionReport> {
    PairSystem::new(params)?.emission(&EmissionOptions::with_tol(tol))
}
