//! One-excitation self-energies `Σ_±(z)`, their on-shell shifts and rates,
//! the lowest-order two-excitation self-energy and the bound-state pole
//! below the mode cutoff.

mod numeric;
mod table;

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{on_shell, ModelParams, SymmetrySector};
use crate::quad::find_root;

pub(crate) use numeric::{sigma_unit, sigma_unit_analytic};
pub use table::SelfEnergyTable;
pub(crate) use table::U_MIN;

/// Requests closer than this (relative to `M`) to the branch point are
/// rejected.
pub const BRANCH_EXCLUSION: f64 = 1e-15;

/// Default accuracy of reduced (`λ = 1`) self-energy quadratures.
pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    /// The limit `x + i0` from the upper half plane.
    UpperLimit,
    Plain,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEnergy {
    pub value: C64,
    pub boundary: Boundary,
}

impl ComplexEnergy {
    pub fn new(value: C64, boundary: Boundary) -> Result<Self> {
        if boundary == Boundary::UpperLimit && value.im != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "the +i0 prescription applies to real energies only, got {value}"
            )));
        }
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::InvalidParameter("energy must be finite".into()));
        }
        Ok(Self { value, boundary })
    }

    /// `x + i0`
    pub fn upper(x: f64) -> Self {
        Self { value: C64::new(x, 0.0), boundary: Boundary::UpperLimit }
    }

    pub fn plain(z: C64) -> Self {
        Self { value: z, boundary: Boundary::Plain }
    }

    /// Checks the argument against the cut `[M, ∞)` and the branch point and
    /// returns it in units of `M`.
    fn reduced(&self, m: f64) -> Result<C64> {
        let z = self.value / m;
        if (z - 1.0).norm() <= BRANCH_EXCLUSION {
            return Err(Error::BranchPoint(self.value.re));
        }
        if self.boundary == Boundary::Plain && z.im == 0.0 && z.re > 1.0 {
            return Err(Error::Domain(format!(
                "{} lies on the branch cut; use the +i0 boundary value",
                self.value.re
            )));
        }
        Ok(C64::new(z.re, if z.im == 0.0 { 0.0 } else { z.im }))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Numeric,
    Analytic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelfEnergyValue {
    pub sigma: C64,
    pub method: Method,
    pub error_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorRates {
    pub delta_s: f64,
    pub gamma_s: f64,
}

impl SectorRates {
    /// `δ_s − iγ_s/2`
    pub fn sigma(&self) -> C64 {
        C64::new(self.delta_s, -0.5 * self.gamma_s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BelowThresholdPole {
    pub energy: f64,
    /// `M − E_p`, kept separately to avoid cancellation.
    pub binding: f64,
    /// `√(M² − E_p²)`: inverse localization length of the bound photon.
    pub kappa: f64,
}

pub fn sigma_s_numeric(params: &ModelParams, sector: SymmetrySector, z: ComplexEnergy) -> Result<SelfEnergyValue> {
    params.validate()?;
    let zr = z.reduced(params.m)?;
    let red = params.in_cutoff_units();
    let l2 = red.lambda * red.lambda;
    let r = sigma_unit(zr, sector.sign(), red.d, DEFAULT_TOL)?;
    Ok(SelfEnergyValue {
        sigma: r.value * (l2 * params.m),
        method: Method::Numeric,
        error_estimate: r.abs_error_estimate * l2 * params.m,
    })
}

/// Closed-form `Σ_s(z)` with the exponentially small real correction
/// omitted. Arguments with `Im z < 0` are obtained by reflection.
pub fn sigma_s_analytic(params: &ModelParams, sector: SymmetrySector, z: ComplexEnergy) -> Result<SelfEnergyValue> {
    params.validate()?;
    let zr = z.reduced(params.m)?;
    let red = params.in_cutoff_units();
    let l2 = red.lambda * red.lambda;
    let v = sigma_unit_analytic(zr, sector.sign(), red.d)?;
    Ok(SelfEnergyValue { sigma: v * (l2 * params.m), method: Method::Analytic, error_estimate: 0.0 })
}

/// Lowest-order shift and rate of the sector: `δ_s = δ0 + 2πs(g0²/c0)sin(k0d)`,
/// `γ_s = 4π(g0²/c0)(1 + s cos(k0d))`.
pub fn sector_rates(params: &ModelParams, sector: SymmetrySector) -> Result<SectorRates> {
    let os = on_shell(params)?;
    let s = sector.sign();
    let ratio = os.g0 * os.g0 / os.c0;
    let k0d = os.k0 * params.d;
    Ok(SectorRates {
        delta_s: os.delta0 + 2.0 * PI * s * ratio * k0d.sin(),
        gamma_s: 4.0 * PI * ratio * (1.0 + s * k0d.cos()),
    })
}

/// Shift and rate read off the numerically exact `Σ_s(ω0 + i0)`.
pub fn sector_rates_exact(params: &ModelParams, sector: SymmetrySector) -> Result<SectorRates> {
    let v = sigma_s_numeric(params, sector, ComplexEnergy::upper(params.omega0))?;
    Ok(SectorRates { delta_s: v.sigma.re, gamma_s: -2.0 * v.sigma.im })
}

/// `Σ₂⁽²⁾(z) = Σ_+(z − ω0) + Σ_−(z − ω0) = ∫dk 2g²(k)/(z − ω0 − ω(k))`.
pub fn sigma2_lowest(params: &ModelParams, z: ComplexEnergy) -> Result<C64> {
    params.validate()?;
    let shifted = ComplexEnergy { value: z.value - params.omega0, boundary: z.boundary };
    let zr = shifted.reduced(params.m)?;
    let red = params.in_cutoff_units();
    let l2 = red.lambda * red.lambda;
    Ok(sigma_unit(zr, 1.0, 0.0, DEFAULT_TOL)?.value * (l2 * params.m))
}

/// `σ₂ = Σ₂⁽²⁾(2ω0 + i0)`.
pub fn sigma2_onshell(params: &ModelParams) -> Result<C64> {
    sigma2_lowest(params, ComplexEnergy::upper(2.0 * params.omega0))
}

/// Lifetime of the doubly excited state, `−1/(2 Im σ₂)`.
pub fn tau2(params: &ModelParams) -> Result<f64> {
    let s2 = sigma2_onshell(params)?;
    Ok(-1.0 / (2.0 * s2.im))
}

/// Real root of `u − ω0 − Σ_s(u) = 0` below the cutoff, if any.
///
/// The search runs in `κ = √(M² − u²)` on `κ·(u − ω0 − Σ_s(u))`, which is
/// finite at threshold and strictly decreasing, so a root is unique.
pub fn pole_below_threshold(params: &ModelParams, sector: SymmetrySector) -> Result<Option<BelowThresholdPole>> {
    params.validate()?;
    let red = params.in_cutoff_units();
    let l2 = red.lambda * red.lambda;
    let s = sector.sign();
    let f = |kappa: f64| -> f64 {
        let u = ((1.0 - kappa) * (1.0 + kappa)).sqrt();
        let sig = match sigma_unit(C64::new(u, 0.0), s, red.d, DEFAULT_TOL) {
            Ok(r) => r.value.re,
            Err(e) => e.best_estimate().map_or(f64::NAN, |b| b.value.re),
        };
        kappa * (u - red.omega0) - kappa * l2 * sig
    };
    // below this κ, 1 − u is no longer resolved in double precision
    let lo = 1e-7;
    let hi = 1.0;
    let (flo, fhi) = (f(lo), f(hi));
    if !(flo > 0.0 && fhi < 0.0) {
        return Ok(None);
    }
    let kappa = match find_root(f, lo, hi, 1e-15 * lo.max(1e-300)) {
        Ok(k) => k,
        Err(Error::NoSignChange { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let binding = kappa * kappa / (1.0 + ((1.0 - kappa) * (1.0 + kappa)).sqrt());
    Ok(Some(BelowThresholdPole {
        energy: params.m * (1.0 - binding),
        binding: params.m * binding,
        kappa: params.m * kappa,
    }))
}
