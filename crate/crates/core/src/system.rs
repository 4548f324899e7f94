//! A configured atom pair in cutoff units, with the on-shell quantities and
//! the self-energy table shared by the vertex, amplitude and analysis layers.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{on_shell, ModelParams, OnShellParams, SymmetrySector};
use crate::selfenergy::{
    pole_below_threshold, sigma_unit, BelowThresholdPole, SelfEnergyTable, DEFAULT_TOL,
};

/// Below-threshold pole of the symmetric dressed propagator together with
/// the slope of `u − ω0 − Σ_+(u)` there.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedPole {
    pub pole: BelowThresholdPole,
    pub slope: f64,
}

#[derive(Debug, Clone)]
pub struct PairSystem {
    params: ModelParams,
    red: ModelParams,
    os: OnShellParams,
    l2: f64,
    sigma: [C64; 2],
    sigma2: C64,
    pole: Option<DressedPole>,
    table: Arc<SelfEnergyTable>,
}

impl PairSystem {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let d = params.in_cutoff_units().d;
        Self::with_table(params, Arc::new(SelfEnergyTable::new(d, DEFAULT_TOL)))
    }

    /// Reuses a table built for the same reduced distance `M·d`, so that
    /// sweeps over `λ` share the expensive self-energy interpolants.
    pub fn with_table(params: &ModelParams, table: Arc<SelfEnergyTable>) -> Result<Self> {
        params.validate()?;
        let red = params.in_cutoff_units();
        if (table.distance() - red.d).abs() > 1e-12 * red.d.max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "table built for distance {} cannot serve distance {}",
                table.distance(),
                red.d
            )));
        }
        let os = on_shell(&red)?;
        let l2 = red.lambda * red.lambda;
        let mut sigma = [C64::new(0.0, 0.0); 2];
        for (i, sector) in SymmetrySector::BOTH.into_iter().enumerate() {
            sigma[i] = sigma_unit(C64::new(red.omega0, 0.0), sector.sign(), red.d, DEFAULT_TOL)?.value * l2;
        }
        let sigma2 = sigma_unit(C64::new(red.omega0, 0.0), 1.0, 0.0, DEFAULT_TOL)?.value * l2;
        let pole = match pole_below_threshold(&red, SymmetrySector::Symmetric)? {
            Some(p) => Some(DressedPole { pole: p, slope: pole_slope(&red, &p)? }),
            None => None,
        };
        let mut sys = Self { params: *params, red, os, l2, sigma, sigma2, pole: None, table };
        sys.pole = match pole {
            Some(dp) => Some(sys.align_pole(dp)?),
            None => None,
        };
        Ok(sys)
    }

    /// Moves the pole onto the root of the interpolated denominator, so that
    /// principal values taken with the table see an exact simple pole.
    fn align_pole(&self, mut dp: DressedPole) -> Result<DressedPole> {
        let w0 = self.red.omega0;
        let mut u = dp.pole.energy;
        for _ in 0..8 {
            let step = (u - w0 - self.sigma_real(SymmetrySector::Symmetric, u)?.re) / dp.slope;
            u -= step;
            if step.abs() <= 4.0 * f64::EPSILON {
                break;
            }
        }
        if u >= 1.0 {
            return Err(Error::Domain(format!("interpolated pole {u} crossed the threshold")));
        }
        dp.pole.energy = u;
        dp.pole.binding = 1.0 - u;
        dp.pole.kappa = ((1.0 - u) * (1.0 + u)).sqrt();
        Ok(dp)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Parameters in units of `M`.
    pub fn reduced(&self) -> &ModelParams {
        &self.red
    }

    /// On-shell quantities in units of `M`.
    pub fn on_shell(&self) -> &OnShellParams {
        &self.os
    }

    pub fn table(&self) -> &Arc<SelfEnergyTable> {
        &self.table
    }

    pub(crate) fn lambda2(&self) -> f64 {
        self.l2
    }

    /// `σ_s = Σ_s(ω0 + i0)` in units of `M`.
    pub fn sigma_s(&self, sector: SymmetrySector) -> C64 {
        self.sigma[sector.index()]
    }

    /// `σ₂ = Σ₂⁽²⁾(2ω0 + i0)` in units of `M`.
    pub fn sigma2(&self) -> C64 {
        self.sigma2
    }

    /// Below-threshold pole of the symmetric sector in units of `M`.
    pub fn dressed_pole(&self) -> Option<DressedPole> {
        self.pole
    }

    /// `Σ_s(u + i0)` for real `u` (units of `M`).
    pub(crate) fn sigma_real(&self, sector: SymmetrySector, u: f64) -> Result<C64> {
        Ok(self.table.eval(sector.index(), u)? * self.l2)
    }

    /// `Σ_s(z)` on the first sheet; real `z` is read as `z + i0`.
    pub(crate) fn sigma_at(&self, sector: SymmetrySector, z: C64) -> Result<C64> {
        if z.im == 0.0 {
            // the branch point itself is approached from below, where the
            // integrands that call this have a finite limit
            let u = if z.re == 1.0 { 1.0 - 0.5 * f64::EPSILON } else { z.re };
            return self.sigma_real(sector, u);
        }
        Ok(sigma_unit(z, sector.sign(), self.red.d, DEFAULT_TOL)?.value * self.l2)
    }
}

/// `d/du (u − ω0 − Σ_+(u))` at the pole, from the smooth function
/// `f(κ) = κ·(u − ω0 − Σ_+(u))`, `u = √(1 − κ²)`: `D'(E_p) = −E_p f'(κ_p)/κ_p²`.
fn pole_slope(red: &ModelParams, pole: &BelowThresholdPole) -> Result<f64> {
    let l2 = red.lambda * red.lambda;
    let f = |kappa: f64| -> Result<f64> {
        let u = ((1.0 - kappa) * (1.0 + kappa)).sqrt();
        let s = sigma_unit(C64::new(u, 0.0), 1.0, red.d, DEFAULT_TOL)?.value.re;
        Ok(kappa * (u - red.omega0) - kappa * l2 * s)
    };
    let kp = pole.kappa;
    let h = 1e-4 * kp;
    let df = (f(kp + h)? - f(kp - h)?) / (2.0 * h);
    Ok(-pole.energy * df / (kp * kp))
}
