//! Physical configuration of the two-atom waveguide system.
//!
//! The guided mode is massive: `ω(k) = √(k² + M²)` with form factor
//! `g(k) = λ / (k² + M²)^{1/4}`. The speed of light in the guide is one, so
//! distances are measured in units of `1/M` once energies are measured in
//! units of `M`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mode cutoff `M`, atomic excitation `omega0`, coupling `lambda` and
/// interatomic distance `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    #[serde(rename = "M")]
    pub m: f64,
    pub omega0: f64,
    pub lambda: f64,
    pub d: f64,
}

impl ModelParams {
    pub fn new(m: f64, omega0: f64, lambda: f64, d: f64) -> Result<Self> {
        let params = Self { m, omega0, lambda, d };
        params.validate()?;
        Ok(params)
    }

    /// Parameters with the distance given through the dimensionless product
    /// `k0·d` instead of `d`.
    pub fn with_k0d(m: f64, omega0: f64, lambda: f64, k0d: f64) -> Result<Self> {
        let k0 = on_shell_momentum(m, omega0)?;
        Self::new(m, omega0, lambda, k0d / k0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.m, self.omega0, self.lambda, self.d]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter("non-finite model parameter".into()));
        }
        if self.m <= 0.0 {
            return Err(Error::InvalidParameter(format!("cutoff M = {} must be positive", self.m)));
        }
        if self.omega0 <= self.m {
            return Err(Error::InvalidParameter(format!(
                "omega0 = {} must exceed the cutoff M = {}",
                self.omega0, self.m
            )));
        }
        if self.lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!("lambda = {} must be positive", self.lambda)));
        }
        if self.d < 0.0 {
            return Err(Error::InvalidParameter(format!("distance d = {} must be non-negative", self.d)));
        }
        Ok(())
    }

    /// The same physical system expressed in units where `M = 1`.
    pub fn in_cutoff_units(&self) -> Self {
        Self {
            m: 1.0,
            omega0: self.omega0 / self.m,
            lambda: self.lambda / self.m,
            d: self.d * self.m,
        }
    }

    pub fn k0d(&self) -> f64 {
        on_shell_momentum(self.m, self.omega0).map(|k0| k0 * self.d).unwrap_or(f64::NAN)
    }

    pub fn with_lambda(&self, lambda: f64) -> Self {
        Self { lambda, ..*self }
    }

    pub fn with_distance(&self, d: f64) -> Self {
        Self { d, ..*self }
    }
}

/// Quantities evaluated at the resonant momentum `k0`, where `ω(k0) = ω0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnShellParams {
    pub k0: f64,
    /// Group velocity `dω/dk` at `k0`.
    pub c0: f64,
    /// `λ/√ω0`.
    pub g0: f64,
    /// Distance-independent part of the one-excitation level shift.
    pub delta0: f64,
    /// Decay rate of a single isolated excited atom.
    pub gamma_atom: f64,
}

/// Symmetric (`+1`, triplet) or antisymmetric (`-1`, singlet) combination of
/// single-atom excitations.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetrySector {
    Symmetric,
    Antisymmetric,
}

impl SymmetrySector {
    pub const BOTH: [SymmetrySector; 2] = [SymmetrySector::Symmetric, SymmetrySector::Antisymmetric];

    pub fn sign(self) -> f64 {
        match self {
            SymmetrySector::Symmetric => 1.0,
            SymmetrySector::Antisymmetric => -1.0,
        }
    }

    pub fn from_sign(s: i32) -> Result<Self> {
        match s {
            1 => Ok(SymmetrySector::Symmetric),
            -1 => Ok(SymmetrySector::Antisymmetric),
            other => Err(Error::InvalidParameter(format!("sector sign must be ±1, got {other}"))),
        }
    }

    pub(crate) fn index(self) -> usize {
        match self {
            SymmetrySector::Symmetric => 0,
            SymmetrySector::Antisymmetric => 1,
        }
    }
}

pub fn dispersion(params: &ModelParams, k: f64) -> f64 {
    k.hypot(params.m)
}

pub fn form_factor(params: &ModelParams, k: f64) -> f64 {
    params.lambda / dispersion(params, k).sqrt()
}

/// Emission vertex `v_s(k) = g(k)(1 + s e^{ikd})/√2`.
pub fn vertex_v(params: &ModelParams, sector: SymmetrySector, k: f64) -> C64 {
    let phase = C64::from_polar(1.0, k * params.d);
    form_factor(params, k) * (1.0 + sector.sign() * phase) / std::f64::consts::SQRT_2
}

fn on_shell_momentum(m: f64, omega0: f64) -> Result<f64> {
    if !(omega0 > m) || m <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "omega0 = {omega0} must exceed the cutoff M = {m} for a propagating resonance"
        )));
    }
    // (ω0 - M)(ω0 + M) keeps full relative precision close to threshold.
    Ok(((omega0 - m) * (omega0 + m)).sqrt())
}

pub fn on_shell(params: &ModelParams) -> Result<OnShellParams> {
    let k0 = on_shell_momentum(params.m, params.omega0)?;
    let c0 = k0 / params.omega0;
    let g0 = params.lambda / params.omega0.sqrt();
    let lambda2 = params.lambda * params.lambda;
    let delta0 = 2.0 * lambda2 / k0 * ((params.omega0 + k0) / params.m).ln();
    let gamma_atom = 4.0 * PI * g0 * g0 / c0;
    Ok(OnShellParams { k0, c0, g0, delta0, gamma_atom })
}
