//! One-parameter sweeps of the emission report.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::selfenergy::{SelfEnergyTable, DEFAULT_TOL};
use crate::system::PairSystem;

use super::emission::{EmissionOptions, EmissionReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    Lambda,
    /// Atom separation `d`.
    Distance,
    /// Phase `k0·d`; `d` follows.
    K0d,
    /// Atomic frequency at fixed `k0·d`.
    Omega0,
}

impl SweepVariable {
    pub fn apply(self, fixed: &ModelParams, value: f64) -> Result<ModelParams> {
        let p = match self {
            SweepVariable::Lambda => fixed.with_lambda(value),
            SweepVariable::Distance => fixed.with_distance(value),
            SweepVariable::K0d => ModelParams::with_k0d(fixed.m, fixed.omega0, fixed.lambda, value)?,
            SweepVariable::Omega0 => ModelParams::with_k0d(fixed.m, value, fixed.lambda, fixed.k0d())?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::Lambda => "lambda",
            SweepVariable::Distance => "distance",
            SweepVariable::K0d => "k0d",
            SweepVariable::Omega0 => "omega0",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub fixed: ModelParams,
    pub options: EmissionOptions,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.fixed.validate()?;
        if self.values.is_empty() {
            return Err(Error::InvalidParameter("sweep needs at least one value".into()));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::InvalidParameter("sweep values must be strictly monotone".into()));
        }
        for &v in &self.values {
            self.variable.apply(&self.fixed, v)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub report: Option<EmissionReport>,
    pub error: Option<String>,
}

/// Trend of `R` along the sweep values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    Mixed,
    /// Fewer than two successful rows.
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub variable: SweepVariable,
    pub rows: Vec<SweepRow>,
    pub ratio_trend: Monotonicity,
}

impl SweepResult {
    pub fn ratios(&self) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.report.as_ref().map(|rep| rep.ratio)).collect()
    }
}

fn trend(ratios: &[f64]) -> Monotonicity {
    if ratios.len() < 2 {
        return Monotonicity::Undetermined;
    }
    if ratios.windows(2).all(|w| w[1] > w[0]) {
        Monotonicity::Increasing
    } else if ratios.windows(2).all(|w| w[1] < w[0]) {
        Monotonicity::Decreasing
    } else {
        Monotonicity::Mixed
    }
}

/// Runs one emission computation per value; failing rows record their error
/// and the sweep continues. Rows with the same `M·d` share a self-energy
/// table.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let mut table: Option<Arc<SelfEnergyTable>> = None;
    let mut rows = Vec::with_capacity(spec.values.len());
    for &value in &spec.values {
        let params = spec.variable.apply(&spec.fixed, value)?;
        let md = params.in_cutoff_units().d;
        let shared = match &table {
            Some(t) if (t.distance() - md).abs() <= 1e-12 * md.max(1.0) => t.clone(),
            _ => {
                let t = Arc::new(SelfEnergyTable::new(md, DEFAULT_TOL));
                table = Some(t.clone());
                t
            }
        };
        log::info!("{} = {value}", spec.variable.name());
        let outcome = PairSystem::with_table(&params, shared).and_then(|sys| sys.emission(&spec.options));
        rows.push(match outcome {
            Ok(report) => SweepRow { value, report: Some(report), error: None },
            Err(err) => {
                log::warn!("{} = {value} failed: {err}", spec.variable.name());
                SweepRow { value, report: None, error: Some(err.to_string()) }
            }
        });
    }
    let ratios: Vec<f64> = rows.iter().filter_map(|r| r.report.as_ref().map(|rep| rep.ratio)).collect();
    Ok(SweepResult { variable: spec.variable, rows, ratio_trend: trend(&ratios) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_monotone_values_are_rejected() {
        let fixed = ModelParams::with_k0d(1.0, 1.1, 1e-2, 1.0).unwrap();
        let spec = SweepSpec {
            variable: SweepVariable::Lambda,
            values: vec![1e-3, 2e-3, 1.5e-3],
            fixed,
            options: EmissionOptions::default(),
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn omega0_sweep_holds_the_phase() {
        let fixed = ModelParams::with_k0d(1.0, 1.1, 1e-2, 2.5 * std::f64::consts::PI).unwrap();
        let p = SweepVariable::Omega0.apply(&fixed, 1.3).unwrap();
        assert!((p.k0d() - fixed.k0d()).abs() < 1e-12);
        assert_eq!(p.omega0, 1.3);
    }

    #[test]
    fn trend_classification() {
        assert_eq!(trend(&[3.0, 2.9, 2.5]), Monotonicity::Decreasing);
        assert_eq!(trend(&[1.0, 2.0]), Monotonicity::Increasing);
        assert_eq!(trend(&[1.0, 2.0, 1.5]), Monotonicity::Mixed);
        assert_eq!(trend(&[1.0]), Monotonicity::Undetermined);
    }
}
