//! Emission probabilities, ratio sweeps and density grids.

mod emission;
mod grid;
mod sweep;

pub use emission::{emission_probabilities, EmissionOptions, EmissionReport};
pub use grid::{density_grid, GridWindow, Peak, SpectralGrid};
pub use sweep::{sweep, Monotonicity, SweepResult, SweepRow, SweepSpec, SweepVariable};

/// Weak-coupling `(P⇔, P⇌, R)` with `P⇔ = (1 + sin²θ/(1 + sin²θ))/2` and
/// `R = 1 + 2 sin²θ`, `θ = k0·d`.
pub fn closed_form_probabilities(k0d: f64) -> (f64, f64, f64) {
    let s2 = k0d.sin().powi(2);
    let p_par = 0.5 * (1.0 + s2 / (1.0 + s2));
    let p_anti = 0.5 / (1.0 + s2);
    (p_par, p_anti, 1.0 + 2.0 * s2)
}
