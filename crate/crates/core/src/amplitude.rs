//! Two-photon amplitude `𝒜(k1, k2, z)`, its value on the two-photon shell,
//! the asymptotic spectral density and the weak-coupling forms.
//!
//! With `c_j = cos(k_j d/2)`, `s_j = sin(k_j d/2)` the sector sum collapses to
//! `Σ_s s v_s(k1) v_s(k2) B_s = 2 g(k1) g(k2) e^{i(k1+k2)d/2} (c1 c2 B_+ + s1 s2 B_−)`,
//! where `B_s = Σ_j (1 + X_s(k_j, z))/(z − ω0 − ω(k_j) − Σ_s(z − ω(k_j)))`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{on_shell, ModelParams, SymmetrySector};
use crate::selfenergy::{sector_rates, ComplexEnergy};
use crate::system::PairSystem;
use crate::vertex::Dressing;

/// Accuracy of `Σ₂` inside amplitudes, relative to `|σ₂|`.
const SLICE_SIGMA2_TOL: f64 = 1e-7;

const SLICE_SIGMA2_SUBDIVISIONS: usize = 4000;

/// Accuracy of `Σ₂`, relative to the denominator of `G₂`, still accepted
/// when its quadrature stops short of [`SLICE_SIGMA2_TOL`].
const SIGMA2_FALLBACK_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPhotonPoint {
    pub k1: f64,
    pub k2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeValue {
    /// Amplitude density, in units of `1/M`.
    pub a: C64,
    pub point: TwoPhotonPoint,
}

/// Direction of the second photon relative to the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Parallel,
    Antiparallel,
}

/// Energy-dependent factors of `𝒜`, shared by all photon pairs with the
/// same total energy.
#[derive(Clone, Copy, Debug)]
pub(crate) struct EnergySlice {
    pub z: C64,
    pub g2: C64,
    pub shift: [C64; 2],
}

impl PairSystem {
    pub(crate) fn energy_slice(&self, z: C64) -> Result<EnergySlice> {
        let s2 = match self.sigma2_full_budget(z, Dressing::Full, SLICE_SIGMA2_TOL, SLICE_SIGMA2_SUBDIVISIONS) {
            Ok(r) => r.value,
            Err(err) => match err.best_estimate() {
                Some(best)
                    if best.abs_error_estimate
                        <= SIGMA2_FALLBACK_TOL * (z - 2.0 * self.reduced().omega0 - best.value).norm() =>
                {
                    log::debug!("Σ₂({z}) accepted at error {:.3e}", best.abs_error_estimate);
                    best.value
                }
                _ => return Err(err),
            },
        };
        let g2 = 1.0 / (z - 2.0 * self.reduced().omega0 - s2);
        let shift = [
            self.vertex_shift(SymmetrySector::Symmetric, z)?,
            self.vertex_shift(SymmetrySector::Antisymmetric, z)?,
        ];
        Ok(EnergySlice { z, g2, shift })
    }

    /// `B_s` of the module documentation, with `b_j = z − ω(k_j)` supplied.
    fn branch_sum(&self, slice: &EnergySlice, sector: SymmetrySector, ws: [f64; 2], bs: [C64; 2]) -> Result<C64> {
        let w0 = self.reduced().omega0;
        let mut acc = C64::new(0.0, 0.0);
        for (w, b) in ws.into_iter().zip(bs) {
            let sig_b = self.sigma_at(sector, b)?;
            let (x, _) = self.vertex_from(sector, slice.shift[sector.index()], w, slice.z, sig_b)?;
            acc += (1.0 + x) / (b - w0 - sig_b);
        }
        Ok(acc)
    }

    fn combine(&self, slice: &EnergySlice, ks: [f64; 2], ws: [f64; 2], bs: [C64; 2]) -> Result<C64> {
        let d = self.reduced().d;
        let gg = self.lambda2() / (ws[0] * ws[1]).sqrt();
        let (h1, h2) = (0.5 * ks[0] * d, 0.5 * ks[1] * d);
        let bp = self.branch_sum(slice, SymmetrySector::Symmetric, ws, bs)?;
        let bm = self.branch_sum(slice, SymmetrySector::Antisymmetric, ws, bs)?;
        let phase = C64::from_polar(1.0, h1 + h2);
        Ok(slice.g2 * 2.0 * gg * phase * (h1.cos() * h2.cos() * bp + h1.sin() * h2.sin() * bm))
    }

    pub(crate) fn amplitude_in(&self, slice: &EnergySlice, k1: f64, k2: f64) -> Result<C64> {
        let ws = [k1.hypot(1.0), k2.hypot(1.0)];
        self.combine(slice, [k1, k2], ws, [slice.z - ws[0], slice.z - ws[1]])
    }

    /// Amplitude on the two-photon shell `z = ω1 + ω2 + i0`, with the photon
    /// energies passed in so that `z − ω1 = ω2` holds exactly.
    pub(crate) fn amplitude_on_shell(&self, slice: &EnergySlice, (k1, w1): (f64, f64), (k2, w2): (f64, f64)) -> Result<C64> {
        self.combine(slice, [k1, k2], [w1, w2], [C64::new(w2, 0.0), C64::new(w1, 0.0)])
    }

    /// `𝒜(k1, k2, z)` in units of `M`; real `z` is read as `z + i0`.
    pub fn cal_amplitude(&self, k1: f64, k2: f64, z: C64) -> Result<C64> {
        let slice = self.energy_slice(z)?;
        self.amplitude_in(&slice, k1, k2)
    }

    /// `𝒜(k1, k2, ω(k1) + ω(k2) + i0)`.
    pub fn asymptotic_amplitude(&self, k1: f64, k2: f64) -> Result<C64> {
        let (w1, w2) = (k1.hypot(1.0), k2.hypot(1.0));
        let slice = self.energy_slice(C64::new(w1 + w2, 0.0))?;
        self.amplitude_on_shell(&slice, (k1, w1), (k2, w2))
    }

    /// `P(k1, k2) = |𝒜(k1, k2, ω(k1) + ω(k2) + i0)|²`.
    pub fn spectral_probability(&self, k1: f64, k2: f64) -> Result<f64> {
        Ok(self.asymptotic_amplitude(k1, k2)?.norm_sqr())
    }
}

pub fn cal_amplitude(params: &ModelParams, k1: f64, k2: f64, z: ComplexEnergy) -> Result<AmplitudeValue> {
    let sys = PairSystem::new(params)?;
    let zr = sys.reduce_energy(z, sys.sigma2_cut_onset(Dressing::Full))?;
    let a = sys.cal_amplitude(k1 / params.m, k2 / params.m, zr)? / params.m;
    Ok(AmplitudeValue { a, point: TwoPhotonPoint { k1, k2 } })
}

pub fn asymptotic_amplitude(params: &ModelParams, k1: f64, k2: f64) -> Result<AmplitudeValue> {
    let sys = PairSystem::new(params)?;
    let a = sys.asymptotic_amplitude(k1 / params.m, k2 / params.m)? / params.m;
    Ok(AmplitudeValue { a, point: TwoPhotonPoint { k1, k2 } })
}

/// Asymptotic two-photon density, in units of `1/M²`.
pub fn spectral_probability(params: &ModelParams, k1: f64, k2: f64) -> Result<f64> {
    Ok(asymptotic_amplitude(params, k1, k2)?.a.norm_sqr())
}

/// Lowest-order on-shell self-energies `(σ_+, σ_−, σ₂)` in physical units,
/// with `σ_s = δ_s − iγ_s/2` and `σ₂ = 2δ0 − 4πi g0²/c0`.
pub fn lowest_order_sigmas(params: &ModelParams) -> Result<(C64, C64, C64)> {
    let os = on_shell(params)?;
    let sp = sector_rates(params, SymmetrySector::Symmetric)?.sigma();
    let sm = sector_rates(params, SymmetrySector::Antisymmetric)?.sigma();
    let s2 = C64::new(2.0 * os.delta0, -4.0 * std::f64::consts::PI * os.g0 * os.g0 / os.c0);
    Ok((sp, sm, s2))
}

/// Weak-coupling factor `F_s(κ1, κ2)` in momentum offsets from the on-shell
/// point.
pub fn f_small_coupling(params: &ModelParams, sector: SymmetrySector, kappa1: f64, kappa2: f64) -> Result<C64> {
    let os = on_shell(params)?;
    let (sp, sm, s2) = lowest_order_sigmas(params)?;
    let sigma = match sector {
        SymmetrySector::Symmetric => sp,
        SymmetrySector::Antisymmetric => sm,
    };
    Ok(f_with(params.lambda * params.lambda / (2.0 * params.omega0), os.c0, sigma, s2, kappa1, kappa2))
}

fn f_with(pref: f64, c0: f64, sigma: C64, s2: C64, kappa1: f64, kappa2: f64) -> C64 {
    let outer = 1.0 / (c0 * (kappa1 + kappa2) - s2);
    pref * outer * (1.0 / (c0 * kappa1 - sigma) + 1.0 / (c0 * kappa2 - sigma))
}

/// Weak-coupling density near the on-shell point; `kappa2` is the offset of
/// `±k2` for the parallel (antiparallel) branch.
pub fn p_small_coupling(params: &ModelParams, kappa1: f64, kappa2: f64, branch: Branch) -> Result<f64> {
    let fp = f_small_coupling(params, SymmetrySector::Symmetric, kappa1, kappa2)?;
    let fm = f_small_coupling(params, SymmetrySector::Antisymmetric, kappa1, kappa2)?;
    let theta = params.k0d();
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let cross = theta.sin().powi(2) * (fp.conj() * fm).re;
    let sign = match branch {
        Branch::Parallel => 1.0,
        Branch::Antiparallel => -1.0,
    };
    Ok(8.0 * (2.0 * c.powi(4) * fp.norm_sqr() + 2.0 * s.powi(4) * fm.norm_sqr() + sign * cross))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use proptest::prelude::*;

    use super::*;
    use crate::model::vertex_v;

    fn system(lambda: f64, k0d: f64) -> PairSystem {
        PairSystem::new(&ModelParams::with_k0d(1.0, 1.1, lambda, k0d).unwrap()).unwrap()
    }

    #[test]
    fn collapsed_sector_sum_matches_vertices() {
        let sys = system(1e-2, 1.3);
        let p = *sys.params();
        let z = C64::new(2.23, 0.0);
        let slice = sys.energy_slice(z).unwrap();
        for &(k1, k2) in &[(0.45, 0.47), (-0.3, 0.8), (1.7, -0.2)] {
            let ws = [f64::hypot(k1, 1.0), f64::hypot(k2, 1.0)];
            let bs = [z - ws[0], z - ws[1]];
            let mut direct = C64::new(0.0, 0.0);
            for sector in SymmetrySector::BOTH {
                let b = sys.branch_sum(&slice, sector, ws, bs).unwrap();
                direct += sector.sign() * vertex_v(&p, sector, k1) * vertex_v(&p, sector, k2) * b;
            }
            let a = sys.amplitude_in(&slice, k1, k2).unwrap();
            assert!((a - slice.g2 * direct).norm() < 1e-12 * a.norm(), "{a} vs {}", slice.g2 * direct);
        }
    }

    #[test]
    fn coincident_atoms_couple_only_symmetrically() {
        let p = ModelParams::new(1.0, 1.1, 1e-2, 0.0).unwrap();
        let sys = PairSystem::new(&p).unwrap();
        let slice = sys.energy_slice(C64::new(2.2, 0.0)).unwrap();
        let a = sys.amplitude_in(&slice, 0.4, -0.5).unwrap();
        let ws = [0.4f64.hypot(1.0), 0.5f64.hypot(1.0)];
        let bs = [slice.z - ws[0], slice.z - ws[1]];
        let bp = sys.branch_sum(&slice, SymmetrySector::Symmetric, ws, bs).unwrap();
        let expected = slice.g2 * 2.0 * 1e-4 / (0.4f64.hypot(1.0) * 0.5f64.hypot(1.0)).sqrt() * bp;
        assert!((a - expected).norm() < 1e-13 * a.norm());
    }

    #[test]
    fn onshell_amplitude_scales_as_inverse_coupling_squared() {
        // at the on-shell point both denominators are O(λ²) and the numerator O(λ²)
        let mut logs = Vec::new();
        for lambda in [1e-3, 2e-3, 4e-3] {
            let sys = system(lambda, FRAC_PI_2);
            let k0 = sys.on_shell().k0;
            let a = sys.asymptotic_amplitude(k0, k0).unwrap();
            logs.push((lambda.ln(), a.norm().ln()));
        }
        let slope = (logs[2].1 - logs[0].1) / (logs[2].0 - logs[0].0);
        assert!((slope + 2.0).abs() < 0.05, "slope {slope}");
    }

    #[test]
    fn parity_of_the_density() {
        let sys = system(1e-2, FRAC_PI_2);
        let k0 = sys.on_shell().k0;
        for &(k1, k2) in &[(k0, k0 + 1e-4), (0.3, -0.7), (k0 - 2e-4, -k0)] {
            let a = sys.spectral_probability(k1, k2).unwrap();
            let b = sys.spectral_probability(-k1, -k2).unwrap();
            let c = sys.spectral_probability(k2, k1).unwrap();
            assert!((a - b).abs() <= 1e-9 * a, "{a} {b}");
            assert!((a - c).abs() <= 1e-12 * a, "{a} {c}");
        }
    }

    #[test]
    fn density_peaks_near_the_onshell_point() {
        let lambda = 1e-2;
        let sys = system(lambda, FRAC_PI_2);
        let k0 = sys.on_shell().k0;
        let p0 = sys.spectral_probability(k0, k0).unwrap();
        for off in [0.05, 0.1, 0.2] {
            assert!(sys.spectral_probability(k0 + off, k0).unwrap() < 1e-2 * p0);
            assert!(sys.spectral_probability(k0 + off, k0 - off).unwrap() < 1e-2 * p0);
        }
        // the diagonal maximum sits where c0·κ lines up with the level shifts
        let os = *sys.on_shell();
        let (sp, _, s2) = lowest_order_sigmas(sys.params()).unwrap();
        let lo = sp.re.min(0.5 * s2.re) / os.c0 - os.gamma_atom / os.c0;
        let hi = sp.re.max(0.5 * s2.re) / os.c0 + os.gamma_atom / os.c0;
        let mut best = (0.0, 0.0);
        for j in -400..=400 {
            let kappa = j as f64 * 1e-2 * lambda * lambda;
            let p = sys.spectral_probability(k0 + kappa, k0 + kappa).unwrap();
            if p > best.1 {
                best = (kappa, p);
            }
        }
        assert!(best.0 > lo && best.0 < hi, "peak at {} not in [{lo}, {hi}]", best.0);
    }

    #[test]
    fn small_coupling_factor_is_symmetric_and_peaks_at_shifted_origin() {
        let p = ModelParams::with_k0d(1.0, 1.1, 1e-3, 0.7).unwrap();
        let f = |a: f64, b: f64| f_small_coupling(&p, SymmetrySector::Symmetric, a, b).unwrap();
        assert!((f(1e-6, -3e-6) - f(-3e-6, 1e-6)).norm() == 0.0);
        // scan the diagonal: |F| peaks where c0κ ≈ Re σ_s (both denominators resonant)
        let os = on_shell(&p).unwrap();
        let (sp, _, s2) = lowest_order_sigmas(&p).unwrap();
        let width = os.gamma_atom / os.c0;
        let mut best = (0.0, 0.0);
        for j in -4000..=4000 {
            let k = j as f64 * width * 1e-3 + sp.re / os.c0;
            let v = f(k, k).norm();
            if v > best.1 {
                best = (k, v);
            }
        }
        let expect_lo = sp.re.min(0.5 * s2.re) / os.c0;
        let expect_hi = sp.re.max(0.5 * s2.re) / os.c0;
        assert!(best.0 > expect_lo - width && best.0 < expect_hi + width, "{} not in [{expect_lo}, {expect_hi}]", best.0);
    }

    #[test]
    fn small_coupling_cross_term_vanishes_at_resonance() {
        let p = ModelParams::with_k0d(1.0, 1.1, 1e-3, PI).unwrap();
        let par = p_small_coupling(&p, 1e-7, -2e-7, Branch::Parallel).unwrap();
        let anti = p_small_coupling(&p, 1e-7, -2e-7, Branch::Antiparallel).unwrap();
        assert!((par - anti).abs() <= 1e-12 * par);
        let fm = f_small_coupling(&p, SymmetrySector::Antisymmetric, 1e-7, -2e-7).unwrap();
        assert!((par - 16.0 * fm.norm_sqr()).abs() <= 1e-12 * par);
    }

    #[test]
    fn small_coupling_branches_differ_by_the_cross_term() {
        let p = ModelParams::with_k0d(1.0, 1.1, 1e-3, 0.9).unwrap();
        let (k1, k2) = (3e-6, -1e-6);
        let fp = f_small_coupling(&p, SymmetrySector::Symmetric, k1, k2).unwrap();
        let fm = f_small_coupling(&p, SymmetrySector::Antisymmetric, k1, k2).unwrap();
        let par = p_small_coupling(&p, k1, k2, Branch::Parallel).unwrap();
        let anti = p_small_coupling(&p, k1, k2, Branch::Antiparallel).unwrap();
        let cross = 8.0 * 0.9f64.sin().powi(2) * (fp.conj() * fm).re;
        assert!(((par - anti) - 2.0 * cross).abs() < 1e-10 * par.abs().max(anti.abs()));
    }

    /// `Σ_s s(1 + s e^{ik0d})² F_s(κ1, κ2)`, the weak-coupling parallel amplitude.
    fn small_coupling_amplitude(p: &ModelParams, kappa1: f64, kappa2: f64) -> C64 {
        let phase = C64::from_polar(1.0, p.k0d());
        SymmetrySector::BOTH
            .into_iter()
            .map(|sector| {
                let s = sector.sign();
                s * (1.0 + s * phase).powi(2) * f_small_coupling(p, sector, kappa1, kappa2).unwrap()
            })
            .sum()
    }

    #[test]
    fn amplitude_near_the_onshell_point_matches_small_coupling_form() {
        let sys = system(1e-3, FRAC_PI_2);
        let p = *sys.params();
        let os = *sys.on_shell();
        let width = os.gamma_atom / os.c0;
        let mut worst = 0.0f64;
        let mut peak = 0.0f64;
        for i in -5..=5 {
            for j in -5..=5 {
                let (a, b) = (i as f64 * width, j as f64 * width);
                let full = sys.asymptotic_amplitude(os.k0 + a, os.k0 + b).unwrap().norm();
                let small = small_coupling_amplitude(&p, a, b).norm();
                worst = worst.max((full - small).abs());
                peak = peak.max(small);
            }
        }
        assert!(worst < 0.05 * peak, "deviation {worst:e} against peak {peak:e}");
    }

    #[test]
    fn density_approaches_small_coupling_form_as_coupling_decreases() {
        let mut deviations = Vec::new();
        for lambda in [1e-3, 3e-4, 1e-4] {
            let sys = system(lambda, 2.5 * PI);
            let p = *sys.params();
            let os = *sys.on_shell();
            let width = os.gamma_atom / os.c0;
            let (mut worst, mut peak) = (0.0f64, 0.0f64);
            for i in -8..=8 {
                for j in -8..=8 {
                    let (a, b) = (0.5 * i as f64 * width, 0.5 * j as f64 * width);
                    let full = sys.spectral_probability(os.k0 + a, os.k0 + b).unwrap();
                    let small = p_small_coupling(&p, a, b, Branch::Parallel).unwrap();
                    worst = worst.max((full - small).abs());
                    peak = peak.max(small);
                }
            }
            deviations.push(worst / peak);
        }
        assert!(deviations.windows(2).all(|w| w[1] < w[0]), "{deviations:?}");
        assert!(deviations[2] < 1e-2, "{deviations:?}");
    }

    #[test]
    fn parallel_peak_exceeds_antiparallel_peak() {
        let sys = system(1e-2, FRAC_PI_2);
        let os = *sys.on_shell();
        let w = os.gamma_atom / os.c0;
        let window_max = |sign: f64| {
            let mut best = 0.0f64;
            for i in -10..=10 {
                for j in -10..=10 {
                    let (a, b) = (0.2 * i as f64 * w, 0.2 * j as f64 * w);
                    best = best.max(sys.spectral_probability(sign * (os.k0 + a), os.k0 + b).unwrap());
                }
            }
            best
        };
        let (par, anti) = (window_max(1.0), window_max(-1.0));
        assert!(par > 1.2 * anti, "{par} vs {anti}");
    }

    /// `∬ dκ1 dκ2 P_small` over one peak image, in sum and difference
    /// coordinates measured in units of `γ_atom/c0`.
    fn small_coupling_mass(p: &ModelParams, branch: Branch) -> f64 {
        use crate::quad::{integrate, Domain, QuadConfig};
        let os = on_shell(p).unwrap();
        let w = os.gamma_atom / os.c0;
        let (sp, sm, s2) = lowest_order_sigmas(p).unwrap();
        let cfg = QuadConfig::with_tol(1e-9).subdivisions(20_000);
        let outer = |sum: f64| {
            let mut breaks = Vec::new();
            for sigma in [sp, sm] {
                let x = 2.0 * sigma.re / (os.c0 * w);
                breaks.extend([x - sum, sum - x]);
            }
            let inner = |diff: f64| {
                let v = p_small_coupling(p, 0.5 * w * (sum + diff), 0.5 * w * (sum - diff), branch).unwrap();
                C64::new(0.5 * w * w * v, 0.0)
            };
            integrate(&inner, Domain::FullLine, &breaks, &cfg).unwrap().value
        };
        integrate(&outer, Domain::FullLine, &[s2.re / (os.c0 * w)], &cfg).unwrap().value.re
    }

    #[test]
    fn small_coupling_density_integrates_to_closed_form() {
        for k0d in [FRAC_PI_2, 0.7, PI] {
            let p = ModelParams::with_k0d(1.0, 1.1, 1e-4, k0d).unwrap();
            let (par, anti, _) = crate::analysis::closed_form_probabilities(k0d);
            let got_par = small_coupling_mass(&p, Branch::Parallel);
            let got_anti = small_coupling_mass(&p, Branch::Antiparallel);
            assert!((got_par - par).abs() < 1e-3, "k0d {k0d}: {got_par} vs {par}");
            assert!((got_anti - anti).abs() < 1e-3, "k0d {k0d}: {got_anti} vs {anti}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn exchange_symmetry_of_the_amplitude(k1 in -2.0f64..2.0, k2 in -2.0f64..2.0, zr in 2.05f64..2.6, zi in 0.0f64..0.05) {
            let sys = system(1e-2, 1.1);
            let slice = sys.energy_slice(C64::new(zr, zi)).unwrap();
            let a = sys.amplitude_in(&slice, k1, k2).unwrap();
            let b = sys.amplitude_in(&slice, k2, k1).unwrap();
            prop_assert!((a - b).norm() <= 1e-14 * a.norm());
        }

        #[test]
        fn small_coupling_density_nonnegative(k1 in -1e-5f64..1e-5, k2 in -1e-5f64..1e-5, k0d in 0.0f64..10.0) {
            let p = ModelParams::with_k0d(1.0, 1.1, 1e-3, k0d).unwrap();
            prop_assert!(p_small_coupling(&p, k1, k2, Branch::Parallel).unwrap() >= 0.0);
            prop_assert!(p_small_coupling(&p, k1, k2, Branch::Antiparallel).unwrap() >= 0.0);
        }
    }
}
