//! Sampled two-photon density on a rectangular momentum grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::par::Parallelism;
use crate::system::PairSystem;

/// Momentum ranges of the two axes, physical units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridWindow {
    pub k1: (f64, f64),
    pub k2: (f64, f64),
}

impl GridWindow {
    pub fn square(lo: f64, hi: f64) -> Self {
        Self { k1: (lo, hi), k2: (lo, hi) }
    }

    /// Square of half-width `half` around `(c1, c2)`.
    pub fn around(c1: f64, c2: f64, half: f64) -> Self {
        Self { k1: (c1 - half, c1 + half), k2: (c2 - half, c2 + half) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub k1: f64,
    pub k2: f64,
    pub p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub params: ModelParams,
    pub window: GridWindow,
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    /// `p[i][j] = P(k1[i], k2[j])`, units of `1/M²`.
    pub p: Vec<Vec<f64>>,
    /// `p` divided by its maximum.
    pub normalized: Vec<Vec<f64>>,
    pub max: f64,
    /// Strict local maxima above 1e-3 of the maximum, largest first.
    pub peaks: Vec<Peak>,
}

impl SpectralGrid {
    /// `(k1, k2, P)` rows in row-major order.
    pub fn triples(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.k1
            .iter()
            .enumerate()
            .flat_map(move |(i, &a)| self.k2.iter().enumerate().map(move |(j, &b)| (a, b, self.p[i][j])))
    }
}

fn axis((lo, hi): (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn local_maxima(k1: &[f64], k2: &[f64], p: &[Vec<f64>], max: f64) -> Vec<Peak> {
    let (n1, n2) = (k1.len(), k2.len());
    let mut peaks = Vec::new();
    for i in 0..n1 {
        for j in 0..n2 {
            let v = p[i][j];
            if v < 1e-3 * max {
                continue;
            }
            let mut is_max = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || a < 0 || b < 0 || a >= n1 as i64 || b >= n2 as i64 {
                        continue;
                    }
                    if p[a as usize][b as usize] >= v {
                        is_max = false;
                    }
                }
            }
            if is_max {
                peaks.push(Peak { k1: k1[i], k2: k2[j], p: v });
            }
        }
    }
    peaks.sort_by(|a, b| b.p.total_cmp(&a.p));
    peaks
}

impl PairSystem {
    pub fn density_grid(&self, window: GridWindow, resolution: (usize, usize), parallelism: Parallelism) -> Result<SpectralGrid> {
        if resolution.0 < 16 || resolution.1 < 16 {
            return Err(Error::InvalidParameter(format!("grid resolution {resolution:?} below 16 per axis")));
        }
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && hi > lo;
        if !ok(window.k1) || !ok(window.k2) {
            return Err(Error::InvalidParameter(format!("invalid grid window {window:?}")));
        }
        let m = self.params().m;
        let k1 = axis(window.k1, resolution.0);
        let k2 = axis(window.k2, resolution.1);
        let points: Vec<(f64, f64)> = k1.iter().flat_map(|&a| k2.iter().map(move |&b| (a, b))).collect();
        let values = parallelism.map(&points, |&(a, b)| self.spectral_probability(a / m, b / m).map(|p| p / (m * m)));
        let flat = values.into_iter().collect::<Result<Vec<f64>>>()?;
        let p: Vec<Vec<f64>> = flat.chunks(resolution.1).map(|c| c.to_vec()).collect();
        let max = flat.iter().copied().fold(0.0, f64::max);
        let normalized = p.iter().map(|row| row.iter().map(|v| if max > 0.0 { v / max } else { 0.0 }).collect()).collect();
        let peaks = local_maxima(&k1, &k2, &p, max);
        Ok(SpectralGrid { params: *self.params(), window, k1, k2, p, normalized, max, peaks })
    }
}

pub fn density_grid(params: &ModelParams, window: GridWindow, resolution: (usize, usize)) -> Result<SpectralGrid> {
    PairSystem::new(params)?.density_grid(window, resolution, Parallelism::default())
}
