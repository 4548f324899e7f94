//! 21-point Gauss-Kronrod rule and the globally adaptive bisection driver.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64 as C64;

use super::{QuadConfig, QuadResult};
use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_386_614_767,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights belonging to the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub(crate) const NODES: usize = 21;

/// Abscissae of the rule on `[a, b]`, centre last.
pub(crate) fn nodes(a: f64, b: f64) -> [f64; NODES] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [c; NODES];
    for j in 0..10 {
        x[2 * j] = c - h * XGK[j];
        x[2 * j + 1] = c + h * XGK[j];
    }
    x
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Estimate {
    pub value: C64,
    pub error: f64,
    /// The error is the rounding floor of the rule; bisection cannot reduce it.
    pub roundoff: bool,
}

/// Applies the rule to function values laid out as in [`nodes`].
pub(crate) fn apply(a: f64, b: f64, fv: &[C64]) -> Estimate {
    debug_assert_eq!(fv.len(), NODES);
    let h = 0.5 * (b - a);
    let fc = fv[NODES - 1];
    let mut resk = fc * WGK[10];
    let mut resg = C64::new(0.0, 0.0);
    let mut resabs = fc.norm() * WGK[10];
    for j in 0..10 {
        let (f1, f2) = (fv[2 * j], fv[2 * j + 1]);
        resk += (f1 + f2) * WGK[j];
        resabs += (f1.norm() + f2.norm()) * WGK[j];
        if j % 2 == 1 {
            resg += (f1 + f2) * WG[j / 2];
        }
    }
    let mean = resk * 0.5;
    let mut resasc = (fc - mean).norm() * WGK[10];
    for j in 0..10 {
        resasc += ((fv[2 * j] - mean).norm() + (fv[2 * j + 1] - mean).norm()) * WGK[j];
    }
    let hl = h.abs();
    let resabs = resabs * hl;
    let resasc = resasc * hl;
    let mut err = ((resk - resg) * h).norm();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let mut roundoff = false;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let floor = 50.0 * f64::EPSILON * resabs;
        roundoff = floor >= err;
        err = err.max(floor);
    }
    Estimate { value: resk * h, error: err, roundoff }
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    est: Estimate,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.est.error == other.est.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.est.error.total_cmp(&other.est.error)
    }
}

fn is_splittable(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    (b - a).abs() > 1e3 * f64::EPSILON * scale
}

/// Globally adaptive bisection over the given consecutive pieces.
///
/// `eval` receives a batch of abscissae and returns the integrand at each of
/// them; batching lets callers fan expensive evaluations out across threads.
pub(crate) fn adaptive_batched<E>(eval: &E, pieces: &[(f64, f64)], cfg: &QuadConfig) -> Result<QuadResult>
where
    E: Fn(&[f64]) -> Vec<C64> + ?Sized,
{
    let mut evaluations = 0usize;
    let mut heap = BinaryHeap::new();
    let mut frozen = Vec::new();

    let mut xs = Vec::with_capacity(pieces.len() * NODES);
    for &(a, b) in pieces {
        xs.extend_from_slice(&nodes(a, b));
    }
    let fv = eval(&xs);
    evaluations += xs.len();
    for (i, &(a, b)) in pieces.iter().enumerate() {
        let est = apply(a, b, &fv[i * NODES..(i + 1) * NODES]);
        heap.push(Segment { a, b, est });
    }

    let split = cfg.batch.max(1);
    loop {
        let (value, error) = totals(&heap, &frozen);
        let target = cfg.abs_tol.max(cfg.rel_tol * value.norm());
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::NonConvergence {
                context: "non-finite integrand value".into(),
                best: QuadResult { value, abs_error_estimate: f64::INFINITY, evaluations },
            });
        }
        if error <= target {
            return Ok(QuadResult { value, abs_error_estimate: error, evaluations });
        }
        if heap.is_empty() {
            // only segments at the rounding floor or too narrow to bisect remain
            let unresolved: f64 = frozen.iter().filter(|s| !s.est.roundoff).map(|s| s.est.error).sum();
            if unresolved <= target {
                log::debug!("quadrature limited by rounding: error {error:.3e}, target {target:.3e}");
                return Ok(QuadResult { value, abs_error_estimate: error, evaluations });
            }
        }
        if heap.is_empty() || heap.len() + frozen.len() >= cfg.max_subdivisions {
            return Err(Error::NonConvergence {
                context: format!("{} subintervals used, error {error:.3e} > target {target:.3e}", heap.len() + frozen.len()),
                best: QuadResult { value, abs_error_estimate: error, evaluations },
            });
        }

        let mut parents = Vec::with_capacity(split);
        while parents.len() < split {
            let Some(seg) = heap.pop() else { break };
            if !is_splittable(seg.a, seg.b) || seg.est.roundoff {
                frozen.push(seg);
                continue;
            }
            parents.push(seg);
            if seg.est.error * 4.0 < error / split as f64 {
                break;
            }
        }
        if parents.is_empty() {
            continue;
        }
        let mut xs = Vec::with_capacity(parents.len() * 2 * NODES);
        for seg in &parents {
            let m = 0.5 * (seg.a + seg.b);
            xs.extend_from_slice(&nodes(seg.a, m));
            xs.extend_from_slice(&nodes(m, seg.b));
        }
        let fv = eval(&xs);
        evaluations += xs.len();
        for (i, seg) in parents.iter().enumerate() {
            let m = 0.5 * (seg.a + seg.b);
            let left = apply(seg.a, m, &fv[2 * i * NODES..(2 * i + 1) * NODES]);
            let right = apply(m, seg.b, &fv[(2 * i + 1) * NODES..(2 * i + 2) * NODES]);
            heap.push(Segment { a: seg.a, b: m, est: left });
            heap.push(Segment { a: m, b: seg.b, est: right });
        }
    }
}

fn totals(heap: &BinaryHeap<Segment>, frozen: &[Segment]) -> (C64, f64) {
    // Summation in a fixed order keeps results bit-reproducible.
    let mut segs: Vec<&Segment> = heap.iter().chain(frozen.iter()).collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = C64::new(0.0, 0.0);
    let mut error = 0.0;
    for s in segs {
        value += s.est.value;
        error += s.est.error;
    }
    (value, error)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let sk: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        let sg: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((sk - 2.0).abs() < 1e-14);
        assert!((sg - 2.0).abs() < 1e-14);
    }

    #[test]
    fn kronrod_exact_for_degree_31() {
        for p in 0..=31 {
            let x = nodes(-1.0, 1.0);
            let fv: Vec<C64> = x.iter().map(|&t| C64::new(t.powi(p), 0.0)).collect();
            let est = apply(-1.0, 1.0, &fv);
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert!((est.value.re - exact).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn gauss_exact_for_degree_19() {
        for p in (0..=19).step_by(2) {
            let mut s = 0.0;
            for j in 0..5 {
                s += 2.0 * WG[j] * XGK[2 * j + 1].powi(p);
            }
            assert!((s - 2.0 / (p as f64 + 1.0)).abs() < 1e-14, "degree {p}");
        }
    }
}
