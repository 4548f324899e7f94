//! Chebyshev interpolants of complex functions on an interval.

use num_complex::Complex64 as C64;

#[derive(Clone, Debug)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<C64>,
}

impl Chebyshev {
    /// Interpolates `f` at `n` Chebyshev points of the first kind.
    pub fn fit<F>(f: F, a: f64, b: f64, n: usize) -> Self
    where
        F: Fn(f64) -> C64,
    {
        let n = n.max(2);
        let nf = n as f64;
        let values: Vec<C64> = (0..n)
            .map(|j| {
                let theta = std::f64::consts::PI * (j as f64 + 0.5) / nf;
                f(0.5 * (a + b) + 0.5 * (b - a) * theta.cos())
            })
            .collect();
        let coeffs = (0..n)
            .map(|k| {
                let mut s = C64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    s += v * (std::f64::consts::PI * k as f64 * (j as f64 + 0.5) / nf).cos();
                }
                s * (if k == 0 { 1.0 } else { 2.0 } / nf)
            })
            .collect();
        Self { a, b, coeffs }
    }

    pub fn eval(&self, x: f64) -> C64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + b1 * (2.0 * t) - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + b1 * t - b2
    }

    /// Size of the trailing coefficients, a proxy for the interpolation error.
    pub fn tail_magnitude(&self) -> f64 {
        let n = self.coeffs.len();
        self.coeffs[n.saturating_sub(3)..].iter().map(|c| c.norm()).sum()
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_smooth_function() {
        let f = |x: f64| C64::new(x.exp(), (3.0 * x).sin());
        let c = Chebyshev::fit(f, -0.5, 1.5, 24);
        for i in 0..=50 {
            let x = -0.5 + 2.0 * i as f64 / 50.0;
            assert!((c.eval(x) - f(x)).norm() < 1e-13);
        }
        assert!(c.tail_magnitude() < 1e-13);
    }
}
