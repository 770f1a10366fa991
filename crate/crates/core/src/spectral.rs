//! FFT utilities on periodic grids and high-order finite differences.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Forward/inverse plans and the angular wavenumbers for one grid size.
pub struct Spectral {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    /// Wavenumbers in FFT order, `k_j = 2π j / L` with `j` wrapped to `[-n/2, n/2)`.
    pub k: Vec<f64>,
}

impl Spectral {
    pub fn new(n: usize, length: f64) -> Self {
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let k = (0..n)
            .map(|j| {
                let j = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * j / length
            })
            .collect();
        Self { n, fwd, inv, k }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    /// Inverse transform including the `1/n` normalization.
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }

    /// Band-limited interpolant evaluated at `x_i + shift` for every sample.
    /// The Nyquist mode is shifted symmetrically so real data stays real.
    pub fn shifted(&self, values: &[Complex64], shift: f64) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward(&mut buf);
        for (j, (v, k)) in buf.iter_mut().zip(&self.k).enumerate() {
            if self.n.is_multiple_of(2) && j == self.n / 2 {
                *v *= (k * shift).cos();
            } else {
                *v *= Complex64::from_polar(1.0, k * shift);
            }
        }
        self.inverse(&mut buf);
        buf
    }

    /// Spectral first derivative.
    pub fn derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward(&mut buf);
        for (j, (v, k)) in buf.iter_mut().zip(&self.k).enumerate() {
            if self.n.is_multiple_of(2) && j == self.n / 2 {
                *v = Complex64::new(0.0, 0.0);
            } else {
                *v *= Complex64::new(0.0, *k);
            }
        }
        self.inverse(&mut buf);
        buf
    }
}

const FD6: [f64; 3] = [3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0];

/// Sixth-order centered first derivative at index `i` (needs `3 ≤ i < n-3`),
/// where `at(j)` returns the sample at index `j`.
pub fn fd6_at(at: impl Fn(usize) -> Complex64, i: usize, dx: f64) -> Complex64 {
    let mut d = Complex64::new(0.0, 0.0);
    for (m, c) in FD6.iter().enumerate() {
        let o = m + 1;
        d += (at(i + o) - at(i - o)) * *c;
    }
    d / dx
}

const FD6_SECOND: [f64; 4] = [-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0];

/// Sixth-order centered second derivative of a real sequence at index `i` (needs `3 ≤ i < n-3`).
pub fn fd6_second(v: &[f64], i: usize, dx: f64) -> f64 {
    let mut d = FD6_SECOND[0] * v[i];
    for (o, c) in FD6_SECOND.iter().enumerate().skip(1) {
        d += c * (v[i + o] + v[i - o]);
    }
    d / (dx * dx)
}

/// Trapezoid rule on a uniform grid.
pub fn trapezoid(values: impl ExactSizeIterator<Item = f64>, dx: f64) -> f64 {
    let n = values.len();
    let mut sum = 0.0;
    for (i, v) in values.enumerate() {
        let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
        sum += w * v;
    }
    sum * dx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shift_of_smooth_periodic_function() {
        let n = 64;
        let l = 2.0 * PI;
        let sp = Spectral::new(n, l);
        let xs: Vec<f64> = (0..n).map(|i| i as f64 * l / n as f64).collect();
        let v: Vec<Complex64> = xs.iter().map(|x| Complex64::new(x.sin(), (2.0 * x).cos())).collect();
        let h = 0.37;
        let s = sp.shifted(&v, h);
        for (x, w) in xs.iter().zip(&s) {
            let e = Complex64::new((x + h).sin(), (2.0 * (x + h)).cos());
            assert!((w - e).norm() < 1e-13);
        }
        let d = sp.derivative(&v);
        for (x, w) in xs.iter().zip(&d) {
            let e = Complex64::new(x.cos(), -2.0 * (2.0 * x).sin());
            assert!((w - e).norm() < 1e-12);
        }
    }

    #[test]
    fn fd6_on_exponential() {
        let dx = 0.01;
        let v: Vec<Complex64> = (0..20).map(|i| Complex64::new(0.0, 2.0 * i as f64 * dx).exp()).collect();
        let d = fd6_at(|j| v[j], 10, dx);
        assert!((d - Complex64::new(0.0, 2.0) * v[10]).norm() < 1e-11);
    }

    #[test]
    fn fd6_second_exact_on_sextic() {
        let dx = 0.1;
        let v: Vec<f64> = (0..9).map(|i| (i as f64 * dx).powi(6)).collect();
        assert!((fd6_second(&v, 4, dx) - 30.0 * 0.4f64.powi(4)).abs() < 1e-9);
    }

    #[test]
    fn trapezoid_constant() {
        assert!((trapezoid([1.0; 11].into_iter(), 0.1) - 1.0).abs() < 1e-15);
    }
}
