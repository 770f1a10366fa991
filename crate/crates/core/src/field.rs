use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SAMPLES: usize = 8;

/// Uniform grid `x_i = x0 + i·dx`, `i = 0..n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite()) || !x0.is_finite() {
            return Err(Error::InvalidInput(format!("bad grid spacing/origin ({x0}, {dx})")));
        }
        if n < MIN_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "grid needs at least {MIN_SAMPLES} samples, got {n}"
            )));
        }
        Ok(Self { x0, dx, n })
    }

    /// Periodic grid of `n` samples covering `[-length/2, length/2)`.
    pub fn centered(length: f64, n: usize) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidInput(format!("grid length must be positive, got {length}")));
        }
        Self::new(-0.5 * length, length / n.max(1) as f64, n)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    pub fn length(&self) -> f64 {
        self.dx * self.n as f64
    }

    pub fn matches(&self, other: &Grid) -> bool {
        self.n == other.n
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
            && (self.x0 - other.x0).abs() <= 1e-12 * (1.0 + self.x0.abs())
    }

    pub(crate) fn check_matches(&self, other: &Grid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Sampled complex field `q(x)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: Grid,
    pub t: f64,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(grid: Grid, t: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.n,
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput(format!("non-finite sample at index {i}")));
        }
        if !t.is_finite() {
            return Err(Error::InvalidInput("non-finite time stamp".into()));
        }
        Ok(Self { grid, t, values })
    }

    pub fn zeros(grid: Grid, t: f64) -> Self {
        Self {
            grid,
            t,
            values: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    pub fn from_fn(grid: Grid, t: f64, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            grid,
            t,
            values: grid.points().map(f).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Ratio of the largest end-sample magnitude to the field maximum (0 for a zero field).
    pub fn edge_ratio(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let edge = self.values[0].norm().max(self.values[self.len() - 1].norm());
        edge / max
    }

    /// Largest magnitude in the outer bands (1/64 of the grid, at least 4 samples, per side)
    /// relative to the field maximum.
    pub fn boundary_level(&self) -> f64 {
        boundary_level_of(&self.values)
    }

    pub fn check_edge_decay(&self, allowed: f64) -> Result<()> {
        let ratio = self.edge_ratio();
        if ratio > allowed {
            Err(Error::EdgeDecay { ratio, allowed })
        } else {
            Ok(())
        }
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.grid.check_matches(&other.grid)?;
        Ok(ComplexField {
            grid: self.grid,
            t: self.t,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scaled(&self, c: Complex64) -> ComplexField {
        ComplexField {
            grid: self.grid,
            t: self.t,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn conj(&self) -> ComplexField {
        ComplexField {
            grid: self.grid,
            t: self.t,
            values: self.values.iter().map(|v| v.conj()).collect(),
        }
    }
}

pub(crate) fn boundary_level_of(values: &[Complex64]) -> f64 {
    let max = values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let n = values.len();
    let band = (n / 64).max(4).min(n / 2);
    let edge = values[..band]
        .iter()
        .chain(&values[n - band..])
        .map(|v| v.norm_sqr())
        .fold(0.0, f64::max);
    (edge / max).sqrt()
}
