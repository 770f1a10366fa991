//! Strang split-step Fourier integration of `i q_t + q_xx + 2|q|²q = 0` on a
//! periodic grid, and the norms used by the stability bounds.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::{boundary_level_of, ComplexField, Grid};
use crate::spectral::{trapezoid, Spectral};

/// Initial data must satisfy `edge/max ≤ INITIAL_EDGE_TOL`.
pub const INITIAL_EDGE_TOL: f64 = 1e-6;
/// Boundary bands may not exceed this fraction of the peak during a run.
pub const BOUNDARY_TOL: f64 = 1e-4;

fn default_true() -> bool {
    true
}

/// Time-stepping scheme built from the symmetric split step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// `N(h/2) L(h) N(h/2)`, second order.
    Strang,
    /// Suzuki's five-stage symmetric composition of Strang steps, fourth order.
    #[default]
    Suzuki4,
}

impl Scheme {
    /// Strang sub-step fractions of one full step.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Scheme::Strang => vec![1.0],
            Scheme::Suzuki4 => {
                let w = 1.0 / (4.0 - 4f64.powf(1.0 / 3.0));
                vec![w, w, 1.0 - 4.0 * w, w, w]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    /// Domain length `L`; the grid is `[-L/2, L/2)`.
    pub length: f64,
    /// Sample count, a power of two.
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default)]
    pub scheme: Scheme,
    /// Output times in `[t_start, t_end]`; `t_end` is used when empty.
    #[serde(default)]
    pub sample_times: Vec<f64>,
}

impl EvolveConfig {
    pub fn new(length: f64, n: usize, dt: f64, t_end: f64) -> Self {
        Self {
            length,
            n,
            dt,
            t_end,
            dealias: true,
            scheme: Scheme::default(),
            sample_times: Vec::new(),
        }
    }

    pub fn with_samples(mut self, times: Vec<f64>) -> Self {
        self.sample_times = times;
        self
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::centered(self.length, self.n)
    }

    /// Largest retained wavenumber magnitude.
    pub fn k_max(&self) -> f64 {
        let dx = self.length / self.n as f64;
        let nyq = PI / dx;
        if self.dealias {
            let cut = self.n / 3;
            2.0 * PI * (cut.saturating_sub(1)) as f64 / self.length
        } else {
            nyq
        }
    }

    /// Time-step bound: the fastest retained mode may rotate by at most π in
    /// the longest linear sub-step.
    pub fn dt_bound(&self) -> f64 {
        let wmax = self.scheme.weights().iter().map(|w| w.abs()).fold(0.0, f64::max);
        PI / (wmax * self.k_max().powi(2))
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() || self.n < 8 {
            return Err(Error::InvalidInput(format!(
                "sample count must be a power of two ≥ 8, got {}",
                self.n
            )));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidInput(format!("bad domain length {}", self.length)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || !self.t_end.is_finite() {
            return Err(Error::InvalidInput(format!("bad time stepping dt = {}, t_end = {}", self.dt, self.t_end)));
        }
        let bound = self.dt_bound();
        if self.dt > bound {
            return Err(Error::CflViolation { dt: self.dt, bound });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub l2: f64,
    pub boundary_level: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<ComplexField>,
    pub diagnostics: Vec<Diagnostics>,
    /// Largest relative change of the L² norm seen at any step.
    pub l2_drift: f64,
    pub steps: usize,
}

impl Trajectory {
    pub fn last(&self) -> &ComplexField {
        self.snapshots.last().expect("trajectory has at least one snapshot")
    }
}

struct Stepper {
    weights: Vec<f64>,
    sp: Spectral,
    mask: Vec<bool>,
    buf: Vec<Complex64>,
    /// Dispersive multipliers keyed by the bit pattern of the sub-step length.
    propagators: Vec<(u64, Vec<Complex64>)>,
}

impl Stepper {
    fn new(cfg: &EvolveConfig) -> Self {
        let sp = Spectral::new(cfg.n, cfg.length);
        let cut = cfg.n / 3;
        let mask = (0..cfg.n)
            .map(|j| {
                let jj = if j < cfg.n / 2 { j } else { cfg.n - j };
                !cfg.dealias || jj < cut
            })
            .collect();
        Self { weights: cfg.scheme.weights(), sp,
            mask,
            buf: vec![Complex64::new(0.0, 0.0); cfg.n],
            propagators: Vec::new(),
        }
    }

    fn nonlinear(q: &mut [Complex64], h: f64) {
        for v in q.iter_mut() {
            *v *= Complex64::from_polar(1.0, 2.0 * v.norm_sqr() * h);
        }
    }

    fn propagator(&mut self, h: f64) -> usize {
        let key = h.to_bits();
        if let Some(i) = self.propagators.iter().position(|(k, _)| *k == key) {
            return i;
        }
        let mult = self
            .sp
            .k
            .iter()
            .zip(&self.mask)
            .map(|(k, keep)| {
                if *keep {
                    Complex64::from_polar(1.0, -k * k * h)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        if self.propagators.len() > 16 {
            self.propagators.clear();
        }
        self.propagators.push((key, mult));
        self.propagators.len() - 1
    }

    fn linear(&mut self, q: &mut [Complex64], h: f64) {
        let p = self.propagator(h);
        self.buf.copy_from_slice(q);
        self.sp.forward(&mut self.buf);
        for (v, m) in self.buf.iter_mut().zip(&self.propagators[p].1) {
            *v *= m;
        }
        self.sp.inverse(&mut self.buf);
        q.copy_from_slice(&self.buf);
    }

    /// Composition of Strang steps; adjacent nonlinear half-steps commute and are merged.
    fn step(&mut self, q: &mut [Complex64], h: f64) {
        let n = self.weights.len();
        Self::nonlinear(q, 0.5 * self.weights[0] * h);
        for k in 0..n {
            let w = self.weights[k];
            self.linear(q, w * h);
            let next = if k + 1 < n { self.weights[k + 1] } else { 0.0 };
            Self::nonlinear(q, 0.5 * (w + next) * h);
        }
    }
}

/// Evolves `q0` from `q0.t` to `cfg.t_end`, returning snapshots at the sample times.
pub fn evolve(q0: &ComplexField, cfg: &EvolveConfig) -> Result<Trajectory> {
    cfg.validate()?;
    q0.grid.check_matches(&cfg.grid()?)?;
    q0.check_edge_decay(INITIAL_EDGE_TOL)?;
    let t0 = q0.t;
    if cfg.t_end < t0 {
        return Err(Error::InvalidInput(format!("t_end {} precedes start {t0}", cfg.t_end)));
    }
    let mut times = if cfg.sample_times.is_empty() {
        vec![cfg.t_end]
    } else {
        cfg.sample_times.clone()
    };
    if times.iter().any(|t| !t.is_finite() || *t < t0 - 1e-12 || *t > cfg.t_end + 1e-12) {
        return Err(Error::InvalidInput(format!(
            "sample times must lie in [{t0}, {}]",
            cfg.t_end
        )));
    }
    times.sort_by(f64::total_cmp);

    let mut stepper = Stepper::new(cfg);
    let mut q = q0.values.clone();
    let grid = q0.grid;
    let l2_0 = l2_norm(q0);
    let mut t = t0;
    let mut steps = 0usize;
    let mut drift: f64 = 0.0;
    let mut snapshots = Vec::with_capacity(times.len());
    let mut diagnostics = Vec::with_capacity(times.len());

    for &ts in &times {
        while ts - t > 1e-12 * cfg.dt.max(ts.abs()) {
            let h = (ts - t).min(cfg.dt);
            // absorb a sliver remainder into this step
            let h = if ts - t - h < 1e-9 * cfg.dt { ts - t } else { h };
            stepper.step(&mut q, h);
            t = if h == ts - t { ts } else { t + h };
            steps += 1;
            let level = boundary_level_of(&q);
            if level > BOUNDARY_TOL {
                return Err(Error::BoundaryContamination { t, level });
            }
            let l2 = l2_of(&q, grid.dx);
            if !l2.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite field at t = {t}")));
            }
            if l2_0 > 0.0 {
                drift = drift.max((l2 - l2_0).abs() / l2_0);
            }
        }
        let f = ComplexField::new(grid, ts, q.clone())?;
        diagnostics.push(Diagnostics {
            t: ts,
            l2: l2_norm(&f),
            boundary_level: f.boundary_level(),
        });
        snapshots.push(f);
    }
    Ok(Trajectory { snapshots, diagnostics, l2_drift: drift, steps })
}

/// `‖q‖_{L²}` by the trapezoid rule.
pub fn l2_norm(q: &ComplexField) -> f64 {
    l2_of(&q.values, q.grid.dx)
}

fn l2_of(values: &[Complex64], dx: f64) -> f64 {
    trapezoid(values.iter().map(|v| v.norm_sqr()), dx).sqrt()
}

/// `‖⟨x⟩^s q‖_{L²}` with `⟨x⟩ = √(1 + x²)`.
pub fn weighted_norm(q: &ComplexField, s: f64) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidInput(format!("weight exponent must be ≥ 0, got {s}")));
    }
    let g = q.grid;
    Ok(trapezoid(
        q.values
            .iter()
            .enumerate()
            .map(|(i, v)| (1.0 + g.x(i).powi(2)).powf(s) * v.norm_sqr()),
        g.dx,
    )
    .sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_norms() {
        let g = Grid::centered(10.0, 32).unwrap();
        let z = ComplexField::zeros(g, 0.0);
        assert_eq!(l2_norm(&z), 0.0);
        assert_eq!(weighted_norm(&z, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn norm_homogeneity() {
        let g = Grid::centered(20.0, 256).unwrap();
        let q = ComplexField::from_fn(g, 0.0, |x| Complex64::new((-x * x).exp(), x.sin()));
        let c = Complex64::new(-0.3, 1.7);
        assert!((l2_norm(&q.scaled(c)) - c.norm() * l2_norm(&q)).abs() < 1e-14 * l2_norm(&q));
        assert!((weighted_norm(&q, 0.0).unwrap() - l2_norm(&q)).abs() < 1e-15);
    }

    #[test]
    fn cfl_rejects_large_steps() {
        let cfg = EvolveConfig::new(80.0, 2048, 1e-2, 1.0);
        assert!(matches!(cfg.validate(), Err(Error::CflViolation { .. })));
        assert!(EvolveConfig::new(80.0, 2048, 1e-3, 1.0).validate().is_ok());
        assert!(EvolveConfig::new(80.0, 1000, 1e-3, 1.0).validate().is_err());
    }

    #[test]
    fn free_gaussian_mass_conserved() {
        let cfg = EvolveConfig::new(60.0, 512, 2e-3, 0.5);
        let g = cfg.grid().unwrap();
        let q0 = ComplexField::from_fn(g, 0.0, |x| Complex64::new(0.1 * (-x * x).exp(), 0.0));
        let tr = evolve(&q0, &cfg).unwrap();
        assert!(tr.l2_drift < 1e-12);
        assert_eq!(tr.snapshots.len(), 1);
        assert_eq!(tr.last().t, 0.5);
    }

    #[test]
    fn partial_steps_hit_sample_times() {
        let cfg = EvolveConfig::new(60.0, 256, 1e-2, 0.123).with_samples(vec![0.0, 0.05, 0.123]);
        let g = cfg.grid().unwrap();
        let q0 = ComplexField::from_fn(g, 0.0, |x| Complex64::new((-x * x).exp(), 0.0));
        let tr = evolve(&q0, &cfg).unwrap();
        let ts: Vec<f64> = tr.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(ts, vec![0.0, 0.05, 0.123]);
        assert_eq!(tr.snapshots[0].values, q0.values);
    }

    #[test]
    fn contamination_detected() {
        let cfg = EvolveConfig::new(20.0, 256, 1e-3, 3.0);
        let g = cfg.grid().unwrap();
        // fast-moving pulse reaches the boundary
        let q0 = ComplexField::from_fn(g, 0.0, |x| {
            Complex64::from_polar((-(x * x)).exp(), 6.0 * x)
        });
        assert!(matches!(
            evolve(&q0, &cfg),
            Err(Error::BoundaryContamination { .. })
        ));
    }
}
