//! Closed-form solitons and a finite-difference NLS residual.
//!
//! Convention: a soliton with spectral point `ξ + iη` travels with velocity
//! `−4ξ`; the envelope is `sech(2η(x + 4ξt − x₀))`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dressing;
use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid};
use crate::lax::SpectralPoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonParams {
    pub xi: f64,
    pub eta: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default)]
    pub theta: f64,
}

impl SolitonParams {
    pub fn new(xi: f64, eta: f64, x0: f64, theta: f64) -> Result<Self> {
        let p = Self { xi, eta, x0, theta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.xi, self.eta, self.x0, self.theta].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("non-finite soliton parameter".into()));
        }
        self.point().map(|_| ())
    }

    pub fn point(&self) -> Result<SpectralPoint> {
        SpectralPoint::new(self.xi, self.eta)
    }

    /// Position of the envelope peak at time `t`.
    pub fn center(&self, t: f64) -> f64 {
        self.x0 - 4.0 * self.xi * t
    }
}

/// `φ = x + 4ξt − x₀` and `ψ = θ − ξ(x + 2ξt − x₀) + 2η²t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePair {
    pub phi: f64,
    pub psi: f64,
}

impl PhasePair {
    pub fn of(p: &SolitonParams, x: f64, t: f64) -> Self {
        Self {
            phi: x + 4.0 * p.xi * t - p.x0,
            psi: p.theta - p.xi * (x + 2.0 * p.xi * t - p.x0) + 2.0 * p.eta * p.eta * t,
        }
    }
}

pub fn one_soliton(p: &SolitonParams, x: f64, t: f64) -> Complex64 {
    let ph = PhasePair::of(p, x, t);
    let amp = 2.0 * p.eta / (2.0 * p.eta * ph.phi).cosh();
    Complex64::from_polar(amp, 2.0 * ph.psi)
}

/// `Σ^S` and `D^S` of the two-soliton formula, both multiplied by `e^{-log_scale}`.
#[derive(Debug, Clone, Copy)]
pub struct TwoSolitonTerms {
    pub sigma: Complex64,
    pub det: f64,
    pub log_scale: f64,
}

impl TwoSolitonTerms {
    pub fn q(&self) -> Complex64 {
        2.0 * self.sigma / self.det
    }

    pub fn log_det(&self) -> f64 {
        self.det.ln() + self.log_scale
    }
}

pub fn two_soliton_terms(p1: &SolitonParams, p2: &SolitonParams, x: f64, t: f64) -> Result<TwoSolitonTerms> {
    let (z1, z2) = (p1.point()?, p2.point()?);
    if (z1.z() - z2.z()).norm() <= 1e-12 * (1.0 + z1.z().norm()) {
        return Err(Error::DegenerateParams(0, 1));
    }
    let (e1, e2) = (p1.eta, p2.eta);
    let (f1, f2) = (PhasePair::of(p1, x, t), PhasePair::of(p2, x, t));
    let a = e1 * f1.phi;
    let b = e2 * f2.phi;
    let m = a.abs() + b.abs();
    let d = p1.xi - p2.xi;
    let ex = |v: f64| (v - 2.0 * m).exp();
    let ph1 = Complex64::from_polar(1.0, 2.0 * f1.psi);
    let ph2 = Complex64::from_polar(1.0, 2.0 * f2.psi);
    let plus = Complex64::new(e1 + e2, d);
    let minus = Complex64::new(e1 + e2, -d);

    let sigma = (ex(-2.0 * b) + ex(2.0 * b)) * ph1 / (2.0 * e2)
        + (ex(-2.0 * a) + ex(2.0 * a)) * ph2 / (2.0 * e1)
        - (ex(-2.0 * b) * ph1 + ex(2.0 * a) * ph2) / plus
        - (ex(-2.0 * a) * ph2 + ex(2.0 * b) * ph1) / minus;

    let delta = f1.psi - f2.psi;
    let ca = (-2.0 * a - 2.0 * a.abs()).exp() + (2.0 * a - 2.0 * a.abs()).exp();
    let cb = (-2.0 * b - 2.0 * b.abs()).exp() + (2.0 * b - 2.0 * b.abs()).exp();
    let cross = Complex64::from_polar((-a - b - m).exp(), delta)
        + Complex64::from_polar((a + b - m).exp(), -delta);
    let det = ca * cb / (4.0 * e1 * e2) - cross.norm_sqr() / ((e1 + e2).powi(2) + d * d);

    Ok(TwoSolitonTerms { sigma, det, log_scale: 2.0 * m })
}

pub fn two_soliton(p1: &SolitonParams, p2: &SolitonParams, x: f64, t: f64) -> Result<Complex64> {
    two_soliton_terms(p1, p2, x, t).map(|s| s.q())
}

/// `q = 2Σ/D` for any number of solitons, via dressing of vacuum seeds.
pub fn n_soliton(params: &[SolitonParams], grid: Grid, t: f64) -> Result<ComplexField> {
    let seeds = dressing::vacuum_seed(params, t, grid)?;
    dressing::dress(&ComplexField::zeros(grid, t), &seeds)
}

/// Max over interior points of `|i q_t + q_xx + 2|q|²q|` on three snapshots
/// spaced by `dt`, with second-order centered differences.
pub fn nls_residual(fields: [&ComplexField; 3], dt: f64) -> Result<f64> {
    let [prev, cur, next] = fields;
    cur.grid.check_matches(&prev.grid)?;
    cur.grid.check_matches(&next.grid)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let dx2 = cur.grid.dx * cur.grid.dx;
    let i = Complex64::i();
    let q = &cur.values;
    Ok((1..q.len() - 1)
        .map(|j| {
            let qt = (next.values[j] - prev.values[j]) / (2.0 * dt);
            let qxx = (q[j + 1] - 2.0 * q[j] + q[j - 1]) / dx2;
            (i * qt + qxx + 2.0 * q[j].norm_sqr() * q[j]).norm()
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(xi: f64, eta: f64, x0: f64, theta: f64) -> SolitonParams {
        SolitonParams::new(xi, eta, x0, theta).unwrap()
    }

    #[test]
    fn one_soliton_peak() {
        let q = p(0.0, 0.5, 0.0, 0.0);
        assert!((one_soliton(&q, 0.0, 0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for t in [0.0, 1.3, 7.0] {
            for x in [-2.0, 0.0, 0.7] {
                assert!((one_soliton(&q, x, t).norm() - 1.0 / f64::cosh(x)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn params_reject_lower_half_plane() {
        assert!(SolitonParams::new(0.0, 0.0, 0.0, 0.0).is_err());
        assert!(SolitonParams::new(0.0, -1.0, 0.0, 0.0).is_err());
        assert!(SolitonParams::new(f64::NAN, 1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn two_soliton_degenerate() {
        let a = p(0.5, 1.0, 0.0, 0.0);
        let b = p(0.5, 1.0, 1.0, 0.3);
        assert!(matches!(two_soliton(&a, &b, 0.0, 0.0), Err(Error::DegenerateParams(0, 1))));
    }

    #[test]
    fn two_soliton_decays_and_det_positive() {
        let a = p(1.0, 1.0, 0.0, 0.0);
        let b = p(-1.0, 1.5, 0.0, 0.0);
        for x in [-800.0, -30.0, -1.0, 0.0, 0.4, 30.0, 800.0] {
            let t = two_soliton_terms(&a, &b, x, 0.3).unwrap();
            assert!(t.det > 0.0);
        }
        assert!(two_soliton(&a, &b, 60.0, 0.0).unwrap().norm() < 1e-40);
        assert!(two_soliton(&a, &b, -60.0, 0.0).unwrap().norm() < 1e-40);
    }

    #[test]
    fn velocity_convention_selected_by_residual() {
        // the 4ξt envelope solves NLS; a 2ξt envelope does not
        let q = p(0.4, 0.5, 0.0, 0.0);
        let grid = Grid::centered(40.0, 4000).unwrap();
        let dt = 1e-2;
        let snap = |t: f64, v: f64| {
            ComplexField::from_fn(grid, t, |x| {
                let ph = PhasePair::of(&q, x, t);
                let amp = 2.0 * q.eta / (2.0 * q.eta * (x + v * q.xi * t - q.x0)).cosh();
                Complex64::from_polar(amp, 2.0 * ph.psi)
            })
        };
        let res = |v: f64| {
            let (a, b, c) = (snap(1.0 - dt, v), snap(1.0, v), snap(1.0 + dt, v));
            nls_residual([&a, &b, &c], dt).unwrap()
        };
        assert!(res(4.0) < 1e-3);
        assert!(res(2.0) > 0.1);
    }
}
