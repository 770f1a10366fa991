//! Direct scattering for the Zakharov–Shabat operator `ψ' = (−izσ₃ + Q(q))ψ`.
//!
//! Jost solutions are normalized by `ψ⁻ ~ (e^{−izx}, 0)` as `x → −∞` and
//! `ψ⁺ ~ (0, e^{izx})` as `x → +∞`; `a(z) = lim_{x→+∞} ψ⁻₁ e^{izx}` and the
//! norming constant of a zero `z_j` of `a` is `c_j` with `ψ⁻ = c_j ψ⁺`.
//! Propagation uses a fourth-order Magnus step per cell (two Gauss points,
//! potential values from a band-limited shift) in the rescaled variables
//! `ψ e^{±izx}`, with growth carried in a separate log factor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dressing::{self, ZsVectorField};
use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid};
use crate::forms::{n_soliton, SolitonParams};
use crate::lax::{Mat2, SpectralPoint, ZsVector};
use crate::par;
use crate::spectral::Spectral;

pub const ETA_FLOOR: f64 = 1e-3;
/// Newton stops once `|a| ≤ NEWTON_TOL`.
pub const NEWTON_TOL: f64 = 1e-10;
/// `|a(z)|` above which `z` is rejected as an eigenvalue.
pub const EIGENVALUE_TOL: f64 = 1e-8;
/// Allowed `|q(edge)| / max|q|` for scattering.
pub const EDGE_TOL: f64 = 1e-6;
/// Absolute edge magnitude accepted regardless of the field maximum.
pub const EDGE_FLOOR: f64 = 1e-9;
const FD_STEP: f64 = 1e-5;
const DEDUP_TOL: f64 = 1e-7;

fn default_resolution() -> usize {
    40
}

/// Rectangle `[ξ_min, ξ_max] × [η_min, η_max]` with a scan resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchRegion {
    pub xi_min: f64,
    pub xi_max: f64,
    pub eta_min: f64,
    pub eta_max: f64,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
}

impl SearchRegion {
    pub fn new(xi_min: f64, xi_max: f64, eta_min: f64, eta_max: f64) -> Result<Self> {
        let r = Self {
            xi_min,
            xi_max,
            eta_min,
            eta_max,
            resolution: default_resolution(),
        };
        r.validate()?;
        Ok(r)
    }

    pub fn with_resolution(mut self, resolution: usize) -> Self {
        self.resolution = resolution;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.xi_min, self.xi_max, self.eta_min, self.eta_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || !(self.xi_min < self.xi_max) || !(self.eta_min < self.eta_max) {
            return Err(Error::InvalidInput(format!("malformed search region {self:?}")));
        }
        if !(self.eta_min > 0.0) {
            return Err(Error::InvalidInput(format!(
                "search region must lie in the upper half-plane, eta_min = {}",
                self.eta_min
            )));
        }
        if self.resolution < 2 {
            return Err(Error::InvalidInput("scan resolution must be at least 2".into()));
        }
        Ok(())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.xi_min && z.re <= self.xi_max && z.im >= self.eta_min && z.im <= self.eta_max
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.xi_min, self.eta_min),
            Complex64::new(self.xi_max, self.eta_min),
            Complex64::new(self.xi_max, self.eta_max),
            Complex64::new(self.xi_min, self.eta_max),
        ]
    }
}

/// Precomputed potential samples for repeated transfer sweeps over one field.
pub struct Scatterer {
    grid: Grid,
    t: f64,
    substeps: usize,
    /// Potential at the two Gauss points of every sub-cell, or `None` where negligible.
    gauss: Vec<Option<[Complex64; 2]>>,
}

impl Scatterer {
    /// Substeps chosen so that `h · max|q| ≤ 0.05` on every sub-cell.
    pub fn new(q: &ComplexField) -> Result<Self> {
        Self::with_substeps(q, auto_substeps(q))
    }

    pub fn with_substeps(q: &ComplexField, substeps: usize) -> Result<Self> {
        Self::build(q, substeps, q.max_abs())
    }

    /// Edge decay is judged against `scale` instead of the field's own maximum, for remainders
    /// left after removing solitons from a field of that size.
    pub fn with_edge_scale(q: &ComplexField, scale: f64) -> Result<Self> {
        Self::build(q, auto_substeps(q), scale.max(q.max_abs()))
    }

    fn build(q: &ComplexField, substeps: usize, scale: f64) -> Result<Self> {
        if substeps == 0 {
            return Err(Error::InvalidInput("substeps must be positive".into()));
        }
        let edge = q.values[0].norm().max(q.values[q.len() - 1].norm());
        if edge > EDGE_FLOOR.max(EDGE_TOL * scale) {
            return Err(Error::EdgeDecay { ratio: edge / scale, allowed: EDGE_TOL });
        }
        let g = q.grid;
        let sp = Spectral::new(g.n, g.length());
        let hs = g.dx / substeps as f64;
        let off = 3f64.sqrt() / 6.0;
        let shifted: Vec<[Vec<Complex64>; 2]> = (0..substeps)
            .map(|j| {
                let c = (j as f64 + 0.5) * hs;
                [sp.shifted(&q.values, c - off * hs), sp.shifted(&q.values, c + off * hs)]
            })
            .collect();
        let floor = 1e-13 * q.max_abs();
        let mut gauss = Vec::with_capacity((g.n - 1) * substeps);
        for i in 0..g.n - 1 {
            for s in &shifted {
                let (a, b) = (s[0][i], s[1][i]);
                gauss.push(if a.norm() <= floor && b.norm() <= floor { None } else { Some([a, b]) });
            }
        }
        Ok(Self { grid: g, t: q.t, substeps, gauss })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn sub_h(&self) -> f64 {
        self.grid.dx / self.substeps as f64
    }

    /// Magnus exponent of one sub-cell for `ψ' = A ψ`.
    fn omega(qs: [Complex64; 2], z: Complex64, h: f64) -> Mat2 {
        let i = Complex64::i();
        let a1 = Mat2::new(-i * z, qs[0], -qs[0].conj(), i * z);
        let a2 = Mat2::new(-i * z, qs[1], -qs[1].conj(), i * z);
        (a1 + a2).scale(Complex64::new(0.5 * h, 0.0))
            - a1.commutator(&a2).scale(Complex64::new(3f64.sqrt() / 12.0 * h * h, 0.0))
    }

    /// Left-to-right sweep of `m = ψ⁻ e^{izx}`; `visit(i, m, log)` sees every grid point.
    fn sweep_left(&self, z: Complex64, mut visit: impl FnMut(usize, ZsVector, f64)) {
        let h = self.sub_h();
        let shift = (Complex64::i() * z * h).exp();
        let free2 = shift * shift;
        let mut m = ZsVector::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let mut log = 0.0;
        visit(0, m, log);
        for i in 0..self.grid.n - 1 {
            for j in 0..self.substeps {
                match self.gauss[i * self.substeps + j] {
                    None => m.0[1] *= free2,
                    Some(qs) => m = Self::omega(qs, z, h).exp_traceless().apply(m).scale(shift),
                }
            }
            rescale(&mut m, &mut log);
            visit(i + 1, m, log);
        }
    }

    /// Right-to-left sweep of `n = ψ⁺ e^{−izx}`.
    fn sweep_right(&self, z: Complex64, mut visit: impl FnMut(usize, ZsVector, f64)) {
        let h = self.sub_h();
        let shift = (Complex64::i() * z * h).exp();
        let free1 = shift * shift;
        let mut v = ZsVector::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
        let mut log = 0.0;
        let last = self.grid.n - 1;
        visit(last, v, log);
        for i in (0..last).rev() {
            for j in (0..self.substeps).rev() {
                match self.gauss[i * self.substeps + j] {
                    None => v.0[0] *= free1,
                    Some(qs) => v = (-Self::omega(qs, z, h)).exp_traceless().apply(v).scale(shift),
                }
            }
            rescale(&mut v, &mut log);
            visit(i, v, log);
        }
    }

    pub fn a(&self, z: Complex64) -> Complex64 {
        let mut out = (Complex64::new(0.0, 0.0), 0.0);
        let last = self.grid.n - 1;
        self.sweep_left(z, |i, m, log| {
            if i == last {
                out = (m.0[0], log);
            }
        });
        out.0 * out.1.exp()
    }

    fn newton(&self, z0: Complex64) -> Option<(Complex64, f64)> {
        let mut z = z0;
        let mut a = self.a(z);
        for _ in 0..60 {
            if a.norm() <= NEWTON_TOL {
                return Some((z, a.norm()));
            }
            let d = Complex64::new(FD_STEP, 0.0);
            let da = (self.a(z + d) - self.a(z - d)) / (2.0 * FD_STEP);
            if da.norm() == 0.0 || !da.norm().is_finite() {
                return None;
            }
            let step = a / da;
            let step = if step.norm() > 0.5 { step * (0.5 / step.norm()) } else { step };
            z -= step;
            if z.im <= 0.0 || !z.re.is_finite() {
                return None;
            }
            a = self.a(z);
            if step.norm() < 1e-15 * (1.0 + z.norm()) {
                break;
            }
        }
        if a.norm() <= EIGENVALUE_TOL {
            Some((z, a.norm()))
        } else {
            None
        }
    }

    /// Zeros of `a` inside the region whose imaginary part exceeds [`ETA_FLOOR`].
    fn newton_zeros(&self, region: &SearchRegion) -> Vec<Complex64> {
        let r = region.resolution;
        let dxi = (region.xi_max - region.xi_min) / r as f64;
        let deta = (region.eta_max - region.eta_min) / r as f64;
        let centers: Vec<Complex64> = (0..r * r)
            .map(|k| {
                let (i, j) = (k % r, k / r);
                Complex64::new(
                    region.xi_min + (i as f64 + 0.5) * dxi,
                    region.eta_min + (j as f64 + 0.5) * deta,
                )
            })
            .collect();
        let mags: Vec<f64> = par::map(&centers, |z| self.a(*z).norm());
        let mut starts = Vec::new();
        for j in 0..r {
            for i in 0..r {
                let v = mags[j * r + i];
                let mut is_min = true;
                for dj in -1i64..=1 {
                    for di in -1i64..=1 {
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if (di, dj) == (0, 0) || ii < 0 || jj < 0 || ii >= r as i64 || jj >= r as i64 {
                            continue;
                        }
                        if mags[jj as usize * r + ii as usize] < v {
                            is_min = false;
                        }
                    }
                }
                if is_min {
                    starts.push(centers[j * r + i]);
                }
            }
        }
        let polished = par::map(&starts, |z| self.newton(*z));
        let mut zeros: Vec<Complex64> = Vec::new();
        for (z, _) in polished.into_iter().flatten() {
            if !region.contains(z) || z.im <= ETA_FLOOR {
                continue;
            }
            if zeros.iter().all(|w| (w - z).norm() > DEDUP_TOL * (1.0 + z.norm())) {
                zeros.push(z);
            }
        }
        zeros.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        zeros
    }

    /// Argument-principle count of zeros of `a` enclosed by the region boundary.
    pub fn winding_number(&self, region: &SearchRegion) -> i64 {
        const PER_SIDE: usize = 32;
        let c = region.corners();
        let pts: Vec<Complex64> = (0..4)
            .flat_map(|s| {
                let (p, q) = (c[s], c[(s + 1) % 4]);
                (0..PER_SIDE).map(move |k| p + (q - p) * (k as f64 / PER_SIDE as f64))
            })
            .collect();
        let vals: Vec<Complex64> = par::map(&pts, |z| self.a(*z));
        let mut total = 0.0;
        for k in 0..pts.len() {
            let k1 = (k + 1) % pts.len();
            total += self.arg_change(pts[k], vals[k], pts[k1], vals[k1], 0);
        }
        (total / (2.0 * PI)).round() as i64
    }

    fn arg_change(&self, z0: Complex64, a0: Complex64, z1: Complex64, a1: Complex64, depth: u32) -> f64 {
        let d = (a1 / a0).arg();
        if d.abs() <= 0.5 || depth >= 40 {
            return d;
        }
        let zm = 0.5 * (z0 + z1);
        let am = self.a(zm);
        self.arg_change(z0, a0, zm, am, depth + 1) + self.arg_change(zm, am, z1, a1, depth + 1)
    }

    pub fn find_eigenvalues(&self, region: &SearchRegion) -> Result<Vec<SpectralPoint>> {
        region.validate()?;
        let winding = self.winding_number(region);
        let mut zeros = self.newton_zeros(region);
        if zeros.len() as i64 != winding {
            let finer = region.with_resolution(region.resolution * 2);
            zeros = self.newton_zeros(&finer);
            if zeros.len() as i64 != winding {
                return Err(Error::CountMismatch { newton: zeros.len(), winding });
            }
        }
        zeros.into_iter().map(SpectralPoint::from_complex).collect()
    }

    fn check_eigenvalue(&self, z: Complex64) -> Result<()> {
        let residual = self.a(z).norm();
        if residual <= EIGENVALUE_TOL {
            Ok(())
        } else {
            Err(Error::NotAnEigenvalue { z, residual })
        }
    }

    fn mid(&self) -> usize {
        self.grid.n / 2
    }

    /// `log c` with `ψ⁻ = c ψ⁺` at the grid midpoint.
    fn log_norming_unchecked(&self, z: Complex64) -> Complex64 {
        let mid = self.mid();
        let mut left = (ZsVector::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), 0.0);
        let mut right = left;
        self.sweep_left(z, |i, m, l| {
            if i == mid {
                left = (m, l);
            }
        });
        self.sweep_right(z, |i, v, l| {
            if i == mid {
                right = (v, l);
            }
        });
        let (m, n) = (left.0, right.0);
        let rho = n.dot(&m) / n.norm_sqr();
        let xm = self.grid.x(mid);
        rho.ln() - 2.0 * Complex64::i() * z * xm + (left.1 - right.1)
    }

    pub fn log_norming(&self, z: SpectralPoint) -> Result<Complex64> {
        self.check_eigenvalue(z.z())?;
        Ok(self.log_norming_unchecked(z.z()))
    }

    pub fn norming_constant(&self, z: SpectralPoint) -> Result<Complex64> {
        self.log_norming(z).map(|l| l.exp())
    }

    /// `L²`-normalized bound state: `ψ⁻` left of the midpoint, `c ψ⁺` right of it.
    pub fn bound_state(&self, z: SpectralPoint) -> Result<ZsVectorField> {
        let zc = z.z();
        self.check_eigenvalue(zc)?;
        let log_c = self.log_norming_unchecked(zc);
        let g = self.grid;
        let mid = self.mid();
        let mut samples = vec![(ZsVector::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)), 0.0); g.n];
        // ψ⁻ = m e^{−izx} e^{λ}
        self.sweep_left(zc, |i, m, l| {
            if i <= mid {
                let e = -Complex64::i() * zc * g.x(i);
                samples[i] = (m.scale(Complex64::from_polar(1.0, e.im)), l + e.re);
            }
        });
        // c ψ⁺ = n e^{izx} e^{λ} c
        self.sweep_right(zc, |i, n, l| {
            if i > mid {
                let e = Complex64::i() * zc * g.x(i) + log_c;
                samples[i] = (n.scale(Complex64::from_polar(1.0, e.im)), l + e.re);
            }
        });
        let mut field = ZsVectorField::new(g, self.t, z, samples)?;
        // unit mantissas, then L² normalization via log-sum-exp
        for i in 0..g.n {
            if let Some((v, l)) = field.normalized(i) {
                field.c1[i] = v.0[0];
                field.c2[i] = v.0[1];
                field.log_scale[i] = l;
            }
        }
        let lmax = field.log_scale.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = field.log_scale.iter().map(|l| (2.0 * (l - lmax)).exp()).sum::<f64>() * g.dx;
        let shift = lmax + 0.5 * sum.ln();
        for l in field.log_scale.iter_mut() {
            *l -= shift;
        }
        Ok(field)
    }
}

pub fn auto_substeps(q: &ComplexField) -> usize {
    ((q.grid.dx * q.max_abs() / 0.05).ceil() as usize).clamp(1, 64)
}

fn rescale(v: &mut ZsVector, log: &mut f64) {
    let m = v.max_abs();
    if m > 1e30 || (m < 1e-30 && m > 0.0) {
        *v = v.scale(Complex64::new(1.0 / m, 0.0));
        *log += m.ln();
    }
}

pub fn scattering_coefficient_a(q: &ComplexField, z: Complex64) -> Result<Complex64> {
    if z.im < 0.0 {
        return Err(Error::InvalidInput(format!("a(z) requires Im z ≥ 0, got {z}")));
    }
    Ok(Scatterer::new(q)?.a(z))
}

pub fn find_eigenvalues(q: &ComplexField, region: &SearchRegion) -> Result<Vec<SpectralPoint>> {
    Scatterer::new(q)?.find_eigenvalues(region)
}

/// Eigenvalues left in `rest` after stripping the solitons of `original`.
pub fn residual_eigenvalues(rest: &ComplexField, original: &ComplexField, region: &SearchRegion) -> Result<Vec<SpectralPoint>> {
    Scatterer::with_edge_scale(rest, original.max_abs())?.find_eigenvalues(region)
}

pub fn winding_number(q: &ComplexField, region: &SearchRegion) -> Result<i64> {
    region.validate()?;
    Ok(Scatterer::new(q)?.winding_number(region))
}

pub fn norming_constant(q: &ComplexField, z: SpectralPoint) -> Result<Complex64> {
    Scatterer::new(q)?.norming_constant(z)
}

pub fn bound_state(q: &ComplexField, z: SpectralPoint) -> Result<ZsVectorField> {
    Scatterer::new(q)?.bound_state(z)
}

/// `Π (z − z_j)/(z − z̄_j)`, the transmission inverse of a reflectionless potential.
pub fn blaschke(z: Complex64, zs: &[SpectralPoint]) -> Complex64 {
    zs.iter().map(|p| (z - p.z()) / (z - p.zbar())).product()
}

mod complex_pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect())
    }
}

mod point_pair {
    use crate::lax::SpectralPoint;
    use serde::{de::Error, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[SpectralPoint], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|p| [p.xi, p.eta]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<SpectralPoint>, D::Error> {
        Vec::<[f64; 2]>::deserialize(d)?
            .into_iter()
            .map(|[xi, eta]| SpectralPoint::new(xi, eta).map_err(D::Error::custom))
            .collect()
    }
}

/// One `(z, a(z))` sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ASample {
    pub z: [f64; 2],
    pub a: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub newton: f64,
    pub eigenvalue: f64,
    pub eta_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            newton: NEWTON_TOL,
            eigenvalue: EIGENVALUE_TOL,
            eta_floor: ETA_FLOOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringData {
    #[serde(with = "point_pair")]
    pub eigenvalues: Vec<SpectralPoint>,
    #[serde(with = "complex_pair")]
    pub norming: Vec<Complex64>,
    #[serde(default)]
    pub a_samples: Vec<ASample>,
    pub grid: Grid,
    pub t: f64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ScatteringData {
    pub fn validate(&self) -> Result<()> {
        if self.eigenvalues.len() != self.norming.len() {
            return Err(Error::InvalidInput(format!(
                "{} eigenvalues but {} norming constants",
                self.eigenvalues.len(),
                self.norming.len()
            )));
        }
        if let Some(p) = self.eigenvalues.iter().find(|p| p.eta <= self.tolerances.eta_floor) {
            return Err(Error::InvalidInput(format!("eigenvalue {:?} below eta_floor", p)));
        }
        Ok(())
    }
}

/// Eigenvalues and norming constants of `q` in `region`, plus `a` on `real_samples` real points in `[ξ_min, ξ_max]`.
pub fn scatter(q: &ComplexField, region: &SearchRegion, real_samples: usize) -> Result<ScatteringData> {
    let sc = Scatterer::new(q)?;
    let eigenvalues = sc.find_eigenvalues(region)?;
    let norming = eigenvalues
        .iter()
        .map(|z| sc.norming_constant(*z))
        .collect::<Result<Vec<_>>>()?;
    let zs: Vec<Complex64> = (0..real_samples)
        .map(|k| {
            let s = if real_samples > 1 { k as f64 / (real_samples - 1) as f64 } else { 0.5 };
            Complex64::new(region.xi_min + s * (region.xi_max - region.xi_min), 0.0)
        })
        .collect();
    let a_samples = par::map(&zs, |z| {
        let a = sc.a(*z);
        ASample { z: [z.re, z.im], a: [a.re, a.im] }
    });
    Ok(ScatteringData {
        eigenvalues,
        norming,
        a_samples,
        grid: q.grid,
        t: q.t,
        tolerances: Tolerances::default(),
    })
}

/// Dictionary between `(x_j, θ_j)` and the norming constant:
/// `log c = 2η·amplitude·x + i(2·phase·θ + 2·galilean·ξ·x + offset) + 4iz²t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormingConvention {
    pub amplitude: f64,
    pub phase: f64,
    pub galilean: f64,
    pub offset: f64,
}

impl Default for NormingConvention {
    /// `c = −exp(−2iz(x − 2zt) − 2iθ)`.
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            phase: -1.0,
            galilean: -1.0,
            offset: PI,
        }
    }
}

impl NormingConvention {
    pub fn log_c(&self, p: &SolitonParams, t: f64) -> Complex64 {
        let z = Complex64::new(p.xi, p.eta);
        let base = Complex64::new(
            2.0 * p.eta * self.amplitude * p.x0,
            2.0 * self.phase * p.theta + 2.0 * self.galilean * p.xi * p.x0 + self.offset,
        );
        base + 4.0 * Complex64::i() * z * z * t
    }

    /// `(x, θ)` with `θ ∈ (−π/2, π/2]`.
    pub fn position_phase(&self, z: SpectralPoint, log_c: Complex64, t: f64) -> (f64, f64) {
        let zc = z.z();
        let u = log_c - 4.0 * Complex64::i() * zc * zc * t;
        let x = u.re / (2.0 * z.eta * self.amplitude);
        let theta = (u.im - self.offset - 2.0 * self.galilean * z.xi * x) / (2.0 * self.phase);
        (x, wrap_half_pi(theta))
    }

    /// Fixes each coefficient by scattering forward-constructed 1-solitons
    /// on `grid` and rounding the measured responses to integers.
    pub fn calibrate(grid: Grid) -> Result<Self> {
        let (xi, eta, delta) = (0.35, 0.6, 0.5);
        let measure = |x0: f64, theta: f64| -> Result<Complex64> {
            let p = SolitonParams::new(xi, eta, x0, theta)?;
            let q = n_soliton(&[p], grid, 0.0)?;
            let sc = Scatterer::new(&q)?;
            let region = SearchRegion::new(xi - 0.5, xi + 0.5, 0.5 * eta, 1.5 * eta)?;
            let z = sc.find_eigenvalues(&region)?;
            let z = *z.first().ok_or_else(|| Error::InsufficientData("calibration soliton not found".into()))?;
            sc.log_norming(z)
        };
        let c0 = measure(0.0, 0.0)?;
        let cx = measure(delta, 0.0)?;
        let ct = measure(0.0, delta)?;
        let amplitude = ((cx.re - c0.re) / (2.0 * eta * delta)).round();
        let phase = (wrap_pi(ct.im - c0.im) / (2.0 * delta)).round();
        let galilean = (wrap_pi(cx.im - c0.im) / (2.0 * xi * delta)).round();
        let offset = c0.im.rem_euclid(2.0 * PI);
        Ok(Self {
            amplitude,
            phase,
            galilean,
            offset,
        })
    }
}

fn wrap_pi(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

/// Representative of `θ mod π` in `(−π/2, π/2]`.
pub fn wrap_half_pi(theta: f64) -> f64 {
    let w = theta - PI * (theta / PI).round();
    if w <= -PI / 2.0 {
        w + PI
    } else {
        w
    }
}

/// Branch of `θ mod π` nearest `reference`.
pub fn nearest_branch(theta: f64, reference: f64) -> f64 {
    reference + wrap_half_pi(theta - reference)
}

pub fn params_from_scattering(data: &ScatteringData) -> Result<Vec<SolitonParams>> {
    params_from_scattering_with(data, &NormingConvention::default())
}

pub fn params_from_scattering_with(data: &ScatteringData, conv: &NormingConvention) -> Result<Vec<SolitonParams>> {
    data.validate()?;
    let zs = &data.eigenvalues;
    for (i, a) in zs.iter().enumerate() {
        for (j, b) in zs.iter().enumerate().skip(i + 1) {
            if (a.z() - b.z()).norm() <= 1e-8 * (1.0 + a.z().norm()) {
                return Err(Error::DegenerateEigenvalues(i, j));
            }
        }
    }
    zs.iter()
        .zip(&data.norming)
        .map(|(z, c)| {
            if !(c.norm() > 0.0) || !c.norm().is_finite() {
                return Err(Error::InvalidInput(format!("unusable norming constant {c}")));
            }
            let (x0, theta) = conv.position_phase(*z, c.ln(), data.t);
            SolitonParams::new(z.xi, z.eta, x0, theta)
        })
        .collect()
}

/// Bound states of every eigenvalue, ready for [`dressing::undress`].
pub fn eigendata(q: &ComplexField, zs: &[SpectralPoint]) -> Result<Vec<ZsVectorField>> {
    let sc = Scatterer::new(q)?;
    let out = par::map(zs, |z| sc.bound_state(*z));
    par::collect_results(out)
}

/// Removes every eigenvalue found in `region` from `q`.
pub fn strip_solitons(q: &ComplexField, region: &SearchRegion) -> Result<(ComplexField, Vec<SpectralPoint>)> {
    let zs = find_eigenvalues(q, region)?;
    if zs.is_empty() {
        return Ok((q.clone(), zs));
    }
    let eig = eigendata(q, &zs)?;
    Ok((dressing::undress(q, &eig)?, zs))
}
