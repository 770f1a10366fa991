//! Zakharov–Shabat Lax pair algebra and the Gramian linear systems behind the
//! dressing transformation.
//!
//! Conventions: `⟨u, v⟩ = ū₁v₁ + ū₂v₂`, `u ⊗ v̄` is the outer product with the
//! second factor conjugated, and seeds `s_k` solve the ZS system at `z̄_k`
//! while the dressed vectors `r_k` solve it at `z_k`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Gramian is treated as singular when `|D| < SINGULAR_RTOL · Π|M_kk|`.
pub const SINGULAR_RTOL: f64 = 1e-12;

/// Point `z = ξ + iη` of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub xi: f64,
    pub eta: f64,
}

impl SpectralPoint {
    pub fn new(xi: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !xi.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidInput(format!(
                "spectral point must lie in the upper half-plane, got {xi} + {eta}i"
            )));
        }
        Ok(Self { xi, eta })
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        Self::new(z.re, z.im)
    }

    #[inline]
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.xi, self.eta)
    }

    #[inline]
    pub fn zbar(&self) -> Complex64 {
        Complex64::new(self.xi, -self.eta)
    }
}

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const SIGMA3: Mat2 = Mat2([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn diag(a: Complex64, d: Complex64) -> Self {
        Mat2([[a, ZERO], [ZERO, d]])
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn det(&self) -> Complex64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, c: Complex64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * c, m[0][1] * c], [m[1][0] * c, m[1][1] * c]])
    }

    pub fn apply(&self, v: ZsVector) -> ZsVector {
        let m = &self.0;
        ZsVector([m[0][0] * v.0[0] + m[0][1] * v.0[1], m[1][0] * v.0[0] + m[1][1] * v.0[1]])
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    /// `exp(Ω)` for traceless Ω, via `cosh κ · I + (sinh κ / κ) · Ω` with `κ² = -det Ω`.
    pub fn exp_traceless(&self) -> Mat2 {
        let k2 = -self.det();
        let (ch, shc) = cosh_sinhc(k2);
        Mat2::IDENTITY.scale(ch) + self.scale(shc)
    }
}

/// `(cosh κ, sinh κ / κ)` as even functions of `κ²`.
fn cosh_sinhc(k2: Complex64) -> (Complex64, Complex64) {
    if k2.norm() < 1e-6 {
        let ch = ONE + k2 / 2.0 + k2 * k2 / 24.0;
        let shc = ONE + k2 / 6.0 + k2 * k2 / 120.0;
        (ch, shc)
    } else {
        let k = k2.sqrt();
        (k.cosh(), k.sinh() / k)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

/// Value of a ℂ²-valued ZS solution at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZsVector(pub [Complex64; 2]);

impl ZsVector {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        ZsVector([a, b])
    }

    /// `⟨self, other⟩ = conj(self)·other`.
    pub fn dot(&self, other: &ZsVector) -> Complex64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn max_abs(&self) -> f64 {
        self.0[0].norm().max(self.0[1].norm())
    }

    pub fn scale(&self, c: Complex64) -> ZsVector {
        ZsVector([self.0[0] * c, self.0[1] * c])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    /// `self ⊗ conj(other)`.
    pub fn outer_conj(&self, other: &ZsVector) -> Mat2 {
        let (a, b) = (&self.0, &other.0);
        Mat2([[a[0] * b[0].conj(), a[0] * b[1].conj()], [a[1] * b[0].conj(), a[1] * b[1].conj()]])
    }

    pub fn dist(&self, other: &ZsVector) -> f64 {
        ((self.0[0] - other.0[0]).norm_sqr() + (self.0[1] - other.0[1]).norm_sqr()).sqrt()
    }
}

/// `Q(q) = [[0, q], [-q̄, 0]]`.
pub fn pauli_q(q: Complex64) -> Mat2 {
    Mat2::new(ZERO, q, -q.conj(), ZERO)
}

/// x-part of the Lax pair, `U = -izσ₃ + Q(q)`.
pub fn lax_u(q: Complex64, z: Complex64) -> Mat2 {
    Mat2::SIGMA3.scale(-I * z) + pauli_q(q)
}

/// t-part of the Lax pair, `V = i(|q|² - 2z²)σ₃ + 2zQ(q) - iQ(q_x)σ₃`.
pub fn lax_v(q: Complex64, qx: Complex64, z: Complex64) -> Mat2 {
    Mat2::SIGMA3.scale(I * (q.norm_sqr() - 2.0 * z * z)) + pauli_q(q).scale(2.0 * z)
        - (pauli_q(qx) * Mat2::SIGMA3).scale(I)
}

/// Gramian `M`, its determinant and cofactors, and the `F`, `Σ` pair of the
/// n-soliton formula, all at one spatial point.
#[derive(Debug, Clone)]
pub struct GramianSystem {
    pub n: usize,
    pub m: CMatrix,
    pub det: Complex64,
    /// `cof[(j, k)]` is the cofactor of `M_{j,k}`.
    pub cof: CMatrix,
    /// `F_{j,k} = s_{j,1} conj(s_{k,2})`.
    pub f: CMatrix,
    /// `Σ = -Σ_{j,k} D_{j,k} F_{j,k}`, so that `q - q0 = 2Σ/D`.
    pub sigma: Complex64,
}

impl GramianSystem {
    /// Dressed vectors from the explicit cofactor formula `r_k = Σ_j D_{j,k}/D s_j`.
    pub fn r_by_cofactors(&self, svals: &[ZsVector]) -> Vec<ZsVector> {
        (0..self.n)
            .map(|k| {
                let mut r = ZsVector::new(ZERO, ZERO);
                for (j, s) in svals.iter().enumerate() {
                    let w = self.cof[(j, k)] / self.det;
                    r.0[0] += w * s.0[0];
                    r.0[1] += w * s.0[1];
                }
                r
            })
            .collect()
    }
}

fn check_inputs(vals: &[ZsVector], zs: &[SpectralPoint]) -> Result<()> {
    if vals.len() != zs.len() {
        return Err(Error::InvalidInput(format!(
            "{} vectors for {} spectral points",
            vals.len(),
            zs.len()
        )));
    }
    if vals.is_empty() {
        return Err(Error::InvalidInput("empty soliton set".into()));
    }
    for (i, a) in zs.iter().enumerate() {
        for (j, b) in zs.iter().enumerate().skip(i + 1) {
            if (a.z() - b.z()).norm() <= 1e-12 * (1.0 + a.z().norm()) {
                return Err(Error::DegenerateParams(i, j));
            }
        }
    }
    Ok(())
}

/// `M_{k,j} = -i⟨s_j, s_k⟩ / (z̄_k - z_j)`.
pub fn gramian_matrix(svals: &[ZsVector], zs: &[SpectralPoint]) -> CMatrix {
    CMatrix::from_fn(svals.len(), |k, j| {
        -I * svals[j].dot(&svals[k]) / (zs[k].zbar() - zs[j].z())
    })
}

fn cofactors(m: &CMatrix, det: Complex64) -> CMatrix {
    let n = m.dim();
    if n <= 3 {
        CMatrix::from_fn(n, |j, k| {
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            if n == 1 {
                ONE
            } else {
                m.minor(j, k) * sign
            }
        })
    } else {
        // C = D · (M⁻¹)ᵀ
        m.lu().inverse().transpose().scale(det)
    }
}

fn singular(m: &CMatrix, det: Complex64) -> bool {
    !(det.norm() > 0.0 && det.norm() >= SINGULAR_RTOL * m.diag_product_abs()) || !det.norm().is_finite()
}

pub fn gramian(svals: &[ZsVector], zs: &[SpectralPoint]) -> Result<GramianSystem> {
    check_inputs(svals, zs)?;
    let n = svals.len();
    let m = gramian_matrix(svals, zs);
    let det = if n <= 3 { m.det_expansion() } else { m.lu().det() };
    if singular(&m, det) {
        return Err(Error::SingularGramian { index: None });
    }
    let cof = cofactors(&m, det);
    let f = CMatrix::from_fn(n, |j, k| svals[j].0[0] * svals[k].0[1].conj());
    let mut sigma = ZERO;
    for j in 0..n {
        for k in 0..n {
            sigma -= cof[(j, k)] * f[(j, k)];
        }
    }
    Ok(GramianSystem { n, m, det, cof, f, sigma })
}

fn solve_vectors(a: &CMatrix, rhs: &[ZsVector]) -> Result<Vec<ZsVector>> {
    let lu = a.lu();
    if lu.is_singular() || singular(a, lu.det()) {
        return Err(Error::SingularGramian { index: None });
    }
    let c0: Vec<Complex64> = rhs.iter().map(|v| v.0[0]).collect();
    let c1: Vec<Complex64> = rhs.iter().map(|v| v.0[1]).collect();
    let x0 = lu.solve(&c0);
    let x1 = lu.solve(&c1);
    Ok(x0.into_iter().zip(x1).map(|(a, b)| ZsVector::new(a, b)).collect())
}

/// Solves `i s_k = Σ_j ⟨s_j, s_k⟩/(z̄_k - z_j) r_j`, i.e. `M r = s`, by pivoted LU.
pub fn solve_r_from_s(svals: &[ZsVector], zs: &[SpectralPoint]) -> Result<Vec<ZsVector>> {
    check_inputs(svals, zs)?;
    solve_vectors(&gramian_matrix(svals, zs), svals)
}

/// Solves the inverse system `i r_k = Σ_j ⟨r_j, r_k⟩/(z̄_j - z_k) s_j`.
pub fn solve_s_from_r(rvals: &[ZsVector], zs: &[SpectralPoint]) -> Result<Vec<ZsVector>> {
    check_inputs(rvals, zs)?;
    let n = rvals.len();
    let a = CMatrix::from_fn(n, |k, j| rvals[j].dot(&rvals[k]) / (zs[j].zbar() - zs[k].z()));
    let rhs: Vec<ZsVector> = rvals.iter().map(|r| r.scale(I)).collect();
    solve_vectors(&a, &rhs)
}

fn check_pole(z: Complex64, pole: Complex64) -> Result<()> {
    if (z - pole).norm() <= 1e-10 * (1.0 + pole.norm()) {
        Err(Error::PoleEvaluation { z })
    } else {
        Ok(())
    }
}

/// Dressing factor `χ(z) = I + Σ_k i r_k ⊗ s̄_k / (z - z_k)` at one point.
pub fn build_chi(
    z: Complex64,
    rvals: &[ZsVector],
    svals: &[ZsVector],
    zs: &[SpectralPoint],
) -> Result<Mat2> {
    let mut chi = Mat2::IDENTITY;
    for ((r, s), p) in rvals.iter().zip(svals).zip(zs) {
        check_pole(z, p.z())?;
        check_pole(z, p.zbar())?;
        chi = chi + r.outer_conj(s).scale(I / (z - p.z()));
    }
    Ok(chi)
}

/// `χ⁺(z) = I - Σ_k i s_k ⊗ r̄_k / (z - z̄_k)`, which equals `χ(z̄)^†`.
pub fn build_chi_adjoint(
    z: Complex64,
    rvals: &[ZsVector],
    svals: &[ZsVector],
    zs: &[SpectralPoint],
) -> Result<Mat2> {
    let mut chi = Mat2::IDENTITY;
    for ((r, s), p) in rvals.iter().zip(svals).zip(zs) {
        check_pole(z, p.z())?;
        check_pole(z, p.zbar())?;
        chi = chi - s.outer_conj(r).scale(I / (z - p.zbar()));
    }
    Ok(chi)
}
