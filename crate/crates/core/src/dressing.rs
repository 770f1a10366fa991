//! Dressing and undressing of sampled fields.
//!
//! ZS vectors grow like `e^{±η x}`, so fields store a mantissa and a real
//! log-scale per sample: the physical value is `mantissa · e^{log_scale}`.
//! Rescaling a seed `s_k → c s_k` maps `r_k → r_k / c̄`, leaving every
//! `r_k ⊗ s̄_k` unchanged, so the Gramian is always assembled from
//! per-sample normalized mantissas.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ComplexField, Grid};
use crate::forms::SolitonParams;
use crate::lax::{self, lax_u, SpectralPoint, ZsVector};
use crate::linalg::CMatrix;
use crate::par;
use crate::spectral::{fd6_second, fd6_at, Spectral};

/// Default small-data radius for Jost seeds, in `L²`.
pub const JOST_EPS0: f64 = 0.1;
/// Allowed `|q0(edge)| / max|q0|` for Jost seeds.
pub const JOST_EDGE_TOL: f64 = 1e-8;
/// Largest ZS residual accepted for an eigenfunction passed to [`undress`].
pub const EIGENFUNCTION_TOL: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Sampled ℂ²-valued solution of the ZS system at one spectral point.
#[derive(Debug, Clone, PartialEq)]
pub struct ZsVectorField {
    pub grid: Grid,
    pub t: f64,
    pub point: SpectralPoint,
    pub c1: Vec<Complex64>,
    pub c2: Vec<Complex64>,
    pub log_scale: Vec<f64>,
}

impl ZsVectorField {
    pub fn new(
        grid: Grid,
        t: f64,
        point: SpectralPoint,
        samples: Vec<(ZsVector, f64)>,
    ) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::InvalidInput(format!(
                "expected {} samples, got {}",
                grid.n,
                samples.len()
            )));
        }
        if samples.iter().any(|(v, l)| !v.is_finite() || !l.is_finite()) {
            return Err(Error::InvalidInput("non-finite ZS vector sample".into()));
        }
        let mut c1 = Vec::with_capacity(grid.n);
        let mut c2 = Vec::with_capacity(grid.n);
        let mut log_scale = Vec::with_capacity(grid.n);
        for (v, l) in samples {
            c1.push(v.0[0]);
            c2.push(v.0[1]);
            log_scale.push(l);
        }
        Ok(Self { grid, t, point, c1, c2, log_scale })
    }

    pub fn len(&self) -> usize {
        self.c1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c1.is_empty()
    }

    #[inline]
    pub fn mantissa(&self, i: usize) -> ZsVector {
        ZsVector::new(self.c1[i], self.c2[i])
    }

    /// Physical value; may overflow far from the soliton core.
    pub fn value(&self, i: usize) -> ZsVector {
        self.mantissa(i).scale(Complex64::new(self.log_scale[i].exp(), 0.0))
    }

    /// Unit-norm direction and the log of the physical norm at sample `i`.
    pub fn normalized(&self, i: usize) -> Option<(ZsVector, f64)> {
        let m = self.mantissa(i);
        let nrm = m.norm_sqr().sqrt();
        if nrm > 0.0 && nrm.is_finite() {
            Some((m.scale(Complex64::new(1.0 / nrm, 0.0)), self.log_scale[i] + nrm.ln()))
        } else {
            None
        }
    }

    /// Log of the largest physical magnitude on the grid.
    pub fn log_max(&self) -> f64 {
        (0..self.len())
            .filter_map(|i| self.normalized(i).map(|(_, l)| l))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Separable Jost form `s = E·f − E⁻¹·g` of a seed over a background `q0`.
#[derive(Debug, Clone)]
pub struct JostPair {
    pub f: ZsVectorField,
    pub g: ZsVectorField,
}

fn points_of(params: &[SolitonParams]) -> Result<Vec<SpectralPoint>> {
    let pts = params.iter().map(|p| p.point()).collect::<Result<Vec<_>>>()?;
    for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate().skip(i + 1) {
            if (a.z() - b.z()).norm() <= 1e-12 * (1.0 + a.z().norm()) {
                return Err(Error::DegenerateParams(i, j));
            }
        }
    }
    Ok(pts)
}

/// Exponent `−i z̄ (x − x_k) − 2i z̄² t + iθ_k` of the vacuum seed.
fn seed_exponent(p: &SolitonParams, x: f64, t: f64) -> Complex64 {
    let w = Complex64::new(p.xi, -p.eta);
    let i = Complex64::i();
    -i * w * (x - p.x0) - 2.0 * i * w * w * t + i * p.theta
}

/// Vacuum seed `(E, −E⁻¹)` at one point, as (mantissa, log-scale).
pub fn vacuum_vector(p: &SolitonParams, x: f64, t: f64) -> (ZsVector, f64) {
    let a = seed_exponent(p, x, t);
    let lam = a.re.abs();
    (ZsVector::new((a - lam).exp(), -(-a - lam).exp()), lam)
}

pub fn vacuum_seed(params: &[SolitonParams], t: f64, grid: Grid) -> Result<Vec<ZsVectorField>> {
    let pts = points_of(params)?;
    params
        .iter()
        .zip(pts)
        .map(|(p, pt)| {
            let samples = grid.points().map(|x| vacuum_vector(p, x, t)).collect();
            ZsVectorField::new(grid, t, pt, samples)
        })
        .collect()
}

/// `f` and `g` of the separable form for each spectral point. `f` is fixed by
/// `f → (1, 0)` at the left edge and `g → (0, 1)` at the right edge; each is
/// integrated with RK4 in the direction in which its growing mode decays.
pub fn jost_pairs(q0: &ComplexField, params: &[SolitonParams]) -> Result<Vec<JostPair>> {
    let pts = points_of(params)?;
    let norm = crate::evolve::l2_norm(q0);
    if norm > JOST_EPS0 {
        return Err(Error::SeedTooLarge(format!(
            "‖q0‖ = {norm:.3e} exceeds {JOST_EPS0}"
        )));
    }
    q0.check_edge_decay(JOST_EDGE_TOL)?;
    let grid = q0.grid;
    let sp = Spectral::new(grid.n, grid.length());
    let mid = sp.shifted(&q0.values, 0.5 * grid.dx);
    let q = &q0.values;
    let n = grid.n;
    let h = grid.dx;

    let out = par::map(&pts, |pt| -> Result<JostPair> {
        let w = pt.zbar();
        let iw2 = Complex64::new(0.0, 2.0) * w;

        // f1' = q0 f2, f2' = 2iw f2 − q̄0 f1, integrated from the right edge
        let rhs_f = |qv: Complex64, f: [Complex64; 2]| [qv * f[1], iw2 * f[1] - qv.conj() * f[0]];
        let mut f = vec![[ZERO; 2]; n];
        f[n - 1] = [Complex64::new(1.0, 0.0), ZERO];
        for i in (0..n - 1).rev() {
            f[i] = rk4(rhs_f, f[i + 1], q[i + 1], mid[i], q[i], -h);
        }
        let nf = f[0][0];
        check_normalization(nf, "f")?;
        let f: Vec<_> = f.iter().map(|v| (ZsVector::new(v[0] / nf, v[1] / nf), 0.0)).collect();

        // g1' = −2iw g1 + q0 g2, g2' = −q̄0 g1, integrated from the left edge
        let rhs_g = |qv: Complex64, g: [Complex64; 2]| [-iw2 * g[0] + qv * g[1], -qv.conj() * g[0]];
        let mut g = vec![[ZERO; 2]; n];
        g[0] = [ZERO, Complex64::new(1.0, 0.0)];
        for i in 0..n - 1 {
            g[i + 1] = rk4(rhs_g, g[i], q[i], mid[i], q[i + 1], h);
        }
        let ng = g[n - 1][1];
        check_normalization(ng, "g")?;
        let g: Vec<_> = g.iter().map(|v| (ZsVector::new(v[0] / ng, v[1] / ng), 0.0)).collect();

        Ok(JostPair {
            f: ZsVectorField::new(grid, q0.t, *pt, f)?,
            g: ZsVectorField::new(grid, q0.t, *pt, g)?,
        })
    });
    par::collect_results(out)
}

fn check_normalization(v: Complex64, which: &str) -> Result<()> {
    let m = v.norm();
    if (0.5..=2.0).contains(&m) {
        Ok(())
    } else {
        Err(Error::SeedTooLarge(format!(
            "{which} boundary normalization factor {m:.3e} outside [0.5, 2]"
        )))
    }
}

fn rk4(
    rhs: impl Fn(Complex64, [Complex64; 2]) -> [Complex64; 2],
    y: [Complex64; 2],
    q_start: Complex64,
    q_mid: Complex64,
    q_end: Complex64,
    h: f64,
) -> [Complex64; 2] {
    let add = |a: [Complex64; 2], b: [Complex64; 2], s: f64| [a[0] + b[0] * s, a[1] + b[1] * s];
    let k1 = rhs(q_start, y);
    let k2 = rhs(q_mid, add(y, k1, 0.5 * h));
    let k3 = rhs(q_mid, add(y, k2, 0.5 * h));
    let k4 = rhs(q_end, add(y, k3, h));
    let s = h / 6.0;
    [
        y[0] + (k1[0] + k2[0] * 2.0 + k3[0] * 2.0 + k4[0]) * s,
        y[1] + (k1[1] + k2[1] * 2.0 + k3[1] * 2.0 + k4[1]) * s,
    ]
}

/// Seeds `s_j = E_j f_j − E_j⁻¹ g_j` over the background `q0`, with the phase
/// `E_j` taken from the target parameters at time `t`.
pub fn jost_seed(q0: &ComplexField, params: &[SolitonParams], t: f64) -> Result<Vec<ZsVectorField>> {
    let pairs = jost_pairs(q0, params)?;
    let grid = q0.grid;
    params
        .iter()
        .zip(&pairs)
        .map(|(p, jp)| {
            let samples = grid
                .points()
                .enumerate()
                .map(|(i, x)| {
                    let a = seed_exponent(p, x, t);
                    let lam = a.re.abs();
                    let (ep, em) = ((a - lam).exp(), (-a - lam).exp());
                    let (f, g) = (jp.f.mantissa(i), jp.g.mantissa(i));
                    (ZsVector::new(ep * f.0[0] - em * g.0[0], ep * f.0[1] - em * g.0[1]), lam)
                })
                .collect();
            ZsVectorField::new(grid, t, jp.f.point, samples)
        })
        .collect()
}

/// Pointwise dressing output: normalized seed directions `s`, matching `r`
/// (so that `r_k ⊗ s̄_k` is the physical product), the potential and `log D`.
#[derive(Debug, Clone)]
pub struct PointDressing {
    pub q: Complex64,
    pub log_det: f64,
    pub s: Vec<ZsVector>,
    pub r: Vec<ZsVector>,
    /// Log-scales `λ_k` with physical `s_k = s · e^{λ_k}` and `r_k = r · e^{−λ_k}`.
    pub log_scale: Vec<f64>,
}

/// Dresses one point from seed (mantissa, log-scale) pairs.
pub fn dress_point(
    q0: Complex64,
    seeds: &[(ZsVector, f64)],
    zs: &[SpectralPoint],
) -> Result<PointDressing> {
    let mut s = Vec::with_capacity(seeds.len());
    let mut lam = Vec::with_capacity(seeds.len());
    for (m, l) in seeds {
        let nrm = m.norm_sqr().sqrt();
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(Error::SingularGramian { index: None });
        }
        s.push(m.scale(Complex64::new(1.0 / nrm, 0.0)));
        lam.push(l + nrm.ln());
    }
    let m = lax::gramian_matrix(&s, zs);
    let lu = m.lu();
    let det = lu.det();
    if lu.is_singular() || !(det.norm() > 0.0 && det.norm() >= lax::SINGULAR_RTOL * m.diag_product_abs()) {
        return Err(Error::SingularGramian { index: None });
    }
    let c0: Vec<Complex64> = s.iter().map(|v| v.0[0]).collect();
    let c1: Vec<Complex64> = s.iter().map(|v| v.0[1]).collect();
    let (x0, x1) = (lu.solve(&c0), lu.solve(&c1));
    let r: Vec<ZsVector> = x0.into_iter().zip(x1).map(|(a, b)| ZsVector::new(a, b)).collect();
    let mut q = q0;
    for (rk, sk) in r.iter().zip(&s) {
        q += -rk.0[0] * sk.0[1].conj() - rk.0[1].conj() * sk.0[0];
    }
    let log_det = det.norm().ln() + 2.0 * lam.iter().sum::<f64>();
    Ok(PointDressing { q, log_det, s, r, log_scale: lam })
}

/// Vacuum dressing at a single `(x, t)`.
pub fn dress_vacuum_at(params: &[SolitonParams], x: f64, t: f64) -> Result<PointDressing> {
    let zs = points_of(params)?;
    let seeds: Vec<_> = params.iter().map(|p| vacuum_vector(p, x, t)).collect();
    dress_point(Complex64::new(0.0, 0.0), &seeds, &zs)
}

/// Dressed potential together with `log D` and the dressed vectors `r_k`.
#[derive(Debug, Clone)]
pub struct Dressing {
    pub q: ComplexField,
    pub log_det: Vec<f64>,
    pub r: Vec<ZsVectorField>,
}

fn check_seeds(grid: &Grid, seeds: &[ZsVectorField]) -> Result<Vec<SpectralPoint>> {
    if seeds.is_empty() {
        return Err(Error::InvalidInput("no seeds".into()));
    }
    for s in seeds {
        grid.check_matches(&s.grid)?;
    }
    let zs: Vec<SpectralPoint> = seeds.iter().map(|s| s.point).collect();
    for (i, a) in zs.iter().enumerate() {
        for (j, b) in zs.iter().enumerate().skip(i + 1) {
            if (a.z() - b.z()).norm() <= 1e-12 * (1.0 + a.z().norm()) {
                return Err(Error::DegenerateParams(i, j));
            }
        }
    }
    Ok(zs)
}

pub fn dress_detailed(q0: &ComplexField, seeds: &[ZsVectorField]) -> Result<Dressing> {
    let zs = check_seeds(&q0.grid, seeds)?;
    let grid = q0.grid;
    let pts = par::map_indexed(grid.n, |i| {
        let sv: Vec<_> = seeds.iter().map(|s| (s.mantissa(i), s.log_scale[i])).collect();
        dress_point(q0.values[i], &sv, &zs).map_err(|e| match e {
            Error::SingularGramian { .. } => Error::SingularGramian { index: Some(i) },
            e => e,
        })
    });
    let pts = par::collect_results(pts)?;
    let q = ComplexField::new(grid, q0.t, pts.iter().map(|p| p.q).collect())?;
    let log_det = pts.iter().map(|p| p.log_det).collect();
    let r = zs
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let samples = pts.iter().map(|p| (p.r[k], -p.log_scale[k])).collect();
            ZsVectorField::new(grid, q0.t, *z, samples)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dressing { q, log_det, r })
}

/// `q = q0 − (2/D) Σ_{j,k} D_{j,k} s_{j,1} s̄_{k,2}`, evaluated by pivoted solves.
pub fn dress(q0: &ComplexField, seeds: &[ZsVectorField]) -> Result<ComplexField> {
    dress_detailed(q0, seeds).map(|d| d.q)
}

/// `max | |q|² − |q0|² − ∂ₓ² log D |` over interior points, with a
/// sixth-order centered second difference.
pub fn modulus_identity_residual(q: &ComplexField, q0: &ComplexField, log_det: &[f64]) -> Result<f64> {
    q.grid.check_matches(&q0.grid)?;
    if log_det.len() != q.len() {
        return Err(Error::GridMismatch(format!(
            "log D has {} samples, field has {}",
            log_det.len(),
            q.len()
        )));
    }
    let dx = q.grid.dx;
    Ok((3..q.len() - 3)
        .map(|i| {
            (q.values[i].norm_sqr() - q0.values[i].norm_sqr() - fd6_second(log_det, i, dx)).abs()
        })
        .fold(0.0, f64::max))
}

/// ZS residual `|∂ₓv − U(q, z)v|` of a sampled solution, in relative terms.
///
/// Fields that decay at both edges (bound states) are differentiated
/// spectrally and measured against their supremum. Other fields (seeds, Jost
/// factors) use a sixth-order difference in the local scale of each sample
/// and are measured per sample. Seeds solve the system at `z̄_k`, dressed and
/// bound-state vectors at `z_k`.
pub fn zs_residual(v: &ZsVectorField, q: &ComplexField, z: Complex64) -> Result<f64> {
    v.grid.check_matches(&q.grid)?;
    let n = v.len();
    if n < 7 {
        return Ok(0.0);
    }
    let lmax = v.log_max();
    if lmax.is_finite() {
        let phys: Vec<ZsVector> = (0..n)
            .map(|i| v.mantissa(i).scale(Complex64::new((v.log_scale[i] - lmax).exp(), 0.0)))
            .collect();
        let sup = phys.iter().map(|p| p.norm_sqr()).fold(0.0, f64::max).sqrt();
        let edge = phys[0].norm_sqr().max(phys[n - 1].norm_sqr()).sqrt();
        if sup > 0.0 && edge <= 1e-12 * sup {
            let sp = Spectral::new(n, v.grid.length());
            let d1 = sp.derivative(&phys.iter().map(|p| p.0[0]).collect::<Vec<_>>());
            let d2 = sp.derivative(&phys.iter().map(|p| p.0[1]).collect::<Vec<_>>());
            let worst = (0..n)
                .map(|i| {
                    let um = lax_u(q.values[i], z).apply(phys[i]);
                    ZsVector::new(d1[i] - um.0[0], d2[i] - um.0[1]).norm_sqr().sqrt()
                })
                .fold(0.0, f64::max);
            return Ok(worst / sup);
        }
    }
    let dx = v.grid.dx;
    let res = par::map_indexed(n - 6, |j| {
        let i = j + 3;
        let li = v.log_scale[i];
        let d1 = fd6_at(|k| v.c1[k] * (v.log_scale[k] - li).exp(), i, dx);
        let d2 = fd6_at(|k| v.c2[k] * (v.log_scale[k] - li).exp(), i, dx);
        let m = v.mantissa(i);
        let um = lax_u(q.values[i], z).apply(m);
        let r = ZsVector::new(d1 - um.0[0], d2 - um.0[1]);
        let nrm = m.norm_sqr().sqrt();
        if nrm > 0.0 {
            r.norm_sqr().sqrt() / nrm
        } else {
            0.0
        }
    });
    Ok(res.into_iter().fold(0.0, f64::max))
}

/// Removes the bound states carried by `eigen` from `q`:
/// `q̃0 = q + Σ_k (r_{k,1} s̄_{k,2} + s_{k,1} r̄_{k,2})` with `s` from the inverse linear system.
pub fn undress(q: &ComplexField, eigen: &[ZsVectorField]) -> Result<ComplexField> {
    let zs = check_seeds(&q.grid, eigen)?;
    for (index, r) in eigen.iter().enumerate() {
        let residual = zs_residual(r, q, r.point.z())?;
        if !(residual <= EIGENFUNCTION_TOL) {
            return Err(Error::NotAnEigenfunction { index, residual });
        }
    }
    let vals = par::map_indexed(q.len(), |i| -> Result<Complex64> {
        let r = eigen
            .iter()
            .map(|f| f.normalized(i).map(|(v, _)| v).ok_or(Error::SingularGramian { index: Some(i) }))
            .collect::<Result<Vec<_>>>()?;
        let s = lax::solve_s_from_r(&r, &zs).map_err(|e| match e {
            Error::SingularGramian { .. } => Error::SingularGramian { index: Some(i) },
            e => e,
        })?;
        let mut v = q.values[i];
        for (rk, sk) in r.iter().zip(&s) {
            v += rk.0[0] * sk.0[1].conj() + sk.0[0] * rk.0[1].conj();
        }
        Ok(v)
    });
    ComplexField::new(q.grid, q.t, par::collect_results(vals)?)
}

/// `Σ_k 2 Re⟨s_k, r_k⟩` at one point, equal to `4 Σ η_k`.
pub fn trace_sum(d: &PointDressing) -> f64 {
    d.r.iter().zip(&d.s).map(|(r, s)| 2.0 * s.dot(r).re).sum()
}

/// `Σ_k (r_{k,1}s̄_{k,1} + c.c. − r_{k,2}s̄_{k,2} − c.c.)` at one point, equal to `−2 ∂ₓ log D`.
pub fn log_det_sum(d: &PointDressing) -> f64 {
    d.r.iter()
        .zip(&d.s)
        .map(|(r, s)| 2.0 * ((r.0[0] * s.0[0].conj()).re - (r.0[1] * s.0[1].conj()).re))
        .sum()
}

/// `Σ_k r_k ⊗ s̄_k` at one point.
pub fn residue_sum(d: &PointDressing) -> CMatrix {
    let mut m = CMatrix::zeros(2);
    for (r, s) in d.r.iter().zip(&d.s) {
        let o = r.outer_conj(s);
        for a in 0..2 {
            for b in 0..2 {
                m[(a, b)] += o.0[a][b];
            }
        }
    }
    m
}
