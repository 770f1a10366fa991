//! Orbital-stability experiments: perturb a multi-soliton, recover the
//! nearby soliton parameters by scattering, evolve, and measure the `L²`
//! distance to the closed-form solution with the recovered parameters.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dressing;
use crate::error::{Error, Result};
use crate::evolve::{evolve, l2_norm, weighted_norm, EvolveConfig};
use crate::field::ComplexField;
use crate::forms::{n_soliton, SolitonParams};
use crate::par;
use crate::scattering::{self, nearest_branch, SearchRegion};

/// Largest perturbation size accepted by [`run_experiment`].
pub const MAX_EPSILON: f64 = 0.05;

fn default_width() -> f64 {
    1.0
}

fn default_weight() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_modes() -> usize {
    16
}

fn default_delta() -> f64 {
    1e-3
}

/// Profile of the perturbation before rescaling to size `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Shape {
    /// `e^{iφ} exp(−(x − c)²/w²)`.
    Gaussian {
        #[serde(default)]
        center: f64,
        #[serde(default = "default_width")]
        width: f64,
        #[serde(default)]
        phase: f64,
    },
    /// Random Fourier modes with `|k| ∈ [k_min, k_max]` under a Gaussian envelope.
    RandomBand {
        #[serde(default)]
        center: f64,
        #[serde(default = "default_width")]
        width: f64,
        k_min: f64,
        k_max: f64,
        #[serde(default = "default_modes")]
        modes: usize,
    },
    /// `q^S(ξ_j ± δ) − q^S`: moves paired velocities apart, alternating sign per soliton.
    XiSplit {
        #[serde(default = "default_delta")]
        delta: f64,
    },
}

impl Default for Shape {
    fn default() -> Self {
        Shape::Gaussian {
            center: 0.0,
            width: default_width(),
            phase: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationConfig {
    #[serde(default)]
    pub shape: Shape,
    pub epsilon: f64,
    #[serde(default)]
    pub seed: u64,
    /// Exponent `s` of the weighted norm `‖⟨x⟩^s ·‖_{L²}`.
    #[serde(default = "default_weight")]
    pub weight: f64,
}

impl PerturbationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidInput(format!("epsilon must be ≥ 0, got {}", self.epsilon)));
        }
        if !(self.weight > 0.5) || !self.weight.is_finite() {
            return Err(Error::InvalidInput(format!("weight exponent must exceed 1/2, got {}", self.weight)));
        }
        match &self.shape {
            Shape::Gaussian { width, .. } if !(*width > 0.0) => {
                Err(Error::InvalidInput("gaussian width must be positive".into()))
            }
            Shape::RandomBand { width, k_min, k_max, modes, .. }
                if !(*width > 0.0) || !(k_min <= k_max) || *k_min < 0.0 || *modes == 0 =>
            {
                Err(Error::InvalidInput("malformed random-band perturbation".into()))
            }
            Shape::XiSplit { delta } if !(*delta > 0.0) => {
                Err(Error::InvalidInput("xi-split delta must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub base: Vec<SolitonParams>,
    pub perturbation: PerturbationConfig,
    pub evolve: EvolveConfig,
    pub search: SearchRegion,
    /// Comparison times; every `0.5` up to `evolve.t_end` when empty.
    #[serde(default)]
    pub sample_times: Vec<f64>,
    /// Strip the recovered solitons from the perturbed data and record the residual.
    #[serde(default = "default_true")]
    pub undress: bool,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base.is_empty() {
            return Err(Error::InvalidInput("base soliton list is empty".into()));
        }
        for p in &self.base {
            p.validate()?;
        }
        self.perturbation.validate()?;
        if self.perturbation.epsilon > MAX_EPSILON {
            return Err(Error::InvalidInput(format!(
                "epsilon {} exceeds the small-data limit {MAX_EPSILON}",
                self.perturbation.epsilon
            )));
        }
        self.evolve.validate()?;
        self.search.validate()?;
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        if !self.sample_times.is_empty() {
            return self.sample_times.clone();
        }
        let steps = (self.evolve.t_end / 0.5 + 1e-9).floor() as usize;
        let mut t: Vec<f64> = (0..=steps).map(|k| 0.5 * k as f64).collect();
        if self.evolve.t_end - t[t.len() - 1] > 1e-9 {
            t.push(self.evolve.t_end);
        }
        t
    }
}

fn shape_field(qs: &ComplexField, base: &[SolitonParams], cfg: &PerturbationConfig) -> Result<ComplexField> {
    let grid = qs.grid;
    match &cfg.shape {
        Shape::Gaussian { center, width, phase } => Ok(ComplexField::from_fn(grid, qs.t, |x| {
            Complex64::from_polar((-((x - center) / width).powi(2)).exp(), *phase)
        })),
        Shape::RandomBand { center, width, k_min, k_max, modes } => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let comps: Vec<(f64, Complex64)> = (0..*modes)
                .map(|_| {
                    let k = rng.gen_range(*k_min..=*k_max) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    let amp = Complex64::from_polar(rng.gen::<f64>(), 2.0 * PI * rng.gen::<f64>());
                    (k, amp)
                })
                .collect();
            Ok(ComplexField::from_fn(grid, qs.t, |x| {
                let env = (-((x - center) / width).powi(2)).exp();
                comps.iter().map(|(k, a)| a * Complex64::from_polar(env, k * x)).sum()
            }))
        }
        Shape::XiSplit { delta } => {
            let moved: Vec<SolitonParams> = base
                .iter()
                .enumerate()
                .map(|(j, p)| SolitonParams {
                    xi: p.xi + if j % 2 == 0 { *delta } else { -*delta },
                    ..*p
                })
                .collect();
            n_soliton(&moved, grid, qs.t)?.sub(qs)
        }
    }
}

/// `q0 = qS + ε·δ/‖δ‖_{L^{2,s}}` for the configured profile `δ`.
pub fn perturb(qs: &ComplexField, base: &[SolitonParams], cfg: &PerturbationConfig) -> Result<ComplexField> {
    cfg.validate()?;
    if cfg.epsilon == 0.0 {
        return Ok(qs.clone());
    }
    let delta = shape_field(qs, base, cfg)?;
    let norm = weighted_norm(&delta, cfg.weight)?;
    if !(norm > 0.0) {
        return Err(Error::InvalidInput("perturbation profile vanishes on the grid".into()));
    }
    let scale = cfg.epsilon / norm;
    let values = qs.values.iter().zip(&delta.values).map(|(a, d)| a + d * scale).collect();
    ComplexField::new(qs.grid, qs.t, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSample {
    pub t: f64,
    pub distance: f64,
    pub l2_of_q: f64,
    pub boundary_level: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub epsilon: f64,
    pub base: Vec<SolitonParams>,
    pub recovered: Vec<SolitonParams>,
    /// Max over solitons and components of `|(ξ', η', x', θ') − (ξ, η, x, θ)|`.
    pub param_deviation: f64,
    pub distance_series: Vec<DistanceSample>,
    pub sup_distance: f64,
    /// `sup_distance / ε`, or 0 for `ε = 0`.
    pub constant_estimate: f64,
    /// `param_deviation / ε`, or 0 for `ε = 0`.
    pub param_constant: f64,
    /// `‖q̃0‖_{L²}` after stripping the recovered solitons.
    pub residual_norm: Option<f64>,
    /// Eigenvalues found in the search region after stripping.
    pub residual_eigenvalues: Option<usize>,
    pub l2_drift: f64,
}

impl StabilityReport {
    /// Rows `t,distance,l2_of_q,boundary_level`.
    pub fn series_csv(&self) -> String {
        let mut out = String::from("t,distance,l2_of_q,boundary_level\n");
        for s in &self.distance_series {
            out.push_str(&format!("{:?},{:?},{:?},{:?}\n", s.t, s.distance, s.l2_of_q, s.boundary_level));
        }
        out
    }

    /// Envelope centers of the recovered solitons at time `t`.
    pub fn recovered_centers(&self, t: f64) -> Vec<f64> {
        self.recovered.iter().map(|p| p.center(t)).collect()
    }
}

/// Pairs each base soliton with the nearest unused recovered eigenvalue and
/// moves every recovered phase onto the branch nearest its base phase.
fn match_to_base(base: &[SolitonParams], found: &[SolitonParams]) -> Result<Vec<SolitonParams>> {
    if found.len() != base.len() {
        return Err(Error::InsufficientData(format!(
            "recovered {} solitons, expected {}",
            found.len(),
            base.len()
        )));
    }
    let mut used = vec![false; found.len()];
    let mut out = Vec::with_capacity(base.len());
    for b in base {
        let (k, _) = found
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, f)| (k, (f.xi - b.xi).hypot(f.eta - b.eta)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("counts match");
        used[k] = true;
        out.push(SolitonParams {
            theta: nearest_branch(found[k].theta, b.theta),
            ..found[k]
        });
    }
    Ok(out)
}

pub fn param_deviation(a: &[SolitonParams], b: &[SolitonParams]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            [p.xi - q.xi, p.eta - q.eta, p.x0 - q.x0, p.theta - q.theta]
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()))
        })
        .fold(0.0, f64::max)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<StabilityReport> {
    cfg.validate()?;
    let grid = cfg.evolve.grid()?;
    let eps = cfg.perturbation.epsilon;
    let qs = n_soliton(&cfg.base, grid, 0.0).map_err(Error::at("base soliton"))?;
    let q0 = perturb(&qs, &cfg.base, &cfg.perturbation).map_err(Error::at("perturb"))?;

    let data = scattering::scatter(&q0, &cfg.search, 0).map_err(Error::at("scatter"))?;
    let found = scattering::params_from_scattering(&data).map_err(Error::at("parameters"))?;
    let recovered = match_to_base(&cfg.base, &found).map_err(Error::at("match"))?;
    let deviation = param_deviation(&recovered, &cfg.base);

    let (residual_norm, residual_eigenvalues) = if cfg.undress {
        let eig = scattering::eigendata(&q0, &data.eigenvalues).map_err(Error::at("bound states"))?;
        let stripped = dressing::undress(&q0, &eig).map_err(Error::at("undress"))?;
        let left = scattering::residual_eigenvalues(&stripped, &q0, &cfg.search).map_err(Error::at("residual search"))?;
        (Some(l2_norm(&stripped)), Some(left.len()))
    } else {
        (None, None)
    };

    let times = cfg.times();
    let ecfg = EvolveConfig {
        sample_times: times,
        ..cfg.evolve.clone()
    };
    let traj = evolve(&q0, &ecfg).map_err(Error::at("evolve"))?;
    let series = par::map(&traj.snapshots, |snap| -> Result<DistanceSample> {
        let target = n_soliton(&recovered, grid, snap.t)?;
        Ok(DistanceSample {
            t: snap.t,
            distance: l2_norm(&snap.sub(&target)?),
            l2_of_q: l2_norm(snap),
            boundary_level: snap.boundary_level(),
        })
    });
    let series = par::collect_results(series).map_err(Error::at("compare"))?;
    let sup = series.iter().map(|s| s.distance).fold(0.0, f64::max);
    let per_eps = |v: f64| if eps > 0.0 { v / eps } else { 0.0 };
    Ok(StabilityReport {
        epsilon: eps,
        base: cfg.base.clone(),
        recovered,
        param_deviation: deviation,
        distance_series: series,
        sup_distance: sup,
        constant_estimate: per_eps(sup),
        param_constant: per_eps(deviation),
        residual_norm,
        residual_eigenvalues,
        l2_drift: traj.l2_drift,
    })
}

/// Runs the same experiment for each `ε`, in parallel.
pub fn sweep(cfg: &ExperimentConfig, epsilons: &[f64]) -> Result<Vec<StabilityReport>> {
    let cfgs: Vec<ExperimentConfig> = epsilons
        .iter()
        .map(|e| {
            let mut c = cfg.clone();
            c.perturbation.epsilon = *e;
            c
        })
        .collect();
    par::collect_results(par::map(&cfgs, run_experiment))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantFit {
    pub constant: f64,
    /// Estimates differ by more than [`UNIFORMITY_BAND`].
    pub non_uniform: bool,
    pub estimates: Vec<(f64, f64)>,
}

pub const UNIFORMITY_BAND: f64 = 5.0;

/// Largest `constant_estimate` over reports with `ε > 0`.
pub fn fit_constant(reports: &[StabilityReport]) -> Result<ConstantFit> {
    fit_values(reports.iter().map(|r| (r.epsilon, r.constant_estimate)))
}

/// Same as [`fit_constant`] for `param_deviation / ε`.
pub fn fit_param_constant(reports: &[StabilityReport]) -> Result<ConstantFit> {
    fit_values(reports.iter().map(|r| (r.epsilon, r.param_constant)))
}

fn fit_values(items: impl Iterator<Item = (f64, f64)>) -> Result<ConstantFit> {
    let estimates: Vec<(f64, f64)> = items.filter(|(e, _)| *e > 0.0).collect();
    let mut eps: Vec<f64> = estimates.iter().map(|(e, _)| *e).collect();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    if eps.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need reports at two or more distinct ε > 0, got {}",
            eps.len()
        )));
    }
    let max = estimates.iter().map(|(_, c)| *c).fold(0.0, f64::max);
    let min = estimates.iter().map(|(_, c)| *c).fold(f64::INFINITY, f64::min);
    Ok(ConstantFit {
        constant: max,
        non_uniform: max > UNIFORMITY_BAND * min,
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Grid;

    fn report(eps: f64, c: f64) -> StabilityReport {
        StabilityReport {
            epsilon: eps,
            base: vec![],
            recovered: vec![],
            param_deviation: 0.0,
            distance_series: vec![],
            sup_distance: c * eps,
            constant_estimate: c,
            param_constant: 0.0,
            residual_norm: None,
            residual_eigenvalues: None,
            l2_drift: 0.0,
        }
    }

    #[test]
    fn fit_constant_examples() {
        let f = fit_constant(&[report(1e-3, 2.1), report(1e-2, 2.4)]).unwrap();
        assert_eq!(f.constant, 2.4);
        assert!(!f.non_uniform);
        let f = fit_constant(&[report(1e-3, 1.0), report(1e-2, 8.0)]).unwrap();
        assert_eq!(f.constant, 8.0);
        assert!(f.non_uniform);
        assert!(matches!(fit_constant(&[report(1e-2, 1.0)]), Err(Error::InsufficientData(_))));
        assert!(matches!(
            fit_constant(&[report(1e-2, 1.0), report(1e-2, 2.0), report(0.0, 0.0)]),
            Err(Error::InsufficientData(_))
        ));
    }

    fn base() -> Vec<SolitonParams> {
        vec![SolitonParams::new(0.0, 0.5, 0.0, 0.0).unwrap()]
    }

    #[test]
    fn perturb_rescales_exactly() {
        let grid = Grid::centered(40.0, 512).unwrap();
        let qs = n_soliton(&base(), grid, 0.0).unwrap();
        for shape in [
            Shape::default(),
            Shape::RandomBand { center: 1.0, width: 2.0, k_min: 0.5, k_max: 2.0, modes: 8 },
            Shape::XiSplit { delta: 1e-3 },
        ] {
            let cfg = PerturbationConfig { shape, epsilon: 1e-2, seed: 7, weight: 1.0 };
            let q0 = perturb(&qs, &base(), &cfg).unwrap();
            let w = weighted_norm(&q0.sub(&qs).unwrap(), 1.0).unwrap();
            assert!((w - 1e-2).abs() <= 1e-12);
        }
    }

    #[test]
    fn zero_epsilon_is_identity() {
        let grid = Grid::centered(40.0, 512).unwrap();
        let qs = n_soliton(&base(), grid, 0.0).unwrap();
        let cfg = PerturbationConfig { shape: Shape::default(), epsilon: 0.0, seed: 0, weight: 1.0 };
        assert_eq!(perturb(&qs, &base(), &cfg).unwrap(), qs);
    }

    #[test]
    fn random_band_is_seeded() {
        let grid = Grid::centered(40.0, 512).unwrap();
        let qs = n_soliton(&base(), grid, 0.0).unwrap();
        let shape = Shape::RandomBand { center: 0.0, width: 3.0, k_min: 0.0, k_max: 3.0, modes: 16 };
        let cfg = |seed| PerturbationConfig { shape: shape.clone(), epsilon: 1e-2, seed, weight: 1.0 };
        assert_eq!(perturb(&qs, &base(), &cfg(3)).unwrap(), perturb(&qs, &base(), &cfg(3)).unwrap());
        assert_ne!(perturb(&qs, &base(), &cfg(3)).unwrap(), perturb(&qs, &base(), &cfg(4)).unwrap());
    }

    #[test]
    fn weight_must_exceed_half() {
        let cfg = PerturbationConfig { shape: Shape::default(), epsilon: 1e-2, seed: 0, weight: 0.5 };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_sample_cadence() {
        let cfg = ExperimentConfig {
            base: base(),
            perturbation: PerturbationConfig { shape: Shape::default(), epsilon: 0.0, seed: 0, weight: 1.0 },
            evolve: EvolveConfig::new(40.0, 512, 1e-3, 1.2),
            search: SearchRegion::new(-1.0, 1.0, 0.1, 1.0).unwrap(),
            sample_times: vec![],
            undress: false,
        };
        assert_eq!(cfg.times(), vec![0.0, 0.5, 1.0, 1.2]);
    }
}
