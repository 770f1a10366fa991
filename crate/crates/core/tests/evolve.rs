use num_complex::Complex64;
use soliton_core::{evolve, l2_norm, n_soliton, ComplexField, Error, EvolveConfig, Grid, Scheme, SolitonParams};

fn p(xi: f64, eta: f64, x0: f64, theta: f64) -> SolitonParams {
    SolitonParams::new(xi, eta, x0, theta).unwrap()
}

fn reference(t_end: f64) -> EvolveConfig {
    EvolveConfig::new(80.0, 2048, 1e-3, t_end)
}

fn error_at(ps: &[SolitonParams], cfg: &EvolveConfig) -> f64 {
    let grid = cfg.grid().unwrap();
    let q0 = n_soliton(ps, grid, 0.0).unwrap();
    let traj = evolve(&q0, cfg).unwrap();
    l2_norm(&traj.last().sub(&n_soliton(ps, grid, cfg.t_end).unwrap()).unwrap())
}

#[test]
fn single_soliton_tracks_closed_form() {
    let ps = [p(0.0, 0.5, 0.0, 0.0)];
    let cfg = reference(10.0).with_samples(vec![2.5, 5.0, 7.5, 10.0]);
    let grid = cfg.grid().unwrap();
    let traj = evolve(&n_soliton(&ps, grid, 0.0).unwrap(), &cfg).unwrap();
    for snap in &traj.snapshots {
        let err = l2_norm(&snap.sub(&n_soliton(&ps, grid, snap.t).unwrap()).unwrap());
        assert!(err <= 1e-6, "t = {}: {err}", snap.t);
    }
    assert!(traj.l2_drift <= 1e-10, "drift {}", traj.l2_drift);
    assert_eq!(traj.snapshots.len(), 4);
    assert_eq!(traj.diagnostics.len(), 4);
}

#[test]
fn strang_is_second_order() {
    let ps = [p(0.2, 0.5, 0.0, 0.0)];
    let coarse = error_at(&ps, &reference(2.0).with_scheme(Scheme::Strang));
    let mut fine_cfg = reference(2.0).with_scheme(Scheme::Strang);
    fine_cfg.dt = 5e-4;
    let fine = error_at(&ps, &fine_cfg);
    let ratio = coarse / fine;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio} ({coarse:e} / {fine:e})");
}

#[test]
fn time_reversal_recovers_initial_data() {
    let ps = [p(0.5, 1.0, -3.0, 0.0), p(-0.5, 0.8, 3.0, 0.4)];
    let cfg = reference(3.0);
    let grid = cfg.grid().unwrap();
    let q0 = n_soliton(&ps, grid, 0.0).unwrap();
    let fwd = evolve(&q0, &cfg).unwrap();
    let back = ComplexField { t: 0.0, ..fwd.last().conj() };
    let rev = evolve(&back, &cfg).unwrap().last().conj();
    let err = l2_norm(&ComplexField { t: 0.0, ..rev }.sub(&q0).unwrap());
    assert!(err <= 1e-7, "reversal error {err}");
}

#[test]
fn partial_steps_hit_sample_times() {
    let cfg = EvolveConfig::new(40.0, 256, 1e-2, 0.055).with_samples(vec![0.013, 0.05, 0.055]);
    let grid = cfg.grid().unwrap();
    let ps = [p(0.0, 0.5, 0.0, 0.0)];
    let traj = evolve(&n_soliton(&ps, grid, 0.0).unwrap(), &cfg).unwrap();
    let times: Vec<f64> = traj.snapshots.iter().map(|s| s.t).collect();
    assert_eq!(times, vec![0.013, 0.05, 0.055]);
}

#[test]
fn zero_field_stays_zero() {
    let cfg = EvolveConfig::new(40.0, 256, 1e-2, 1.0);
    let traj = evolve(&ComplexField::zeros(cfg.grid().unwrap(), 0.0), &cfg).unwrap();
    assert!(traj.last().values.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
}

#[test]
fn time_step_bound_enforced() {
    let cfg = EvolveConfig::new(80.0, 2048, 1e-2, 1.0);
    assert!(matches!(cfg.validate(), Err(Error::CflViolation { .. })));
    assert!(EvolveConfig::new(80.0, 2048, 1e-3, 1.0).validate().is_ok());
    assert!(matches!(EvolveConfig::new(80.0, 1000, 1e-3, 1.0).validate(), Err(Error::InvalidInput(_))));
}

#[test]
fn edge_mass_is_rejected() {
    let cfg = EvolveConfig::new(20.0, 256, 1e-3, 0.1);
    let grid = cfg.grid().unwrap();
    let q0 = n_soliton(&[p(0.0, 0.3, 0.0, 0.0)], grid, 0.0).unwrap();
    assert!(matches!(evolve(&q0, &cfg), Err(Error::EdgeDecay { .. })));
}

#[test]
fn soliton_reaching_boundary_is_reported() {
    let cfg = EvolveConfig::new(40.0, 512, 1e-3, 5.0);
    let grid = cfg.grid().unwrap();
    let q0 = n_soliton(&[p(-1.0, 1.0, 8.0, 0.0)], grid, 0.0).unwrap();
    assert!(matches!(evolve(&q0, &cfg), Err(Error::BoundaryContamination { .. })));
}

#[test]
fn grid_mismatch_is_rejected() {
    let cfg = EvolveConfig::new(40.0, 256, 1e-3, 0.1);
    let q0 = ComplexField::zeros(Grid::centered(40.0, 512).unwrap(), 0.0);
    assert!(evolve(&q0, &cfg).is_err());
}
