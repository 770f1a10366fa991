use num_complex::Complex64;
use proptest::prelude::*;
use soliton_core::io::{decode, encode, load, save, surface_csv};
use soliton_core::{n_soliton, ComplexField, Grid, SolitonParams};

proptest! {
    #[test]
    fn field_files_round_trip_bit_exact(
        x0 in -1e3f64..1e3,
        dx in 1e-4f64..1.0,
        t in -1e3f64..1e3,
        vals in prop::collection::vec((any::<f64>(), any::<f64>()), 8..64),
    ) {
        prop_assume!(vals.iter().all(|(a, b)| a.is_finite() && b.is_finite()));
        let grid = Grid::new(x0, dx, vals.len()).unwrap();
        let f = ComplexField::new(grid, t, vals.iter().map(|(a, b)| Complex64::new(*a, *b)).collect()).unwrap();
        let bytes = encode(&f);
        prop_assert_eq!(bytes.len(), 40 + 16 * vals.len());
        let g = decode(&bytes).unwrap();
        prop_assert_eq!(encode(&g), bytes);
    }
}

#[test]
fn file_round_trip() {
    let dir = std::env::temp_dir().join(format!("nlsf-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("q.nlsf");
    let grid = Grid::centered(40.0, 256).unwrap();
    let q = n_soliton(&[SolitonParams::new(0.3, 0.7, 1.0, 0.2).unwrap()], grid, 0.5).unwrap();
    save(&path, &q).unwrap();
    assert_eq!(load(&path).unwrap(), q);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn surface_csv_shape() {
    let grid = Grid::centered(10.0, 8).unwrap();
    let ps = [SolitonParams::new(0.0, 0.5, 0.0, 0.0).unwrap()];
    let frames: Vec<_> = [0.0, 1.0, 2.0].iter().map(|t| n_soliton(&ps, grid, *t).unwrap()).collect();
    let mut out = Vec::new();
    surface_csv(&mut out, &frames).unwrap();
    let text = String::from_utf8(out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 24);
    let ts: Vec<f64> = rows.iter().map(|r| r.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(ts.windows(2).all(|w| w[0] <= w[1]));
    let peak: f64 = rows[4].split(',').nth(2).unwrap().parse().unwrap();
    assert!((peak - 1.0).abs() <= 1e-12);
}
