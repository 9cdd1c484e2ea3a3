use muskat::diagnostics::*;
use muskat::spectral::{poisson_semigroup, Grid, GridFunction};
use muskat::Error;
use std::f64::consts::PI;

/// Periodic smooth jump: `h'` peaks exactly at `a`.
fn smooth_jump(grid: Grid, a: f64, w: f64) -> GridFunction {
    let l = grid.period();
    GridFunction::from_fn(grid, |x| ((2.0 * PI * (x - a) / l).sin() * l / (2.0 * PI * w)).atan())
}

#[test]
fn corner_location_finds_an_off_grid_jump() {
    let grid = Grid::new(512, 16.0).unwrap();
    let a = 8.0 + 0.37 * grid.spacing();
    let h = smooth_jump(grid, a, 0.2);
    let p = corner_location(&h, 8.0, 1.0).unwrap();
    assert!((p - a).abs() < 0.1 * grid.spacing(), "{p} vs {a}");
    for delta in [0.05, -0.13] {
        let moved = smooth_jump(grid, a + delta, 0.2);
        let p = corner_location(&moved, 8.0, 1.0).unwrap();
        assert!((p - (a + delta)).abs() < 0.1 * grid.spacing());
    }
}

#[test]
fn flat_data_has_no_corner() {
    let grid = Grid::new(128, 16.0).unwrap();
    assert!(matches!(
        corner_location(&GridFunction::zeros(grid), 8.0, 1.0),
        Err(Error::NoExtremum(_))
    ));
}

#[test]
fn exact_self_similar_family_collapses() {
    let grid = Grid::new(4096, 16.0).unwrap();
    let a = 8.0;
    let profile = |y: f64| y.tanh() * (-y * y / 400.0).exp();
    let snaps: Vec<(f64, GridFunction)> = [0.025, 0.05, 0.1]
        .iter()
        .map(|&t| (t, GridFunction::from_fn(grid, |x| profile((x - a) / t))))
        .collect();
    let c = self_similar_collapse(&snaps, a, 1.0, 4.0);
    assert!(c < 1e-6, "{c}");
    // a different profile at one time breaks the collapse
    let mut broken = snaps.clone();
    broken[1].1 = broken[1].1.scale(1.1);
    assert!(self_similar_collapse(&broken, a, 1.0, 4.0) > 0.05);
}

#[test]
fn pair_mismatch_is_relative_to_epsilon() {
    let grid = Grid::new(256, 16.0).unwrap();
    let h = smooth_jump(grid, 8.0, 0.3);
    let z = GridFunction::zeros(grid);
    let m1 = pair_mismatch((0.1, &h), (0.1, &z), 8.0, 1.0, 2.0);
    let m2 = pair_mismatch((0.1, &h), (0.1, &z), 8.0, 0.5, 2.0);
    assert!((m2 - 2.0 * m1).abs() < 1e-14);
}

#[test]
fn log_law_fit_recovers_a_synthetic_law() {
    let times: [f64; 5] = [0.01, 0.02, 0.05, 0.1, 0.2];
    let disp: Vec<f64> = times.iter().map(|&t| -(0.3 * t * (2.0 / t).ln() + 0.1 * t)).collect();
    let fit = log_law_fit(&times, &disp).unwrap();
    assert!((fit.slope - 0.3).abs() < 1e-12);
    assert!((fit.intercept - 0.1).abs() < 1e-12);
    assert!((fit.r_squared - 1.0).abs() < 1e-12);
    assert!(matches!(log_law_fit(&times[..2], &disp[..2]), Err(Error::InsufficientSamples(2))));
}

#[test]
fn track_corners_reports_displacement_and_fit() {
    let grid = Grid::new(512, 16.0).unwrap();
    let c = 0.4;
    let snaps: Vec<(f64, GridFunction)> = [0.0f64, 0.02, 0.05, 0.1]
        .iter()
        .map(|&t| {
            let d = if t > 0.0 { c * t * (2.0 / t).ln() } else { 0.0 };
            (t, smooth_jump(grid, 8.0 + d, 0.2))
        })
        .collect();
    let tr = track_corners(&snaps, &[8.0], 1.0).unwrap();
    assert_eq!(tr.times, vec![0.02, 0.05, 0.1]);
    assert!((tr.fit[0] - c).abs() < 1e-3, "{}", tr.fit[0]);
}

#[test]
fn zero_trajectory_gives_a_zero_report() {
    let grid = Grid::new(128, 16.0).unwrap();
    let traj: Vec<(f64, GridFunction)> = [0.0, 0.05, 0.1].iter().map(|&t| (t, GridFunction::zeros(grid))).collect();
    assert_eq!(z2_norm(&traj).value(), 0.0);
    assert_eq!(n_norm(&traj).value(), 0.0);
    assert_eq!(z1_norm(&traj, |_| 8.0).value(), 0.0);
    assert_eq!(z2_distance(&traj), 0.0);
    assert!(matches!(decay_fit(&z2_norm(&traj)), Err(Error::InsufficientSamples(_))));
}

#[test]
fn truncated_reports_grow_with_the_cutoff() {
    let grid = Grid::new(512, 16.0).unwrap();
    let h0 = smooth_jump(grid, 8.0, 0.05);
    let traj: Vec<(f64, GridFunction)> = [0.01, 0.03, 0.1]
        .iter()
        .map(|&t| (t, poisson_semigroup(&h0, t).unwrap()))
        .collect();
    let full = z2_norm(&traj);
    let mut prev = 0.0;
    for kmax in band_list(&h0) {
        let v = full.truncated(kmax).value();
        assert!(v >= prev && v <= full.value() + 1e-15);
        prev = v;
    }
    assert!((prev - full.value()).abs() <= 1e-15);
}

#[test]
fn poisson_flow_decays_on_the_smoothing_side() {
    let grid = Grid::new(1024, 16.0).unwrap();
    let h0 = smooth_jump(grid, 8.0, 0.02);
    let traj: Vec<(f64, GridFunction)> = (0..12)
        .map(|i| {
            let t = 0.005 * 1.5f64.powi(i);
            (t, poisson_semigroup(&h0, t).unwrap())
        })
        .collect();
    let fit = decay_fit(&z2_norm(&traj)).unwrap();
    assert!(fit.pooled < -0.1, "{}", fit.pooled);
}
