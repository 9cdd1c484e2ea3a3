use muskat::spectral::*;
use muskat::Error;
use proptest::prelude::*;

fn trig_poly(grid: Grid, coeffs: &[(f64, f64)]) -> GridFunction {
    GridFunction::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(m, (a, b))| {
                let xi = grid.frequency(m + 1);
                a * (xi * x).cos() + b * (xi * x).sin()
            })
            .sum()
    })
}

#[test]
fn rejects_bad_grids() {
    assert!(matches!(Grid::new(1000, 16.0), Err(Error::InvalidGrid(_))));
    assert!(matches!(Grid::new(8, 16.0), Err(Error::InvalidGrid(_))));
    assert!(matches!(Grid::new(64, -1.0), Err(Error::InvalidGrid(_))));
}

#[test]
fn multipliers_act_on_modes_by_their_symbol() {
    let grid = Grid::new(256, 16.0).unwrap();
    for m in [1usize, 7, 40, 127] {
        let xi = grid.frequency(m);
        let c = GridFunction::from_fn(grid, |x| (xi * x).cos());
        let s = GridFunction::from_fn(grid, |x| (xi * x).sin());
        let scale = 1.0f64.max(xi);
        assert!(derivative(&s).sup_distance(&c.scale(xi)) <= 1e-12 * scale);
        assert!(abs_gradient(&c).sup_distance(&c.scale(xi)) <= 1e-12 * scale);
        let p = poisson_semigroup(&c, 0.2).unwrap();
        assert!(p.sup_distance(&c.scale((-0.2 * xi).exp())) <= 1e-13);
        let viaspec = apply_multiplier(&c, &MultiplierSpec::abs_gradient()).unwrap();
        assert!(viaspec.sup_distance(&abs_gradient(&c)) <= 1e-12 * scale);
    }
}

#[test]
fn poisson_rejects_negative_time() {
    let grid = Grid::new(64, 16.0).unwrap();
    assert!(matches!(
        poisson_semigroup(&GridFunction::zeros(grid), -1.0),
        Err(Error::NegativeTime(_))
    ));
}

#[test]
fn band_out_of_range_is_an_error() {
    let grid = Grid::new(64, 16.0).unwrap();
    let (_, max) = band_range(grid);
    let f = GridFunction::zeros(grid);
    assert!(matches!(lp_project(&f, DyadicBand::new(max + 3)), Err(Error::BandOutOfRange { .. })));
}

#[test]
fn trig_interpolant_reproduces_nodes_and_derivatives() {
    let grid = Grid::new(128, 16.0).unwrap();
    let xi = grid.frequency(3);
    let f = GridFunction::from_fn(grid, |x| (xi * x).sin());
    let ti = TrigInterpolant::new(&f);
    for i in [0usize, 17, 99] {
        assert!((ti.eval(grid.x(i)) - f.values()[i]).abs() < 1e-13);
    }
    for x in [0.1234f64, 7.77] {
        assert!((ti.eval(x) - (xi * x).sin()).abs() < 1e-13);
        assert!((ti.eval_derivative(x, 1) - xi * (xi * x).cos()).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn partition_of_unity(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..60), c0 in -1.0f64..1.0) {
        let grid = Grid::new(128, 16.0).unwrap();
        let f = trig_poly(grid, &coeffs).add(&GridFunction::constant(grid, c0));
        let mut sum = GridFunction::constant(grid, f.mean());
        for (_, p) in lp_decompose(&f) {
            sum.axpy(1.0, &p);
        }
        prop_assert!(sum.sup_distance(&f) <= 1e-10 * f.max_abs().max(1.0));
    }

    #[test]
    fn semigroup_property(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..30), s in 0.0f64..0.5, t in 0.0f64..0.5) {
        let grid = Grid::new(64, 16.0).unwrap();
        let f = trig_poly(grid, &coeffs);
        let a = poisson_semigroup(&poisson_semigroup(&f, s).unwrap(), t).unwrap();
        let b = poisson_semigroup(&f, s + t).unwrap();
        prop_assert!(a.sup_distance(&b) <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn translation_by_whole_cells_is_a_roll(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..30), r in 0usize..64) {
        let grid = Grid::new(64, 16.0).unwrap();
        let f = trig_poly(grid, &coeffs);
        let g = translate(&f, r as f64 * grid.spacing());
        for i in 0..64 {
            prop_assert!((g.values()[(i + r) % 64] - f.values()[i]).abs() <= 1e-12 * f.max_abs().max(1.0));
        }
    }

    #[test]
    fn resampling_keeps_band_limited_data(coeffs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..20)) {
        let grid = Grid::new(64, 16.0).unwrap();
        let f = trig_poly(grid, &coeffs);
        let up = resample(&f, 256);
        let down = resample(&up, 64);
        prop_assert!(down.sup_distance(&f) <= 1e-12 * f.max_abs().max(1.0));
        let ti = TrigInterpolant::new(&f);
        let x = up.grid().x(5);
        prop_assert!((up.values()[5] - ti.eval(x)).abs() <= 1e-12 * f.max_abs().max(1.0));
    }
}
