use muskat::initial_data::{superpose, CornerSpec};
use muskat::rhs::*;
use muskat::spectral::{poisson_semigroup, translate, Grid, GridFunction};
use proptest::prelude::*;

fn smoothed(eps: f64, n: usize) -> (GridFunction, AlphaQuadrature) {
    let grid = Grid::new(n, 16.0).unwrap();
    let h0 = superpose(&[CornerSpec::asymmetric(8.0, eps / 2.0, eps)], grid).unwrap();
    let h = poisson_semigroup(&h0, 0.05).unwrap();
    (h.map(|v| v - h.mean()), AlphaQuadrature::standard(grid))
}

#[test]
fn periodized_tail_matches_explicit_images() {
    let (h, q) = smoothed(0.05, 256);
    let a = full_nonlinearity(&h, &q).unwrap();
    let b = full_nonlinearity(&h, &AlphaQuadrature::new(q.grid(), 2, OuterTail::Images(64))).unwrap();
    assert!(a.sup_distance(&b) <= 1e-6 * a.max_abs(), "{}", a.sup_distance(&b) / a.max_abs());
}

#[test]
fn refining_the_alpha_grid_changes_little() {
    let (h, q) = smoothed(0.05, 256);
    let a = full_nonlinearity(&h, &q).unwrap();
    let b = full_nonlinearity(&h, &q.doubled()).unwrap();
    assert!(a.sup_distance(&b) <= 1e-3 * a.max_abs());
}

#[test]
fn taylor_sum_is_the_sum_of_its_terms() {
    let (h, q) = smoothed(0.05, 256);
    let s = taylor_sum(&h, &h, &[1, 2, 3], &q).unwrap();
    let mut t = taylor_term(&h, &h, 1, &q).unwrap();
    t.axpy(1.0, &taylor_term(&h, &h, 2, &q).unwrap());
    t.axpy(1.0, &taylor_term(&h, &h, 3, &q).unwrap());
    assert!(s.sup_distance(&t) <= 1e-13 * s.max_abs());
}

#[test]
fn taylor_orders_scale_with_odd_powers() {
    let (h, q) = smoothed(0.05, 256);
    for n in 1..=3usize {
        let a = taylor_term(&h, &h, n, &q).unwrap();
        let b = taylor_term(&h.scale(2.0), &h.scale(2.0), n, &q).unwrap();
        let p = 2f64.powi(2 * n as i32 + 1);
        assert!(b.sup_distance(&a.scale(p)) <= 1e-12 * b.max_abs(), "order {n}");
    }
}

#[test]
fn unsupported_taylor_order_is_rejected() {
    let (h, q) = smoothed(0.05, 64);
    assert!(matches!(taylor_term(&h, &h, 0, &q), Err(muskat::Error::TaylorOrder(0))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn constant_slope_is_steady(c in -2.0f64..2.0) {
        let grid = Grid::new(128, 16.0).unwrap();
        let n = full_nonlinearity(&GridFunction::constant(grid, c), &AlphaQuadrature::standard(grid)).unwrap();
        prop_assert!(n.max_abs() < 1e-10);
    }

    #[test]
    fn nonlinearity_is_odd_and_translation_equivariant(r in 0usize..128, s in 0.2f64..2.0) {
        let (h, _) = smoothed(0.05 * s, 128);
        let q = AlphaQuadrature::standard(h.grid());
        let n = full_nonlinearity(&h, &q).unwrap();
        let neg = full_nonlinearity(&h.scale(-1.0), &q).unwrap();
        prop_assert!(neg.sup_distance(&n.scale(-1.0)) <= 1e-14 * n.max_abs().max(1e-300) + 1e-18);
        let shift = r as f64 * h.grid().spacing();
        let moved = full_nonlinearity(&translate(&h, shift), &q).unwrap();
        prop_assert!(moved.sup_distance(&translate(&n, shift)) <= 1e-10 * n.max_abs());
    }
}
