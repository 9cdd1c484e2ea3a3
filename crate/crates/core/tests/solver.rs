use muskat::corner::CorrectionTable;
use muskat::initial_data::{build_components, superpose, CornerSpec};
use muskat::rhs::AlphaQuadrature;
use muskat::solver::*;
use muskat::spectral::{poisson_semigroup, Grid, GridFunction};

fn mode(grid: Grid, m: usize) -> (f64, GridFunction) {
    let xi = grid.frequency(m);
    (xi, GridFunction::from_fn(grid, |x| (xi * x).cos()))
}

#[test]
fn duhamel_integral_is_exact_for_constant_forcing() {
    let grid = Grid::new(64, 16.0).unwrap();
    let tg = TimeGrid::graded(0.5, 0.05, &[]).unwrap();
    for m in [0usize, 1, 9] {
        let (xi, f) = mode(grid, m);
        let out = duhamel_integral(&tg.times, &vec![f.clone(); tg.times.len()]);
        for (i, &t) in tg.times.iter().enumerate() {
            let c = if m == 0 { t } else { (1.0 - (-xi * t).exp()) / xi };
            assert!(out[i].sup_distance(&f.scale(c)) < 1e-13, "m={m} t={t}");
        }
    }
}

#[test]
fn duhamel_integral_is_exact_for_linear_forcing() {
    let grid = Grid::new(64, 16.0).unwrap();
    let tg = TimeGrid::uniform(0.4, 17);
    let (xi, f) = mode(grid, 5);
    let forcing: Vec<GridFunction> = tg.times.iter().map(|&s| f.scale(s)).collect();
    let out = duhamel_integral(&tg.times, &forcing);
    for (i, &t) in tg.times.iter().enumerate() {
        let c = t / xi - (1.0 - (-xi * t).exp()) / (xi * xi);
        assert!(out[i].sup_distance(&f.scale(c)) < 1e-13, "t={t}");
    }
}

#[test]
fn imex_reduces_to_the_poisson_flow_for_tiny_data() {
    let grid = Grid::new(256, 16.0).unwrap();
    let eps = 1e-6;
    let h0 = superpose(&[CornerSpec::asymmetric(8.0, eps / 2.0, eps)], grid).unwrap();
    let tg = TimeGrid::graded(0.1, 0.01, &[]).unwrap();
    let traj = imex_run(&h0, &tg, Nonlinearity::Full, &AlphaQuadrature::standard(grid)).unwrap();
    let free = poisson_semigroup(&h0, 0.1).unwrap();
    let rel = traj.last().unwrap().sup_distance(&free) / eps;
    assert!(rel < 1e-9, "{rel}");
}

#[test]
fn zero_data_stays_zero() {
    let grid = Grid::new(128, 16.0).unwrap();
    let tg = TimeGrid::graded(0.1, 0.02, &[]).unwrap();
    let q = AlphaQuadrature::standard(grid);
    let traj = imex_run(&GridFunction::zeros(grid), &tg, Nonlinearity::Taylor(3), &q).unwrap();
    assert!(traj.iter().all(|h| h.max_abs() == 0.0));

    let corners = [CornerSpec::symmetric(8.0, 0.0)];
    let comps = build_components(&corners, grid).unwrap();
    let qtab = CorrectionTable::zero(grid, &tg.times);
    let p = RenormalizedProblem::new(&corners, &comps, tg.clone(), qtab, q, 3).unwrap();
    let sol = duhamel_run(&p, IterationControl::for_epsilon(0.0)).unwrap();
    for i in 0..tg.times.len() {
        assert_eq!(sol.state(&p, i).h_total.max_abs(), 0.0);
    }
}

#[test]
fn correction_table_must_sit_on_the_time_grid() {
    let grid = Grid::new(64, 16.0).unwrap();
    let corners = [CornerSpec::symmetric(8.0, 0.05)];
    let comps = build_components(&corners, grid).unwrap();
    let tg = TimeGrid::uniform(0.1, 4);
    let off = CorrectionTable::zero(grid, &[0.0, 0.1]);
    let q = AlphaQuadrature::standard(grid);
    assert!(RenormalizedProblem::new(&corners, &comps, tg.clone(), off, q.clone(), 3).is_err());
    let ok = CorrectionTable::zero(grid, &tg.times);
    assert!(RenormalizedProblem::new(&corners, &comps, tg, ok, q, 4).is_err());
}

#[test]
fn duhamel_and_imex_agree_on_symmetric_data() {
    let grid = Grid::new(256, 16.0).unwrap();
    let corners = [CornerSpec::symmetric(8.0, 0.05)];
    let comps = build_components(&corners, grid).unwrap();
    let tg = TimeGrid::graded(0.05, 0.0125, &[]).unwrap();
    let q = AlphaQuadrature::standard(grid);
    let qtab = CorrectionTable::zero(grid, &tg.times);
    let p = RenormalizedProblem::new(&corners, &comps, tg.clone(), qtab, q.clone(), 3).unwrap();
    let sol = duhamel_run(&p, IterationControl::for_epsilon(0.05)).unwrap();
    let h0 = superpose(&corners, grid).unwrap();
    let imex = imex_run(&h0, &tg, Nonlinearity::Taylor(3), &q).unwrap();
    let last = tg.times.len() - 1;
    let gap = sol.state(&p, last).h_total.sup_distance(&imex[last]);
    assert!(gap < 1e-3 * 0.05, "{gap}");
    assert!(sol.trace.ratios().iter().all(|r| *r < 0.5), "{:?}", sol.trace.ratios());
}

#[test]
fn graded_grid_rejects_bad_input_and_inserts_extras() {
    assert!(TimeGrid::graded(0.1, 0.0, &[]).is_err());
    assert!(TimeGrid::graded(-1.0, 0.01, &[]).is_err());
    let g = TimeGrid::graded(0.2, 0.02, &[0.0333]).unwrap();
    assert!(g.index_of(0.0333).is_some());
    assert!(g.times[1] < 1e-5);
}
