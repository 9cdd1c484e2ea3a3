//! The renormalized Duhamel iteration and the exponential integrator on the
//! same data.

use muskat::initial_data::{build_components, superpose, CornerSpec};
use muskat::presets::correction_for;
use muskat::rhs::AlphaQuadrature;
use muskat::solver::{duhamel_run, imex_run, IterationControl, Nonlinearity, RenormalizedProblem, TimeGrid};
use muskat::spectral::Grid;

fn main() -> muskat::Result<()> {
    let grid = Grid::new(512, 16.0)?;
    let eps = 0.05;
    let corners = [CornerSpec::asymmetric(8.0, eps / 2.0, eps)];
    let quad = AlphaQuadrature::standard(grid);
    let tg = TimeGrid::graded(0.25, 0.5 * grid.spacing(), &[0.1])?;
    let qtab = correction_for(&corners, grid, &tg.times)?;
    let comps = build_components(&corners, grid)?;
    let p = RenormalizedProblem::new(&corners, &comps, tg.clone(), qtab, quad.clone(), 2)?;

    let sol = duhamel_run(&p, IterationControl::for_epsilon(eps))?;
    println!("iterate distances {:?}", sol.trace.distances);
    println!("contraction ratios {:?}", sol.trace.ratios());

    let traj = imex_run(&superpose(&corners, grid)?, &tg, Nonlinearity::Full, &quad)?;
    for &t in &[0.1, 0.25] {
        let i = tg.index_of(t).expect("snapshot on grid");
        let gap = sol.state(&p, i).h_total.sup_distance(&traj[i]);
        println!("t = {t}: sup |duhamel - imex| = {gap:.3e}");
    }
    Ok(())
}
