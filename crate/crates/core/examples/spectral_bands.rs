//! Littlewood-Paley pieces of a corner, the partition identity and the
//! Poisson semigroup acting on a single Fourier mode.

use muskat::initial_data::{superpose, CornerSpec};
use muskat::spectral::{lp_decompose, poisson_semigroup, Grid, GridFunction};

fn main() -> muskat::Result<()> {
    let grid = Grid::new(1024, 16.0)?;
    let h = superpose(&[CornerSpec::symmetric(8.0, 0.05)], grid)?;

    let mut rebuilt = GridFunction::zeros(grid);
    println!("{:>4} {:>14} {:>14}", "k", "|P_k h|_inf", "|P_k h|_L2");
    for (band, piece) in lp_decompose(&h) {
        println!("{:>4} {:>14.6e} {:>14.6e}", band.k, piece.max_abs(), piece.l2_norm());
        rebuilt.axpy(1.0, &piece);
    }
    let mean = GridFunction::constant(grid, h.mean());
    println!("partition defect: {:.3e}", rebuilt.add(&mean).sup_distance(&h));

    let m = 5;
    let xi = grid.frequency(m);
    let mode = GridFunction::from_fn(grid, |x| (xi * x).cos());
    let t = 0.3;
    let evolved = poisson_semigroup(&mode, t)?;
    println!("e^(-t|xi|) mode error: {:.3e}", evolved.sup_distance(&mode.scale((-t * xi).exp())));
    Ok(())
}
