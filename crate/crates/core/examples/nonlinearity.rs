//! The nonlinearity: closed form against its Taylor expansion, and the
//! steady constant-slope state.

use muskat::initial_data::{superpose, CornerSpec};
use muskat::rhs::{full_nonlinearity, taylor_sum, taylor_term, AlphaQuadrature};
use muskat::spectral::{poisson_semigroup, Grid, GridFunction};

fn main() -> muskat::Result<()> {
    let grid = Grid::new(1024, 16.0)?;
    let q = AlphaQuadrature::standard(grid);

    let flat = GridFunction::constant(grid, 0.3);
    println!("constant slope: |N| = {:.3e}", full_nonlinearity(&flat, &q)?.max_abs());

    println!("{:>8} {:>14} {:>18}", "eps", "|N_1|", "|N - N1 - N2|/|N1|");
    for eps in [0.1, 0.05, 0.025] {
        let h0 = superpose(&[CornerSpec::asymmetric(8.0, eps / 2.0, eps)], grid)?;
        let h = poisson_semigroup(&h0, 0.05)?;
        let h = h.map(|v| v - h.mean());
        let n = full_nonlinearity(&h, &q)?;
        let n1 = taylor_term(&h, &h, 1, &q)?;
        let n12 = taylor_sum(&h, &h, &[1, 2], &q)?;
        println!("{eps:>8} {:>14.6e} {:>18.6e}", n1.max_abs(), n.sub(&n12).max_abs() / n1.max_abs());
    }
    Ok(())
}
