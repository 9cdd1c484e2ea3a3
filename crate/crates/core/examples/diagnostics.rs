//! Norm reports, corner tracking and self-similar collapse on the free
//! evolution of a corner.

use muskat::diagnostics::{decay_fit, self_similar_collapse, track_corners, z1_norm, z2_norm};
use muskat::initial_data::{superpose, CornerSpec};
use muskat::spectral::{poisson_semigroup, Grid, GridFunction};

fn main() -> muskat::Result<()> {
    let grid = Grid::new(2048, 16.0)?;
    let h0 = superpose(&[CornerSpec::symmetric(8.0, 0.05)], grid)?;
    let times = [0.0125, 0.025, 0.05, 0.1, 0.2];
    let traj: Vec<(f64, GridFunction)> =
        times.iter().map(|&t| Ok((t, poisson_semigroup(&h0, t)?))).collect::<muskat::Result<_>>()?;

    let z1 = z1_norm(&traj, |_| 8.0);
    let z2 = z2_norm(&traj);
    println!("Z1 band sup {:.4e}, full {:.4e}", z1.sup_linf_weighted, z1.value());
    for &t in &times {
        println!("  t = {t:<7} Z2 weighted sup {:.4e}", z2.l2_sup_at(t));
    }
    println!("free decay exponent {:.3}", decay_fit(&z1)?.pooled);

    let track = track_corners(&traj, &[8.0], 1.0)?;
    println!("tracked positions {:?}", track.positions[0]);
    println!("collapse over t in [0.05, 0.2]: {:.3e}", self_similar_collapse(&traj[2..], 8.0, 0.05, 4.0));
    Ok(())
}
