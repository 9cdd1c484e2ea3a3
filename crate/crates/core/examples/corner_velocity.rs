//! Corner velocity and the correction q~: logarithmic growth for an
//! asymmetric corner, cancellation for a symmetric one.

use muskat::corner::{velocity_v1_core, VelocityParams};
use muskat::initial_data::{build_corner, center_component, CornerSpec};
use muskat::presets::correction_for;
use muskat::spectral::{poisson_semigroup, Grid};

fn main() -> muskat::Result<()> {
    let grid = Grid::new(1024, 16.0)?;
    let params = VelocityParams::for_grid(grid);
    let eps = 0.05;
    let asym = CornerSpec::asymmetric(8.0, eps / 2.0, eps);
    let sym = CornerSpec::symmetric(8.0, eps);
    let ga = center_component(&build_corner(&asym, grid)?, 8.0);
    let gs = center_component(&build_corner(&sym, grid)?, 8.0);
    println!("{:>10} {:>14} {:>14}", "t", "V1 asym", "V1 sym");
    for j in 3..=10 {
        let t = 2f64.powi(-j);
        let a = poisson_semigroup(&ga, t)?;
        let s = poisson_semigroup(&gs, t)?;
        println!(
            "{t:>10.6} {:>14.6e} {:>14.3e}",
            velocity_v1_core(&[&a, &a], &[0.0, 0.0], t, 0.0, params)?,
            velocity_v1_core(&[&s, &s], &[0.0, 0.0], t, 0.0, params)?
        );
    }
    let times: Vec<f64> = (0..=10).map(|i| 0.02 * i as f64).collect();
    let tab = correction_for(&[asym], grid, &times)?;
    for &t in &[0.05, 0.1, 0.2] {
        println!("predicted corner position at t = {t}: {:.8}", tab.predicted_position(t, 8.0));
    }
    Ok(())
}
