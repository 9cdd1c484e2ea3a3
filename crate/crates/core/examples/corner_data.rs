//! Corner initial data: components, layout and the measured hypotheses.

use muskat::initial_data::{build_components, corner_layout, measure_hypotheses, superpose, CornerSpec, Profile};
use muskat::spectral::Grid;

fn main() -> muskat::Result<()> {
    let grid = Grid::new(1024, 16.0)?;
    let corners = [
        CornerSpec::asymmetric(4.0, 0.025, 0.05),
        CornerSpec::symmetric(12.0, 0.05).with_profile(Profile::MollifiedSign { width: 0.1 }),
    ];
    let layout = corner_layout(&corners, grid)?;
    println!("plateau radii {:?}, compensating bump at x = {}", layout.plateau, layout.far_point);
    for (j, h) in build_components(&corners, grid)?.iter().enumerate() {
        println!("component {j}: mean {:.2e}, max |h| {:.4}", h.mean(), h.max_abs());
    }
    let h0 = superpose(&corners, grid)?;
    let report = measure_hypotheses(&h0, &corners)?;
    println!("epsilon = {:.5}, evenness L^p defect = {:.3e}", report.epsilon, report.evenness_lp);

    let log = CornerSpec::symmetric(8.0, 0.05).with_profile(Profile::LogOscillating { scale: 2.0 });
    let hl = superpose(&[log], grid)?;
    println!("log-oscillating data: epsilon = {:.4}", measure_hypotheses(&hl, &[log])?.epsilon);
    Ok(())
}
