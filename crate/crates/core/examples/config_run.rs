//! Parse a config and run it end to end, writing CSV files and summary.txt
//! to a directory given as the first argument (default `out/config_run`).

use muskat::config::parse_config_str;
use muskat::presets::run_experiment;

const CONFIG: &str = "
grid.n_points = 1024
grid.period = 16
corner.a.location = 8
corner.a.amplitude_left = 0.025
corner.a.amplitude_right = 0.05
times.snapshots = 0.01, 0.02, 0.03, 0.05, 0.07, 0.1, 0.14, 0.2
solver.t_end = 0.2
";

fn main() -> muskat::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "out/config_run".into());
    let cfg = parse_config_str(CONFIG)?;
    let outcome = run_experiment(&cfg, std::path::Path::new(&out))?;
    print!("{}", outcome.summary.render());
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
