use muskat::config::*;
use muskat::Error;
use std::io::Write;

const MINIMAL: &str = "\
grid.n_points = 256
# one corner
corner.main.location = 8.0
corner.main.amplitude = 0.05
";

#[test]
fn minimal_file_fills_defaults() {
    let cfg = parse_config_str(MINIMAL).unwrap();
    assert_eq!(cfg.n_points, 256);
    assert_eq!(cfg.period, 16.0);
    assert_eq!(cfg.labels, vec!["main".to_string()]);
    assert_eq!(cfg.corners[0].amplitude_left, 0.05);
    assert_eq!(cfg.corners[0].amplitude_right, 0.05);
    assert_eq!(cfg.epsilon, None);
}

#[test]
fn text_form_round_trips() {
    let text = format!(
        "{MINIMAL}epsilon = 0.03\ncorner.side.location = 2.0\ncorner.side.amplitude_left = 0.01\n\
         corner.side.amplitude_right = 0.04\ncorner.side.profile = mollified\ncorner.side.width = 0.3\n\
         solver.method = both\nsolver.fixed_iterations = 4\nquadrature.velocity_cutoff = 2.0\n"
    );
    let cfg = parse_config_str(&text).unwrap();
    let again = parse_config_str(&cfg.to_text()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(again.solver.method, Method::Both);
}

#[test]
fn close_corners_name_both_labels() {
    let text = format!("{MINIMAL}corner.other.location = 8.1\ncorner.other.amplitude = 0.05\n");
    match parse_config_str(&text) {
        Err(Error::ConfigInvalid { msg, .. }) => {
            assert!(msg.contains("main") && msg.contains("other"), "{msg}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn non_power_of_two_grid_is_invalid() {
    let text = MINIMAL.replace("256", "300");
    assert!(matches!(
        parse_config_str(&text),
        Err(Error::ConfigInvalid { field, .. }) if field == "grid.n_points"
    ));
}

#[test]
fn unknown_key_reports_its_line() {
    let text = format!("{MINIMAL}\nsolver.bogus = 1\n");
    assert!(matches!(parse_config_str(&text), Err(Error::ConfigParse { line: 6, .. })));
    let text = format!("{MINIMAL}corner.main.colour = red\n");
    assert!(matches!(parse_config_str(&text), Err(Error::ConfigParse { line: 5, .. })));
}

#[test]
fn duplicate_key_is_rejected() {
    let text = format!("{MINIMAL}grid.n_points = 512\n");
    match parse_config_str(&text) {
        Err(Error::ConfigParse { line, msg }) => {
            assert_eq!(line, 5);
            assert!(msg.contains("duplicate"));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn malformed_values_are_rejected() {
    assert!(matches!(parse_config_str("grid.n_points 256"), Err(Error::ConfigParse { line: 1, .. })));
    assert!(matches!(parse_config_str("grid.n_points = lots"), Err(Error::ConfigParse { .. })));
    let text = format!("{MINIMAL}times.snapshots = 0.1, 5.0\n");
    assert!(matches!(parse_config_str(&text), Err(Error::ConfigInvalid { .. })));
    let text = format!("{MINIMAL}solver.n_max = 4\n");
    assert!(matches!(parse_config_str(&text), Err(Error::ConfigInvalid { .. })));
    assert!(matches!(
        parse_config_str("corner.x.amplitude = 0.1\n"),
        Err(Error::ConfigInvalid { field, .. }) if field == "corner.x.location"
    ));
}

#[test]
fn reads_from_a_file() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(MINIMAL.as_bytes()).unwrap();
    let cfg = parse_config(f.path()).unwrap();
    assert_eq!(cfg.corners.len(), 1);
    assert!(parse_config("/nonexistent/muskat.cfg").is_err());
}
