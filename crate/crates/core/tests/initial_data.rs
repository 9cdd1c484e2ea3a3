use muskat::initial_data::*;
use muskat::spectral::Grid;
use muskat::Error;
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(512, 16.0).unwrap()
}

#[test]
fn components_are_mean_zero_and_sum_to_the_data() {
    let corners = [CornerSpec::asymmetric(4.0, 0.02, 0.05), CornerSpec::symmetric(11.0, 0.03)];
    let comps = build_components(&corners, grid()).unwrap();
    let total = superpose(&corners, grid()).unwrap();
    let mut sum = comps[0].clone();
    sum.axpy(1.0, &comps[1]);
    assert!(sum.sup_distance(&total) < 1e-15);
    for c in &comps {
        assert!(c.mean().abs() < 1e-15);
    }
}

#[test]
fn sharp_corner_takes_its_amplitudes_on_the_plateau() {
    let spec = CornerSpec::asymmetric(8.0, 0.02, 0.05);
    let h = build_corner(&spec, grid()).unwrap();
    let g = grid();
    let at = |x: f64| h.values()[(x / g.spacing()).round() as usize];
    assert!((at(8.5) - 0.05).abs() < 1e-3);
    assert!((at(7.5) + 0.02).abs() < 1e-3);
}

#[test]
fn measured_size_of_a_sharp_corner_is_its_amplitude() {
    let spec = CornerSpec::symmetric(8.0, 0.05);
    let h = superpose(&[spec], grid()).unwrap();
    let r = measure_hypotheses(&h, &[spec]).unwrap();
    assert!((r.epsilon - 0.05).abs() < 1e-3 * 0.05, "{}", r.epsilon);
    assert!(r.evenness_lp < 1e-12, "symmetric corner is odd about a");
}

#[test]
fn asymmetric_corner_has_an_even_part() {
    let spec = CornerSpec::asymmetric(8.0, 0.025, 0.05);
    let h = superpose(&[spec], grid()).unwrap();
    assert!(measure_hypotheses(&h, &[spec]).unwrap().evenness_lp > 1e-3);
}

#[test]
fn validation_errors() {
    let g = grid();
    let close = [CornerSpec::symmetric(4.0, 0.05), CornerSpec::symmetric(4.1, 0.05)];
    assert!(matches!(
        build_components(&close, g),
        Err(Error::CornersTooClose { first: 0, second: 1, .. })
    ));
    assert!(matches!(
        build_components(&[CornerSpec::symmetric(17.0, 0.05)], g),
        Err(Error::InvalidCorner(_))
    ));
    let thin = CornerSpec::symmetric(8.0, 0.05).with_profile(Profile::MollifiedSign { width: 0.01 });
    assert!(matches!(build_components(&[thin], g), Err(Error::InvalidCorner(_))));
    let bad_log = CornerSpec::symmetric(8.0, 0.05).with_profile(Profile::LogOscillating { scale: 0.5 });
    assert!(matches!(build_components(&[bad_log], g), Err(Error::InvalidCorner(_))));
}

#[test]
fn shift_by_whole_cells_is_exact() {
    let h = superpose(&[CornerSpec::asymmetric(8.0, 0.02, 0.05)], grid()).unwrap();
    let s = 3.0 * grid().spacing();
    let back = shift_by(&shift_by(&h, s), -s);
    assert_eq!(back.values(), h.values());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn data_is_linear_in_the_amplitudes(al in 0.0f64..0.1, ar in 0.0f64..0.1, s in -3.0f64..3.0) {
        let spec = CornerSpec::asymmetric(8.0, al, ar);
        let h = build_corner(&spec, grid()).unwrap();
        let hs = build_corner(&spec.scaled(s), grid()).unwrap();
        prop_assert!(hs.sup_distance(&h.scale(s)) <= 1e-14);
    }

    #[test]
    fn measured_size_scales_linearly(amp in 0.001f64..0.2, s in 0.1f64..4.0) {
        let spec = CornerSpec::asymmetric(8.0, amp / 2.0, amp);
        let e1 = measure_hypotheses(&superpose(&[spec], grid()).unwrap(), &[spec]).unwrap().epsilon;
        let sp = spec.scaled(s);
        let e2 = measure_hypotheses(&superpose(&[sp], grid()).unwrap(), &[sp]).unwrap().epsilon;
        prop_assert!((e2 - s * e1).abs() <= 1e-12 * e2);
    }
}
