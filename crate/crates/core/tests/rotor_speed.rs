use helixwake::analysis::stats::pitch_activity;
use helixwake::excitation::{excitation_frequency, FlowConditions, StrategyConfig, StrategyKind};
use helixwake::mbc::rotation_frequency;
use helixwake::rotor::{rotor_speed_for_wind, simulate_turbine, TurbineParams};

/// A helix blade pitches as one sinusoid at f_r + f_e, so its mean
/// |dθ/dt| is 4·A·(f_r + f_e).
fn check_helix_activity(params: TurbineParams) -> f64 {
    let flow = FlowConditions::default();
    let f_r = rotation_frequency(rotor_speed_for_wind(&params, &flow).unwrap());
    let f_e = excitation_frequency(0.25, &flow, params.diameter).unwrap();
    let series = simulate_turbine(&StrategyConfig::with_kind(StrategyKind::HelixCcw), &params, &flow, 1200.0, 0.05).unwrap();
    let measured = pitch_activity(&series, f_e).unwrap();
    let expected = 4.0 * 2.5 * (f_r + f_e);
    assert!((measured / expected - 1.0).abs() < 0.01, "{measured} vs {expected}");
    f_r
}

#[test]
fn scheduled_speed_gives_below_rated_activity() {
    let f_r = check_helix_activity(TurbineParams::default());
    assert!((0.152..=0.154).contains(&f_r), "{f_r}");
}

#[test]
fn rated_speed_override_raises_activity() {
    let f_r = check_helix_activity(TurbineParams {
        rotor_speed_rpm: Some(12.1),
        ..TurbineParams::default()
    });
    assert!((f_r - 12.1 / 60.0).abs() < 1e-12);
}
