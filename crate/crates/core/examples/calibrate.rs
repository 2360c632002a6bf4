//! Calibrates the wake mixing gain so the CCW helix gains the target
//! streamtube energy at 5D, then prints the strategy comparison table.
//!
//! cargo run --release --example calibrate [target_pct]

use std::time::Instant;

use helixwake::analysis::report::build_report;
use helixwake::excitation::StrategyKind;
use helixwake::scenario::Scenario;

fn helix_gain(scenario: &Scenario, base: &[f64; 3]) -> f64 {
    let run = scenario.run(StrategyKind::HelixCcw).expect("helix run");
    let e = run.wake.mean_energy();
    100.0 * (e[1] - base[1]) / base[1]
}

fn main() {
    let target: f64 = std::env::args().nth(1).map_or(10.7, |s| s.parse().expect("target in percent"));
    let mut scenario = Scenario::default();
    let started = Instant::now();
    let base = scenario.run(StrategyKind::Baseline).expect("baseline run").wake.mean_energy();
    println!("baseline run: {:.2?}", started.elapsed());

    let (mut lo, mut hi) = (0.0, 8.0 * scenario.wake.mixing_gain.max(1.0));
    scenario.wake.mixing_gain = hi;
    while helix_gain(&scenario, &base) < target {
        hi *= 2.0;
        scenario.wake.mixing_gain = hi;
    }
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        scenario.wake.mixing_gain = mid;
        let g = helix_gain(&scenario, &base);
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-4 * hi {
            break;
        }
    }
    scenario.wake.mixing_gain = 0.5 * (lo + hi);
    println!("mixing_gain = {:.4}", scenario.wake.mixing_gain);

    let runs: Vec<_> = StrategyKind::ALL
        .iter()
        .map(|&k| scenario.run(k).expect("strategy run"))
        .collect();
    let f_e = scenario.excitation_frequency().expect("excitation frequency");
    let report = build_report(&runs, scenario.flow.turbulence_intensity, f_e).expect("report");
    print!("{}", report.to_table());
    println!("total: {:.2?}", started.elapsed());
}
