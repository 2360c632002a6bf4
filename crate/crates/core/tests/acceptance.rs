//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use helixwake::analysis::report::build_report;
use helixwake::analysis::spectrum::{amplitude_spectrum, spectrum_peaks};
use helixwake::analysis::stats::pitch_activity;
use helixwake::cli::{cmd_compare, Common, CompareArgs};
use helixwake::excitation::{excitation_frequency, FlowConditions, StrategyConfig, StrategyKind};
use helixwake::mbc::{forward_mbc, inverse_mbc, rotation_frequency, AzimuthState, BladeTriple, FixedFrameTriple};
use helixwake::rotor::{rotor_speed_for_wind, simulate_turbine, TurbineParams};
use helixwake::scenario::Scenario;
use helixwake::sweep::{run_sweep, GridAxis, Objective, SweepSpec};
use helixwake::wake::{WakeGridConfig, WakeParams};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn defaults() -> (TurbineParams, FlowConditions) {
    (TurbineParams::default(), FlowConditions::default())
}

fn criterion_1() -> Outcome {
    let (turbine, flow) = defaults();
    let f_e = excitation_frequency(0.25, &flow, turbine.diameter).map_err(|e| e.to_string())?;
    check((f_e - 0.015823).abs() <= 1e-6, format!("f_e = {f_e:.7} Hz"))
}

/// Largest bin outside the main lobes of the given peak bins.
fn largest_outside(amps: &[f64], lobes: &[usize]) -> f64 {
    amps.iter()
        .enumerate()
        .skip(1)
        .filter(|(i, _)| lobes.iter().all(|&p| i.abs_diff(p) > 2))
        .map(|(_, &a)| a)
        .fold(0.0, f64::max)
}

fn criterion_2() -> Outcome {
    let (turbine, flow) = defaults();
    let dt = 0.1;
    let duration = 4096.0 * dt;
    let f_r = rotation_frequency(rotor_speed_for_wind(&turbine, &flow).map_err(|e| e.to_string())?);
    let f_e = excitation_frequency(0.25, &flow, turbine.diameter).map_err(|e| e.to_string())?;
    let pitch = |kind| -> Result<Vec<f64>, String> {
        let s = simulate_turbine(&StrategyConfig::with_kind(kind), &turbine, &flow, duration, dt).map_err(|e| e.to_string())?;
        Ok(s.pitch(0))
    };

    let tilt = pitch(StrategyKind::TiltDipc)?;
    if tilt.len() != 4096 {
        return Err(format!("{} samples", tilt.len()));
    }
    let (df, amps) = amplitude_spectrum(&tilt, dt).map_err(|e| e.to_string())?;
    let p = spectrum_peaks(&tilt, dt, 2).map_err(|e| e.to_string())?;
    let mut f: Vec<f64> = p.iter().map(|q| q.frequency).collect();
    f.sort_by(f64::total_cmp);
    let tilt_ok = f.len() == 2
        && (f[0] - (f_r - f_e)).abs() <= df
        && (f[1] - (f_r + f_e)).abs() <= df
        && p[1].amplitude / p[0].amplitude >= 0.9
        && largest_outside(&amps, &f.iter().map(|x| (x / df).round() as usize).collect::<Vec<_>>()) < 0.1 * p[1].amplitude;

    let helix = pitch(StrategyKind::HelixCcw)?;
    let (_, amps) = amplitude_spectrum(&helix, dt).map_err(|e| e.to_string())?;
    let h = spectrum_peaks(&helix, dt, 1).map_err(|e| e.to_string())?;
    let rest = largest_outside(&amps, &[(h[0].frequency / df).round() as usize]);
    let helix_ok = (h[0].frequency - (f_r + f_e)).abs() <= df && rest < 0.1 * h[0].amplitude;

    check(
        tilt_ok && helix_ok,
        format!(
            "tilt peaks {:.4}/{:.4} Hz (ratio {:.3}), helix peak {:.4} Hz (rest {:.1}%)",
            f[0],
            f.get(1).copied().unwrap_or(f64::NAN),
            p.get(1).map_or(0.0, |q| q.amplitude / p[0].amplitude),
            h[0].frequency,
            100.0 * rest / h[0].amplitude
        ),
    )
}

fn criterion_3() -> Outcome {
    let scenario = Scenario::default();
    let f_r = rotation_frequency(rotor_speed_for_wind(&scenario.turbine, &scenario.flow).map_err(|e| e.to_string())?);
    let f_e = scenario.excitation_frequency().map_err(|e| e.to_string())?;
    let activity = |kind| -> Result<f64, String> {
        let s = simulate_turbine(&scenario.strategy(kind), &scenario.turbine, &scenario.flow, scenario.duration, scenario.dt)
            .map_err(|e| e.to_string())?;
        pitch_activity(&s, f_e).map_err(|e| e.to_string())
    };
    let helix = activity(StrategyKind::HelixCcw)?;
    let tilt = activity(StrategyKind::TiltDipc)?;
    let yaw = activity(StrategyKind::YawDipc)?;
    let base = activity(StrategyKind::Baseline)?;
    let sic = activity(StrategyKind::Sic)?;
    check(
        (0.152..=0.154).contains(&f_r)
            && (helix - 1.69).abs() <= 0.08
            && (tilt - 0.99).abs() <= 0.10
            && (yaw - 0.99).abs() <= 0.10
            && base == 0.0
            && sic == 0.0,
        format!("f_r = {f_r:.4} Hz, helix {helix:.3}, tilt {tilt:.3}, yaw {yaw:.3}, baseline {base}, SIC {sic} deg/s"),
    )
}

fn criterion_4() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 1000,
        failure_persistence: None,
        ..Config::default()
    });
    let round_trip = runner.run(
        &(-20.0..20.0f64, -10.0..10.0f64, -10.0..10.0f64, -10.0..10.0f64),
        |(psi, c, t, y)| {
            let az = AzimuthState::new(psi).unwrap();
            let f = forward_mbc(&az, &inverse_mbc(&az, &FixedFrameTriple::new(c, t, y)));
            prop_assert!((f.collective - c).abs() <= 1e-12);
            prop_assert!((f.tilt - t).abs() <= 1e-12);
            prop_assert!((f.yaw - y).abs() <= 1e-12);
            Ok(())
        },
    );
    let collective = runner.run(&(-20.0..20.0f64, -10.0..10.0f64), |(psi, c)| {
        let f = forward_mbc(&AzimuthState::new(psi).unwrap(), &BladeTriple::splat(c));
        prop_assert!(f.tilt.abs() <= 1e-14 && f.yaw.abs() <= 1e-14);
        Ok(())
    });
    match (round_trip, collective) {
        (Ok(()), Ok(())) => Ok("1000 round trips to 1e-12, collective tilt/yaw to 1e-14".into()),
        (r, c) => Err(format!("round trip: {r:?}, collective: {c:?}")),
    }
}

struct Kinematics {
    /// Centerline offsets per station, one snapshot per step after spin-up.
    snapshots: Vec<Vec<(f64, f64)>>,
    wavelength: Option<f64>,
    elapsed: Duration,
}

fn kinematics(kind: StrategyKind) -> Result<Kinematics, String> {
    let scenario = Scenario::default();
    let start = Instant::now();
    let series = simulate_turbine(&scenario.strategy(kind), &scenario.turbine, &scenario.flow, scenario.duration, scenario.dt)
        .map_err(|e| e.to_string())?;
    let model = scenario.wake_model().map_err(|e| e.to_string())?;
    let keep_after = scenario.duration - 2.0 / scenario.excitation_frequency().map_err(|e| e.to_string())?;
    let mut state = model.init();
    let mut snapshots = Vec::new();
    for s in &series.samples {
        model.step(&mut state, s).map_err(|e| e.to_string())?;
        if state.time() >= keep_after {
            snapshots.push(state.stations().iter().map(|r| (r.y_c, r.z_c)).collect());
        }
    }
    let elapsed = start.elapsed();
    let st = state.stations();
    let dx = st[1].x - st[0].x;
    let crossings: Vec<f64> = st
        .windows(2)
        .skip(1)
        .filter(|w| w[0].z_c < 0.0 && w[1].z_c >= 0.0)
        .map(|w| w[0].x + dx * w[0].z_c / (w[0].z_c - w[1].z_c))
        .collect();
    let wavelength = (crossings.len() >= 2)
        .then(|| (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64);
    Ok(Kinematics {
        snapshots,
        wavelength,
        elapsed,
    })
}

fn axis_ratio(k: &Kinematics, main: impl Fn((f64, f64)) -> f64, cross: impl Fn((f64, f64)) -> f64) -> f64 {
    let peak = k.snapshots.iter().flatten().map(|&p| main(p).abs()).fold(0.0, f64::max);
    let stray = k.snapshots.iter().flatten().map(|&p| cross(p).abs()).fold(0.0, f64::max);
    stray / peak
}

fn criterion_5() -> Outcome {
    let scenario = Scenario::default();
    let grid = (scenario.grid.nx, scenario.grid.ny, scenario.grid.nz);
    let tilt = kinematics(StrategyKind::TiltDipc)?;
    let yaw = kinematics(StrategyKind::YawDipc)?;
    let helix = kinematics(StrategyKind::HelixCcw)?;

    let tilt_ratio = axis_ratio(&tilt, |p| p.1, |p| p.0);
    let yaw_ratio = axis_ratio(&yaw, |p| p.0, |p| p.1);

    let model = scenario.wake_model().map_err(|e| e.to_string())?;
    let station = (3.0 * scenario.turbine.diameter / (model.x_extent() / scenario.grid.nx as f64)).round() as usize;
    let locus: Vec<(f64, f64)> = helix.snapshots.iter().map(|s| s[station]).collect();
    let radii: Vec<f64> = locus.iter().map(|(y, z)| y.hypot(*z)).collect();
    let (lo, hi) = radii.iter().fold((f64::MAX, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    let mean = radii.iter().sum::<f64>() / radii.len() as f64;
    let spread = (hi - lo) / mean;
    // Viewed from upstream the viewer's right is -y. Summing the decrease of
    // atan2(-y, z) counts counterclockwise turns.
    let swept: f64 = locus
        .windows(2)
        .map(|w| {
            let d = (-w[0].0).atan2(w[0].1) - (-w[1].0).atan2(w[1].1);
            d - TAU * (d / TAU).round()
        })
        .sum();
    let turns = swept / TAU;

    let expected = model.advection_speed() / scenario.excitation_frequency().map_err(|e| e.to_string())?;
    let wavelength = tilt.wavelength.unwrap_or(f64::NAN);
    let slowest = [&tilt, &yaw, &helix].iter().map(|k| k.elapsed).max().unwrap();

    check(
        tilt_ratio < 0.01
            && yaw_ratio < 0.01
            && spread < 0.05
            && turns > 1.9
            && (wavelength / expected - 1.0).abs() <= 0.05
            && slowest < Duration::from_secs(30),
        format!(
            "grid {}x{}x{}: tilt |y|/|z| {tilt_ratio:.1e}, yaw |z|/|y| {yaw_ratio:.1e}, helix radius spread {:.2}% over {turns:.2} CCW turns, wavelength {wavelength:.1} m vs {expected:.1} m, slowest run {:.1} s",
            grid.0,
            grid.1,
            grid.2,
            100.0 * spread,
            slowest.as_secs_f64()
        ),
    )
}

fn criterion_6() -> Outcome {
    let scenario = Scenario::default();
    let kinds = [
        StrategyKind::Baseline,
        StrategyKind::YawDipc,
        StrategyKind::TiltDipc,
        StrategyKind::HelixCcw,
        StrategyKind::Sic,
    ];
    let runs = kinds
        .iter()
        .map(|&k| scenario.run(k))
        .collect::<helixwake::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let f_e = scenario.excitation_frequency().map_err(|e| e.to_string())?;
    let report = build_report(&runs, scenario.flow.turbulence_intensity, f_e).map_err(|e| e.to_string())?;
    let row = |k| report.row(k).unwrap();
    let (yaw, tilt, helix, sic) = (
        row(StrategyKind::YawDipc),
        row(StrategyKind::TiltDipc),
        row(StrategyKind::HelixCcw),
        row(StrategyKind::Sic),
    );

    let energy = (0..3).all(|i| helix.energy[i] > tilt.energy[i] && tilt.energy[i] > yaw.energy[i] && yaw.energy[i] > 0.0);
    let loss = |r: &helixwake::analysis::report::MetricsRow| -r.power_mean;
    let similar = |a: f64, b: f64| (a - b).abs() <= 0.1 * a.abs().max(b.abs());
    let power = loss(sic) > loss(helix) && loss(helix) > loss(tilt) && similar(loss(tilt), loss(yaw));
    let moments = helix.moment_var > tilt.moment_var && similar(tilt.moment_var, yaw.moment_var) && yaw.moment_var > 0.0;
    let anchors = (helix.energy[1] - 10.7).abs() <= 0.5 && (sic.power_mean + 4.0).abs() <= 0.5;
    check(
        energy && power && moments && anchors,
        format!(
            "energy 5D helix {:.2} > tilt {:.2} > yaw {:.2}%; power SIC {:.2}, helix {:.2}, tilt {:.2}, yaw {:.2}%; moment var helix {:.1}, tilt {:.1}, yaw {:.1}%",
            helix.energy[1],
            tilt.energy[1],
            yaw.energy[1],
            sic.power_mean,
            helix.power_mean,
            tilt.power_mean,
            yaw.power_mean,
            helix.moment_var,
            tilt.moment_var,
            yaw.moment_var
        ),
    )
}

fn criterion_7() -> Outcome {
    let scenario = Scenario {
        wake: WakeParams::default().frozen(),
        ..Scenario::default()
    };
    let run = scenario.run(StrategyKind::HelixCcw).map_err(|e| e.to_string())?;
    // Integrate over a wider cross-section so the displaced wake stays inside.
    let wide = Scenario {
        grid: WakeGridConfig {
            cross_extent: 6.0,
            ny: 96,
            nz: 96,
            ..scenario.grid
        },
        ..scenario.clone()
    };
    let model = wide.wake_model().map_err(|e| e.to_string())?;
    let u = scenario.flow.wind_speed;
    let state = &run.wake.final_state;
    let reference = model.slice(state, 0.0).map_err(|e| e.to_string())?.momentum_deficit_integral(u);
    let mut worst = 0.0f64;
    for rec in state.stations() {
        let m = model
            .slice(state, rec.x / scenario.turbine.diameter)
            .map_err(|e| e.to_string())?
            .momentum_deficit_integral(u);
        worst = worst.max((m / reference - 1.0).abs());
    }
    check(worst < 0.01, format!("largest deviation {:.3}% over {} stations", 100.0 * worst, state.stations().len()))
}

fn criterion_8() -> Outcome {
    let spec = SweepSpec {
        strategy: StrategyKind::HelixCcw,
        strouhal: GridAxis {
            min: 0.05,
            max: 0.6,
            count: 12,
        },
        amplitude: GridAxis {
            min: 0.0,
            max: 2.5,
            count: 2,
        },
        objective: Objective::Energy5D,
        penalty_weight: 0.0,
        periods: 10.0,
    };
    let start = Instant::now();
    let result = run_sweep(&spec, &Scenario::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !result.failures.is_empty() {
        return Err(format!("{} failed points", result.failures.len()));
    }
    let zero_row = result
        .points
        .iter()
        .filter(|p| p.amplitude == 0.0)
        .all(|p| p.objective == 0.0 && p.energy_delta.iter().all(|&e| e == 0.0));
    let best = result
        .points
        .iter()
        .filter(|p| p.amplitude > 0.0)
        .max_by(|a, b| a.objective.total_cmp(&b.objective))
        .ok_or("no excited points")?;
    let st = spec.strouhal.values();
    let interior = best.strouhal > st[0] && best.strouhal < st[st.len() - 1];
    check(
        result.points.len() == 24 && zero_row && interior && elapsed < Duration::from_secs(600),
        format!(
            "best St {:.2} ({:.2}% at 5D), A = 0 row zero: {zero_row}, {:.0} s",
            best.strouhal,
            best.objective,
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut payloads = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let args = CompareArgs {
            common: Common {
                config: None,
                out: Some(out.clone()),
                duration: None,
                dt: None,
            },
            strategy: Vec::new(),
        };
        cmd_compare(&args).map_err(|e| e.message)?;
        payloads.push(std::fs::read(out.join("report.csv")).map_err(|e| e.to_string())?);
    }
    check(
        payloads[0] == payloads[1],
        format!("report.csv {} bytes, identical: {}", payloads[0].len(), payloads[0] == payloads[1]),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("excitation frequency", criterion_1),
        ("pitch sidebands", criterion_2),
        ("pitch activity", criterion_3),
        ("MBC algebra", criterion_4),
        ("wake kinematics", criterion_5),
        ("strategy ordering", criterion_6),
        ("frozen-wake conservation", criterion_7),
        ("Strouhal sweep", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {} {name} ({secs:.1} s): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.1} s): {d}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
