//! Quasi-steady actuator-disk rotor model of the NREL 5MW reference turbine.
//!
//! Blade loads are linearized about the greedy operating point: each blade
//! carries a third of the disk thrust, scaled by `1 - k_θ·θ_b`. Power is
//! quadratic in pitch because the greedy point sits at the top of the
//! power-coefficient curve.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::excitation::{
    blade_pitch_command, excitation_frequency, FlowConditions, StrategyConfig, DEFAULT_AMPLITUDE_DEG,
};
use crate::mbc::{forward_mbc, rotation_frequency, rpm_to_rad_per_s, AzimuthState, BladeTriple, FixedFrameTriple};

/// Largest blade pitch magnitude the linearization is trusted for, deg.
pub const MAX_PITCH_DEG: f64 = 30.0;

/// Power loss of the CCW helix at 2.5° used to calibrate the quadratic power gain.
pub const HELIX_POWER_LOSS_TARGET: f64 = 0.023;
/// Power loss the static derating offset is calibrated to.
pub const SIC_POWER_LOSS_TARGET: f64 = 0.040;
/// Thrust reduction of static derating used to calibrate the thrust gain.
pub const SIC_THRUST_LOSS_TARGET: f64 = 0.086;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TurbineParams {
    /// Rotor diameter, m.
    pub diameter: f64,
    pub hub_height: f64,
    pub rated_rotor_speed_rpm: f64,
    pub rated_wind_speed: f64,
    /// Below-rated tip-speed ratio.
    pub tip_speed_ratio: f64,
    pub baseline_ct: f64,
    pub baseline_cp: f64,
    /// Relative thrust reduction per degree of blade pitch, 1/deg.
    pub pitch_thrust_gain: f64,
    /// Linear relative power reduction per degree of mean pitch, 1/deg.
    pub pitch_power_gain: f64,
    /// Quadratic relative power reduction per deg² of mean squared pitch.
    pub pitch_power_quadratic_gain: f64,
    /// Effective radius of the blade load, as a fraction of the tip radius.
    pub moment_arm_fraction: f64,
    /// Azimuth offset applied inside the inverse MBC, rad.
    pub azimuth_offset: f64,
    /// Fixed operating speed, rpm. `None` uses the tip-speed-ratio schedule.
    pub rotor_speed_rpm: Option<f64>,
}

impl Default for TurbineParams {
    fn default() -> Self {
        let quadratic = power_quadratic_gain_for(HELIX_POWER_LOSS_TARGET, DEFAULT_AMPLITUDE_DEG);
        let sic_offset = pitch_offset_for_power_loss(0.0, quadratic, SIC_POWER_LOSS_TARGET);
        Self {
            diameter: 126.4,
            hub_height: 90.0,
            rated_rotor_speed_rpm: 12.1,
            rated_wind_speed: 11.4,
            tip_speed_ratio: 7.55,
            baseline_ct: 0.77,
            baseline_cp: 0.47,
            pitch_thrust_gain: SIC_THRUST_LOSS_TARGET / sic_offset,
            pitch_power_gain: 0.0,
            pitch_power_quadratic_gain: quadratic,
            moment_arm_fraction: 0.75,
            azimuth_offset: 0.0,
            rotor_speed_rpm: None,
        }
    }
}

impl TurbineParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("turbine.diameter", self.diameter)?;
        ensure_positive("turbine.hub_height", self.hub_height)?;
        ensure_positive("turbine.rated_rotor_speed_rpm", self.rated_rotor_speed_rpm)?;
        ensure_positive("turbine.rated_wind_speed", self.rated_wind_speed)?;
        ensure_positive("turbine.tip_speed_ratio", self.tip_speed_ratio)?;
        ensure_positive("turbine.baseline_ct", self.baseline_ct)?;
        if self.baseline_ct >= 1.0 {
            return Err(Error::invalid("turbine.baseline_ct", "must be < 1"));
        }
        ensure_positive("turbine.baseline_cp", self.baseline_cp)?;
        if self.baseline_cp >= 16.0 / 27.0 {
            return Err(Error::invalid("turbine.baseline_cp", "must be below the Betz limit 16/27"));
        }
        ensure_non_negative("turbine.pitch_thrust_gain", self.pitch_thrust_gain)?;
        ensure_non_negative("turbine.pitch_power_gain", self.pitch_power_gain)?;
        ensure_non_negative("turbine.pitch_power_quadratic_gain", self.pitch_power_quadratic_gain)?;
        ensure_positive("turbine.moment_arm_fraction", self.moment_arm_fraction)?;
        if self.moment_arm_fraction > 1.0 {
            return Err(Error::invalid("turbine.moment_arm_fraction", "must be <= 1"));
        }
        crate::error::ensure_finite("turbine.azimuth_offset", self.azimuth_offset)?;
        if let Some(rpm) = self.rotor_speed_rpm {
            ensure_non_negative("turbine.rotor_speed_rpm", rpm)?;
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    pub fn rotor_area(&self) -> f64 {
        PI * self.radius() * self.radius()
    }

    /// Collective pitch offset that derates power by [`SIC_POWER_LOSS_TARGET`].
    pub fn sic_offset(&self) -> f64 {
        pitch_offset_for_power_loss(self.pitch_power_gain, self.pitch_power_quadratic_gain, SIC_POWER_LOSS_TARGET)
    }
}

/// Quadratic power gain so that a pitch sinusoid of `amplitude` on every
/// blade (mean square `A²/2`) costs `loss` of the mean power.
pub fn power_quadratic_gain_for(loss: f64, amplitude: f64) -> f64 {
    loss / (0.5 * amplitude * amplitude)
}

/// Positive root of `linear·δ + quadratic·δ² = loss`.
pub fn pitch_offset_for_power_loss(linear: f64, quadratic: f64, loss: f64) -> f64 {
    if quadratic == 0.0 {
        return if linear > 0.0 { loss / linear } else { 0.0 };
    }
    (-linear + (linear * linear + 4.0 * quadratic * loss).sqrt()) / (2.0 * quadratic)
}

/// Dynamic pressure times area, `½ρAU²`.
pub fn disk_force_scale(params: &TurbineParams, flow: &FlowConditions) -> f64 {
    0.5 * flow.air_density * params.rotor_area() * flow.wind_speed * flow.wind_speed
}

/// Operating rotor speed in rad/s.
pub fn rotor_speed_for_wind(params: &TurbineParams, flow: &FlowConditions) -> Result<f64> {
    ensure_positive("flow.wind_speed", flow.wind_speed)?;
    if let Some(rpm) = params.rotor_speed_rpm {
        return Ok(rpm_to_rad_per_s(rpm));
    }
    let scheduled = params.tip_speed_ratio * flow.wind_speed / params.radius();
    Ok(scheduled.min(rpm_to_rad_per_s(params.rated_rotor_speed_rpm)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladeLoad {
    /// Axial force, N.
    pub force: f64,
    /// Flapwise root moment, N·m.
    pub root_moment: f64,
}

pub fn blade_loads(
    params: &TurbineParams,
    flow: &FlowConditions,
    pitch: &BladeTriple,
    _az: &AzimuthState,
) -> Result<[BladeLoad; 3]> {
    if !pitch.is_finite() {
        return Err(Error::ModelValidity(format!("non-finite pitch {:?}", pitch.0)));
    }
    if let Some(p) = pitch.iter().find(|p| p.abs() > MAX_PITCH_DEG) {
        return Err(Error::ModelValidity(format!(
            "blade pitch {p}° outside the ±{MAX_PITCH_DEG}° linearization range"
        )));
    }
    let share = disk_force_scale(params, flow) * params.baseline_ct / 3.0;
    let arm = params.moment_arm_fraction * params.radius();
    Ok(pitch.0.map(|theta| {
        let force = (share * (1.0 - params.pitch_thrust_gain * theta)).max(0.0);
        BladeLoad {
            force,
            root_moment: force * arm,
        }
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotorOutput {
    /// Total thrust, N.
    pub thrust: f64,
    /// Fixed-frame projection of the root moments, N·m.
    pub moments: FixedFrameTriple,
    /// Aerodynamic power, W.
    pub power: f64,
}

pub fn aggregate(
    params: &TurbineParams,
    flow: &FlowConditions,
    loads: &[BladeLoad; 3],
    pitch: &BladeTriple,
    az: &AzimuthState,
) -> RotorOutput {
    let thrust = loads.iter().map(|l| l.force).sum();
    // The cyclic rows sum to zero, so projecting deviations from blade 1
    // gives the same tilt and yaw, exactly zero for equal loads.
    let root = loads.map(|l| l.root_moment);
    let cyclic = forward_mbc(az, &BladeTriple(root.map(|m| m - root[0])));
    let moments = FixedFrameTriple::new(root.iter().sum::<f64>() / 3.0, cyclic.tilt, cyclic.yaw);
    let mean = pitch.mean();
    let mean_sq = pitch.iter().map(|p| p * p).sum::<f64>() / 3.0;
    let derate = 1.0 - params.pitch_power_gain * mean - params.pitch_power_quadratic_gain * mean_sq;
    let free_power = disk_force_scale(params, flow) * flow.wind_speed * params.baseline_cp;
    RotorOutput {
        thrust,
        moments,
        power: (free_power * derate).max(0.0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbineSample {
    pub t: f64,
    pub psi: f64,
    pub pitch: [f64; 3],
    pub force: [f64; 3],
    pub moment: [f64; 3],
    pub thrust: f64,
    pub m_tilt: f64,
    pub m_yaw: f64,
    pub power: f64,
}

impl TurbineSample {
    pub fn is_finite(&self) -> bool {
        [self.t, self.psi, self.thrust, self.m_tilt, self.m_yaw, self.power]
            .iter()
            .chain(&self.pitch)
            .chain(&self.force)
            .chain(&self.moment)
            .all(|v| v.is_finite())
    }
}

/// Uniformly sampled turbine response.
#[derive(Debug, Clone, PartialEq)]
pub struct TurbineTimeSeries {
    pub dt: f64,
    pub samples: Vec<TurbineSample>,
}

impl TurbineTimeSeries {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    pub fn channel(&self, f: impl Fn(&TurbineSample) -> f64) -> Vec<f64> {
        self.samples.iter().map(f).collect()
    }

    pub fn power(&self) -> Vec<f64> {
        self.channel(|s| s.power)
    }

    pub fn thrust(&self) -> Vec<f64> {
        self.channel(|s| s.thrust)
    }

    /// Flapwise root moment of blade 1.
    pub fn blade_moment(&self) -> Vec<f64> {
        self.channel(|s| s.moment[0])
    }

    pub fn pitch(&self, blade: usize) -> Vec<f64> {
        self.channel(|s| s.pitch[blade])
    }

    /// Checks strictly increasing, uniformly spaced, finite samples.
    pub fn validate(&self) -> Result<()> {
        ensure_positive("dt", self.dt)?;
        for (i, pair) in self.samples.windows(2).enumerate() {
            let step = pair[1].t - pair[0].t;
            if (step - self.dt).abs() > 1e-6 * self.dt.max(1.0) {
                return Err(Error::invalid("t", format!("non-uniform step {step} at sample {}", i + 1)));
            }
        }
        if let Some(i) = self.samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::invalid("samples", format!("non-finite value at sample {i}")));
        }
        Ok(())
    }
}

/// Largest time step that keeps 20 samples per period of the fastest pitch tone.
pub fn max_time_step(rotor_speed: f64, f_e: f64) -> f64 {
    (1.0 / 20.0) / (rotation_frequency(rotor_speed) + f_e)
}

pub fn simulate_turbine(
    cfg: &StrategyConfig,
    params: &TurbineParams,
    flow: &FlowConditions,
    duration: f64,
    dt: f64,
) -> Result<TurbineTimeSeries> {
    cfg.validate()?;
    params.validate()?;
    flow.validate()?;
    ensure_positive("duration", duration)?;
    ensure_positive("dt", dt)?;

    let omega = rotor_speed_for_wind(params, flow)?;
    let f_e = excitation_frequency(cfg.excitation.strouhal, flow, params.diameter)?;
    let dt_max = max_time_step(omega, f_e);
    if dt > dt_max {
        return Err(Error::invalid(
            "dt",
            format!("{dt} s exceeds the sampling bound {dt_max:.4} s for f_r + f_e"),
        ));
    }
    if cfg.kind.is_dynamic() && duration * f_e < 2.0 {
        return Err(Error::invalid(
            "duration",
            format!("{duration} s covers fewer than two excitation periods ({:.1} s each)", 1.0 / f_e),
        ));
    }

    let n = (duration / dt).round() as usize;
    let mut az = AzimuthState::upright();
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 * dt;
        let pitch = blade_pitch_command(cfg, flow, params.diameter, &az, params.azimuth_offset, t)?;
        let loads = blade_loads(params, flow, &pitch, &az)?;
        let out = aggregate(params, flow, &loads, &pitch, &az);
        samples.push(TurbineSample {
            t,
            psi: az.psi_1(),
            pitch: pitch.0,
            force: loads.map(|l| l.force),
            moment: loads.map(|l| l.root_moment),
            thrust: out.thrust,
            m_tilt: out.moments.tilt,
            m_yaw: out.moments.yaw,
            power: out.power,
        });
        az = az.advance(omega, dt)?;
    }
    Ok(TurbineTimeSeries { dt, samples })
}
