//! Fixed-frame pitch references for each control strategy and the blade
//! pitch commands obtained from them through the inverse MBC transform.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, ensure_non_negative, ensure_positive, Error, Result};
use crate::mbc::{inverse_mbc, AzimuthState, BladeTriple, FixedFrameTriple};

/// Excitation amplitude used for every dynamic strategy unless overridden, in degrees.
pub const DEFAULT_AMPLITUDE_DEG: f64 = 2.5;

/// Strouhal number of the reference excitation.
pub const DEFAULT_STROUHAL: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    /// Greedy control, no pitch action.
    Baseline,
    /// Static induction control: constant collective derating.
    Sic,
    /// Dynamic induction control: collective pitch sinusoid.
    Dic,
    #[serde(rename = "yaw-dipc")]
    YawDipc,
    #[serde(rename = "tilt-dipc")]
    TiltDipc,
    #[serde(rename = "helix-ccw")]
    HelixCcw,
    #[serde(rename = "helix-cw")]
    HelixCw,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 7] = [
        StrategyKind::Baseline,
        StrategyKind::Sic,
        StrategyKind::Dic,
        StrategyKind::YawDipc,
        StrategyKind::TiltDipc,
        StrategyKind::HelixCcw,
        StrategyKind::HelixCw,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Baseline => "baseline",
            StrategyKind::Sic => "sic",
            StrategyKind::Dic => "dic",
            StrategyKind::YawDipc => "yaw-dipc",
            StrategyKind::TiltDipc => "tilt-dipc",
            StrategyKind::HelixCcw => "helix-ccw",
            StrategyKind::HelixCw => "helix-cw",
        }
    }

    /// Column label used in the merged results table.
    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::Baseline => "Baseline",
            StrategyKind::Sic => "SIC",
            StrategyKind::Dic => "DIC",
            StrategyKind::YawDipc => "Yaw DIPC",
            StrategyKind::TiltDipc => "Tilt DIPC",
            StrategyKind::HelixCcw => "CCW Helix",
            StrategyKind::HelixCw => "CW Helix",
        }
    }

    /// Whether the strategy varies pitch over time.
    pub fn is_dynamic(&self) -> bool {
        !matches!(self, StrategyKind::Baseline | StrategyKind::Sic)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s.trim().to_ascii_lowercase().as_str() {
            "baseline" | "greedy" => StrategyKind::Baseline,
            "sic" => StrategyKind::Sic,
            "dic" => StrategyKind::Dic,
            "yaw" | "yaw-dipc" | "yawdipc" => StrategyKind::YawDipc,
            "tilt" | "tilt-dipc" | "tiltdipc" => StrategyKind::TiltDipc,
            "helix" | "helix-ccw" | "ccw" => StrategyKind::HelixCcw,
            "helix-cw" | "cw" => StrategyKind::HelixCw,
            other => return Err(Error::invalid("strategy", format!("unknown strategy `{other}`"))),
        };
        Ok(kind)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExcitationParams {
    pub strouhal: f64,
    /// Pitch excitation amplitude, deg.
    pub amplitude: f64,
    /// Phase added to the excitation sinusoid, rad.
    pub phase_offset: f64,
    /// Linear ramp-in time of the amplitude, s (0 disables).
    pub start_ramp: f64,
}

impl Default for ExcitationParams {
    fn default() -> Self {
        Self {
            strouhal: DEFAULT_STROUHAL,
            amplitude: DEFAULT_AMPLITUDE_DEG,
            phase_offset: 0.0,
            start_ramp: 0.0,
        }
    }
}

impl ExcitationParams {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("excitation.strouhal", self.strouhal)?;
        ensure_non_negative("excitation.amplitude", self.amplitude)?;
        ensure_finite("excitation.phase_offset", self.phase_offset)?;
        ensure_non_negative("excitation.start_ramp", self.start_ramp)?;
        Ok(())
    }

    fn envelope(&self, t: f64) -> f64 {
        if self.start_ramp > 0.0 {
            (t / self.start_ramp).clamp(0.0, 1.0)
        } else {
            1.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    pub excitation: ExcitationParams,
    /// Constant collective pitch offset for SIC, deg.
    pub derate_pitch_offset: f64,
}

impl StrategyConfig {
    pub fn new(kind: StrategyKind, excitation: ExcitationParams, derate_pitch_offset: f64) -> Result<Self> {
        let cfg = Self {
            kind,
            excitation,
            derate_pitch_offset,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn baseline() -> Self {
        Self {
            kind: StrategyKind::Baseline,
            excitation: ExcitationParams::default(),
            derate_pitch_offset: 0.0,
        }
    }

    /// Strategy with default excitation parameters and no derating.
    pub fn with_kind(kind: StrategyKind) -> Self {
        Self {
            kind,
            ..Self::baseline()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.excitation.validate()?;
        ensure_non_negative("excitation.sic_offset", self.derate_pitch_offset)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowConditions {
    /// Free-stream wind speed, m/s.
    pub wind_speed: f64,
    /// Turbulence intensity as a fraction.
    pub turbulence_intensity: f64,
    /// Air density, kg/m³.
    pub air_density: f64,
}

impl Default for FlowConditions {
    fn default() -> Self {
        Self {
            wind_speed: 8.0,
            turbulence_intensity: 0.059,
            air_density: 1.225,
        }
    }
}

impl FlowConditions {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("flow.wind_speed", self.wind_speed)?;
        ensure_non_negative("flow.turbulence_intensity", self.turbulence_intensity)?;
        ensure_positive("flow.air_density", self.air_density)?;
        Ok(())
    }
}

/// Excitation frequency `St·U/D` in Hz.
pub fn excitation_frequency(strouhal: f64, flow: &FlowConditions, diameter: f64) -> Result<f64> {
    ensure_positive("strouhal", strouhal)?;
    ensure_positive("flow.wind_speed", flow.wind_speed)?;
    ensure_positive("diameter", diameter)?;
    Ok(strouhal * flow.wind_speed / diameter)
}

/// Fixed-frame pitch reference (deg) at time `t`.
pub fn fixed_frame_reference(
    cfg: &StrategyConfig,
    flow: &FlowConditions,
    diameter: f64,
    t: f64,
) -> Result<FixedFrameTriple> {
    ensure_non_negative("t", t)?;
    let kind = cfg.kind;
    if !kind.is_dynamic() {
        let collective = if kind == StrategyKind::Sic {
            cfg.derate_pitch_offset
        } else {
            0.0
        };
        return Ok(FixedFrameTriple::new(collective, 0.0, 0.0));
    }

    let ex = &cfg.excitation;
    let f_e = excitation_frequency(ex.strouhal, flow, diameter)?;
    let amp = ex.amplitude * ex.envelope(t);
    let phase = TAU * f_e * t + ex.phase_offset;
    let (s, c) = phase.sin_cos();
    let r = match kind {
        StrategyKind::Dic => FixedFrameTriple::new(amp * s, 0.0, 0.0),
        StrategyKind::TiltDipc => FixedFrameTriple::new(0.0, amp * s, 0.0),
        StrategyKind::YawDipc => FixedFrameTriple::new(0.0, 0.0, amp * s),
        StrategyKind::HelixCcw => FixedFrameTriple::new(0.0, amp * s, amp * c),
        StrategyKind::HelixCw => FixedFrameTriple::new(0.0, amp * s, -amp * c),
        StrategyKind::Baseline | StrategyKind::Sic => unreachable!(),
    };
    Ok(r)
}

/// Individual blade pitch commands (deg). `azimuth_offset` rotates the frame
/// used by the inverse transform.
pub fn blade_pitch_command(
    cfg: &StrategyConfig,
    flow: &FlowConditions,
    diameter: f64,
    az: &AzimuthState,
    azimuth_offset: f64,
    t: f64,
) -> Result<BladeTriple> {
    let fixed = fixed_frame_reference(cfg, flow, diameter, t)?;
    Ok(inverse_mbc(&az.shifted(azimuth_offset), &fixed))
}

/// Frequencies (Hz) at which the rotating-frame pitch signal carries energy.
pub fn predicted_pitch_frequencies(kind: StrategyKind, f_r: f64, f_e: f64) -> Result<Vec<f64>> {
    ensure_non_negative("f_e", f_e)?;
    ensure_finite("f_r", f_r)?;
    if f_e >= f_r {
        return Err(Error::invalid(
            "f_e",
            format!("excitation frequency {f_e} Hz must stay below the rotation frequency {f_r} Hz"),
        ));
    }
    let freqs = match kind {
        StrategyKind::Baseline | StrategyKind::Sic => vec![],
        StrategyKind::Dic => vec![f_e],
        StrategyKind::TiltDipc | StrategyKind::YawDipc => vec![f_r - f_e, f_r + f_e],
        StrategyKind::HelixCcw => vec![f_r + f_e],
        StrategyKind::HelixCw => vec![f_r - f_e],
    };
    Ok(freqs)
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: f64 = 126.4;

    fn flow() -> FlowConditions {
        FlowConditions::default()
    }

    #[test]
    fn strouhal_frequency() {
        let f = excitation_frequency(0.25, &flow(), D).unwrap();
        assert!((f - 0.015_823).abs() < 1e-6);
        let fast = FlowConditions {
            wind_speed: 16.0,
            ..flow()
        };
        assert!((excitation_frequency(0.25, &fast, D).unwrap() - 0.031_646).abs() < 1e-6);
        assert!(excitation_frequency(0.0, &flow(), D).is_err());
        assert!(excitation_frequency(0.25, &flow(), -1.0).is_err());
    }

    #[test]
    fn reference_per_strategy() {
        let f_e = excitation_frequency(0.25, &flow(), D).unwrap();
        let t_peak = 0.25 / f_e;
        let base = fixed_frame_reference(&StrategyConfig::baseline(), &flow(), D, t_peak).unwrap();
        assert_eq!(base, FixedFrameTriple::default());

        let tilt = StrategyConfig::with_kind(StrategyKind::TiltDipc);
        let r = fixed_frame_reference(&tilt, &flow(), D, t_peak).unwrap();
        assert!((r.tilt - 2.5).abs() < 1e-12 && r.yaw == 0.0 && r.collective == 0.0);

        let yaw = StrategyConfig::with_kind(StrategyKind::YawDipc);
        let r = fixed_frame_reference(&yaw, &flow(), D, t_peak).unwrap();
        assert!((r.yaw - 2.5).abs() < 1e-12 && r.tilt == 0.0);

        let sic = StrategyConfig {
            derate_pitch_offset: 1.7,
            ..StrategyConfig::with_kind(StrategyKind::Sic)
        };
        let r = fixed_frame_reference(&sic, &flow(), D, 3.0).unwrap();
        assert_eq!(r, FixedFrameTriple::new(1.7, 0.0, 0.0));

        let dic = StrategyConfig::with_kind(StrategyKind::Dic);
        let r = fixed_frame_reference(&dic, &flow(), D, t_peak).unwrap();
        assert!((r.collective - 2.5).abs() < 1e-12);
    }

    #[test]
    fn helix_has_constant_modulus() {
        let helix = StrategyConfig::with_kind(StrategyKind::HelixCcw);
        for i in 0..500 {
            let t = i as f64 * 0.73;
            let r = fixed_frame_reference(&helix, &flow(), D, t).unwrap();
            assert!((r.tilt.hypot(r.yaw) - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn ccw_and_cw_mirror_through_yaw_sign() {
        let ccw = StrategyConfig::with_kind(StrategyKind::HelixCcw);
        let cw = StrategyConfig::with_kind(StrategyKind::HelixCw);
        for i in 0..100 {
            let t = i as f64 * 1.3;
            let a = fixed_frame_reference(&ccw, &flow(), D, t).unwrap();
            let b = fixed_frame_reference(&cw, &flow(), D, t).unwrap();
            assert_eq!(a.tilt, b.tilt);
            assert_eq!(a.yaw, -b.yaw);
        }
    }

    #[test]
    fn start_ramp_scales_amplitude() {
        let mut cfg = StrategyConfig::with_kind(StrategyKind::TiltDipc);
        cfg.excitation.start_ramp = 100.0;
        let f_e = excitation_frequency(0.25, &flow(), D).unwrap();
        let t_peak = 0.25 / f_e;
        let r = fixed_frame_reference(&cfg, &flow(), D, t_peak).unwrap();
        assert!((r.tilt - 2.5 * t_peak / 100.0).abs() < 1e-12);
    }

    #[test]
    fn pitch_command_bounded_by_collective_plus_amplitude() {
        let mut az = AzimuthState::upright();
        for kind in StrategyKind::ALL {
            let cfg = StrategyConfig {
                derate_pitch_offset: 2.0,
                ..StrategyConfig::with_kind(kind)
            };
            for i in 0..400 {
                let t = i as f64 * 0.37;
                az = az.advance(0.9557, 0.37).unwrap();
                let fixed = fixed_frame_reference(&cfg, &flow(), D, t).unwrap();
                let cmd = blade_pitch_command(&cfg, &flow(), D, &az, 0.0, t).unwrap();
                let bound = fixed.collective.abs() + cfg.excitation.amplitude;
                assert!(cmd.iter().all(|v| v.abs() <= bound + 1e-12), "{kind}");
            }
        }
    }

    #[test]
    fn baseline_command_is_zero() {
        let cfg = StrategyConfig::baseline();
        let az = AzimuthState::new(1.234).unwrap();
        let cmd = blade_pitch_command(&cfg, &flow(), D, &az, 0.0, 55.0).unwrap();
        assert_eq!(cmd, BladeTriple::splat(0.0));
    }

    #[test]
    fn predicted_frequencies() {
        let f = predicted_pitch_frequencies(StrategyKind::TiltDipc, 0.2, 0.016).unwrap();
        assert!((f[0] - 0.184).abs() < 1e-12 && (f[1] - 0.216).abs() < 1e-12);
        assert!(predicted_pitch_frequencies(StrategyKind::Baseline, 0.2, 0.016)
            .unwrap()
            .is_empty());
        let f = predicted_pitch_frequencies(StrategyKind::HelixCcw, 0.153, 0.0158).unwrap();
        assert_eq!(f.len(), 1);
        assert!((f[0] - 0.1688).abs() < 1e-12);
        let f = predicted_pitch_frequencies(StrategyKind::HelixCw, 0.153, 0.0158).unwrap();
        assert!((f[0] - 0.1372).abs() < 1e-12);
        assert_eq!(predicted_pitch_frequencies(StrategyKind::Dic, 0.2, 0.016).unwrap(), vec![0.016]);
        assert!(predicted_pitch_frequencies(StrategyKind::TiltDipc, 0.2, 0.2).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for kind in StrategyKind::ALL {
            assert_eq!(kind.name().parse::<StrategyKind>().unwrap(), kind);
        }
        assert_eq!("helix".parse::<StrategyKind>().unwrap(), StrategyKind::HelixCcw);
        assert!("pulse".parse::<StrategyKind>().is_err());
    }
}
