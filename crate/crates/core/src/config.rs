//! TOML run configuration.
//!
//! ```toml
//! duration = 1200.0
//! dt = 0.1
//! output_dir = "out"
//! strategies = ["baseline", "tilt-dipc", "helix-ccw"]
//!
//! [flow]
//! wind_speed = 8.0
//!
//! [excitation]
//! strouhal = 0.25
//! amplitude = 2.5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::energy::EnergyFlux;
use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::excitation::{ExcitationParams, FlowConditions, StrategyKind};
use crate::rotor::TurbineParams;
use crate::scenario::Scenario;
use crate::wake::{WakeGridConfig, WakeParams};

/// Excitation periods a run must cover after spin-up.
pub const MIN_ANALYSIS_PERIODS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExcitationSection {
    pub strouhal: f64,
    pub amplitude: f64,
    pub phase_offset: f64,
    pub start_ramp: f64,
    /// SIC collective offset, deg. Omitted means the calibrated derating.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sic_offset: Option<f64>,
}

impl Default for ExcitationSection {
    fn default() -> Self {
        let p = ExcitationParams::default();
        Self {
            strouhal: p.strouhal,
            amplitude: p.amplitude,
            phase_offset: p.phase_offset,
            start_ramp: p.start_ramp,
            sic_offset: None,
        }
    }
}

impl ExcitationSection {
    pub fn params(&self) -> ExcitationParams {
        ExcitationParams {
            strouhal: self.strouhal,
            amplitude: self.amplitude,
            phase_offset: self.phase_offset,
            start_ramp: self.start_ramp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    /// Seconds between wake energy samples.
    pub sample_interval: f64,
    pub flux: EnergyFlux,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            sample_interval: 1.0,
            flux: EnergyFlux::Power,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub duration: f64,
    pub dt: f64,
    pub output_dir: PathBuf,
    /// Reserved. The model is deterministic.
    pub seed: u64,
    pub strategies: Vec<StrategyKind>,
    pub turbine: TurbineParams,
    pub flow: FlowConditions,
    pub excitation: ExcitationSection,
    pub grid: WakeGridConfig,
    pub wake: WakeParams,
    pub analysis: AnalysisSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            duration: 1200.0,
            dt: 0.1,
            output_dir: PathBuf::from("out"),
            seed: 0,
            strategies: vec![
                StrategyKind::Baseline,
                StrategyKind::YawDipc,
                StrategyKind::TiltDipc,
                StrategyKind::HelixCcw,
                StrategyKind::Dic,
                StrategyKind::Sic,
            ],
            turbine: TurbineParams::default(),
            flow: FlowConditions::default(),
            excitation: ExcitationSection::default(),
            grid: WakeGridConfig::default(),
            wake: WakeParams::default(),
            analysis: AnalysisSection::default(),
        }
    }
}

impl RunConfig {
    /// Parses and validates a TOML document.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    pub fn scenario(&self) -> Scenario {
        Scenario {
            turbine: self.turbine,
            flow: self.flow,
            grid: self.grid,
            wake: self.wake,
            excitation: self.excitation.params(),
            sic_offset: self.excitation.sic_offset,
            duration: self.duration,
            dt: self.dt,
            sample_interval: self.analysis.sample_interval,
            flux: self.analysis.flux,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_positive("duration", self.duration)?;
        ensure_positive("dt", self.dt)?;
        ensure_positive("analysis.sample_interval", self.analysis.sample_interval)?;
        if let Some(offset) = self.excitation.sic_offset {
            ensure_non_negative("excitation.sic_offset", offset)?;
        }
        if self.strategies.is_empty() {
            return Err(Error::invalid("strategies", "at least one strategy is required"));
        }
        let scenario = self.scenario();
        scenario.validate()?;
        // Builds the wake model, which checks the advective CFL bound.
        scenario.wake_model()?;
        let needed = scenario.minimum_duration(MIN_ANALYSIS_PERIODS)?;
        if self.duration + 1e-9 < needed {
            return Err(Error::invalid(
                "duration",
                format!("must cover spin-up plus {MIN_ANALYSIS_PERIODS} excitation periods ({needed:.1} s), got {}", self.duration),
            ));
        }
        Ok(())
    }

    /// SHA-256 of the canonical TOML serialization, hex encoded. The output
    /// directory does not affect results and is left out.
    pub fn hash(&self) -> String {
        let canonical = RunConfig {
            output_dir: PathBuf::new(),
            ..self.clone()
        };
        hex_digest(canonical.to_toml().as_bytes())
    }

    /// Strategy list with the baseline first, added when missing, and
    /// duplicates removed.
    pub fn strategies_with_baseline(&self) -> Vec<StrategyKind> {
        let mut out = vec![StrategyKind::Baseline];
        for &k in &self.strategies {
            if !out.contains(&k) {
                out.push(k);
            }
        }
        out
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = RunConfig::from_toml("").unwrap();
        assert_eq!(cfg, RunConfig::default());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.excitation.sic_offset = Some(1.5);
        cfg.turbine.rotor_speed_rpm = Some(9.13);
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.flow.wind_speed = 8.5;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        let c = RunConfig {
            output_dir: PathBuf::from("elsewhere"),
            ..a.clone()
        };
        assert_eq!(a.hash(), c.hash());
    }

    #[test]
    fn negative_wind_names_field() {
        let err = RunConfig::from_toml("[flow]\nwind_speed = -8.0\n").unwrap_err();
        assert!(err.to_string().contains("flow.wind_speed"), "{err}");
    }

    #[test]
    fn syntax_error_reports_line() {
        let err = RunConfig::from_toml("duration = 1200\n[flow\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let err = RunConfig::from_toml("[flow]\nwind = 8.0\n").unwrap_err();
        assert!(err.to_string().contains("wind"), "{err}");
    }

    #[test]
    fn unknown_strategy_rejected() {
        assert!(RunConfig::from_toml("strategies = [\"baseline\", \"swirl\"]\n").is_err());
    }

    #[test]
    fn short_duration_rejected() {
        let err = RunConfig::from_toml("duration = 300.0\n").unwrap_err();
        assert!(err.to_string().contains("duration"), "{err}");
    }

    #[test]
    fn oversized_grid_rejected() {
        let err = RunConfig::from_toml("[grid]\nnx = 1000000000\n").unwrap_err();
        assert!(err.to_string().contains("grid.nx"), "{err}");
    }

    #[test]
    fn baseline_is_implied() {
        let cfg = RunConfig::from_toml("strategies = [\"helix-ccw\", \"tilt-dipc\", \"helix-ccw\"]\n").unwrap();
        assert_eq!(
            cfg.strategies_with_baseline(),
            vec![StrategyKind::Baseline, StrategyKind::HelixCcw, StrategyKind::TiltDipc]
        );
    }
}
