//! Couples the rotor and the wake for one strategy and collects the wake
//! quantities the report needs.

use crate::analysis::energy::{streamtube_energy_with, DiskWeights, EnergyFlux};
use crate::analysis::stats::analysis_window_start;
use crate::error::{ensure_positive, Error, Result};
use crate::excitation::{excitation_frequency, ExcitationParams, FlowConditions, StrategyConfig, StrategyKind};
use crate::rotor::{simulate_turbine, TurbineParams, TurbineTimeSeries};
use crate::wake::{SliceField, WakeGridConfig, WakeModel, WakeParams, WakeState};

/// Downstream planes (in D) at which streamtube energy is reported.
pub const REPORT_PLANES: [f64; 3] = [3.0, 5.0, 7.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub turbine: TurbineParams,
    pub flow: FlowConditions,
    pub grid: WakeGridConfig,
    pub wake: WakeParams,
    pub excitation: ExcitationParams,
    /// SIC collective offset, deg. `None` uses the calibrated derating.
    pub sic_offset: Option<f64>,
    pub duration: f64,
    pub dt: f64,
    /// Time between wake energy samples, s.
    pub sample_interval: f64,
    pub flux: EnergyFlux,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            turbine: TurbineParams::default(),
            flow: FlowConditions::default(),
            grid: WakeGridConfig::default(),
            wake: WakeParams::default(),
            excitation: ExcitationParams::default(),
            sic_offset: None,
            duration: 1200.0,
            dt: 0.1,
            sample_interval: 1.0,
            flux: EnergyFlux::Power,
        }
    }
}

/// Extra outputs requested from a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    /// Planes (in D) for which the time-mean slice over the analysis window is kept.
    pub mean_slice_planes: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct WakeHistory {
    /// Start of the analysis window, s.
    pub window_start: f64,
    pub sample_times: Vec<f64>,
    /// Streamtube energy per sample, one entry per [`REPORT_PLANES`] plane.
    pub energies: Vec<[f64; 3]>,
    pub mean_slices: Vec<SliceField>,
    pub final_state: WakeState,
}

impl WakeHistory {
    pub fn mean_energy(&self) -> [f64; 3] {
        let n = self.energies.len().max(1) as f64;
        let mut out = [0.0; 3];
        for e in &self.energies {
            for (o, v) in out.iter_mut().zip(e) {
                *o += v;
            }
        }
        out.map(|v| v / n)
    }

    pub fn mean_slice(&self, x_over_d: f64) -> Option<&SliceField> {
        self.mean_slices.iter().find(|s| (s.x_over_d - x_over_d).abs() < 1e-9)
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub strategy: StrategyConfig,
    pub series: TurbineTimeSeries,
    pub wake: WakeHistory,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.turbine.validate()?;
        self.flow.validate()?;
        self.grid.validate()?;
        self.wake.validate()?;
        self.excitation.validate()?;
        ensure_positive("duration", self.duration)?;
        ensure_positive("dt", self.dt)?;
        ensure_positive("sample_interval", self.sample_interval)?;
        if let Some(offset) = self.sic_offset {
            crate::error::ensure_non_negative("excitation.sic_offset", offset)?;
        }
        if self.grid.x_extent < REPORT_PLANES[2] {
            return Err(Error::invalid(
                "grid.x_extent",
                format!("must reach the {}D report plane", REPORT_PLANES[2]),
            ));
        }
        Ok(())
    }

    pub fn strategy(&self, kind: StrategyKind) -> StrategyConfig {
        StrategyConfig {
            kind,
            excitation: self.excitation,
            derate_pitch_offset: if kind == StrategyKind::Sic {
                self.sic_offset.unwrap_or_else(|| self.turbine.sic_offset())
            } else {
                0.0
            },
        }
    }

    pub fn excitation_frequency(&self) -> Result<f64> {
        excitation_frequency(self.excitation.strouhal, &self.flow, self.turbine.diameter)
    }

    pub fn wake_model(&self) -> Result<WakeModel> {
        let f_e = self.excitation_frequency()?;
        WakeModel::new(self.grid, self.wake, &self.turbine, &self.flow, self.dt, 1.0 / f_e)
    }

    /// Spin-up discarded before statistics: one domain advection time.
    pub fn spinup(&self) -> Result<f64> {
        Ok(self.wake_model()?.advection_time())
    }

    pub fn window_start(&self) -> Result<f64> {
        Ok(analysis_window_start(self.duration, self.spinup()?, self.excitation_frequency()?))
    }

    /// Shortest duration leaving `periods` excitation periods after spin-up.
    pub fn minimum_duration(&self, periods: f64) -> Result<f64> {
        Ok(self.spinup()? + periods / self.excitation_frequency()?)
    }

    pub fn run(&self, kind: StrategyKind) -> Result<ScenarioRun> {
        self.run_strategy(&self.strategy(kind), &RunOptions::default())
    }

    pub fn run_strategy(&self, strategy: &StrategyConfig, options: &RunOptions) -> Result<ScenarioRun> {
        self.validate()?;
        let series = simulate_turbine(strategy, &self.turbine, &self.flow, self.duration, self.dt)?;
        let model = self.wake_model()?;
        for &x in &options.mean_slice_planes {
            if !(x > 0.0 && x <= self.grid.x_extent) {
                return Err(Error::invalid(
                    "x",
                    format!("slice plane {x}D outside the wake domain (0, {}D]", self.grid.x_extent),
                ));
            }
        }
        let window_start = self.window_start()?;
        let every = ((self.sample_interval / self.dt).round() as usize).max(1);

        let mut state = model.init();
        let probe = model.slice(&state, REPORT_PLANES[0])?;
        let weights = DiskWeights::new(&probe, self.turbine.diameter)?;

        let mut sample_times = Vec::new();
        let mut energies = Vec::new();
        let mut sums: Vec<Option<SliceField>> = vec![None; options.mean_slice_planes.len()];
        for (k, sample) in series.samples.iter().enumerate() {
            model.step(&mut state, sample)?;
            let t = state.time();
            if (k + 1) % every != 0 || t < window_start - 1e-9 {
                continue;
            }
            let mut e = [0.0; 3];
            for (slot, &x) in e.iter_mut().zip(&REPORT_PLANES) {
                let slice = model.slice(&state, x)?;
                *slot = streamtube_energy_with(&weights, &slice, &self.flow, self.flux);
            }
            sample_times.push(t);
            energies.push(e);
            for (acc, &x) in sums.iter_mut().zip(&options.mean_slice_planes) {
                let slice = model.slice(&state, x)?;
                match acc {
                    Some(a) => a.values.iter_mut().zip(&slice.values).for_each(|(s, v)| *s += v),
                    None => *acc = Some(slice),
                }
            }
        }
        let n = sample_times.len().max(1) as f64;
        let mut mean_slices = Vec::with_capacity(sums.len());
        for (acc, &x) in sums.into_iter().zip(&options.mean_slice_planes) {
            let slice = match acc {
                Some(a) => a.map(|v| v / n),
                None => model.slice(&state, x)?,
            };
            mean_slices.push(slice);
        }

        Ok(ScenarioRun {
            strategy: *strategy,
            series,
            wake: WakeHistory {
                window_start,
                sample_times,
                energies,
                mean_slices,
                final_state: state,
            },
        })
    }
}
