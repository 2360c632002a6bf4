//! Reduced-order dynamic wake.
//!
//! The wake is a train of Lagrangian parcels released from the rotor plane
//! once per time step and carried downstream at the advection speed
//! `U·(1 - a)`. Each parcel keeps the crossflow velocity the rotor imposed
//! when it was released, so the centerline at distance `x` is the rotor
//! signal delayed by `x / U_adv` and scaled by the travel time. The axial
//! velocity deficit of a parcel is a Gaussian whose amplitude decays and
//! whose width grows at rates raised by a local mixing measure.
//!
//! Frame: `x` downstream, `z` up, `y` completing a right-handed frame, so
//! `+y` points to the left of an observer looking downstream. The wake is
//! pushed towards the more heavily loaded side of the rotor.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::excitation::{FlowConditions, DEFAULT_AMPLITUDE_DEG};
use crate::mbc::{inverse_mbc, AzimuthState, FixedFrameTriple};
use crate::rotor::{aggregate, blade_loads, disk_force_scale, TurbineParams, TurbineSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WakeGridConfig {
    /// Downstream extent, in rotor diameters.
    pub x_extent: f64,
    /// Side length of the square cross-plane window, in rotor diameters.
    pub cross_extent: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl Default for WakeGridConfig {
    fn default() -> Self {
        Self {
            x_extent: 8.0,
            cross_extent: 2.0,
            nx: 128,
            ny: 64,
            nz: 64,
        }
    }
}

/// Upper bound on cells along any grid axis.
pub const MAX_CELLS_PER_AXIS: usize = 2048;

impl WakeGridConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_positive("grid.x_extent", self.x_extent)?;
        ensure_positive("grid.cross_extent", self.cross_extent)?;
        for (name, n) in [("grid.nx", self.nx), ("grid.ny", self.ny), ("grid.nz", self.nz)] {
            if n < 16 {
                return Err(Error::invalid(name, format!("needs at least 16 cells, got {n}")));
            }
            if n > MAX_CELLS_PER_AXIS {
                return Err(Error::invalid(name, format!("at most {MAX_CELLS_PER_AXIS} cells, got {n}")));
            }
        }
        Ok(())
    }
}

/// Coefficients of the wake surrogate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WakeParams {
    /// Base deficit decay per rotor diameter of travel.
    pub recovery_rate: f64,
    /// Additional decay per diameter per unit turbulence intensity.
    pub recovery_ti_gain: f64,
    /// Base growth of the Gaussian width per metre of travel.
    pub expansion_rate: f64,
    /// Additional width growth per unit turbulence intensity.
    pub expansion_ti_gain: f64,
    /// Recovery and expansion multiplier per unit normalized mixing measure.
    pub mixing_gain: f64,
    /// Deflection at 5D from a static yaw moment of a 2.5° IPC offset, in D.
    pub static_deflection_5d: f64,
    /// Crossflow lag time constant in units of `D/U`.
    pub lag_time_factor: f64,
    /// Weight of vertical excursions in the mixing measure.
    pub vertical_mixing_weight: f64,
    /// Weight of deficit pulsation in the mixing measure.
    pub pulse_mixing_weight: f64,
}

/// Mixing gain that puts the CCW helix at +10.7% streamtube energy at 5D
/// for the default configuration (see `examples/calibrate.rs`).
pub const CALIBRATED_MIXING_GAIN: f64 = 8.05;

impl Default for WakeParams {
    fn default() -> Self {
        Self {
            recovery_rate: 0.02,
            recovery_ti_gain: 1.0,
            expansion_rate: 0.004,
            expansion_ti_gain: 0.38,
            mixing_gain: CALIBRATED_MIXING_GAIN,
            static_deflection_5d: 0.1,
            lag_time_factor: 1.0,
            vertical_mixing_weight: 1.5,
            pulse_mixing_weight: 2.0,
        }
    }
}

impl WakeParams {
    pub fn validate(&self) -> Result<()> {
        ensure_non_negative("wake.recovery_rate", self.recovery_rate)?;
        ensure_non_negative("wake.recovery_ti_gain", self.recovery_ti_gain)?;
        ensure_non_negative("wake.expansion_rate", self.expansion_rate)?;
        ensure_non_negative("wake.expansion_ti_gain", self.expansion_ti_gain)?;
        ensure_non_negative("wake.mixing_gain", self.mixing_gain)?;
        ensure_non_negative("wake.static_deflection_5d", self.static_deflection_5d)?;
        ensure_positive("wake.lag_time_factor", self.lag_time_factor)?;
        ensure_non_negative("wake.vertical_mixing_weight", self.vertical_mixing_weight)?;
        ensure_non_negative("wake.pulse_mixing_weight", self.pulse_mixing_weight)?;
        Ok(())
    }

    /// Same parameters with deficit recovery and wake expansion switched off.
    pub fn frozen(&self) -> Self {
        Self {
            recovery_rate: 0.0,
            recovery_ti_gain: 0.0,
            expansion_rate: 0.0,
            expansion_ti_gain: 0.0,
            ..*self
        }
    }
}

/// Centerline deficit from momentum theory, `1 - sqrt(1 - C_T)`.
pub fn momentum_deficit(ct: f64) -> f64 {
    1.0 - (1.0 - ct.clamp(0.0, 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Parcel {
    y: f64,
    z: f64,
    vy: f64,
    vz: f64,
    deficit: f64,
    sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StationRecord {
    pub x: f64,
    pub y_c: f64,
    pub z_c: f64,
    /// Centerline deficit as a fraction of U.
    pub deficit: f64,
    /// Gaussian width, m.
    pub sigma: f64,
    /// Mixing measure normalized by U.
    pub mixing: f64,
}

/// Window variances below this are running-sum round-off.
const NOISE_VARIANCE: f64 = 1e-20;

/// Sliding-window moments of one station's history.
#[derive(Debug, Clone)]
struct StationHistory {
    ring: Vec<[f64; 5]>,
    head: usize,
    filled: usize,
    sum: [f64; 5],
    sum_sq: [f64; 5],
    prev: (f64, f64),
    deficit_ref: f64,
}

impl StationHistory {
    fn new(window: usize, record: &StationRecord) -> Self {
        Self {
            ring: vec![[0.0; 5]; window],
            head: 0,
            filled: 0,
            sum: [0.0; 5],
            sum_sq: [0.0; 5],
            prev: (record.y_c, record.z_c),
            deficit_ref: record.deficit,
        }
    }

    fn push(&mut self, record: &StationRecord, dt: f64) {
        let entry = [
            record.y_c,
            record.z_c,
            (record.y_c - self.prev.0) / dt,
            (record.z_c - self.prev.1) / dt,
            record.deficit - self.deficit_ref,
        ];
        self.prev = (record.y_c, record.z_c);
        if self.filled == self.ring.len() {
            let old = self.ring[self.head];
            for ((s, q), o) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(old) {
                *s -= o;
                *q -= o * o;
            }
        } else {
            self.filled += 1;
        }
        for ((s, q), e) in self.sum.iter_mut().zip(&mut self.sum_sq).zip(entry) {
            *s += e;
            *q += e * e;
        }
        self.ring[self.head] = entry;
        self.head = (self.head + 1) % self.ring.len();
    }

    fn variance(&self, k: usize) -> f64 {
        if self.filled == 0 {
            return 0.0;
        }
        let n = self.filled as f64;
        let mean = self.sum[k] / n;
        let v = self.sum_sq[k] / n - mean * mean;
        if v < NOISE_VARIANCE {
            0.0
        } else {
            v
        }
    }
}

#[derive(Debug, Clone)]
pub struct WakeState {
    time: f64,
    lag: [f64; 2],
    parcels: VecDeque<Parcel>,
    stations: Vec<StationRecord>,
    history: Vec<StationHistory>,
}

impl WakeState {
    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn stations(&self) -> &[StationRecord] {
        &self.stations
    }

    /// Rotor-plane crossflow velocity `(v_y, v_z)` after the lag, m/s.
    pub fn crossflow(&self) -> (f64, f64) {
        (self.lag[0], self.lag[1])
    }
}

/// Axial velocity on a cross-plane at a fixed downstream distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceField {
    pub x_over_d: f64,
    pub ny: usize,
    pub nz: usize,
    pub dy: f64,
    pub dz: f64,
    /// Row-major: `values[k * ny + j]` at `(y_j, z_k)`, both ascending.
    pub values: Vec<f64>,
}

impl SliceField {
    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - 0.5 * (self.ny - 1) as f64) * self.dy
    }

    pub fn z(&self, k: usize) -> f64 {
        (k as f64 - 0.5 * (self.nz - 1) as f64) * self.dz
    }

    pub fn at(&self, j: usize, k: usize) -> f64 {
        self.values[k * self.ny + j]
    }

    pub fn half_width_y(&self) -> f64 {
        0.5 * (self.ny - 1) as f64 * self.dy
    }

    pub fn half_width_z(&self) -> f64 {
        0.5 * (self.nz - 1) as f64 * self.dz
    }

    /// Pointwise map into a new slice with the same geometry.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> SliceField {
        SliceField {
            values: self.values.iter().map(|&v| f(v)).collect(),
            ..self.clone()
        }
    }

    /// `(self - other) / scale`, for slices on the same grid.
    pub fn relative_to(&self, other: &SliceField, scale: f64) -> Result<SliceField> {
        if self.ny != other.ny || self.nz != other.nz || self.dy != other.dy || self.dz != other.dz {
            return Err(Error::invalid("slice", "grids differ"));
        }
        Ok(SliceField {
            values: self.values.iter().zip(&other.values).map(|(a, b)| (a - b) / scale).collect(),
            ..self.clone()
        })
    }

    /// Trapezoid integral of the momentum deficit flux `∫(U - u)·u dA`.
    pub fn momentum_deficit_integral(&self, wind_speed: f64) -> f64 {
        let mut total = 0.0;
        for k in 0..self.nz {
            let wz = if k == 0 || k == self.nz - 1 { 0.5 } else { 1.0 };
            for j in 0..self.ny {
                let wy = if j == 0 || j == self.ny - 1 { 0.5 } else { 1.0 };
                let u = self.at(j, k);
                total += wy * wz * (wind_speed - u) * u;
            }
        }
        total * self.dy * self.dz
    }
}

/// Reduced-order wake driven by the turbine's thrust and fixed-frame moments.
#[derive(Debug, Clone)]
pub struct WakeModel {
    grid: WakeGridConfig,
    params: WakeParams,
    flow: FlowConditions,
    diameter: f64,
    dt: f64,
    u_adv: f64,
    sigma0: f64,
    tau: f64,
    /// Crossflow velocity per unit normalized moment, m/s.
    deflection_gain: f64,
    moment_scale: f64,
    force_scale: f64,
    base_deficit: f64,
    /// Parcel spacing, m.
    spacing: f64,
    dx: f64,
    parcel_count: usize,
    window: usize,
    recovery_per_m: f64,
    expansion_per_m: f64,
}

impl WakeModel {
    /// `mixing_window` is the trailing averaging time of the mixing measure, s.
    pub fn new(
        grid: WakeGridConfig,
        params: WakeParams,
        turbine: &TurbineParams,
        flow: &FlowConditions,
        dt: f64,
        mixing_window: f64,
    ) -> Result<Self> {
        grid.validate()?;
        params.validate()?;
        flow.validate()?;
        ensure_positive("dt", dt)?;
        ensure_positive("mixing_window", mixing_window)?;
        ensure_positive("turbine.diameter", turbine.diameter)?;
        if !(0.0..1.0).contains(&turbine.baseline_ct) {
            return Err(Error::invalid("turbine.baseline_ct", "must lie in [0, 1)"));
        }

        let d = turbine.diameter;
        let u = flow.wind_speed;
        let dx = grid.x_extent * d / grid.nx as f64;
        if u * dt > dx {
            return Err(Error::invalid(
                "dt",
                format!("advective CFL violated: U·dt = {:.3} m exceeds Δx = {dx:.3} m", u * dt),
            ));
        }
        let base_deficit = momentum_deficit(turbine.baseline_ct);
        let induction = 0.5 * base_deficit;
        let u_adv = u * (1.0 - induction);
        let spacing = u_adv * dt;
        let parcel_count = (grid.x_extent * d / spacing).ceil() as usize + 2;
        let moment_scale = disk_force_scale(turbine, flow) * d / 8.0;

        // Normalized yaw moment of a static IPC yaw offset at the reference amplitude.
        let static_pitch = inverse_mbc(
            &AzimuthState::upright(),
            &FixedFrameTriple::new(0.0, 0.0, DEFAULT_AMPLITUDE_DEG),
        );
        let az = AzimuthState::upright();
        let loads = blade_loads(turbine, flow, &static_pitch, &az)?;
        let static_moment = aggregate(turbine, flow, &loads, &static_pitch, &az).moments.yaw.abs() / moment_scale;
        let target_speed = params.static_deflection_5d * d * u_adv / (5.0 * d);
        let deflection_gain = if static_moment > 0.0 {
            target_speed / static_moment
        } else {
            0.0
        };

        let ti = flow.turbulence_intensity;
        Ok(Self {
            grid,
            params,
            flow: *flow,
            diameter: d,
            dt,
            u_adv,
            sigma0: d / 8f64.sqrt(),
            tau: params.lag_time_factor * d / u,
            deflection_gain,
            moment_scale,
            force_scale: disk_force_scale(turbine, flow),
            base_deficit,
            spacing,
            dx,
            parcel_count,
            window: ((mixing_window / dt).round() as usize).max(1),
            recovery_per_m: (params.recovery_rate + params.recovery_ti_gain * ti) / d,
            expansion_per_m: params.expansion_rate + params.expansion_ti_gain * ti,
        })
    }

    pub fn grid(&self) -> &WakeGridConfig {
        &self.grid
    }

    pub fn params(&self) -> &WakeParams {
        &self.params
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn advection_speed(&self) -> f64 {
        self.u_adv
    }

    pub fn lag_time(&self) -> f64 {
        self.tau
    }

    pub fn initial_width(&self) -> f64 {
        self.sigma0
    }

    pub fn x_extent(&self) -> f64 {
        self.grid.x_extent * self.diameter
    }

    /// Time for a parcel to cross the whole domain, s.
    pub fn advection_time(&self) -> f64 {
        self.x_extent() / self.u_adv
    }

    pub fn station_count(&self) -> usize {
        self.grid.nx + 1
    }

    /// Crossflow velocity per unit normalized moment, m/s.
    pub fn deflection_gain(&self) -> f64 {
        self.deflection_gain
    }

    /// Moments are normalized by `½ρAU²·D/8`.
    pub fn moment_scale(&self) -> f64 {
        self.moment_scale
    }

    fn rate_multiplier(&self, mixing: f64) -> f64 {
        1.0 + self.params.mixing_gain * mixing
    }

    /// Steady baseline wake: parcels pre-aged with the base decay and growth.
    pub fn init(&self) -> WakeState {
        let mut parcels = VecDeque::with_capacity(self.parcel_count);
        let mut parcel = Parcel {
            y: 0.0,
            z: 0.0,
            vy: 0.0,
            vz: 0.0,
            deficit: self.base_deficit,
            sigma: self.sigma0,
        };
        for _ in 0..self.parcel_count {
            parcels.push_back(parcel);
            self.age_parcel(&mut parcel, 0.0);
        }
        let mut state = WakeState {
            time: 0.0,
            lag: [0.0; 2],
            parcels,
            stations: Vec::new(),
            history: Vec::new(),
        };
        state.stations = self.sample_stations(&state.parcels, None);
        state.history = state
            .stations
            .iter()
            .map(|r| StationHistory::new(self.window, r))
            .collect();
        state
    }

    fn age_parcel(&self, p: &mut Parcel, mixing: f64) {
        let m = self.rate_multiplier(mixing);
        p.y += p.vy * self.dt;
        p.z += p.vz * self.dt;
        p.deficit *= (-self.recovery_per_m * self.spacing * m).exp();
        p.sigma += self.expansion_per_m * self.spacing * m;
    }

    fn mixing_at(&self, stations: &[StationRecord], x: f64) -> f64 {
        let q = x / self.dx;
        let i = q.floor() as usize;
        if i + 1 >= stations.len() {
            return stations.last().map_or(0.0, |s| s.mixing);
        }
        let f = q - i as f64;
        stations[i].mixing * (1.0 - f) + stations[i + 1].mixing * f
    }

    /// Advances the wake by one time step using the turbine sample at the
    /// current wake time.
    pub fn step(&self, state: &mut WakeState, sample: &TurbineSample) -> Result<()> {
        if (sample.t - state.time).abs() > 1e-6 * self.dt {
            return Err(Error::invalid(
                "sample.t",
                format!("turbine sample at {} s does not match wake clock {} s", sample.t, state.time),
            ));
        }
        let g = self.deflection_gain;
        let target = [
            -g * sample.m_yaw / self.moment_scale,
            g * sample.m_tilt / self.moment_scale,
        ];
        let release = momentum_deficit(sample.thrust / self.force_scale);

        let stations = std::mem::take(&mut state.stations);
        for (i, p) in state.parcels.iter_mut().enumerate() {
            let mixing = self.mixing_at(&stations, i as f64 * self.spacing);
            self.age_parcel(p, mixing);
        }
        state.parcels.pop_back();

        let decay = (-self.dt / self.tau).exp();
        for (w, t) in state.lag.iter_mut().zip(target) {
            *w = t + (*w - t) * decay;
        }
        state.parcels.push_front(Parcel {
            y: 0.0,
            z: 0.0,
            vy: state.lag[0],
            vz: state.lag[1],
            deficit: release,
            sigma: self.sigma0,
        });
        state.time += self.dt;
        state.stations = self.sample_stations(&state.parcels, Some(&mut state.history));
        Ok(())
    }

    fn sample_stations(&self, parcels: &VecDeque<Parcel>, history: Option<&mut Vec<StationHistory>>) -> Vec<StationRecord> {
        let mut out: Vec<StationRecord> = (0..self.station_count())
            .map(|i| {
                let x = i as f64 * self.dx;
                let q = x / self.spacing;
                let j = (q.floor() as usize).min(parcels.len() - 2);
                let f = q - j as f64;
                let (a, b) = (&parcels[j], &parcels[j + 1]);
                let lerp = |u: f64, v: f64| u + (v - u) * f;
                StationRecord {
                    x,
                    y_c: lerp(a.y, b.y),
                    z_c: lerp(a.z, b.z),
                    deficit: lerp(a.deficit, b.deficit),
                    sigma: lerp(a.sigma, b.sigma),
                    mixing: 0.0,
                }
            })
            .collect();
        if let Some(history) = history {
            let cv = self.params.vertical_mixing_weight;
            for (rec, h) in out.iter_mut().zip(history.iter_mut()) {
                h.push(rec, self.dt);
                let excursion = (h.variance(0) + cv * cv * h.variance(1)).sqrt();
                let speed = (h.variance(2) + cv * cv * h.variance(3)).sqrt();
                let crossflow = (speed * excursion / self.tau).sqrt();
                let pulse = self.params.pulse_mixing_weight * self.flow.wind_speed * h.variance(4).sqrt();
                rec.mixing = (crossflow + pulse) / self.flow.wind_speed;
            }
        }
        out
    }

    /// Interpolated station record at downstream distance `x` (m).
    pub fn station_at(&self, state: &WakeState, x: f64) -> Result<StationRecord> {
        if !(0.0..=self.x_extent() * (1.0 + 1e-12)).contains(&x) {
            return Err(Error::invalid(
                "x",
                format!("{x} m outside the wake domain [0, {:.1}] m", self.x_extent()),
            ));
        }
        let q = (x / self.dx).min(self.grid.nx as f64);
        let i = (q.floor() as usize).min(self.grid.nx - 1);
        let f = q - i as f64;
        let (a, b) = (&state.stations[i], &state.stations[i + 1]);
        let lerp = |u: f64, v: f64| u + (v - u) * f;
        Ok(StationRecord {
            x,
            y_c: lerp(a.y_c, b.y_c),
            z_c: lerp(a.z_c, b.z_c),
            deficit: lerp(a.deficit, b.deficit),
            sigma: lerp(a.sigma, b.sigma),
            mixing: lerp(a.mixing, b.mixing),
        })
    }

    /// Centerline offset `(y_c, z_c)` at `x` (m).
    pub fn centerline(&self, state: &WakeState, x: f64) -> Result<(f64, f64)> {
        let r = self.station_at(state, x)?;
        Ok((r.y_c, r.z_c))
    }

    /// Axial velocity on the cross-plane at `x_over_d` rotor diameters.
    pub fn slice(&self, state: &WakeState, x_over_d: f64) -> Result<SliceField> {
        let rec = self.station_at(state, x_over_d * self.diameter)?;
        let (ny, nz) = (self.grid.ny, self.grid.nz);
        let side = self.grid.cross_extent * self.diameter;
        let mut field = SliceField {
            x_over_d,
            ny,
            nz,
            dy: side / (ny - 1) as f64,
            dz: side / (nz - 1) as f64,
            values: Vec::with_capacity(ny * nz),
        };
        let u = self.flow.wind_speed;
        let inv = 1.0 / (2.0 * rec.sigma * rec.sigma);
        for k in 0..nz {
            let dz = field.z(k) - rec.z_c;
            for j in 0..ny {
                let dy = field.y(j) - rec.y_c;
                field.values.push(u * (1.0 - rec.deficit * (-(dy * dy + dz * dz) * inv).exp()));
            }
        }
        Ok(field)
    }

    /// Closed-form momentum deficit flux of a station's Gaussian over the
    /// unbounded cross-plane, `U²·(2πσ²d - πσ²d²)`.
    pub fn analytic_momentum_deficit(&self, rec: &StationRecord) -> f64 {
        let u = self.flow.wind_speed;
        let s2 = rec.sigma * rec.sigma;
        u * u * PI * s2 * (2.0 * rec.deficit - rec.deficit * rec.deficit)
    }
}
