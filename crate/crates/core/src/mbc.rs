//! Multi-blade coordinate (MBC) transformation for a three-bladed rotor.
//!
//! Rotating-frame quantities (blade pitch angles, blade root moments) are
//! projected onto a fixed frame made of a collective component plus a tilt
//! and a yaw component:
//!
//! ```text
//!   [collective]            [ 1/2      1/2      1/2    ] [v1]
//!   [   tilt   ] = (2/3) *  [ cos ψ1   cos ψ2   cos ψ3 ] [v2]
//!   [   yaw    ]            [ sin ψ1   sin ψ2   sin ψ3 ] [v3]
//! ```
//!
//! Azimuth zero is blade 1 pointing vertically up. The azimuth grows with
//! rotor rotation, which is clockwise when looking downstream, so ψ = π/2 is
//! a blade pointing to the right of an observer standing upstream.

use std::f64::consts::{PI, TAU};

use crate::error::{ensure_finite, ensure_non_negative, Error, Result};

pub const BLADE_COUNT: usize = 3;

/// Angular spacing between consecutive blades.
pub const BLADE_SPACING: f64 = TAU / BLADE_COUNT as f64;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

/// Rotor azimuth, stored as the phase of blade 1 only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AzimuthState {
    psi_1: f64,
}

impl AzimuthState {
    pub fn new(psi_1: f64) -> Result<Self> {
        ensure_finite("azimuth", psi_1)?;
        Ok(Self {
            psi_1: wrap_angle(psi_1),
        })
    }

    pub fn upright() -> Self {
        Self { psi_1: 0.0 }
    }

    pub fn psi_1(&self) -> f64 {
        self.psi_1
    }

    /// Azimuth of blade `b` (zero-based), wrapped to `[0, 2π)`.
    pub fn blade(&self, b: usize) -> f64 {
        debug_assert!(b < BLADE_COUNT);
        wrap_angle(self.psi_1 + BLADE_SPACING * b as f64)
    }

    pub fn blades(&self) -> [f64; 3] {
        [self.blade(0), self.blade(1), self.blade(2)]
    }

    /// Same rotor rotated by a fixed angle (used for azimuth offsets).
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            psi_1: wrap_angle(self.psi_1 + offset),
        }
    }

    /// Advances blade 1 by `rotor_speed * dt`.
    pub fn advance(&self, rotor_speed: f64, dt: f64) -> Result<Self> {
        ensure_non_negative("rotor_speed", rotor_speed)?;
        ensure_finite("dt", dt)?;
        if dt <= 0.0 {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        Self::new(self.psi_1 + rotor_speed * dt)
    }
}

/// Per-blade scalars in the rotating frame (pitch in deg or root moment in N·m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BladeTriple(pub [f64; 3]);

impl BladeTriple {
    pub fn new(v1: f64, v2: f64, v3: f64) -> Self {
        Self([v1, v2, v3])
    }

    pub fn splat(v: f64) -> Self {
        Self([v; 3])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / 3.0
    }

    pub fn iter(&self) -> impl Iterator<Item = &f64> {
        self.0.iter()
    }
}

impl std::ops::Index<usize> for BladeTriple {
    type Output = f64;

    fn index(&self, b: usize) -> &f64 {
        &self.0[b]
    }
}

/// Collective/tilt/yaw components in the non-rotating frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FixedFrameTriple {
    pub collective: f64,
    pub tilt: f64,
    pub yaw: f64,
}

impl FixedFrameTriple {
    pub fn new(collective: f64, tilt: f64, yaw: f64) -> Self {
        Self {
            collective,
            tilt,
            yaw,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.collective.is_finite() && self.tilt.is_finite() && self.yaw.is_finite()
    }
}

/// The forward MBC matrix `T(ψ)`.
pub fn transform_matrix(az: &AzimuthState) -> [[f64; 3]; 3] {
    let psi = az.blades();
    let k = 2.0 / 3.0;
    [
        [k * 0.5, k * 0.5, k * 0.5],
        [k * psi[0].cos(), k * psi[1].cos(), k * psi[2].cos()],
        [k * psi[0].sin(), k * psi[1].sin(), k * psi[2].sin()],
    ]
}

/// The analytic inverse `T⁻¹(ψ)`: row `b` is `[1, cos ψ_b, sin ψ_b]`.
pub fn inverse_matrix(az: &AzimuthState) -> [[f64; 3]; 3] {
    let psi = az.blades();
    psi.map(|p| [1.0, p.cos(), p.sin()])
}

pub fn forward_mbc(az: &AzimuthState, blades: &BladeTriple) -> FixedFrameTriple {
    let t = transform_matrix(az);
    let row = |r: [f64; 3]| r[0] * blades[0] + r[1] * blades[1] + r[2] * blades[2];
    FixedFrameTriple {
        collective: row(t[0]),
        tilt: row(t[1]),
        yaw: row(t[2]),
    }
}

pub fn inverse_mbc(az: &AzimuthState, fixed: &FixedFrameTriple) -> BladeTriple {
    let inv = inverse_matrix(az);
    BladeTriple(inv.map(|r| r[0] * fixed.collective + r[1] * fixed.tilt + r[2] * fixed.yaw))
}

/// Converts revolutions per minute to rad/s.
pub fn rpm_to_rad_per_s(rpm: f64) -> f64 {
    rpm * TAU / 60.0
}

/// Rotation frequency in Hz for a rotor speed in rad/s.
pub fn rotation_frequency(rotor_speed: f64) -> f64 {
    rotor_speed / (2.0 * PI)
}
