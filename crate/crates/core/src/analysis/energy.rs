use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::excitation::FlowConditions;
use crate::rotor::TurbineParams;
use crate::wake::SliceField;

/// Which velocity moment is integrated over the streamtube disk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyFlux {
    /// Kinetic power flux `½ρ∫u³ dA`, W.
    #[default]
    Power,
    /// Kinetic energy density `½ρ∫u² dA`, J/m.
    Kinetic,
}

const SUBSAMPLES: usize = 16;

/// Quadrature weights of the rotor-sized disk at the undeflected hub
/// position, as `(node index, weight in m²)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskWeights {
    nodes: Vec<(usize, f64)>,
}

impl DiskWeights {
    pub fn new(slice: &SliceField, diameter: f64) -> Result<Self> {
        let r = 0.5 * diameter;
        if r > slice.half_width_y() || r > slice.half_width_z() {
            return Err(Error::invalid(
                "slice",
                format!(
                    "evaluation disk of radius {r:.1} m exceeds the slice window ±{:.1} m × ±{:.1} m",
                    slice.half_width_y(),
                    slice.half_width_z()
                ),
            ));
        }
        let r2 = r * r;
        let mut nodes = Vec::new();
        for k in 0..slice.nz {
            let z = slice.z(k);
            for j in 0..slice.ny {
                let y = slice.y(j);
                let coverage = cell_coverage(y, z, slice.dy, slice.dz, r2);
                if coverage > 0.0 {
                    nodes.push((k * slice.ny + j, coverage * slice.dy * slice.dz));
                }
            }
        }
        Ok(Self { nodes })
    }

    pub fn area(&self) -> f64 {
        self.nodes.iter().map(|(_, w)| w).sum()
    }

    pub fn integrate(&self, values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().map(|&(i, w)| w * f(values[i])).sum()
    }
}

/// Fraction of the cell centred on `(y, z)` that lies inside the disk.
fn cell_coverage(y: f64, z: f64, dy: f64, dz: f64, r2: f64) -> f64 {
    let corners = [(-0.5, -0.5), (0.5, -0.5), (-0.5, 0.5), (0.5, 0.5)];
    let inside = corners
        .iter()
        .filter(|(a, b)| {
            let (cy, cz) = (y + a * dy, z + b * dz);
            cy * cy + cz * cz <= r2
        })
        .count();
    match inside {
        4 => 1.0,
        0 if (y.abs() - 0.5 * dy).max(0.0).powi(2) + (z.abs() - 0.5 * dz).max(0.0).powi(2) > r2 => 0.0,
        _ => {
            let n = SUBSAMPLES;
            let mut hits = 0usize;
            for a in 0..n {
                let cy = y + ((a as f64 + 0.5) / n as f64 - 0.5) * dy;
                for b in 0..n {
                    let cz = z + ((b as f64 + 0.5) / n as f64 - 0.5) * dz;
                    if cy * cy + cz * cz <= r2 {
                        hits += 1;
                    }
                }
            }
            hits as f64 / (n * n) as f64
        }
    }
}

/// Flux through a disk of one rotor diameter centred on the undeflected hub.
pub fn streamtube_energy(
    slice: &SliceField,
    flow: &FlowConditions,
    params: &TurbineParams,
    flux: EnergyFlux,
) -> Result<f64> {
    let weights = DiskWeights::new(slice, params.diameter)?;
    Ok(streamtube_energy_with(&weights, slice, flow, flux))
}

/// Same as [`streamtube_energy`] with precomputed disk weights.
pub fn streamtube_energy_with(weights: &DiskWeights, slice: &SliceField, flow: &FlowConditions, flux: EnergyFlux) -> f64 {
    let half_rho = 0.5 * flow.air_density;
    match flux {
        EnergyFlux::Power => half_rho * weights.integrate(&slice.values, |u| u * u * u),
        EnergyFlux::Kinetic => half_rho * weights.integrate(&slice.values, |u| u * u),
    }
}
