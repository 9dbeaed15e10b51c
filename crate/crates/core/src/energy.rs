//! Frequency, power and energy-efficiency model calibrated on the
//! typical-corner implementation figures of the 2, 4, 8 and 16-lane systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-lane-count implementation data: (lanes, TT frequency GHz, matmul GFLOPS/W).
/// The 16-lane efficiency belongs to the variant with a reduced mask unit.
const LANE_TABLE: [(usize, f64, f64); 4] = [(2, 1.35, 34.1), (4, 1.35, 37.8), (8, 1.35, 35.7), (16, 1.08, 30.3)];

/// Power of the 4-lane system running a 64-bit matmul, mW.
pub const REFERENCE_POWER_MW: f64 = 283.0;

/// Scalar core and 4-lane system areas in kGE; their ratio splits the
/// reference power between the scalar core and the vector unit.
const SCALAR_AREA_KGE: f64 = 896.0;
const SYSTEM_4L_AREA_KGE: f64 = 3688.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Share of peak vector-unit power drawn at zero utilization.
    pub idle_fraction: f64,
    /// Power of one scalar core, mW.
    pub scalar_power_mw: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            idle_fraction: 0.4,
            scalar_power_mw: REFERENCE_POWER_MW * SCALAR_AREA_KGE / SYSTEM_4L_AREA_KGE,
        }
    }
}

fn row(lanes: usize) -> Result<(f64, f64)> {
    LANE_TABLE
        .iter()
        .find(|r| r.0 == lanes)
        .map(|r| (r.1, r.2))
        .ok_or(Error::UnknownLanes(lanes))
}

pub fn frequency_ghz(lanes: usize) -> Result<f64> {
    Ok(row(lanes)?.0)
}

/// Single-core efficiency at peak, GFLOPS/W.
pub fn peak_efficiency(lanes: usize) -> Result<f64> {
    Ok(row(lanes)?.1)
}

/// Power of one scalar-plus-vector core at peak throughput, W.
pub fn peak_power_w(lanes: usize) -> Result<f64> {
    let (f, eff) = row(lanes)?;
    Ok(2.0 * lanes as f64 * f / eff)
}

/// GFLOPS of `flop_per_cycle` at the typical frequency of `lanes`-lane cores.
pub fn real_throughput(flop_per_cycle: f64, lanes: usize) -> Result<f64> {
    Ok(flop_per_cycle * frequency_ghz(lanes)?)
}

impl Calibration {
    /// Power of one core with its vector unit at `utilization` of peak, W.
    pub fn core_power_w(&self, lanes: usize, utilization: f64) -> Result<f64> {
        let scalar = self.scalar_power_mw / 1000.0;
        let vector_peak = peak_power_w(lanes)? - scalar;
        let u = utilization.clamp(0.0, 1.0);
        Ok(scalar + vector_peak * (self.idle_fraction + (1.0 - self.idle_fraction) * u))
    }

    /// Power of `cores` identical cores sharing the aggregate `flop_per_cycle`, W.
    pub fn cluster_power_w(&self, cores: usize, lanes: usize, flop_per_cycle: f64) -> Result<f64> {
        if cores == 0 {
            return Ok(0.0);
        }
        let utilization = flop_per_cycle / (cores as f64 * 2.0 * lanes as f64);
        Ok(cores as f64 * self.core_power_w(lanes, utilization)?)
    }

    /// GFLOPS/W of a run achieving `flop_per_cycle` on `cores` cores of `lanes` lanes.
    pub fn energy_efficiency(&self, cores: usize, lanes: usize, flop_per_cycle: f64) -> Result<f64> {
        let power = self.cluster_power_w(cores, lanes, flop_per_cycle)?;
        if power == 0.0 {
            return Ok(0.0);
        }
        Ok(real_throughput(flop_per_cycle, lanes)? / power)
    }
}
