use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isa::{Ew, Geometry};
use crate::reduction::DEFAULT_SLIDE_STEP;
use crate::sldu::InterconnectKind;
use crate::vrf::LayoutConfig;

/// Parameters of the simulated vector unit.
///
/// Queue depths and hazard penalties are not published for the modeled
/// design; the defaults are calibration knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineConfig {
    pub lanes: usize,
    pub vlen_per_lane: usize,
    pub banks_per_lane: usize,
    /// In-flight vector instructions.
    pub window: usize,
    /// Memory latency seen by the vector unit.
    pub mem_latency: u64,
    pub barber_pole: bool,
    /// Larger buffers, doubled window and no extra hazard-resolution cycle.
    pub optimized: bool,
    /// Instructions each functional unit can hold.
    pub unit_queue_depth: usize,
    /// 64-bit words each operand queue can hold.
    pub operand_queue_depth: usize,
    /// Results that can wait for a write-back slot.
    pub result_queue_depth: usize,
    /// Lane words of load data buffered ahead of the VRF write-back.
    pub load_buffer_words: usize,
    /// Extra cycles before a consumer may read words produced by a load or slide.
    pub hazard_penalty: u64,
    pub int_alu_depth: u64,
    pub int_mul_depth: u64,
    /// FPU depths for e8, e16, e32 and e64.
    pub fpu_depth: [u64; 4],
    pub fdiv_depth: u64,
    /// Cycles between consecutive words entering the divider.
    pub fdiv_interval: u64,
    pub mask_depth: u64,
    pub interconnect: InterconnectKind,
    pub sldu_startup: u64,
    pub reduction_slide_step: u64,
}

impl MachineConfig {
    pub fn new(lanes: usize) -> Self {
        MachineConfig {
            lanes,
            vlen_per_lane: 1024,
            banks_per_lane: 8,
            window: 8,
            mem_latency: 7,
            barber_pole: false,
            optimized: false,
            unit_queue_depth: 4,
            operand_queue_depth: 4,
            result_queue_depth: 4,
            load_buffer_words: 8,
            hazard_penalty: 1,
            int_alu_depth: 1,
            int_mul_depth: 2,
            fpu_depth: [1, 2, 3, 4],
            fdiv_depth: 12,
            fdiv_interval: 4,
            mask_depth: 2,
            interconnect: InterconnectKind::SlideP2Timemux,
            sldu_startup: 2,
            reduction_slide_step: DEFAULT_SLIDE_STEP,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.layout()?;
        if self.window == 0 || self.unit_queue_depth == 0 || self.operand_queue_depth == 0 {
            return Err(Error::Config("window and queue depths must be positive".into()));
        }
        if self.result_queue_depth == 0 || self.load_buffer_words == 0 || self.fdiv_interval == 0 {
            return Err(Error::Config("buffer sizes and divider interval must be positive".into()));
        }
        Ok(())
    }

    pub fn geometry(&self) -> Result<Geometry> {
        Geometry::new(self.lanes, self.vlen_per_lane)
    }

    pub fn layout(&self) -> Result<LayoutConfig> {
        let l = LayoutConfig {
            lanes: self.lanes,
            vlen_per_lane: self.vlen_per_lane,
            banks_per_lane: self.banks_per_lane,
            barber_pole: self.barber_pole,
        };
        l.validate()?;
        Ok(l)
    }

    /// Bytes per cycle between the vector unit and memory.
    pub fn mem_bandwidth(&self) -> usize {
        4 * self.lanes
    }

    /// Bytes per cycle the lanes can process.
    pub fn compute_bandwidth(&self) -> usize {
        8 * self.lanes
    }

    fn scale(&self, v: usize) -> usize {
        if self.optimized {
            2 * v
        } else {
            v
        }
    }

    pub fn effective_window(&self) -> usize {
        self.scale(self.window)
    }

    pub fn effective_unit_queue(&self) -> usize {
        self.scale(self.unit_queue_depth)
    }

    pub fn effective_operand_queue(&self) -> usize {
        self.scale(self.operand_queue_depth)
    }

    pub fn effective_result_queue(&self) -> usize {
        self.scale(self.result_queue_depth)
    }

    pub fn effective_load_buffer(&self) -> usize {
        self.scale(self.load_buffer_words)
    }

    pub fn effective_hazard_penalty(&self) -> u64 {
        if self.optimized {
            self.hazard_penalty.saturating_sub(1)
        } else {
            self.hazard_penalty
        }
    }

    pub fn fpu_depth_for(&self, eew: Ew) -> u64 {
        self.fpu_depth[eew.bytes().trailing_zeros() as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_is_half_compute() {
        for l in [2, 4, 8, 16] {
            let c = MachineConfig::new(l);
            assert_eq!(2 * c.mem_bandwidth(), c.compute_bandwidth());
        }
    }

    #[test]
    fn optimized_mode_scales_buffers() {
        let mut c = MachineConfig::new(4);
        assert_eq!(c.effective_window(), 8);
        c.optimized = true;
        assert_eq!(c.effective_window(), 16);
        assert_eq!(c.effective_unit_queue(), 8);
        assert_eq!(c.effective_hazard_penalty(), 0);
        assert_eq!(c.fpu_depth_for(Ew::E64), 4);
        assert_eq!(c.fpu_depth_for(Ew::E8), 1);
    }

    #[test]
    fn rejects_bad_lanes() {
        assert!(MachineConfig::new(3).validate().is_err());
        assert!(MachineConfig::new(16).validate().is_ok());
    }
}
