//! Three-phase reduction latency: intra-lane accumulation, inter-lane tree
//! through the slide unit, and the final SIMD-word reduction.

use serde::{Deserialize, Serialize};

use crate::isa::Ew;

/// Cycles the slide unit adds to every inter-lane step.
pub const DEFAULT_SLIDE_STEP: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionSpec {
    /// 64-bit operand packets to reduce.
    pub n: u64,
    pub lanes: usize,
    /// Pipeline stages of the reducing unit.
    pub stages: u64,
    pub eew: Ew,
    pub fp: bool,
}

/// Default pipeline depth of the adder used by a reduction.
pub fn default_stages(fp: bool, eew: Ew) -> u64 {
    if !fp {
        return 1;
    }
    match eew {
        Ew::E64 => 4,
        Ew::E32 => 3,
        Ew::E16 => 2,
        Ew::E8 => 1,
    }
}

fn ceil_log2(x: u64) -> u32 {
    x.next_power_of_two().trailing_zeros()
}

/// Cycles to fold the partial sums left in an `r`-stage pipeline into one.
pub fn intra_lane_drain_cycles(r: u64) -> u64 {
    if r == 0 {
        return 0;
    }
    let p = r.next_power_of_two();
    r * (1 + ceil_log2(r) as u64) - (p - r) - 1
}

/// Packets each lane reduces locally.
pub fn packets_per_lane(n: u64, lanes: usize) -> u64 {
    n.div_ceil(lanes as u64)
}

pub fn intra_lane_cycles(spec: &ReductionSpec) -> u64 {
    if spec.n == 0 {
        return 0;
    }
    let per_lane = packets_per_lane(spec.n, spec.lanes);
    per_lane + intra_lane_drain_cycles(spec.stages.min(per_lane))
}

/// Tree steps across `lanes` lanes.
pub fn inter_lane_steps(lanes: usize) -> u64 {
    lanes.trailing_zeros() as u64 + 1
}

pub fn inter_lane_cycles(lanes: usize, unit_latency: u64) -> u64 {
    inter_lane_steps(lanes) * unit_latency
}

pub fn simd_cycles(eew: Ew, fpu_latency: u64) -> u64 {
    (64 / eew.bits()).trailing_zeros() as u64 * fpu_latency
}

/// Phase boundaries of one reduction, relative to its first operand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionSchedule {
    pub intra: u64,
    pub inter: u64,
    pub simd: u64,
}

impl ReductionSchedule {
    pub fn total(&self) -> u64 {
        self.intra + self.inter + self.simd
    }

    /// End of the intra-lane phase.
    pub fn intra_end(&self) -> u64 {
        self.intra
    }

    /// End of the inter-lane phase, during which the slide unit is busy.
    pub fn inter_end(&self) -> u64 {
        self.intra + self.inter
    }
}

/// Builds the schedule; each inter-lane step costs the unit latency plus
/// `slide_step` cycles of slide-unit transfer.
pub fn schedule(spec: &ReductionSpec, slide_step: u64) -> ReductionSchedule {
    ReductionSchedule {
        intra: intra_lane_cycles(spec),
        inter: inter_lane_cycles(spec.lanes, spec.stages + slide_step),
        simd: simd_cycles(spec.eew, spec.stages),
    }
}

pub fn total_reduction_cycles(spec: &ReductionSpec, slide_step: u64) -> u64 {
    schedule(spec, slide_step).total()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: u64, lanes: usize, stages: u64) -> ReductionSpec {
        ReductionSpec {
            n,
            lanes,
            stages,
            eew: Ew::E64,
            fp: true,
        }
    }

    #[test]
    fn drain_examples() {
        assert_eq!(intra_lane_drain_cycles(4), 11);
        assert_eq!(intra_lane_drain_cycles(1), 0);
        assert_eq!(intra_lane_drain_cycles(3), 7);
        for r in [1u64, 2, 4, 8] {
            assert_eq!(intra_lane_drain_cycles(r), r * (1 + r.trailing_zeros() as u64) - 1);
        }
    }

    #[test]
    fn phase_examples() {
        assert_eq!(intra_lane_cycles(&spec(64, 4, 4)), 27);
        assert_eq!(intra_lane_cycles(&spec(4, 4, 4)), 1);
        assert_eq!(intra_lane_cycles(&spec(0, 4, 4)), 0);
        assert_eq!(inter_lane_cycles(8, 6), 24);
        assert_eq!(inter_lane_cycles(2, 6), 12);
        assert_eq!(inter_lane_cycles(1, 6), 6);
        assert_eq!(simd_cycles(Ew::E64, 4), 0);
        assert_eq!(simd_cycles(Ew::E32, 3), 3);
        assert_eq!(simd_cycles(Ew::E8, 2), 6);
        assert_eq!(total_reduction_cycles(&spec(64, 4, 4), 2), 45);
        assert_eq!(intra_lane_cycles(&spec(1, 1, 4)), 1);
    }

    #[test]
    fn narrower_fp_reductions_are_faster() {
        for lanes in [2, 4, 8, 16] {
            let at = |eew: Ew| {
                let s = ReductionSpec {
                    n: 64,
                    lanes,
                    stages: default_stages(true, eew),
                    eew,
                    fp: true,
                };
                total_reduction_cycles(&s, DEFAULT_SLIDE_STEP)
            };
            assert!(at(Ew::E32) < at(Ew::E64));
            assert!(at(Ew::E16) < at(Ew::E32));
        }
    }
}
