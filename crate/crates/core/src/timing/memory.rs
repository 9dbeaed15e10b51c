use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::isa::Memory;
use crate::timing::MachineConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Read,
    Write,
}

/// How a transfer is split into bus beats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BeatPattern {
    /// Contiguous bytes, packed at full bus width.
    Packed,
    /// One element per beat: strided, indexed and segmented accesses.
    PerElement { elems: usize },
}

/// Timing of one vector memory transfer, relative to its request.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemSchedule {
    pub direction: Direction,
    pub beats: u64,
    /// Cycle the first beat arrives (or is acknowledged, for writes).
    pub first_beat: u64,
    pub completion: u64,
}

pub fn beats_for(bytes: usize, pattern: BeatPattern, cfg: &MachineConfig) -> u64 {
    match pattern {
        BeatPattern::Packed => bytes.div_ceil(cfg.mem_bandwidth()) as u64,
        BeatPattern::PerElement { elems } => elems as u64,
    }
}

pub fn memory_transaction(
    addr: u64,
    bytes: usize,
    direction: Direction,
    pattern: BeatPattern,
    cfg: &MachineConfig,
    mem: &Memory,
) -> Result<MemSchedule> {
    mem.check(addr, bytes)?;
    let beats = beats_for(bytes, pattern, cfg);
    Ok(MemSchedule {
        direction,
        beats,
        first_beat: cfg.mem_latency,
        completion: cfg.mem_latency + beats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transaction_examples() {
        let mem = Memory::new(4096);
        let c8 = MachineConfig::new(8);
        let s = memory_transaction(0, 512, Direction::Read, BeatPattern::Packed, &c8, &mem).unwrap();
        assert_eq!(s.completion, 23);
        let s = memory_transaction(0, 1, Direction::Read, BeatPattern::Packed, &c8, &mem).unwrap();
        assert_eq!(s.completion, 8);
        let s = memory_transaction(0, 64 * 8, Direction::Read, BeatPattern::PerElement { elems: 64 }, &c8, &mem)
            .unwrap();
        assert_eq!(s.beats, 64);
        assert!(memory_transaction(4000, 512, Direction::Write, BeatPattern::Packed, &c8, &mem).is_err());
    }
}
