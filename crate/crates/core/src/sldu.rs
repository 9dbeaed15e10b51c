//! Slide unit: power-of-two decomposition, pass costs and interconnect size.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::isa::Ew;

/// Bytes each lane contributes to the slide datapath per cycle.
pub const DATAPATH_BYTES: usize = 8;

/// One pass through the slide unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlideMicroOp {
    /// Signed element shift; zero for a pure re-encoding.
    pub amount: i64,
    pub eew: Ew,
    pub vl: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InterconnectKind {
    AllToAll,
    SlideP2Combined,
    SlideP2Timemux,
    Slide1Combined,
    Slide1Timemux,
}

impl InterconnectKind {
    pub const ALL: [InterconnectKind; 5] = [
        InterconnectKind::AllToAll,
        InterconnectKind::SlideP2Combined,
        InterconnectKind::SlideP2Timemux,
        InterconnectKind::Slide1Combined,
        InterconnectKind::Slide1Timemux,
    ];

    pub fn name(self) -> &'static str {
        match self {
            InterconnectKind::AllToAll => "AllToAll",
            InterconnectKind::SlideP2Combined => "SlideP2_combined",
            InterconnectKind::SlideP2Timemux => "SlideP2_timemux",
            InterconnectKind::Slide1Combined => "Slide1_combined",
            InterconnectKind::Slide1Timemux => "Slide1_timemux",
        }
    }

    fn time_multiplexed(self) -> bool {
        matches!(self, InterconnectKind::SlideP2Timemux | InterconnectKind::Slide1Timemux)
    }
}

impl fmt::Display for InterconnectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InterconnectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InterconnectKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown interconnect `{s}`")))
    }
}

/// Splits a slide amount into descending powers of two; zero stays a single
/// null-stride pass.
pub fn decompose_slide(amount: u64) -> Vec<u64> {
    if amount == 0 {
        return vec![0];
    }
    (0..64)
        .rev()
        .map(|b| 1u64 << b)
        .filter(|&p| amount & p != 0)
        .collect()
}

/// Micro-operations issued for a slide of `amount` elements on `kind`.
pub fn micro_ops(amount: i64, eew: Ew, vl: usize, kind: InterconnectKind) -> Vec<SlideMicroOp> {
    let sign = amount.signum();
    let mag = amount.unsigned_abs();
    let op = |a: u64| SlideMicroOp {
        amount: sign * a as i64,
        eew,
        vl,
    };
    match kind {
        InterconnectKind::AllToAll => vec![op(mag)],
        InterconnectKind::SlideP2Combined | InterconnectKind::SlideP2Timemux => {
            decompose_slide(mag).into_iter().map(op).collect()
        }
        InterconnectKind::Slide1Combined | InterconnectKind::Slide1Timemux => {
            if mag == 0 {
                vec![op(0)]
            } else {
                (0..mag).map(|_| op(1)).collect()
            }
        }
    }
}

/// Cycles to stream `vl` elements once through an `lanes`-wide slide unit.
pub fn pass_cycles(vl: usize, eew: Ew, lanes: usize, startup: u64) -> u64 {
    let bytes = vl * eew.bytes();
    bytes.div_ceil(DATAPATH_BYTES * lanes) as u64 + startup
}

/// Cycles for a slide, including one extra pass on time-multiplexed units
/// when the source also needs re-encoding.
pub fn slide_cycles(
    amount: i64,
    vl: usize,
    eew: Ew,
    lanes: usize,
    kind: InterconnectKind,
    startup: u64,
    with_reshuffle: bool,
) -> u64 {
    let pass = pass_cycles(vl, eew, lanes, startup);
    let mut passes = micro_ops(amount, eew, vl, kind).len() as u64;
    if with_reshuffle && kind.time_multiplexed() && amount != 0 {
        passes += 1;
    }
    passes * pass
}

/// Datapath byte fed by memory-image byte `k` of an 8L-byte slice at `eew`.
fn physical_byte(k: usize, eew: Ew, lanes: usize) -> usize {
    let eb = eew.bytes();
    let elem = k / eb;
    (elem % lanes) * DATAPATH_BYTES + (elem / lanes) * eb + k % eb
}

fn memory_byte(p: usize, eew: Ew, lanes: usize) -> usize {
    let eb = eew.bytes();
    let lane = p / DATAPATH_BYTES;
    let slot = (p % DATAPATH_BYTES) / eb;
    (slot * lanes + lane) * eb + p % eb
}

/// Single-cycle operations: (input encoding, output encoding, byte shift).
fn operations(kind: InterconnectKind, lanes: usize) -> Vec<(Ew, Ew, i64)> {
    let total = (DATAPATH_BYTES * lanes) as i64;
    let mut ops = Vec::new();
    let amounts = |eew: Ew| -> Vec<i64> {
        let eb = eew.bytes() as i64;
        let mags: Vec<i64> = match kind {
            InterconnectKind::Slide1Combined | InterconnectKind::Slide1Timemux => vec![1],
            _ => (0..)
                .map(|k| 1i64 << k)
                .take_while(|&s| s * eb < total)
                .collect(),
        };
        mags.iter().flat_map(|&s| [s * eb, -s * eb]).collect()
    };
    match kind {
        InterconnectKind::AllToAll => {
            for e_in in Ew::ALL {
                for e_out in Ew::ALL {
                    for d in 0..total {
                        ops.push((e_in, e_out, d));
                    }
                }
            }
        }
        k if k.time_multiplexed() => {
            for e in Ew::ALL {
                for d in amounts(e) {
                    ops.push((e, e, d));
                }
            }
            for e_in in Ew::ALL {
                for e_out in Ew::ALL {
                    ops.push((e_in, e_out, 0));
                }
            }
        }
        _ => {
            for e_in in Ew::ALL {
                for e_out in Ew::ALL {
                    ops.push((e_in, e_out, 0));
                    for d in amounts(e_out) {
                        ops.push((e_in, e_out, d));
                    }
                }
            }
        }
    }
    ops
}

/// Input bytes that can drive datapath output byte `out_byte`.
pub fn reachable_sources(kind: InterconnectKind, lanes: usize, out_byte: usize) -> BTreeSet<usize> {
    let total = DATAPATH_BYTES * lanes;
    assert!(out_byte < total, "output byte {out_byte} outside {total}-byte datapath");
    let mut set = BTreeSet::new();
    for (e_in, e_out, d) in operations(kind, lanes) {
        let k = memory_byte(out_byte, e_out, lanes) as i64;
        let src = (k - d).rem_euclid(total as i64) as usize;
        set.insert(physical_byte(src, e_in, lanes));
    }
    set
}

/// 2-to-1 multiplexers needed to build the interconnect.
pub fn mux_count(kind: InterconnectKind, lanes: usize) -> u64 {
    let total = DATAPATH_BYTES * lanes;
    if kind == InterconnectKind::AllToAll {
        return (total * (total - 1)) as u64;
    }
    (0..total)
        .map(|b| reachable_sources(kind, lanes, b).len() as u64 - 1)
        .sum()
}

/// Synthesized slide-unit area in kGE: (new power-of-two unit, old all-to-all unit).
pub fn area_model(lanes: usize) -> Result<(f64, f64)> {
    match lanes {
        2 => Ok((24.0, 39.0)),
        4 => Ok((48.0, 131.0)),
        8 => Ok((94.0, 577.0)),
        16 => Ok((196.0, 2900.0)),
        _ => Err(Error::UnknownLanes(lanes)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decomposition_examples() {
        assert_eq!(decompose_slide(8), vec![8]);
        assert_eq!(decompose_slide(5), vec![4, 1]);
        assert_eq!(decompose_slide(0), vec![0]);
    }

    #[test]
    fn cycle_examples() {
        let k = InterconnectKind::SlideP2Timemux;
        assert_eq!(slide_cycles(4, 64, Ew::E64, 8, k, 2, false), 10);
        assert_eq!(slide_cycles(5, 64, Ew::E64, 8, k, 2, false), 20);
        assert_eq!(slide_cycles(5, 64, Ew::E64, 8, InterconnectKind::AllToAll, 2, false), 10);
        assert_eq!(slide_cycles(4, 64, Ew::E64, 8, k, 2, true), 20);
        assert_eq!(slide_cycles(4, 64, Ew::E64, 8, InterconnectKind::SlideP2Combined, 2, true), 10);
    }

    #[test]
    fn byte_maps_are_inverse() {
        for lanes in [2, 4, 8, 16] {
            for e in Ew::ALL {
                for p in 0..8 * lanes {
                    assert_eq!(physical_byte(memory_byte(p, e, lanes), e, lanes), p);
                }
            }
        }
    }

    #[test]
    fn area_table() {
        assert_eq!(area_model(16).unwrap(), (196.0, 2900.0));
        assert!(area_model(3).is_err());
        let (n, o) = area_model(16).unwrap();
        assert!((n / o - 0.068).abs() < 0.001);
    }
}
