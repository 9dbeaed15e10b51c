#![allow(dead_code)]

pub mod randprog;
pub mod refmodel;

use std::collections::BTreeSet;

use laneforge_core::frontend::FrontendConfig;
use laneforge_core::isa::{supported_set, Trace};
use laneforge_core::timing::{simulate_trace, ArchState, MachineConfig};
use laneforge_core::{Geometry, Memory};

pub struct OracleRun {
    pub instructions: usize,
    pub mismatches: Vec<String>,
    pub uncovered: Vec<String>,
}

/// Simulates `programs` random programs of `len` instructions each and
/// compares register file, memory and vtype with the reference interpreter.
pub fn oracle_equivalence(seed: u64, programs: usize, len: usize) -> OracleRun {
    let catalog = supported_set();
    let mut seen = BTreeSet::new();
    let mut mismatches = Vec::new();
    let mut instructions = 0;
    for p in 0..programs {
        let lanes = [2, 4, 8, 16][p % 4];
        let mut cfg = MachineConfig::new(lanes);
        cfg.barber_pole = p % 3 == 1;
        cfg.optimized = p % 5 == 2;
        let fe = if p % 2 == 0 { FrontendConfig::default() } else { FrontendConfig::ideal() };
        let geom = Geometry::new(lanes, cfg.vlen_per_lane).unwrap();
        let g = randprog::generate(seed.wrapping_add(p as u64), geom.vlenb(), len, &catalog);
        instructions += g.count;
        seen.extend(g.mnemonics.iter().cloned());
        let trace = match Trace::parse(&g.text) {
            Ok(t) => t,
            Err(e) => {
                mismatches.push(format!("program {p}: parse error {e}"));
                continue;
            }
        };
        let mut state = ArchState::new(&geom, Memory::from_bytes(g.init_mem.clone()));
        if let Err(e) = simulate_trace(&trace.instrs, &cfg, &fe, &mut state) {
            mismatches.push(format!("program {p}: simulation error {e}"));
            continue;
        }
        let r = &g.reference;
        if state.vrf.bytes != r.vrf {
            let first = state.vrf.bytes.iter().zip(&r.vrf).position(|(a, b)| a != b).unwrap();
            mismatches.push(format!("program {p}: register byte {first} differs"));
        }
        if state.mem.as_bytes() != r.mem.as_slice() {
            let first = state.mem.as_bytes().iter().zip(&r.mem).position(|(a, b)| a != b).unwrap();
            mismatches.push(format!("program {p}: memory byte {first} differs"));
        }
        if (state.vtype.sew.bits(), state.vtype.lmul, state.vtype.vl) != (r.sew, r.lmul, r.vl) {
            mismatches.push(format!("program {p}: vtype differs"));
        }
    }
    let uncovered = catalog.into_iter().filter(|m| !seen.contains(m)).collect();
    OracleRun {
        instructions,
        mismatches,
        uncovered,
    }
}

/// Partial sums leave an `r`-stage adder one per cycle; the adder takes one
/// pair per cycle, oldest first, and returns the sum `r` cycles later.
pub fn drain_oracle(r: u64) -> u64 {
    let mut ready: Vec<u64> = (0..r).collect();
    let mut t = 0;
    while ready.len() > 1 {
        ready.sort_unstable();
        if ready[1] <= t {
            ready.drain(..2);
            ready.push(t + r);
        }
        t += 1;
    }
    ready[0]
}
