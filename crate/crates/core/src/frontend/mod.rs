//! Scalar host model: issue costs, L1 caches, memory-ordering gates and the
//! ideal-dispatcher replacement.

mod cache;
pub mod coherence;
mod ordering;
mod program;

pub use cache::{AccessKind, Cache, CacheConfig, CacheStats};
pub use ordering::{ordering_gate, Gate, MemOpKind, OrderingCounters};
pub use program::{OpKind, ProgOp, Program, ScalarOp};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrontendMode {
    /// In-order scalar core forwarding vector instructions.
    Cva6,
    /// FIFO holding the whole vector trace, one instruction per cycle.
    Ideal,
}

impl fmt::Display for FrontendMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrontendMode::Cva6 => "cva6",
            FrontendMode::Ideal => "ideal",
        })
    }
}

impl FromStr for FrontendMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cva6" => Ok(FrontendMode::Cva6),
            "ideal" => Ok(FrontendMode::Ideal),
            _ => Err(Error::Config(format!("unknown frontend mode `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontendConfig {
    pub mode: FrontendMode,
    /// Cycles each scalar instruction occupies the core.
    pub scalar_cost: u64,
    /// Cycles the core spends forwarding one vector instruction.
    pub vector_dispatch_cost: u64,
    pub icache: CacheConfig,
    pub dcache: CacheConfig,
    /// Latency from the scalar core to memory.
    pub mem_latency: u64,
    /// Pre-load instruction and data addresses before the run.
    pub warm_caches: bool,
}

impl Default for FrontendConfig {
    fn default() -> Self {
        FrontendConfig {
            mode: FrontendMode::Cva6,
            scalar_cost: 1,
            vector_dispatch_cost: 2,
            icache: CacheConfig::ICACHE,
            dcache: CacheConfig::DCACHE,
            mem_latency: 5,
            warm_caches: true,
        }
    }
}

impl FrontendConfig {
    pub fn ideal() -> Self {
        FrontendConfig {
            mode: FrontendMode::Ideal,
            ..Default::default()
        }
    }

    /// Refill penalty: memory latency plus one cycle per 64-bit beat.
    pub fn miss_penalty(&self, cache: &CacheConfig) -> u64 {
        self.mem_latency + (cache.line / 8) as u64
    }
}

/// What the vector unit tells the frontend every cycle.
pub trait VectorSink {
    /// Whether a vector instruction can be handed over this cycle.
    fn can_accept(&self) -> bool;
    /// Vector loads and stores still in flight.
    fn pending_vector_mem(&self) -> (u32, u32);
    /// Whether the instruction at program index `op` has produced its scalar result.
    fn result_ready(&self, op: usize) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StallReason {
    /// Waiting for a scalar result from the vector unit.
    Result,
    /// Blocked by a memory-ordering gate.
    Ordering,
    /// The vector unit cannot take another instruction.
    Backpressure,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    /// Busy with an earlier instruction or a cache refill.
    Busy,
    Stalled(StallReason),
    /// Hands the vector instruction at this program index to the vector unit.
    Deliver(usize),
    Done,
}

/// Cycle-stepped scalar core.
#[derive(Clone, Debug)]
pub struct Frontend<'p> {
    cfg: FrontendConfig,
    program: &'p Program,
    pos: usize,
    ready_at: u64,
    fetched: bool,
    waiting: Option<usize>,
    /// Completion cycles of scalar stores still travelling to memory.
    scalar_stores: Vec<u64>,
    pub icache: Cache,
    pub dcache: Cache,
}

impl<'p> Frontend<'p> {
    pub fn new(cfg: FrontendConfig, program: &'p Program) -> Result<Self> {
        let mut icache = Cache::new(cfg.icache)?;
        let mut dcache = Cache::new(cfg.dcache)?;
        if cfg.warm_caches && cfg.mode == FrontendMode::Cva6 {
            for op in &program.ops {
                icache.access(op.pc, AccessKind::Ifetch);
                if let OpKind::Scalar(ScalarOp::Load { addr }) = op.kind {
                    dcache.access(addr, AccessKind::Load);
                }
            }
            icache.stats = CacheStats::default();
            dcache.stats = CacheStats::default();
        }
        Ok(Frontend {
            cfg,
            program,
            pos: 0,
            ready_at: 0,
            fetched: false,
            waiting: None,
            scalar_stores: Vec::new(),
            icache,
            dcache,
        })
    }

    pub fn config(&self) -> &FrontendConfig {
        &self.cfg
    }

    pub fn is_done(&self) -> bool {
        self.pos >= self.program.ops.len() && self.waiting.is_none()
    }

    /// Scalar stores not yet committed at cycle `now`.
    pub fn pending_scalar_stores(&self, now: u64) -> u32 {
        self.scalar_stores.iter().filter(|&&t| t > now).count() as u32
    }

    pub fn step(&mut self, now: u64, sink: &impl VectorSink) -> Step {
        match self.cfg.mode {
            FrontendMode::Ideal => self.step_ideal(now, sink),
            FrontendMode::Cva6 => self.step_cva6(now, sink),
        }
    }

    fn step_ideal(&mut self, now: u64, sink: &impl VectorSink) -> Step {
        while let Some(op) = self.program.ops.get(self.pos) {
            if matches!(op.kind, OpKind::Vector(_)) {
                break;
            }
            self.pos += 1;
        }
        if self.pos >= self.program.ops.len() {
            return Step::Done;
        }
        if now < self.ready_at {
            return Step::Busy;
        }
        if !sink.can_accept() {
            return Step::Stalled(StallReason::Backpressure);
        }
        self.ready_at = now + 1;
        self.pos += 1;
        Step::Deliver(self.pos - 1)
    }

    fn step_cva6(&mut self, now: u64, sink: &impl VectorSink) -> Step {
        self.scalar_stores.retain(|&t| t > now);
        if let Some(op) = self.waiting {
            if !sink.result_ready(op) {
                return Step::Stalled(StallReason::Result);
            }
            self.waiting = None;
        }
        let Some(op) = self.program.ops.get(self.pos) else {
            return Step::Done;
        };
        if now < self.ready_at {
            return Step::Busy;
        }
        if !self.fetched {
            self.fetched = true;
            if !self.icache.access(op.pc, AccessKind::Ifetch) {
                self.ready_at = now + self.cfg.miss_penalty(&self.cfg.icache);
                return Step::Busy;
            }
        }
        let (vector_loads, vector_stores) = sink.pending_vector_mem();
        let counters = OrderingCounters {
            vector_loads,
            vector_stores,
            scalar_stores: self.scalar_stores.len() as u32,
        };
        let cost = self.cfg.scalar_cost;
        match &op.kind {
            OpKind::Scalar(ScalarOp::Alu | ScalarOp::Branch) => self.ready_at = now + cost,
            OpKind::Scalar(ScalarOp::Load { addr }) => {
                if ordering_gate(MemOpKind::ScalarLoad, &counters) == Gate::Stall {
                    return Step::Stalled(StallReason::Ordering);
                }
                let hit = self.dcache.access(*addr, AccessKind::Load);
                let penalty = if hit { 0 } else { self.cfg.miss_penalty(&self.cfg.dcache) };
                self.ready_at = now + cost + penalty;
            }
            OpKind::Scalar(ScalarOp::Store { addr }) => {
                if ordering_gate(MemOpKind::ScalarStore, &counters) == Gate::Stall {
                    return Step::Stalled(StallReason::Ordering);
                }
                self.dcache.access(*addr, AccessKind::Store);
                self.scalar_stores.push(now + self.cfg.mem_latency);
                self.ready_at = now + cost;
            }
            OpKind::Vector(v) => {
                if v.is_mem() && ordering_gate(MemOpKind::VectorMem, &counters) == Gate::Stall {
                    return Step::Stalled(StallReason::Ordering);
                }
                if !sink.can_accept() {
                    return Step::Stalled(StallReason::Backpressure);
                }
                self.ready_at = now + self.cfg.vector_dispatch_cost;
                if v.returns_scalar() {
                    self.waiting = Some(self.pos);
                }
                self.pos += 1;
                self.fetched = false;
                return Step::Deliver(self.pos - 1);
            }
        }
        self.pos += 1;
        self.fetched = false;
        Step::Busy
    }
}

struct OpenSink;

impl VectorSink for OpenSink {
    fn can_accept(&self) -> bool {
        true
    }

    fn pending_vector_mem(&self) -> (u32, u32) {
        (0, 0)
    }

    fn result_ready(&self, _op: usize) -> bool {
        true
    }
}

/// Arrival cycle of every vector instruction when the vector unit never
/// pushes back, as (program index, cycle).
pub fn dispatch_stream(program: &Program, cfg: &FrontendConfig) -> Result<Vec<(usize, u64)>> {
    let mut fe = Frontend::new(*cfg, program)?;
    let mut out = Vec::with_capacity(program.vector_count());
    let mut now = 0;
    loop {
        match fe.step(now, &OpenSink) {
            Step::Done => return Ok(out),
            Step::Deliver(i) => out.push((i, now)),
            Step::Busy | Step::Stalled(_) => {}
        }
        now += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::parse_trace_line;

    fn matmul_loop(iters: usize) -> Program {
        let vf = parse_trace_line("vfmacc.vf v8, f0, v16").unwrap();
        let mut p = Program::new();
        for i in 0..iters {
            p.push_scalar(0x100, ScalarOp::Load { addr: 8 * (i as u64 % 4) });
            p.push_scalar(0x104, ScalarOp::Alu);
            p.push_vector(0x108, vf.clone());
        }
        p
    }

    #[test]
    fn four_cycles_per_vfmacc() {
        let p = matmul_loop(16);
        let arrivals = dispatch_stream(&p, &FrontendConfig::default()).unwrap();
        assert_eq!(arrivals.len(), 16);
        for w in arrivals.windows(2) {
            assert_eq!(w[1].1 - w[0].1, 4);
        }
    }

    #[test]
    fn ideal_is_back_to_back() {
        let p = matmul_loop(8);
        let arrivals = dispatch_stream(&p, &FrontendConfig::ideal()).unwrap();
        let gaps: Vec<u64> = arrivals.windows(2).map(|w| w[1].1 - w[0].1).collect();
        assert_eq!(gaps, vec![1; 7]);
        assert_eq!(arrivals[0].1, 0);
    }

    #[test]
    fn cold_icache_pays_refills() {
        let p = matmul_loop(2);
        let cfg = FrontendConfig {
            warm_caches: false,
            ..Default::default()
        };
        let arrivals = dispatch_stream(&p, &cfg).unwrap();
        // first pass misses on the two I$ lines and the D$ line
        let penalty_i = cfg.miss_penalty(&cfg.icache);
        let penalty_d = cfg.miss_penalty(&cfg.dcache);
        assert_eq!(arrivals[0].1, penalty_i + penalty_d + 1 + 1);
        assert_eq!(arrivals[1].1 - arrivals[0].1, 4);
    }

    struct Blocked;

    impl VectorSink for Blocked {
        fn can_accept(&self) -> bool {
            true
        }
        fn pending_vector_mem(&self) -> (u32, u32) {
            (0, 1)
        }
        fn result_ready(&self, _op: usize) -> bool {
            true
        }
    }

    #[test]
    fn scalar_load_waits_for_vector_store() {
        let mut p = Program::new();
        p.push_scalar(0, ScalarOp::Load { addr: 0 });
        let mut fe = Frontend::new(FrontendConfig::default(), &p).unwrap();
        assert_eq!(fe.step(0, &Blocked), Step::Stalled(StallReason::Ordering));
        assert_eq!(fe.step(1, &OpenSink), Step::Busy);
        assert!(fe.is_done());
    }
}
