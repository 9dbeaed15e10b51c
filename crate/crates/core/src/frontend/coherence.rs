//! Randomized check that the ordering gates keep the write-through data
//! cache coherent with an asynchronous vector unit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{HashMap, VecDeque};

use super::cache::{AccessKind, Cache, CacheConfig};
use super::ordering::{ordering_gate, Gate, MemOpKind, OrderingCounters};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MemOp {
    ScalarLoad { addr: u64, len: usize },
    ScalarStore { addr: u64, len: usize, value: u64 },
    VectorLoad { addr: u64, len: usize },
    VectorStore { addr: u64, data: Vec<u8> },
}

impl MemOp {
    fn is_vector(&self) -> bool {
        matches!(self, MemOp::VectorLoad { .. } | MemOp::VectorStore { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoherenceConfig {
    pub mem_size: usize,
    pub ops: usize,
    /// Apply the ordering gates; disabling them shows what they prevent.
    pub gated: bool,
    /// Upper bound on the cycles a vector access spends in flight.
    pub max_vector_latency: u64,
    pub scalar_store_latency: u64,
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        CoherenceConfig {
            mem_size: 256,
            ops: 24,
            gated: true,
            max_vector_latency: 12,
            scalar_store_latency: 5,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoherenceReport {
    pub runs: u64,
    pub loads: u64,
    pub stale_reads: u64,
    pub final_mismatches: u64,
    pub first_violation: Option<String>,
}

impl CoherenceReport {
    pub fn is_clean(&self) -> bool {
        self.stale_reads == 0 && self.final_mismatches == 0
    }

    fn merge(&mut self, o: CoherenceReport) {
        self.runs += o.runs;
        self.loads += o.loads;
        self.stale_reads += o.stale_reads;
        self.final_mismatches += o.final_mismatches;
        if self.first_violation.is_none() {
            self.first_violation = o.first_violation;
        }
    }
}

pub fn random_program(rng: &mut impl Rng, cfg: &CoherenceConfig) -> Vec<MemOp> {
    let size = cfg.mem_size as u64;
    (0..cfg.ops)
        .map(|_| {
            let len = 1usize << rng.gen_range(0..4);
            let addr = rng.gen_range(0..size / len as u64) * len as u64;
            match rng.gen_range(0..4) {
                0 => MemOp::ScalarLoad { addr, len },
                1 => MemOp::ScalarStore {
                    addr,
                    len,
                    value: rng.gen(),
                },
                2 => {
                    let len = rng.gen_range(1..=64usize);
                    let addr = rng.gen_range(0..=size - len as u64);
                    MemOp::VectorLoad { addr, len }
                }
                _ => {
                    let len = rng.gen_range(1..=64usize);
                    let addr = rng.gen_range(0..=size - len as u64);
                    let data = (0..len).map(|_| rng.gen()).collect();
                    MemOp::VectorStore { addr, data }
                }
            }
        })
        .collect()
}

fn store_bytes(value: u64, len: usize) -> Vec<u8> {
    value.to_le_bytes()[..len].to_vec()
}

/// Program-order execution on flat memory: the value every load must see.
pub fn sequential(ops: &[MemOp], mem_size: usize) -> (Vec<Vec<u8>>, Vec<u8>) {
    let mut mem = vec![0u8; mem_size];
    let mut reads = Vec::new();
    for op in ops {
        match op {
            MemOp::ScalarLoad { addr, len } | MemOp::VectorLoad { addr, len } => {
                reads.push(mem[*addr as usize..*addr as usize + len].to_vec());
            }
            MemOp::ScalarStore { addr, len, value } => {
                mem[*addr as usize..*addr as usize + len].copy_from_slice(&store_bytes(*value, *len));
            }
            MemOp::VectorStore { addr, data } => {
                mem[*addr as usize..*addr as usize + data.len()].copy_from_slice(data);
            }
        }
    }
    (reads, mem)
}

struct VectorInFlight {
    op: usize,
    /// Cycle at which the access touches memory.
    exec: u64,
    done: u64,
    executed: bool,
}

struct System {
    mem: Vec<u8>,
    cache: Cache,
    lines: HashMap<u64, Vec<u8>>,
    line: u64,
    /// Scalar stores travelling to memory: (landing cycle, addr, bytes).
    store_buffer: VecDeque<(u64, u64, Vec<u8>)>,
}

impl System {
    fn land_stores(&mut self, now: u64) {
        while self.store_buffer.front().is_some_and(|s| s.0 <= now) {
            let (_, addr, bytes) = self.store_buffer.pop_front().unwrap();
            self.write_memory(addr, &bytes);
            self.update_cached(addr, &bytes);
        }
    }

    fn write_memory(&mut self, addr: u64, bytes: &[u8]) {
        self.mem[addr as usize..addr as usize + bytes.len()].copy_from_slice(bytes);
    }

    fn update_cached(&mut self, addr: u64, bytes: &[u8]) {
        for (i, b) in bytes.iter().enumerate() {
            let a = addr + i as u64;
            if self.cache.contains(a) {
                if let Some(l) = self.lines.get_mut(&(a / self.line)) {
                    l[(a % self.line) as usize] = *b;
                }
            }
        }
    }

    fn scalar_load(&mut self, addr: u64, len: usize) -> Vec<u8> {
        let line = addr / self.line;
        if !self.cache.access(addr, AccessKind::Load) {
            let base = (line * self.line) as usize;
            self.lines.insert(line, self.mem[base..base + self.line as usize].to_vec());
        }
        let off = (addr % self.line) as usize;
        let mut v = self.lines[&line][off..off + len].to_vec();
        // forwarding from the store buffer, oldest first
        for (_, a, bytes) in &self.store_buffer {
            for (i, b) in bytes.iter().enumerate() {
                let x = a + i as u64;
                if x >= addr && x < addr + len as u64 {
                    v[(x - addr) as usize] = *b;
                }
            }
        }
        v
    }
}

/// Runs one random interleaving; returns the number of stale loads and
/// whether final memory matched.
pub fn run_interleaving(ops: &[MemOp], cfg: &CoherenceConfig, rng: &mut impl Rng) -> CoherenceReport {
    let dcfg = CacheConfig::DCACHE;
    let mut sys = System {
        mem: vec![0; cfg.mem_size],
        cache: Cache::new(dcfg).expect("valid geometry"),
        lines: HashMap::new(),
        line: dcfg.line as u64,
        store_buffer: VecDeque::new(),
    };
    let (expected, final_mem) = sequential(ops, cfg.mem_size);
    // which load index each op corresponds to
    let mut load_slot = vec![usize::MAX; ops.len()];
    let mut n = 0;
    for (i, op) in ops.iter().enumerate() {
        if matches!(op, MemOp::ScalarLoad { .. } | MemOp::VectorLoad { .. }) {
            load_slot[i] = n;
            n += 1;
        }
    }
    let mut observed: Vec<Option<Vec<u8>>> = vec![None; n];
    let mut vq: VecDeque<VectorInFlight> = VecDeque::new();
    let mut pos = 0;
    let mut now = 0u64;
    while pos < ops.len() || !vq.is_empty() || !sys.store_buffer.is_empty() {
        sys.land_stores(now);
        // vector unit: in-order execution and completion
        for v in vq.iter_mut() {
            if !v.executed && v.exec <= now {
                v.executed = true;
                match &ops[v.op] {
                    MemOp::VectorLoad { addr, len } => {
                        observed[load_slot[v.op]] =
                            Some(sys.mem[*addr as usize..*addr as usize + len].to_vec());
                    }
                    MemOp::VectorStore { addr, data } => {
                        sys.mem[*addr as usize..*addr as usize + data.len()].copy_from_slice(data);
                    }
                    _ => unreachable!(),
                }
            } else if !v.executed {
                break;
            }
        }
        while vq.front().is_some_and(|v| v.executed && v.done <= now) {
            let v = vq.pop_front().unwrap();
            if let MemOp::VectorStore { addr, data } = &ops[v.op] {
                sys.cache.invalidate_range(*addr, data.len());
            }
        }
        if pos < ops.len() && rng.gen_bool(0.7) {
            let counters = OrderingCounters {
                vector_loads: vq.iter().filter(|v| matches!(ops[v.op], MemOp::VectorLoad { .. })).count() as u32,
                vector_stores: vq.iter().filter(|v| matches!(ops[v.op], MemOp::VectorStore { .. })).count() as u32,
                scalar_stores: sys.store_buffer.len() as u32,
            };
            let kind = match &ops[pos] {
                MemOp::ScalarLoad { .. } => MemOpKind::ScalarLoad,
                MemOp::ScalarStore { .. } => MemOpKind::ScalarStore,
                _ => MemOpKind::VectorMem,
            };
            if !cfg.gated || ordering_gate(kind, &counters) == Gate::Allow {
                match &ops[pos] {
                    MemOp::ScalarLoad { addr, len } => {
                        observed[load_slot[pos]] = Some(sys.scalar_load(*addr, *len));
                    }
                    MemOp::ScalarStore { addr, len, value } => {
                        let bytes = store_bytes(*value, *len);
                        sys.cache.access(*addr, AccessKind::Store);
                        sys.update_cached(*addr, &bytes);
                        sys.store_buffer
                            .push_back((now + cfg.scalar_store_latency, *addr, bytes));
                    }
                    op => {
                        debug_assert!(op.is_vector());
                        let prev = vq.back().map(|v| v.exec).unwrap_or(0);
                        let exec = (now + rng.gen_range(1..=cfg.max_vector_latency)).max(prev);
                        let done = exec + rng.gen_range(0..=cfg.max_vector_latency);
                        let done = done.max(vq.back().map(|v| v.done).unwrap_or(0));
                        vq.push_back(VectorInFlight {
                            op: pos,
                            exec,
                            done,
                            executed: false,
                        });
                    }
                }
                pos += 1;
            }
        }
        now += 1;
    }
    let mut report = CoherenceReport {
        runs: 1,
        ..Default::default()
    };
    for (i, (exp, got)) in expected.iter().zip(&observed).enumerate() {
        report.loads += 1;
        if got.as_ref() != Some(exp) {
            report.stale_reads += 1;
            if report.first_violation.is_none() {
                report.first_violation = Some(format!("load #{i}: expected {exp:02x?}, observed {got:02x?}"));
            }
        }
    }
    if sys.mem != final_mem {
        report.final_mismatches += 1;
        if report.first_violation.is_none() {
            report.first_violation = Some("final memory differs from program order".into());
        }
    }
    report
}

/// Runs `runs` random programs, each with its own interleaving.
pub fn check(runs: u64, seed: u64, cfg: &CoherenceConfig) -> CoherenceReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = CoherenceReport::default();
    for _ in 0..runs {
        let ops = random_program(&mut rng, cfg);
        total.merge(run_interleaving(&ops, cfg, &mut rng));
    }
    total
}
