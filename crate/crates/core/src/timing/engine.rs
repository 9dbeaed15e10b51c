//! Cycle-stepped model of one representative lane plus the shared memory
//! channels, slide unit and sequencer.
//!
//! Instructions execute functionally in program order when the frontend
//! hands them over; the cycle model only decides when they finish.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use super::banks::BankArbiter;
use super::config::MachineConfig;
use super::report::{ideality_of, CacheReport, CycleReport, Unit};
use crate::error::{Error, Result};
use crate::frontend::{Frontend, FrontendConfig, OpKind, Program, StallReason, Step, VectorSink};
use crate::isa::{
    exec_functional, Addressing, ExecOutcome, Geometry, Memory, Opcode, OperandForm, RegGroup,
    VInstr, VType, VrfState,
};
use crate::reduction::{inter_lane_cycles, intra_lane_drain_cycles, simd_cycles};
use crate::sldu::{micro_ops, pass_cycles};
use crate::vrf::{plan_reshuffles, LayoutConfig};

/// Architectural state carried through a run.
#[derive(Clone, Debug, PartialEq)]
pub struct ArchState {
    pub vrf: VrfState,
    pub mem: Memory,
    pub vtype: VType,
}

impl ArchState {
    pub fn new(geom: &Geometry, mem: Memory) -> Self {
        ArchState {
            vrf: VrfState::new(geom),
            mem,
            vtype: VType::reset(geom),
        }
    }
}

const SLOTS: usize = 4;
const UNITS: usize = 6;
const STALL_LIMIT: u64 = 500_000;

/// How many source words a processing step needs.
#[derive(Clone, Copy, Debug)]
enum Need {
    Proportional,
    /// Proportional plus a fixed number of words ahead.
    Ahead(usize),
    /// Words covering the elements moved by the current memory beat.
    Elements { eb: usize },
    /// Mask words covering the elements moved by the current memory beat.
    MaskElements,
}

#[derive(Clone, Debug)]
struct Src {
    gid: usize,
    words: usize,
    fetched: usize,
    consumed: usize,
    need: Need,
    /// Older instructions writing these words.
    deps: Vec<u64>,
}

#[derive(Clone, Debug)]
struct Dst {
    gid: usize,
    words: usize,
    written: usize,
    write_times: Vec<u64>,
    /// Older instructions still reading or writing these words.
    war: Vec<u64>,
    waw: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RedPhase {
    Intra,
    WaitSldu { ready: u64 },
    Inter { end: u64 },
    Done,
}

#[derive(Clone, Debug)]
struct MemXfer {
    packed: bool,
    eb: usize,
    vl: usize,
    /// Element carried by each beat of an element-wise transfer.
    elems: Vec<usize>,
    arrivals: Vec<u64>,
}

#[derive(Clone, Debug)]
enum Class {
    Compute { depth: u64, interval: u64 },
    Reduction { drain: u64, inter: u64, simd: u64, phase: RedPhase },
    Slide { predelay: u64, startup: u64, started: Option<u64> },
    Load(MemXfer),
    Store(MemXfer),
}

#[derive(Clone, Debug)]
struct Op {
    id: u64,
    prog: Option<usize>,
    mnemonic: String,
    unit: Unit,
    class: Class,
    srcs: Vec<Src>,
    dst: Option<Dst>,
    steps: usize,
    done_steps: usize,
    last_step: Option<u64>,
    /// (ready cycle, destination words available once ready).
    results: VecDeque<(u64, usize)>,
    produced: usize,
    finish: Option<u64>,
    store_ranges: Vec<(u64, usize)>,
}

impl Op {
    /// The unit is done with this instruction and may move on.
    fn unit_done(&self) -> bool {
        match &self.class {
            Class::Reduction { phase, .. } => *phase == RedPhase::Done,
            _ => self.done_steps >= self.steps,
        }
    }
}

struct Pending {
    instr: VInstr,
    prog: Option<usize>,
    vt: VType,
    out: ExecOutcome,
}

struct SinkView<'a> {
    accept: bool,
    mem: (u32, u32),
    ready: &'a [bool],
}

impl VectorSink for SinkView<'_> {
    fn can_accept(&self) -> bool {
        self.accept
    }

    fn pending_vector_mem(&self) -> (u32, u32) {
        self.mem
    }

    fn result_ready(&self, op: usize) -> bool {
        self.ready.get(op).copied().unwrap_or(true)
    }
}

fn unit_of(op: Opcode) -> Unit {
    match op {
        Opcode::Mul
        | Opcode::FAdd
        | Opcode::FMul
        | Opcode::FMacc
        | Opcode::FDiv
        | Opcode::FRedUSum => Unit::Vmfpu,
        Opcode::Load => Unit::Vldu,
        Opcode::Store => Unit::Vstu,
        Opcode::SlideUp
        | Opcode::SlideDown
        | Opcode::Slide1Up
        | Opcode::Slide1Down
        | Opcode::FSlide1Down
        | Opcode::Reshuffle => Unit::Sldu,
        Opcode::MAnd | Opcode::MOr | Opcode::CPop | Opcode::First => Unit::Masku,
        _ => Unit::Valu,
    }
}

struct Engine<'a> {
    cfg: &'a MachineConfig,
    geom: Geometry,
    layout: LayoutConfig,
    wpr: usize,
    lanes: usize,
    penalty: u64,
    window: usize,
    unit_queue: usize,
    operand_queue: usize,
    result_queue: usize,
    load_buffer: usize,
    ops: BTreeMap<u64, Op>,
    queues: [VecDeque<u64>; UNITS],
    seq: VecDeque<Pending>,
    next_id: u64,
    arbiter: BankArbiter,
    ready: Vec<bool>,
    first_dispatch: Option<u64>,
    last_retire: u64,
    last_progress: u64,
    busy: [bool; UNITS],
    report: CycleReport,
    invalidations: Vec<Vec<(u64, usize)>>,
}

impl<'a> Engine<'a> {
    fn new(cfg: &'a MachineConfig, program_len: usize) -> Result<Self> {
        cfg.validate()?;
        let layout = cfg.layout()?;
        Ok(Engine {
            cfg,
            geom: cfg.geometry()?,
            wpr: layout.words_per_reg(),
            layout,
            lanes: cfg.lanes,
            penalty: cfg.effective_hazard_penalty(),
            window: cfg.effective_window(),
            unit_queue: cfg.effective_unit_queue(),
            operand_queue: cfg.effective_operand_queue(),
            result_queue: cfg.effective_result_queue(),
            load_buffer: cfg.effective_load_buffer(),
            ops: BTreeMap::new(),
            queues: Default::default(),
            seq: VecDeque::new(),
            next_id: 0,
            arbiter: BankArbiter::new(cfg.banks_per_lane, UNITS * SLOTS + UNITS),
            ready: vec![false; program_len],
            first_dispatch: None,
            last_retire: 0,
            last_progress: 0,
            busy: [false; UNITS],
            report: CycleReport::default(),
            invalidations: Vec::new(),
        })
    }

    /// Lane-0 words holding the first `elems` elements of width `eb`.
    fn words(&self, elems: usize, eb: usize) -> usize {
        (elems.div_ceil(self.lanes) * eb).div_ceil(8)
    }

    /// Lane-0 words holding every element with index up to `e`.
    fn words_upto(&self, e: usize, eb: usize) -> usize {
        ((e / self.lanes + 1) * eb).div_ceil(8)
    }

    fn mask_words(&self, elems: usize) -> usize {
        elems.div_ceil(self.lanes).div_ceil(64)
    }

    fn bank(&self, gid: usize) -> usize {
        self.layout.bank_of((gid / self.wpr) as u8, gid % self.wpr)
    }

    fn mem_pending(&self) -> (u32, u32) {
        let mut loads = 0;
        let mut stores = 0;
        for op in self.ops.values() {
            match op.class {
                Class::Load(_) => loads += 1,
                Class::Store(_) => stores += 1,
                _ => {}
            }
        }
        for p in &self.seq {
            match p.instr.op {
                Opcode::Load => loads += 1,
                Opcode::Store => stores += 1,
                _ => {}
            }
        }
        (loads, stores)
    }

    fn deliver(&mut self, idx: usize, instr: &VInstr, state: &mut ArchState, now: u64) -> Result<()> {
        self.first_dispatch.get_or_insert(now);
        self.report.vector_instructions += 1;
        self.last_progress = now;
        if instr.op == Opcode::SetVl {
            exec_functional(instr, &mut state.vrf, &mut state.mem, &mut state.vtype, &self.geom)?;
            self.ready[idx] = true;
            self.last_retire = self.last_retire.max(now);
            return Ok(());
        }
        let vt = state.vtype;
        let plan = plan_reshuffles(instr, &state.vrf.eew_tag, &vt, self.geom.vlenb())?;
        for r in plan.injected {
            let ri = r.to_instr();
            let out = exec_functional(&ri, &mut state.vrf, &mut state.mem, &mut state.vtype, &self.geom)?;
            self.report.reshuffles += 1;
            self.seq.push_back(Pending {
                instr: ri,
                prog: None,
                vt,
                out,
            });
        }
        let out = exec_functional(instr, &mut state.vrf, &mut state.mem, &mut state.vtype, &self.geom)?;
        self.report.flops += instr.op_count(out.active);
        self.seq.push_back(Pending {
            instr: instr.clone(),
            prog: Some(idx),
            vt,
            out,
        });
        Ok(())
    }

    fn src_words(&self, instr: &VInstr, k: usize, g: &RegGroup, vt: &VType) -> (usize, Need) {
        let cap = g.regs as usize * self.wpr;
        let vl = vt.vl;
        if g.mask {
            let need = if instr.is_mem() { Need::MaskElements } else { Need::Proportional };
            return (self.mask_words(vl).min(cap), need);
        }
        let eb = g.eew.bytes();
        let w = match instr.op {
            Opcode::RedSum | Opcode::FRedUSum if k == 1 => 1,
            Opcode::MvXS | Opcode::FMvFS => 1,
            Opcode::MvWhole | Opcode::Reshuffle => cap,
            Opcode::SlideDown | Opcode::Slide1Down | Opcode::FSlide1Down => {
                let amount = slide_amount(instr) as usize;
                return (
                    self.words(vl.saturating_add(amount).min(vt.vlmax), eb).min(cap),
                    Need::Ahead(1),
                );
            }
            Opcode::Load | Opcode::Store => {
                return (self.words(vl, eb).min(cap), Need::Elements { eb });
            }
            _ => self.words(vl, eb),
        };
        (w.min(cap), Need::Proportional)
    }

    fn issue(&mut self, now: u64) -> Result<()> {
        let Some(p) = self.seq.front() else { return Ok(()) };
        let unit = unit_of(p.instr.op);
        let is_red = matches!(p.instr.op, Opcode::RedSum | Opcode::FRedUSum) && p.vt.vl > 0;
        if self.ops.len() >= self.window
            || self.queues[unit.index()].len() >= self.unit_queue
            || (is_red && self.queues[Unit::Sldu.index()].len() >= self.unit_queue)
        {
            return Ok(());
        }
        let p = self.seq.pop_front().expect("front checked");
        let op = self.build(p, unit, now)?;
        let id = op.id;
        self.queues[unit.index()].push_back(id);
        if matches!(op.class, Class::Reduction { .. }) {
            self.queues[Unit::Sldu.index()].push_back(id);
        }
        self.ops.insert(id, op);
        self.last_progress = now;
        Ok(())
    }

    fn build(&mut self, p: Pending, unit: Unit, now: u64) -> Result<Op> {
        let instr = &p.instr;
        let vt = p.vt;
        let operands = instr.operands(&vt)?;
        let id = self.next_id;
        self.next_id += 1;

        let overlaps = |a: usize, na: usize, b: usize, nb: usize| na > 0 && nb > 0 && a < b + nb && b < a + na;
        let mut srcs = Vec::with_capacity(operands.sources.len());
        for (k, g) in operands.sources.iter().enumerate() {
            let (words, need) = self.src_words(instr, k, g, &vt);
            let gid = g.reg as usize * self.wpr;
            let deps = self
                .ops
                .values()
                .filter(|o| o.dst.as_ref().is_some_and(|d| overlaps(gid, words, d.gid, d.words)))
                .map(|o| o.id)
                .collect();
            srcs.push(Src {
                gid,
                words,
                fetched: 0,
                consumed: 0,
                need,
                deps,
            });
        }
        let dst = operands.dest.map(|d| {
            let cap = d.group.regs as usize * self.wpr;
            let words = if d.whole {
                cap
            } else if d.group.mask {
                self.mask_words(d.elems)
            } else {
                self.words(d.elems, d.group.eew.bytes())
            }
            .min(cap);
            let gid = d.group.reg as usize * self.wpr;
            let war = self
                .ops
                .values()
                .filter(|o| o.srcs.iter().any(|s| overlaps(gid, words, s.gid, s.words)))
                .map(|o| o.id)
                .collect();
            let waw = self
                .ops
                .values()
                .filter(|o| o.dst.as_ref().is_some_and(|x| overlaps(gid, words, x.gid, x.words)))
                .map(|o| o.id)
                .collect();
            Dst {
                gid,
                words,
                written: 0,
                write_times: Vec::with_capacity(words),
                war,
                waw,
            }
        });
        let dst_words = dst.as_ref().map_or(0, |d| d.words);
        let sew = vt.sew;
        let cfg = self.cfg;
        let mut finish = None;
        let mut store_ranges = Vec::new();
        let (class, steps) = match instr.op {
            Opcode::RedSum | Opcode::FRedUSum if vt.vl > 0 => {
                let stages = if instr.op == Opcode::FRedUSum {
                    cfg.fpu_depth_for(sew)
                } else {
                    cfg.int_alu_depth
                };
                let w = srcs[0].words;
                (
                    Class::Reduction {
                        drain: intra_lane_drain_cycles(stages.min(w as u64)),
                        inter: inter_lane_cycles(self.lanes, stages + cfg.reduction_slide_step),
                        simd: simd_cycles(sew, stages),
                        phase: RedPhase::Intra,
                    },
                    w,
                )
            }
            Opcode::SlideUp
            | Opcode::SlideDown
            | Opcode::Slide1Up
            | Opcode::Slide1Down
            | Opcode::FSlide1Down
            | Opcode::Reshuffle => {
                let amount = slide_amount(instr);
                let signed = if matches!(instr.op, Opcode::SlideUp | Opcode::Slide1Up) {
                    amount as i64
                } else {
                    -(amount as i64)
                };
                let (eew, vl) = if instr.op == Opcode::Reshuffle {
                    let e = instr.eew_vd_at(sew);
                    (e, self.geom.vlenb() / e.bytes())
                } else {
                    (sew, vt.vl)
                };
                let passes = micro_ops(signed, eew, vl, cfg.interconnect).len() as u64;
                let predelay = passes.saturating_sub(1) * pass_cycles(vl, eew, self.lanes, cfg.sldu_startup);
                (
                    Class::Slide {
                        predelay,
                        startup: cfg.sldu_startup,
                        started: None,
                    },
                    dst_words,
                )
            }
            Opcode::Load | Opcode::Store => {
                let eb = instr.eew_vd_at(sew).bytes();
                let packed = match instr.addressing {
                    Addressing::Unit => true,
                    Addressing::Strided => instr.scalar(1) == eb as u64,
                    _ => false,
                };
                let beats = if packed {
                    (vt.vl * eb).div_ceil(cfg.mem_bandwidth())
                } else {
                    p.out.accesses.len()
                };
                let xfer = MemXfer {
                    packed,
                    eb,
                    vl: vt.vl,
                    elems: if packed { Vec::new() } else { p.out.accesses.iter().map(|a| a.elem).collect() },
                    arrivals: Vec::with_capacity(beats),
                };
                if instr.op == Opcode::Store {
                    store_ranges = p.out.accesses.iter().map(|a| (a.addr, a.len)).collect();
                    if beats == 0 {
                        finish = Some(now);
                    }
                    (Class::Store(xfer), beats)
                } else {
                    (Class::Load(xfer), beats)
                }
            }
            _ => {
                let depth = match unit {
                    Unit::Masku => cfg.mask_depth,
                    Unit::Vmfpu => match instr.op {
                        Opcode::Mul => cfg.int_mul_depth,
                        Opcode::FDiv => cfg.fdiv_depth,
                        _ => cfg.fpu_depth_for(sew),
                    },
                    _ => cfg.int_alu_depth,
                };
                let interval = if instr.op == Opcode::FDiv { cfg.fdiv_interval } else { 1 };
                let steps = srcs.iter().map(|s| s.words).max().unwrap_or(0).max(dst_words);
                if steps == 0 {
                    finish = Some(now);
                }
                (Class::Compute { depth, interval }, steps)
            }
        };
        Ok(Op {
            id,
            prog: p.prog,
            mnemonic: instr.mnemonic.clone(),
            unit,
            class,
            srcs,
            dst,
            steps,
            done_steps: 0,
            last_step: None,
            results: VecDeque::new(),
            produced: 0,
            finish,
            store_ranges,
        })
    }

    /// Last element index touched by memory beat `j`.
    fn beat_last_elem(&self, x: &MemXfer, j: usize) -> usize {
        let last = x.vl.saturating_sub(1);
        if x.packed {
            (((j + 1) * self.cfg.mem_bandwidth() - 1) / x.eb).min(last)
        } else {
            x.elems.get(j).copied().unwrap_or(last)
        }
    }

    /// Memory beat carrying the last lane-0 byte of destination word `w`.
    fn beat_of_word(&self, x: &MemXfer, w: usize, beats: usize) -> usize {
        let per_word = (8 / x.eb).max(1);
        let lane_elems = x.vl.div_ceil(self.lanes);
        let le = ((w + 1) * per_word).min(lane_elems).saturating_sub(1);
        let e = le * self.lanes;
        let b = if x.packed {
            (e * x.eb + x.eb - 1) / self.cfg.mem_bandwidth()
        } else {
            x.elems.partition_point(|&i| i <= e).saturating_sub(1)
        };
        b.min(beats.saturating_sub(1))
    }

    fn need(&self, op: &Op, s: &Src, step: usize) -> usize {
        if op.steps == 0 {
            return s.words;
        }
        let prop = ((step + 1) * s.words).div_ceil(op.steps);
        let n = match (s.need, &op.class) {
            (Need::Proportional, _) => prop,
            (Need::Ahead(k), _) => prop + k,
            (Need::Elements { eb }, Class::Load(x) | Class::Store(x)) => {
                self.words_upto(self.beat_last_elem(x, step), eb)
            }
            (Need::MaskElements, Class::Load(x) | Class::Store(x)) => {
                self.beat_last_elem(x, step) / self.lanes / 64 + 1
            }
            (Need::Elements { .. } | Need::MaskElements, _) => prop,
        };
        n.min(s.words)
    }

    fn operands_ready(&self, op: &Op, step: usize) -> bool {
        op.srcs.iter().all(|s| s.fetched >= self.need(op, s, step))
    }

    /// Lets already-fetched words a pending step will use leave the operand
    /// queue. Slides skip words passed over by the offset and element-wise
    /// memory accesses skip masked-off elements, so one step can span more
    /// words than the queue holds.
    fn drain(&self, op: &mut Op, step: usize) {
        let needs: Vec<usize> = op.srcs.iter().map(|s| self.need(op, s, step)).collect();
        for (s, n) in op.srcs.iter_mut().zip(needs) {
            s.consumed = s.consumed.max(n.min(s.fetched));
        }
    }

    fn consume(&self, op: &mut Op, step: usize) {
        let needs: Vec<usize> = op.srcs.iter().map(|s| self.need(op, s, step)).collect();
        for (s, n) in op.srcs.iter_mut().zip(needs) {
            s.consumed = s.consumed.max(n);
        }
    }

    fn dest_after(op: &Op, step: usize) -> usize {
        let w = op.dst.as_ref().map_or(0, |d| d.words);
        if op.steps == 0 {
            return w;
        }
        ((step + 1) * w).div_ceil(op.steps).min(w)
    }

    fn unit_head(&self, u: Unit) -> Option<u64> {
        self.queues[u.index()]
            .iter()
            .copied()
            .find(|id| {
                let op = &self.ops[id];
                op.unit == u && !op.unit_done()
            })
    }

    fn step_compute(&mut self, u: Unit, now: u64) {
        let Some(id) = self.unit_head(u) else { return };
        let mut op = self.ops.remove(&id).expect("queued op exists");
        let step = op.done_steps;
        match op.class.clone() {
            Class::Compute { depth, interval } => {
                let spaced = op.last_step.is_none_or(|t| t + interval <= now);
                let after = Self::dest_after(&op, step);
                let written = op.dst.as_ref().map_or(0, |d| d.written);
                let room = after.saturating_sub(written) as u64 <= depth + self.result_queue as u64;
                if step < op.steps && spaced && room && self.operands_ready(&op, step) {
                    self.consume(&mut op, step);
                    if after > op.produced {
                        op.results.push_back((now + depth, after));
                        op.produced = after;
                    }
                    op.done_steps += 1;
                    op.last_step = Some(now);
                    if op.done_steps == op.steps && op.dst.is_none() {
                        op.finish = Some(now + depth);
                    }
                    self.busy[u.index()] = true;
                    self.last_progress = now;
                }
            }
            Class::Reduction {
                drain,
                inter,
                simd,
                phase,
            } => {
                match phase {
                    RedPhase::Intra => {
                        if self.operands_ready(&op, step) {
                            self.consume(&mut op, step);
                            op.done_steps += 1;
                            self.last_progress = now;
                            if op.done_steps == op.steps {
                                op.class = Class::Reduction {
                                    drain,
                                    inter,
                                    simd,
                                    phase: RedPhase::WaitSldu { ready: now + 1 + drain },
                                };
                            }
                        }
                        self.busy[u.index()] = true;
                    }
                    RedPhase::WaitSldu { ready } => {
                        if now < ready {
                            self.busy[u.index()] = true;
                        }
                    }
                    RedPhase::Inter { end } => {
                        self.busy[u.index()] = true;
                        if now >= end {
                            op.results.push_back((end + simd, 1));
                            op.produced = 1;
                            op.class = Class::Reduction {
                                drain,
                                inter,
                                simd,
                                phase: RedPhase::Done,
                            };
                            let q = &mut self.queues[Unit::Sldu.index()];
                            q.retain(|&x| x != id);
                            self.last_progress = now;
                        }
                    }
                    RedPhase::Done => {}
                }
            }
            _ => {}
        }
        self.ops.insert(id, op);
    }

    fn step_sldu(&mut self, now: u64) {
        let head = self.queues[Unit::Sldu.index()].iter().copied().find(|id| {
            let op = &self.ops[id];
            match op.class {
                Class::Reduction { .. } => true,
                _ => !op.unit_done(),
            }
        });
        let Some(id) = head else { return };
        let mut op = self.ops.remove(&id).expect("queued op exists");
        match op.class.clone() {
            Class::Reduction {
                drain,
                inter,
                simd,
                phase,
            } => match phase {
                RedPhase::WaitSldu { ready } if ready <= now => {
                    op.class = Class::Reduction {
                        drain,
                        inter,
                        simd,
                        phase: RedPhase::Inter { end: now + inter },
                    };
                    self.busy[Unit::Sldu.index()] = true;
                    self.last_progress = now;
                }
                RedPhase::Inter { .. } => self.busy[Unit::Sldu.index()] = true,
                _ => {}
            },
            Class::Slide {
                predelay,
                startup,
                started,
            } => {
                let started = started.or_else(|| {
                    let first = op.srcs.first().is_none_or(|s| s.fetched > 0 || s.words == 0);
                    first.then_some(now)
                });
                op.class = Class::Slide {
                    predelay,
                    startup,
                    started,
                };
                if let Some(t0) = started {
                    self.busy[Unit::Sldu.index()] = true;
                    let step = op.done_steps;
                    let after = step + 1;
                    let written = op.dst.as_ref().map_or(0, |d| d.written);
                    let room = after.saturating_sub(written) as u64 <= startup + self.result_queue as u64;
                    self.drain(&mut op, step);
                    if now >= t0 + predelay && room && self.operands_ready(&op, step) {
                        self.consume(&mut op, step);
                        op.results.push_back((now + startup, after));
                        op.produced = after;
                        op.done_steps += 1;
                        self.last_progress = now;
                    }
                }
            }
            _ => {}
        }
        self.ops.insert(id, op);
    }

    /// Issues at most one beat per channel per cycle.
    fn step_memory(&mut self, u: Unit, now: u64) -> bool {
        let Some(id) = self.unit_head(u) else { return false };
        let mut op = self.ops.remove(&id).expect("queued op exists");
        let step = op.done_steps;
        let mut issued = false;
        if step < op.steps {
            self.drain(&mut op, step);
        }
        let ready = self.operands_ready(&op, step);
        match &op.class {
            Class::Load(x) => {
                let written = op.dst.as_ref().map_or(0, |d| d.written);
                let e = self.beat_last_elem(x, step);
                let covered = self.words_upto(e, x.eb).min(op.dst.as_ref().map_or(0, |d| d.words));
                // A beat may always issue once earlier beats have drained, even
                // if masked-off words ahead of its element exceed the buffer.
                let prev = if step == 0 {
                    0
                } else {
                    self.words_upto(self.beat_last_elem(x, step - 1), x.eb)
                };
                let drained = written >= prev.min(covered);
                if ready && (covered.saturating_sub(written) <= self.load_buffer || drained) {
                    issued = true;
                }
            }
            Class::Store(_) => issued = ready,
            _ => {}
        }
        if issued {
            self.consume(&mut op, step);
            let latency = self.cfg.mem_latency;
            match &mut op.class {
                Class::Load(x) => x.arrivals.push(now + latency),
                Class::Store(x) => x.arrivals.push(now + latency),
                _ => {}
            }
            op.done_steps += 1;
            if matches!(op.class, Class::Store(_)) && op.done_steps == op.steps {
                op.finish = Some(now + latency);
            }
            self.busy[u.index()] = true;
            self.last_progress = now;
        }
        self.ops.insert(id, op);
        issued
    }

    fn readable(&self, deps: &[u64], g: usize, now: u64) -> bool {
        for id in deps {
            let Some(p) = self.ops.get(id) else { continue };
            let Some(d) = &p.dst else { continue };
            if g < d.gid || g >= d.gid + d.words {
                continue;
            }
            let i = g - d.gid;
            if d.written <= i {
                return false;
            }
            let pen = if matches!(p.unit, Unit::Vldu | Unit::Sldu) { self.penalty } else { 0 };
            if d.write_times[i] + pen >= now {
                return false;
            }
        }
        true
    }

    fn writable(&self, d: &Dst, g: usize) -> bool {
        for id in &d.war {
            let Some(p) = self.ops.get(id) else { continue };
            for s in &p.srcs {
                if g >= s.gid && g < s.gid + s.words && s.fetched <= g - s.gid {
                    return false;
                }
            }
        }
        for id in &d.waw {
            let Some(p) = self.ops.get(id) else { continue };
            if let Some(x) = &p.dst {
                if g >= x.gid && g < x.gid + x.words && x.written <= g - x.gid {
                    return false;
                }
            }
        }
        true
    }

    /// Next word the operand requester for (`u`, `slot`) wants: (op id, gid).
    fn operand_request(&self, u: Unit, slot: usize, now: u64) -> Option<(u64, usize)> {
        let mut occupancy = 0;
        let mut target = None;
        for id in &self.queues[u.index()] {
            let op = &self.ops[id];
            if op.unit != u {
                continue;
            }
            let Some(s) = op.srcs.get(slot) else { continue };
            occupancy += s.fetched - s.consumed.min(s.fetched);
            if target.is_none() && s.fetched < s.words {
                target = Some((op.id, s.gid + s.fetched, s.deps.as_slice()));
            }
        }
        let (id, g, deps) = target?;
        if occupancy >= self.operand_queue || !self.readable(deps, g, now) {
            return None;
        }
        Some((id, g))
    }

    fn writeback_request(&self, u: Unit, now: u64) -> Option<(u64, usize)> {
        for id in &self.queues[u.index()] {
            let op = &self.ops[id];
            if op.unit != u {
                continue;
            }
            let Some(d) = &op.dst else { continue };
            if d.written >= d.words {
                continue;
            }
            let available = match &op.class {
                Class::Load(x) => {
                    let b = self.beat_of_word(x, d.written, op.steps);
                    op.steps == 0 || x.arrivals.get(b).is_some_and(|&t| t <= now)
                }
                _ => op
                    .results
                    .iter()
                    .take_while(|r| r.0 <= now)
                    .any(|r| r.1 > d.written),
            };
            let g = d.gid + d.written;
            if !available || !self.writable(d, g) {
                return None;
            }
            return Some((op.id, g));
        }
        None
    }

    fn arbitrate(&mut self, now: u64) {
        let mut reqs: Vec<Option<(u64, usize)>> = Vec::with_capacity(UNITS * SLOTS + UNITS);
        for u in Unit::ALL {
            for slot in 0..SLOTS {
                reqs.push(self.operand_request(u, slot, now));
            }
        }
        for u in Unit::ALL {
            reqs.push(self.writeback_request(u, now));
        }
        if reqs.iter().all(Option::is_none) {
            return;
        }
        let banks: Vec<Option<usize>> = reqs.iter().map(|r| r.map(|(_, g)| self.bank(g))).collect();
        let arb = self.arbiter.arbitrate(&banks);
        self.report.stalls.bank += arb.stalls;
        for (i, granted) in arb.grants.iter().enumerate() {
            if !granted {
                continue;
            }
            let (id, _) = reqs[i].expect("granted requests exist");
            let op = self.ops.get_mut(&id).expect("requesting op exists");
            if i < UNITS * SLOTS {
                op.srcs[i % SLOTS].fetched += 1;
            } else {
                let d = op.dst.as_mut().expect("write-back needs a destination");
                d.written += 1;
                d.write_times.push(now);
                while op.results.front().is_some_and(|r| r.1 <= d.written) {
                    op.results.pop_front();
                }
                if matches!(op.class, Class::Load(_)) {
                    self.busy[Unit::Vldu.index()] = true;
                }
            }
            self.last_progress = now;
        }
    }

    fn retire(&mut self, now: u64) {
        let done: Vec<u64> = self
            .ops
            .values()
            .filter(|op| {
                let steps = op.unit_done();
                let writes = op.dst.as_ref().is_none_or(|d| d.written >= d.words);
                let finished = op.finish.is_none_or(|f| f <= now);
                steps && writes && finished
            })
            .map(|op| op.id)
            .collect();
        for id in done {
            let op = self.ops.remove(&id).expect("listed op exists");
            for q in &mut self.queues {
                q.retain(|&x| x != id);
            }
            if let Some(p) = op.prog {
                self.ready[p] = true;
            }
            if !op.store_ranges.is_empty() {
                self.invalidations.push(op.store_ranges);
            }
            self.last_retire = now;
            self.last_progress = now;
        }
    }

    fn describe(&self) -> String {
        let mut s = String::new();
        for op in self.ops.values() {
            let _ = write!(
                s,
                "[#{} {} on {}: steps {}/{}",
                op.id, op.mnemonic, op.unit, op.done_steps, op.steps
            );
            for (k, src) in op.srcs.iter().enumerate() {
                let _ = write!(s, ", src{k} {}/{}", src.fetched, src.words);
            }
            if let Some(d) = &op.dst {
                let _ = write!(s, ", dst {}/{}", d.written, d.words);
            }
            s.push_str("] ");
        }
        let _ = write!(s, "sequencer holds {}", self.seq.len());
        s
    }
}

fn slide_amount(instr: &VInstr) -> u64 {
    match instr.op {
        Opcode::Slide1Up | Opcode::Slide1Down | Opcode::FSlide1Down => 1,
        Opcode::Reshuffle => 0,
        _ => match instr.form {
            OperandForm::VI => instr.imm as u64,
            _ => instr.scalar(0),
        },
    }
}

/// Runs `program` on the configured machine, updating `state`.
pub fn simulate(
    program: &Program,
    cfg: &MachineConfig,
    fe_cfg: &FrontendConfig,
    state: &mut ArchState,
) -> Result<CycleReport> {
    let mut eng = Engine::new(cfg, program.ops.len())?;
    if state.vrf.vlenb != eng.geom.vlenb() {
        return Err(Error::Config(format!(
            "register file of {} B does not match a {}-lane machine",
            state.vrf.vlenb, cfg.lanes
        )));
    }
    let mut fe = Frontend::new(*fe_cfg, program)?;
    let mut now = 0u64;
    let mut fe_done = false;
    loop {
        if !fe_done {
            let mem = eng.mem_pending();
            let view = SinkView {
                accept: eng.seq.is_empty() && eng.ops.len() < eng.window,
                mem,
                ready: &eng.ready,
            };
            match fe.step(now, &view) {
                Step::Deliver(i) => {
                    let OpKind::Vector(v) = &program.ops[i].kind else {
                        unreachable!("frontend only delivers vector instructions")
                    };
                    eng.deliver(i, v, state, now)?;
                }
                Step::Stalled(StallReason::Backpressure) => eng.report.stalls.issue += 1,
                Step::Done => fe_done = fe.is_done(),
                Step::Busy | Step::Stalled(_) => {}
            }
        }
        eng.issue(now)?;
        eng.busy = [false; UNITS];
        for u in [Unit::Valu, Unit::Vmfpu, Unit::Masku] {
            eng.step_compute(u, now);
        }
        eng.step_sldu(now);
        let mut mem_stall = false;
        for u in [Unit::Vldu, Unit::Vstu] {
            let issued = eng.step_memory(u, now);
            if !issued && !eng.queues[u.index()].is_empty() {
                mem_stall = true;
            }
        }
        eng.arbitrate(now);
        eng.retire(now);
        for ranges in eng.invalidations.drain(..) {
            fe.dcache.invalidate_accesses(ranges);
        }
        if mem_stall {
            eng.report.stalls.memory += 1;
        }
        for u in Unit::ALL {
            if eng.busy[u.index()] {
                eng.report.unit_busy.add(u, 1);
            }
        }
        if fe_done && eng.ops.is_empty() && eng.seq.is_empty() {
            break;
        }
        if now - eng.last_progress > STALL_LIMIT {
            return Err(Error::Deadlock {
                cycle: now,
                state: eng.describe(),
            });
        }
        now += 1;
    }
    let mut r = eng.report;
    r.cycles = match eng.first_dispatch {
        Some(t0) => eng.last_retire + 1 - t0,
        None => 0,
    };
    r.flop_per_cycle = if r.cycles == 0 { 0.0 } else { r.flops as f64 / r.cycles as f64 };
    r.ideality = ideality_of(r.cycles, r.flop_per_cycle, 2.0 * cfg.lanes as f64);
    r.cache = CacheReport {
        i_miss: fe.icache.stats.misses,
        d_miss: fe.dcache.stats.misses,
        invalidated_lines: fe.dcache.stats.invalidated_lines,
    };
    Ok(r)
}

/// Runs a bare vector trace with no scalar instructions around it.
pub fn simulate_trace(
    trace: &[VInstr],
    cfg: &MachineConfig,
    fe_cfg: &FrontendConfig,
    state: &mut ArchState,
) -> Result<CycleReport> {
    simulate(&Program::from_vector(trace.iter().cloned()), cfg, fe_cfg, state)
}
