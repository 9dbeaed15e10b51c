//! Physical VRF layout: lane interleaving, bank addressing and reshuffles.

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::{Error, Result};
use crate::isa::{Ew, Geometry, Opcode, VInstr, VType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LayoutConfig {
    pub lanes: usize,
    pub vlen_per_lane: usize,
    pub banks_per_lane: usize,
    pub barber_pole: bool,
}

/// Width of one bank word in bytes.
pub const BANK_WIDTH: usize = 8;

impl LayoutConfig {
    pub fn new(geom: &Geometry, barber_pole: bool) -> Result<Self> {
        let cfg = LayoutConfig {
            lanes: geom.lanes,
            vlen_per_lane: geom.vlen_per_lane,
            banks_per_lane: 8,
            barber_pole,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lanes == 0 || !self.lanes.is_power_of_two() {
            return Err(Error::Config(format!("lane count {} is not a power of two", self.lanes)));
        }
        if self.banks_per_lane == 0 || !self.words_per_reg().is_multiple_of(self.banks_per_lane) {
            return Err(Error::Config(format!(
                "{} words per register do not divide into {} banks",
                self.words_per_reg(),
                self.banks_per_lane
            )));
        }
        Ok(())
    }

    /// Bytes of one register held by one lane.
    pub fn lane_bytes(&self) -> usize {
        self.vlen_per_lane / 8
    }

    pub fn words_per_reg(&self) -> usize {
        self.lane_bytes() / BANK_WIDTH
    }

    pub fn vlenb(&self) -> usize {
        self.lane_bytes() * self.lanes
    }

    /// Rows each register occupies in every bank.
    pub fn rows_per_reg(&self) -> usize {
        self.words_per_reg() / self.banks_per_lane
    }

    /// Bank holding the first word of `reg` in every lane.
    pub fn start_bank(&self, reg: u8) -> usize {
        if self.barber_pole {
            reg as usize % self.banks_per_lane
        } else {
            0
        }
    }

    /// Bank holding in-lane word `word` of `reg`.
    pub fn bank_of(&self, reg: u8, word: usize) -> usize {
        (self.start_bank(reg) + word) % self.banks_per_lane
    }
}

/// Physical position of one byte. `row` is relative to the register's
/// region within the bank.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ByteLocation {
    pub lane: usize,
    pub bank: usize,
    pub row: usize,
    pub offset: usize,
}

impl ByteLocation {
    pub fn absolute_row(&self, reg: u8, cfg: &LayoutConfig) -> usize {
        reg as usize * cfg.rows_per_reg() + self.row
    }
}

pub fn element_to_lane(i: usize, lanes: usize) -> usize {
    i % lanes
}

/// Byte offset inside the owning lane's slice of a register.
fn lane_byte(elem: usize, eew: Ew, lanes: usize) -> usize {
    (elem / lanes) * eew.bytes()
}

/// Location of byte 0 of element `elem` of register `reg`.
pub fn byte_location(reg: u8, elem: usize, eew: Ew, cfg: &LayoutConfig) -> Result<ByteLocation> {
    if reg >= 32 {
        return Err(Error::Bounds(format!("register v{reg}")));
    }
    let elems = cfg.vlenb() / eew.bytes();
    if elem >= elems {
        return Err(Error::Bounds(format!("element {elem} of v{reg} at {eew} (max {elems})")));
    }
    let b = lane_byte(elem, eew, cfg.lanes);
    let word = b / BANK_WIDTH;
    Ok(ByteLocation {
        lane: element_to_lane(elem, cfg.lanes),
        bank: cfg.bank_of(reg, word),
        row: word / cfg.banks_per_lane,
        offset: b % BANK_WIDTH,
    })
}

/// Index into a lane-major physical register image for memory-image byte `k`.
fn physical_index(k: usize, eew: Ew, cfg: &LayoutConfig) -> usize {
    let eb = eew.bytes();
    let elem = k / eb;
    let lane = elem % cfg.lanes;
    lane * cfg.lane_bytes() + lane_byte(elem, eew, cfg.lanes) + k % eb
}

/// Lays a register's memory image out across lanes for element width `eew`.
pub fn shuffle(image: &[u8], eew: Ew, cfg: &LayoutConfig) -> Vec<u8> {
    let mut phys = vec![0; image.len()];
    for (k, &b) in image.iter().enumerate() {
        phys[physical_index(k, eew, cfg)] = b;
    }
    phys
}

/// Inverse of [`shuffle`].
pub fn deshuffle(phys: &[u8], eew: Ew, cfg: &LayoutConfig) -> Vec<u8> {
    (0..phys.len()).map(|k| phys[physical_index(k, eew, cfg)]).collect()
}

/// Re-encodes a physical register image from `old` to `new` element width.
pub fn apply_reshuffle(phys: &[u8], old: Ew, new: Ew, cfg: &LayoutConfig) -> Vec<u8> {
    if old == new {
        return phys.to_vec();
    }
    shuffle(&deshuffle(phys, old, cfg), new, cfg)
}

/// One injected whole-register re-encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reshuffle {
    pub reg: u8,
    pub from: Ew,
    pub to: Ew,
}

impl Reshuffle {
    pub fn to_instr(self) -> VInstr {
        VInstr::reshuffle(self.reg, self.from, self.to)
    }
}

/// Reshuffles to run, in order, before an instruction.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReshufflePlan {
    pub injected: Vec<Reshuffle>,
}

impl ReshufflePlan {
    pub fn is_empty(&self) -> bool {
        self.injected.is_empty()
    }

    pub fn apply_tags(&self, tags: &mut [Ew; 32]) {
        for r in &self.injected {
            tags[r.reg as usize] = r.to;
        }
    }
}

/// Works out which registers must be re-encoded before `instr` runs.
///
/// Mask operands are read at bit granularity and never need a reshuffle.
/// The destination is planned first, then sources in operand order.
pub fn plan_reshuffles(instr: &VInstr, tags: &[Ew; 32], vt: &VType, vlenb: usize) -> Result<ReshufflePlan> {
    let mut plan = ReshufflePlan::default();
    if matches!(instr.op, Opcode::Reshuffle | Opcode::MvWhole | Opcode::SetVl) {
        return Ok(plan);
    }
    let ops = instr.operands(vt)?;
    let push = |reg: u8, from: Ew, to: Ew, plan: &mut ReshufflePlan| {
        if from != to && !plan.injected.iter().any(|r| r.reg == reg) {
            plan.injected.push(Reshuffle { reg, from, to });
        }
    };
    if let Some(d) = ops.dest.filter(|d| !d.group.mask) {
        for k in 0..d.group.regs {
            let r = d.group.reg + k;
            if !d.covers(k, vlenb) {
                push(r, tags[r as usize], d.group.eew, &mut plan);
            }
        }
    }
    for g in ops.sources.iter().filter(|g| !g.mask) {
        for r in g.reg..g.reg + g.regs {
            push(r, tags[r as usize], g.eew, &mut plan);
        }
    }
    Ok(plan)
}

/// Writes the layout of `regs` at every element width as CSV.
pub fn dump_layout_csv<W: Write>(out: W, regs: &[u8], cfg: &LayoutConfig) -> Result<()> {
    let mut w = std::io::BufWriter::new(out);
    let io = |e: std::io::Error| Error::Config(e.to_string());
    writeln!(w, "reg,elem,eew,lane,bank,row,offset").map_err(io)?;
    for &reg in regs {
        for eew in Ew::ALL {
            for elem in 0..cfg.vlenb() / eew.bytes() {
                let l = byte_location(reg, elem, eew, cfg)?;
                writeln!(
                    w,
                    "{reg},{elem},{},{},{},{},{}",
                    eew.bits(),
                    l.lane,
                    l.bank,
                    l.row,
                    l.offset
                )
                .map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}
