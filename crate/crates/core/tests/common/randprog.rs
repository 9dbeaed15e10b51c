//! Random legal programs over the whole supported subset, generated while
//! stepping the reference interpreter so every choice sees the live state.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::refmodel::{group_regs, is_fp_mnemonic, is_nan, mem_kind, Addr, RInst, RefMachine};

/// Largest index an indexed access adds to its base.
const IDX_SPAN: u64 = 1024;

pub struct Generated {
    pub text: String,
    pub init_mem: Vec<u8>,
    pub reference: RefMachine,
    pub mnemonics: BTreeSet<String>,
    pub count: usize,
}

struct Gen {
    rng: ChaCha8Rng,
    r: RefMachine,
    /// Stores stay below this address; index tables live above it.
    data_end: u64,
    tables: u64,
}

impl Gen {
    fn group(&mut self, regs: u32, nonzero: bool) -> u8 {
        let lo = u32::from(nonzero);
        (self.rng.gen_range(lo..32 / regs) * regs) as u8
    }

    fn any_reg(&mut self) -> u8 {
        self.rng.gen_range(0..32)
    }

    fn fp_scalar(&mut self) -> u64 {
        let v: f64 = self.rng.gen_range(-4.0..4.0);
        if self.r.sew == 64 {
            v.to_bits()
        } else {
            0xffff_ffff_0000_0000 | (v as f32).to_bits() as u64
        }
    }

    fn int_scalar(&mut self) -> u64 {
        match self.rng.gen_range(0..3) {
            0 => self.rng.gen_range(0..8),
            1 => self.rng.gen::<u64>(),
            _ => self.rng.gen_range(0..u16::MAX as u64),
        }
    }

    fn vtype_change(&mut self) -> RInst {
        let sew = [8, 16, 32, 64][self.rng.gen_range(0..4)];
        let lmul = [1u8, 2, 4, 8][self.rng.gen_range(0..4)];
        let vlmax = self.r.vlmax_of(sew, lmul) as u64;
        let mut i = RInst::new(if self.rng.gen_bool(0.6) { "vsetvli" } else { "vsetvl" });
        i.sew = sew;
        i.lmul = lmul;
        i.y = ((sew.trailing_zeros() as u64 - 3) << 3) | lmul.trailing_zeros() as u64;
        if self.rng.gen_bool(0.25) {
            i.rs1_zero = true;
            // keep-vl form only exists for vsetvli
            i.rd_zero = i.mnem == "vsetvli" && self.rng.gen_bool(0.35);
        } else {
            i.x = match self.rng.gen_range(0..10) {
                0 | 1 => 0,
                2 => 1,
                3 | 4 => vlmax,
                5 => vlmax + self.rng.gen_range(1..100),
                6 => u64::MAX,
                _ => self.rng.gen_range(1..=vlmax),
            };
        }
        i
    }

    fn masked(&mut self) -> bool {
        self.rng.gen_bool(0.3)
    }

    /// Any NaN among the active fp operands of `i`.
    fn nan_inputs(&self, i: &RInst) -> bool {
        let sew = self.r.sew;
        let (base, suffix) = i.mnem.split_once('.').unwrap();
        if suffix == "vf" && is_nan(i.x & lane_mask(sew), sew) {
            return true;
        }
        if base == "vfredusum" && self.r.vl > 0 && is_nan(self.r.elem(i.vs1, 0, sew), sew) {
            return true;
        }
        (0..self.r.vl).filter(|&e| self.r.active(i.masked, e)).any(|e| {
            is_nan(self.r.elem(i.vs2, e, sew), sew)
                || (suffix == "vv" && is_nan(self.r.elem(i.vs1, e, sew), sew))
                || (base == "vfmacc" && is_nan(self.r.elem(i.vd, e, sew), sew))
        })
    }

    /// Builds `m` for the current vtype, or `None` when it cannot be legal here.
    fn build(&mut self, m: &str) -> Option<Vec<RInst>> {
        let sew = self.r.sew;
        let lmul = self.r.lmul;
        let l = lmul as u32;
        if is_fp_mnemonic(m) && sew < 32 {
            return None;
        }
        let mut i = RInst::new(m);
        if let Some((load, addressing, w)) = mem_kind(m) {
            return self.memory(i, load, addressing, w);
        }
        match m {
            "vmv1r.v" => {
                i.vd = self.any_reg();
                i.vs2 = self.any_reg();
            }
            "vmand.mm" | "vmor.mm" => {
                i.vd = self.any_reg();
                i.vs1 = self.any_reg();
                i.vs2 = self.any_reg();
            }
            "vcpop.m" | "vfirst.m" => {
                i.vs2 = self.any_reg();
                i.masked = self.masked();
            }
            "vmv.x.s" | "vfmv.f.s" => i.vs2 = self.any_reg(),
            "vmv.s.x" => {
                i.vd = self.any_reg();
                i.x = self.int_scalar();
            }
            "vfmv.s.f" => {
                i.vd = self.any_reg();
                i.x = self.fp_scalar();
            }
            "vmv.v.v" | "vmv.v.x" | "vmv.v.i" | "vfmv.v.f" => {
                i.vd = self.group(l, false);
                i.vs1 = self.group(l, false);
                i.imm = self.rng.gen_range(-16..=15);
                i.x = if m == "vfmv.v.f" { self.fp_scalar() } else { self.int_scalar() };
            }
            "vmerge.vvm" | "vmerge.vxm" | "vmerge.vim" => {
                i.vd = self.group(l, true);
                i.vs1 = self.group(l, false);
                i.vs2 = self.group(l, false);
                i.imm = self.rng.gen_range(-16..=15);
                i.x = self.int_scalar();
            }
            "vredsum.vs" | "vfredusum.vs" => {
                i.vd = self.any_reg();
                i.vs1 = self.any_reg();
                i.vs2 = self.group(l, false);
                i.masked = self.masked();
            }
            _ => {
                let (base, suffix) = m.split_once('.').unwrap();
                i.masked = self.masked();
                let mask_dest = matches!(base, "vmseq" | "vmslt");
                i.vd = if mask_dest { self.any_reg() } else { self.group(l, i.masked) };
                i.vs1 = self.group(l, false);
                i.vs2 = self.group(l, false);
                if matches!(base, "vslideup" | "vslide1up") {
                    while i.vs2 == i.vd {
                        i.vs2 = self.group(l, false);
                    }
                }
                let shift_like = matches!(base, "vsll" | "vsrl" | "vslideup" | "vslidedown");
                i.imm = if shift_like { self.rng.gen_range(0..=31) } else { self.rng.gen_range(-16..=15) };
                i.x = match suffix {
                    "vf" => self.fp_scalar(),
                    _ if matches!(base, "vslideup" | "vslidedown") => {
                        let vlmax = self.r.vlmax() as u64;
                        match self.rng.gen_range(0..6) {
                            0 => u64::MAX - self.rng.gen_range(0..4),
                            1 => vlmax + self.rng.gen_range(0..3),
                            _ => self.rng.gen_range(0..=vlmax.min(40)),
                        }
                    }
                    _ => self.int_scalar(),
                };
                if is_fp_mnemonic(m) && base != "vfslide1down" && self.nan_inputs(&i) {
                    return None;
                }
            }
        }
        if m == "vfredusum.vs" && self.nan_inputs(&i) {
            return None;
        }
        Some(vec![i])
    }

    fn memory(&mut self, mut i: RInst, load: bool, addressing: Addr, w: u32) -> Option<Vec<RInst>> {
        let (sew, lmul, vl) = (self.r.sew, self.r.lmul, self.r.vl as u64);
        let data = if addressing == Addr::Indexed { sew } else { w };
        let eb = data as u64 / 8;
        let data_regs = group_regs(sew, lmul, data);
        let idx_regs = group_regs(sew, lmul, w);
        if data_regs > 8 || idx_regs > 8 {
            return None;
        }
        i.masked = self.masked();
        i.vd = self.group(data_regs, load && i.masked);
        let limit = if load { self.r.mem.len() as u64 } else { self.data_end };
        let mut out = Vec::new();
        match addressing {
            Addr::Unit => i.x = self.rng.gen_range(0..=limit - vl * eb),
            Addr::Strided => {
                i.y = self.rng.gen_range(0..=4 * eb);
                let extent = if vl == 0 { 0 } else { (vl - 1) * i.y + eb };
                i.x = self.rng.gen_range(0..=limit - extent);
            }
            Addr::Indexed => {
                let overlaps = |a: u8, b: u8| {
                    (a as u32) < b as u32 + idx_regs && (b as u32) < a as u32 + data_regs
                };
                let mut vi = self.group(idx_regs, false);
                while overlaps(i.vd, vi) {
                    vi = self.group(idx_regs, false);
                }
                let mut prep = RInst::new(&format!("vle{w}.v"));
                prep.vd = vi;
                prep.x = self.tables + (w.trailing_zeros() as u64 - 3) * self.r.vlenb as u64 * 8;
                out.push(prep);
                i.vs2 = vi;
                i.x = self.rng.gen_range(0..=self.data_end - IDX_SPAN - 8);
            }
        }
        out.push(i);
        Some(out)
    }
}

fn lane_mask(bits: u32) -> u64 {
    if bits == 64 {
        u64::MAX
    } else {
        (1 << bits) - 1
    }
}

/// Generates `count` instructions for a register file of `vlenb` bytes.
pub fn generate(seed: u64, vlenb: usize, count: usize, catalog: &[String]) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data_end = 32 * vlenb as u64 + IDX_SPAN + 64;
    let tables = data_end;
    let table_bytes = 8 * vlenb;
    let mut mem = vec![0u8; data_end as usize + 4 * table_bytes];
    for (k, chunk) in mem[..data_end as usize].chunks_mut(8).enumerate() {
        if k % 2 == 0 {
            rng.fill(chunk);
        } else {
            let v: f64 = rng.gen_range(-2.0..2.0);
            let bytes = if k % 4 == 1 {
                v.to_le_bytes()
            } else {
                let f = (v as f32).to_bits() as u64 | ((rng.gen_range(-2.0f32..2.0).to_bits() as u64) << 32);
                f.to_le_bytes()
            };
            chunk.copy_from_slice(&bytes[..chunk.len()]);
        }
    }
    for t in 0..4 {
        let eb = 1usize << t;
        let cap = if eb == 1 { 256 } else { IDX_SPAN };
        let start = tables as usize + t * table_bytes;
        for e in 0..table_bytes / eb {
            let v = rng.gen_range(0..cap);
            mem[start + e * eb..start + (e + 1) * eb].copy_from_slice(&v.to_le_bytes()[..eb]);
        }
    }

    let mut g = Gen {
        rng,
        r: RefMachine::new(vlenb, mem.clone()),
        data_end,
        tables,
    };
    let body: Vec<&String> = catalog
        .iter()
        .filter(|m| !matches!(m.as_str(), "vsetvli" | "vsetvl"))
        .collect();
    let mut text = String::new();
    let mut mnemonics = BTreeSet::new();
    let mut count_done = 0;
    while count_done < count {
        let batch = if count_done == 0 || g.rng.gen_bool(0.08) {
            vec![g.vtype_change()]
        } else {
            let m = body[g.rng.gen_range(0..body.len())].clone();
            match g.build(&m) {
                Some(b) => b,
                None => continue,
            }
        };
        for i in batch {
            text.push_str(&i.render());
            g.r.step(&i);
            mnemonics.insert(i.mnem.clone());
            count_done += 1;
        }
    }
    Generated {
        text,
        init_mem: mem,
        reference: g.r,
        mnemonics,
        count: count_done,
    }
}
