//! Stand-alone interpreter for the vector subset, written against the ISA
//! semantics directly. It shares no code with the library model.

/// One instruction in structured form. `render` produces the assembly text.
#[derive(Clone, Debug, Default)]
pub struct RInst {
    pub mnem: String,
    pub vd: u8,
    pub vs1: u8,
    pub vs2: u8,
    /// rs1/fs1 value, base address, or AVL.
    pub x: u64,
    /// Stride, or the vtype value of `vsetvl`.
    pub y: u64,
    pub imm: i64,
    pub masked: bool,
    /// `vsetvli`/`vsetvl` register conventions.
    pub rd_zero: bool,
    pub rs1_zero: bool,
    pub sew: u32,
    pub lmul: u8,
}

impl RInst {
    pub fn new(mnem: &str) -> Self {
        RInst {
            mnem: mnem.to_string(),
            ..Default::default()
        }
    }

    /// Trace text, preceded by the scalar directives the line needs.
    pub fn render(&self) -> String {
        let m = self.mnem.as_str();
        let mask = if self.masked { ", v0.t" } else { "" };
        let mut pre = String::new();
        let mut dir = |reg: &str, v: u64| pre.push_str(&format!("@scalar {reg}={v:x}\n"));
        let body = match m {
            "vsetvli" => {
                let rd = if self.rd_zero { "zero" } else { "t0" };
                let rs1 = if self.rs1_zero {
                    "zero"
                } else {
                    dir("a0", self.x);
                    "a0"
                };
                format!("vsetvli {rd}, {rs1}, e{}, m{}, ta, mu", self.sew, self.lmul)
            }
            "vsetvl" => {
                let rs1 = if self.rs1_zero {
                    "zero"
                } else {
                    dir("a0", self.x);
                    "a0"
                };
                dir("a1", self.y);
                format!("vsetvl t0, {rs1}, a1")
            }
            "vmv1r.v" => format!("vmv1r.v v{}, v{}", self.vd, self.vs2),
            "vmand.mm" | "vmor.mm" => format!("{m} v{}, v{}, v{}", self.vd, self.vs2, self.vs1),
            "vcpop.m" | "vfirst.m" => format!("{m} t1, v{}{mask}", self.vs2),
            "vmv.x.s" => format!("vmv.x.s t1, v{}", self.vs2),
            "vfmv.f.s" => format!("vfmv.f.s ft1, v{}", self.vs2),
            "vmv.s.x" | "vmv.v.x" => {
                dir("a2", self.x);
                format!("{m} v{}, a2", self.vd)
            }
            "vfmv.s.f" | "vfmv.v.f" => {
                dir("fa0", self.x);
                format!("{m} v{}, fa0", self.vd)
            }
            "vmv.v.v" => format!("vmv.v.v v{}, v{}", self.vd, self.vs1),
            "vmv.v.i" => format!("vmv.v.i v{}, {}", self.vd, self.imm),
            "vmerge.vvm" => format!("vmerge.vvm v{}, v{}, v{}, v0", self.vd, self.vs2, self.vs1),
            "vmerge.vxm" => {
                dir("a2", self.x);
                format!("vmerge.vxm v{}, v{}, a2, v0", self.vd, self.vs2)
            }
            "vmerge.vim" => format!("vmerge.vim v{}, v{}, {}, v0", self.vd, self.vs2, self.imm),
            "vredsum.vs" | "vfredusum.vs" => {
                format!("{m} v{}, v{}, v{}{mask}", self.vd, self.vs2, self.vs1)
            }
            _ if mem_kind(m).is_some() => {
                let (_, addressing, _) = mem_kind(m).unwrap();
                dir("a0", self.x);
                match addressing {
                    Addr::Unit => format!("{m} v{}, (a0){mask}", self.vd),
                    Addr::Strided => {
                        dir("a1", self.y);
                        format!("{m} v{}, (a0), a1{mask}", self.vd)
                    }
                    Addr::Indexed => format!("{m} v{}, (a0), v{}{mask}", self.vd, self.vs2),
                }
            }
            _ => {
                let (base, suffix) = m.split_once('.').unwrap();
                let src = match suffix {
                    "vv" => format!("v{}", self.vs1),
                    "vx" => {
                        dir("a2", self.x);
                        "a2".to_string()
                    }
                    "vf" => {
                        dir("fa0", self.x);
                        "fa0".to_string()
                    }
                    _ => self.imm.to_string(),
                };
                if base == "vfmacc" {
                    format!("{m} v{}, {src}, v{}{mask}", self.vd, self.vs2)
                } else {
                    format!("{m} v{}, v{}, {src}{mask}", self.vd, self.vs2)
                }
            }
        };
        pre + &body + "\n"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Addr {
    Unit,
    Strided,
    Indexed,
}

/// (is_load, addressing, encoded width) for memory mnemonics.
pub fn mem_kind(m: &str) -> Option<(bool, Addr, u32)> {
    const P: [(&str, bool, Addr); 8] = [
        ("vluxei", true, Addr::Indexed),
        ("vloxei", true, Addr::Indexed),
        ("vsuxei", false, Addr::Indexed),
        ("vsoxei", false, Addr::Indexed),
        ("vlse", true, Addr::Strided),
        ("vsse", false, Addr::Strided),
        ("vle", true, Addr::Unit),
        ("vse", false, Addr::Unit),
    ];
    let (p, load, a) = P.iter().find(|(p, _, _)| m.starts_with(p))?;
    let w = m[p.len()..].strip_suffix(".v")?.parse().ok()?;
    Some((*load, *a, w))
}

pub fn is_fp_mnemonic(m: &str) -> bool {
    m.starts_with("vf") && !m.starts_with("vfirst")
}

/// Register-group size of an operand of width `eew` (fractional groups take one register).
pub fn group_regs(sew: u32, lmul: u8, eew: u32) -> u32 {
    ((lmul as u32 * eew).div_ceil(sew)).max(1)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefMachine {
    pub vlenb: usize,
    pub vrf: Vec<u8>,
    pub mem: Vec<u8>,
    pub sew: u32,
    pub lmul: u8,
    pub vl: usize,
}

impl RefMachine {
    pub fn new(vlenb: usize, mem: Vec<u8>) -> Self {
        RefMachine {
            vlenb,
            vrf: vec![0; 32 * vlenb],
            mem,
            sew: 64,
            lmul: 1,
            vl: 0,
        }
    }

    pub fn vlmax_of(&self, sew: u32, lmul: u8) -> usize {
        self.vlenb * 8 * lmul as usize / sew as usize
    }

    pub fn vlmax(&self) -> usize {
        self.vlmax_of(self.sew, self.lmul)
    }

    pub fn elem(&self, reg: u8, i: usize, bits: u32) -> u64 {
        let eb = bits as usize / 8;
        let off = reg as usize * self.vlenb + i * eb;
        let mut v = 0u64;
        for k in (0..eb).rev() {
            v = (v << 8) | self.vrf[off + k] as u64;
        }
        v
    }

    fn set_elem(&mut self, reg: u8, i: usize, bits: u32, v: u64) {
        let eb = bits as usize / 8;
        let off = reg as usize * self.vlenb + i * eb;
        for k in 0..eb {
            self.vrf[off + k] = (v >> (8 * k)) as u8;
        }
    }

    pub fn bit(&self, reg: u8, i: usize) -> bool {
        self.vrf[reg as usize * self.vlenb + i / 8] >> (i % 8) & 1 == 1
    }

    fn set_bit(&mut self, reg: u8, i: usize, v: bool) {
        let b = &mut self.vrf[reg as usize * self.vlenb + i / 8];
        *b = (*b & !(1 << (i % 8))) | ((v as u8) << (i % 8));
    }

    pub fn active(&self, masked: bool, i: usize) -> bool {
        !masked || self.bit(0, i)
    }

    fn load_mem(&self, addr: u64, bits: u32) -> u64 {
        let a = addr as usize;
        let mut v = 0u64;
        for k in (0..bits as usize / 8).rev() {
            v = (v << 8) | self.mem[a + k] as u64;
        }
        v
    }

    fn store_mem(&mut self, addr: u64, bits: u32, v: u64) {
        for k in 0..bits as usize / 8 {
            self.mem[addr as usize + k] = (v >> (8 * k)) as u8;
        }
    }

    /// Element addresses of a memory instruction, active elements only.
    pub fn addresses(&self, i: &RInst) -> Vec<(usize, u64)> {
        let (_, addressing, w) = mem_kind(&i.mnem).unwrap();
        let data = if addressing == Addr::Indexed { self.sew } else { w };
        (0..self.vl)
            .filter(|&e| self.active(i.masked, e))
            .map(|e| {
                let a = match addressing {
                    Addr::Unit => i.x + (e as u64) * (data as u64 / 8),
                    Addr::Strided => i.x.wrapping_add((e as u64).wrapping_mul(i.y)),
                    Addr::Indexed => i.x.wrapping_add(self.elem(i.vs2, e, w)),
                };
                (e, a)
            })
            .collect()
    }

    pub fn step(&mut self, i: &RInst) {
        let m = i.mnem.as_str();
        let sew = self.sew;
        let mask = if sew == 64 { u64::MAX } else { (1u64 << sew) - 1 };
        let vl = self.vl;
        match m {
            "vsetvli" | "vsetvl" => {
                let (s, l) = if m == "vsetvli" {
                    (i.sew, i.lmul)
                } else {
                    (8 << ((i.y >> 3) & 7), 1 << (i.y & 7))
                };
                let vlmax = self.vlmax_of(s, l);
                let avl = if !i.rs1_zero {
                    i.x as usize
                } else if !i.rd_zero {
                    usize::MAX
                } else {
                    self.vl
                };
                self.sew = s;
                self.lmul = l;
                self.vl = avl.min(vlmax);
                return;
            }
            "vmv1r.v" => {
                let (d, s) = (i.vd as usize * self.vlenb, i.vs2 as usize * self.vlenb);
                let src = self.vrf[s..s + self.vlenb].to_vec();
                self.vrf[d..d + self.vlenb].copy_from_slice(&src);
                return;
            }
            "vcpop.m" | "vfirst.m" | "vmv.x.s" | "vfmv.f.s" => return,
            "vmand.mm" | "vmor.mm" => {
                for e in 0..vl {
                    let (a, b) = (self.bit(i.vs2, e), self.bit(i.vs1, e));
                    self.set_bit(i.vd, e, if m == "vmand.mm" { a && b } else { a || b });
                }
                return;
            }
            "vmv.s.x" | "vfmv.s.f" => {
                if vl > 0 {
                    self.set_elem(i.vd, 0, sew, i.x & mask);
                }
                return;
            }
            "vmv.v.v" | "vmv.v.x" | "vmv.v.i" | "vfmv.v.f" => {
                for e in 0..vl {
                    let v = match m {
                        "vmv.v.v" => self.elem(i.vs1, e, sew),
                        "vmv.v.i" => i.imm as u64 & mask,
                        _ => i.x & mask,
                    };
                    self.set_elem(i.vd, e, sew, v);
                }
                return;
            }
            "vmerge.vvm" | "vmerge.vxm" | "vmerge.vim" => {
                for e in 0..vl {
                    let v = if self.bit(0, e) {
                        match m {
                            "vmerge.vvm" => self.elem(i.vs1, e, sew),
                            "vmerge.vim" => i.imm as u64 & mask,
                            _ => i.x & mask,
                        }
                    } else {
                        self.elem(i.vs2, e, sew)
                    };
                    self.set_elem(i.vd, e, sew, v);
                }
                return;
            }
            "vredsum.vs" | "vfredusum.vs" => {
                if vl == 0 {
                    return;
                }
                let mut acc = self.elem(i.vs1, 0, sew);
                for e in 0..vl {
                    if self.active(i.masked, e) {
                        let x = self.elem(i.vs2, e, sew);
                        acc = if m == "vredsum.vs" {
                            acc.wrapping_add(x) & mask
                        } else {
                            fp_op("vfadd", sew, acc, x, 0)
                        };
                    }
                }
                self.set_elem(i.vd, 0, sew, acc);
                return;
            }
            _ => {}
        }
        if let Some((load, addressing, w)) = mem_kind(m) {
            let data = if addressing == Addr::Indexed { sew } else { w };
            for (e, a) in self.addresses(i) {
                if load {
                    let v = self.load_mem(a, data);
                    self.set_elem(i.vd, e, data, v);
                } else {
                    let v = self.elem(i.vd, e, data);
                    self.store_mem(a, data, v);
                }
            }
            return;
        }

        let (base, suffix) = m.split_once('.').unwrap();
        let operand = |me: &Self, e: usize| match suffix {
            "vv" => me.elem(i.vs1, e, sew),
            "vi" => i.imm as u64 & mask,
            _ => i.x & mask,
        };
        match base {
            "vslideup" | "vslidedown" | "vslide1up" | "vslide1down" | "vfslide1down" => {
                let vlmax = self.vlmax();
                let src: Vec<u64> = (0..vlmax).map(|e| self.elem(i.vs2, e, sew)).collect();
                let off = if suffix == "vi" { i.imm as u64 } else { i.x };
                for e in 0..vl {
                    if !self.active(i.masked, e) {
                        continue;
                    }
                    let v = match base {
                        "vslideup" if (e as u64) < off => continue,
                        "vslideup" => src[e - off as usize],
                        "vslidedown" => {
                            if off < vlmax as u64 && e + (off as usize) < vlmax {
                                src[e + off as usize]
                            } else {
                                0
                            }
                        }
                        "vslide1up" if e == 0 => i.x & mask,
                        "vslide1up" => src[e - 1],
                        _ if e + 1 == vl => i.x & mask,
                        _ => src[e + 1],
                    };
                    self.set_elem(i.vd, e, sew, v);
                }
            }
            "vmseq" | "vmslt" => {
                for e in 0..vl {
                    if !self.active(i.masked, e) {
                        continue;
                    }
                    let a = self.elem(i.vs2, e, sew);
                    let b = operand(self, e);
                    let r = if base == "vmseq" { a == b } else { sext(a, sew) < sext(b, sew) };
                    self.set_bit(i.vd, e, r);
                }
            }
            _ => {
                for e in 0..vl {
                    if !self.active(i.masked, e) {
                        continue;
                    }
                    let a = self.elem(i.vs2, e, sew);
                    let b = operand(self, e);
                    let r = if base.starts_with("vf") {
                        fp_op(base, sew, a, b, self.elem(i.vd, e, sew))
                    } else {
                        int_op(base, sew, a, b)
                    };
                    self.set_elem(i.vd, e, sew, r);
                }
            }
        }
    }
}

pub fn sext(v: u64, bits: u32) -> i64 {
    ((v << (64 - bits)) as i64) >> (64 - bits)
}

fn int_op(base: &str, bits: u32, a: u64, b: u64) -> u64 {
    let sh = (b % bits as u64) as u32;
    let r = match base {
        "vadd" => a.wrapping_add(b),
        "vsub" => a.wrapping_sub(b),
        "vand" => a & b,
        "vor" => a | b,
        "vxor" => a ^ b,
        "vsll" => a << sh,
        "vsrl" => a >> sh,
        "vmul" => a.wrapping_mul(b),
        _ => panic!("no integer op {base}"),
    };
    if bits == 64 {
        r
    } else {
        r & ((1u64 << bits) - 1)
    }
}

/// `a` is the vs2 element, `b` the other source, `d` the destination (for vfmacc).
pub fn fp_op(base: &str, bits: u32, a: u64, b: u64, d: u64) -> u64 {
    if bits == 64 {
        let (a, b, d) = (f64::from_bits(a), f64::from_bits(b), f64::from_bits(d));
        let r = match base {
            "vfadd" => a + b,
            "vfmul" => a * b,
            "vfdiv" => a / b,
            "vfmacc" => b.mul_add(a, d),
            _ => panic!("no fp op {base}"),
        };
        r.to_bits()
    } else {
        let (a, b, d) = (f32::from_bits(a as u32), f32::from_bits(b as u32), f32::from_bits(d as u32));
        let r = match base {
            "vfadd" => a + b,
            "vfmul" => a * b,
            "vfdiv" => a / b,
            "vfmacc" => b.mul_add(a, d),
            _ => panic!("no fp op {base}"),
        };
        r.to_bits() as u64
    }
}

pub fn is_nan(v: u64, bits: u32) -> bool {
    if bits == 64 {
        f64::from_bits(v).is_nan()
    } else {
        f32::from_bits(v as u32).is_nan()
    }
}
