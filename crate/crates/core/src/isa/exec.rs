use serde::{Deserialize, Serialize};

use super::instr::{Addressing, Opcode, OperandForm, ScalarReg, VInstr};
use super::memory::Memory;
use super::types::{decode_vtype, vsetvl, Ew, Geometry, VType};
use crate::error::{Error, Result};

/// Architectural vector register file: register bytes in memory-image order
/// plus the element width each register was last written with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VrfState {
    pub vlenb: usize,
    pub bytes: Vec<u8>,
    pub eew_tag: [Ew; 32],
}

impl VrfState {
    pub fn new(geom: &Geometry) -> Self {
        VrfState {
            vlenb: geom.vlenb(),
            bytes: vec![0; 32 * geom.vlenb()],
            eew_tag: [Ew::E64; 32],
        }
    }

    pub fn reg(&self, r: u8) -> &[u8] {
        let s = r as usize * self.vlenb;
        &self.bytes[s..s + self.vlenb]
    }

    pub fn reg_mut(&mut self, r: u8) -> &mut [u8] {
        let s = r as usize * self.vlenb;
        &mut self.bytes[s..s + self.vlenb]
    }

    fn offset(&self, reg: u8, idx: usize, ew: Ew) -> Result<usize> {
        let off = reg as usize * self.vlenb + idx * ew.bytes();
        if off + ew.bytes() > self.bytes.len() {
            return Err(Error::Bounds(format!("element {idx} of v{reg} at {ew}")));
        }
        Ok(off)
    }

    /// Element `idx` of the register group starting at `reg`.
    pub fn get(&self, reg: u8, idx: usize, ew: Ew) -> Result<u64> {
        let off = self.offset(reg, idx, ew)?;
        let mut buf = [0u8; 8];
        buf[..ew.bytes()].copy_from_slice(&self.bytes[off..off + ew.bytes()]);
        Ok(u64::from_le_bytes(buf))
    }

    pub fn set(&mut self, reg: u8, idx: usize, ew: Ew, value: u64) -> Result<()> {
        let off = self.offset(reg, idx, ew)?;
        self.bytes[off..off + ew.bytes()].copy_from_slice(&value.to_le_bytes()[..ew.bytes()]);
        Ok(())
    }

    pub fn mask_bit(&self, reg: u8, idx: usize) -> bool {
        let b = self.reg(reg)[idx / 8];
        (b >> (idx % 8)) & 1 == 1
    }

    pub fn set_mask_bit(&mut self, reg: u8, idx: usize, v: bool) {
        let byte = &mut self.reg_mut(reg)[idx / 8];
        if v {
            *byte |= 1 << (idx % 8);
        } else {
            *byte &= !(1 << (idx % 8));
        }
    }
}

/// One memory access made by a vector memory instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemAccess {
    pub addr: u64,
    pub len: usize,
    pub write: bool,
    /// Element index within the instruction.
    pub elem: usize,
}

/// Side results of executing one instruction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExecOutcome {
    /// Value returned to a scalar register.
    pub scalar: Option<(ScalarReg, u64)>,
    /// Element accesses in element order (active elements only).
    pub accesses: Vec<MemAccess>,
    /// Active (unmasked) elements processed.
    pub active: usize,
}

/// Register-group size for an operand of width `eew` under `vtype`.
pub fn emul(vtype: &VType, eew: Ew) -> Result<u8> {
    let num = vtype.lmul as usize * eew.bits() as usize;
    let den = vtype.sew.bits() as usize;
    let regs = num.div_ceil(den).max(1);
    if regs > 8 {
        return Err(Error::Config(format!(
            "EMUL {regs} exceeds 8 for {eew} under {}/m{}",
            vtype.sew, vtype.lmul
        )));
    }
    Ok(regs as u8)
}

fn check_group(instr: &VInstr, reg: u8, regs: u8, what: &str) -> Result<()> {
    if !reg.is_multiple_of(regs) || reg as usize + regs as usize > 32 {
        return Err(Error::illegal(
            &instr.mnemonic,
            format!("{what} v{reg} is not aligned to a group of {regs}"),
        ));
    }
    Ok(())
}

fn overlaps(a: u8, na: u8, b: u8, nb: u8) -> bool {
    a < b + nb && b < a + na
}

fn is_fp(op: Opcode) -> bool {
    matches!(
        op,
        Opcode::FAdd
            | Opcode::FMul
            | Opcode::FMacc
            | Opcode::FDiv
            | Opcode::FRedUSum
            | Opcode::FSlide1Down
            | Opcode::FMvVF
            | Opcode::FMvFS
            | Opcode::FMvSF
    )
}

fn fp_binop(op: Opcode, ew: Ew, a: u64, b: u64, acc: u64) -> u64 {
    match ew {
        Ew::E64 => {
            let (a, b, c) = (f64::from_bits(a), f64::from_bits(b), f64::from_bits(acc));
            let r = match op {
                Opcode::FAdd | Opcode::FRedUSum => a + b,
                Opcode::FMul => a * b,
                Opcode::FDiv => a / b,
                Opcode::FMacc => a.mul_add(b, c),
                _ => unreachable!(),
            };
            r.to_bits()
        }
        _ => {
            let f = |v: u64| f32::from_bits(v as u32);
            let (a, b, c) = (f(a), f(b), f(acc));
            let r = match op {
                Opcode::FAdd | Opcode::FRedUSum => a + b,
                Opcode::FMul => a * b,
                Opcode::FDiv => a / b,
                Opcode::FMacc => a.mul_add(b, c),
                _ => unreachable!(),
            };
            r.to_bits() as u64
        }
    }
}

fn int_binop(op: Opcode, ew: Ew, a: u64, b: u64) -> u64 {
    let sh = (b & (ew.bits() as u64 - 1)) as u32;
    let r = match op {
        Opcode::Add | Opcode::RedSum => a.wrapping_add(b),
        Opcode::Sub => a.wrapping_sub(b),
        Opcode::And => a & b,
        Opcode::Or => a | b,
        Opcode::Xor => a ^ b,
        Opcode::Sll => a << sh,
        Opcode::Srl => (a & ew.mask()) >> sh,
        Opcode::Mul => a.wrapping_mul(b),
        _ => unreachable!(),
    };
    r & ew.mask()
}

/// Executes one instruction against architectural state.
///
/// Element indices at or beyond `vl` and masked-off elements are left
/// untouched. Updates `vtype` for `vsetvl`/`vsetvli`.
pub fn exec_functional(
    instr: &VInstr,
    vrf: &mut VrfState,
    mem: &mut Memory,
    vtype: &mut VType,
    geom: &Geometry,
) -> Result<ExecOutcome> {
    if instr.op == Opcode::SetVl {
        return exec_vsetvl(instr, vtype, geom);
    }
    let vt = *vtype;
    let sew = vt.sew;
    if is_fp(instr.op) && !matches!(sew, Ew::E32 | Ew::E64) {
        return Err(Error::illegal(&instr.mnemonic, format!("floating point at {sew}")));
    }
    if instr.masked
        && instr.vd == 0
        && instr.writes_vreg()
        && !instr.writes_mask()
        && !matches!(instr.op, Opcode::RedSum | Opcode::FRedUSum)
    {
        return Err(Error::illegal(&instr.mnemonic, "masked destination overlaps v0"));
    }
    let vl = vt.vl;
    let active = |vrf: &VrfState, i: usize| !instr.masked || vrf.mask_bit(0, i);
    let mut out = ExecOutcome::default();
    let scalar = instr.scalar(0);
    let lmul = vt.lmul;

    match instr.op {
        Opcode::Add
        | Opcode::Sub
        | Opcode::And
        | Opcode::Or
        | Opcode::Xor
        | Opcode::Sll
        | Opcode::Srl
        | Opcode::Mul
        | Opcode::FAdd
        | Opcode::FMul
        | Opcode::FDiv
        | Opcode::FMacc => {
            check_group(instr, instr.vd, lmul, "vd")?;
            check_group(instr, instr.vs2, lmul, "vs2")?;
            if instr.form == OperandForm::VV {
                check_group(instr, instr.vs1, lmul, "vs1")?;
            }
            let other = |vrf: &VrfState, i: usize| -> Result<u64> {
                Ok(match instr.form {
                    OperandForm::VV => vrf.get(instr.vs1, i, sew)?,
                    OperandForm::VI => instr.imm as u64 & sew.mask(),
                    _ => scalar & sew.mask(),
                })
            };
            for i in 0..vl {
                if !active(vrf, i) {
                    continue;
                }
                out.active += 1;
                let b = other(vrf, i)?;
                let a = vrf.get(instr.vs2, i, sew)?;
                let r = match instr.op {
                    // vd = (vs1|f) * vs2 + vd
                    Opcode::FMacc => fp_binop(Opcode::FMacc, sew, b, a, vrf.get(instr.vd, i, sew)?),
                    op if is_fp(op) => fp_binop(op, sew, a, b, 0),
                    op => int_binop(op, sew, a, b),
                };
                vrf.set(instr.vd, i, sew, r)?;
            }
            tag_group(vrf, instr.vd, lmul, sew);
        }
        Opcode::MsEq | Opcode::MsLt => {
            check_group(instr, instr.vs2, lmul, "vs2")?;
            if instr.form == OperandForm::VV {
                check_group(instr, instr.vs1, lmul, "vs1")?;
            }
            for i in 0..vl {
                if !active(vrf, i) {
                    continue;
                }
                out.active += 1;
                let a = vrf.get(instr.vs2, i, sew)?;
                let b = match instr.form {
                    OperandForm::VV => vrf.get(instr.vs1, i, sew)?,
                    OperandForm::VI => instr.imm as u64 & sew.mask(),
                    _ => scalar & sew.mask(),
                };
                let r = match instr.op {
                    Opcode::MsEq => a == b,
                    _ => sew.sext(a) < sew.sext(b),
                };
                vrf.set_mask_bit(instr.vd, i, r);
            }
        }
        Opcode::MAnd | Opcode::MOr => {
            for i in 0..vl {
                let a = vrf.mask_bit(instr.vs2, i);
                let b = vrf.mask_bit(instr.vs1, i);
                let r = if instr.op == Opcode::MAnd { a & b } else { a | b };
                vrf.set_mask_bit(instr.vd, i, r);
            }
            out.active = vl;
        }
        Opcode::CPop | Opcode::First => {
            let mut count = 0u64;
            let mut first = None;
            for i in 0..vl {
                if active(vrf, i) && vrf.mask_bit(instr.vs2, i) {
                    count += 1;
                    first.get_or_insert(i as u64);
                }
            }
            out.active = vl;
            let v = match instr.op {
                Opcode::CPop => count,
                _ => first.unwrap_or(u64::MAX),
            };
            out.scalar = instr.rd.map(|r| (r, v));
        }
        Opcode::RedSum | Opcode::FRedUSum => {
            check_group(instr, instr.vs2, lmul, "vs2")?;
            if vl > 0 {
                let mut acc = vrf.get(instr.vs1, 0, sew)?;
                for i in 0..vl {
                    if !active(vrf, i) {
                        continue;
                    }
                    out.active += 1;
                    let x = vrf.get(instr.vs2, i, sew)?;
                    acc = if instr.op == Opcode::RedSum {
                        int_binop(Opcode::RedSum, sew, acc, x)
                    } else {
                        fp_binop(Opcode::FRedUSum, sew, acc, x, 0)
                    };
                }
                vrf.set(instr.vd, 0, sew, acc)?;
                vrf.eew_tag[instr.vd as usize] = sew;
            }
        }
        Opcode::SlideUp | Opcode::SlideDown | Opcode::Slide1Up | Opcode::Slide1Down
        | Opcode::FSlide1Down => {
            check_group(instr, instr.vd, lmul, "vd")?;
            check_group(instr, instr.vs2, lmul, "vs2")?;
            if matches!(instr.op, Opcode::SlideUp | Opcode::Slide1Up)
                && overlaps(instr.vd, lmul, instr.vs2, lmul)
            {
                return Err(Error::illegal(&instr.mnemonic, "destination overlaps source"));
            }
            let amount = match instr.form {
                OperandForm::VI => instr.imm as u64,
                _ => scalar,
            };
            // Read all sources first so the down-slides tolerate vd == vs2.
            let src: Vec<u64> = (0..vt.vlmax)
                .map(|i| vrf.get(instr.vs2, i, sew))
                .collect::<Result<_>>()?;
            for i in 0..vl {
                if !active(vrf, i) {
                    continue;
                }
                let v = match instr.op {
                    Opcode::SlideUp => {
                        if (i as u64) < amount {
                            continue;
                        }
                        src[i - amount as usize]
                    }
                    Opcode::SlideDown => match (i as u64).checked_add(amount) {
                        Some(s) if s < vt.vlmax as u64 => src[s as usize],
                        _ => 0,
                    },
                    Opcode::Slide1Up => {
                        if i == 0 {
                            scalar & sew.mask()
                        } else {
                            src[i - 1]
                        }
                    }
                    _ => {
                        if i + 1 == vl {
                            scalar & sew.mask()
                        } else {
                            src[i + 1]
                        }
                    }
                };
                out.active += 1;
                vrf.set(instr.vd, i, sew, v)?;
            }
            tag_group(vrf, instr.vd, lmul, sew);
        }
        Opcode::Merge => {
            check_group(instr, instr.vd, lmul, "vd")?;
            check_group(instr, instr.vs2, lmul, "vs2")?;
            if instr.form == OperandForm::VV {
                check_group(instr, instr.vs1, lmul, "vs1")?;
            }
            for i in 0..vl {
                let v = if vrf.mask_bit(0, i) {
                    match instr.form {
                        OperandForm::VV => vrf.get(instr.vs1, i, sew)?,
                        OperandForm::VI => instr.imm as u64 & sew.mask(),
                        _ => scalar & sew.mask(),
                    }
                } else {
                    vrf.get(instr.vs2, i, sew)?
                };
                vrf.set(instr.vd, i, sew, v)?;
            }
            out.active = vl;
            tag_group(vrf, instr.vd, lmul, sew);
        }
        Opcode::Mv | Opcode::FMvVF => {
            check_group(instr, instr.vd, lmul, "vd")?;
            if instr.form == OperandForm::VV {
                check_group(instr, instr.vs1, lmul, "vs1")?;
            }
            for i in 0..vl {
                let v = match instr.form {
                    OperandForm::VV => vrf.get(instr.vs1, i, sew)?,
                    OperandForm::VI => instr.imm as u64 & sew.mask(),
                    _ => scalar & sew.mask(),
                };
                vrf.set(instr.vd, i, sew, v)?;
            }
            out.active = vl;
            tag_group(vrf, instr.vd, lmul, sew);
        }
        Opcode::MvXS => {
            let v = sew.sext(vrf.get(instr.vs2, 0, sew)?) as u64;
            out.scalar = instr.rd.map(|r| (r, v));
            out.active = 1;
        }
        Opcode::FMvFS => {
            let raw = vrf.get(instr.vs2, 0, sew)?;
            let v = if sew == Ew::E32 { 0xffff_ffff_0000_0000 | raw } else { raw };
            out.scalar = instr.rd.map(|r| (r, v));
            out.active = 1;
        }
        Opcode::MvSX | Opcode::FMvSF => {
            if vl > 0 {
                vrf.set(instr.vd, 0, sew, scalar & sew.mask())?;
                vrf.eew_tag[instr.vd as usize] = sew;
                out.active = 1;
            }
        }
        Opcode::MvWhole => {
            let src = vrf.reg(instr.vs2).to_vec();
            vrf.reg_mut(instr.vd).copy_from_slice(&src);
            vrf.eew_tag[instr.vd as usize] = vrf.eew_tag[instr.vs2 as usize];
            out.active = vrf.vlenb / sew.bytes();
        }
        Opcode::Reshuffle => {
            // The memory image is layout-independent; only the encoding changes.
            vrf.eew_tag[instr.vd as usize] = instr.eew_vd_at(sew);
        }
        Opcode::Load | Opcode::Store => return exec_memory(instr, vrf, mem, &vt),
        Opcode::SetVl => unreachable!(),
    }
    Ok(out)
}

fn tag_group(vrf: &mut VrfState, vd: u8, regs: u8, ew: Ew) {
    for r in vd..vd + regs {
        vrf.eew_tag[r as usize] = ew;
    }
}

fn exec_vsetvl(instr: &VInstr, vtype: &mut VType, geom: &Geometry) -> Result<ExecOutcome> {
    let (sew, lmul) = match instr.vtype_imm {
        Some(v) => v,
        None => decode_vtype(instr.scalar(1))?,
    };
    let rs1 = instr.scalar_ops[0].map(|s| s.reg).unwrap_or(ScalarReg::X(0));
    let rd = instr.rd.unwrap_or(ScalarReg::X(0));
    let avl = if !rs1.is_zero() {
        usize::try_from(instr.scalar(0)).unwrap_or(usize::MAX)
    } else if !rd.is_zero() {
        usize::MAX
    } else {
        vtype.vl
    };
    *vtype = vsetvl(avl, sew, lmul, geom)?;
    Ok(ExecOutcome {
        scalar: Some((rd, vtype.vl as u64)),
        ..Default::default()
    })
}

fn exec_memory(
    instr: &VInstr,
    vrf: &mut VrfState,
    mem: &mut Memory,
    vt: &VType,
) -> Result<ExecOutcome> {
    let sew = vt.sew;
    let data_ew = instr.eew_vd_at(sew);
    let data_regs = emul(vt, data_ew).map_err(|e| Error::illegal(&instr.mnemonic, e.to_string()))?;
    check_group(instr, instr.vd, data_regs, "data register")?;
    let idx_ew = instr.eew_vs2_at(sew);
    if instr.addressing == Addressing::Indexed {
        let regs = emul(vt, idx_ew).map_err(|e| Error::illegal(&instr.mnemonic, e.to_string()))?;
        check_group(instr, instr.vs2, regs, "index register")?;
    }
    let base = instr.scalar(0);
    let stride = instr.scalar(1);
    let write = instr.op == Opcode::Store;
    let mut accesses = Vec::new();
    for i in 0..vt.vl {
        if instr.masked && !vrf.mask_bit(0, i) {
            continue;
        }
        let addr = match instr.addressing {
            Addressing::Unit => base.wrapping_add((i * data_ew.bytes()) as u64),
            Addressing::Strided => base.wrapping_add((i as u64).wrapping_mul(stride)),
            _ => base.wrapping_add(vrf.get(instr.vs2, i, idx_ew)?),
        };
        mem.check(addr, data_ew.bytes())?;
        accesses.push((i, MemAccess { addr, len: data_ew.bytes(), write, elem: i }));
    }
    for &(i, a) in &accesses {
        if write {
            let v = vrf.get(instr.vd, i, data_ew)?;
            mem.write_uint(a.addr, a.len, v)?;
        } else {
            let v = mem.read_uint(a.addr, a.len)?;
            vrf.set(instr.vd, i, data_ew, v)?;
        }
    }
    if !write {
        tag_group(vrf, instr.vd, data_regs, data_ew);
    }
    Ok(ExecOutcome {
        scalar: None,
        active: accesses.len(),
        accesses: accesses.into_iter().map(|(_, a)| a).collect(),
    })
}
