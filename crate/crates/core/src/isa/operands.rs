use super::exec::emul;
use super::instr::{Addressing, Opcode, OperandForm, VInstr};
use super::types::{Ew, VType};
use crate::error::Result;

/// A vector register group read or written by an instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegGroup {
    pub reg: u8,
    pub regs: u8,
    pub eew: Ew,
    /// Accessed as a packed mask (bit granularity, layout independent).
    pub mask: bool,
}

impl RegGroup {
    fn vec(reg: u8, regs: u8, eew: Ew) -> Self {
        RegGroup {
            reg,
            regs,
            eew,
            mask: false,
        }
    }

    fn mask(reg: u8) -> Self {
        RegGroup {
            reg,
            regs: 1,
            eew: Ew::E8,
            mask: true,
        }
    }

    pub fn contains(&self, r: u8) -> bool {
        r >= self.reg && r < self.reg + self.regs
    }
}

/// Destination of an instruction together with how much of it is written.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dest {
    pub group: RegGroup,
    /// Elements written, counted from element 0.
    pub elems: usize,
    /// Some elements below `elems` may be skipped (masked execution).
    pub partial: bool,
    /// Whole-register move: the destination inherits the source encoding.
    pub whole: bool,
}

impl Dest {
    /// True when register `k` of the group (0-based) is overwritten entirely.
    pub fn covers(&self, k: u8, vlenb: usize) -> bool {
        if self.whole {
            return true;
        }
        !self.partial && !self.group.mask && self.elems * self.group.eew.bytes() >= (k as usize + 1) * vlenb
    }
}

/// Register operands of an instruction under a given vector type.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Operands {
    pub sources: Vec<RegGroup>,
    pub dest: Option<Dest>,
}

impl Operands {
    pub fn reads(&self, r: u8) -> bool {
        self.sources.iter().any(|g| g.contains(r))
    }

    pub fn writes(&self, r: u8) -> bool {
        self.dest.is_some_and(|d| d.group.contains(r))
    }
}

impl VInstr {
    /// Lists the register groups this instruction reads and writes.
    pub fn operands(&self, vt: &VType) -> Result<Operands> {
        let sew = vt.sew;
        let l = vt.lmul;
        let vl = vt.vl;
        let mut src = Vec::new();
        let mut dest = None;
        let vec_dest = |reg, regs, eew, elems| Dest {
            group: RegGroup::vec(reg, regs, eew),
            elems,
            partial: self.masked,
            whole: false,
        };
        match self.op {
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
                src.push(RegGroup::vec(self.vs2, l, sew));
                if self.form == OperandForm::VV {
                    src.push(RegGroup::vec(self.vs1, l, sew));
                }
                if self.op == Opcode::FMacc {
                    src.push(RegGroup::vec(self.vd, l, sew));
                }
                dest = Some(vec_dest(self.vd, l, sew, vl));
            }
            Opcode::MsEq | Opcode::MsLt => {
                src.push(RegGroup::vec(self.vs2, l, sew));
                if self.form == OperandForm::VV {
                    src.push(RegGroup::vec(self.vs1, l, sew));
                }
                dest = Some(Dest {
                    group: RegGroup::mask(self.vd),
                    elems: vl,
                    partial: true,
                    whole: false,
                });
            }
            Opcode::MAnd | Opcode::MOr => {
                src.push(RegGroup::mask(self.vs2));
                src.push(RegGroup::mask(self.vs1));
                dest = Some(Dest {
                    group: RegGroup::mask(self.vd),
                    elems: vl,
                    partial: true,
                    whole: false,
                });
            }
            Opcode::CPop | Opcode::First => src.push(RegGroup::mask(self.vs2)),
            Opcode::RedSum | Opcode::FRedUSum => {
                src.push(RegGroup::vec(self.vs2, l, sew));
                src.push(RegGroup::vec(self.vs1, 1, sew));
                if vl > 0 {
                    dest = Some(Dest {
                        group: RegGroup::vec(self.vd, 1, sew),
                        elems: 1,
                        partial: false,
                        whole: false,
                    });
                }
            }
            Opcode::SlideUp
            | Opcode::SlideDown
            | Opcode::Slide1Up
            | Opcode::Slide1Down
            | Opcode::FSlide1Down => {
                src.push(RegGroup::vec(self.vs2, l, sew));
                dest = Some(vec_dest(self.vd, l, sew, vl));
                // vslideup leaves the first `amount` elements untouched.
                if self.op == Opcode::SlideUp {
                    if let Some(d) = dest.as_mut() {
                        d.partial = d.partial || self.imm != 0 || self.scalar(0) != 0;
                    }
                }
            }
            Opcode::Merge => {
                src.push(RegGroup::vec(self.vs2, l, sew));
                if self.form == OperandForm::VV {
                    src.push(RegGroup::vec(self.vs1, l, sew));
                }
                dest = Some(Dest {
                    partial: false,
                    ..vec_dest(self.vd, l, sew, vl)
                });
            }
            Opcode::Mv | Opcode::FMvVF => {
                if self.form == OperandForm::VV {
                    src.push(RegGroup::vec(self.vs1, l, sew));
                }
                dest = Some(vec_dest(self.vd, l, sew, vl));
            }
            Opcode::MvXS | Opcode::FMvFS => src.push(RegGroup::vec(self.vs2, 1, sew)),
            Opcode::MvSX | Opcode::FMvSF => {
                if vl > 0 {
                    dest = Some(vec_dest(self.vd, 1, sew, 1));
                }
            }
            Opcode::MvWhole => {
                src.push(RegGroup::vec(self.vs2, 1, sew));
                dest = Some(Dest {
                    group: RegGroup::vec(self.vd, 1, sew),
                    elems: 0,
                    partial: false,
                    whole: true,
                });
            }
            Opcode::Reshuffle => {
                let from = self.eew_vs2_at(sew);
                let to = self.eew_vd_at(sew);
                src.push(RegGroup::vec(self.vs2, 1, from));
                dest = Some(Dest {
                    group: RegGroup::vec(self.vd, 1, to),
                    elems: 0,
                    partial: false,
                    whole: true,
                });
            }
            Opcode::Load | Opcode::Store => {
                let data_ew = self.eew_vd_at(sew);
                let data = RegGroup::vec(self.vd, emul(vt, data_ew)?, data_ew);
                if self.addressing == Addressing::Indexed {
                    let idx_ew = self.eew_vs2_at(sew);
                    src.push(RegGroup::vec(self.vs2, emul(vt, idx_ew)?, idx_ew));
                }
                if self.op == Opcode::Load {
                    dest = Some(Dest {
                        group: data,
                        elems: vl,
                        partial: self.masked,
                        whole: false,
                    });
                } else {
                    src.push(data);
                }
            }
            Opcode::SetVl => {}
        }
        if self.masked {
            src.push(RegGroup::mask(0));
        }
        Ok(Operands { sources: src, dest })
    }
}
