use serde::{Deserialize, Serialize};
use std::fmt;

use super::types::{Ew, VType};

/// Base operation, independent of operand form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Opcode {
    Add,
    Sub,
    And,
    Or,
    Xor,
    Sll,
    Srl,
    Mul,
    FAdd,
    FMul,
    FMacc,
    FDiv,
    RedSum,
    FRedUSum,
    SlideUp,
    SlideDown,
    Slide1Up,
    Slide1Down,
    FSlide1Down,
    MsEq,
    MsLt,
    MAnd,
    MOr,
    CPop,
    First,
    Merge,
    /// `vmv.v.{v,x,i}`
    Mv,
    /// `vmv.x.s`
    MvXS,
    /// `vmv.s.x`
    MvSX,
    /// `vfmv.v.f`
    FMvVF,
    /// `vfmv.f.s`
    FMvFS,
    /// `vfmv.s.f`
    FMvSF,
    /// Whole-register move, aliased to a regular move over the full register.
    MvWhole,
    Load,
    Store,
    SetVl,
    /// Dispatcher-injected whole-register re-encoding (slide with null stride).
    Reshuffle,
}

/// Coarse instruction class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InstrKind {
    ArithInt,
    ArithFp,
    Fmacc,
    Load,
    Store,
    Slide,
    MaskOp,
    Reduction,
    Move,
    Vsetvl,
}

/// Where the second (non-vs2) source comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OperandForm {
    /// vector-vector
    VV,
    /// vector-integer scalar
    VX,
    /// vector-immediate
    VI,
    /// vector-fp scalar
    VF,
    /// no second source
    None,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Addressing {
    Unit,
    Strided,
    Indexed,
    None,
}

/// Scalar register name as written in a trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScalarReg {
    X(u8),
    F(u8),
}

impl ScalarReg {
    pub fn is_zero(self) -> bool {
        self == ScalarReg::X(0)
    }

    pub fn parse(name: &str) -> Option<ScalarReg> {
        const X_ABI: [&str; 32] = [
            "zero", "ra", "sp", "gp", "tp", "t0", "t1", "t2", "s0", "s1", "a0", "a1", "a2", "a3",
            "a4", "a5", "a6", "a7", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9", "s10", "s11",
            "t3", "t4", "t5", "t6",
        ];
        const F_ABI: [&str; 32] = [
            "ft0", "ft1", "ft2", "ft3", "ft4", "ft5", "ft6", "ft7", "fs0", "fs1", "fa0", "fa1",
            "fa2", "fa3", "fa4", "fa5", "fa6", "fa7", "fs2", "fs3", "fs4", "fs5", "fs6", "fs7",
            "fs8", "fs9", "fs10", "fs11", "ft8", "ft9", "ft10", "ft11",
        ];
        if name == "fp" {
            return Some(ScalarReg::X(8));
        }
        if let Some(i) = X_ABI.iter().position(|&n| n == name) {
            return Some(ScalarReg::X(i as u8));
        }
        if let Some(i) = F_ABI.iter().position(|&n| n == name) {
            return Some(ScalarReg::F(i as u8));
        }
        let (ctor, digits): (fn(u8) -> ScalarReg, &str) = if let Some(d) = name.strip_prefix('x')
        {
            (ScalarReg::X, d)
        } else {
            let d = name.strip_prefix('f')?;
            (ScalarReg::F, d)
        };
        match digits.parse::<u8>() {
            Ok(n) if n < 32 && !digits.starts_with('+') => Some(ctor(n)),
            _ => None,
        }
    }
}

impl fmt::Display for ScalarReg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarReg::X(n) => write!(f, "x{n}"),
            ScalarReg::F(n) => write!(f, "f{n}"),
        }
    }
}

/// A scalar value forwarded with a vector instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScalarOperand {
    pub reg: ScalarReg,
    pub value: u64,
}

/// How many elements an instruction operates on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VlSpec {
    /// Current `vl`.
    Current,
    /// The whole register, regardless of `vl` (whole-register moves).
    WholeRegister,
}

/// A decoded vector instruction.
///
/// Element widths left as `None` follow the current SEW; memory instructions
/// and index operands carry widths fixed by the encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VInstr {
    pub mnemonic: String,
    pub op: Opcode,
    pub kind: InstrKind,
    pub form: OperandForm,
    pub vd: u8,
    pub vs1: u8,
    pub vs2: u8,
    pub eew_vd: Option<Ew>,
    pub eew_vs1: Option<Ew>,
    pub eew_vs2: Option<Ew>,
    pub masked: bool,
    /// Forwarded scalars: base address / stride for memory ops, `rs1`/`fs1`
    /// for `.vx`/`.vf` forms, AVL and vtype for `vsetvl`.
    pub scalar_ops: [Option<ScalarOperand>; 2],
    pub imm: i64,
    pub addressing: Addressing,
    pub vl_spec: VlSpec,
    /// Scalar destination, for instructions returning a value to the host.
    pub rd: Option<ScalarReg>,
    /// Requested (sew, lmul) for `vsetvli`; `None` for `vsetvl` (taken from a register).
    pub vtype_imm: Option<(u32, u8)>,
    /// Reshuffle micro-ops only: the encoding being replaced.
    pub reshuffle_from: Option<Ew>,
}

impl VInstr {
    pub(crate) fn bare(mnemonic: &str, op: Opcode, kind: InstrKind) -> Self {
        VInstr {
            mnemonic: mnemonic.to_string(),
            op,
            kind,
            form: OperandForm::None,
            vd: 0,
            vs1: 0,
            vs2: 0,
            eew_vd: None,
            eew_vs1: None,
            eew_vs2: None,
            masked: false,
            scalar_ops: [None, None],
            imm: 0,
            addressing: Addressing::None,
            vl_spec: VlSpec::Current,
            rd: None,
            vtype_imm: None,
            reshuffle_from: None,
        }
    }

    /// Reshuffle micro-op re-encoding `reg` from `from` to `to`.
    pub fn reshuffle(reg: u8, from: Ew, to: Ew) -> Self {
        let mut i = VInstr::bare("vslide.reshuffle", Opcode::Reshuffle, InstrKind::Slide);
        i.vd = reg;
        i.vs2 = reg;
        i.eew_vd = Some(to);
        i.eew_vs2 = Some(from);
        i.reshuffle_from = Some(from);
        i.vl_spec = VlSpec::WholeRegister;
        i
    }

    pub fn scalar(&self, idx: usize) -> u64 {
        self.scalar_ops[idx].map(|s| s.value).unwrap_or(0)
    }

    pub fn eew_vd_at(&self, sew: Ew) -> Ew {
        self.eew_vd.unwrap_or(sew)
    }

    pub fn eew_vs1_at(&self, sew: Ew) -> Ew {
        self.eew_vs1.unwrap_or(sew)
    }

    pub fn eew_vs2_at(&self, sew: Ew) -> Ew {
        self.eew_vs2.unwrap_or(sew)
    }

    pub fn is_mem(&self) -> bool {
        matches!(self.op, Opcode::Load | Opcode::Store)
    }

    /// True for instructions whose destination is a mask register.
    pub fn writes_mask(&self) -> bool {
        matches!(self.op, Opcode::MsEq | Opcode::MsLt | Opcode::MAnd | Opcode::MOr)
    }

    /// True when the instruction returns a value to the scalar core.
    pub fn returns_scalar(&self) -> bool {
        self.rd.is_some()
    }

    pub fn writes_vreg(&self) -> bool {
        !matches!(
            self.op,
            Opcode::Store
                | Opcode::SetVl
                | Opcode::CPop
                | Opcode::First
                | Opcode::MvXS
                | Opcode::FMvFS
        )
    }

    /// Number of elements processed under `vtype`.
    pub fn active_len(&self, vtype: &VType, vlenb: usize) -> usize {
        match self.vl_spec {
            VlSpec::Current => vtype.vl,
            VlSpec::WholeRegister => vlenb / self.eew_vd_at(vtype.sew).bytes(),
        }
    }

    /// Arithmetic operations performed for `vl` active elements.
    pub fn op_count(&self, vl: usize) -> u64 {
        let vl = vl as u64;
        match self.op {
            Opcode::FMacc => 2 * vl,
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
            | Opcode::RedSum
            | Opcode::FRedUSum => vl,
            _ => 0,
        }
    }
}

impl fmt::Display for VInstr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} vd=v{} vs1=v{} vs2=v{}", self.mnemonic, self.vd, self.vs1, self.vs2)?;
        if self.masked {
            write!(f, " v0.t")?;
        }
        Ok(())
    }
}
