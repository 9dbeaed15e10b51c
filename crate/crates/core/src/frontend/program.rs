use serde::{Deserialize, Serialize};

use crate::isa::VInstr;

/// Scalar housekeeping operation, modeled by its issue class only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ScalarOp {
    Alu,
    Branch,
    Load { addr: u64 },
    Store { addr: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OpKind {
    Scalar(ScalarOp),
    Vector(Box<VInstr>),
}

/// One dynamic instruction of the host program. `pc` is the static address,
/// so loop iterations share instruction-cache lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProgOp {
    pub pc: u64,
    pub kind: OpKind,
}

/// Interleaved scalar and vector instruction stream.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Program {
    pub ops: Vec<ProgOp>,
}

impl Program {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_vector(instrs: impl IntoIterator<Item = VInstr>) -> Self {
        let mut p = Program::new();
        for (i, v) in instrs.into_iter().enumerate() {
            p.push_vector(4 * i as u64, v);
        }
        p
    }

    pub fn push_scalar(&mut self, pc: u64, op: ScalarOp) {
        self.ops.push(ProgOp {
            pc,
            kind: OpKind::Scalar(op),
        });
    }

    pub fn push_vector(&mut self, pc: u64, instr: VInstr) {
        self.ops.push(ProgOp {
            pc,
            kind: OpKind::Vector(Box::new(instr)),
        });
    }

    pub fn vector_instrs(&self) -> impl Iterator<Item = &VInstr> {
        self.ops.iter().filter_map(|op| match &op.kind {
            OpKind::Vector(v) => Some(v.as_ref()),
            OpKind::Scalar(_) => None,
        })
    }

    pub fn vector_count(&self) -> usize {
        self.vector_instrs().count()
    }

    /// Number of static instructions, counting each distinct pc once.
    pub fn static_count(&self) -> usize {
        let mut pcs: Vec<u64> = self.ops.iter().map(|o| o.pc).collect();
        pcs.sort_unstable();
        pcs.dedup();
        pcs.len()
    }
}
