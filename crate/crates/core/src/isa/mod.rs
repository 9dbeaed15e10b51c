//! RVV 1.0 subset: decoded instructions, trace parsing and functional semantics.

pub mod exec;
pub mod instr;
pub mod memory;
pub mod operands;
pub mod parse;
pub mod types;

pub use exec::{emul, exec_functional, ExecOutcome, MemAccess, VrfState};
pub use instr::{
    Addressing, InstrKind, Opcode, OperandForm, ScalarOperand, ScalarReg, VInstr, VlSpec,
};
pub use memory::Memory;
pub use operands::{Dest, Operands, RegGroup};
pub use parse::{is_supported, parse_line, parse_trace_line, supported_set, ScalarFile, Trace};
pub use types::{check_lmul, decode_vtype, vsetvl, Ew, Geometry, VType};
