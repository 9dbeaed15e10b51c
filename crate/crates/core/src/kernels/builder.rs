use std::collections::HashMap;

use crate::error::Result;
use crate::frontend::{Program, ScalarOp};
use crate::isa::{parse_trace_line, Memory, VInstr};

const CODE_BASE: u64 = 0x8000_0000;

/// Emits a program one instruction at a time. `site` names the static code
/// location so loop iterations share instruction-cache lines.
#[derive(Default)]
pub(crate) struct ProgramBuilder {
    pub program: Program,
    templates: HashMap<String, VInstr>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn pc(site: u32) -> u64 {
        CODE_BASE + 4 * site as u64
    }

    pub fn alu(&mut self, site: u32) {
        self.program.push_scalar(Self::pc(site), ScalarOp::Alu);
    }

    pub fn branch(&mut self, site: u32) {
        self.program.push_scalar(Self::pc(site), ScalarOp::Branch);
    }

    pub fn load(&mut self, site: u32, addr: u64) {
        self.program.push_scalar(Self::pc(site), ScalarOp::Load { addr });
    }

    /// Appends a vector instruction, filling its forwarded scalars in operand order.
    pub fn vector(&mut self, site: u32, text: &str, scalars: &[u64]) -> Result<()> {
        let mut v = match self.templates.get(text) {
            Some(v) => v.clone(),
            None => {
                let v = parse_trace_line(text)?;
                self.templates.insert(text.to_string(), v.clone());
                v
            }
        };
        for (slot, value) in v.scalar_ops.iter_mut().flatten().zip(scalars) {
            slot.value = *value;
        }
        self.program.push_vector(Self::pc(site), v);
        Ok(())
    }
}

/// Bump allocator for kernel data, 64-byte aligned.
#[derive(Default)]
pub(crate) struct Layout {
    next: u64,
}

impl Layout {
    pub fn alloc(&mut self, bytes: usize) -> u64 {
        let a = self.next;
        self.next = (self.next + bytes as u64).div_ceil(64) * 64;
        a
    }

    pub fn memory(&self) -> Memory {
        Memory::new(self.next.max(64) as usize)
    }
}
