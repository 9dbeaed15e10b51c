//! Functional and cycle-approximate model of a lane-based RISC-V vector unit.

pub mod energy;
pub mod error;
pub mod frontend;
pub mod isa;
pub mod kernels;
pub mod multicore;
pub mod reduction;
pub mod sldu;
pub mod sweep;
pub mod timing;
pub mod vrf;

pub use error::{Error, Result};
pub use isa::{Ew, Geometry, Memory, VInstr, VType, VrfState};
