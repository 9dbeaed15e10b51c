//! Cycle-approximate timing of the vector unit.

mod banks;
mod config;
mod engine;
mod memory;
mod report;

pub use banks::{arbitrate_banks, effective_banks, Arbitration, BankArbiter};
pub use config::MachineConfig;
pub use engine::{simulate, simulate_trace, ArchState};
pub use memory::{beats_for, memory_transaction, BeatPattern, Direction, MemSchedule};
pub use report::{CacheReport, CycleReport, Stalls, Unit, UnitBusy};
