use serde::{Deserialize, Serialize};
use std::fmt;

/// Functional units of the vector processor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Unit {
    Valu,
    Vmfpu,
    Vldu,
    Vstu,
    Sldu,
    Masku,
}

impl Unit {
    pub const ALL: [Unit; 6] = [Unit::Valu, Unit::Vmfpu, Unit::Vldu, Unit::Vstu, Unit::Sldu, Unit::Masku];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Unit::Valu => "valu",
            Unit::Vmfpu => "vmfpu",
            Unit::Vldu => "vldu",
            Unit::Vstu => "vstu",
            Unit::Sldu => "sldu",
            Unit::Masku => "masku",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stalls {
    /// Operand or write-back requests that lost bank arbitration.
    pub bank: u64,
    /// Cycles the frontend held a vector instruction the unit could not take.
    pub issue: u64,
    /// Cycles a memory unit waited for data or bus slots.
    pub memory: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnitBusy {
    pub valu: u64,
    pub vmfpu: u64,
    pub vldu: u64,
    pub vstu: u64,
    pub sldu: u64,
    pub masku: u64,
}

impl UnitBusy {
    pub fn get(&self, u: Unit) -> u64 {
        match u {
            Unit::Valu => self.valu,
            Unit::Vmfpu => self.vmfpu,
            Unit::Vldu => self.vldu,
            Unit::Vstu => self.vstu,
            Unit::Sldu => self.sldu,
            Unit::Masku => self.masku,
        }
    }

    pub fn add(&mut self, u: Unit, n: u64) {
        let slot = match u {
            Unit::Valu => &mut self.valu,
            Unit::Vmfpu => &mut self.vmfpu,
            Unit::Vldu => &mut self.vldu,
            Unit::Vstu => &mut self.vstu,
            Unit::Sldu => &mut self.sldu,
            Unit::Masku => &mut self.masku,
        };
        *slot += n;
    }

    pub fn max(&self) -> u64 {
        Unit::ALL.iter().map(|&u| self.get(u)).max().unwrap_or(0)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheReport {
    pub i_miss: u64,
    pub d_miss: u64,
    pub invalidated_lines: u64,
}

/// Outcome of one timing run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    /// From the first vector dispatch to the last vector retirement.
    pub cycles: u64,
    pub flops: u64,
    pub flop_per_cycle: f64,
    pub ideality: f64,
    pub stalls: Stalls,
    pub unit_busy: UnitBusy,
    pub cache: CacheReport,
    pub vector_instructions: u64,
    pub reshuffles: u64,
}

impl CycleReport {
    /// Recomputes ideality against a peak of `max_perf` operations per cycle.
    pub fn with_max_perf(mut self, max_perf: f64) -> Self {
        self.ideality = ideality_of(self.cycles, self.flop_per_cycle, max_perf);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable")
    }
}

pub(crate) fn ideality_of(cycles: u64, flop_per_cycle: f64, max_perf: f64) -> f64 {
    if cycles == 0 || max_perf <= 0.0 {
        return 1.0;
    }
    (flop_per_cycle / max_perf).clamp(0.0, 1.0)
}
