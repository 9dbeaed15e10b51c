use serde::{Deserialize, Serialize};

/// Outstanding memory operations tracked by the scalar core.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingCounters {
    pub vector_loads: u32,
    pub vector_stores: u32,
    pub scalar_stores: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MemOpKind {
    ScalarLoad,
    ScalarStore,
    VectorMem,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    Allow,
    Stall,
}

/// Decides whether a memory operation may issue given what is in flight.
pub fn ordering_gate(kind: MemOpKind, c: &OrderingCounters) -> Gate {
    let ok = match kind {
        MemOpKind::ScalarLoad => c.vector_stores == 0,
        MemOpKind::ScalarStore => c.vector_loads == 0 && c.vector_stores == 0,
        MemOpKind::VectorMem => c.scalar_stores == 0,
    };
    if ok {
        Gate::Allow
    } else {
        Gate::Stall
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_rules() {
        let c = OrderingCounters {
            vector_stores: 1,
            ..Default::default()
        };
        assert_eq!(ordering_gate(MemOpKind::ScalarLoad, &c), Gate::Stall);
        assert_eq!(ordering_gate(MemOpKind::ScalarStore, &OrderingCounters::default()), Gate::Allow);
        let c = OrderingCounters {
            scalar_stores: 2,
            ..Default::default()
        };
        assert_eq!(ordering_gate(MemOpKind::VectorMem, &c), Gate::Stall);
        assert_eq!(ordering_gate(MemOpKind::ScalarLoad, &c), Gate::Allow);
        let c = OrderingCounters {
            vector_loads: 1,
            ..Default::default()
        };
        assert_eq!(ordering_gate(MemOpKind::ScalarStore, &c), Gate::Stall);
        assert_eq!(ordering_gate(MemOpKind::ScalarLoad, &c), Gate::Allow);
    }
}
