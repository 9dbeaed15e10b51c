//! Fixtures shared by the simulator benchmarks.

use laneforge_core::kernels::{generate, GeneratedKernel, KernelSpec};
use laneforge_core::timing::{simulate, ArchState, CycleReport, MachineConfig};
use laneforge_core::frontend::FrontendConfig;

/// A generated kernel ready to be simulated repeatedly.
pub struct Case {
    pub machine: MachineConfig,
    pub frontend: FrontendConfig,
    pub kernel: GeneratedKernel,
}

impl Case {
    pub fn new(spec: KernelSpec, lanes: usize, frontend: FrontendConfig) -> Self {
        let machine = MachineConfig::new(lanes);
        let geom = machine.geometry().expect("valid lane count");
        let kernel = generate(&spec, &geom).expect("valid kernel");
        Case { machine, frontend, kernel }
    }

    /// Simulates from a fresh copy of the initial memory.
    pub fn run(&self) -> CycleReport {
        let geom = self.machine.geometry().unwrap();
        let mut state = ArchState::new(&geom, self.kernel.memory.clone());
        simulate(&self.kernel.program, &self.machine, &self.frontend, &mut state).expect("simulation")
    }
}
