//! Clusters of scalar-core plus vector-unit pairs, each with a private
//! memory bank, synchronized by barriers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::energy::{real_throughput, Calibration};
use crate::error::{Error, Result};
use crate::frontend::{FrontendConfig, FrontendMode};
use crate::kernels::{run_kernel, Kernel, KernelSpec};
use crate::timing::{CycleReport, MachineConfig};

/// Cycles per synchronization, fitted so an 8-core 2-lane cluster on a
/// 32x32x32 matmul matches its measured aggregate throughput.
pub const DEFAULT_BARRIER_CYCLES: u64 = 260;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub cores: usize,
    pub lanes_per_core: usize,
    /// Cycles lost at each synchronization point.
    pub barrier_cycles: u64,
    pub barriers: u64,
}

impl ClusterConfig {
    pub fn new(cores: usize, lanes_per_core: usize) -> Self {
        ClusterConfig {
            cores,
            lanes_per_core,
            barrier_cycles: DEFAULT_BARRIER_CYCLES,
            barriers: 2,
        }
    }

    pub fn fpus(&self) -> usize {
        self.cores * self.lanes_per_core
    }

    /// Peak operations per cycle of the whole cluster at 64-bit elements.
    pub fn peak(&self) -> f64 {
        2.0 * self.fpus() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.cores == 0 {
            return Err(Error::Config("cluster needs at least one core".into()));
        }
        MachineConfig::new(self.lanes_per_core).validate()
    }

    /// The 16-FPU configurations: 8x2, 4x4, 2x8 and 1x16.
    pub fn sixteen_fpu() -> Vec<ClusterConfig> {
        [(8, 2), (4, 4), (2, 8), (1, 16)]
            .into_iter()
            .map(|(c, l)| ClusterConfig::new(c, l))
            .collect()
    }

    /// Scalar frontend used on every core: in-order issue from cold caches.
    pub fn frontend() -> FrontendConfig {
        FrontendConfig {
            mode: FrontendMode::Cva6,
            warm_caches: false,
            ..FrontendConfig::default()
        }
    }
}

/// Contiguous slice of the parallel dimension assigned to one core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub start: usize,
    pub len: usize,
}

/// Splits `n` rows over `cores` as evenly as possible; cores past `n` stay idle.
pub fn partition(n: usize, cores: usize) -> Vec<Block> {
    let active = cores.min(n).max(1);
    let base = n / active;
    let extra = n % active;
    let mut start = 0;
    (0..cores)
        .map(|c| {
            let len = if c < active { base + usize::from(c < extra) } else { 0 };
            let b = Block { start, len };
            start += len;
            b
        })
        .collect()
}

/// Row-block partition of an n x n product; every block keeps the full row length.
pub fn partition_matmul(n: usize, cores: usize) -> Vec<Block> {
    partition(n, cores)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub config: ClusterConfig,
    pub blocks: Vec<Block>,
    /// Per-core runs; `None` for idle cores.
    pub per_core: Vec<Option<CycleReport>>,
    pub cycles: u64,
    pub flops: u64,
    pub flop_per_cycle: f64,
}

impl ClusterReport {
    pub fn ideality(&self) -> f64 {
        if self.cycles == 0 {
            return 1.0;
        }
        self.flop_per_cycle / self.config.peak()
    }

    pub fn gflops(&self) -> Result<f64> {
        real_throughput(self.flop_per_cycle, self.config.lanes_per_core)
    }

    pub fn gflops_per_watt(&self, calib: &Calibration) -> Result<f64> {
        calib.energy_efficiency(self.config.cores, self.config.lanes_per_core, self.flop_per_cycle)
    }
}

fn block_spec(spec: &KernelSpec, len: usize) -> KernelSpec {
    let mut s = *spec;
    match spec.kernel {
        Kernel::Matmul => s.rows = Some(len),
        _ => s.n = len,
    }
    s
}

/// Runs `spec` split over the cluster. Matmul splits output rows; the
/// one-dimensional kernels split their elements, and dotproduct pays one
/// more synchronization to combine the partial sums.
pub fn simulate_cluster(
    cluster: &ClusterConfig,
    spec: &KernelSpec,
    machine: &MachineConfig,
    fe: &FrontendConfig,
) -> Result<ClusterReport> {
    cluster.validate()?;
    if spec.kernel == Kernel::Conv2d {
        return Err(Error::Config("conv2d has no cluster partition".into()));
    }
    let mut machine = machine.clone();
    machine.lanes = cluster.lanes_per_core;
    let blocks = partition(spec.n, cluster.cores);

    // identical block sizes time identically
    let sizes: Vec<usize> = blocks
        .iter()
        .map(|b| b.len)
        .filter(|&l| l > 0)
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let runs: BTreeMap<usize, CycleReport> = sizes
        .par_iter()
        .map(|&len| Ok((len, run_kernel(&block_spec(spec, len), &machine, fe)?)))
        .collect::<Result<_>>()?;

    let per_core: Vec<Option<CycleReport>> = blocks.iter().map(|b| runs.get(&b.len).copied()).collect();
    let slowest = per_core.iter().flatten().map(|r| r.cycles).max().unwrap_or(0);
    let mut syncs = cluster.barriers;
    if spec.kernel == Kernel::Dotproduct && cluster.cores > 1 {
        syncs += 1;
    }
    let cycles = slowest + syncs * cluster.barrier_cycles;
    let flops = spec.flops();
    Ok(ClusterReport {
        config: *cluster,
        blocks,
        per_core,
        cycles,
        flops,
        flop_per_cycle: if cycles == 0 { 0.0 } else { flops as f64 / cycles as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_examples() {
        let p = partition_matmul(32, 8);
        assert_eq!(p.len(), 8);
        assert!(p.iter().all(|b| b.len == 4));
        assert_eq!(p[7].start, 28);
        assert_eq!(partition_matmul(32, 1), vec![Block { start: 0, len: 32 }]);
        let p = partition_matmul(3, 8);
        assert_eq!(p.iter().filter(|b| b.len > 0).count(), 3);
        assert_eq!(p.iter().map(|b| b.len).sum::<usize>(), 3);
    }

    #[test]
    fn single_core_cluster_adds_barriers() {
        let spec = KernelSpec::matmul(8);
        let machine = MachineConfig::new(2);
        let fe = ClusterConfig::frontend();
        let single = run_kernel(&spec, &machine, &fe).unwrap();
        let c = simulate_cluster(&ClusterConfig::new(1, 2), &spec, &machine, &fe).unwrap();
        assert_eq!(c.cycles, single.cycles + 2 * DEFAULT_BARRIER_CYCLES);
        assert_eq!(c.flops, single.flops);
    }

    #[test]
    fn sixteen_fpu_set() {
        assert!(ClusterConfig::sixteen_fpu().iter().all(|c| c.fpus() == 16));
        assert!(ClusterConfig::new(0, 4).validate().is_err());
        assert!(ClusterConfig::new(2, 3).validate().is_err());
    }
}
