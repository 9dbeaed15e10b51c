//! Benchmark kernel generators. Each kernel emits an interleaved
//! scalar/vector program, its input memory image, and the expected result.

mod axpy;
mod builder;
mod conv2d;
mod dotproduct;
mod matmul;
mod sve;

pub use sve::{rvv_dotproduct_count, sve_dotproduct_count, sve_dotproduct_listing};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::frontend::{FrontendConfig, Program};
use crate::isa::{Ew, Geometry, Memory};
use crate::timing::{simulate, ArchState, CycleReport, MachineConfig};

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kernel {
    Matmul,
    Conv2d,
    Dotproduct,
    Axpy,
}

impl Kernel {
    pub const ALL: [Kernel; 4] = [Kernel::Matmul, Kernel::Conv2d, Kernel::Dotproduct, Kernel::Axpy];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Matmul => "matmul",
            Kernel::Conv2d => "conv2d",
            Kernel::Dotproduct => "dotproduct",
            Kernel::Axpy => "axpy",
        }
    }

    /// Peak operations per cycle per lane at 64-bit elements.
    fn peak_factor(self) -> f64 {
        match self {
            Kernel::Matmul | Kernel::Conv2d => 2.0,
            Kernel::Dotproduct | Kernel::Axpy => 0.5,
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kernel::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownKernel(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    Fp64,
    Fp32,
    Int64,
    Int32,
}

impl Dtype {
    pub const ALL: [Dtype; 4] = [Dtype::Fp64, Dtype::Fp32, Dtype::Int64, Dtype::Int32];

    pub fn name(self) -> &'static str {
        match self {
            Dtype::Fp64 => "fp64",
            Dtype::Fp32 => "fp32",
            Dtype::Int64 => "int64",
            Dtype::Int32 => "int32",
        }
    }

    pub fn ew(self) -> Ew {
        match self {
            Dtype::Fp64 | Dtype::Int64 => Ew::E64,
            Dtype::Fp32 | Dtype::Int32 => Ew::E32,
        }
    }

    pub fn bytes(self) -> usize {
        self.ew().bytes()
    }

    pub fn is_fp(self) -> bool {
        matches!(self, Dtype::Fp64 | Dtype::Fp32)
    }

    /// Element encoding of `v` as stored in memory or forwarded as a scalar.
    pub(crate) fn encode(self, v: f64) -> u64 {
        match self {
            Dtype::Fp64 => v.to_bits(),
            Dtype::Fp32 => (v as f32).to_bits() as u64,
            Dtype::Int64 => v as i64 as u64,
            Dtype::Int32 => v as i64 as u32 as u64,
        }
    }

    pub(crate) fn decode(self, bits: u64) -> f64 {
        match self {
            Dtype::Fp64 => f64::from_bits(bits),
            Dtype::Fp32 => f32::from_bits(bits as u32) as f64,
            Dtype::Int64 => bits as i64 as f64,
            Dtype::Int32 => bits as u32 as i32 as f64,
        }
    }

    fn tolerance(self, expected: f64) -> f64 {
        let rel = match self {
            Dtype::Fp64 => 1e-9,
            Dtype::Fp32 => 1e-4,
            Dtype::Int64 | Dtype::Int32 => 0.0,
        };
        rel * expected.abs().max(1.0)
    }

    fn sew_token(self) -> &'static str {
        match self.ew() {
            Ew::E64 => "e64",
            _ => "e32",
        }
    }
}

impl fmt::Display for Dtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dtype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Dtype::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown dtype `{s}`")))
    }
}

/// A benchmark instance. `n` is the problem size: matrix dimension for
/// matmul, vector length for dotproduct and axpy, image height for conv2d.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kernel: Kernel,
    pub dtype: Dtype,
    pub n: usize,
    /// Image width for conv2d; defaults to `n`.
    pub width: Option<usize>,
    /// Output rows computed per block in matmul; chosen from the LMUL when unset.
    pub block_rows: Option<usize>,
    /// Output rows of matmul when computing one row block of a larger product.
    pub rows: Option<usize>,
    pub seed: u64,
}

impl KernelSpec {
    pub fn new(kernel: Kernel, dtype: Dtype, n: usize) -> Self {
        KernelSpec {
            kernel,
            dtype,
            n,
            width: None,
            block_rows: None,
            rows: None,
            seed: DEFAULT_SEED,
        }
    }

    pub fn matmul(n: usize) -> Self {
        Self::new(Kernel::Matmul, Dtype::Fp64, n)
    }

    /// Useful operations of the problem.
    pub fn flops(&self) -> u64 {
        let n = self.n as u64;
        match self.kernel {
            Kernel::Matmul => 2 * self.rows.unwrap_or(self.n) as u64 * n * n,
            Kernel::Dotproduct | Kernel::Axpy => 2 * n,
            Kernel::Conv2d => {
                let w = self.width.unwrap_or(self.n) as u64;
                2 * conv2d::CHANNELS as u64
                    * (conv2d::K * conv2d::K) as u64
                    * n.saturating_sub(conv2d::K as u64 - 1)
                    * w.saturating_sub(conv2d::K as u64 - 1)
            }
        }
    }
}

/// Peak operations per cycle of `kernel` on `lanes` lanes.
pub fn max_perf(kernel: Kernel, dtype: Dtype, lanes: usize) -> f64 {
    kernel.peak_factor() * lanes as f64 * (64 / dtype.ew().bits()) as f64
}

/// Where the kernel leaves its result.
#[derive(Clone, Debug, PartialEq)]
pub enum Expected {
    Memory { addr: u64, values: Vec<f64> },
    /// The first `width` elements of each row starting at `addrs`.
    Rows { addrs: Vec<u64>, width: usize, values: Vec<f64> },
    /// Element 0 of a vector register.
    Scalar { reg: u8, value: f64 },
}

#[derive(Clone, Debug)]
pub struct GeneratedKernel {
    pub spec: KernelSpec,
    pub program: Program,
    pub memory: Memory,
    pub expected: Expected,
}

impl GeneratedKernel {
    /// Compares the final state against the reference result.
    pub fn verify(&self, state: &ArchState) -> Result<()> {
        let dt = self.spec.dtype;
        let check = |i: usize, got: f64, want: f64| {
            if (got - want).abs() > dt.tolerance(want) {
                return Err(Error::Mismatch(format!(
                    "{} {}: element {i} is {got}, expected {want}",
                    self.spec.kernel, dt
                )));
            }
            Ok(())
        };
        match &self.expected {
            Expected::Memory { addr, values } => {
                for (i, want) in values.iter().enumerate() {
                    let bits = state.mem.read_uint(addr + (i * dt.bytes()) as u64, dt.bytes())?;
                    check(i, dt.decode(bits), *want)?;
                }
            }
            Expected::Rows { addrs, width, values } => {
                for (i, want) in values.iter().enumerate() {
                    let addr = addrs[i / width] + (i % width * dt.bytes()) as u64;
                    check(i, dt.decode(state.mem.read_uint(addr, dt.bytes())?), *want)?;
                }
            }
            Expected::Scalar { reg, value } => {
                check(0, dt.decode(state.vrf.get(*reg, 0, dt.ew())?), *value)?;
            }
        }
        Ok(())
    }
}

pub fn generate(spec: &KernelSpec, geom: &Geometry) -> Result<GeneratedKernel> {
    match spec.kernel {
        Kernel::Matmul => matmul::generate(spec, geom),
        Kernel::Conv2d => conv2d::generate(spec, geom),
        Kernel::Dotproduct => dotproduct::generate(spec, geom),
        Kernel::Axpy => axpy::generate(spec, geom),
    }
}

/// Generates, simulates and verifies one kernel. Throughput and ideality
/// count useful operations against the kernel's own peak.
pub fn run_kernel(spec: &KernelSpec, cfg: &MachineConfig, fe: &FrontendConfig) -> Result<CycleReport> {
    let geom = cfg.geometry()?;
    let k = generate(spec, &geom)?;
    let mut state = ArchState::new(&geom, k.memory.clone());
    let mut r = simulate(&k.program, cfg, fe, &mut state)?;
    k.verify(&state)?;
    r.flops = spec.flops();
    r.flop_per_cycle = if r.cycles == 0 { 0.0 } else { r.flops as f64 / r.cycles as f64 };
    Ok(r.with_max_perf(max_perf(spec.kernel, spec.dtype, cfg.lanes)))
}

/// Input values: uniform over [0, 1) for floating point, small integers otherwise.
pub(crate) fn random_values(rng: &mut ChaCha8Rng, dtype: Dtype, count: usize) -> Vec<f64> {
    (0..count)
        .map(|_| {
            if dtype.is_fp() {
                let v: f64 = rng.gen();
                dtype.decode(dtype.encode(v))
            } else {
                rng.gen_range(0..16) as f64
            }
        })
        .collect()
}

pub(crate) fn rng_for(spec: &KernelSpec) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(spec.seed)
}

pub(crate) fn store_values(mem: &mut Memory, addr: u64, dtype: Dtype, values: &[f64]) -> Result<()> {
    for (i, v) in values.iter().enumerate() {
        mem.write_uint(addr + (i * dtype.bytes()) as u64, dtype.bytes(), dtype.encode(*v))?;
    }
    Ok(())
}

/// Smallest LMUL in `1..=max` whose register group holds `elems` elements.
pub(crate) fn lmul_for(geom: &Geometry, ew: Ew, elems: usize, max: u8) -> u8 {
    let mut lmul = 1;
    while lmul < max && geom.vlmax(ew, lmul) < elems {
        lmul *= 2;
    }
    lmul
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_table() {
        assert_eq!(max_perf(Kernel::Matmul, Dtype::Fp64, 4), 8.0);
        assert_eq!(max_perf(Kernel::Conv2d, Dtype::Fp64, 16), 32.0);
        assert_eq!(max_perf(Kernel::Axpy, Dtype::Fp64, 8), 4.0);
        assert_eq!(max_perf(Kernel::Matmul, Dtype::Fp32, 4), 16.0);
    }

    #[test]
    fn flop_counts() {
        assert_eq!(KernelSpec::matmul(32).flops(), 65536);
        let mut c = KernelSpec::new(Kernel::Conv2d, Dtype::Fp64, 8);
        c.width = Some(8);
        assert_eq!(c.flops(), 2 * 3 * 49 * 4);
        assert_eq!(KernelSpec::new(Kernel::Axpy, Dtype::Fp64, 0).flops(), 0);
    }

    #[test]
    fn encoding_round_trips() {
        for d in Dtype::ALL {
            assert_eq!(d.decode(d.encode(3.0)), 3.0);
        }
        assert_eq!("int32".parse::<Dtype>().unwrap(), Dtype::Int32);
        assert!("fp16".parse::<Dtype>().is_err());
    }
}
