//! Configuration sweeps over lane counts and vector sizes.
//!
//! Sweep files are flat `key = value` text; `#` starts a comment and list
//! values are comma separated.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `kernel` | `matmul` | matmul, conv2d, dotproduct or axpy |
//! | `dtype` | `fp64` | fp64, fp32, int64 or int32 |
//! | `lanes` | `2,4,8,16` | lane counts |
//! | `vector_bytes` | `32,64,128,256,512,1024` | bytes per vector, sets the problem size |
//! | `mode` | `cva6` | `cva6` or `ideal` frontend |
//! | `barber_pole` | `false` | rotate register start banks |
//! | `optimized` | `false` | larger buffers, no extra hazard cycle |
//! | `min_bytes_per_lane` | `0` | skip grid points below this ratio |
//! | `repetitions` | `1` | runs per point, each with the next seed |
//! | `seed` | kernel default | first data seed |

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::energy::Calibration;
use crate::error::{Error, Result};
use crate::frontend::{FrontendConfig, FrontendMode};
use crate::kernels::{run_kernel, Dtype, Kernel, KernelSpec, DEFAULT_SEED};
use crate::multicore::{simulate_cluster, ClusterConfig};
use crate::timing::MachineConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kernel: Kernel,
    pub dtype: Dtype,
    pub lanes: Vec<usize>,
    pub vector_bytes: Vec<usize>,
    pub mode: FrontendMode,
    pub barber_pole: bool,
    pub optimized: bool,
    pub min_bytes_per_lane: usize,
    pub repetitions: u32,
    pub seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            kernel: Kernel::Matmul,
            dtype: Dtype::Fp64,
            lanes: vec![2, 4, 8, 16],
            vector_bytes: vec![32, 64, 128, 256, 512, 1024],
            mode: FrontendMode::Cva6,
            barber_pole: false,
            optimized: false,
            min_bytes_per_lane: 0,
            repetitions: 1,
            seed: DEFAULT_SEED,
        }
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Error::Config(format!("`{key}`: `{}` is not a count", v.trim())))
        })
        .collect()
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = SweepSpec::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse {
                    line: i + 1,
                    msg: format!("expected `key = value`, got `{line}`"),
                })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "kernel" => s.kernel = value.parse()?,
                "dtype" => s.dtype = value.parse()?,
                "lanes" => s.lanes = parse_list(key, value)?,
                "vector_bytes" => s.vector_bytes = parse_list(key, value)?,
                "mode" => s.mode = value.parse()?,
                "barber_pole" => s.barber_pole = parse_value(key, value)?,
                "optimized" => s.optimized = parse_value(key, value)?,
                "min_bytes_per_lane" => s.min_bytes_per_lane = parse_value(key, value)?,
                "repetitions" => s.repetitions = parse_value(key, value)?,
                "seed" => s.seed = parse_value(key, value)?,
                _ => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("unknown key `{key}`"),
                    })
                }
            }
        }
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for &l in &self.lanes {
            MachineConfig::new(l).validate()?;
        }
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        Ok(())
    }

    pub fn machine(&self, lanes: usize) -> MachineConfig {
        let mut m = MachineConfig::new(lanes);
        m.barber_pole = self.barber_pole;
        m.optimized = self.optimized;
        m
    }

    pub fn frontend(&self) -> FrontendConfig {
        match self.mode {
            FrontendMode::Cva6 => FrontendConfig::default(),
            FrontendMode::Ideal => FrontendConfig::ideal(),
        }
    }

    /// Grid points in sweep order: lanes, then vector bytes.
    pub fn points(&self) -> Vec<(usize, usize)> {
        let mut pts = Vec::new();
        for &l in &self.lanes {
            for &b in &self.vector_bytes {
                if b >= self.min_bytes_per_lane * l {
                    pts.push((l, b));
                }
            }
        }
        pts.sort_unstable();
        pts.dedup();
        pts
    }
}

/// Problem size for a vector of `bytes` bytes: elements per vector, which is
/// the matrix dimension for matmul and the image side for conv2d.
pub fn problem_size(dtype: Dtype, bytes: usize) -> usize {
    bytes / dtype.bytes()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub kernel: Kernel,
    pub dtype: Dtype,
    pub lanes: usize,
    pub vector_bytes: usize,
    pub bytes_per_lane: usize,
    pub n: usize,
    pub mode: FrontendMode,
    pub barber_pole: bool,
    pub cycles: u64,
    pub flop_per_cycle: f64,
    pub ideality: f64,
    /// Empty on success, otherwise the simulator error.
    pub error: String,
}

impl SweepPoint {
    pub fn ok(&self) -> bool {
        self.error.is_empty()
    }
}

fn run_point(spec: &SweepSpec, lanes: usize, bytes: usize) -> SweepPoint {
    let n = problem_size(spec.dtype, bytes);
    let mut p = SweepPoint {
        kernel: spec.kernel,
        dtype: spec.dtype,
        lanes,
        vector_bytes: bytes,
        bytes_per_lane: bytes / lanes,
        n,
        mode: spec.mode,
        barber_pole: spec.barber_pole,
        cycles: 0,
        flop_per_cycle: 0.0,
        ideality: 0.0,
        error: String::new(),
    };
    let machine = spec.machine(lanes);
    let fe = spec.frontend();
    let mut cycles = 0.0;
    let mut ideality = 0.0;
    let mut fpc = 0.0;
    for rep in 0..spec.repetitions {
        let mut k = KernelSpec::new(spec.kernel, spec.dtype, n);
        k.seed = spec.seed.wrapping_add(rep as u64);
        match run_kernel(&k, &machine, &fe) {
            Ok(r) => {
                cycles += r.cycles as f64;
                ideality += r.ideality;
                fpc += r.flop_per_cycle;
            }
            Err(e) => {
                p.error = e.to_string();
                return p;
            }
        }
    }
    let reps = spec.repetitions as f64;
    p.cycles = (cycles / reps).round() as u64;
    p.flop_per_cycle = fpc / reps;
    p.ideality = ideality / reps;
    p
}

/// Runs every grid point in parallel. Failed points carry their error and
/// do not stop the sweep; the result is sorted by (lanes, vector bytes).
pub fn run_sweep(spec: &SweepSpec) -> Vec<SweepPoint> {
    let mut out: Vec<SweepPoint> = spec
        .points()
        .into_par_iter()
        .map(|(l, b)| run_point(spec, l, b))
        .collect();
    out.sort_by_key(|p| (p.lanes, p.vector_bytes));
    out
}

/// Differences between each point and the one with twice the lanes and
/// twice the bytes: (lanes, bytes, |delta ideality|).
pub fn diagonal_deltas(points: &[SweepPoint]) -> Vec<(usize, usize, f64)> {
    let find = |l: usize, b: usize| points.iter().find(|p| p.lanes == l && p.vector_bytes == b && p.ok());
    points
        .iter()
        .filter(|p| p.ok())
        .filter_map(|p| {
            find(2 * p.lanes, 2 * p.vector_bytes).map(|q| (p.lanes, p.vector_bytes, (p.ideality - q.ideality).abs()))
        })
        .collect()
}

pub fn write_csv<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterPoint {
    pub cores: usize,
    pub lanes: usize,
    pub n: usize,
    pub flop_per_cycle: f64,
    #[serde(rename = "GFLOPS")]
    pub gflops: f64,
    #[serde(rename = "GFLOPS_per_W")]
    pub gflops_per_watt: f64,
}

/// Runs `kernel` at every size on every cluster, sorted by (n, cores).
pub fn cluster_sweep(
    clusters: &[ClusterConfig],
    sizes: &[usize],
    kernel: Kernel,
    calib: &Calibration,
) -> Result<Vec<ClusterPoint>> {
    let jobs: Vec<(ClusterConfig, usize)> = sizes
        .iter()
        .flat_map(|&n| clusters.iter().map(move |c| (*c, n)))
        .collect();
    let mut out = jobs
        .into_par_iter()
        .map(|(c, n)| {
            let spec = KernelSpec::new(kernel, Dtype::Fp64, n);
            let r = simulate_cluster(&c, &spec, &MachineConfig::new(c.lanes_per_core), &ClusterConfig::frontend())?;
            Ok(ClusterPoint {
                cores: c.cores,
                lanes: c.lanes_per_core,
                n,
                flop_per_cycle: r.flop_per_cycle,
                gflops: r.gflops()?,
                gflops_per_watt: r.gflops_per_watt(calib)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort_by_key(|p| (p.n, p.cores, p.lanes));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config() {
        let s = SweepSpec::parse(
            "# grid\nkernel = dotproduct\nlanes = 2, 4\nvector_bytes=64,128\nmode = ideal\nbarber_pole = true\n",
        )
        .unwrap();
        assert_eq!(s.kernel, Kernel::Dotproduct);
        assert_eq!(s.lanes, vec![2, 4]);
        assert_eq!(s.mode, FrontendMode::Ideal);
        assert!(s.barber_pole);
        assert_eq!(s.points().len(), 4);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SweepSpec::parse("lanes = 3").is_err());
        assert!(SweepSpec::parse("colour = blue").is_err());
        assert!(SweepSpec::parse("lanes").is_err());
        assert!(SweepSpec::parse("repetitions = 0").is_err());
    }

    #[test]
    fn empty_lane_list_gives_empty_table() {
        let s = SweepSpec::parse("lanes =").unwrap();
        assert!(run_sweep(&s).is_empty());
    }

    #[test]
    fn failed_points_are_recorded() {
        // 8-byte vectors give a 1x1 matmul, which the generator rejects
        let s = SweepSpec {
            lanes: vec![2],
            vector_bytes: vec![8, 32],
            ..SweepSpec::default()
        };
        let pts = run_sweep(&s);
        assert_eq!(pts.len(), 2);
        assert!(!pts[0].ok());
        assert!(pts[1].ok() && pts[1].ideality > 0.0);
        let mut buf = Vec::new();
        write_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("kernel,dtype,lanes,vector_bytes,bytes_per_lane,n,mode,barber_pole,cycles"));
        assert_eq!(text.lines().count(), 3);
    }
}
