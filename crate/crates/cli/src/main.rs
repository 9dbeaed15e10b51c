use std::error::Error;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use laneforge_core::energy::Calibration;
use laneforge_core::frontend::FrontendConfig;
use laneforge_core::isa::Trace;
use laneforge_core::kernels::{run_kernel, Dtype, Kernel, KernelSpec, DEFAULT_SEED};
use laneforge_core::multicore::ClusterConfig;
use laneforge_core::sldu::{mux_count, InterconnectKind};
use laneforge_core::sweep::{cluster_sweep, run_sweep, write_csv, SweepSpec};
use laneforge_core::timing::{simulate_trace, ArchState, CycleReport, MachineConfig};
use laneforge_core::Memory;

type CliResult = Result<(), Box<dyn Error>>;

#[derive(Parser)]
#[command(name = "laneforge", version, about = "Lane-based RISC-V vector unit simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(clap::Args)]
struct MachineArgs {
    #[arg(long, default_value_t = 4)]
    lanes: usize,
    /// Deliver one vector instruction per cycle with no scalar overhead.
    #[arg(long)]
    ideal_dispatcher: bool,
    /// Rotate each register's start bank.
    #[arg(long)]
    barber_pole: bool,
    /// Larger queues and no extra hazard cycle.
    #[arg(long)]
    optimized: bool,
}

impl MachineArgs {
    fn machine(&self) -> MachineConfig {
        let mut m = MachineConfig::new(self.lanes);
        m.barber_pole = self.barber_pole;
        m.optimized = self.optimized;
        m
    }

    fn frontend(&self) -> FrontendConfig {
        if self.ideal_dispatcher {
            FrontendConfig::ideal()
        } else {
            FrontendConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate, simulate and verify one kernel.
    Run {
        #[arg(long, default_value = "matmul")]
        kernel: Kernel,
        /// Problem size: matrix side, vector length or image side.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "fp64")]
        dtype: Dtype,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        machine: MachineArgs,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
    /// Simulate a vector instruction trace file.
    Trace {
        file: PathBuf,
        /// Size of the zero-initialized memory, bytes.
        #[arg(long, default_value_t = 1 << 20)]
        mem_bytes: usize,
        #[command(flatten)]
        machine: MachineArgs,
        #[arg(long, value_enum, default_value = "json")]
        out: Format,
    },
    /// Sweep lane counts and vector sizes from a `key = value` config file.
    Sweep {
        /// Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        out: Format,
    },
    /// Slide-unit multiplexer counts per interconnect.
    MuxCount {
        #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 8, 16])]
        lanes: Vec<usize>,
        #[arg(long, value_enum, default_value = "text")]
        out: Format,
    },
    /// Run a kernel split over a multi-core cluster.
    Cluster {
        #[arg(long, default_value_t = 8)]
        cores: usize,
        #[arg(long, default_value_t = 2)]
        lanes: usize,
        #[arg(long, default_value = "matmul")]
        kernel: Kernel,
        #[arg(long, value_delimiter = ',', default_values_t = [32])]
        n: Vec<usize>,
        /// Compare the 16-FPU configurations instead of one cluster.
        #[arg(long)]
        sixteen_fpu: bool,
        #[arg(long, value_enum, default_value = "text")]
        out: Format,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.cmd) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn dispatch(cmd: Cmd) -> CliResult {
    let mut stdout = io::stdout().lock();
    match cmd {
        Cmd::Run { kernel, n, dtype, seed, machine, out } => {
            let mut spec = KernelSpec::new(kernel, dtype, n);
            spec.seed = seed;
            let r = run_kernel(&spec, &machine.machine(), &machine.frontend())?;
            match out {
                Format::Json => writeln!(stdout, "{}", r.to_json())?,
                Format::Csv => write_csv(&mut stdout, &[RunRow::from(&r)])?,
                Format::Text => writeln!(
                    stdout,
                    "{kernel} {} n={n} lanes={}: {} cycles, {:.3} flop/cycle, ideality {:.3}",
                    dtype.name(),
                    machine.lanes,
                    r.cycles,
                    r.flop_per_cycle,
                    r.ideality
                )?,
            }
        }
        Cmd::Trace { file, mem_bytes, machine, out } => {
            let trace = Trace::parse(&fs::read_to_string(&file)?)?;
            let cfg = machine.machine();
            let mut state = ArchState::new(&cfg.geometry()?, Memory::new(mem_bytes));
            let r = simulate_trace(&trace.instrs, &cfg, &machine.frontend(), &mut state)?;
            match out {
                Format::Json => writeln!(stdout, "{}", r.to_json())?,
                Format::Csv => write_csv(&mut stdout, &[RunRow::from(&r)])?,
                Format::Text => writeln!(stdout, "{} instructions, {} cycles", trace.instrs.len(), r.cycles)?,
            }
        }
        Cmd::Sweep { config, out } => {
            let spec = match config {
                Some(p) => SweepSpec::parse(&fs::read_to_string(p)?)?,
                None => SweepSpec::default(),
            };
            let pts = run_sweep(&spec);
            match out {
                Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&pts)?)?,
                Format::Csv => write_csv(&mut stdout, &pts)?,
                Format::Text => {
                    for p in &pts {
                        writeln!(
                            stdout,
                            "{:>2} lanes {:>5} B: {:>9} cycles  ideality {:.3} {}",
                            p.lanes, p.vector_bytes, p.cycles, p.ideality, p.error
                        )?;
                    }
                }
            }
        }
        Cmd::MuxCount { lanes, out } => {
            let rows: Vec<MuxRow> = lanes
                .iter()
                .flat_map(|&l| {
                    InterconnectKind::ALL.into_iter().map(move |k| MuxRow {
                        lanes: l,
                        interconnect: k.name(),
                        muxes: mux_count(k, l),
                    })
                })
                .collect();
            match out {
                Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&rows)?)?,
                Format::Csv => write_csv(&mut stdout, &rows)?,
                Format::Text => {
                    for r in &rows {
                        writeln!(stdout, "{:>2} lanes {:<17} {}", r.lanes, r.interconnect, r.muxes)?;
                    }
                }
            }
        }
        Cmd::Cluster { cores, lanes, kernel, n, sixteen_fpu, out } => {
            let clusters = if sixteen_fpu {
                ClusterConfig::sixteen_fpu()
            } else {
                let c = ClusterConfig::new(cores, lanes);
                c.validate()?;
                vec![c]
            };
            let pts = cluster_sweep(&clusters, &n, kernel, &Calibration::default())?;
            match out {
                Format::Json => writeln!(stdout, "{}", serde_json::to_string_pretty(&pts)?)?,
                Format::Csv => write_csv(&mut stdout, &pts)?,
                Format::Text => {
                    for p in &pts {
                        writeln!(
                            stdout,
                            "{}x{} n={}: {:.2} flop/cycle, {:.2} GFLOPS, {:.2} GFLOPS/W",
                            p.cores, p.lanes, p.n, p.flop_per_cycle, p.gflops, p.gflops_per_watt
                        )?;
                    }
                }
            }
        }
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct MuxRow {
    lanes: usize,
    interconnect: &'static str,
    muxes: u64,
}

/// Flat summary of a report for CSV output.
#[derive(serde::Serialize)]
struct RunRow {
    cycles: u64,
    flops: u64,
    flop_per_cycle: f64,
    ideality: f64,
    vector_instructions: u64,
    reshuffles: u64,
}

impl From<&CycleReport> for RunRow {
    fn from(r: &CycleReport) -> Self {
        RunRow {
            cycles: r.cycles,
            flops: r.flops,
            flop_per_cycle: r.flop_per_cycle,
            ideality: r.ideality,
            vector_instructions: r.vector_instructions,
            reshuffles: r.reshuffles,
        }
    }
}
