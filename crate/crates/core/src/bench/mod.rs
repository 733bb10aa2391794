//! Wall-time scaling, FLOP and peak-intermediate accounting per method.
//!
//! Each grid cell builds its block from the registry, runs one instrumented
//! pass to collect FLOP and allocation counts, then `warmup` discarded and
//! `trials` timed passes on the calling thread. The median timed pass is
//! reported.

mod fit;
mod model;
mod report;

use std::hint::black_box;
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use fit::{fit_slope, inversions, ScalingFit, MIN_FIT_POINTS};
pub use model::{flop_model, peak_model};
pub use report::{emit_csv, emit_svg, parse_csv};

use crate::blocks::{BlockConfig, Method, Registry};
use crate::error::{Error, Result};
use crate::probe;
use crate::rng;
use crate::tensor::Scalar;

/// Spatial sizes of the default sweep.
pub const DEFAULT_NS: [u64; 7] = [256, 512, 1024, 2048, 4096, 8192, 16384];
/// Channel counts of the default sweep.
pub const DEFAULT_CS: [u64; 3] = [64, 256, 1024];
/// Latent width used for Latent-GNN in the default sweep.
pub const DEFAULT_LATENT: u64 = 64;
/// Timed runs per cell unless configured otherwise.
pub const DEFAULT_TRIALS: usize = 20;
/// Cells whose largest intermediate exceeds this many bytes are skipped.
pub const DEFAULT_BYTE_BUDGET: u64 = 256 << 20;

/// One point of the benchmark grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cell {
    pub method: Method,
    pub n: u64,
    pub c: u64,
    /// Latent width; forced to 0 for methods that have none.
    pub d: u64,
}

impl Cell {
    pub fn new(method: Method, n: u64, c: u64, d: u64) -> Self {
        Cell {
            method,
            n,
            c,
            d: if method.uses_latent() { d } else { 0 },
        }
    }

    pub fn flops(&self) -> u64 {
        flop_model(self.method, self.n, self.c, self.d)
    }

    pub fn peak_elems(&self) -> u64 {
        peak_model(self.method, self.n, self.c, self.d)
    }
}

/// One measured cell. Column order matches the CSV schema.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub method: Method,
    pub n: u64,
    pub c: u64,
    pub d: u64,
    pub trials: u64,
    pub median_ns: u64,
    pub flops: u64,
    pub peak_elems: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedCell {
    pub cell: Cell,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchOutcome {
    pub records: Vec<BenchRecord>,
    pub skipped: Vec<SkippedCell>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchOptions {
    pub trials: usize,
    pub warmup: usize,
    pub seed: u64,
    pub byte_budget: u64,
}

impl Default for BenchOptions {
    fn default() -> Self {
        BenchOptions {
            trials: DEFAULT_TRIALS,
            warmup: 2,
            seed: rng::DEFAULT_SEED,
            byte_budget: DEFAULT_BYTE_BUDGET,
        }
    }
}

/// Every combination of `methods × ns × cs`.
pub fn grid(methods: &[Method], ns: &[u64], cs: &[u64], latent: u64) -> Vec<Cell> {
    let mut cells = Vec::new();
    for &m in methods {
        for &c in cs {
            for &n in ns {
                cells.push(Cell::new(m, n, c, latent));
            }
        }
    }
    cells
}

pub fn default_grid(methods: &[Method]) -> Vec<Cell> {
    grid(methods, &DEFAULT_NS, &DEFAULT_CS, DEFAULT_LATENT)
}

/// Small smoke-test grid: N ≤ 512.
pub fn tiny_grid(methods: &[Method]) -> Vec<Cell> {
    grid(methods, &[32, 64, 128, 256, 512], &[16], 8)
}

/// Counters observed on one instrumented pass of a cell.
pub fn instrument_cell<T: Scalar>(
    registry: &Registry<T>,
    cell: &Cell,
    seed: u64,
) -> Result<probe::Counters> {
    let (block, x) = prepare::<T>(registry, cell, seed)?;
    let (out, counters) = probe::measure(|| block.forward(&x));
    out?;
    Ok(counters)
}

fn prepare<T: Scalar>(
    registry: &Registry<T>,
    cell: &Cell,
    seed: u64,
) -> Result<(
    Box<dyn crate::blocks::AttentionBlock<T>>,
    crate::tensor::Matrix<T>,
)> {
    if cell.n == 0 || cell.c == 0 {
        return Err(Error::Config(format!("empty cell {cell:?}")));
    }
    let cfg = BlockConfig {
        channels: cell.c as usize,
        latent: cell.d as usize,
        seed,
    };
    let block = registry.build(cell.method.key(), &cfg)?;
    let mut input_rng = rng::seeded(seed ^ 0x5eed_1a7e);
    let x = rng::uniform::<T>(&mut input_rng, cell.n as usize, cell.c as usize, 1.0);
    Ok((block, x))
}

fn median(sorted: &[u64]) -> u64 {
    let k = sorted.len();
    if k % 2 == 1 {
        sorted[k / 2]
    } else {
        (sorted[k / 2 - 1] + sorted[k / 2]) / 2
    }
}

/// Times every cell of `cells` in order. Cells are independent: a repeated
/// cell is measured again.
pub fn run_bench<T: Scalar>(
    registry: &Registry<T>,
    cells: &[Cell],
    opts: &BenchOptions,
) -> Result<BenchOutcome> {
    if opts.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let elem_bytes = std::mem::size_of::<T>() as u64;
    let mut outcome = BenchOutcome::default();
    for cell in cells {
        let bytes = cell.peak_elems().saturating_mul(elem_bytes);
        if bytes > opts.byte_budget {
            outcome.skipped.push(SkippedCell {
                cell: *cell,
                reason: format!(
                    "largest intermediate needs {bytes} bytes, budget is {}",
                    opts.byte_budget
                ),
            });
            continue;
        }
        let (block, x) = prepare::<T>(registry, cell, opts.seed)?;
        let (first, counters) = probe::measure(|| block.forward(&x));
        black_box(first?);
        for _ in 0..opts.warmup {
            black_box(block.forward(black_box(&x))?);
        }
        let mut times = Vec::with_capacity(opts.trials);
        for _ in 0..opts.trials {
            let start = Instant::now();
            let y = block.forward(black_box(&x))?;
            let elapsed = start.elapsed();
            black_box(y);
            times.push(elapsed.as_nanos().max(1) as u64);
        }
        times.sort_unstable();
        outcome.records.push(BenchRecord {
            method: cell.method,
            n: cell.n,
            c: cell.c,
            d: cell.d,
            trials: opts.trials as u64,
            median_ns: median(&times),
            flops: counters.flops,
            peak_elems: counters.peak_elems,
        });
    }
    Ok(outcome)
}
