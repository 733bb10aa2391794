//! Command-line front end: `verify`, `gradcheck`, `bench`, `oracle`.
//!
//! Exit codes: 0 when every executed check passed, 1 when a check failed,
//! 2 for usage or configuration errors.
//!
//! `--config <file>` reads `key=value` lines (`#` starts a comment) and
//! applies them as if they were flags given before the command-line flags,
//! so explicit flags win.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{self, BenchOptions, BenchRecord, Cell};
use crate::blocks::{Method, NlParams, PolyNlParams, Registry};
use crate::error::{Error, Result};
use crate::grad::{self, GradBundle, GradCheckConfig, GradCheckReport};
use crate::oracle::{build_w3_nl_with_cap, build_w3_polynl_with_cap, DEFAULT_CAP};
use crate::rng::DEFAULT_SEED;
use crate::tensor::{Matrix, Scalar, SquareWeights};
use crate::verify::{self, Suite, VerifyReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dtype {
    F32,
    F64,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Base seed for every random draw.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Scalar type. Verification always runs in f64; bench defaults to f32.
    #[arg(long, value_enum)]
    pub dtype: Option<Dtype>,
    /// Output path prefix.
    #[arg(long)]
    pub out: Option<String>,
    /// Pass threshold, overriding the subcommand default.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// File of `key=value` lines applied before the command-line flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Run only this suite.
    #[arg(long)]
    pub suite: Option<String>,
    /// Replay a single instance by its printed seed (requires --suite).
    #[arg(long)]
    pub replay: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct GradcheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated `NxC` sizes.
    #[arg(long, default_value = "5x3,8x4")]
    pub sizes: String,
    /// Seeds per size and block.
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    /// Comma-separated blocks to check (`nl`, `polynl`).
    #[arg(long, default_value = "nl,polynl")]
    pub blocks: String,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-5)]
    pub step: f64,
    /// Absolute error below which an entry passes regardless of relative error.
    #[arg(long, default_value_t = 1e-8)]
    pub abs_floor: f64,
    /// Perturbs the analytic gradients; the check must then fail.
    #[arg(long, hide = true)]
    pub inject_defect: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GridPreset {
    Default,
    Tiny,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Preset sweep; `--ns`, `--cs`, `--latent`, `--trials` refine it.
    #[arg(long, value_enum, default_value_t = GridPreset::Default)]
    pub grid: GridPreset,
    /// Comma-separated methods (nl, enl, polynl, latentgnn, conv1x1).
    #[arg(long)]
    pub methods: Option<String>,
    /// Comma-separated spatial sizes.
    #[arg(long)]
    pub ns: Option<String>,
    /// Comma-separated channel counts.
    #[arg(long)]
    pub cs: Option<String>,
    /// Latent width for Latent-GNN.
    #[arg(long)]
    pub latent: Option<u64>,
    /// Timed runs per cell.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Discarded runs per cell before timing.
    #[arg(long, default_value_t = 2)]
    pub warmup: usize,
    /// Cells whose largest intermediate exceeds this many bytes are skipped.
    #[arg(long, default_value_t = bench::DEFAULT_BYTE_BUDGET)]
    pub byte_budget: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleBlock {
    Nl,
    Polynl,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t = OracleBlock::Polynl)]
    pub block: OracleBlock,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub c: usize,
    /// Largest N·C accepted.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    pub cap: usize,
    /// Use all-ones weights instead of seeded random ones.
    #[arg(long)]
    pub unit_weights: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run the oracle, reassociation, homogeneity and permutation suites.
    Verify(VerifyArgs),
    /// Compare analytic gradients with central finite differences.
    Gradcheck(GradcheckArgs),
    /// Time every method over a grid and write CSV and SVG.
    Bench(BenchArgs),
    /// Dump the order-8 interaction tensor of a block.
    Oracle(OracleArgs),
}

/// Parsed command line.
#[derive(Debug, Clone, Parser)]
#[command(
    name = "polynl",
    version,
    about = "Non-local blocks as cubic polynomial layers",
    args_override_self = true
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

impl RunConfig {
    pub fn common(&self) -> &CommonArgs {
        match &self.command {
            Command::Verify(a) => &a.common,
            Command::Gradcheck(a) => &a.common,
            Command::Bench(a) => &a.common,
            Command::Oracle(a) => &a.common,
        }
    }
}

const SUBCOMMANDS: [&str; 4] = ["verify", "gradcheck", "bench", "oracle"];

/// Splices `key=value` lines from any `--config` file in front of the
/// explicit flags of the subcommand.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<Option<&str>> = args.iter().map(|a| a.to_str()).collect();
    let mut path = None;
    for (i, a) in strs.iter().enumerate() {
        match a {
            Some("--config") => path = strs.get(i + 1).copied().flatten().map(str::to_owned),
            Some(s) if s.starts_with("--config=") => path = Some(s["--config=".len()..].to_owned()),
            _ => {}
        }
    }
    let Some(path) = path else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Config(format!("cannot read config {path}: {e}")))?;
    let mut injected = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("{path}:{}: expected key=value", lineno + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key == "config" {
            continue;
        }
        match value {
            "true" => injected.push(OsString::from(format!("--{key}"))),
            "false" => {}
            v => injected.push(OsString::from(format!("--{key}={v}"))),
        }
    }
    let sub = strs
        .iter()
        .position(|a| a.is_some_and(|s| SUBCOMMANDS.contains(&s)))
        .ok_or_else(|| Error::Config("--config needs a subcommand".into()))?;
    let mut out = args[..=sub].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[sub + 1..]);
    Ok(out)
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numeric { .. } => EXIT_CHECK_FAILED,
        _ => EXIT_USAGE,
    }
}

/// Entry point used by the binary: parses `args` and writes to stdout/stderr.
pub fn run<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// Like [`run`] with explicit output streams.
pub fn run_with<I, A>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match execute(&cfg, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    if let Some(t) = cfg.common().tolerance {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance must be a non-negative number, got {t}"
            )));
        }
    }
    match &cfg.command {
        Command::Verify(a) => cmd_verify(a, out),
        Command::Gradcheck(a) => cmd_gradcheck(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
    }
}

fn require_f64(common: &CommonArgs, what: &str) -> Result<()> {
    if common.dtype == Some(Dtype::F32) {
        return Err(Error::Config(format!("{what} runs in f64 only")));
    }
    Ok(())
}

fn status(passed: bool) -> i32 {
    if passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32> {
    require_f64(&a.common, "verify")?;
    let seed = a.common.seed;
    let suite = a.suite.as_deref().map(str::parse::<Suite>).transpose()?;
    if let Some(replay) = a.replay {
        let suite = suite.ok_or_else(|| Error::Config("--replay needs --suite".into()))?;
        let tol = a.common.tolerance.unwrap_or(suite.default_tolerance());
        let inst = suite.run_instance(replay)?;
        let ok = inst.err <= tol;
        writeln!(
            out,
            "{} instance seed {} (N={}, C={}) error {:.3e} tolerance {:.1e}: {}",
            suite,
            inst.seed,
            inst.n,
            inst.c,
            inst.err,
            tol,
            if ok { "pass" } else { "FAIL" }
        )?;
        return Ok(status(ok));
    }
    let report = match suite {
        Some(s) => VerifyReport {
            seed,
            results: vec![verify::run_suite(
                s,
                seed,
                s.default_instances(),
                a.common.tolerance.unwrap_or(s.default_tolerance()),
            )?],
        },
        None => verify::run_all(seed, a.common.tolerance)?,
    };
    write!(out, "{report}")?;
    Ok(status(report.passed()))
}

fn parse_sizes(s: &str) -> Result<Vec<(usize, usize)>> {
    s.split(',')
        .map(|item| {
            let item = item.trim();
            let (n, c) = item
                .split_once(['x', 'X'])
                .ok_or_else(|| Error::Config(format!("size {item:?} is not NxC")))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|v| *v > 0)
                    .ok_or_else(|| {
                        Error::Config(format!("size {item:?} is not NxC with positive N, C"))
                    })
            };
            Ok((parse(n)?, parse(c)?))
        })
        .collect()
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| Error::Config(format!("invalid {what} {v:?}")))
        })
        .collect()
}

fn perturb(mut g: GradBundle) -> GradBundle {
    g.d_x.data_mut()[0] += 1e-3;
    g
}

pub fn cmd_gradcheck(a: &GradcheckArgs, out: &mut dyn Write) -> Result<i32> {
    require_f64(&a.common, "gradcheck")?;
    let sizes = parse_sizes(&a.sizes)?;
    let blocks: Vec<String> = a
        .blocks
        .split(',')
        .map(|b| b.trim().to_ascii_lowercase())
        .collect();
    if let Some(b) = blocks
        .iter()
        .find(|b| !matches!(b.as_str(), "nl" | "polynl"))
    {
        return Err(Error::Config(format!(
            "gradcheck supports nl and polynl, not {b:?}"
        )));
    }
    if a.seeds == 0 {
        return Err(Error::Config("--seeds must be at least 1".into()));
    }
    let cfg = GradCheckConfig {
        step: a.step,
        tolerance: a
            .common
            .tolerance
            .unwrap_or(GradCheckConfig::default().tolerance),
        abs_floor: a.abs_floor,
    };
    writeln!(
        out,
        "gradcheck seed={} tolerance={:e} abs_floor={:e} step={:e}",
        a.common.seed, cfg.tolerance, cfg.abs_floor, cfg.step
    )?;
    let mut all_pass = true;
    for block in &blocks {
        for &(n, c) in &sizes {
            for k in 0..a.seeds {
                let seed = crate::rng::instance_seed(a.common.seed, k);
                let report: GradCheckReport = match block.as_str() {
                    "nl" => {
                        let (p, x, u) = grad::nl_case(seed, n, c);
                        grad::check_nl_with(&p, &x, &u, &cfg, |p, x, u| {
                            grad::nl_backward(p, x, u).map(|g| {
                                if a.inject_defect {
                                    perturb(g)
                                } else {
                                    g
                                }
                            })
                        })?
                    }
                    _ => {
                        let (p, x, u) = grad::polynl_case(seed, n, c);
                        grad::check_polynl_with(&p, &x, &u, &cfg, |p, x, u| {
                            grad::polynl_backward(p, x, u).map(|g| {
                                if a.inject_defect {
                                    perturb(g)
                                } else {
                                    g
                                }
                            })
                        })?
                    }
                };
                writeln!(out, "# {block} N={n} C={c} seed={seed}")?;
                write!(out, "{report}")?;
                all_pass &= report.passed();
            }
        }
    }
    writeln!(out, "result: {}", if all_pass { "pass" } else { "FAIL" })?;
    Ok(status(all_pass))
}

fn bench_cells(a: &BenchArgs) -> Result<(Vec<Cell>, usize)> {
    let methods: Vec<Method> = match &a.methods {
        Some(m) => parse_list(m, "method")?,
        None => Method::ALL.to_vec(),
    };
    let (default_ns, default_cs, default_d, default_trials): (Vec<u64>, Vec<u64>, u64, usize) =
        match a.grid {
            GridPreset::Default => (
                bench::DEFAULT_NS.to_vec(),
                bench::DEFAULT_CS.to_vec(),
                bench::DEFAULT_LATENT,
                bench::DEFAULT_TRIALS,
            ),
            GridPreset::Tiny => (vec![32, 64, 128, 256, 512], vec![16], 8, 3),
        };
    let ns = match &a.ns {
        Some(s) => parse_list(s, "N")?,
        None => default_ns,
    };
    let cs = match &a.cs {
        Some(s) => parse_list(s, "C")?,
        None => default_cs,
    };
    if ns.iter().chain(&cs).any(|v| *v == 0) {
        return Err(Error::Config("N and C must be positive".into()));
    }
    let latent = a.latent.unwrap_or(default_d);
    if latent == 0 && methods.contains(&Method::LatentGnn) {
        return Err(Error::Config(
            "--latent must be positive for latentgnn".into(),
        ));
    }
    Ok((
        bench::grid(&methods, &ns, &cs, latent),
        a.trials.unwrap_or(default_trials),
    ))
}

fn run_bench_typed<T: Scalar>(cells: &[Cell], opts: &BenchOptions) -> Result<bench::BenchOutcome> {
    bench::run_bench(&Registry::<T>::builtin(), cells, opts)
}

fn model_mismatches(records: &[BenchRecord]) -> Vec<String> {
    records
        .iter()
        .filter_map(|r| {
            let cell = Cell::new(r.method, r.n, r.c, r.d);
            (r.flops != cell.flops() || r.peak_elems != cell.peak_elems()).then(|| {
                format!(
                    "{} N={} C={} d={}: flops {} (model {}), peak {} (model {})",
                    r.method,
                    r.n,
                    r.c,
                    r.d,
                    r.flops,
                    cell.flops(),
                    r.peak_elems,
                    cell.peak_elems()
                )
            })
        })
        .collect()
}

pub fn cmd_bench(a: &BenchArgs, out: &mut dyn Write) -> Result<i32> {
    let (cells, trials) = bench_cells(a)?;
    let opts = BenchOptions {
        trials,
        warmup: a.warmup,
        seed: a.common.seed,
        byte_budget: a.byte_budget,
    };
    let dtype = a.common.dtype.unwrap_or(Dtype::F32);
    let outcome = match dtype {
        Dtype::F32 => run_bench_typed::<f32>(&cells, &opts)?,
        Dtype::F64 => run_bench_typed::<f64>(&cells, &opts)?,
    };
    let prefix = a.common.out.clone().unwrap_or_else(|| "bench".into());
    let csv_path = PathBuf::from(format!("{prefix}.csv"));
    let svg_path = PathBuf::from(format!("{prefix}.svg"));

    let mut fits = Vec::new();
    let mut pairs: Vec<(Method, u64)> = outcome.records.iter().map(|r| (r.method, r.c)).collect();
    pairs.sort();
    pairs.dedup();
    for (m, c) in pairs {
        match bench::fit_slope(&outcome.records, m, c) {
            Ok(f) => {
                writeln!(
                    out,
                    "{:<9} C={:<5} exponent {:.3} (r2 {:.4}, {} points)",
                    m.label(),
                    c,
                    f.exponent,
                    f.r2,
                    f.points
                )?;
                fits.push(f);
            }
            Err(e) => writeln!(out, "{:<9} C={:<5} no fit: {e}", m.label(), c)?,
        }
    }
    for s in &outcome.skipped {
        writeln!(
            out,
            "skipped {} N={} C={} d={}: {}",
            s.cell.method, s.cell.n, s.cell.c, s.cell.d, s.reason
        )?;
    }

    write_file(&csv_path, &bench::emit_csv(&outcome.records)?)?;
    write_file(
        &svg_path,
        bench::emit_svg(&outcome.records, &fits).as_bytes(),
    )?;
    writeln!(
        out,
        "wrote {} and {} ({} records, dtype {})",
        csv_path.display(),
        svg_path.display(),
        outcome.records.len(),
        match dtype {
            Dtype::F32 => f32::NAME,
            Dtype::F64 => f64::NAME,
        }
    )?;

    let mismatches = model_mismatches(&outcome.records);
    for m in &mismatches {
        writeln!(out, "model mismatch: {m}")?;
    }
    Ok(status(mismatches.is_empty()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn ones(c: usize) -> SquareWeights {
    SquareWeights::new(Matrix::filled(c, c, 1.0)).expect("square")
}

pub fn cmd_oracle(a: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    require_f64(&a.common, "oracle")?;
    if a.n == 0 || a.c == 0 {
        return Err(Error::Config("--n and --c must be positive".into()));
    }
    let tensor = match a.block {
        OracleBlock::Nl => {
            let p = if a.unit_weights {
                NlParams::new(ones(a.c), ones(a.c))?
            } else {
                NlParams::init(a.c, a.common.seed)?
            };
            build_w3_nl_with_cap(&p.wf, &p.wg, a.n, a.cap)?
        }
        OracleBlock::Polynl => {
            let p = if a.unit_weights {
                PolyNlParams::new(ones(a.c), ones(a.c), ones(a.c), 1.0, 0.0)?
            } else {
                PolyNlParams::init(a.c, a.common.seed)?
            };
            build_w3_polynl_with_cap(&p.w1, &p.w2, &p.w3, a.n, a.cap)?
        }
    };
    let prefix = a.common.out.clone().unwrap_or_else(|| "oracle".into());
    let path = PathBuf::from(format!("{prefix}.w3.txt"));
    let mut buf = Vec::new();
    tensor.write_text(&mut buf)?;
    write_file(&path, &buf)?;
    writeln!(
        out,
        "wrote {}: N={} C={} entries={} nonzero={}",
        path.display(),
        a.n,
        a.c,
        tensor.data().len(),
        tensor.nonzero_count()
    )?;
    Ok(EXIT_OK)
}
