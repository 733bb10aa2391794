//! Release acceptance run. Prints one pass/fail line per criterion and
//! exits nonzero if any fails.

use std::time::{Duration, Instant};

use polynl::bench::{self, BenchOptions};
use polynl::blocks::{Method, Registry};
use polynl::cli;
use polynl::grad::{self, GradCheckConfig};
use polynl::rng::{instance_seed, DEFAULT_SEED};
use polynl::verify::{self, Suite};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn suite_check(suites: &[Suite], tol: f64, count: usize, budget: Option<Duration>) -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for &s in suites {
        match verify::run_suite(s, DEFAULT_SEED, count, tol) {
            Ok(r) => {
                pass &= r.passed() && r.instances == count;
                parts.push(format!("{} max_err {:.2e}", s.name(), r.max_err));
                if let Some(f) = r.failure {
                    parts.push(format!("first failure seed {} err {:.2e}", f.seed, f.err));
                }
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{}: {e}", s.name()));
            }
        }
    }
    let elapsed = start.elapsed();
    if let Some(b) = budget {
        pass &= elapsed < b;
    }
    parts.push(format!("{count} instances in {:.2?}", elapsed));
    outcome(pass, parts.join(", "))
}

fn oracle_triangle() -> Outcome {
    suite_check(
        &[Suite::OracleTriangle],
        1e-10,
        100,
        Some(Duration::from_secs(10)),
    )
}

fn reassociation() -> Outcome {
    suite_check(
        &[Suite::Reassociation],
        1e-10,
        50,
        Some(Duration::from_secs(30)),
    )
}

fn gradient_checks() -> Outcome {
    let start = Instant::now();
    let cfg = GradCheckConfig {
        step: 1e-5,
        tolerance: 1e-6,
        abs_floor: 1e-8,
    };
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut checks = 0;
    for (n, c) in [(5, 3), (8, 4)] {
        for k in 0..20 {
            let seed = instance_seed(DEFAULT_SEED, k);
            let reports = {
                let (p, x, u) = grad::nl_case(seed, n, c);
                let nl = grad::check_nl(&p, &x, &u, &cfg);
                let (p, x, u) = grad::polynl_case(seed, n, c);
                let poly = grad::check_polynl(&p, &x, &u, &cfg);
                [nl, poly]
            };
            for r in reports {
                checks += 1;
                match r {
                    Ok(r) => {
                        worst = worst.max(r.max_rel());
                        if !r.passed() {
                            failures.push(format!("{} N={n} C={c} seed={seed}", r.block));
                        }
                    }
                    Err(e) => failures.push(e.to_string()),
                }
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && checks == 80 && elapsed < Duration::from_secs(60);
    let mut detail = format!("{checks} checks, worst rel {worst:.2e}, {:.2?}", elapsed);
    if !failures.is_empty() {
        detail.push_str(&format!(", failed: {}", failures.join("; ")));
    }
    outcome(pass, detail)
}

fn homogeneity_permutation() -> Outcome {
    suite_check(&[Suite::Homogeneity, Suite::Permutation], 1e-12, 50, None)
}

fn complexity_separation() -> Outcome {
    let start = Instant::now();
    let cells = bench::grid(
        &Method::ALL,
        &bench::DEFAULT_NS,
        &[64],
        bench::DEFAULT_LATENT,
    );
    let opts = BenchOptions {
        trials: bench::DEFAULT_TRIALS,
        warmup: 2,
        seed: DEFAULT_SEED,
        byte_budget: bench::DEFAULT_BYTE_BUDGET,
    };
    let out = match bench::run_bench(&Registry::<f32>::builtin(), &cells, &opts) {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("sweep failed: {e}")),
    };
    let elapsed = start.elapsed();
    let mut pass = elapsed < Duration::from_secs(600);
    let mut parts = Vec::new();
    let bands = [
        (Method::Nl, 1.7, 2.3),
        (Method::PolyNl, 0.8, 1.3),
        (Method::Enl, 0.8, 1.3),
        (Method::LatentGnn, 0.8, 1.3),
    ];
    for (m, lo, hi) in bands {
        match bench::fit_slope(&out.records, m, 64) {
            Ok(f) => {
                let ok = (lo..=hi).contains(&f.exponent);
                pass &= ok;
                parts.push(format!(
                    "{} {:.3}{}",
                    m.label(),
                    f.exponent,
                    if ok { "" } else { " (out of band)" }
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{}: {e}", m.label()));
            }
        }
    }
    let peak_mismatch = out
        .records
        .iter()
        .filter(|r| r.peak_elems != bench::peak_model(r.method, r.n, r.c, r.d))
        .count();
    pass &= peak_mismatch == 0;
    let nl_skipped = out
        .skipped
        .iter()
        .any(|s| s.cell.method == Method::Nl && s.cell.n == 16384);
    pass &= nl_skipped;
    parts.push(format!("peak mismatches {peak_mismatch}"));
    parts.push(format!("skipped {}", out.skipped.len()));
    parts.push(format!("{:.1?}", elapsed));
    outcome(pass, parts.join(", "))
}

fn flop_exactness() -> Outcome {
    let ns = [32, 64, 128, 256, 512, 1024];
    let cells = bench::grid(&Method::ALL, &ns, &[16, 64], 8);
    let registry = Registry::<f64>::builtin();
    let mut bad = Vec::new();
    for cell in &cells {
        match bench::instrument_cell(&registry, cell, DEFAULT_SEED) {
            Ok(counts)
                if counts.flops == bench::flop_model(cell.method, cell.n, cell.c, cell.d) => {}
            Ok(counts) => bad.push(format!(
                "{} N={} C={}: {}",
                cell.method, cell.n, cell.c, counts.flops
            )),
            Err(e) => bad.push(e.to_string()),
        }
    }
    let detail = format!(
        "{} cells, {} mismatches {}",
        cells.len(),
        bad.len(),
        bad.join("; ")
    );
    outcome(bad.is_empty(), detail.trim_end())
}

fn capture(args: &[&str]) -> (i32, Vec<u8>) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run_with(
        std::iter::once("polynl").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    (code, out)
}

fn determinism() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for args in [
        &["verify", "--seed", "42"][..],
        &["gradcheck", "--seed", "42", "--seeds", "20"][..],
    ] {
        let a = capture(args);
        let b = capture(args);
        let same = a == b && a.0 == 0 && !a.1.is_empty();
        pass &= same;
        parts.push(format!(
            "{} {}",
            args[0],
            if same { "identical" } else { "differs" }
        ));
    }

    let cells = bench::tiny_grid(&Method::ALL);
    let opts = BenchOptions {
        trials: 2,
        warmup: 0,
        seed: DEFAULT_SEED,
        byte_budget: bench::DEFAULT_BYTE_BUDGET,
    };
    let roundtrip = bench::run_bench(&Registry::<f32>::builtin(), &cells, &opts).and_then(|o| {
        let bytes = bench::emit_csv(&o.records)?;
        let parsed = bench::parse_csv(&bytes)?;
        let again = bench::emit_csv(&parsed)?;
        Ok(parsed == o.records && again == bytes && o.records.len() == cells.len())
    });
    match roundtrip {
        Ok(ok) => {
            pass &= ok;
            parts.push(format!(
                "csv round-trip {}",
                if ok { "lossless" } else { "lossy" }
            ));
        }
        Err(e) => {
            pass = false;
            parts.push(format!("csv round-trip error: {e}"));
        }
    }
    outcome(pass, parts.join(", "))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("oracle triangle", oracle_triangle),
        ("reassociation", reassociation),
        ("gradient checks", gradient_checks),
        ("homogeneity and permutation", homogeneity_permutation),
        ("complexity separation", complexity_separation),
        ("flop model exactness", flop_exactness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {:<28} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
