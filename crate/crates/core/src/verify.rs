//! Seeded equivalence suites.
//!
//! Every instance derives all of its sizes and values from a single instance
//! seed, so a failure can be replayed from that seed alone.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::blocks::{
    efficient_nl_forward, latentgnn_forward, nl_forward, polynl_core_forward, LatentGnnParams,
    NlParams, PolyNlParams,
};
use crate::error::{Error, Result};
use crate::oracle::{
    build_w3_nl, build_w3_polynl, nl_elementwise, poly3_elementwise, poly3_forward,
    polynl_elementwise, DEFAULT_CAP,
};
use crate::rng::{instance_seed, seeded, uniform};
use crate::tensor::{Matrix, SquareWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// Cubic-polynomial oracle vs element-wise form vs matrix form, for NL and Poly-NL.
    OracleTriangle,
    /// Left-to-right NL vs its right-to-left reassociation.
    Reassociation,
    /// `forward(sX) = s³·forward(X)` for every core forward.
    Homogeneity,
    /// `forward(PX) = P·forward(X)` for row permutations `P`.
    Permutation,
}

impl Suite {
    pub const ALL: [Suite; 4] = [
        Suite::OracleTriangle,
        Suite::Reassociation,
        Suite::Homogeneity,
        Suite::Permutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::OracleTriangle => "oracle-triangle",
            Suite::Reassociation => "reassociation",
            Suite::Homogeneity => "homogeneity",
            Suite::Permutation => "permutation",
        }
    }

    pub fn default_instances(self) -> usize {
        match self {
            Suite::OracleTriangle => 100,
            _ => 50,
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            Suite::OracleTriangle | Suite::Reassociation => 1e-10,
            Suite::Homogeneity | Suite::Permutation => 1e-12,
        }
    }

    fn tag(self) -> u64 {
        match self {
            Suite::OracleTriangle => 1,
            Suite::Reassociation => 2,
            Suite::Homogeneity => 3,
            Suite::Permutation => 4,
        }
    }

    /// Seed of instance `index` under `base`.
    pub fn instance_seed(self, base: u64, index: usize) -> u64 {
        instance_seed(base ^ (self.tag() << 56), index as u64)
    }

    /// Runs one instance and returns `(N, C, max relative error)`.
    pub fn run_instance(self, seed: u64) -> Result<Instance> {
        let mut rng = seeded(seed);
        match self {
            Suite::OracleTriangle => oracle_triangle(&mut rng),
            Suite::Reassociation => reassociation(&mut rng),
            Suite::Homogeneity => homogeneity(&mut rng),
            Suite::Permutation => permutation(&mut rng),
        }
        .map(|(n, c, err)| Instance { seed, n, c, err })
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Instance {
    pub seed: u64,
    pub n: usize,
    pub c: usize,
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub suite: Suite,
    pub instances: usize,
    pub max_err: f64,
    pub tolerance: f64,
    /// First instance whose error exceeded the tolerance.
    pub failure: Option<Instance>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Runs `count` instances of `suite` derived from `base_seed`.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn run_suite(
    suite: Suite,
    base_seed: u64,
    count: usize,
    tolerance: f64,
) -> Result<SuiteResult> {
    let mut result = SuiteResult {
        suite,
        instances: count,
        max_err: 0.0,
        tolerance,
        failure: None,
    };
    for i in 0..count {
        let inst = suite.run_instance(suite.instance_seed(base_seed, i))?;
        result.max_err = result.max_err.max(inst.err);
        // `!(a <= b)` so that a NaN error also fails.
        if result.failure.is_none() && !(inst.err <= tolerance) {
            result.failure = Some(inst);
        }
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub results: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(SuiteResult::passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verify seed={}", self.seed)?;
        writeln!(
            f,
            "{:<16} {:>9} {:>10} {:>10}  status",
            "suite", "instances", "max_err", "tolerance"
        )?;
        for r in &self.results {
            writeln!(
                f,
                "{:<16} {:>9} {:>10.3e} {:>10.1e}  {}",
                r.suite.name(),
                r.instances,
                r.max_err,
                r.tolerance,
                if r.passed() { "pass" } else { "FAIL" }
            )?;
            if let Some(inst) = &r.failure {
                writeln!(
                    f,
                    "  first failure: instance seed {} (N={}, C={}) error {:.3e}",
                    inst.seed, inst.n, inst.c, inst.err
                )?;
                writeln!(
                    f,
                    "  replay: polynl verify --suite {} --replay {} --tolerance {:e}",
                    r.suite.name(),
                    inst.seed,
                    r.tolerance
                )?;
            }
        }
        writeln!(f, "result: {}", if self.passed() { "pass" } else { "FAIL" })
    }
}

/// Runs every suite with its default instance count. `tolerance` overrides
/// the per-suite tolerances when given.
pub fn run_all(base_seed: u64, tolerance: Option<f64>) -> Result<VerifyReport> {
    let results = Suite::ALL
        .into_iter()
        .map(|s| {
            run_suite(
                s,
                base_seed,
                s.default_instances(),
                tolerance.unwrap_or(s.default_tolerance()),
            )
        })
        .collect::<Result<_>>()?;
    Ok(VerifyReport {
        seed: base_seed,
        results,
    })
}

fn square(rng: &mut ChaCha8Rng, c: usize) -> SquareWeights {
    SquareWeights::new(uniform(rng, c, c, 1.0)).expect("square by construction")
}

fn nl_params(rng: &mut ChaCha8Rng, c: usize) -> NlParams {
    let wf = square(rng, c);
    let wg = square(rng, c);
    NlParams::new(wf, wg).expect("shared dim")
}

fn polynl_params(rng: &mut ChaCha8Rng, c: usize) -> PolyNlParams {
    let w1 = square(rng, c);
    let w2 = square(rng, c);
    let w3 = square(rng, c);
    PolyNlParams::new(w1, w2, w3, 1.0, 1.0).expect("shared dim")
}

/// Largest pairwise relative error among `paths`.
fn spread(paths: &[Matrix]) -> Result<f64> {
    let mut worst = 0.0f64;
    for (i, a) in paths.iter().enumerate() {
        for b in &paths[i + 1..] {
            worst = worst.max(a.rel_err(b)?).max(b.rel_err(a)?);
        }
    }
    Ok(worst)
}

fn oracle_triangle(rng: &mut ChaCha8Rng) -> Result<(usize, usize, f64)> {
    let n = rng.gen_range(1..=DEFAULT_CAP);
    let c = rng.gen_range(1..=DEFAULT_CAP / n);
    let x = uniform(rng, n, c, 1.0);

    let nl = nl_params(rng, c);
    let w3_nl = build_w3_nl(&nl.wf, &nl.wg, n)?;
    let nl_err = spread(&[
        poly3_elementwise(&w3_nl, &x)?,
        poly3_forward(&w3_nl, &x)?,
        nl_elementwise(&nl.wf, &nl.wg, &x)?,
        nl_forward(&nl, &x)?,
    ])?;

    let poly = polynl_params(rng, c);
    let w3_poly = build_w3_polynl(&poly.w1, &poly.w2, &poly.w3, n)?;
    let poly_err = spread(&[
        poly3_elementwise(&w3_poly, &x)?,
        poly3_forward(&w3_poly, &x)?,
        polynl_elementwise(&poly.w1, &poly.w2, &poly.w3, &x)?,
        polynl_core_forward(&poly, &x)?,
    ])?;

    Ok((n, c, nl_err.max(poly_err)))
}

fn reassociation(rng: &mut ChaCha8Rng) -> Result<(usize, usize, f64)> {
    let n = rng.gen_range(1..=256);
    let c = rng.gen_range(1..=32);
    let x = uniform(rng, n, c, 1.0);
    let p = nl_params(rng, c);
    let err = efficient_nl_forward(&p, &x)?.rel_err(&nl_forward(&p, &x)?)?;
    Ok((n, c, err))
}

fn homogeneity(rng: &mut ChaCha8Rng) -> Result<(usize, usize, f64)> {
    let n = rng.gen_range(1..=32);
    let c = rng.gen_range(1..=8);
    let d = rng.gen_range(1..=4);
    let x = uniform(rng, n, c, 1.0);
    let s: f64 = rng.gen_range(0.5..2.0);
    let s3 = s * s * s;
    let sx = x.scale(s);

    let nl = nl_params(rng, c);
    let poly = polynl_params(rng, c);
    let latent = LatentGnnParams::random(rng, c, d)?;

    let pairs = [
        (nl_forward(&nl, &sx)?, nl_forward(&nl, &x)?),
        (
            efficient_nl_forward(&nl, &sx)?,
            efficient_nl_forward(&nl, &x)?,
        ),
        (
            polynl_core_forward(&poly, &sx)?,
            polynl_core_forward(&poly, &x)?,
        ),
        (
            latentgnn_forward(&latent, &sx)?,
            latentgnn_forward(&latent, &x)?,
        ),
    ];
    let mut worst = 0.0f64;
    for (scaled, base) in &pairs {
        worst = worst.max(scaled.rel_err(&base.scale(s3))?);
    }
    Ok((n, c, worst))
}

fn permutation(rng: &mut ChaCha8Rng) -> Result<(usize, usize, f64)> {
    let n = rng.gen_range(1..=32);
    let c = rng.gen_range(1..=8);
    let x = uniform(rng, n, c, 1.0);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let px = x.permute_rows(&perm)?;

    let nl = nl_params(rng, c);
    let poly = polynl_params(rng, c);
    let nl_err = nl_forward(&nl, &px)?.rel_err(&nl_forward(&nl, &x)?.permute_rows(&perm)?)?;
    let poly_err = polynl_core_forward(&poly, &px)?
        .rel_err(&polynl_core_forward(&poly, &x)?.permute_rows(&perm)?)?;
    Ok((n, c, nl_err.max(poly_err)))
}
