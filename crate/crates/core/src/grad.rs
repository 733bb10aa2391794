//! Hand-derived backward passes for the NL and Poly-NL residual blocks and a
//! central-difference checker for them.
//!
//! Both backward passes return the gradient of the scalar `⟨U, Z⟩` where `Z`
//! is the residual output and `U` an upstream gradient of the same shape.

use std::fmt;

use rand::Rng;

use crate::blocks::{polynl_core_forward, residual_nl, residual_polynl, NlParams, PolyNlParams};
use crate::error::{Error, Result};
use crate::rng;
use crate::tensor::{hadamard, matmul, pool_expand, FeatureMap, Matrix, SquareWeights};

/// Gradients of one block, keyed by parameter name. Scalars are stored as
/// `1 × 1` matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct GradBundle {
    pub d_x: Matrix,
    pub params: Vec<(&'static str, Matrix)>,
}

impl GradBundle {
    pub fn get(&self, name: &str) -> Option<&Matrix> {
        if name == "x" {
            return Some(&self.d_x);
        }
        self.params.iter().find(|(n, _)| *n == name).map(|(_, m)| m)
    }

    /// `("x", d_x)` followed by the parameter gradients.
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &Matrix)> {
        std::iter::once(("x", &self.d_x)).chain(self.params.iter().map(|(n, m)| (*n, m)))
    }

    pub fn scale(&self, s: f64) -> GradBundle {
        GradBundle {
            d_x: self.d_x.scale(s),
            params: self.params.iter().map(|(n, m)| (*n, m.scale(s))).collect(),
        }
    }
}

fn expect_same(op: &'static str, x: &Matrix, upstream: &Matrix, c: usize) -> Result<()> {
    if x.cols() != c || upstream.shape() != x.shape() {
        return Err(Error::shape(
            op,
            format!(
                "block has {c} channels, input {}×{}, upstream {}×{}",
                x.rows(),
                x.cols(),
                upstream.rows(),
                upstream.cols()
            ),
        ));
    }
    Ok(())
}

fn scalar(v: f64) -> Matrix {
    Matrix::filled(1, 1, v)
}

/// Gradients of `⟨U, Y + X⟩` with `Y = X·W_f·Xᵀ·X·W_g`.
pub fn nl_backward(p: &NlParams, x: &FeatureMap, upstream: &FeatureMap) -> Result<GradBundle> {
    expect_same("nl_backward", x, upstream, p.channels())?;
    let wf = p.wf.matrix();
    let wg = p.wg.matrix();
    let xt = x.transpose();

    let query = matmul(x, wf)?;
    let sim = matmul(&query, &xt)?;
    let agg = matmul(&sim, x)?;

    let d_wg = matmul(&agg.transpose(), upstream)?;
    let d_agg = matmul(upstream, &wg.transpose())?;
    let d_sim = matmul(&d_agg, &xt)?;
    let d_query = matmul(&d_sim, x)?;
    let d_wf = matmul(&xt, &d_query)?;

    let d_x = upstream
        .add(&matmul(&sim.transpose(), &d_agg)?)?
        .add(&matmul(&d_sim.transpose(), &query)?)?
        .add(&matmul(&d_query, &wf.transpose())?)?;

    Ok(GradBundle {
        d_x,
        params: vec![("wf", d_wf), ("wg", d_wg)],
    })
}

/// Gradients of `⟨U, αX + βY⟩` with `Y = (Φ(X·W1 ⊙ X·W2) ⊙ X)·W3`.
///
/// `Φ = (1/N)·𝟙𝟙ᵀ` is symmetric, so its adjoint is `Φ` again.
pub fn polynl_backward(
    p: &PolyNlParams,
    x: &FeatureMap,
    upstream: &FeatureMap,
) -> Result<GradBundle> {
    expect_same("polynl_backward", x, upstream, p.channels())?;
    let (w1, w2, w3) = (p.w1.matrix(), p.w2.matrix(), p.w3.matrix());
    let xt = x.transpose();

    let left = matmul(x, w1)?;
    let right = matmul(x, w2)?;
    let pooled = pool_expand(&hadamard(&left, &right)?);
    let gated = hadamard(&pooled, x)?;
    let core = matmul(&gated, w3)?;

    let d_alpha = upstream.dot(x)?;
    let d_beta = upstream.dot(&core)?;

    let d_core = upstream.scale(p.beta);
    let d_w3 = matmul(&gated.transpose(), &d_core)?;
    let d_gated = matmul(&d_core, &w3.transpose())?;
    let d_pooled = hadamard(&d_gated, x)?;
    let d_product = pool_expand(&d_pooled);
    let d_left = hadamard(&d_product, &right)?;
    let d_right = hadamard(&d_product, &left)?;
    let d_w1 = matmul(&xt, &d_left)?;
    let d_w2 = matmul(&xt, &d_right)?;

    let d_x = upstream
        .scale(p.alpha)
        .add(&hadamard(&d_gated, &pooled)?)?
        .add(&matmul(&d_left, &w1.transpose())?)?
        .add(&matmul(&d_right, &w2.transpose())?)?;

    Ok(GradBundle {
        d_x,
        params: vec![
            ("w1", d_w1),
            ("w2", d_w2),
            ("w3", d_w3),
            ("alpha", scalar(d_alpha)),
            ("beta", scalar(d_beta)),
        ],
    })
}

/// Central differences `(f(θ + h·eᵢ) − f(θ − h·eᵢ)) / 2h` for every coordinate.
pub fn finite_diff(f: impl Fn(&[f64]) -> f64, point: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::Config(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    let mut probe = point.to_vec();
    let mut grad = Vec::with_capacity(point.len());
    for i in 0..point.len() {
        let orig = probe[i];
        probe[i] = orig + step;
        let plus = f(&probe);
        probe[i] = orig - step;
        let minus = f(&probe);
        probe[i] = orig;
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::numeric(
                "finite_diff",
                format!("non-finite evaluation at coordinate {i}"),
            ));
        }
        grad.push((plus - minus) / (2.0 * step));
    }
    Ok(grad)
}

/// Step and pass criteria for a gradient check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckConfig {
    pub step: f64,
    pub tolerance: f64,
    pub abs_floor: f64,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            step: 1e-5,
            tolerance: 1e-6,
            abs_floor: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckRow {
    pub name: &'static str,
    pub max_rel: f64,
    pub max_abs: f64,
    pub pass: bool,
}

/// Per-parameter discrepancies between analytic and numeric gradients.
///
/// An entry is accepted when its relative error is within `tolerance` or its
/// absolute error is within `abs_floor`; a row passes when all its entries do.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub block: String,
    pub rows: Vec<GradCheckRow>,
}

impl GradCheckReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&GradCheckRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    pub fn max_rel(&self) -> f64 {
        self.rows.iter().map(|r| r.max_rel).fold(0.0, f64::max)
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(
                f,
                "{:<6} {:.3e} {:.3e} {}",
                r.name,
                r.max_rel,
                r.max_abs,
                if r.pass { "pass" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}

fn compare(
    name: &'static str,
    analytic: &Matrix,
    numeric: &[f64],
    cfg: &GradCheckConfig,
) -> GradCheckRow {
    let mut row = GradCheckRow {
        name,
        max_rel: 0.0,
        max_abs: 0.0,
        pass: analytic.len() == numeric.len(),
    };
    for (&a, &n) in analytic.data().iter().zip(numeric) {
        let abs = (a - n).abs();
        let scale = a.abs().max(n.abs());
        let rel = if scale == 0.0 { 0.0 } else { abs / scale };
        row.max_abs = row.max_abs.max(abs);
        row.max_rel = row.max_rel.max(rel);
        if !(rel <= cfg.tolerance || abs <= cfg.abs_floor) {
            row.pass = false;
        }
    }
    row
}

fn rebuild(shape: (usize, usize), v: &[f64]) -> Matrix {
    Matrix::from_vec(shape.0, shape.1, v.to_vec()).expect("perturbed copy keeps its shape")
}

fn rebuild_square(dim: usize, v: &[f64]) -> SquareWeights {
    SquareWeights::new(rebuild((dim, dim), v)).expect("square by construction")
}

/// Probes `⟨U, forward(θ)⟩` numerically for one parameter and compares with
/// the analytic gradient.
fn probe_param(
    name: &'static str,
    analytic: &Matrix,
    point: &[f64],
    loss: impl Fn(&[f64]) -> Result<f64>,
    cfg: &GradCheckConfig,
) -> Result<GradCheckRow> {
    let numeric = finite_diff(|v| loss(v).unwrap_or(f64::NAN), point, cfg.step)?;
    Ok(compare(name, analytic, &numeric, cfg))
}

fn missing(name: &str) -> Error {
    Error::shape(
        "gradcheck",
        format!("backward produced no gradient for {name:?}"),
    )
}

pub fn check_nl(
    p: &NlParams,
    x: &FeatureMap,
    upstream: &FeatureMap,
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport> {
    check_nl_with(p, x, upstream, cfg, nl_backward)
}

/// Like [`check_nl`] but with a caller-supplied backward pass.
pub fn check_nl_with(
    p: &NlParams,
    x: &FeatureMap,
    upstream: &FeatureMap,
    cfg: &GradCheckConfig,
    backward: impl Fn(&NlParams, &FeatureMap, &FeatureMap) -> Result<GradBundle>,
) -> Result<GradCheckReport> {
    let grads = backward(p, x, upstream)?;
    let c = p.channels();
    let loss = |q: &NlParams, xv: &Matrix| residual_nl(q, xv).and_then(|z| upstream.dot(&z));
    let mut rows = Vec::new();

    rows.push(probe_param(
        "x",
        grads.get("x").ok_or_else(|| missing("x"))?,
        x.data(),
        |v| loss(p, &rebuild(x.shape(), v)),
        cfg,
    )?);
    rows.push(probe_param(
        "wf",
        grads.get("wf").ok_or_else(|| missing("wf"))?,
        p.wf.matrix().data(),
        |v| {
            loss(
                &NlParams {
                    wf: rebuild_square(c, v),
                    ..p.clone()
                },
                x,
            )
        },
        cfg,
    )?);
    rows.push(probe_param(
        "wg",
        grads.get("wg").ok_or_else(|| missing("wg"))?,
        p.wg.matrix().data(),
        |v| {
            loss(
                &NlParams {
                    wg: rebuild_square(c, v),
                    ..p.clone()
                },
                x,
            )
        },
        cfg,
    )?);

    Ok(GradCheckReport {
        block: "nl".into(),
        rows,
    })
}

pub fn check_polynl(
    p: &PolyNlParams,
    x: &FeatureMap,
    upstream: &FeatureMap,
    cfg: &GradCheckConfig,
) -> Result<GradCheckReport> {
    check_polynl_with(p, x, upstream, cfg, polynl_backward)
}

/// Like [`check_polynl`] but with a caller-supplied backward pass.
pub fn check_polynl_with(
    p: &PolyNlParams,
    x: &FeatureMap,
    upstream: &FeatureMap,
    cfg: &GradCheckConfig,
    backward: impl Fn(&PolyNlParams, &FeatureMap, &FeatureMap) -> Result<GradBundle>,
) -> Result<GradCheckReport> {
    let grads = backward(p, x, upstream)?;
    let c = p.channels();
    let loss =
        |q: &PolyNlParams, xv: &Matrix| residual_polynl(q, xv).and_then(|z| upstream.dot(&z));
    let get = |name: &'static str| grads.get(name).ok_or_else(|| missing(name));
    let mut rows = Vec::new();

    rows.push(probe_param(
        "x",
        get("x")?,
        x.data(),
        |v| loss(p, &rebuild(x.shape(), v)),
        cfg,
    )?);
    rows.push(probe_param(
        "w1",
        get("w1")?,
        p.w1.matrix().data(),
        |v| {
            loss(
                &PolyNlParams {
                    w1: rebuild_square(c, v),
                    ..p.clone()
                },
                x,
            )
        },
        cfg,
    )?);
    rows.push(probe_param(
        "w2",
        get("w2")?,
        p.w2.matrix().data(),
        |v| {
            loss(
                &PolyNlParams {
                    w2: rebuild_square(c, v),
                    ..p.clone()
                },
                x,
            )
        },
        cfg,
    )?);
    rows.push(probe_param(
        "w3",
        get("w3")?,
        p.w3.matrix().data(),
        |v| {
            loss(
                &PolyNlParams {
                    w3: rebuild_square(c, v),
                    ..p.clone()
                },
                x,
            )
        },
        cfg,
    )?);
    rows.push(probe_param(
        "alpha",
        get("alpha")?,
        &[p.alpha],
        |v| {
            loss(
                &PolyNlParams {
                    alpha: v[0],
                    ..p.clone()
                },
                x,
            )
        },
        cfg,
    )?);
    rows.push(probe_param(
        "beta",
        get("beta")?,
        &[p.beta],
        |v| {
            loss(
                &PolyNlParams {
                    beta: v[0],
                    ..p.clone()
                },
                x,
            )
        },
        cfg,
    )?);

    Ok(GradCheckReport {
        block: "polynl".into(),
        rows,
    })
}

/// Core outputs used by the α/β identities: `(⟨U, X⟩, ⟨U, Y_core⟩)`.
pub fn polynl_residual_inner_products(
    p: &PolyNlParams,
    x: &FeatureMap,
    upstream: &FeatureMap,
) -> Result<(f64, f64)> {
    Ok((upstream.dot(x)?, upstream.dot(&polynl_core_forward(p, x)?)?))
}

/// Seeded NL check case: weights uniform in `[−1/√C, 1/√C]`, unit-RMS input
/// and upstream gradient.
pub fn nl_case(seed: u64, n: usize, c: usize) -> (NlParams, FeatureMap, FeatureMap) {
    let mut rng = rng::seeded(seed);
    let bound = 1.0 / (c as f64).sqrt();
    let wf = SquareWeights::new(rng::uniform(&mut rng, c, c, bound)).expect("square");
    let wg = SquareWeights::new(rng::uniform(&mut rng, c, c, bound)).expect("square");
    let x = rng::unit_rms(&mut rng, n, c);
    let u = rng::unit_rms(&mut rng, n, c);
    (NlParams::new(wf, wg).expect("shared dim"), x, u)
}

/// Seeded Poly-NL check case. `α` and `β` are drawn from `[0.5, 1.5)` so that
/// every parameter influences the output.
pub fn polynl_case(seed: u64, n: usize, c: usize) -> (PolyNlParams, FeatureMap, FeatureMap) {
    let mut rng = rng::seeded(seed);
    let bound = 1.0 / (c as f64).sqrt();
    let mut w = || SquareWeights::new(rng::uniform(&mut rng, c, c, bound)).expect("square");
    let (w1, w2, w3) = (w(), w(), w());
    let alpha = rng.gen_range(0.5..1.5);
    let beta = rng.gen_range(0.5..1.5);
    let x = rng::unit_rms(&mut rng, n, c);
    let u = rng::unit_rms(&mut rng, n, c);
    (
        PolyNlParams::new(w1, w2, w3, alpha, beta).expect("shared dim"),
        x,
        u,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use rand::Rng;

    fn one() -> SquareWeights {
        SquareWeights::identity(1)
    }

    fn random_nl(seed: u64, n: usize, c: usize) -> (NlParams, Matrix, Matrix) {
        nl_case(seed, n, c)
    }

    fn random_polynl(seed: u64, n: usize, c: usize) -> (PolyNlParams, Matrix, Matrix) {
        polynl_case(seed, n, c)
    }

    #[test]
    fn polynl_scalar_cubic() {
        let p = PolyNlParams::new(one(), one(), one(), 0.0, 1.0).unwrap();
        let x = Matrix::from_rows(&[[2.0]]).unwrap();
        let u = Matrix::from_rows(&[[1.0]]).unwrap();
        let g = polynl_backward(&p, &x, &u).unwrap();
        assert_eq!(g.d_x.data(), &[12.0]);
    }

    #[test]
    fn nl_scalar_with_residual() {
        let p = NlParams::new(one(), one()).unwrap();
        let x = Matrix::from_rows(&[[2.0]]).unwrap();
        let u = Matrix::from_rows(&[[1.0]]).unwrap();
        let g = nl_backward(&p, &x, &u).unwrap();
        assert_eq!(g.d_x.data(), &[13.0]);
        assert_eq!(g.get("wf").unwrap().data(), &[8.0]);
        assert_eq!(g.get("wg").unwrap().data(), &[8.0]);
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let (p, x, u) = random_polynl(1, 4, 3);
        let zero = Matrix::zeros(u.rows(), u.cols());
        for (_, m) in polynl_backward(&p, &x, &zero).unwrap().iter() {
            assert!(m.data().iter().all(|v| *v == 0.0));
        }
        let (p, x, _) = random_nl(2, 4, 3);
        for (_, m) in nl_backward(&p, &x, &zero).unwrap().iter() {
            assert!(m.data().iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn backward_shape_errors() {
        let (p, x, _) = random_nl(3, 4, 3);
        assert!(nl_backward(&p, &x, &Matrix::zeros(3, 3)).is_err());
        let (p, x, _) = random_polynl(4, 4, 3);
        assert!(polynl_backward(&p, &x, &Matrix::zeros(4, 2)).is_err());
    }

    #[test]
    fn polynl_matches_finite_differences() {
        let (p, x, u) = random_polynl(5, 5, 3);
        let report = check_polynl(&p, &x, &u, &GradCheckConfig::default()).unwrap();
        assert!(report.passed(), "{report}");
        assert!(report.max_rel() <= 1e-6, "{report}");
    }

    #[test]
    fn nl_matches_finite_differences() {
        let (p, x, u) = random_nl(6, 5, 3);
        let report = check_nl(&p, &x, &u, &GradCheckConfig::default()).unwrap();
        assert!(report.passed(), "{report}");
        assert!(report.max_rel() <= 1e-6, "{report}");
    }

    #[test]
    fn alpha_beta_are_inner_products() {
        let (p, x, u) = random_polynl(7, 6, 2);
        let g = polynl_backward(&p, &x, &u).unwrap();
        let (ux, uy) = polynl_residual_inner_products(&p, &x, &u).unwrap();
        assert_eq!(g.get("alpha").unwrap().data(), &[ux]);
        assert_eq!(g.get("beta").unwrap().data(), &[uy]);
    }

    #[test]
    fn linear_in_upstream() {
        let (p, x, u) = random_polynl(8, 5, 3);
        let single = polynl_backward(&p, &x, &u).unwrap().scale(2.0);
        let double = polynl_backward(&p, &x, &u.scale(2.0)).unwrap();
        for ((_, a), (_, b)) in single.iter().zip(double.iter()) {
            assert!(b.rel_err(a).unwrap() <= 1e-12);
        }
        let (p, x, u) = random_nl(9, 5, 3);
        let single = nl_backward(&p, &x, &u).unwrap().scale(2.0);
        let double = nl_backward(&p, &x, &u.scale(2.0)).unwrap();
        for ((_, a), (_, b)) in single.iter().zip(double.iter()) {
            assert!(b.rel_err(a).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn perturbed_backward_is_caught() {
        let (p, x, u) = random_nl(10, 5, 3);
        let report = check_nl_with(&p, &x, &u, &GradCheckConfig::default(), |p, x, u| {
            let mut g = nl_backward(p, x, u)?;
            g.params[0].1.data_mut()[0] += 1e-3;
            Ok(g)
        })
        .unwrap();
        assert!(!report.passed());
        assert!(!report.row("wf").unwrap().pass);
        assert!(report.row("wg").unwrap().pass);
    }

    #[test]
    fn finite_diff_quadratic() {
        let g = finite_diff(|t| t[0] * t[0], &[3.0], 1e-5).unwrap();
        assert!((g[0] - 6.0).abs() <= 1e-9);
    }

    #[test]
    fn finite_diff_constant() {
        let g = finite_diff(|_| 4.2, &[1.0, -2.0, 3.0], 1e-5).unwrap();
        assert_eq!(g, vec![0.0; 3]);
    }

    #[test]
    fn finite_diff_cubic_sum() {
        let mut rng = seeded(11);
        let theta: Vec<f64> = (0..6)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } * rng.gen_range(0.5..2.0))
            .collect();
        let g = finite_diff(|t| t.iter().map(|v| v * v * v).sum(), &theta, 1e-5).unwrap();
        for (gi, t) in g.iter().zip(&theta) {
            let exact = 3.0 * t * t;
            assert!((gi - exact).abs() <= 1e-7 * exact.abs(), "{gi} vs {exact}");
        }
    }

    #[test]
    fn finite_diff_errors() {
        assert!(matches!(
            finite_diff(|t| t[0], &[1.0], 0.0),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            finite_diff(
                |t| if t[0] > 1.0 { f64::INFINITY } else { 0.0 },
                &[1.0],
                1e-3
            ),
            Err(Error::Numeric { .. })
        ));
    }
}
