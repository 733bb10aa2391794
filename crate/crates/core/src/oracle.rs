//! Ground-truth evaluators for the third-order polynomial layer.
//!
//! A purely cubic layer maps `X ∈ R^{N×C}` to
//!
//! ```text
//! y[a,b] = Σ_{c,e,g ∈ N} Σ_{d,f,h ∈ C} w[a,b,c,d,e,f,g,h] · x[c,d] · x[e,f] · x[g,h]
//! ```
//!
//! with an order-8 interaction tensor `w` of `(N·C)⁴` entries. Everything here
//! is deliberately naive: these loops are the reference the fast blocks are
//! checked against, so they stay literal transcriptions of the sums.

use std::io::Write;

use crate::error::{Error, Result};
use crate::tensor::{FeatureMap, Matrix, SquareWeights};

/// Largest `N·C` for which an interaction tensor may be built by default.
pub const DEFAULT_CAP: usize = 8;

/// A dense tensor of arbitrary order, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn from_vec(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::shape(
                "tensor",
                format!("shape {shape:?} needs {len} values, got {}", data.len()),
            ));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        DenseTensor {
            shape,
            data: vec![0.0; len],
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Reinterprets an order-2 tensor as a matrix.
    pub fn into_matrix(self) -> Result<Matrix> {
        match self.shape[..] {
            [r, c] => Matrix::from_vec(r, c, self.data),
            _ => Err(Error::shape(
                "tensor",
                format!("order-{} tensor is not a matrix", self.order()),
            )),
        }
    }
}

/// Contracts the trailing two indices of `w` against `x`:
/// `y[i₁..i_{k−2}] = Σ_{p,q} w[i₁..i_{k−2},p,q] · x[p,q]`.
pub fn double_dot(w: &DenseTensor, x: &Matrix) -> Result<DenseTensor> {
    let k = w.order();
    if k < 2 || w.shape[k - 2..] != [x.rows(), x.cols()] {
        return Err(Error::shape(
            "double_dot",
            format!(
                "tensor shape {:?} does not end in {}×{}",
                w.shape,
                x.rows(),
                x.cols()
            ),
        ));
    }
    let block = x.len();
    let out_shape = w.shape[..k - 2].to_vec();
    let data = w
        .data
        .chunks_exact(block)
        .map(|chunk| {
            let mut acc = 0.0;
            for (wv, xv) in chunk.iter().zip(x.data()) {
                acc += wv * xv;
            }
            acc
        })
        .collect();
    Ok(DenseTensor {
        shape: out_shape,
        data,
    })
}

/// The order-8 interaction tensor of a cubic layer on `N × C` inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct InteractionTensor3 {
    n: usize,
    c: usize,
    data: Vec<f64>,
}

impl InteractionTensor3 {
    pub fn zeros(n: usize, c: usize) -> Result<Self> {
        Self::zeros_with_cap(n, c, DEFAULT_CAP)
    }

    /// Refuses `N·C > cap`, since storage grows as `(N·C)⁴`.
    pub fn zeros_with_cap(n: usize, c: usize, cap: usize) -> Result<Self> {
        if n == 0 || c == 0 {
            return Err(Error::shape(
                "interaction tensor",
                "N and C must be positive",
            ));
        }
        let nc = n * c;
        if nc > cap {
            return Err(Error::Capacity { requested: nc, cap });
        }
        Ok(InteractionTensor3 {
            n,
            c,
            data: vec![0.0; nc.pow(4)],
        })
    }

    pub fn from_vec(n: usize, c: usize, data: Vec<f64>) -> Result<Self> {
        Self::from_vec_with_cap(n, c, data, DEFAULT_CAP)
    }

    pub fn from_vec_with_cap(n: usize, c: usize, data: Vec<f64>, cap: usize) -> Result<Self> {
        let mut t = Self::zeros_with_cap(n, c, cap)?;
        if data.len() != t.data.len() {
            return Err(Error::shape(
                "interaction tensor",
                format!("expected {} values, got {}", t.data.len(), data.len()),
            ));
        }
        t.data = data;
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[allow(clippy::too_many_arguments)]
    fn index(
        &self,
        a: usize,
        b: usize,
        c: usize,
        d: usize,
        e: usize,
        f: usize,
        g: usize,
        h: usize,
    ) -> usize {
        let (n, ch) = (self.n, self.c);
        ((((((a * ch + b) * n + c) * ch + d) * n + e) * ch + f) * n + g) * ch + h
    }

    #[allow(clippy::too_many_arguments)]
    pub fn get(
        &self,
        a: usize,
        b: usize,
        c: usize,
        d: usize,
        e: usize,
        f: usize,
        g: usize,
        h: usize,
    ) -> f64 {
        self.data[self.index(a, b, c, d, e, f, g, h)]
    }

    #[allow(clippy::too_many_arguments)]
    pub fn set(
        &mut self,
        a: usize,
        b: usize,
        c: usize,
        d: usize,
        e: usize,
        f: usize,
        g: usize,
        h: usize,
        v: f64,
    ) {
        let i = self.index(a, b, c, d, e, f, g, h);
        self.data[i] = v;
    }

    /// Number of entries that are not exactly zero.
    pub fn nonzero_count(&self) -> usize {
        self.data.iter().filter(|v| **v != 0.0).count()
    }

    pub fn to_dense(&self) -> DenseTensor {
        let (n, c) = (self.n, self.c);
        DenseTensor {
            shape: vec![n, c, n, c, n, c, n, c],
            data: self.data.clone(),
        }
    }

    /// Flat text dump: `"N C"` on the first line, then every entry in
    /// row-major order, one per line.
    pub fn write_text(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{} {}", self.n, self.c)?;
        for v in &self.data {
            writeln!(w, "{v:?}")?;
        }
        Ok(())
    }

    fn expect_input(&self, op: &'static str, x: &Matrix) -> Result<()> {
        if x.shape() != (self.n, self.c) {
            return Err(Error::shape(
                op,
                format!(
                    "tensor built for {}×{}, input is {}×{}",
                    self.n,
                    self.c,
                    x.rows(),
                    x.cols()
                ),
            ));
        }
        Ok(())
    }
}

/// `Y = ((W • X) • X) • X` by three successive contractions.
pub fn poly3_forward(w3: &InteractionTensor3, x: &FeatureMap) -> Result<FeatureMap> {
    w3.expect_input("poly3_forward", x)?;
    let t6 = double_dot(&w3.to_dense(), x)?;
    let t4 = double_dot(&t6, x)?;
    double_dot(&t4, x)?.into_matrix()
}

/// Literal eight-loop evaluation of the cubic layer. This is the root oracle.
pub fn poly3_elementwise(w3: &InteractionTensor3, x: &FeatureMap) -> Result<FeatureMap> {
    w3.expect_input("poly3_elementwise", x)?;
    let (n, ch) = (w3.n, w3.c);
    let mut y = Matrix::zeros(n, ch);
    for a in 0..n {
        for b in 0..ch {
            let mut acc = 0.0;
            for c in 0..n {
                for d in 0..ch {
                    for e in 0..n {
                        for f in 0..ch {
                            for g in 0..n {
                                for h in 0..ch {
                                    acc += w3.get(a, b, c, d, e, f, g, h)
                                        * x.get(c, d)
                                        * x.get(e, f)
                                        * x.get(g, h);
                                }
                            }
                        }
                    }
                }
            }
            y.set(a, b, acc);
        }
    }
    Ok(y)
}

/// The same sum with three independent inputs in the three slots, used to
/// test that the layer is linear in each slot separately.
pub fn poly3_trilinear(
    w3: &InteractionTensor3,
    x1: &FeatureMap,
    x2: &FeatureMap,
    x3: &FeatureMap,
) -> Result<FeatureMap> {
    for x in [x1, x2, x3] {
        w3.expect_input("poly3_trilinear", x)?;
    }
    let (n, ch) = (w3.n, w3.c);
    let mut y = Matrix::zeros(n, ch);
    for a in 0..n {
        for b in 0..ch {
            let mut acc = 0.0;
            for c in 0..n {
                for d in 0..ch {
                    for e in 0..n {
                        for f in 0..ch {
                            for g in 0..n {
                                for h in 0..ch {
                                    acc += w3.get(a, b, c, d, e, f, g, h)
                                        * x1.get(c, d)
                                        * x2.get(e, f)
                                        * x3.get(g, h);
                                }
                            }
                        }
                    }
                }
            }
            y.set(a, b, acc);
        }
    }
    Ok(y)
}

fn shared_dim(op: &'static str, weights: &[&SquareWeights]) -> Result<usize> {
    let c = weights[0].dim();
    if weights.iter().any(|w| w.dim() != c) {
        return Err(Error::shape(op, "weight matrices disagree on C"));
    }
    Ok(c)
}

/// Interaction tensor of the non-local block:
/// `w[a,b,c,d,e,f,g,h] = [c=a]·[g=e]·wf[d,f]·wg[h,b]`.
pub fn build_w3_nl(wf: &SquareWeights, wg: &SquareWeights, n: usize) -> Result<InteractionTensor3> {
    build_w3_nl_with_cap(wf, wg, n, DEFAULT_CAP)
}

pub fn build_w3_nl_with_cap(
    wf: &SquareWeights,
    wg: &SquareWeights,
    n: usize,
    cap: usize,
) -> Result<InteractionTensor3> {
    let ch = shared_dim("build_w3_nl", &[wf, wg])?;
    let mut t = InteractionTensor3::zeros_with_cap(n, ch, cap)?;
    for a in 0..n {
        for b in 0..ch {
            for d in 0..ch {
                for e in 0..n {
                    for f in 0..ch {
                        for h in 0..ch {
                            t.set(a, b, a, d, e, f, e, h, wf.get(d, f) * wg.get(h, b));
                        }
                    }
                }
            }
        }
    }
    Ok(t)
}

/// Interaction tensor of Poly-NL:
/// `w[a,b,c,d,e,f,g,h] = [c=a]·[g=e]·(1/N)·w1[h,d]·w2[f,d]·w3[d,b]`.
pub fn build_w3_polynl(
    w1: &SquareWeights,
    w2: &SquareWeights,
    w3m: &SquareWeights,
    n: usize,
) -> Result<InteractionTensor3> {
    build_w3_polynl_with_cap(w1, w2, w3m, n, DEFAULT_CAP)
}

pub fn build_w3_polynl_with_cap(
    w1: &SquareWeights,
    w2: &SquareWeights,
    w3m: &SquareWeights,
    n: usize,
    cap: usize,
) -> Result<InteractionTensor3> {
    let ch = shared_dim("build_w3_polynl", &[w1, w2, w3m])?;
    let mut t = InteractionTensor3::zeros_with_cap(n, ch, cap)?;
    let inv_n = 1.0 / n as f64;
    for a in 0..n {
        for b in 0..ch {
            for d in 0..ch {
                for e in 0..n {
                    for f in 0..ch {
                        for h in 0..ch {
                            let v = inv_n * w1.get(h, d) * w2.get(f, d) * w3m.get(d, b);
                            t.set(a, b, a, d, e, f, e, h, v);
                        }
                    }
                }
            }
        }
    }
    Ok(t)
}

fn expect_channels(op: &'static str, c: usize, x: &Matrix) -> Result<()> {
    if x.cols() != c {
        return Err(Error::shape(
            op,
            format!("weights are {c}×{c}, input has {} channels", x.cols()),
        ));
    }
    Ok(())
}

/// `y[a,b] = Σ_{d,f,h} Σ_e wf[d,f]·wg[h,b]·x[a,d]·x[e,f]·x[e,h]`.
pub fn nl_elementwise(
    wf: &SquareWeights,
    wg: &SquareWeights,
    x: &FeatureMap,
) -> Result<FeatureMap> {
    let ch = shared_dim("nl_elementwise", &[wf, wg])?;
    expect_channels("nl_elementwise", ch, x)?;
    let n = x.rows();
    let mut y = Matrix::zeros(n, ch);
    for a in 0..n {
        for b in 0..ch {
            let mut acc = 0.0;
            for d in 0..ch {
                for f in 0..ch {
                    for h in 0..ch {
                        for e in 0..n {
                            acc += wf.get(d, f)
                                * wg.get(h, b)
                                * x.get(a, d)
                                * x.get(e, f)
                                * x.get(e, h);
                        }
                    }
                }
            }
            y.set(a, b, acc);
        }
    }
    Ok(y)
}

/// `y[a,b] = Σ_{d,f,h} Σ_e (1/N)·w1[h,d]·w2[f,d]·w3[d,b]·x[a,d]·x[e,f]·x[e,h]`.
pub fn polynl_elementwise(
    w1: &SquareWeights,
    w2: &SquareWeights,
    w3m: &SquareWeights,
    x: &FeatureMap,
) -> Result<FeatureMap> {
    let ch = shared_dim("polynl_elementwise", &[w1, w2, w3m])?;
    expect_channels("polynl_elementwise", ch, x)?;
    let n = x.rows();
    let inv_n = 1.0 / n as f64;
    let mut y = Matrix::zeros(n, ch);
    for a in 0..n {
        for b in 0..ch {
            let mut acc = 0.0;
            for d in 0..ch {
                for f in 0..ch {
                    for h in 0..ch {
                        for e in 0..n {
                            acc += inv_n
                                * w1.get(h, d)
                                * w2.get(f, d)
                                * w3m.get(d, b)
                                * x.get(a, d)
                                * x.get(e, f)
                                * x.get(e, h);
                        }
                    }
                }
            }
            y.set(a, b, acc);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, uniform};
    use rand::Rng;

    fn sq(rows: &[&[f64]]) -> SquareWeights {
        SquareWeights::from_rows(rows).unwrap()
    }

    fn random_w3(seed: u64, n: usize, c: usize) -> InteractionTensor3 {
        let mut rng = seeded(seed);
        let data = (0..(n * c).pow(4))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        InteractionTensor3::from_vec(n, c, data).unwrap()
    }

    #[test]
    fn double_dot_minimal_is_frobenius_inner_product() {
        let m = [1.0, -2.0, 0.5, 3.0];
        let w = DenseTensor::from_vec(vec![1, 1, 2, 2], m.to_vec()).unwrap();
        let x = Matrix::from_rows(&[[2.0, 1.0], [4.0, -1.0]]).unwrap();
        let y = double_dot(&w, &x).unwrap();
        assert_eq!(y.shape(), &[1, 1]);
        assert_eq!(y.data(), &[2.0 - 2.0 + 2.0 - 3.0]);
    }

    #[test]
    fn double_dot_zero_tensor() {
        let w = DenseTensor::zeros(vec![3, 2, 2, 2]);
        let x: Matrix = uniform(&mut seeded(1), 2, 2, 1.0);
        let y = double_dot(&w, &x).unwrap();
        assert_eq!(y.shape(), &[3, 2]);
        assert!(y.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn double_dot_shape_mismatch() {
        let w = DenseTensor::zeros(vec![2, 3, 2]);
        let x: Matrix = Matrix::zeros(2, 2);
        assert!(matches!(double_dot(&w, &x), Err(Error::Shape { .. })));
    }

    #[test]
    fn double_dot_thrice_matches_nested_loops() {
        let mut rng = seeded(17);
        let data: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = DenseTensor::from_vec(vec![2; 6], data.clone()).unwrap();
        let x: Matrix = uniform(&mut rng, 2, 2, 1.0);
        let got = double_dot(&double_dot(&double_dot(&w, &x).unwrap(), &x).unwrap(), &x).unwrap();
        assert!(got.shape().is_empty());
        let mut expected = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        for m in 0..2 {
                            for n in 0..2 {
                                let idx = ((((i * 2 + j) * 2 + k) * 2 + l) * 2 + m) * 2 + n;
                                expected += data[idx] * x.get(i, j) * x.get(k, l) * x.get(m, n);
                            }
                        }
                    }
                }
            }
        }
        assert!((got.data()[0] - expected).abs() <= 1e-12 * expected.abs());
    }

    #[test]
    fn poly3_zero_tensor_and_scalar_cubic() {
        let x: Matrix = uniform(&mut seeded(2), 2, 2, 1.0);
        let zero = InteractionTensor3::zeros(2, 2).unwrap();
        assert!(poly3_forward(&zero, &x)
            .unwrap()
            .data()
            .iter()
            .all(|v| *v == 0.0));
        let w = InteractionTensor3::from_vec(1, 1, vec![2.0]).unwrap();
        let x = Matrix::from_rows(&[[3.0]]).unwrap();
        assert_eq!(poly3_forward(&w, &x).unwrap().data(), &[54.0]);
        assert_eq!(poly3_elementwise(&w, &x).unwrap().data(), &[54.0]);
    }

    #[test]
    fn poly3_paths_agree() {
        for (seed, n, c) in [(21, 2, 2), (22, 2, 3), (23, 1, 8), (24, 4, 2)] {
            let w = random_w3(seed, n, c);
            let x: Matrix = uniform(&mut seeded(seed + 100), n, c, 1.0);
            let a = poly3_forward(&w, &x).unwrap();
            let b = poly3_elementwise(&w, &x).unwrap();
            assert!(a.rel_err(&b).unwrap() <= 1e-12, "seed {seed}");
        }
    }

    #[test]
    fn poly3_zero_input() {
        let w = random_w3(3, 2, 3);
        let y = poly3_elementwise(&w, &Matrix::zeros(2, 3)).unwrap();
        assert!(y.data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn poly3_single_term() {
        let mut w = InteractionTensor3::zeros(2, 2).unwrap();
        w.set(1, 0, 0, 1, 1, 1, 0, 0, 0.5);
        let x = Matrix::from_rows(&[[2.0, 3.0], [5.0, 7.0]]).unwrap();
        let y = poly3_elementwise(&w, &x).unwrap();
        assert_eq!(y.data(), &[0.0, 0.0, 0.5 * 3.0 * 7.0 * 2.0, 0.0]);
    }

    #[test]
    fn poly3_shape_checks() {
        let w = InteractionTensor3::zeros(2, 2).unwrap();
        assert!(poly3_forward(&w, &Matrix::zeros(2, 3)).is_err());
        assert!(poly3_elementwise(&w, &Matrix::zeros(1, 2)).is_err());
    }

    #[test]
    fn capacity_enforced() {
        assert!(matches!(
            InteractionTensor3::zeros(3, 3),
            Err(Error::Capacity {
                requested: 9,
                cap: 8
            })
        ));
        assert!(InteractionTensor3::zeros_with_cap(3, 3, 9).is_ok());
        let w = SquareWeights::identity(3);
        assert!(matches!(
            build_w3_nl(&w, &w, 3),
            Err(Error::Capacity { .. })
        ));
        assert!(matches!(
            build_w3_polynl(&w, &w, &w, 3),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn trilinearity() {
        let w = random_w3(31, 2, 2);
        let mut rng = seeded(32);
        let xs: Vec<Matrix> = (0..4).map(|_| uniform(&mut rng, 2, 2, 1.0)).collect();
        let sum = xs[0].add(&xs[3]).unwrap();
        for slot in 0..3 {
            let pick = |m: &Matrix, i: usize| if i == slot { m.clone() } else { xs[i].clone() };
            let eval =
                |m: &Matrix| poly3_trilinear(&w, &pick(m, 0), &pick(m, 1), &pick(m, 2)).unwrap();
            let lhs = eval(&sum);
            let rhs = eval(&xs[0]).add(&eval(&xs[3])).unwrap();
            assert!(lhs.rel_err(&rhs).unwrap() <= 1e-12, "slot {slot}");
        }
        let diag = poly3_trilinear(&w, &xs[0], &xs[0], &xs[0]).unwrap();
        assert_eq!(diag, poly3_elementwise(&w, &xs[0]).unwrap());
    }

    #[test]
    fn nl_tensor_unit_case() {
        let one = sq(&[&[1.0]]);
        let t = build_w3_nl(&one, &one, 1).unwrap();
        assert_eq!(t.data(), &[1.0]);
    }

    #[test]
    fn nl_tensor_delta_structure() {
        let mut rng = seeded(41);
        let wf = SquareWeights::new(uniform(&mut rng, 2, 2, 1.0)).unwrap();
        let wg = SquareWeights::new(uniform(&mut rng, 2, 2, 1.0)).unwrap();
        let t = build_w3_nl(&wf, &wg, 2).unwrap();
        for a in 0..2 {
            for c in 0..2 {
                for e in 0..2 {
                    for g in 0..2 {
                        if c == a && g == e {
                            continue;
                        }
                        for b in 0..2 {
                            for d in 0..2 {
                                for f in 0..2 {
                                    for h in 0..2 {
                                        assert_eq!(t.get(a, b, c, d, e, f, g, h), 0.0);
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        assert_eq!(t.nonzero_count(), 2 * 2 * 2usize.pow(4));
    }

    #[test]
    fn polynl_tensor_scaling() {
        let one = sq(&[&[1.0]]);
        assert_eq!(build_w3_polynl(&one, &one, &one, 1).unwrap().data(), &[1.0]);

        let mut rng = seeded(43);
        let ws: Vec<SquareWeights> = (0..3)
            .map(|_| SquareWeights::new(uniform(&mut rng, 2, 2, 1.0)).unwrap())
            .collect();
        let t1 = build_w3_polynl(&ws[0], &ws[1], &ws[2], 1).unwrap();
        let t2 = build_w3_polynl(&ws[0], &ws[1], &ws[2], 2).unwrap();
        for b in 0..2 {
            for d in 0..2 {
                for f in 0..2 {
                    for h in 0..2 {
                        let full = t1.get(0, b, 0, d, 0, f, 0, h);
                        for (a, e) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                            assert_eq!(t2.get(a, b, a, d, e, f, e, h), full / 2.0);
                        }
                    }
                }
            }
        }
        assert_eq!(t2.nonzero_count(), 4 * 16);
    }

    #[test]
    fn nl_elementwise_hand_cases() {
        let one = sq(&[&[1.0]]);
        let x = Matrix::from_rows(&[[2.0]]).unwrap();
        assert_eq!(nl_elementwise(&one, &one, &x).unwrap().data(), &[8.0]);
        let x = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert_eq!(nl_elementwise(&one, &one, &x).unwrap().data(), &[5.0, 10.0]);
        assert!(nl_elementwise(&one, &one, &Matrix::zeros(2, 2)).is_err());
    }

    #[test]
    fn polynl_elementwise_hand_cases() {
        let one = sq(&[&[1.0]]);
        let x = Matrix::from_rows(&[[2.0]]).unwrap();
        assert_eq!(
            polynl_elementwise(&one, &one, &one, &x).unwrap().data(),
            &[8.0]
        );
        let x = Matrix::from_rows(&[[1.0], [2.0]]).unwrap();
        assert_eq!(
            polynl_elementwise(&one, &one, &one, &x).unwrap().data(),
            &[2.5, 5.0]
        );
        let two = SquareWeights::identity(2);
        assert!(polynl_elementwise(&one, &two, &one, &x).is_err());
    }

    #[test]
    fn dump_format() {
        let one = sq(&[&[1.0]]);
        let t = build_w3_polynl(&one, &one, &one, 1).unwrap();
        let mut buf = Vec::new();
        t.write_text(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1 1\n1.0\n");
    }
}
