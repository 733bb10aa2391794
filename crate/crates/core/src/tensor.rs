//! Dense row-major matrices and the handful of kernels the blocks need.
//!
//! Every buffer produced by a kernel here is reported to [`crate::probe`], as is
//! every floating point operation, so the benchmark harness can compare the
//! closed-form cost models with what actually ran.

use std::fmt::{Debug, Display};
use std::io::{BufRead, Write};
use std::ops::{AddAssign, MulAssign};

use num_traits::Float;

use crate::error::{Error, Result};
use crate::probe;

/// Floating point element type. Verification runs in `f64`; benchmarks may
/// also run in `f32`.
pub trait Scalar:
    Float + AddAssign + MulAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Short name used on the command line and in reports.
    const NAME: &'static str;

    fn from_f64(v: f64) -> Self;
    fn as_f64(self) -> f64;
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";

    fn from_f64(v: f64) -> Self {
        v
    }

    fn as_f64(self) -> f64 {
        self
    }
}

impl Scalar for f32 {
    const NAME: &'static str = "f32";

    fn from_f64(v: f64) -> Self {
        v as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

/// A `rows × cols` matrix stored row-major. Both dimensions are at least one
/// and every entry is finite.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T = f64> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// An `N × C` folded activation map: one row per spatial position.
pub type FeatureMap<T = f64> = Matrix<T>;

impl<T: Scalar> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::shape(
                "matrix",
                format!("dimensions must be positive, got {rows}×{cols}"),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::shape(
                "matrix",
                format!(
                    "{rows}×{cols} needs {} values, got {}",
                    rows * cols,
                    data.len()
                ),
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::numeric(
                "matrix",
                format!("non-finite entry at ({}, {})", pos / cols, pos % cols),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows; mostly useful in tests.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if rows.iter().any(|r| r.as_ref().len() != cols) {
            return Err(Error::shape("matrix", "ragged rows"));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::from_vec(rows.len(), cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        let mut m = Self::zeros(rows, cols);
        m.data.iter_mut().for_each(|v| *v = value);
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    /// Zeroed buffer that kernels use for their outputs; reported to the probe.
    fn scratch(rows: usize, cols: usize) -> Self {
        probe::record_alloc(rows * cols);
        Self::zeros(rows, cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: T) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Mutable access to the raw entries. Callers keep entries finite.
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    /// Materialised transpose.
    pub fn transpose(&self) -> Self {
        let mut out = Self::scratch(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.data[c * self.rows + r] = self.data[r * self.cols + c];
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.expect_same_shape("add", other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a + *b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.expect_same_shape("sub", other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| *a - *b)
            .collect();
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// Frobenius inner product `Σ aᵢⱼ bᵢⱼ`.
    pub fn dot(&self, other: &Self) -> Result<T> {
        self.expect_same_shape("dot", other)?;
        let mut acc = T::zero();
        for (a, b) in self.data.iter().zip(&other.data) {
            acc += *a * *b;
        }
        Ok(acc)
    }

    pub fn frobenius(&self) -> T {
        let mut acc = T::zero();
        for v in &self.data {
            acc += *v * *v;
        }
        acc.sqrt()
    }

    /// `‖self − reference‖_F / ‖reference‖_F`, or the absolute norm when the
    /// reference is exactly zero.
    pub fn rel_err(&self, reference: &Self) -> Result<f64> {
        let diff = self.sub(reference)?.frobenius().as_f64();
        let norm = reference.frobenius().as_f64();
        Ok(if norm == 0.0 { diff } else { diff / norm })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Fails with a numeric error if any entry overflowed or became NaN.
    pub fn ensure_finite(self, op: &'static str) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::numeric(op, "result contains non-finite values"))
        }
    }

    /// Row `i` of the output is row `perm[i]` of the input.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.rows {
            return Err(Error::shape(
                "permute_rows",
                "permutation length differs from rows",
            ));
        }
        let mut out = Self::zeros(self.rows, self.cols);
        for (i, &src) in perm.iter().enumerate() {
            if src >= self.rows {
                return Err(Error::shape("permute_rows", "index out of range"));
            }
            out.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(self.row(src));
        }
        Ok(out)
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| U::from_f64(v.as_f64())).collect(),
        }
    }

    /// Splits the rows back into an `h × w` grid.
    pub fn unfold(&self, height: usize, width: usize) -> Result<Map3<T>> {
        if height * width != self.rows || height == 0 || width == 0 {
            return Err(Error::shape(
                "unfold",
                format!("{height}×{width} grid does not cover {} rows", self.rows),
            ));
        }
        Ok(Map3 {
            height,
            width,
            channels: self.cols,
            data: self.data.clone(),
        })
    }

    fn expect_same_shape(&self, op: &'static str, other: &Self) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::shape(
                op,
                format!(
                    "{}×{} vs {}×{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ))
        }
    }
}

/// A `C × C` weight matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareWeights<T = f64>(Matrix<T>);

impl<T: Scalar> SquareWeights<T> {
    pub fn new(m: Matrix<T>) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::shape(
                "weights",
                format!("expected a square matrix, got {}×{}", m.rows(), m.cols()),
            ));
        }
        Ok(SquareWeights(m))
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        SquareWeights(Matrix::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.0
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.0.get(r, c)
    }

    pub fn cast<U: Scalar>(&self) -> SquareWeights<U> {
        SquareWeights(self.0.cast())
    }
}

/// An `H × W × C` activation volume stored with channels fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Map3<T = f64> {
    height: usize,
    width: usize,
    channels: usize,
    data: Vec<T>,
}

impl<T: Scalar> Map3<T> {
    pub fn from_vec(height: usize, width: usize, channels: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::shape(
                "fold",
                format!("zero-sized dimension in {height}×{width}×{channels}"),
            ));
        }
        if data.len() != height * width * channels {
            return Err(Error::shape("fold", "data length does not match H·W·C"));
        }
        Ok(Map3 {
            height,
            width,
            channels,
            data,
        })
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.height, self.width, self.channels)
    }

    pub fn get(&self, h: usize, w: usize, c: usize) -> T {
        self.data[(h * self.width + w) * self.channels + c]
    }

    /// Groups the spatial dimensions: row `h·W + w` holds the channels at `(h, w)`.
    pub fn fold(&self) -> Result<FeatureMap<T>> {
        Matrix::from_vec(self.height * self.width, self.channels, self.data.clone())
    }
}

/// Standard product with a fixed sequential order over the contraction index.
pub fn matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols != b.rows {
        return Err(Error::shape(
            "matmul",
            format!("{}×{} · {}×{}", a.rows, a.cols, b.rows, b.cols),
        ));
    }
    let (m, k, p) = (a.rows, a.cols, b.cols);
    let mut out = Matrix::scratch(m, p);
    for i in 0..m {
        let out_row = &mut out.data[i * p..(i + 1) * p];
        let a_row = &a.data[i * k..(i + 1) * k];
        for (kk, &aik) in a_row.iter().enumerate() {
            let b_row = &b.data[kk * p..(kk + 1) * p];
            for (o, &bv) in out_row.iter_mut().zip(b_row) {
                *o += aik * bv;
            }
        }
    }
    probe::record_flops(2 * (m * k * p) as u64);
    Ok(out)
}

/// Element-wise product.
pub fn hadamard<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    a.expect_same_shape("hadamard", b)?;
    let mut out = Matrix::scratch(a.rows, a.cols);
    for ((o, &x), &y) in out.data.iter_mut().zip(&a.data).zip(&b.data) {
        *o = x * y;
    }
    probe::record_flops(a.len() as u64);
    Ok(out)
}

/// Spatial average pooling followed by expansion back to `N` rows.
///
/// Column sums cost `N·C` additions and writing `sum · (1/N)` into every row
/// costs `N·C` multiplications; both are counted.
pub fn pool_expand<T: Scalar>(x: &FeatureMap<T>) -> FeatureMap<T> {
    let (n, c) = x.shape();
    probe::record_alloc(c);
    let mut sums = vec![T::zero(); c];
    for r in 0..n {
        for (s, &v) in sums.iter_mut().zip(x.row(r)) {
            *s += v;
        }
    }
    let inv_n = T::one() / T::from_f64(n as f64);
    let mut out = Matrix::scratch(n, c);
    for r in 0..n {
        for (o, &s) in out.data[r * c..(r + 1) * c].iter_mut().zip(&sums) {
            *o = s * inv_n;
        }
    }
    probe::record_flops(2 * (n * c) as u64);
    out
}

/// Writes `"<rows> <cols>"` followed by one whitespace-separated row per line.
/// Scalars use Rust's shortest round-trip formatting.
pub fn write_matrix(m: &Matrix<f64>, mut w: impl Write) -> Result<()> {
    writeln!(w, "{} {}", m.rows(), m.cols())?;
    for r in 0..m.rows() {
        let line: Vec<String> = m.row(r).iter().map(|v| format!("{v:?}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_matrix(r: impl BufRead) -> Result<Matrix<f64>> {
    let mut lines = r
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.trim().is_empty()));
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        detail: "missing header".into(),
    })?;
    let header = header?;
    let dims: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: 1,
            detail: e.to_string(),
        })?;
    let [rows, cols] = dims[..] else {
        return Err(Error::Parse {
            line: 1,
            detail: "header must be \"<rows> <cols>\"".into(),
        });
    };
    let mut data = Vec::with_capacity(rows * cols);
    for (idx, line) in lines {
        let line = line?;
        let before = data.len();
        for tok in line.split_whitespace() {
            let v = tok.parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                detail: format!("{tok:?}: {e}"),
            })?;
            data.push(v);
        }
        if data.len() - before != cols {
            return Err(Error::Parse {
                line: idx + 1,
                detail: format!("expected {cols} values, got {}", data.len() - before),
            });
        }
    }
    if data.len() != rows * cols {
        return Err(Error::Parse {
            line: rows + 1,
            detail: format!("expected {rows} rows"),
        });
    }
    Matrix::from_vec(rows, cols, data)
}
