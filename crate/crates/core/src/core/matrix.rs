use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::decimal::{Decimal, DecimalContext};
use crate::error::{Error, Result};

/// Entries below this magnitude are treated as zero in machine mode.
pub const SUPPORT_EPS: f64 = 1e-14;

/// Arithmetic precision carried by a matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    Machine,
    Decimal { digits: u32 },
}

/// Optional exact companion of the machine values.
#[derive(Clone, Debug)]
enum Exact {
    None,
    Rational(Vec<BigRational>),
    Decimal(DecimalContext, Vec<Decimal>),
}

/// Dense square real matrix.
///
/// Machine values are always present. Matrices built from rationals or from
/// decimal arithmetic also keep their exact entries, which the spectral and
/// construction routines use when floating point would lose the structure.
#[derive(Clone, Debug)]
pub struct Matrix {
    values: DMatrix<f64>,
    exact: Exact,
}

impl PartialEq for Matrix {
    fn eq(&self, other: &Self) -> bool {
        match (&self.exact, &other.exact) {
            (Exact::Rational(a), Exact::Rational(b)) => a == b,
            (Exact::Decimal(_, a), Exact::Decimal(_, b)) => a == b,
            _ => self.values == other.values,
        }
    }
}

impl Matrix {
    /// Builds a machine matrix from a dense nalgebra matrix.
    pub fn from_dmatrix(values: DMatrix<f64>) -> Result<Matrix> {
        if values.nrows() != values.ncols() || values.nrows() == 0 {
            return Err(Error::ShapeMismatch(format!(
                "expected a nonempty square matrix, got {}x{}",
                values.nrows(),
                values.ncols()
            )));
        }
        if values.iter().any(|x| !x.is_finite()) {
            return Err(Error::OutOfRange("matrix has a non-finite entry".into()));
        }
        Ok(Matrix { values, exact: Exact::None })
    }

    /// Builds a machine matrix from rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Matrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::ShapeMismatch("rows must all have length n".into()));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Matrix::from_dmatrix(DMatrix::from_row_slice(n, n, &flat))
    }

    /// Builds a nonnegative machine matrix, clamping entries in `[-1e-14, 0)` to zero.
    pub fn nonnegative(values: DMatrix<f64>) -> Result<Matrix> {
        if let Some(bad) = values.iter().find(|&&x| x < -SUPPORT_EPS) {
            return Err(Error::OutOfRange(format!("negative entry {bad}")));
        }
        Matrix::from_dmatrix(values.map(|x| x.max(0.0)))
    }

    /// Builds an exact rational matrix from row-major entries.
    pub fn from_rational(n: usize, entries: Vec<BigRational>) -> Result<Matrix> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::ShapeMismatch(format!("expected {} rational entries", n * n)));
        }
        let vals: Vec<f64> = entries.iter().map(|q| q.to_f64().unwrap_or(f64::NAN)).collect();
        let values = DMatrix::from_row_slice(n, n, &vals);
        Ok(Matrix { values, exact: Exact::Rational(entries) })
    }

    /// Builds a decimal matrix from row-major entries.
    pub fn from_decimal(n: usize, ctx: DecimalContext, entries: Vec<Decimal>) -> Result<Matrix> {
        if n == 0 || entries.len() != n * n {
            return Err(Error::ShapeMismatch(format!("expected {} decimal entries", n * n)));
        }
        let vals: Vec<f64> = entries.iter().map(Decimal::to_f64).collect();
        let values = DMatrix::from_row_slice(n, n, &vals);
        Ok(Matrix { values, exact: Exact::Decimal(ctx, entries) })
    }

    pub fn identity(n: usize) -> Matrix {
        let one = BigRational::one();
        let zero = BigRational::zero();
        let entries = (0..n * n)
            .map(|k| if k / n == k % n { one.clone() } else { zero.clone() })
            .collect();
        Matrix::from_rational(n, entries).expect("identity shape")
    }

    /// The averaging matrix `J = (1/n)·11ᵀ`.
    pub fn uniform(n: usize) -> Matrix {
        let q = BigRational::new(1.into(), (n as i64).into());
        Matrix::from_rational(n, vec![q; n * n]).expect("uniform shape")
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Machine values.
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn precision(&self) -> Precision {
        match &self.exact {
            Exact::Decimal(ctx, _) => Precision::Decimal { digits: ctx.digits() },
            _ => Precision::Machine,
        }
    }

    /// Exact rational entries in row-major order, when the matrix carries them.
    pub fn rational(&self) -> Option<&[BigRational]> {
        match &self.exact {
            Exact::Rational(e) => Some(e),
            _ => None,
        }
    }

    /// Decimal entries in row-major order, when the matrix carries them.
    pub fn decimal(&self) -> Option<(&DecimalContext, &[Decimal])> {
        match &self.exact {
            Exact::Decimal(ctx, e) => Some((ctx, e)),
            _ => None,
        }
    }

    /// Drops any exact companion, keeping only machine values.
    pub fn to_machine(&self) -> Matrix {
        Matrix { values: self.values.clone(), exact: Exact::None }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self.exact, Exact::None)
    }

    pub fn is_nonnegative(&self) -> bool {
        match &self.exact {
            Exact::Rational(e) => e.iter().all(|q| *q >= BigRational::zero()),
            Exact::Decimal(_, e) => e.iter().all(|d| !d.is_negative()),
            Exact::None => self.values.iter().all(|&x| x >= 0.0),
        }
    }

    /// Whether entry (i, j) is an edge of the support graph.
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        match &self.exact {
            Exact::Rational(e) => e[i * self.n() + j] > BigRational::zero(),
            Exact::Decimal(_, e) => e[i * self.n() + j].is_positive(),
            Exact::None => self.values[(i, j)] > SUPPORT_EPS,
        }
    }

    pub fn transpose(&self) -> Matrix {
        let n = self.n();
        let permute = |k: usize| (k % n) * n + k / n;
        let exact = match &self.exact {
            Exact::None => Exact::None,
            Exact::Rational(e) => Exact::Rational((0..n * n).map(|k| e[permute(k)].clone()).collect()),
            Exact::Decimal(c, e) => Exact::Decimal(*c, (0..n * n).map(|k| e[permute(k)].clone()).collect()),
        };
        Matrix { values: self.values.transpose(), exact }
    }

    /// Product, exact when both factors are rational.
    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.n() != other.n() {
            return Err(Error::ShapeMismatch("dimension mismatch in product".into()));
        }
        if let (Some(a), Some(b)) = (self.rational(), other.rational()) {
            let n = self.n();
            return Matrix::from_rational(n, rational_mul(n, a, b));
        }
        Matrix::from_dmatrix(&self.values * &other.values)
    }

    /// `self^k` by repeated squaring; exact for rational matrices.
    pub fn pow(&self, k: u32) -> Result<Matrix> {
        let mut result = Matrix::identity(self.n());
        if !self.is_exact() || self.rational().is_none() {
            result = result.to_machine();
        }
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.values.row_iter().map(|r| r.sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        self.values.column_iter().map(|c| c.sum()).collect()
    }

    /// Row and column sums all equal one; exactly for rational and decimal matrices
    /// (decimal within `10^-(digits-10)`), within `tol` otherwise.
    pub fn is_doubly_stochastic(&self, tol: f64) -> bool {
        let n = self.n();
        match &self.exact {
            Exact::Rational(e) => {
                let one = BigRational::one();
                e.iter().all(|q| *q >= BigRational::zero())
                    && (0..n).all(|i| {
                        let r: BigRational = (0..n).map(|j| &e[i * n + j]).sum();
                        let c: BigRational = (0..n).map(|j| &e[j * n + i]).sum();
                        r == one && c == one
                    })
            }
            Exact::Decimal(ctx, e) => {
                let eps = ctx.epsilon(10);
                let one = ctx.one();
                (0..n).all(|i| {
                    let r = (0..n).fold(ctx.zero(), |acc, j| &acc + &e[i * n + j]);
                    let c = (0..n).fold(ctx.zero(), |acc, j| &acc + &e[j * n + i]);
                    (&r - &one).abs() <= eps && (&c - &one).abs() <= eps
                })
            }
            Exact::None => {
                self.values.iter().all(|&x| x >= -SUPPORT_EPS)
                    && self.row_sums().iter().chain(self.col_sums().iter()).all(|s| (s - 1.0).abs() <= tol)
            }
        }
    }

    /// Every diagonal entry is at least 1/2.
    pub fn is_half_lazy(&self) -> bool {
        (0..self.n()).all(|i| self.values[(i, i)] >= 0.5 - 1e-15)
    }

    /// Principal submatrix on `idx`, machine values only.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| self.values[(rows[i], cols[j])])
    }
}

/// Row-major rational product of two n×n matrices.
pub fn rational_mul(n: usize, a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = &a[i * n + k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..n {
                let bkj = &b[k * n + j];
                if !bkj.is_zero() {
                    out[i * n + j] += aik * bkj;
                }
            }
        }
    }
    out
}

/// Row-major decimal product of two n×n matrices.
pub fn decimal_mul(n: usize, ctx: &DecimalContext, a: &[Decimal], b: &[Decimal]) -> Vec<Decimal> {
    let mut out = vec![ctx.zero(); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = &a[i * n + k];
            if aik.is_zero() {
                continue;
            }
            for j in 0..n {
                let bkj = &b[k * n + j];
                if !bkj.is_zero() {
                    out[i * n + j] = &out[i * n + j] + &(aik * bkj);
                }
            }
        }
    }
    out
}
