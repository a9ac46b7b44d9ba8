//! Schur decompositions `M = U T U*`.
//!
//! Rational matrices whose eigenvalues are all 0 or 1 get a Schur basis built
//! from the exact flag of generalized eigenspaces, which keeps the diagonal of
//! `T` at round-off level even for large Jordan blocks. Everything else goes
//! through the complex QR algorithm.

use nalgebra::{DMatrix, DVector, Schur};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{exact_root_census, norm2, C64};
use crate::core::matrix::rational_mul;
use crate::core::Matrix;
use crate::error::{Error, Result};

/// Largest size for which the exact flag construction is attempted.
const EXACT_FLAG_LIMIT: usize = 40;

#[derive(Clone, Debug)]
pub struct SchurForm {
    pub u: DMatrix<C64>,
    pub t: DMatrix<C64>,
    /// `max(‖UU* − I‖₂, ‖UTU* − M‖₂ / ‖M‖₂)`.
    pub residual: f64,
}

impl SchurForm {
    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Basis of the right null space of a row-major rational matrix.
pub fn rational_nullspace(n: usize, m: &[BigRational]) -> Vec<Vec<BigRational>> {
    let mut a: Vec<Vec<BigRational>> = (0..n).map(|i| m[i * n..(i + 1) * n].to_vec()).collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(p) = (row..n).find(|&r| !a[r][col].is_zero()) else { continue };
        a.swap(row, p);
        let inv = BigRational::one() / &a[row][col];
        for c in col..n {
            a[row][c] = &a[row][c] * &inv;
        }
        for r in 0..n {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..n {
                    let d = &f * &a[row][c];
                    a[r][c] -= d;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == n {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); n];
            v[f] = BigRational::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Appends to `basis` the vectors of `cands` that are independent of it, orthonormalized.
fn extend_orthonormal(basis: &mut Vec<DVector<C64>>, cands: &[Vec<BigRational>]) {
    for c in cands {
        let mut v = DVector::from_iterator(c.len(), c.iter().map(|q| C64::new(q.to_f64().unwrap_or(0.0), 0.0)));
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        v /= C64::new(scale, 0.0);
        for _ in 0..2 {
            for b in basis.iter() {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let r = v.norm();
        if r > 1e-8 {
            basis.push(v / C64::new(r, 0.0));
        }
    }
}

fn shifted(n: usize, m: &[BigRational], shift: &BigRational) -> Vec<BigRational> {
    (0..n * n).map(|k| if k / n == k % n { &m[k] - shift } else { m[k].clone() }).collect()
}

/// Schur basis from the flags `ker(M−I)^j` then `ker M^j`, when they span everything.
fn exact_flag_basis(n: usize, q: &[BigRational], zeros: usize, ones: usize) -> Option<DMatrix<C64>> {
    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(n);
    for (shift, mult) in [(BigRational::one(), ones), (BigRational::zero(), zeros)] {
        if mult == 0 {
            continue;
        }
        let target = basis.len() + mult;
        let x = shifted(n, q, &shift);
        let mut power = x.clone();
        for _ in 0..mult {
            extend_orthonormal(&mut basis, &rational_nullspace(n, &power));
            if basis.len() >= target {
                break;
            }
            power = rational_mul(n, &power, &x);
        }
        if basis.len() != target {
            return None;
        }
    }
    (basis.len() == n).then(|| DMatrix::from_columns(&basis))
}

fn residual(m: &DMatrix<C64>, u: &DMatrix<C64>, t: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mreal = m.map(|z| z.re);
    let norm = norm2(&mreal).max(f64::MIN_POSITIVE);
    let orth = (u * u.adjoint() - DMatrix::<C64>::identity(n, n)).singular_values().max();
    let rec = (u * t * u.adjoint() - m).singular_values().max() / norm;
    orth.max(rec)
}

/// `M = U T U*` with `U` unitary and `T` upper triangular.
pub fn schur_form(m: &Matrix) -> Result<SchurForm> {
    let n = m.n();
    let mc: DMatrix<C64> = m.values().map(|x| C64::new(x, 0.0));
    if let (Some(q), true) = (m.rational(), n <= EXACT_FLAG_LIMIT) {
        if let Some((zeros, ones)) = exact_root_census(m) {
            if zeros + ones == n {
                if let Some(u) = exact_flag_basis(n, q, zeros, ones) {
                    let mut t = u.adjoint() * &mc * &u;
                    for j in 0..n {
                        for i in j + 1..n {
                            t[(i, j)] = C64::new(0.0, 0.0);
                        }
                    }
                    let residual = residual(&mc, &u, &t);
                    return Ok(SchurForm { u, t, residual });
                }
            }
        }
    }
    let schur = Schur::try_new(mc.clone(), f64::EPSILON, 10_000).ok_or(Error::NoConvergence(10_000))?;
    let (u, mut t) = schur.unpack();
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = C64::new(0.0, 0.0);
        }
    }
    let residual = residual(&mc, &u, &t);
    Ok(SchurForm { u, t, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::debruijn;

    #[test]
    fn diagonal_matrix_is_its_own_schur_form() {
        let m = Matrix::from_rows(&[vec![3.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let s = schur_form(&m).unwrap();
        let d = s.diagonal();
        let mut re: Vec<f64> = d.iter().map(|z| z.re).collect();
        re.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((re[0] - 1.0).abs() < 1e-12 && (re[1] - 3.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn symmetric_gives_diagonal_t() {
        let m = Matrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 2.0, 1.0], vec![0.0, 1.0, 2.0]]).unwrap();
        let s = schur_form(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(s.t[(i, j)].norm() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn debruijn_minus_uniform_is_nilpotent() {
        let a = debruijn(3).unwrap();
        let j = Matrix::uniform(8);
        let b: Vec<BigRational> =
            a.rational().unwrap().iter().zip(j.rational().unwrap()).map(|(x, y)| x - y).collect();
        let bm = Matrix::from_rational(8, b).unwrap();
        let s = schur_form(&bm).unwrap();
        assert!(s.diagonal().iter().all(|z| z.norm() < 1e-8));
        assert!(s.residual < 1e-10);
    }

    #[test]
    fn nullspace_of_rank_one() {
        let q = |a: i64| BigRational::from_integer(a.into());
        let ns = rational_nullspace(2, &[q(1), q(1), q(2), q(2)]);
        assert_eq!(ns, vec![vec![q(-1), q(1)]]);
    }
}
