use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::core::matrix::rational_mul;
use crate::core::Matrix;
use crate::error::{Error, Result};

fn q(a: i64, b: i64) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Entry values of the Rootn matrix and of its explicit Schur factors.
#[derive(Clone, Debug, PartialEq)]
pub struct RootnData {
    pub n: usize,
    pub m: usize,
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
    pub e: BigRational,
    pub f: BigRational,
    /// Superdiagonal of the triangular factor, `1 − 1/(m+2)`.
    pub r: BigRational,
    pub alpha: BigRational,
    pub beta: BigRational,
}

fn square_root(n: usize) -> Result<usize> {
    let m = n.sqrt();
    if m * m != n || n < 4 {
        return Err(Error::NotPerfectSquare(n));
    }
    Ok(m)
}

pub fn rootn_data(n: usize) -> Result<RootnData> {
    let m = square_root(n)? as i64;
    let den2 = m * (m + 2);
    let den1 = m * (m + 1);
    let den3 = m * (m + 1) * (m + 2);
    Ok(RootnData {
        n,
        m: m as usize,
        a: q(m * m + m - 1, den2),
        b: q(m + 1, den2),
        c: q(1, den1),
        d: q(m * m * m + 2 * m * m + m + 1, den3),
        e: q(1, den3),
        f: q(2 * m + 3, den3),
        r: BigRational::one() - q(1, m + 2),
        alpha: q(-1, 1) + q(1, den1),
        beta: q(1, den1),
    })
}

impl RootnData {
    /// `a+b = 1`, `c+d+(n−3)e = 1`, `b+f+(n−2)c = 1` and all values nonnegative.
    pub fn identities_hold(&self) -> bool {
        let n = BigRational::from_integer((self.n as i64).into());
        let one = BigRational::one();
        let three = q(3, 1);
        let two = q(2, 1);
        let vals = [&self.a, &self.b, &self.c, &self.d, &self.e, &self.f];
        vals.iter().all(|v| **v >= BigRational::zero())
            && &self.a + &self.b == one
            && &self.c + &self.d + (&n - &three) * &self.e == one
            && &self.b + &self.f + (&n - &two) * &self.c == one
    }

    fn entries(&self, perturbed: bool) -> Vec<BigRational> {
        let n = self.n;
        let zero = BigRational::zero();
        let (a, b, f) = if perturbed {
            (&self.a + &self.b, zero.clone(), &self.f + &self.b)
        } else {
            (self.a.clone(), self.b.clone(), self.f.clone())
        };
        let mut out = vec![zero; n * n];
        out[0] = a;
        out[1] = b.clone();
        for i in 1..n - 1 {
            out[i * n + 1] = self.c.clone();
            for j in 2..n {
                out[i * n + j] = if j == i + 1 { self.d.clone() } else { self.e.clone() };
            }
        }
        let last = (n - 1) * n;
        out[last] = b;
        out[last + 1] = f;
        for j in 2..n {
            out[last + j] = self.c.clone();
        }
        out
    }
}

/// The Rootn matrix `A_n`, exact.
pub fn rootn(n: usize) -> Result<Matrix> {
    let d = rootn_data(n)?;
    Matrix::from_rational(n, d.entries(false))
}

/// `A'_n`: the mass `b_n` moved from `(1,2)` to `(1,1)` and from `(n,1)` to `(n,2)`.
pub fn rootn_perturbed(n: usize) -> Result<Matrix> {
    let d = rootn_data(n)?;
    Matrix::from_rational(n, d.entries(true))
}

/// Explicit Schur factors of the Rootn matrix with the checks that validate them.
#[derive(Clone, Debug)]
pub struct RootnSchur {
    pub u: Matrix,
    pub t: Matrix,
    /// `U T Uᵀ = A_n` in exact arithmetic.
    pub exact_reconstruction: bool,
    /// `‖U T Uᵀ − A_n‖_max` in machine arithmetic.
    pub residual: f64,
    /// Values of `1/n + α² + (n−2)β²`, `1/√n + α + (n−2)β`, `1/n + 2αβ + (n−3)β²`.
    pub unitarity: [BigRational; 3],
}

#[derive(Serialize)]
pub struct RootnSchurSummary {
    pub exact_reconstruction: bool,
    pub residual: f64,
    pub unitarity: [String; 3],
}

impl RootnSchur {
    pub fn unitarity_holds(&self) -> bool {
        self.unitarity[0] == BigRational::one() && self.unitarity[1].is_zero() && self.unitarity[2].is_zero()
    }

    pub fn summary(&self) -> RootnSchurSummary {
        RootnSchurSummary {
            exact_reconstruction: self.exact_reconstruction,
            residual: self.residual,
            unitarity: [
                self.unitarity[0].to_string(),
                self.unitarity[1].to_string(),
                self.unitarity[2].to_string(),
            ],
        }
    }
}

pub fn rootn_schur(n: usize) -> Result<RootnSchur> {
    let d = rootn_data(n)?;
    let inv_m = q(1, d.m as i64);
    let zero = BigRational::zero();
    let mut u = vec![zero.clone(); n * n];
    let mut t = vec![zero; n * n];
    for i in 0..n {
        for j in 0..n {
            u[i * n + j] = if i == 0 || j == 0 {
                inv_m.clone()
            } else if i == j {
                d.alpha.clone()
            } else {
                d.beta.clone()
            };
        }
    }
    t[0] = BigRational::one();
    for i in 1..n - 1 {
        t[i * n + i + 1] = d.r.clone();
    }
    // U is real symmetric, so U* = U.
    let rec = rational_mul(n, &rational_mul(n, &u, &t), &u);
    let a = d.entries(false);
    let exact_reconstruction = rec == a;
    let um = Matrix::from_rational(n, u)?;
    let tm = Matrix::from_rational(n, t)?;
    let residual = ((um.values() * tm.values() * um.values().transpose()) - Matrix::from_rational(n, a)?.values()).amax();
    let nn = q(n as i64, 1);
    let unitarity = [
        BigRational::one() / &nn + &d.alpha * &d.alpha + (&nn - q(2, 1)) * &d.beta * &d.beta,
        inv_m + &d.alpha + (&nn - q(2, 1)) * &d.beta,
        BigRational::one() / &nn + q(2, 1) * &d.alpha * &d.beta + (&nn - q(3, 1)) * &d.beta * &d.beta,
    ];
    Ok(RootnSchur { u: um, t: tm, exact_reconstruction, residual, unitarity })
}

/// The quadratic `(n²−6n+8)r² + (−2n²+8n−8)r + n²−3n+2` at `r`, together with the
/// closed-form root `1 − 1/(√n+2)` and the alternative form `1 − (√n+2)/(n−4)`.
#[derive(Clone, Debug, Serialize)]
pub struct RootnQuadratic {
    pub n: usize,
    pub value_at_r: String,
    pub nonnegative: bool,
    pub root_from_quadratic: f64,
    pub alternative_closed_form: Option<f64>,
    pub forms_agree: bool,
}

pub fn rootn_quadratic_check(n: usize) -> Result<RootnQuadratic> {
    let d = rootn_data(n)?;
    let nn = q(n as i64, 1);
    let r = &d.r;
    let val = (&nn * &nn - q(6, 1) * &nn + q(8, 1)) * r * r
        + (q(-2, 1) * &nn * &nn + q(8, 1) * &nn - q(8, 1)) * r
        + (&nn * &nn - q(3, 1) * &nn + q(2, 1));
    let root = 1.0 - 1.0 / (d.m as f64 + 2.0);
    let alt = (n != 4).then(|| 1.0 - (d.m as f64 + 2.0) / (n as f64 - 4.0));
    let forms_agree = alt.is_some_and(|a| (a - root).abs() < 1e-12);
    Ok(RootnQuadratic {
        n,
        nonnegative: val >= BigRational::zero(),
        value_at_r: val.to_string(),
        root_from_quadratic: root,
        alternative_closed_form: alt,
        forms_agree,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_matches_printed_matrix() {
        let a = rootn(9).unwrap();
        let sixty = |x: i64| q(x, 60);
        let e = a.rational().unwrap();
        let row0 = [44, 16, 0, 0, 0, 0, 0, 0, 0];
        let row1 = [0, 5, 49, 1, 1, 1, 1, 1, 1];
        let row7 = [0, 5, 1, 1, 1, 1, 1, 1, 49];
        let row8 = [16, 9, 5, 5, 5, 5, 5, 5, 5];
        for (r, row) in [(0, row0), (1, row1), (7, row7), (8, row8)] {
            for j in 0..9 {
                assert_eq!(e[r * 9 + j], sixty(row[j]), "entry ({r},{j})");
            }
        }
    }

    #[test]
    fn identities_and_exact_sums() {
        for n in [4, 9, 16, 25, 100] {
            assert!(rootn_data(n).unwrap().identities_hold());
            assert!(rootn(n).unwrap().is_doubly_stochastic(0.0));
        }
        assert_eq!(rootn(10), Err(Error::NotPerfectSquare(10)));
    }

    #[test]
    fn schur_factors_for_nine() {
        let d = rootn_data(9).unwrap();
        assert_eq!(d.r, q(4, 5));
        assert_eq!(d.beta, q(1, 12));
        let s = rootn_schur(9).unwrap();
        assert!(s.exact_reconstruction);
        assert!(s.unitarity_holds());
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn quadratic_is_nonnegative_at_r() {
        let c = rootn_quadratic_check(9).unwrap();
        assert!(c.nonnegative);
        assert!((c.root_from_quadratic - 0.8).abs() < 1e-15);
        assert!(!c.forms_agree);
    }
}
