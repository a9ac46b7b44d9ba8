use nalgebra::{DMatrix, DVector};
use num_rational::BigRational;

use super::matrix::Matrix;
use super::perron::{PerronData, PrecisionConfig};
use crate::error::{Error, Result};

/// `M / r`, so that the Perron eigenvalue becomes 1.
pub fn normalize_pf(m: &Matrix, pd: &PerronData) -> Matrix {
    if (pd.r - 1.0).abs() <= 1e-15 {
        return m.clone();
    }
    Matrix::from_dmatrix(m.values() / pd.r).expect("scaling keeps shape")
}

/// The balanced form `A = D_u^{1/2} D_v^{-1/2} R D_u^{-1/2} D_v^{1/2}` and `w = √(u∘v)`.
///
/// When `u` is proportional to `v` the transform is the identity and exact
/// entries survive.
pub fn balance(r: &Matrix, pd: &PerronData) -> (Matrix, DVector<f64>) {
    let w = pd.w();
    let ratio: DVector<f64> = pd.u.zip_map(&pd.v, |a, b| (a / b).sqrt());
    let (lo, hi) = (ratio.min(), ratio.max());
    if (hi - lo) <= 1e-13 * hi {
        return (r.clone(), w);
    }
    let n = r.n();
    let a = DMatrix::from_fn(n, n, |i, j| ratio[i] * r.get(i, j) / ratio[j]);
    (Matrix::from_dmatrix(a).expect("balanced shape"), w)
}

/// `αI + (1 − α)M`; exact for rational matrices.
pub fn lazify(m: &Matrix, alpha: f64) -> Result<Matrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::OutOfRange(format!("laziness {alpha} outside [0, 1]")));
    }
    let n = m.n();
    if let (Some(q), Some(a)) = (m.rational(), BigRational::from_float(alpha)) {
        let one_minus = BigRational::from_integer(1.into()) - &a;
        let entries = q
            .iter()
            .enumerate()
            .map(|(k, x)| {
                let base = x * &one_minus;
                if k / n == k % n {
                    base + &a
                } else {
                    base
                }
            })
            .collect();
        return Matrix::from_rational(n, entries);
    }
    let v = m.values() * (1.0 - alpha) + DMatrix::identity(n, n) * alpha;
    Matrix::from_dmatrix(v)
}

/// `exp(t(R − I)) = e^{-t} Σ tⁱRⁱ/i!`, summed until the scaled term drops below tolerance.
pub fn exp_operator(r: &Matrix, t: f64, cfg: &PrecisionConfig) -> Result<Matrix> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::OutOfRange(format!("time {t} must be finite and nonnegative")));
    }
    let n = r.n();
    let a = r.values();
    let damp = (-t).exp();
    let tol = cfg.tol.min(1e-14);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    let mut i = 0usize;
    loop {
        i += 1;
        term = (&term * a) * (t / i as f64);
        sum += &term;
        let size = term.iter().map(|x| x.abs()).fold(0.0, f64::max) * damp;
        if (i as f64) > t && size < tol {
            break;
        }
        if i > 100_000 {
            return Err(Error::NoConvergence(i));
        }
    }
    Matrix::from_dmatrix(sum * damp)
}

/// `‖D_u R D_v 1 − D_v Rᵀ D_u 1‖∞`.
pub fn eulerian_residual(r: &Matrix, pd: &PerronData) -> f64 {
    let a = r.values();
    let lhs = pd.u.component_mul(&(a * &pd.v));
    let rhs = pd.v.component_mul(&(a.transpose() * &pd.u));
    (lhs - rhs).amax()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::perron::perron;

    #[test]
    fn lazify_endpoints() {
        let j = Matrix::uniform(3);
        assert_eq!(lazify(&j, 0.0).unwrap(), j);
        assert_eq!(lazify(&j, 1.0).unwrap(), Matrix::identity(3));
        assert!(lazify(&j, 1.5).is_err());
    }

    #[test]
    fn normalize_halves_doubled_matrix() {
        let m = Matrix::from_dmatrix(DMatrix::from_element(3, 3, 2.0 / 3.0)).unwrap();
        let pd = perron(&m, &PrecisionConfig::machine()).unwrap();
        let out = normalize_pf(&m, &pd);
        assert!(out.values().iter().all(|&x| (x - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn exp_at_zero_is_identity() {
        let j = Matrix::uniform(4);
        let e = exp_operator(&j, 0.0, &PrecisionConfig::machine()).unwrap();
        assert!((e.values() - DMatrix::identity(4, 4)).amax() < 1e-15);
        let e = exp_operator(&Matrix::identity(4), 3.0, &PrecisionConfig::machine()).unwrap();
        assert!((e.values() - DMatrix::identity(4, 4)).amax() < 1e-12);
    }

    #[test]
    fn balance_is_identity_for_doubly_stochastic() {
        let j = Matrix::uniform(4);
        let (a, w) = balance(&j, &PerronData::uniform(4));
        assert_eq!(a, j);
        assert!((w.norm() - 1.0).abs() < 1e-15);
    }
}
