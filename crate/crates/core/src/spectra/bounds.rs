use nalgebra::DMatrix;
use serde::Serialize;

use super::{singular_values, C64};
use crate::core::Matrix;
use crate::error::{Error, Result};

/// `(1 − γ)/2` with `γ` the second eigenvalue of `(A + Aᵀ)/2`; a lower bound on `φ(A)`.
pub fn buser_lower_bound(a: &Matrix, w: &nalgebra::DVector<f64>) -> f64 {
    debug_assert_eq!(w.len(), a.n());
    let v = a.values();
    let sym = (v + v.transpose()) * 0.5;
    let mut e: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    let gamma = e.get(1).copied().unwrap_or(0.0);
    (1.0 - gamma) / 2.0
}

/// `(1 − σ₂(A))/2`.
pub fn singular_lower_bound(a: &Matrix) -> f64 {
    let s = singular_values(a.values());
    (1.0 - s.get(1).copied().unwrap_or(0.0)) / 2.0
}

/// `n·σⁿ·C(k+n, n)·α^{k−n}`, evaluated through logarithms.
pub fn power_norm_bound(n: usize, sigma: f64, alpha: f64, k: usize) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) || sigma < 1.0 || k < n {
        return Err(Error::OutOfRange(format!("need 0 <= α < 1, σ >= 1, k >= n (α={alpha}, σ={sigma}, k={k}, n={n})")));
    }
    if alpha == 0.0 {
        return Ok(if k > n { 0.0 } else { n as f64 * sigma.powi(n as i32) });
    }
    let ln_binom: f64 = (1..=n).map(|i| ((k + i) as f64 / i as f64).ln()).sum();
    let log = (n as f64).ln() + n as f64 * sigma.ln() + ln_binom + (k - n) as f64 * alpha.ln();
    Ok(log.exp())
}

fn threshold(lead: f64, tail: f64, n: usize, alpha: f64, eps: f64) -> Result<u64> {
    if !(alpha > 0.0 && alpha < 1.0) || !(eps > 0.0 && eps < 1.0) || n == 0 {
        return Err(Error::OutOfRange(format!("need 0 < α < 1 and 0 < ε < 1 (α={alpha}, ε={eps})")));
    }
    let k = (lead * n as f64 + tail * (n as f64 / eps).ln()) / (1.0 / alpha).ln();
    Ok(k.ceil().max(n as f64) as u64)
}

/// Power beyond which `‖Tᵏ‖₂ ≤ ε` for upper triangular `T` with `‖T‖₂ ≤ 1` and diagonal
/// bounded by `α`, with constants 3.51 and 1.385.
pub fn power_norm_threshold(n: usize, alpha: f64, eps: f64) -> Result<u64> {
    threshold(3.51, 1.385, n, alpha, eps)
}

/// The same threshold with the rounded constants 4 and 2.
pub fn power_norm_threshold_statement(n: usize, alpha: f64, eps: f64) -> Result<u64> {
    threshold(4.0, 2.0, n, alpha, eps)
}

#[derive(Clone, Debug, Serialize)]
pub struct BaurFikeEntry {
    pub mu: [f64; 2],
    pub lambda: [f64; 2],
    pub gap: f64,
    /// Natural log of the right-hand side; the inequality holds when this is nonnegative.
    pub log_rhs: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaurFikeReport {
    pub norm_a: f64,
    pub norm_e: f64,
    pub entries: Vec<BaurFikeEntry>,
    pub holds: bool,
}

/// Checks `1 ≤ (1/g)(1 + ‖A‖₂/g)^{n−1} ‖E‖₂` for every eigenvalue of `A + E`, `g` the distance
/// to the nearest eigenvalue of `A`.
pub fn baur_fike_schur_check(a: &Matrix, e: &Matrix) -> Result<BaurFikeReport> {
    let n = a.n();
    if e.n() != n {
        return Err(Error::ShapeMismatch("A and E differ in size".into()));
    }
    let lam: Vec<C64> = a.values().complex_eigenvalues().iter().copied().collect();
    let sum: DMatrix<f64> = a.values() + e.values();
    let mus: Vec<C64> = sum.complex_eigenvalues().iter().copied().collect();
    let norm_a = singular_values(a.values())[0];
    let norm_e = singular_values(e.values())[0];
    let mut entries = Vec::with_capacity(n);
    for mu in mus {
        let nearest = lam
            .iter()
            .copied()
            .min_by(|x, y| (x - mu).norm().partial_cmp(&(y - mu).norm()).unwrap_or(std::cmp::Ordering::Equal))
            .expect("n >= 1");
        let gap = (nearest - mu).norm();
        let (log_rhs, holds) = if gap <= f64::MIN_POSITIVE {
            (f64::INFINITY, true)
        } else {
            let l = -gap.ln() + (n as f64 - 1.0) * (1.0 + norm_a / gap).ln() + norm_e.ln();
            (l, l >= -1e-12)
        };
        entries.push(BaurFikeEntry { mu: [mu.re, mu.im], lambda: [nearest.re, nearest.im], gap, log_rhs, holds });
    }
    let holds = entries.iter().all(|x| x.holds);
    Ok(BaurFikeReport { norm_a, norm_e, entries, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::rootn;
    use crate::core::balanced;
    use crate::random::directed_cycle;
    use crate::PrecisionConfig;
    use nalgebra::DVector;

    #[test]
    fn uniform_bounds_are_half() {
        let j = Matrix::uniform(5);
        let w = DVector::from_element(5, 1.0 / 5f64.sqrt());
        assert!((buser_lower_bound(&j, &w) - 0.5).abs() < 1e-12);
        assert!((singular_lower_bound(&j) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_bound_examples() {
        let (c, _) = balanced(&directed_cycle(7), &PrecisionConfig::machine()).unwrap();
        assert!(singular_lower_bound(&c).abs() < 1e-12);
        assert!((singular_lower_bound(&rootn(9).unwrap()) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn power_norm_bound_formula() {
        assert_eq!(power_norm_bound(3, 1.0, 0.0, 5).unwrap(), 0.0);
        assert!((power_norm_bound(2, 1.0, 0.5, 4).unwrap() - 7.5).abs() < 1e-12);
        assert!(power_norm_bound(2, 0.5, 0.5, 4).is_err());
    }

    #[test]
    fn threshold_constants() {
        let a = (-1f64).exp();
        // 3.51·5 + 1.385·ln 50 = 22.968…
        assert_eq!(power_norm_threshold(5, a, 0.1).unwrap(), 23);
        // 4·5 + 2·ln 50 = 27.82…
        assert_eq!(power_norm_threshold_statement(5, a, 0.1).unwrap(), 28);
    }

    #[test]
    fn baur_fike_trivial_and_diagonal() {
        let a = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let zero = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let r = baur_fike_schur_check(&a, &zero).unwrap();
        assert!(r.holds && r.entries.iter().all(|e| e.gap == 0.0));
        let e = Matrix::from_rows(&[vec![0.01, 0.0], vec![0.0, 0.01]]).unwrap();
        let r = baur_fike_schur_check(&a, &e).unwrap();
        assert!(r.holds);
        assert!(r.entries.iter().all(|x| (x.gap - 0.01).abs() < 1e-12));
    }
}
