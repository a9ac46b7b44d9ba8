//! Eigenvalues, singular values, the spectral gap, Schur forms and the
//! spectral bound calculators.

pub mod bounds;
pub mod charpoly;
pub mod schur;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::core::{is_irreducible, Matrix};
use crate::error::{Error, Result};

pub use bounds::{
    baur_fike_schur_check, buser_lower_bound, power_norm_bound, power_norm_threshold,
    power_norm_threshold_statement, singular_lower_bound, BaurFikeEntry, BaurFikeReport,
};
pub use schur::{schur_form, SchurForm};

pub type C64 = Complex<f64>;

/// Eigenvalues sorted by descending real part, singular values descending.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<C64>,
    pub singular_values: Vec<f64>,
    /// `max_λ σ_min(M − λI) / ‖M‖₂` over the reported eigenvalues.
    pub residual: f64,
    /// Exact multiplicities of the roots 0 and 1 when the matrix carries exact entries.
    pub exact_census: Option<(usize, usize)>,
}

/// JSON shape of an exported spectrum.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SpectrumJson {
    pub eigs: Vec<[f64; 2]>,
    pub svals: Vec<f64>,
    pub delta: Option<f64>,
}

impl Spectrum {
    pub fn to_json(&self, delta: Option<f64>) -> SpectrumJson {
        SpectrumJson {
            eigs: self.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
            svals: self.singular_values.clone(),
            delta,
        }
    }

    /// Second eigenvalue in the reporting order.
    pub fn lambda2(&self) -> Option<C64> {
        self.eigenvalues.get(1).copied()
    }
}

/// Orders by descending real part; near-ties put the larger imaginary part first.
pub fn sort_eigenvalues(eigs: &mut [C64]) {
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tie = 1e-12 * scale;
    eigs.sort_by(|a, b| {
        if (a.re - b.re).abs() <= tie {
            b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal)
        } else {
            b.re.partial_cmp(&a.re).unwrap_or(std::cmp::Ordering::Equal)
        }
    });
}

/// Multiplicities of the eigenvalues 0 and 1 read off an exact or decimal
/// characteristic polynomial, if the matrix carries exact entries.
pub fn exact_root_census(m: &Matrix) -> Option<(usize, usize)> {
    let n = m.n();
    if let Some(q) = m.rational() {
        let c = charpoly::charpoly_rational(n, q);
        return Some(charpoly::rational_root_census(&c));
    }
    if let Some((ctx, e)) = m.decimal() {
        let c = charpoly::charpoly_decimal(n, ctx, e);
        let tol = ctx.epsilon(20);
        return Some(charpoly::decimal_root_census(ctx, &c, &tol));
    }
    None
}

/// Replaces the `count` numerical eigenvalues nearest to `target` by `target` itself.
fn snap(eigs: &mut [C64], used: &mut [bool], target: f64, count: usize) {
    for _ in 0..count {
        let best = (0..eigs.len())
            .filter(|&i| !used[i])
            .min_by(|&a, &b| {
                let da = (eigs[a] - target).norm();
                let db = (eigs[b] - target).norm();
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            });
        if let Some(i) = best {
            eigs[i] = C64::new(target, 0.0);
            used[i] = true;
        }
    }
}

/// Largest rational matrix whose eigenvalues come from the square-free factors
/// of the exact characteristic polynomial.
pub const EXACT_ROOTS_LIMIT: usize = 64;

/// All eigenvalues, sorted.
///
/// Rational matrices up to [`EXACT_ROOTS_LIMIT`] take their eigenvalues from the
/// exact characteristic polynomial, which resolves defective eigenvalues; larger
/// exact matrices get their roots 0 and 1 placed exactly.
pub fn eigenvalues(m: &Matrix) -> Vec<C64> {
    if let Some(q) = m.rational().filter(|_| m.n() <= EXACT_ROOTS_LIMIT) {
        let mut eigs = charpoly::rational_roots(&charpoly::charpoly_rational(m.n(), q));
        if eigs.len() == m.n() {
            sort_eigenvalues(&mut eigs);
            return eigs;
        }
    }
    let mut eigs: Vec<C64> = m.values().complex_eigenvalues().iter().copied().collect();
    if let Some((zeros, ones)) = exact_root_census(m) {
        let mut used = vec![false; eigs.len()];
        snap(&mut eigs, &mut used, 0.0, zeros);
        snap(&mut eigs, &mut used, 1.0, ones);
    }
    sort_eigenvalues(&mut eigs);
    eigs
}

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Largest singular value.
pub fn norm2(m: &DMatrix<f64>) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

fn eigen_residual(m: &DMatrix<f64>, eigs: &[C64]) -> f64 {
    let n = m.nrows();
    let norm = norm2(m).max(f64::MIN_POSITIVE);
    let mc: DMatrix<C64> = m.map(|x| C64::new(x, 0.0));
    let mut seen: Vec<C64> = Vec::new();
    let mut worst: f64 = 0.0;
    for &l in eigs {
        if seen.iter().any(|s| (s - l).norm() <= 1e-12 * norm) {
            continue;
        }
        seen.push(l);
        let shifted = &mc - DMatrix::<C64>::identity(n, n) * l;
        let smin = shifted.singular_values().iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.max(smin / norm);
    }
    worst
}

/// Full spectrum of a square matrix.
pub fn spectrum(m: &Matrix) -> Result<Spectrum> {
    let census = exact_root_census(m);
    let eigs = eigenvalues(m);
    if eigs.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NoConvergence(0));
    }
    let singular_values = singular_values(m.values());
    let residual = eigen_residual(m.values(), &eigs);
    Ok(Spectrum { eigenvalues: eigs, singular_values, residual, exact_census: census })
}

/// `Δ = 1 − Re λ₂ / λ₁`.
pub fn spectral_gap(m: &Matrix) -> Result<f64> {
    if !m.is_nonnegative() || !is_irreducible(m) {
        return Err(Error::NotIrreducible);
    }
    let eigs = eigenvalues(m);
    if eigs.len() == 1 {
        return Ok(1.0);
    }
    Ok(1.0 - eigs[1].re / eigs[0].re)
}

/// `λ₂` in the reporting order.
pub fn lambda2(m: &Matrix) -> Result<C64> {
    let eigs = eigenvalues(m);
    eigs.get(1).copied().ok_or_else(|| Error::ShapeMismatch("λ₂ needs n >= 2".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{klawe_vazirani, rootn};
    use crate::random::{cycle, directed_cycle};

    #[test]
    fn uniform_has_one_and_zeros() {
        let s = spectrum(&Matrix::uniform(6)).unwrap();
        assert_eq!(s.eigenvalues[0], C64::new(1.0, 0.0));
        assert!(s.eigenvalues[1..].iter().all(|z| z.norm() == 0.0));
        assert_eq!(s.exact_census, Some((5, 1)));
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn directed_cycle_has_roots_of_unity() {
        let s = spectrum(&directed_cycle(4)).unwrap();
        let expected = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(0.0, -1.0), C64::new(-1.0, 0.0)];
        for (a, b) in s.eigenvalues.iter().zip(expected.iter()) {
            assert!((a - b).norm() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn gap_examples() {
        assert!((spectral_gap(&Matrix::uniform(5)).unwrap() - 1.0).abs() < 1e-15);
        let a9 = rootn(9).unwrap();
        assert!((spectral_gap(&a9).unwrap() - 1.0).abs() < 1e-15);
        let c8 = cycle(8);
        let want = 1.0 - (2.0 * std::f64::consts::PI / 8.0).cos();
        assert!((spectral_gap(&c8).unwrap() - want).abs() < 1e-12);
        assert_eq!(spectral_gap(&Matrix::identity(3)), Err(Error::NotIrreducible));
    }

    #[test]
    fn klawe_vazirani_seven() {
        let s = spectrum(&klawe_vazirani(7).unwrap()).unwrap();
        assert_eq!(s.exact_census, Some((0, 1)));
        assert!(s.eigenvalues[1..].iter().all(|z| z.norm() < 0.9));
        let det: C64 = s.eigenvalues.iter().product();
        assert!((det - C64::new(0.0625, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn rootn_nilpotent_part_is_exact() {
        let s = spectrum(&rootn(9).unwrap()).unwrap();
        assert_eq!(s.exact_census, Some((8, 1)));
        assert!(s.eigenvalues[1..].iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert!(s.residual < 1e-10);
    }

    #[test]
    fn json_shape() {
        let s = spectrum(&Matrix::uniform(2)).unwrap();
        let j = serde_json::to_value(s.to_json(Some(1.0))).unwrap();
        assert_eq!(j["eigs"][0][0], 1.0);
        assert_eq!(j["delta"], 1.0);
    }
}
