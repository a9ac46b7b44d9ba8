use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::core::matrix::rational_mul;
use crate::core::Matrix;
use crate::error::{Error, Result};
use crate::spectra::charpoly::is_prime_u64;
use crate::spectra::schur::rational_nullspace;
use crate::spectra::{eigenvalues, C64};

fn half() -> BigRational {
    BigRational::new(1.into(), 2.into())
}

/// Builds an exact matrix where each column `j` sends weight 1/2 to each target in `targets(j)`.
fn two_out(n: usize, targets: impl Fn(usize) -> [usize; 2]) -> Matrix {
    let mut e = vec![BigRational::zero(); n * n];
    for j in 0..n {
        for i in targets(j) {
            e[i * n + j] += half();
        }
    }
    Matrix::from_rational(n, e).expect("square")
}

/// De Bruijn matrix on `2^k` vertices: `a₁…a_k → a₂…a_k0, a₂…a_k1`, vertex index
/// the binary value with `a₁` most significant.
pub fn debruijn(k: u32) -> Result<Matrix> {
    if !(2..=20).contains(&k) {
        return Err(Error::OutOfRange(format!("de Bruijn order must be in 2..=20, got {k}")));
    }
    let n = 1usize << k;
    Ok(two_out(n, |j| {
        let s = (j << 1) & (n - 1);
        [s, s | 1]
    }))
}

/// Vertices whose k-bit string has `⌈k/2⌉` contiguous ones.
pub fn debruijn_nonexpanding_set(k: u32) -> Result<Vec<usize>> {
    if k < 3 {
        return Err(Error::OutOfRange(format!("the set is defined for k >= 3, got {k}")));
    }
    let r = k.div_ceil(2);
    let run = (1usize << r) - 1;
    Ok((0..1usize << k).filter(|&v| (0..=k - r).any(|s| (v >> s) & run == run)).collect())
}

/// `(k − r)·2^{k−r−1} + 2^{k−r}` with `r = ⌈k/2⌉`.
pub fn debruijn_set_size_formula(k: u32) -> usize {
    let r = k.div_ceil(2);
    ((k - r) as usize) * (1usize << (k - r - 1)) + (1usize << (k - r))
}

/// Rank of a row-major rational matrix.
pub fn rational_rank(n: usize, m: &[BigRational]) -> usize {
    n - rational_nullspace(n, m).len()
}

/// Jordan block census `(size, count)` for the eigenvalue 0, from the ranks of powers.
pub fn jordan_census_zero(m: &Matrix) -> Result<Vec<(usize, usize)>> {
    let n = m.n();
    let q = m.rational().ok_or_else(|| Error::OutOfRange("Jordan census needs exact entries".into()))?;
    let mut ranks = vec![n];
    let mut p = q.to_vec();
    loop {
        let rk = rational_rank(n, &p);
        let stalled = rk == *ranks.last().expect("nonempty");
        ranks.push(rk);
        if stalled || ranks.len() > n + 1 {
            break;
        }
        p = rational_mul(n, &p, q);
    }
    // at_least[s] = rank(M^{s−1}) − rank(M^s) blocks of size ≥ s.
    let at_least: Vec<usize> = (1..ranks.len()).map(|s| ranks[s - 1] - ranks[s]).collect();
    let mut out = Vec::new();
    for s in 1..=at_least.len() {
        let ge = at_least[s - 1];
        let gt = at_least.get(s).copied().unwrap_or(0);
        if ge > gt {
            out.push((s, ge - gt));
        }
    }
    Ok(out)
}

/// Klawe–Vazirani matrix: `v → v+1` and `v → 2v` modulo the prime `p`.
pub fn klawe_vazirani(p: usize) -> Result<Matrix> {
    if p < 3 || !is_prime_u64(p as u64) {
        return Err(Error::NotPrime(p));
    }
    Ok(two_out(p, |j| [(j + 1) % p, (2 * j) % p]))
}

/// The 4×4 matrix with non-expansion exactly 1/3.
pub fn beyond_half() -> Matrix {
    let third = BigRational::new(1.into(), 3.into());
    let z = BigRational::zero();
    let one = BigRational::from_integer(1.into());
    let mut e = Vec::with_capacity(16);
    for _ in 0..3 {
        e.extend([z.clone(), third.clone(), third.clone(), third.clone()]);
    }
    e.extend([one, z.clone(), z.clone(), z]);
    Matrix::from_rational(4, e).expect("square")
}

#[derive(Clone, Debug, Serialize)]
pub struct ApproxTraceReport {
    pub n: usize,
    pub alpha: f64,
    /// `Tr(Aᵏ)` for `k = 1..=n−1`.
    pub traces: Vec<f64>,
    pub max_deviation_below: f64,
    pub last_trace: f64,
    pub last_bound: f64,
    pub lambda2: [f64; 2],
    pub lambda2_expected: f64,
    pub holds: bool,
}

/// `A = αJ + (1−α)C` with `α = 2 ln n/(n−1)` and `C` an isolated vertex plus a directed (n−1)-cycle.
pub fn approx_trace_counterexample(n: usize) -> Result<(Matrix, ApproxTraceReport)> {
    if n < 8 {
        return Err(Error::OutOfRange(format!("counterexample needs n >= 8, got {n}")));
    }
    let alpha = 2.0 * (n as f64).ln() / (n as f64 - 1.0);
    let mut c = DMatrix::<f64>::zeros(n, n);
    c[(0, 0)] = 1.0;
    for j in 1..n {
        let next = if j == n - 1 { 1 } else { j + 1 };
        c[(next, j)] = 1.0;
    }
    let a = DMatrix::from_element(n, n, alpha / n as f64) + c * (1.0 - alpha);
    let m = Matrix::nonnegative(a.clone())?;
    let mut p = a.clone();
    let mut traces = Vec::with_capacity(n - 1);
    for _ in 1..n {
        traces.push(p.trace());
        p = &p * &a;
    }
    let max_deviation_below = traces[..n - 2].iter().fold(0.0f64, |acc, t| acc.max((t - 1.0).abs()));
    let last_trace = traces[n - 2];
    let last_bound = 1.0 + 1.0 / n as f64;
    let eigs = eigenvalues(&m);
    let l2: C64 = eigs[1];
    let lambda2_expected = 1.0 - alpha;
    let holds = max_deviation_below <= 1e-10 && last_trace <= last_bound + 1e-12 && (l2 - lambda2_expected).norm() <= 1e-8;
    let report = ApproxTraceReport {
        n,
        alpha,
        traces,
        max_deviation_below,
        last_trace,
        last_bound,
        lambda2: [l2.re, l2.im],
        lambda2_expected,
        holds,
    };
    Ok((m, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::PerronData;
    use crate::expansion::{phi_witness, Cut};

    #[test]
    fn debruijn_three_matches_printed_matrix() {
        let a = debruijn(3).unwrap();
        let nz: Vec<Vec<usize>> = (0..8).map(|i| (0..8).filter(|&j| a.get(i, j) > 0.0).collect()).collect();
        let expected = [[0, 4], [0, 4], [1, 5], [1, 5], [2, 6], [2, 6], [3, 7], [3, 7]];
        for i in 0..8 {
            assert_eq!(nz[i], expected[i].to_vec());
        }
        assert!(a.is_doubly_stochastic(0.0));
        assert_eq!(a.pow(3).unwrap(), Matrix::uniform(8));
    }

    #[test]
    fn debruijn_four_jordan_census() {
        let census = jordan_census_zero(&debruijn(4).unwrap()).unwrap();
        assert_eq!(census, vec![(1, 4), (2, 2), (3, 1), (4, 1)]);
    }

    #[test]
    fn nonexpanding_set_sizes() {
        for k in 3..=10 {
            assert_eq!(debruijn_nonexpanding_set(k).unwrap().len(), debruijn_set_size_formula(k), "k = {k}");
        }
        let s = debruijn_nonexpanding_set(4).unwrap();
        let rep = phi_witness(&debruijn(4).unwrap(), &PerronData::uniform(16), &s).unwrap();
        assert!(rep.phi <= 1.0);
        assert!(Cut::new(&s, &PerronData::uniform(16)).is_ok());
    }

    #[test]
    fn klawe_vazirani_seven_matches_printed_matrix() {
        let a = klawe_vazirani(7).unwrap();
        assert_eq!(a.get(0, 0), 0.5);
        assert_eq!(a.get(0, 6), 0.5);
        assert_eq!(a.get(2, 1), 1.0);
        assert_eq!(a.get(6, 3), 0.5);
        assert!(a.is_doubly_stochastic(0.0));
        assert_eq!(klawe_vazirani(9), Err(Error::NotPrime(9)));
    }

    #[test]
    fn beyond_half_structure() {
        let a = beyond_half();
        assert!(a.is_doubly_stochastic(0.0));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(a.get(i, j), a.get(3 - j, 3 - i));
            }
        }
        let e = eigenvalues(&a);
        assert_eq!(e[0], C64::new(1.0, 0.0));
        assert!((e[1] - C64::new(0.0, 0.0)).norm() == 0.0);
        assert!((e[3] - C64::new(-1.0 / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn approx_trace_sixteen() {
        let (_, rep) = approx_trace_counterexample(16).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!((rep.traces[4] - 1.0).abs() < 1e-10);
    }
}
