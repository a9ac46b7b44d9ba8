//! Standard matrix families and seeded random generators used by the test
//! suites, the verification drivers and the CLI.
//!
//! Matrices act by right multiplication: entry `(i, j)` is the weight of the
//! edge `j → i`.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::core::{balanced, lazify, Matrix, PerronData, PrecisionConfig};
use crate::error::Result;

/// Deterministic generator for a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rational_from(n: usize, f: impl Fn(usize, usize) -> (i64, i64)) -> Matrix {
    let entries = (0..n * n)
        .map(|k| {
            let (p, q) = f(k / n, k % n);
            if p == 0 {
                BigRational::zero()
            } else {
                BigRational::new(p.into(), q.into())
            }
        })
        .collect();
    Matrix::from_rational(n, entries).expect("family shape")
}

/// Permutation matrix of the directed cycle `j → j+1`.
pub fn directed_cycle(n: usize) -> Matrix {
    rational_from(n, |i, j| if i == (j + 1) % n { (1, 1) } else { (0, 1) })
}

/// Undirected cycle with weight 1/2 on each neighbour (n ≥ 3).
pub fn cycle(n: usize) -> Matrix {
    assert!(n >= 3, "cycle needs n >= 3");
    rational_from(n, |i, j| if i == (j + 1) % n || j == (i + 1) % n { (1, 2) } else { (0, 1) })
}

/// `(I + directed cycle)/2`.
pub fn lazy_directed_cycle(n: usize) -> Matrix {
    lazify(&directed_cycle(n), 0.5).expect("valid laziness")
}

/// `(I + cycle)/2` for the undirected cycle.
pub fn lazy_cycle(n: usize) -> Matrix {
    lazify(&cycle(n), 0.5).expect("valid laziness")
}

/// Normalized adjacency matrix of the d-dimensional hypercube on `2^d` vertices.
pub fn hypercube(d: u32) -> Matrix {
    let n = 1usize << d;
    rational_from(n, |i, j| if (i ^ j).count_ones() == 1 { (1, d as i64) } else { (0, 1) })
}

/// Dense random irreducible nonnegative matrix: a random Hamiltonian cycle plus
/// entries present with probability `density`, all weights uniform in (0, 1].
pub fn random_irreducible<R: Rng>(n: usize, density: f64, rng: &mut R) -> Matrix {
    let mut m = DMatrix::from_fn(n, n, |_, _| if rng.gen::<f64>() < density { rng.gen_range(0.01..1.0) } else { 0.0 });
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for k in 0..n {
        let (from, to) = (order[k], order[(k + 1) % n]);
        if n > 1 {
            m[(to, from)] = rng.gen_range(0.05..1.0);
        } else {
            m[(0, 0)] = rng.gen_range(0.05..1.0);
        }
    }
    Matrix::nonnegative(m).expect("finite entries")
}

/// Random doubly stochastic matrix as a convex combination of permutation
/// matrices, the first of which is an n-cycle (so the result is irreducible).
pub fn random_doubly_stochastic<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let terms = n + 1;
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut m = DMatrix::zeros(n, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for k in 0..n {
        m[(order[(k + 1) % n], order[k])] += weights[0];
    }
    for &w in &weights[1..] {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(rng);
        for (j, &i) in p.iter().enumerate() {
            m[(i, j)] += w;
        }
    }
    Matrix::nonnegative(m).expect("finite entries")
}

/// Random symmetric doubly stochastic matrix `(P + Pᵀ)/2`.
pub fn random_symmetric_doubly_stochastic<R: Rng>(n: usize, rng: &mut R) -> Matrix {
    let p = random_doubly_stochastic(n, rng);
    let v = p.values();
    Matrix::nonnegative((v + v.transpose()) * 0.5).expect("finite entries")
}

/// Balanced form of a random irreducible matrix, with its Perron data.
pub fn random_balanced<R: Rng>(n: usize, density: f64, rng: &mut R) -> Result<(Matrix, PerronData)> {
    balanced(&random_irreducible(n, density, rng), &PrecisionConfig::machine())
}

/// Random ½-lazy balanced matrix `(I + A)/2`.
pub fn random_half_lazy_balanced<R: Rng>(n: usize, density: f64, rng: &mut R) -> Result<(Matrix, PerronData)> {
    let (a, pd) = random_balanced(n, density, rng)?;
    Ok((lazify(&a, 0.5)?, pd))
}

/// Random real n×n matrix with entries uniform in `[-1, 1]`.
pub fn random_real<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
}
