//! One-sided Jacobi singular value decomposition.
//!
//! nalgebra's bidiagonal SVD computes singular values reliably, but on some
//! rank-deficient inputs (Laplacians among them) its singular vectors fail to
//! reconstruct the matrix. Anything that needs the factors goes through the
//! Hestenes iteration below, which orthogonalizes columns by plane rotations; the
//! cost is a few sweeps of `O(m n²)` work.

use nalgebra::{ComplexField, DMatrix, DVector};

const MAX_SWEEPS: usize = 80;

/// `M = U diag(σ) Vᴴ` with `σ` descending; `U` is `m × k`, `V` is `n × k`, `k = min(m, n)`.
#[derive(Clone, Debug)]
pub struct Svd<T: ComplexField> {
    pub u: DMatrix<T>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<T>,
}

pub fn svd<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> Svd<T> {
    if m.nrows() < m.ncols() {
        let t = svd(&m.adjoint());
        return Svd { u: t.v, singular_values: t.singular_values, v: t.u };
    }
    let (rows, n) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<T>::identity(n, n);
    let eps = f64::EPSILON;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.clone().modulus();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate column q by the phase of gamma so the pair's inner product is real.
                let phase = gamma.unscale(g).conjugate();
                for i in 0..rows {
                    a[(i, q)] = a[(i, q)].clone() * phase.clone();
                }
                for i in 0..n {
                    v[(i, q)] = v[(i, q)].clone() * phase.clone();
                }
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let rot = |x: &mut DMatrix<T>, len: usize| {
                    for i in 0..len {
                        let xp = x[(i, p)].clone();
                        let xq = x[(i, q)].clone();
                        x[(i, p)] = xp.clone().scale(c) - xq.clone().scale(s);
                        x[(i, q)] = xp.scale(s) + xq.scale(c);
                    }
                };
                rot(&mut a, rows);
                rot(&mut v, n);
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = (0..n).map(|j| a.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let mut u = DMatrix::<T>::zeros(rows, n);
    let mut vs = DMatrix::<T>::zeros(n, n);
    for (k, &j) in order.iter().enumerate() {
        if norms[j] > 0.0 {
            u.set_column(k, &a.column(j).unscale(norms[j]));
        }
        vs.set_column(k, &v.column(j));
    }
    let singular_values = DVector::from_iterator(n, order.iter().map(|&j| norms[j]));
    Svd { u, singular_values, v: vs }
}

/// Moore–Penrose pseudoinverse; singular values below `rel · σ_max` count as zero.
pub fn pseudo_inverse<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel: f64) -> DMatrix<T> {
    let d = svd(m);
    let cut = rel * d.singular_values.iter().copied().fold(0.0, f64::max);
    let mut vs = d.v.clone();
    for (k, s) in d.singular_values.iter().enumerate() {
        let inv = if *s > cut { 1.0 / s } else { 0.0 };
        for i in 0..vs.nrows() {
            vs[(i, k)] = vs[(i, k)].clone().scale(inv);
        }
    }
    vs * d.u.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Complex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reconstructs_real_and_complex() {
        let mut g = ChaCha8Rng::seed_from_u64(1);
        for (r, c) in [(6, 6), (7, 4), (3, 8)] {
            let m = DMatrix::<f64>::from_fn(r, c, |_, _| g.gen_range(-1.0..1.0));
            let d = svd(&m);
            let rec = &d.u * DMatrix::from_diagonal(&d.singular_values) * d.v.transpose();
            assert!((rec - &m).amax() < 1e-13);
            let z = DMatrix::<Complex<f64>>::from_fn(r, c, |_, _| Complex::new(g.gen_range(-1.0..1.0), g.gen_range(-1.0..1.0)));
            let d = svd(&z);
            let sig = DMatrix::from_diagonal(&d.singular_values.map(|s| Complex::new(s, 0.0)));
            assert!((&d.u * sig * d.v.adjoint() - &z).camax() < 1e-13);
            assert!(d.singular_values.as_slice().windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn rank_deficient_pseudo_inverse() {
        // Laplacian of the 4-cycle: rank 3, kernel spanned by the ones vector.
        let l = DMatrix::from_fn(4, 4, |i, j| {
            if i == j {
                1.0
            } else if (i + 1) % 4 == j || (j + 1) % 4 == i {
                -0.5
            } else {
                0.0
            }
        });
        let p = pseudo_inverse(&l, 1e-12);
        assert!((&l * &p * &l - &l).amax() < 1e-14);
        assert!((&p * &l * &p - &p).amax() < 1e-14);
        assert!(svd(&l).singular_values[3] < 1e-15);
    }
}
