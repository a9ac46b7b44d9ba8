//! Randomized invariants, each checked against a direct computation where one is
//! cheap to write down.

use nalgebra::DMatrix;
use proptest::prelude::*;

use spectra::capacity::{capacity_monotonicity_check, BoundaryCondition};
use spectra::core::{balanced, perron, PerronData};
use spectra::expansion::{mu_expansion, phi_exact, verify_main_theorem};
use spectra::io::{matrix_from_str, matrix_to_string, MatrixFormat};
use spectra::mixing::{mixing_report, mixing_time};
use spectra::random::{
    random_balanced, random_doubly_stochastic, random_half_lazy_balanced, random_irreducible,
    random_symmetric_doubly_stochastic, rng,
};
use spectra::spectra::spectral_gap;
use spectra::tensor::{apply, fixed_point_iterate, random_one_line_stochastic, random_two_line_stochastic};
use spectra::{Matrix, PrecisionConfig};

const LIMIT: usize = 24;

fn machine() -> PrecisionConfig {
    PrecisionConfig::machine()
}

/// Minimum over |S| ≤ n/2 of the mass leaving S divided by |S|, valid for
/// doubly stochastic matrices (entry (i, j) is the weight of j → i).
fn phi_doubly_stochastic(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) - 1 {
        let size = mask.count_ones() as usize;
        if 2 * size > n {
            continue;
        }
        let mut out = 0.0;
        for j in 0..n {
            if mask >> j & 1 == 1 {
                for i in 0..n {
                    if mask >> i & 1 == 0 {
                        out += a[(i, j)];
                    }
                }
            }
        }
        best = best.min(out / size as f64);
    }
    best
}

/// Smallest t with max_i Σ_j |(Aᵗ − J/n)[j, i]| ≤ eps, for doubly stochastic A.
fn mixing_time_doubly_stochastic(a: &DMatrix<f64>, eps: f64) -> usize {
    let n = a.nrows();
    let j = DMatrix::from_element(n, n, 1.0 / n as f64);
    let mut p = a.clone();
    for t in 1..100_000 {
        let d = p - &j;
        let dist = (0..n).map(|i| d.column(i).abs().sum()).fold(0.0, f64::max);
        if dist <= eps {
            return t;
        }
        p = a * (d + &j);
    }
    panic!("did not mix");
}

fn lazy(a: &Matrix) -> Matrix {
    let n = a.n();
    Matrix::nonnegative((a.values() + DMatrix::identity(n, n)) * 0.5).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn phi_matches_direct_enumeration(seed in any::<u64>(), n in 2usize..=9) {
        let a = random_doubly_stochastic(n, &mut rng(seed));
        let rep = phi_exact(&a, &PerronData::uniform(n), LIMIT).unwrap();
        let oracle = phi_doubly_stochastic(a.values());
        prop_assert!((rep.phi - oracle).abs() <= 1e-12, "{} vs {}", rep.phi, oracle);
    }

    #[test]
    fn phi_equals_phi_of_symmetrization(seed in any::<u64>(), n in 2usize..=9) {
        let a = random_doubly_stochastic(n, &mut rng(seed));
        let s = Matrix::nonnegative((a.values() + a.values().transpose()) * 0.5).unwrap();
        let pd = PerronData::uniform(n);
        let pa = phi_exact(&a, &pd, LIMIT).unwrap().phi;
        let ps = phi_exact(&s, &pd, LIMIT).unwrap().phi;
        prop_assert!((pa - ps).abs() <= 1e-12);
    }

    #[test]
    fn cheeger_buser_on_symmetric(seed in any::<u64>(), n in 2usize..=9) {
        let a = random_symmetric_doubly_stochastic(n, &mut rng(seed));
        let phi = phi_exact(&a, &PerronData::uniform(n), LIMIT).unwrap().phi;
        let gap = spectral_gap(&a).unwrap();
        prop_assert!(gap / 2.0 <= phi + 1e-9, "gap {gap}, phi {phi}");
        prop_assert!(phi <= (2.0 * gap).sqrt() + 1e-9, "gap {gap}, phi {phi}");
    }

    #[test]
    fn main_theorem_sandwich(seed in any::<u64>(), n in 2usize..=8, density in 0.0f64..1.0) {
        let a = random_irreducible(n, density, &mut rng(seed));
        let rep = verify_main_theorem(&a).unwrap();
        prop_assert!(rep.lower <= rep.phi + 1e-9 && rep.phi <= rep.upper + 1e-9, "{rep:?}");
    }

    #[test]
    fn perron_vectors_are_positive_and_normalized(seed in any::<u64>(), n in 1usize..=12, density in 0.0f64..1.0) {
        let a = random_irreducible(n, density, &mut rng(seed));
        let pd = perron(&a, &machine()).unwrap();
        prop_assert!(pd.r > 0.0);
        prop_assert!(pd.u.iter().all(|x| *x > 0.0) && pd.v.iter().all(|x| *x > 0.0));
        prop_assert!((pd.v.sum() - 1.0).abs() <= 1e-12);
        prop_assert!((pd.u.dot(&pd.v) - 1.0).abs() <= 1e-12);
        let res = (a.values() * &pd.v - &pd.v * pd.r).abs().max();
        prop_assert!(res <= 1e-10 * pd.r.max(1.0), "residual {res}");
        let left = (a.values().transpose() * &pd.u - &pd.u * pd.r).abs().max();
        prop_assert!(left <= 1e-10 * pd.r.max(1.0) * pd.u.max(), "left residual {left}");
    }

    #[test]
    fn mixing_time_matches_direct_powers(seed in any::<u64>(), n in 2usize..=8) {
        let a = lazy(&random_doubly_stochastic(n, &mut rng(seed)));
        let tau = mixing_time(&a, &PerronData::uniform(n), 0.1).unwrap();
        prop_assert_eq!(tau, mixing_time_doubly_stochastic(a.values(), 0.1));
    }

    #[test]
    fn mixing_brackets_hold(seed in any::<u64>(), n in 2usize..=8, density in 0.1f64..0.9) {
        let (a, pd) = random_half_lazy_balanced(n, density, &mut rng(seed)).unwrap();
        let rep = mixing_report(&a, &pd, 0.1).unwrap();
        prop_assert!(rep.all_hold(), "{rep:?}");
    }

    #[test]
    fn mu_is_submultiplicative_in_the_min_sense(seed in any::<u64>(), n in 2usize..=8) {
        let mut g = rng(seed);
        let a = random_doubly_stochastic(n, &mut g);
        let b = random_doubly_stochastic(n, &mut g);
        let ab = a.mul(&b).unwrap();
        let (ma, mb, mab) = (
            mu_expansion(&a, LIMIT).unwrap().mu,
            mu_expansion(&b, LIMIT).unwrap().mu,
            mu_expansion(&ab, LIMIT).unwrap().mu,
        );
        prop_assert!(mab <= ma.min(mb) + 1e-9, "{mab} vs {ma}, {mb}");
    }

    #[test]
    fn capacity_is_monotone_in_alpha(seed in any::<u64>(), n in 3usize..=8, density in 0.1f64..0.9) {
        let (a, pd) = random_balanced(n, density, &mut rng(seed)).unwrap();
        let bc = BoundaryCondition::st(0, n - 1);
        let rep = capacity_monotonicity_check(&a, &pd.w(), &bc, &[0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        prop_assert!(rep.max_violation <= 1e-9, "{rep:?}");
    }

    #[test]
    fn machine_matrices_round_trip_through_json(seed in any::<u64>(), n in 1usize..=10) {
        let a = random_irreducible(n, 0.5, &mut rng(seed));
        let text = matrix_to_string(&a, MatrixFormat::Json).unwrap();
        let b = matrix_from_str(&text).unwrap();
        prop_assert!(a.values().iter().zip(b.values().iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 50, ..ProptestConfig::default() })]

    #[test]
    fn mixing_time_is_invariant_under_balancing(seed in any::<u64>(), n in 2usize..=8, density in 0.1f64..0.9) {
        let a = lazy(&random_irreducible(n, density, &mut rng(seed)));
        let pd = perron(&a, &machine()).unwrap();
        let r = Matrix::nonnegative(a.values() / pd.r).unwrap();
        let pd_r = PerronData { r: 1.0, ..pd };
        let (b, pw) = balanced(&a, &machine()).unwrap();
        let t1 = mixing_time(&r, &pd_r, 0.1).unwrap();
        let t2 = mixing_time(&b, &pw, 0.1).unwrap();
        prop_assert_eq!(t1, t2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn tensor_walk_preserves_probability(seed in any::<u64>(), k in 3usize..=5, n in 2usize..=4) {
        let mut g = rng(seed);
        let t = random_one_line_stochastic(k, n, &mut g).unwrap();
        let mut p: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut g, 0.0..1.0)).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let q = apply(&t, &p);
        prop_assert!(q.iter().all(|x| *x >= 0.0));
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn two_line_tensors_have_one_fixed_point(seed in any::<u64>(), a in 0.01f64..0.99, b in 0.01f64..0.99) {
        let t = random_two_line_stochastic(3, 2, &mut rng(seed)).unwrap();
        let x = fixed_point_iterate(&t, &[a, 1.0 - a], 1e-13, 100_000).unwrap();
        let y = fixed_point_iterate(&t, &[b, 1.0 - b], 1e-13, 100_000).unwrap();
        prop_assert!(x.converged && y.converged);
        prop_assert!((x.p[0] - 0.5).abs() <= 1e-8 && (y.p[0] - 0.5).abs() <= 1e-8, "{:?} {:?}", x.p, y.p);
    }
}
