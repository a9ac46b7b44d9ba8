//! Characteristic polynomials in exact and high-precision arithmetic.
//!
//! Floating-point eigensolvers cannot resolve large Jordan blocks: a nilpotent
//! block of size m is smeared into a circle of radius about `ε^{1/m}`. For
//! matrices with exact entries we therefore compute `det(xI − M)` exactly
//! (rational input, multimodular Hessenberg reduction plus CRT) or at the
//! matrix's own decimal precision, and read off the multiplicities of the roots
//! 0 and 1 from the polynomial.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use nalgebra::{Complex, DMatrix};

use crate::core::{Decimal, DecimalContext};

type C64 = Complex<f64>;

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub(crate) fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Characteristic polynomial of an n×n matrix over Z/p, coefficients `c_0 = 1, …, c_n`
/// of `det(xI − N) = Σ c_t x^{n−t}`.
fn charpoly_mod_p(n: usize, entries: &[u64], p: u64) -> Vec<u64> {
    let mut h: Vec<Vec<u64>> = (0..n).map(|i| entries[i * n..(i + 1) * n].to_vec()).collect();
    // Similarity reduction to upper Hessenberg form.
    for j in 0..n.saturating_sub(2) {
        let Some(piv) = (j + 1..n).find(|&i| h[i][j] != 0) else { continue };
        if piv != j + 1 {
            h.swap(piv, j + 1);
            for row in h.iter_mut() {
                row.swap(piv, j + 1);
            }
        }
        let inv = pow_mod(h[j + 1][j], p - 2, p);
        for k in j + 2..n {
            if h[k][j] == 0 {
                continue;
            }
            let u = mul_mod(h[k][j], inv, p);
            for c in 0..n {
                let sub = mul_mod(u, h[j + 1][c], p);
                h[k][c] = (h[k][c] + p - sub) % p;
            }
            for row in h.iter_mut() {
                let add = mul_mod(u, row[k], p);
                row[j + 1] = (row[j + 1] + add) % p;
            }
        }
    }
    hessenberg_charpoly(
        n,
        |i, j| h[i][j],
        |a, b| (a + b) % p,
        |a, b| (a + p - b) % p,
        |a, b| mul_mod(a, b, p),
        0,
        1,
    )
}

/// Charpoly of an upper Hessenberg matrix through the leading-minor recurrence.
///
/// Coefficients are returned as `c_0..c_n` with `c_0 = 1`.
fn hessenberg_charpoly<T: Clone>(
    n: usize,
    h: impl Fn(usize, usize) -> T,
    add: impl Fn(T, T) -> T,
    sub: impl Fn(T, T) -> T,
    mul: impl Fn(T, T) -> T,
    zero: T,
    one: T,
) -> Vec<T> {
    // polys[m] has m+1 coefficients, highest degree first.
    let mut polys: Vec<Vec<T>> = vec![vec![one.clone()]];
    for m in 0..n {
        let prev = &polys[m];
        let mut next = vec![zero.clone(); m + 2];
        for (t, c) in prev.iter().enumerate() {
            next[t] = add(next[t].clone(), c.clone());
            next[t + 1] = sub(next[t + 1].clone(), mul(h(m, m), c.clone()));
        }
        let mut prod = one.clone();
        for i in (0..m).rev() {
            prod = mul(prod, h(i + 1, i));
            let coef = mul(h(i, m), prod.clone());
            // Subtract coef * polys[i], which has degree i, aligned at the low end.
            let shift = m + 1 - i;
            for (t, c) in polys[i].iter().enumerate() {
                next[t + shift] = sub(next[t + shift].clone(), mul(coef.clone(), c.clone()));
            }
        }
        polys.push(next);
    }
    polys.pop().expect("nonempty")
}

/// Exact characteristic polynomial of an integer matrix, by CRT over 62-bit primes.
pub fn charpoly_integer(n: usize, entries: &[BigInt]) -> Vec<BigInt> {
    // Each coefficient is bounded by ∏ (1 + ‖row_i‖₂) (Hadamard on principal minors).
    let mut bound_bits = 2u64;
    for i in 0..n {
        let sq: BigInt = entries[i * n..(i + 1) * n].iter().map(|x| x * x).sum();
        bound_bits += sq.bits() / 2 + 2;
    }
    let mut modulus = BigInt::one();
    let mut residues: Vec<BigInt> = vec![BigInt::zero(); n + 1];
    let mut p: u64 = (1u64 << 62) - 1;
    while modulus.bits() < bound_bits + 2 {
        while !is_prime_u64(p) {
            p -= 2;
        }
        let pb = BigInt::from(p);
        let reduced: Vec<u64> = entries.iter().map(|x| x.mod_floor(&pb).to_u64().expect("reduced")).collect();
        let cp = charpoly_mod_p(n, &reduced, p);
        // Garner-style update: x ≡ residues (mod modulus), x ≡ cp (mod p).
        let m_mod_p = modulus.mod_floor(&pb).to_u64().expect("reduced");
        let inv = pow_mod(m_mod_p, p - 2, p);
        for t in 0..=n {
            let cur = residues[t].mod_floor(&pb).to_u64().expect("reduced");
            let diff = (cp[t] + p - cur) % p;
            let k = mul_mod(diff, inv, p);
            residues[t] += &modulus * BigInt::from(k);
        }
        modulus *= &pb;
        p -= 2;
    }
    let half = &modulus >> 1;
    residues
        .into_iter()
        .map(|r| {
            let r = r.mod_floor(&modulus);
            if r > half {
                r - &modulus
            } else {
                r
            }
        })
        .collect()
}

/// Exact characteristic polynomial of a rational matrix.
pub fn charpoly_rational(n: usize, entries: &[BigRational]) -> Vec<BigRational> {
    let d = entries.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = entries.iter().map(|q| (q * BigRational::from_integer(d.clone())).to_integer()).collect();
    let c = charpoly_integer(n, &ints);
    let mut dt = BigInt::one();
    c.into_iter()
        .map(|ct| {
            let q = BigRational::new(ct, dt.clone());
            dt *= &d;
            q
        })
        .collect()
}

/// Characteristic polynomial in decimal arithmetic (pivoted Hessenberg reduction).
pub fn charpoly_decimal(n: usize, ctx: &DecimalContext, entries: &[Decimal]) -> Vec<Decimal> {
    let mut h: Vec<Vec<Decimal>> = (0..n).map(|i| entries[i * n..(i + 1) * n].to_vec()).collect();
    for j in 0..n.saturating_sub(2) {
        let piv = (j + 1..n).max_by(|&a, &b| h[a][j].abs().cmp(&h[b][j].abs())).expect("range nonempty");
        if h[piv][j].is_zero() {
            continue;
        }
        if piv != j + 1 {
            h.swap(piv, j + 1);
            for row in h.iter_mut() {
                row.swap(piv, j + 1);
            }
        }
        for k in j + 2..n {
            if h[k][j].is_zero() {
                continue;
            }
            let u = &h[k][j] / &h[j + 1][j];
            for c in 0..n {
                let sub = &u * &h[j + 1][c];
                h[k][c] = &h[k][c] - &sub;
            }
            for row in h.iter_mut() {
                let add = &u * &row[k];
                row[j + 1] = &row[j + 1] + &add;
            }
        }
    }
    hessenberg_charpoly(
        n,
        |i, j| h[i][j].clone(),
        |a, b| &a + &b,
        |a, b| &a - &b,
        |a, b| &a * &b,
        ctx.zero(),
        ctx.one(),
    )
}

/// Multiplicities of the roots 0 and 1 of a rational polynomial (highest degree first).
pub fn rational_root_census(coeffs: &[BigRational]) -> (usize, usize) {
    let mut c: Vec<BigRational> = coeffs.to_vec();
    let mut zeros = 0;
    while c.len() > 1 && c.last().is_some_and(Zero::is_zero) {
        c.pop();
        zeros += 1;
    }
    let mut ones = 0;
    loop {
        if c.len() <= 1 {
            break;
        }
        let at_one: BigRational = c.iter().cloned().sum();
        if !at_one.is_zero() {
            break;
        }
        // Synthetic division by (x − 1).
        let mut q = Vec::with_capacity(c.len() - 1);
        let mut acc = BigRational::zero();
        for coef in &c[..c.len() - 1] {
            acc += coef;
            q.push(acc.clone());
        }
        c = q;
        ones += 1;
    }
    (zeros, ones)
}

/// Root census at a tolerance, for decimal polynomials.
pub fn decimal_root_census(ctx: &DecimalContext, coeffs: &[Decimal], tol: &Decimal) -> (usize, usize) {
    let mut c: Vec<Decimal> = coeffs.to_vec();
    let mut zeros = 0;
    while c.len() > 1 && c.last().is_some_and(|x| x.abs() <= *tol) {
        c.pop();
        zeros += 1;
    }
    let mut ones = 0;
    while c.len() > 1 {
        let at_one = c.iter().fold(ctx.zero(), |acc, x| &acc + x);
        if at_one.abs() > *tol {
            break;
        }
        let mut q = Vec::with_capacity(c.len() - 1);
        let mut acc = ctx.zero();
        for coef in &c[..c.len() - 1] {
            acc = &acc + coef;
            q.push(acc.clone());
        }
        c = q;
        ones += 1;
    }
    (zeros, ones)
}

/// Power sums `p_k = Σ λᵢᵏ` for k = 1..=K from charpoly coefficients (Newton's identities).
pub fn power_sums_decimal(ctx: &DecimalContext, coeffs: &[Decimal], kmax: usize) -> Vec<Decimal> {
    // coeffs[t] = (−1)^t e_t.
    let n = coeffs.len() - 1;
    let e = |t: usize| -> Decimal {
        if t > n {
            ctx.zero()
        } else if t.is_multiple_of(2) {
            coeffs[t].clone()
        } else {
            -&coeffs[t]
        }
    };
    let mut p: Vec<Decimal> = Vec::with_capacity(kmax + 1);
    p.push(ctx.from_i64(n as i64));
    for k in 1..=kmax {
        let mut acc = ctx.zero();
        for i in 1..k {
            let term = &e(i) * &p[k - i];
            acc = if i % 2 == 1 { &acc + &term } else { &acc - &term };
        }
        let last = &e(k) * &ctx.from_i64(k as i64);
        acc = if k % 2 == 1 { &acc + &last } else { &acc - &last };
        p.push(acc);
    }
    p
}

// Dense rational polynomials, highest degree first, with no leading zeros
// (the zero polynomial is the empty vector).

fn trim(mut p: Vec<BigRational>) -> Vec<BigRational> {
    let lead = p.iter().position(|c| !c.is_zero()).unwrap_or(p.len());
    p.drain(..lead);
    p
}

fn monic(p: Vec<BigRational>) -> Vec<BigRational> {
    match p.first().cloned() {
        Some(lead) if !lead.is_one() => p.into_iter().map(|c| c / &lead).collect(),
        _ => p,
    }
}

fn derivative(p: &[BigRational]) -> Vec<BigRational> {
    let d = p.len().saturating_sub(1);
    trim(p[..d].iter().enumerate().map(|(k, c)| c * BigRational::from_integer(((d - k) as i64).into())).collect())
}

fn sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let len = a.len().max(b.len());
    let at = |p: &[BigRational], k: usize| if k + p.len() >= len { p[k + p.len() - len].clone() } else { BigRational::zero() };
    trim((0..len).map(|k| at(a, k) - at(b, k)).collect())
}

/// Quotient and remainder; `b` must be nonzero.
fn div_rem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut r: Vec<BigRational> = a.to_vec();
    if r.len() < b.len() {
        return (Vec::new(), r);
    }
    let qlen = r.len() - b.len() + 1;
    let mut q = Vec::with_capacity(qlen);
    for k in 0..qlen {
        let f = &r[k] / &b[0];
        for (j, bj) in b.iter().enumerate() {
            r[k + j] -= &f * bj;
        }
        q.push(f);
    }
    (q, trim(r.split_off(qlen)))
}

fn gcd(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let (mut x, mut y) = (monic(trim(a.to_vec())), monic(trim(b.to_vec())));
    while !y.is_empty() {
        let r = monic(div_rem(&x, &y).1);
        x = std::mem::replace(&mut y, r);
    }
    x
}

/// Yun's square-free factorization `p = c ∏ fᵢ^i`; returns the pairs `(i, fᵢ)`
/// with `fᵢ` monic of positive degree.
pub fn squarefree_factors(p: &[BigRational]) -> Vec<(usize, Vec<BigRational>)> {
    let p = monic(trim(p.to_vec()));
    let mut out = Vec::new();
    if p.len() <= 1 {
        return out;
    }
    let dp = derivative(&p);
    let c = gcd(&p, &dp);
    let mut w = div_rem(&p, &c).0;
    let mut y = div_rem(&dp, &c).0;
    let mut z = sub(&y, &derivative(&w));
    let mut i = 1;
    while w.len() > 1 {
        let g = gcd(&w, &z);
        w = div_rem(&w, &g).0;
        y = div_rem(&z, &g).0;
        z = sub(&y, &derivative(&w));
        if g.len() > 1 {
            out.push((i, g));
        }
        i += 1;
    }
    out
}

fn horner(p: &[f64], z: C64) -> (C64, C64) {
    let mut f = C64::new(0.0, 0.0);
    let mut df = C64::new(0.0, 0.0);
    for &c in p {
        df = df * z + f;
        f = f * z + c;
    }
    (f, df)
}

/// Roots of a monic square-free polynomial: exact 0 and 1 are split off exactly,
/// the rest come from the companion matrix and a few Newton steps.
fn simple_roots(p: &[BigRational]) -> Vec<C64> {
    let mut p = p.to_vec();
    let mut roots = Vec::new();
    if p.last().is_some_and(Zero::is_zero) {
        p.pop();
        roots.push(C64::new(0.0, 0.0));
    }
    if p.len() > 1 && p.iter().cloned().sum::<BigRational>().is_zero() {
        p = div_rem(&p, &[BigRational::one(), -BigRational::one()]).0;
        roots.push(C64::new(1.0, 0.0));
    }
    let d = p.len() - 1;
    if d == 0 {
        return roots;
    }
    let f: Vec<f64> = p.iter().map(|c| c.to_f64().unwrap_or(0.0)).collect();
    let comp = DMatrix::<f64>::from_fn(d, d, |i, j| if i == 0 { -f[j + 1] } else if i == j + 1 { 1.0 } else { 0.0 });
    for mut z in comp.complex_eigenvalues().iter().copied() {
        for _ in 0..3 {
            let (fz, dfz) = horner(&f, z);
            if dfz.norm() == 0.0 {
                break;
            }
            let next = z - fz / dfz;
            if !(horner(&f, next).0.norm() < fz.norm()) {
                break;
            }
            z = next;
        }
        if z.im.abs() <= 1e-14 * z.norm().max(1.0) {
            z.im = 0.0;
        }
        roots.push(z);
    }
    roots
}

/// Every root of a rational polynomial with its multiplicity, computed from the
/// square-free factors so that repeated roots come out as well-conditioned simple ones.
pub fn rational_roots(p: &[BigRational]) -> Vec<C64> {
    let mut out = Vec::new();
    for (mult, f) in squarefree_factors(p) {
        for z in simple_roots(&f) {
            out.extend(std::iter::repeat_n(z, mult));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn squarefree_split_of_repeated_roots() {
        // (x − 1)(x − 1/2)³ x² (x² + 1)
        let mut p = vec![q(1, 1)];
        let mut times = |r: &[BigRational]| {
            let mut out = vec![q(0, 1); p.len() + r.len() - 1];
            for (i, a) in p.iter().enumerate() {
                for (j, b) in r.iter().enumerate() {
                    out[i + j] += a * b;
                }
            }
            p = out;
        };
        times(&[q(1, 1), q(-1, 1)]);
        for _ in 0..3 {
            times(&[q(1, 1), q(-1, 2)]);
        }
        times(&[q(1, 1), q(0, 1), q(0, 1)]);
        times(&[q(1, 1), q(0, 1), q(1, 1)]);
        let f = squarefree_factors(&p);
        let degs: Vec<(usize, usize)> = f.iter().map(|(m, g)| (*m, g.len() - 1)).collect();
        assert_eq!(degs, vec![(1, 3), (2, 1), (3, 1)]);
        let mut roots = rational_roots(&p);
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        assert_eq!(roots.len(), 8);
        assert!(roots[..3].iter().all(|z| *z == C64::new(0.0, 0.0) || z.re == 0.0));
        assert_eq!(roots.iter().filter(|z| **z == C64::new(0.5, 0.0)).count(), 3);
        assert_eq!(roots.iter().filter(|z| **z == C64::new(1.0, 0.0)).count(), 1);
        assert!(roots.iter().any(|z| (z - C64::new(0.0, 1.0)).norm() < 1e-15));
    }

    #[test]
    fn primes_are_detected() {
        assert!(is_prime_u64(2));
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(1_000_000_007 * 3));
        assert!(is_prime_u64((1u64 << 61) - 1));
    }

    #[test]
    fn integer_charpoly_of_two_by_two() {
        // det(xI − [[1,2],[3,4]]) = x² − 5x − 2.
        let e: Vec<BigInt> = [1, 2, 3, 4].iter().map(|&x| BigInt::from(x)).collect();
        let c = charpoly_integer(2, &e);
        assert_eq!(c, vec![BigInt::from(1), BigInt::from(-5), BigInt::from(-2)]);
    }

    #[test]
    fn charpoly_handles_zero_pivots() {
        // Permutation matrix of a 3-cycle: x³ − 1.
        let e: Vec<BigInt> = [0, 0, 1, 1, 0, 0, 0, 1, 0].iter().map(|&x| BigInt::from(x)).collect();
        let c = charpoly_integer(3, &e);
        assert_eq!(c, vec![BigInt::from(1), BigInt::from(0), BigInt::from(0), BigInt::from(-1)]);
    }

    #[test]
    fn rational_census_counts_roots() {
        // J on 3 vertices: x²(x − 1).
        let c = charpoly_rational(3, &vec![q(1, 3); 9]);
        assert_eq!(c, vec![q(1, 1), q(-1, 1), q(0, 1), q(0, 1)]);
        assert_eq!(rational_root_census(&c), (2, 1));
    }

    #[test]
    fn large_entries_reconstruct() {
        let e: Vec<BigInt> = [10i64.pow(12), 7, -3, 10i64.pow(12)].iter().map(|&x| BigInt::from(x)).collect();
        let c = charpoly_integer(2, &e);
        let t = BigInt::from(2) * BigInt::from(10i64.pow(12));
        let d = BigInt::from(10i64.pow(12)) * BigInt::from(10i64.pow(12)) + BigInt::from(21);
        assert_eq!(c, vec![BigInt::one(), -t, d]);
    }

    #[test]
    fn decimal_power_sums_match_traces() {
        let ctx = DecimalContext::new(40);
        let vals = [1, 2, 0, 3];
        let e: Vec<Decimal> = vals.iter().map(|&x| ctx.from_i64(x)).collect();
        let c = charpoly_decimal(2, &ctx, &e);
        let p = power_sums_decimal(&ctx, &c, 3);
        // Eigenvalues 1 and 3.
        assert_eq!(p[1].to_string_places(10), "4.0000000000");
        assert_eq!(p[2].to_string_places(10), "10.0000000000");
        assert_eq!(p[3].to_string_places(10), "28.0000000000");
    }
}
