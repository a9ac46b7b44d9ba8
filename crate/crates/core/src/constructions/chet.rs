//! Chet matrices: lower Hessenberg–Toeplitz doubly stochastic matrices whose
//! nontrivial eigenvalues all vanish, built diagonal by diagonal from the
//! conditions `Tr(Cᵏ) = 1`.
//!
//! Layout (0-based): `C[i][i+1] = r` for `i < n−1`; for rows `1 ≤ i ≤ n−2`,
//! `C[i][j] = c_{i−j}` when `1 ≤ j ≤ i`; the first column holds `b_i` in row `i`
//! and the last row holds `b_{n−1−j}` in column `j`. Traces are read from the
//! characteristic polynomial (via the Hessenberg leading-minor recurrence,
//! truncated to the needed degree) and Newton's identities.

use rayon::prelude::*;
use serde::Serialize;

use crate::core::{Decimal, DecimalContext, Matrix, PerronData, PrecisionConfig};
use crate::expansion::phi_interval_scan;
use crate::error::{Error, Result};
use crate::spectra::charpoly::power_sums_decimal;

/// Digits of headroom on top of the requested precision, plus a size-dependent
/// share covering the cancellation in Newton's identities.
fn guard_digits(n: usize) -> u32 {
    40 + (0.31 * n as f64).ceil() as u32
}

#[derive(Clone, Debug)]
pub struct ChetData {
    pub n: usize,
    pub digits: u32,
    pub r: Decimal,
    /// `c_0, …, c_{n−3}`.
    pub c: Vec<Decimal>,
    /// `b_0, …, b_{n−1}`.
    pub b: Vec<Decimal>,
    pub min_entry: Decimal,
    pub nonnegative: bool,
    /// `Tr(Cᵏ) − 1` for `k = 1..=n−1`.
    pub trace_residuals: Vec<f64>,
    /// Difference between the corner closed from the last row and from the first column.
    pub corner_crosscheck: f64,
}

#[derive(Serialize)]
pub struct ChetSummary {
    pub n: usize,
    pub digits: u32,
    pub r: String,
    pub c: Vec<String>,
    pub b: Vec<String>,
    pub min_entry: String,
    pub nonnegative: bool,
    pub max_trace_residual: f64,
}

impl ChetData {
    pub fn max_trace_residual(&self) -> f64 {
        self.trace_residuals.iter().fold(0.0, |a, x| a.max(x.abs()))
    }

    pub fn summary(&self, places: u32) -> ChetSummary {
        ChetSummary {
            n: self.n,
            digits: self.digits,
            r: self.r.to_string_places(places),
            c: self.c.iter().map(|x| x.to_string_places(places)).collect(),
            b: self.b.iter().map(|x| x.to_string_places(places)).collect(),
            min_entry: self.min_entry.to_string_places(places),
            nonnegative: self.nonnegative,
            max_trace_residual: self.max_trace_residual(),
        }
    }
}

/// Dense working matrix with `None` for structural zeros.
struct Work {
    n: usize,
    e: Vec<Option<Decimal>>,
}

impl Work {
    fn get(&self, i: usize, j: usize) -> Option<&Decimal> {
        self.e[i * self.n + j].as_ref()
    }
    fn set(&mut self, i: usize, j: usize, v: Decimal) {
        self.e[i * self.n + j] = Some(v);
    }
}

/// Coefficients `a_0..a_kmax` of `det(xI − C)` for `C` lower Hessenberg with constant
/// superdiagonal `r` (powers of `r` supplied in `rpow`).
fn truncated_charpoly(w: &Work, rpow: &[Decimal], kmax: usize, ctx: &DecimalContext) -> Vec<Decimal> {
    let n = w.n;
    let zero = ctx.zero();
    // polys[j][t] is the coefficient of x^{j−t} in the j×j leading minor's charpoly.
    let mut polys: Vec<Vec<Decimal>> = Vec::with_capacity(n + 1);
    let mut p0 = vec![zero.clone(); kmax + 1];
    p0[0] = ctx.one();
    polys.push(p0);
    for m in 0..n {
        let prev = &polys[m];
        let mut next = prev.clone();
        if let Some(h) = w.get(m, m) {
            for t in 1..=kmax.min(m + 1) {
                if !prev[t - 1].is_zero() {
                    next[t] = &next[t] - &(h * &prev[t - 1]);
                }
            }
        }
        let lo = (m + 1).saturating_sub(kmax);
        for i in lo..m {
            let Some(h) = w.get(m, i) else { continue };
            let coef = h * &rpow[m - i];
            let shift = m - i + 1;
            for t in shift..=kmax {
                let src = &polys[i][t - shift];
                if !src.is_zero() {
                    next[t] = &next[t] - &(&coef * src);
                }
            }
        }
        polys.push(next);
    }
    polys.pop().expect("nonempty")
}

fn traces(w: &Work, rpow: &[Decimal], kmax: usize, ctx: &DecimalContext) -> Vec<Decimal> {
    let coeffs = truncated_charpoly(w, rpow, kmax, ctx);
    power_sums_decimal(ctx, &coeffs, kmax)
}

/// Builds `C_n` at the configured decimal precision.
pub fn chet(n: usize, cfg: &PrecisionConfig) -> Result<(Matrix, ChetData)> {
    if n < 4 {
        return Err(Error::OutOfRange(format!("chet needs n >= 4, got {n}")));
    }
    let digits = cfg.digits().unwrap_or(100);
    if digits < 20 {
        return Err(Error::OutOfRange("chet needs at least 20 digits".into()));
    }
    let out_ctx = DecimalContext::new(digits);
    let ctx = out_ctx.widened(guard_digits(n));
    let one = ctx.one();
    let inv_n = ctx.from_ratio(&1.into(), &(n as i64).into());
    let r = ctx.nth_root(&inv_n, (n - 1) as u32)?;
    let mut rpow = vec![one.clone()];
    for k in 1..n {
        let next = &rpow[k - 1] * &r;
        rpow.push(next);
    }

    let mut w = Work { n, e: vec![None; n * n] };
    for i in 0..n - 1 {
        w.set(i, i + 1, r.clone());
    }
    let b0 = &one - &r;
    w.set(0, 0, b0.clone());
    w.set(n - 1, n - 1, b0.clone());
    let mut b = vec![b0];
    let mut c: Vec<Decimal> = Vec::with_capacity(n - 2);
    for k in 1..=n - 2 {
        let tr = traces(&w, &rpow, k, &ctx)[k].clone();
        let denom = &ctx.from_i64((k * (n - k - 1)) as i64) * &rpow[k - 1];
        let ck = &(&one - &tr) / &denom;
        let d = k - 1;
        for i in 1..n - 1 {
            if i > d {
                w.set(i, i - d, ck.clone());
            }
        }
        let bk = &b[k - 1] - &ck;
        c.push(ck);
        w.set(k, 0, bk.clone());
        w.set(n - 1, n - 1 - k, bk.clone());
        b.push(bk);
    }
    // Corner: close the last row, and cross-check against the first column.
    let row_rest = (1..n).filter_map(|j| w.get(n - 1, j)).fold(ctx.zero(), |acc, x| &acc + x);
    let corner = &one - &row_rest;
    let col_rest = (0..n - 1).filter_map(|i| w.get(i, 0)).fold(ctx.zero(), |acc, x| &acc + x);
    let corner_col = &one - &col_rest;
    let corner_crosscheck = (&corner - &corner_col).abs().to_f64();
    w.set(n - 1, 0, corner.clone());
    b.push(corner);

    let all = traces(&w, &rpow, n - 1, &ctx);
    let trace_residuals: Vec<f64> = (1..n).map(|k| (&all[k] - &one).to_f64()).collect();
    let tol = out_ctx.epsilon(15).to_f64();
    if trace_residuals.iter().any(|x| x.abs() > tol) {
        return Err(Error::PrecisionExhausted(trace_residuals.iter().fold(0.0, |a, x| a.max(x.abs()))));
    }

    let entries: Vec<Decimal> =
        w.e.iter().map(|x| x.as_ref().map_or_else(|| out_ctx.zero(), |v| out_ctx.rescale(v))).collect();
    let min_entry = c.iter().chain(b.iter()).min().cloned().expect("nonempty").clone();
    let nonnegative = !min_entry.is_negative();
    let data = ChetData {
        n,
        digits,
        r: out_ctx.rescale(&r),
        c: c.iter().map(|x| out_ctx.rescale(x)).collect(),
        b: b.iter().map(|x| out_ctx.rescale(x)).collect(),
        min_entry: out_ctx.rescale(&min_entry),
        nonnegative,
        trace_residuals,
        corner_crosscheck,
    };
    Ok((Matrix::from_decimal(n, out_ctx, entries)?, data))
}

/// Closed forms for `c_0`, `c_1`, `c_2` as functions of n.
pub fn chet_analytic(n: usize, i: usize, ctx: &DecimalContext) -> Result<Decimal> {
    if n < 6 {
        return Err(Error::OutOfRange(format!("closed forms need n >= 6, got {n}")));
    }
    let inv_n = ctx.from_ratio(&1.into(), &(n as i64).into());
    let r = ctx.nth_root(&inv_n, (n - 1) as u32)?;
    let nd = ctx.from_i64(n as i64);
    let k = |v: i64| ctx.from_i64(v);
    let ni = n as i64;
    match i {
        0 => Ok(&(&(&k(2) * &r) - &k(1)) / &k(ni - 2)),
        1 => {
            let num = &(&(&(&k(2) * &r.powi(2)) - &k(1)) * &nd) + &k(1);
            let den = &k(2 * (ni - 3) * (ni - 2)) * &r;
            Ok(&num / &den)
        }
        2 => {
            let r3 = r.powi(3);
            let t3 = &(&(&k(2) * &r3) - &k(1)) * &nd.powi(3);
            let t2 = &(&(&(&k(-8) * &r3) + &(&k(3) * &r)) + &k(4)) * &nd.powi(2);
            let t1 = &(&(&(&k(12) * &r3) - &(&k(15) * &r)) - &k(3)) * &nd;
            let t0 = &k(12) * &r;
            let num = &(&(&t3 + &t2) + &t1) + &t0;
            let den = &k(3 * (ni - 4) * (ni - 3) * (ni - 2) * (ni - 2)) * &r.powi(2);
            Ok(&num / &den)
        }
        _ => Err(Error::OutOfRange(format!("closed forms exist for i in 0..=2, got {i}"))),
    }
}

/// `c_k` from the n = 16 exact equations `(14−k)·r^k·c_k = p_k(r)`, k ≤ 7.
pub fn chet16_equation(k: usize, ctx: &DecimalContext) -> Result<Decimal> {
    // (numerator, denominator, power of r) per term.
    const TERMS: [&[(i128, i128, u32)]; 8] = [
        &[(2, 1, 1), (-1, 1, 0)],
        &[(8, 7, 2), (-15, 28, 0)],
        &[(528, 637, 3), (45, 637, 1), (-20, 49, 0)],
        &[(38980, 57967, 4), (7095, 231868, 2), (110, 1029, 1), (-334605, 927472, 0)],
        &[(2622960, 4463459, 5), (15675, 811538, 3), (3650, 93639, 2), (5019075, 35707672, 1), (-21653, 62426, 0)],
        &[
            (221814104, 406174769, 6),
            (23279535, 1624699076, 4),
            (4980, 218491, 3),
            (135515025, 3249398152, 2),
            (194877, 1092455, 1),
            (-4578373505, 12997592608, 0),
        ],
        &[
            (96435386896, 179123073129, 7),
            (33490290, 2843223383, 5),
            (10590760, 656128473, 4),
            (63909555, 2843223383, 3),
            (4070764, 99413405, 2),
            (22891867525, 102356041788, 1),
            (-569210253, 1530966437, 0),
        ],
        &[
            (14468197830722, 25614599457447, 8),
            (4659561625, 443542847748, 6),
            (8450450, 656128473, 5),
            (98852689755, 6505295100304, 4),
            (2013729, 99413405, 3),
            (389161747925, 10645028345952, 2),
            (1707630759, 6123865748, 1),
            (-42029290110657, 104084721604864, 0),
        ],
    ];
    let terms = TERMS.get(k).ok_or_else(|| Error::OutOfRange(format!("equations known for k <= 7, got {k}")))?;
    let inv = ctx.from_ratio(&1.into(), &16.into());
    let r = ctx.nth_root(&inv, 15)?;
    let rhs = terms.iter().fold(ctx.zero(), |acc, &(p, q, e)| {
        &acc + &(&ctx.from_ratio(&p.into(), &q.into()) * &r.powi(e))
    });
    let lhs_coef = &ctx.from_i64(14 - k as i64) * &r.powi(k as u32);
    Ok(&rhs / &lhs_coef)
}

#[derive(Clone, Debug, Serialize)]
pub struct ChetScanRow {
    pub n: usize,
    pub min_c: Option<f64>,
    pub min_c_index: Option<usize>,
    pub min_b: Option<f64>,
    pub min_b_index: Option<usize>,
    pub max_trace_residual: Option<f64>,
    /// `φ` of the best contiguous interval, an upper bound on `φ(Cₙ)`.
    pub phi_interval: Option<f64>,
    /// `nonnegative`, `negative`, or the error that stopped this row.
    pub verdict: String,
}

impl ChetScanRow {
    fn failed(n: usize, e: &Error) -> Self {
        ChetScanRow {
            n,
            min_c: None,
            min_c_index: None,
            min_b: None,
            min_b_index: None,
            max_trace_residual: None,
            phi_interval: None,
            verdict: match e {
                Error::PrecisionExhausted(_) => format!("precision-exhausted ({e})"),
                _ => format!("error ({e})"),
            },
        }
    }

    pub fn nonnegative(&self) -> bool {
        self.verdict == "nonnegative"
    }
}

fn scan_row(n: usize, cfg: &PrecisionConfig) -> Result<ChetScanRow> {
    let (m, d) = chet(n, cfg)?;
    let argmin = |v: &[Decimal]| {
        v.iter().enumerate().min_by(|a, b| a.1.cmp(b.1)).map(|(i, x)| (i, x.to_f64())).expect("nonempty")
    };
    let (ci, cv) = argmin(&d.c);
    let (bi, bv) = argmin(&d.b);
    let phi = phi_interval_scan(&m.to_machine(), &PerronData::uniform(n))?.phi;
    Ok(ChetScanRow {
        n,
        min_c: Some(cv),
        min_c_index: Some(ci),
        min_b: Some(bv),
        min_b_index: Some(bi),
        max_trace_residual: Some(d.max_trace_residual()),
        phi_interval: Some(phi),
        verdict: if d.nonnegative { "nonnegative" } else { "negative" }.into(),
    })
}

/// `chet(n)` for every n in the range, in parallel; a failing n yields a row with its
/// error as the verdict and the scan continues. Rows come back in ascending n.
pub fn chet_scan(n_lo: usize, n_hi: usize, cfg: &PrecisionConfig) -> Result<Vec<ChetScanRow>> {
    if n_lo < 4 || n_hi < n_lo {
        return Err(Error::OutOfRange(format!("need 4 <= n_lo <= n_hi, got {n_lo}..{n_hi}")));
    }
    Ok((n_lo..=n_hi)
        .into_par_iter()
        .map(|n| scan_row(n, cfg).unwrap_or_else(|e| ChetScanRow::failed(n, &e)))
        .collect())
}

/// Permanent by Ryser's formula, in decimal arithmetic.
pub fn permanent(n: usize, ctx: &DecimalContext, e: &[Decimal]) -> Decimal {
    let mut total = ctx.zero();
    for mask in 1u32..(1u32 << n) {
        let mut prod = ctx.one();
        for i in 0..n {
            let s = (0..n).filter(|&j| mask >> j & 1 == 1).fold(ctx.zero(), |acc, j| &acc + &e[i * n + j]);
            prod = &prod * &s;
        }
        let sign_neg = (n - mask.count_ones() as usize) % 2 == 1;
        total = if sign_neg { &total - &prod } else { &total + &prod };
    }
    total
}

/// Determinant by Gaussian elimination with partial pivoting, in decimal arithmetic.
pub fn determinant(n: usize, ctx: &DecimalContext, e: &[Decimal]) -> Decimal {
    let mut a: Vec<Vec<Decimal>> = (0..n).map(|i| e[i * n..(i + 1) * n].to_vec()).collect();
    let mut det = ctx.one();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().cmp(&a[y][col].abs())).expect("nonempty");
        if a[piv][col].is_zero() {
            return ctx.zero();
        }
        if piv != col {
            a.swap(piv, col);
            det = -&det;
        }
        det = &det * &a[col][col];
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let f = &a[row][col] / &a[col][col];
            for k in col..n {
                let sub = &f * &a[col][k];
                a[row][k] = &a[row][k] - &sub;
            }
        }
    }
    det
}

#[derive(Clone, Debug, Serialize)]
pub struct PermanentCheck {
    pub n: usize,
    pub permanent: String,
    pub determinant: String,
    pub difference: f64,
    pub holds: bool,
}

/// `perm(C_n) = det(C'_n)` where `C'_n` negates the superdiagonal.
pub fn chet_permanent_check(n: usize, cfg: &PrecisionConfig) -> Result<PermanentCheck> {
    if n > 10 {
        return Err(Error::TooLarge { n, limit: 10 });
    }
    let (m, _) = chet(n, cfg)?;
    let (ctx, e) = m.decimal().expect("chet output is decimal");
    let mut neg = e.to_vec();
    for i in 0..n - 1 {
        neg[i * n + i + 1] = -&neg[i * n + i + 1];
    }
    let p = permanent(n, ctx, e);
    let d = determinant(n, ctx, &neg);
    let diff = (&p - &d).abs();
    let holds = diff <= ctx.epsilon(20);
    Ok(PermanentCheck { n, permanent: p.to_string_places(30), determinant: d.to_string_places(30), difference: diff.to_f64(), holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::matrix::decimal_mul;

    fn cfg(d: u32) -> PrecisionConfig {
        PrecisionConfig::decimal(d).unwrap()
    }

    #[test]
    fn five_matches_high_precision_reference() {
        let (m, d) = chet(5, &cfg(60)).unwrap();
        let reference = [
            [0.331260, 0.668740, 0.0, 0.0, 0.0],
            [0.218766, 0.112494, 0.668740, 0.0, 0.0],
            [0.159932, 0.058834, 0.112494, 0.668740, 0.0],
            [0.121730, 0.038202, 0.058834, 0.112494, 0.668740],
            [0.168312, 0.121730, 0.159932, 0.218766, 0.331260],
        ];
        for i in 0..5 {
            for j in 0..5 {
                assert!((m.get(i, j) - reference[i][j]).abs() < 1.5e-6, "({i},{j}) = {}", m.get(i, j));
            }
        }
        assert!(d.nonnegative);
        assert!(m.is_doubly_stochastic(0.0));
    }

    #[test]
    fn eight_diagonals_match_reference() {
        let (_, d) = chet(8, &cfg(60)).unwrap();
        let want = [0.0809990482, 0.0411108827, 0.0266632537, 0.0192306789, 0.0147230500, 0.0117113100];
        for (got, w) in d.c.iter().zip(want) {
            assert!((got.to_f64() - w).abs() < 1e-10);
        }
    }

    #[test]
    fn traces_agree_with_direct_powers() {
        let (m, d) = chet(12, &cfg(50)).unwrap();
        let (ctx, e) = m.decimal().unwrap();
        let mut p = e.to_vec();
        for k in 1..12 {
            let tr = (0..12).fold(ctx.zero(), |acc, i| &acc + &p[i * 12 + i]);
            assert!((&tr - &ctx.one()).abs() <= ctx.epsilon(15), "k = {k}");
            p = decimal_mul(12, ctx, &p, e);
        }
        assert!(d.max_trace_residual() < 1e-35);
        assert!(d.corner_crosscheck < 1e-40);
    }

    #[test]
    fn analytic_forms_match_construction() {
        let ctx = DecimalContext::new(60);
        for n in [8, 11, 16] {
            let (_, d) = chet(n, &cfg(60)).unwrap();
            for i in 0..3 {
                let a = chet_analytic(n, i, &ctx).unwrap();
                assert!((&a - &d.c[i]).abs() <= ctx.epsilon(15), "n={n} i={i}");
            }
        }
        assert!(chet_analytic(5, 0, &ctx).is_err());
    }

    #[test]
    fn sixteen_equations_match_construction() {
        let ctx = DecimalContext::new(60);
        let (_, d) = chet(16, &cfg(60)).unwrap();
        for k in 0..8 {
            let v = chet16_equation(k, &ctx).unwrap();
            assert!((&v - &d.c[k]).abs() <= ctx.epsilon(15), "k={k}");
        }
    }

    #[test]
    fn permanent_identity_small() {
        for n in [4, 6] {
            assert!(chet_permanent_check(n, &cfg(40)).unwrap().holds);
        }
        assert!(matches!(chet_permanent_check(11, &cfg(40)), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn triangular_permanent_is_product_of_diagonal() {
        let ctx = DecimalContext::new(30);
        let e: Vec<Decimal> = [2, 5, 7, 0, 3, 1, 0, 0, 4].iter().map(|&x| ctx.from_i64(x)).collect();
        assert_eq!(permanent(3, &ctx, &e).to_string_places(10), "24.0000000000");
        assert_eq!(determinant(3, &ctx, &e).to_string_places(10), "24.0000000000");
    }
}
