//! Edge expansion, non-expansion and the alternative expansion `μ`.
//!
//! All vertex indices are 0-based. The flow matrix `F = D_u R D_v / r` is
//! Eulerian (equal row and column sums), so the boundary mass of a cut equals
//! that of its complement; the exact search uses this to fix vertex 0 outside
//! `S` and evaluate both sides of each bipartition at once.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::core::{is_irreducible, normalize_pf, perron, Matrix, PerronData, PrecisionConfig};
use crate::error::{Error, Result};
use crate::spectra::{eigenvalues, spectral_gap};

/// Default largest n for exhaustive cut enumeration.
pub const EXACT_LIMIT: usize = 24;
/// Slack on the half-weight admissibility test.
pub const ADMISSIBLE_SLACK: f64 = 1e-12;
/// Enumeration chunks reset their running sums every `2^CHUNK_LOW_BITS` cuts.
const CHUNK_LOW_BITS: u32 = 16;
/// Relative tolerance under which two cut values count as tied.
const TIE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cut {
    pub members: Vec<usize>,
    pub weight: f64,
}

impl Cut {
    /// Cut with its weight `Σ_{i∈S} uᵢvᵢ`.
    pub fn new(members: &[usize], pd: &PerronData) -> Result<Cut> {
        let n = pd.u.len();
        let mut m: Vec<usize> = members.to_vec();
        m.sort_unstable();
        m.dedup();
        if m.is_empty() {
            return Err(Error::EmptyCut);
        }
        if m.len() >= n {
            return Err(Error::FullCut);
        }
        if let Some(&bad) = m.iter().find(|&&i| i >= n) {
            return Err(Error::OutOfRange(format!("vertex {bad} outside 0..{n}")));
        }
        let weight = m.iter().map(|&i| pd.u[i] * pd.v[i]).sum();
        Ok(Cut { members: m, weight })
    }

    pub fn complement(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| self.members.binary_search(i).is_err()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Exact,
    IntervalScan,
    WitnessOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpansionReport {
    pub phi: f64,
    pub argmin: Cut,
    pub method: Method,
    pub cuts_examined: u64,
}

/// `F = D_u R D_v / r`.
pub fn flow_matrix(r: &Matrix, pd: &PerronData) -> DMatrix<f64> {
    let a = r.values();
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| pd.u[i] * a[(i, j)] * pd.v[j] / pd.r)
}

fn boundary(f: &DMatrix<f64>, inside: &[bool]) -> f64 {
    let n = f.nrows();
    let mut s = 0.0;
    for i in (0..n).filter(|&i| inside[i]) {
        for j in (0..n).filter(|&j| !inside[j]) {
            s += f[(i, j)];
        }
    }
    s
}

/// `φ_S = ⟨1_S, F 1_S̄⟩ / ⟨1_S, F 1⟩`.
pub fn phi_cut(r: &Matrix, pd: &PerronData, s: &Cut) -> Result<f64> {
    let n = r.n();
    if s.members.is_empty() {
        return Err(Error::EmptyCut);
    }
    if s.members.len() >= n {
        return Err(Error::FullCut);
    }
    let f = flow_matrix(r, pd);
    let mut inside = vec![false; n];
    for &i in &s.members {
        inside[i] = true;
    }
    let den: f64 = s.members.iter().map(|&i| f.row(i).sum()).sum();
    Ok(boundary(&f, &inside) / den)
}

/// Walks the cuts whose mask (vertex b+1 ↔ bit b) has high part `prefix`, in Gray-code order,
/// calling `visit(mask, boundary, weight_of_S)`.
fn scan_chunk(f: &DMatrix<f64>, weights: &[f64], prefix: u64, low_bits: u32, mut visit: impl FnMut(u64, f64, f64)) {
    let n = f.nrows();
    let mut inside = vec![false; n];
    let mut mask = prefix;
    for b in 0..n - 1 {
        if mask >> b & 1 == 1 {
            inside[b + 1] = true;
        }
    }
    let mut num = boundary(f, &inside);
    let mut w: f64 = (0..n).filter(|&i| inside[i]).map(|i| weights[i]).sum();
    visit(mask, num, w);
    for g in 1u64..(1u64 << low_bits) {
        let b = g.trailing_zeros() as usize;
        let k = b + 1;
        let mut out_k = 0.0;
        let mut in_k = 0.0;
        for j in 0..n {
            if j == k {
                continue;
            }
            if inside[j] {
                in_k += f[(j, k)];
            } else {
                out_k += f[(k, j)];
            }
        }
        if inside[k] {
            num += in_k - out_k;
            w -= weights[k];
        } else {
            num += out_k - in_k;
            w += weights[k];
        }
        inside[k] = !inside[k];
        mask ^= 1 << b;
        visit(mask, num, w);
    }
}

fn members_of(mask: u64, n: usize, complement: bool) -> Vec<usize> {
    (0..n)
        .filter(|&i| {
            let in_s = i > 0 && (mask >> (i - 1)) & 1 == 1;
            in_s != complement
        })
        .collect()
}

/// Exact `φ` by enumerating every bipartition.
pub fn phi_exact(r: &Matrix, pd: &PerronData, limit: usize) -> Result<ExpansionReport> {
    let n = r.n();
    if n > limit || n > 63 {
        return Err(Error::TooLarge { n, limit });
    }
    if n < 2 {
        return Err(Error::FullCut);
    }
    let f = flow_matrix(r, pd);
    let weights: Vec<f64> = (0..n).map(|i| f.row(i).sum()).collect();
    let total: f64 = weights.iter().sum();
    let half = 0.5 * total + ADMISSIBLE_SLACK;
    let bits = (n - 1) as u32;
    let low = bits.min(CHUNK_LOW_BITS);
    let chunks: Vec<u64> = (0..1u64 << (bits - low)).map(|c| c << low).collect();

    // Candidate values of the two sides of one bipartition.
    let sides = |mask: u64, num: f64, w: f64, each: &mut dyn FnMut(f64, bool)| {
        if mask == 0 {
            return;
        }
        if w <= half && w > 0.0 {
            each(num / w, false);
        }
        let wc = total - w;
        if wc <= half && wc > 0.0 {
            each(num / wc, true);
        }
    };

    let best = chunks
        .par_iter()
        .map(|&prefix| {
            let mut m = f64::INFINITY;
            scan_chunk(&f, &weights, prefix, low, |mask, num, w| sides(mask, num, w, &mut |p, _| m = m.min(p)));
            m
        })
        .reduce(|| f64::INFINITY, f64::min);
    if !best.is_finite() {
        return Err(Error::EmptyCut);
    }
    let cutoff = best + TIE_TOL * best.abs().max(1e-300) + 1e-15;
    let argmin = chunks
        .par_iter()
        .map(|&prefix| {
            let mut found: Option<Vec<usize>> = None;
            scan_chunk(&f, &weights, prefix, low, |mask, num, w| {
                sides(mask, num, w, &mut |p, comp| {
                    if p <= cutoff {
                        let cand = members_of(mask, n, comp);
                        if found.as_ref().is_none_or(|b| cand < *b) {
                            found = Some(cand);
                        }
                    }
                })
            });
            found
        })
        .reduce(|| None, |a, b| match (a, b) {
            (Some(x), Some(y)) => Some(if x <= y { x } else { y }),
            (x, None) => x,
            (None, y) => y,
        })
        .ok_or(Error::EmptyCut)?;
    let cut = Cut::new(&argmin, pd)?;
    let phi = phi_cut(r, pd, &cut)?;
    Ok(ExpansionReport { phi, argmin: cut, method: Method::Exact, cuts_examined: (1u64 << bits) - 1 })
}

/// Minimum of `φ_S` over contiguous intervals `{i, …, j}` of admissible weight; an upper bound on `φ`.
pub fn phi_interval_scan(r: &Matrix, pd: &PerronData) -> Result<ExpansionReport> {
    let n = r.n();
    let f = flow_matrix(r, pd);
    let weights: Vec<f64> = (0..n).map(|i| f.row(i).sum()).collect();
    let half = 0.5 * weights.iter().sum::<f64>() + ADMISSIBLE_SLACK;
    let mut best: Option<(f64, usize, usize)> = None;
    let mut examined = 0u64;
    for i in 0..n {
        let mut inside = vec![false; n];
        let mut num = 0.0;
        let mut w = 0.0;
        for j in i..n {
            if j - i + 1 >= n {
                break;
            }
            let (mut out_k, mut in_k) = (0.0, 0.0);
            for t in 0..n {
                if t == j {
                    continue;
                }
                if inside[t] {
                    in_k += f[(t, j)];
                } else {
                    out_k += f[(j, t)];
                }
            }
            num += out_k - in_k;
            w += weights[j];
            inside[j] = true;
            if w > half {
                break;
            }
            examined += 1;
            let p = num / w;
            if best.is_none_or(|(b, _, _)| p < b - TIE_TOL * b) {
                best = Some((p, i, j));
            }
        }
    }
    let (_, i, j) = best.ok_or(Error::EmptyCut)?;
    let members: Vec<usize> = (i..=j).collect();
    let cut = Cut::new(&members, pd)?;
    let phi = phi_cut(r, pd, &cut)?;
    Ok(ExpansionReport { phi, argmin: cut, method: Method::IntervalScan, cuts_examined: examined })
}

/// Report for a single witness cut.
pub fn phi_witness(r: &Matrix, pd: &PerronData, members: &[usize]) -> Result<ExpansionReport> {
    let cut = Cut::new(members, pd)?;
    let phi = phi_cut(r, pd, &cut)?;
    Ok(ExpansionReport { phi, argmin: cut, method: Method::WitnessOnly, cuts_examined: 1 })
}

/// `φ` exactly when `n ≤ limit`, otherwise the interval-scan upper bound.
pub fn phi_best(r: &Matrix, pd: &PerronData, limit: usize) -> Result<ExpansionReport> {
    if r.n() <= limit {
        phi_exact(r, pd, limit)
    } else {
        phi_interval_scan(r, pd)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GammaReport {
    pub gamma: f64,
    pub phi: ExpansionReport,
    pub re_lambda2: f64,
    /// True when `φ` came from the exact search.
    pub exact: bool,
}

/// `Γ = φ / (1 − Re λ₂/λ₁)`.
pub fn gamma(a: &Matrix, limit: usize) -> Result<GammaReport> {
    let pd = perron(a, &PrecisionConfig::machine())?;
    let phi = phi_best(a, &pd, limit)?;
    let eigs = eigenvalues(a);
    let re2 = eigs.get(1).map_or(0.0, |z| z.re) / eigs[0].re;
    let gap = 1.0 - re2;
    if gap.abs() <= 1e-12 {
        return Err(Error::DegenerateGap);
    }
    let exact = phi.method == Method::Exact;
    Ok(GammaReport { gamma: phi.phi / gap, phi, re_lambda2: re2, exact })
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerStep {
    pub k: u32,
    pub phi_power: f64,
    pub k_phi: f64,
    pub holds: bool,
    /// `φ_S(R·R^{k−1}) ≤ φ_S(R) + φ_S(R^{k−1})` on the argmin cut of `R^k`.
    pub cutwise_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubmultiplicativityReport {
    pub phi: f64,
    pub steps: Vec<PowerStep>,
    pub holds: bool,
}

/// Checks `φ(Rᵏ) ≤ k·φ(R)` and the cut-wise product inequality for `k = 1..=kmax`.
pub fn submultiplicativity_check(r: &Matrix, pd: &PerronData, kmax: u32) -> Result<SubmultiplicativityReport> {
    let r1 = normalize_pf(r, pd);
    let pd1 = PerronData { r: 1.0, ..pd.clone() };
    let base = phi_exact(&r1, &pd1, EXACT_LIMIT)?;
    let mut steps = Vec::new();
    let mut prev = Matrix::identity(r.n());
    if !r1.is_exact() {
        prev = prev.to_machine();
    }
    for k in 1..=kmax {
        let rk = prev.mul(&r1)?;
        let rep = phi_exact(&rk, &pd1, EXACT_LIMIT)?;
        let cutwise_holds = if k == 1 {
            true
        } else {
            let lhs = phi_cut(&rk, &pd1, &rep.argmin)?;
            let rhs = phi_cut(&r1, &pd1, &rep.argmin)? + phi_cut(&prev, &pd1, &rep.argmin)?;
            lhs <= rhs + 1e-9
        };
        let k_phi = k as f64 * base.phi;
        steps.push(PowerStep { k, phi_power: rep.phi, k_phi, holds: rep.phi <= k_phi + 1e-9, cutwise_holds });
        prev = rk;
    }
    let holds = steps.iter().all(|s| s.holds && s.cutwise_holds);
    Ok(SubmultiplicativityReport { phi: base.phi, steps, holds })
}

#[derive(Clone, Debug, Serialize)]
pub struct MuReport {
    pub mu: f64,
    pub argmax: Vec<usize>,
    pub sets_examined: u64,
}

/// `μ(A) = max_{|S| ≤ n/2} ½‖A1'_S − A1'_S̄‖₁` for doubly stochastic `A`.
pub fn mu_expansion(a: &Matrix, limit: usize) -> Result<MuReport> {
    let n = a.n();
    if n > limit || n > 30 {
        return Err(Error::TooLarge { n, limit: limit.min(30) });
    }
    if n < 2 {
        return Err(Error::FullCut);
    }
    let m = a.values();
    let col_total: DVector<f64> = m.column_sum();
    let mut best = (-1.0f64, Vec::new());
    let mut examined = 0u64;
    let mut cols = DVector::<f64>::zeros(n);
    let mut size = 0usize;
    let mut mask = 0u64;
    for g in 1u64..(1u64 << n) {
        let b = g.trailing_zeros() as usize;
        if mask >> b & 1 == 1 {
            cols -= m.column(b);
            size -= 1;
        } else {
            cols += m.column(b);
            size += 1;
        }
        mask ^= 1 << b;
        if size == 0 || 2 * size > n {
            continue;
        }
        examined += 1;
        let k = size as f64;
        let kc = (n - size) as f64;
        let val = 0.5 * (0..n).map(|i| (cols[i] / k - (col_total[i] - cols[i]) / kc).abs()).sum::<f64>();
        let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        if val > best.0 + TIE_TOL || ((val - best.0).abs() <= TIE_TOL && members < best.1) {
            best = (val.max(best.0), members);
        }
    }
    Ok(MuReport { mu: best.0, argmax: best.1, sets_examined: examined })
}

#[derive(Clone, Debug, Serialize)]
pub struct MainTheoremReport {
    pub n: usize,
    pub delta: f64,
    pub lower: f64,
    pub phi: f64,
    pub upper: f64,
    pub holds: bool,
}

/// The sandwich `Δ/(15n) ≤ φ ≤ √(2Δ)`.
pub fn verify_main_theorem(r: &Matrix) -> Result<MainTheoremReport> {
    if !is_irreducible(r) {
        return Err(Error::NotIrreducible);
    }
    let pd = perron(r, &PrecisionConfig::machine())?;
    let phi = phi_exact(r, &pd, EXACT_LIMIT)?.phi;
    let delta = spectral_gap(r)?;
    let n = r.n();
    let lower = delta / (15.0 * n as f64);
    let upper = (2.0 * delta).sqrt();
    let holds = lower <= phi + 1e-9 && phi <= upper + 1e-9;
    Ok(MainTheoremReport { n, delta, lower, phi, upper, holds })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{beyond_half, rootn};
    use crate::random::{directed_cycle, hypercube, random_doubly_stochastic, rng};

    fn ds(n: usize) -> PerronData {
        PerronData::uniform(n)
    }

    #[test]
    fn uniform_cuts() {
        let j = Matrix::uniform(6);
        for k in 1..=3 {
            let s = Cut::new(&(0..k).collect::<Vec<_>>(), &ds(6)).unwrap();
            assert!((phi_cut(&j, &ds(6), &s).unwrap() - (6 - k) as f64 / 6.0).abs() < 1e-14);
        }
        let rep = phi_exact(&j, &ds(6), EXACT_LIMIT).unwrap();
        assert!((rep.phi - 0.5).abs() < 1e-14);
        assert_eq!(rep.argmin.members, vec![0, 1, 2]);
    }

    #[test]
    fn directed_cycle_half_cut() {
        let c = directed_cycle(8);
        let s = Cut::new(&[0, 1, 2, 3], &ds(8)).unwrap();
        assert!((phi_cut(&c, &ds(8), &s).unwrap() - 0.25).abs() < 1e-15);
        assert!((phi_exact(&c, &ds(8), EXACT_LIMIT).unwrap().phi - 0.25).abs() < 1e-14);
        let big = directed_cycle(100);
        assert!((phi_interval_scan(&big, &ds(100)).unwrap().phi - 0.02).abs() < 1e-14);
    }

    #[test]
    fn rootn_nine_single_vertex() {
        let a = rootn(9).unwrap();
        let s = Cut::new(&[0], &ds(9)).unwrap();
        assert!((phi_cut(&a, &ds(9), &s).unwrap() - 16.0 / 60.0).abs() < 1e-14);
    }

    #[test]
    fn empty_and_full_cuts_rejected() {
        assert_eq!(Cut::new(&[], &ds(3)), Err(Error::EmptyCut));
        assert_eq!(Cut::new(&[0, 1, 2], &ds(3)), Err(Error::FullCut));
        assert!(matches!(phi_exact(&Matrix::uniform(25), &ds(25), 24), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn hypercube_phi_is_half_gap() {
        let h = hypercube(3);
        let rep = phi_exact(&h, &ds(8), EXACT_LIMIT).unwrap();
        let delta = spectral_gap(&h).unwrap();
        assert!((rep.phi - delta / 2.0).abs() < 1e-12);
        assert_eq!(rep.cuts_examined, 127);
    }

    #[test]
    fn gamma_of_beyond_half() {
        let g = gamma(&beyond_half(), EXACT_LIMIT).unwrap();
        assert!((g.gamma - 1.0 / 3.0).abs() < 1e-9, "{}", g.gamma);
        assert!(g.exact);
    }

    #[test]
    fn exact_matches_brute_force() {
        let mut r = rng(5);
        for _ in 0..5 {
            let a = random_doubly_stochastic(7, &mut r);
            let pd = ds(7);
            let rep = phi_exact(&a, &pd, EXACT_LIMIT).unwrap();
            let mut best = f64::INFINITY;
            for mask in 1u32..(1 << 7) - 1 {
                let m: Vec<usize> = (0..7).filter(|&i| mask >> i & 1 == 1).collect();
                if m.len() * 2 <= 7 {
                    let c = Cut::new(&m, &pd).unwrap();
                    best = best.min(phi_cut(&a, &pd, &c).unwrap());
                }
            }
            assert!((rep.phi - best).abs() < 1e-12);
        }
    }

    #[test]
    fn mu_of_uniform_is_zero() {
        let rep = mu_expansion(&Matrix::uniform(6), 16).unwrap();
        assert!(rep.mu.abs() < 1e-14);
    }

    #[test]
    fn main_theorem_on_uniform() {
        let rep = verify_main_theorem(&Matrix::uniform(8)).unwrap();
        assert!((rep.lower - 1.0 / 120.0).abs() < 1e-12);
        assert!((rep.phi - 0.5).abs() < 1e-12);
        assert!(rep.holds);
    }

    #[test]
    fn submultiplicativity_on_cycle() {
        let rep = submultiplicativity_check(&directed_cycle(8), &ds(8), 4).unwrap();
        assert!(rep.holds);
        assert!((rep.steps[0].phi_power - rep.steps[0].k_phi).abs() < 1e-12);
    }
}
