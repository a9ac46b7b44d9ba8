//! Mixing times and the bounds that bracket them.
//!
//! For `R` with Perron eigenvalue 1 and Perron vectors `⟨u, v⟩ = 1`, the mixing
//! time `τ_ε(R)` is the smallest `τ ≥ 1` for which every start vector `x` with
//! `‖D_u x‖₁ = 1` satisfies `‖D_u (Rᵗ − v uᵀ) x‖₁ ≤ ε`. By the triangle
//! inequality it suffices to test the scaled basis vectors `eᵢ / uᵢ`, so the
//! distance at step `τ` is `maxᵢ Σⱼ uⱼ |Bᵗ[j, i]| / uᵢ` with `B = R − v uᵀ`.
//!
//! Every bound family returns an [`Interval`]; lower bounds that the formula makes
//! negative are reported as 0.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::core::{balance, exp_operator, normalize_pf, perron, Matrix, PerronData, PrecisionConfig};
use crate::error::{Error, Result};
use crate::expansion::{phi_exact, EXACT_LIMIT};
use crate::spectra::{singular_values, spectral_gap};

/// Default cap on the mixing-time scan.
pub const DEFAULT_CAP: usize = 100_000;
/// Below this `κ` the logarithmic factors in the bounds are flagged as unreliable.
pub const KAPPA_FLOOR: f64 = 1e-13;
/// Relative tolerance of the reversibility test `D_u R D_v = (D_u R D_v)ᵀ`.
pub const REVERSIBLE_TOL: f64 = 1e-9;
/// Slack allowed in the Fill comparison.
pub const FILL_TOL: f64 = 1e-9;

/// A `(lower, upper)` bracket for a mixing time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    fn new(lower: f64, upper: f64) -> Self {
        Interval { lower: lower.max(0.0), upper }
    }

    /// `lower − 1 ≤ τ ≤ upper + 1`.
    pub fn brackets(&self, tau: usize) -> bool {
        let t = tau as f64;
        self.lower - 1.0 <= t && t <= self.upper + 1.0
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("epsilon {eps} must lie in (0, 1)")))
    }
}

fn unit_pf(r: &Matrix, pd: &PerronData) -> Result<(Matrix, PerronData)> {
    if pd.u.len() != r.n() || pd.v.len() != r.n() {
        return Err(Error::ShapeMismatch("Perron data does not match the matrix".into()));
    }
    Ok((normalize_pf(r, pd), PerronData { r: 1.0, ..pd.clone() }))
}

/// Worst distance `maxᵢ Σⱼ uⱼ |P[j, i]| / uᵢ` over scaled basis vectors.
pub fn basis_distance(p: &DMatrix<f64>, u: &DVector<f64>) -> f64 {
    (0..p.ncols())
        .map(|i| p.column(i).iter().zip(u.iter()).map(|(x, uj)| uj * x.abs()).sum::<f64>() / u[i])
        .fold(0.0, f64::max)
}

/// `τ_ε(R)` with the default scan cap.
pub fn mixing_time(r: &Matrix, pd: &PerronData, eps: f64) -> Result<usize> {
    mixing_time_capped(r, pd, eps, DEFAULT_CAP)
}

/// `τ_ε(R)`, scanning `τ = 1, 2, …` up to `cap`.
///
/// The distance is not assumed monotone, so every step is tested.
pub fn mixing_time_capped(r: &Matrix, pd: &PerronData, eps: f64, cap: usize) -> Result<usize> {
    check_eps(eps)?;
    let (r, pd) = unit_pf(r, pd)?;
    let b = r.values() - &pd.v * pd.u.transpose();
    let mut p = b.clone();
    let mut next = DMatrix::<f64>::zeros(b.nrows(), b.ncols());
    for tau in 1..=cap {
        if basis_distance(&p, &pd.u) <= eps {
            return Ok(tau);
        }
        next.gemm(1.0, &b, &p, 0.0);
        std::mem::swap(&mut p, &mut next);
    }
    Err(Error::CapExceeded(cap))
}

/// Output of [`bound_singular`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularBound {
    pub sigma2: f64,
    pub kappa: f64,
    pub c: f64,
    /// `ln(√(n/κ)/ε) / ln(1/σ₂)`.
    pub sharp: f64,
    /// `c·ln(n/(κε)) / (1 − σ₂ᶜ)`.
    pub upper: f64,
}

/// Upper bounds on `τ_ε(A)` from the second singular value of a balanced `A`.
pub fn bound_singular(a: &Matrix, eps: f64, c: f64) -> Result<SingularBound> {
    check_eps(eps)?;
    if !(c > 0.0) {
        return Err(Error::OutOfRange(format!("exponent c = {c} must be positive")));
    }
    let pd = perron(a, &PrecisionConfig::machine())?;
    let a = normalize_pf(a, &pd);
    let n = a.n() as f64;
    let kappa = pd.kappa();
    let sigma2 = singular_values(a.values()).get(1).copied().unwrap_or(0.0);
    if sigma2 >= 1.0 - 1e-12 {
        return Err(Error::DegenerateSigma);
    }
    let sharp = if sigma2 > 0.0 { ((n / kappa).sqrt() / eps).ln() / (1.0 / sigma2).ln() } else { 0.0 };
    let upper = c * (n / (kappa * eps)).ln() / (1.0 - sigma2.powf(c));
    Ok(SingularBound { sigma2, kappa, c, sharp, upper })
}

/// Bracket from the edge expansion: `((½ − ε)/φ, 4 ln(n/(κε))/φ²)`.
pub fn bound_phi(r: &Matrix, pd: &PerronData, eps: f64) -> Result<Interval> {
    check_eps(eps)?;
    let phi = phi_exact(r, pd, EXACT_LIMIT)?.phi;
    let n = r.n() as f64;
    Ok(Interval::new((0.5 - eps) / phi, 4.0 * (n / (pd.kappa() * eps)).ln() / (phi * phi)))
}

/// `max |(D_u R D_v)ᵢⱼ − (D_u R D_v)ⱼᵢ|`, relative to the largest flow entry.
pub fn reversibility_residual(r: &Matrix, pd: &PerronData) -> f64 {
    let a = r.values();
    let n = r.n();
    let f = DMatrix::from_fn(n, n, |i, j| pd.u[i] * a[(i, j)] * pd.v[j]);
    let scale = f.amax().max(f64::MIN_POSITIVE);
    (&f - f.transpose()).amax() / scale
}

fn gap(r: &Matrix) -> Result<f64> {
    let d = spectral_gap(r)?;
    if d <= 1e-12 {
        return Err(Error::DegenerateGap);
    }
    Ok(d)
}

/// Bracket for reversible `R`: `((1 − ε)/(2Δ), ln(n/(κε))/Δ)`.
pub fn bound_reversible(r: &Matrix, pd: &PerronData, eps: f64) -> Result<Interval> {
    check_eps(eps)?;
    if reversibility_residual(r, pd) > REVERSIBLE_TOL {
        return Err(Error::NotReversible);
    }
    let d = gap(r)?;
    let n = r.n() as f64;
    Ok(Interval::new((1.0 - eps) / (2.0 * d), (n / (pd.kappa() * eps)).ln() / d))
}

/// Bracket from the spectral gap of a general `R`: `((1−Δ)(1−ε)/Δ, 20(n + ln(1/(κε)))/Δ)`.
pub fn bound_spectral(r: &Matrix, pd: &PerronData, eps: f64) -> Result<Interval> {
    check_eps(eps)?;
    let d = gap(r)?;
    let n = r.n() as f64;
    Ok(Interval::new((1.0 - d) * (1.0 - eps) / d, 20.0 * (n + (1.0 / (pd.kappa() * eps)).ln()) / d))
}

/// Output of [`bound_symmetrization`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetrizationBound {
    /// Measured `τ_ε((A + Aᵀ)/2)`.
    pub tau_sym: usize,
    pub interval: Interval,
}

/// Bracket for a balanced `A` in terms of the measured mixing time of `M = (A + Aᵀ)/2`.
pub fn bound_symmetrization(a: &Matrix, eps: f64) -> Result<SymmetrizationBound> {
    check_eps(eps)?;
    let pd = perron(a, &PrecisionConfig::machine())?;
    let a = normalize_pf(a, &pd);
    let w = pd.w();
    let pw = PerronData { r: 1.0, u: w.clone(), v: w, residual: pd.residual };
    let v = a.values();
    let m = Matrix::from_dmatrix((v + v.transpose()) * 0.5)?;
    let tau_sym = mixing_time(&m, &pw, eps)?;
    let n = a.n() as f64;
    let log = (n / (pd.kappa() * eps)).ln();
    let t = tau_sym as f64;
    let interval =
        Interval::new((1.0 - 2.0 * eps) / (4.0 * log.sqrt()) * t.sqrt(), 2.0 * log / (1.0 / eps).ln() * t);
    Ok(SymmetrizationBound { tau_sym, interval })
}

/// Output of [`mixing_time_continuous`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuousMixing {
    /// Number of applications of `exp(R − I)` needed.
    pub tau: usize,
    pub interval: Interval,
}

/// Mixing time of the continuous operator, counted in unit steps of `exp(R − I)`,
/// with the bracket `((½ − ε)/φ, 100 ln(n/(κε))/φ²)`.
pub fn mixing_time_continuous(r: &Matrix, pd: &PerronData, eps: f64) -> Result<ContinuousMixing> {
    check_eps(eps)?;
    let (r1, pd1) = unit_pf(r, pd)?;
    let e = exp_operator(&r1, 1.0, &PrecisionConfig::machine())?;
    let tau = mixing_time(&e, &pd1, eps)?;
    let phi = phi_exact(&r1, &pd1, EXACT_LIMIT)?.phi;
    let n = r.n() as f64;
    let interval = Interval::new((0.5 - eps) / phi, 100.0 * (n / (pd.kappa() * eps)).ln() / (phi * phi));
    Ok(ContinuousMixing { tau, interval })
}

/// One path per unordered vertex pair, keyed by `(min, max)`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PathSet {
    pub paths: BTreeMap<(usize, usize), Vec<usize>>,
}

impl PathSet {
    /// Adds a path; its endpoints determine the pair.
    pub fn insert(&mut self, path: Vec<usize>) -> Result<()> {
        let (&a, &b) = match (path.first(), path.last()) {
            (Some(a), Some(b)) if a != b => (a, b),
            _ => return Err(Error::InvalidPath(format!("{path:?} does not join two distinct vertices"))),
        };
        let key = (a.min(b), a.max(b));
        if self.paths.insert(key, path).is_some() {
            return Err(Error::InvalidPath(format!("pair {key:?} listed twice")));
        }
        Ok(())
    }

    /// Parses lines `u v: v0 v1 … vk`; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<PathSet> {
        let mut set = PathSet::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |what: &str| Error::Parse(format!("line {}: {what}", lineno + 1));
            let (head, body) = line.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let ends = parse_ints(head).map_err(|_| bad("bad endpoints"))?;
            let path = parse_ints(body).map_err(|_| bad("bad vertex"))?;
            if ends.len() != 2 {
                return Err(bad("expected two endpoints"));
            }
            let (u, v) = (ends[0], ends[1]);
            let joins = path.first() == Some(&u) && path.last() == Some(&v);
            if !joins {
                return Err(Error::InvalidPath(format!("line {}: path does not run from {u} to {v}", lineno + 1)));
            }
            set.insert(path)?;
        }
        Ok(set)
    }

    /// Inverse of [`PathSet::parse`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for p in self.paths.values() {
            let body: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            let _ = writeln!(out, "{} {}: {}", p[0], p[p.len() - 1], body.join(" "));
        }
        out
    }
}

fn parse_ints(s: &str) -> std::result::Result<Vec<usize>, std::num::ParseIntError> {
    s.split_whitespace().map(str::parse).collect()
}

fn bfs_distances(m: &Matrix, target: usize) -> Vec<Option<usize>> {
    let n = m.n();
    let mut dist = vec![None; n];
    dist[target] = Some(0);
    let mut queue = VecDeque::from([target]);
    while let Some(x) = queue.pop_front() {
        let d = dist[x].unwrap_or(0);
        for y in 0..n {
            if dist[y].is_none() && y != x && m.has_edge(x, y) {
                dist[y] = Some(d + 1);
                queue.push_back(y);
            }
        }
    }
    dist
}

/// Lexicographically smallest shortest path for every pair `u < v`, on the
/// support of a symmetric matrix.
pub fn shortest_paths(m: &Matrix) -> Result<PathSet> {
    let n = m.n();
    let mut set = PathSet::default();
    for v in 1..n {
        let dist = bfs_distances(m, v);
        for u in 0..v {
            let mut d = dist[u].ok_or(Error::MissingPair(u, v))?;
            let mut path = vec![u];
            let mut x = u;
            while d > 0 {
                x = (0..n)
                    .find(|&y| y != x && m.has_edge(y, x) && dist[y] == Some(d - 1))
                    .expect("a BFS layer always has a predecessor");
                path.push(x);
                d -= 1;
            }
            set.insert(path)?;
        }
    }
    Ok(set)
}

fn check_symmetric_doubly_stochastic(m: &Matrix) -> Result<()> {
    let v = m.values();
    let sym = (v - v.transpose()).amax() <= 1e-12;
    if !sym || !m.is_doubly_stochastic(1e-10) || !m.is_nonnegative() {
        return Err(Error::OutOfRange("canonical paths need a symmetric doubly stochastic matrix".into()));
    }
    Ok(())
}

/// `ρ_W = max_e Σ_{γ ∋ e} |γ| / (n · M[x, y])`, over undirected edges `e = {x, y}`.
pub fn canonical_paths_rho(m: &Matrix, paths: &PathSet) -> Result<f64> {
    check_symmetric_doubly_stochastic(m)?;
    let n = m.n();
    let mut load = DMatrix::<f64>::zeros(n, n);
    for v in 1..n {
        for u in 0..v {
            let p = paths.paths.get(&(u, v)).ok_or(Error::MissingPair(u, v))?;
            if p.iter().any(|&x| x >= n) {
                return Err(Error::InvalidPath(format!("{p:?} leaves the vertex range")));
            }
            let len = (p.len() - 1) as f64;
            for e in p.windows(2) {
                let (x, y) = (e[0].min(e[1]), e[0].max(e[1]));
                if x == y || !m.has_edge(x, y) {
                    return Err(Error::InvalidPath(format!("{p:?} uses the zero-weight edge ({}, {})", e[0], e[1])));
                }
                load[(x, y)] += len;
            }
        }
    }
    let mut rho: f64 = 0.0;
    for y in 0..n {
        for x in 0..y {
            if load[(x, y)] > 0.0 {
                rho = rho.max(load[(x, y)] / (n as f64 * m.get(x, y)));
            }
        }
    }
    Ok(rho)
}

/// `ρ_W` next to the gap it bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalPathsReport {
    pub rho: f64,
    /// `1 − λ₂(M)`.
    pub gap: f64,
    /// `1 − λ₂(M) ≥ 1/ρ_W`, with slack `1e-12`.
    pub holds: bool,
}

pub fn canonical_paths_report(m: &Matrix, paths: &PathSet) -> Result<CanonicalPathsReport> {
    let rho = canonical_paths_rho(m, paths)?;
    let gap = 1.0 - second_symmetric_eigenvalue(m.values());
    Ok(CanonicalPathsReport { rho, gap, holds: gap >= 1.0 / rho - 1e-12 })
}

fn second_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let mut e: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(|a, b| b.total_cmp(a));
    e.get(1).copied().unwrap_or(0.0)
}

/// Both sides of `λ₂(AAᵀ) ≤ λ₂((A + Aᵀ)/2)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FillReport {
    pub lambda2_aat: f64,
    pub lambda2_sym: f64,
    pub holds: bool,
}

/// Compares the second eigenvalues of `AAᵀ` and the additive symmetrization.
pub fn fill_inequality_check(a: &Matrix) -> FillReport {
    let v = a.values();
    let lambda2_aat = second_symmetric_eigenvalue(&(v * v.transpose()));
    let lambda2_sym = second_symmetric_eigenvalue(&((v + v.transpose()) * 0.5));
    FillReport { lambda2_aat, lambda2_sym, holds: lambda2_aat <= lambda2_sym + FILL_TOL }
}

/// A bound family with its bracket, or the reason it does not apply.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum BoundEntry {
    Bracket { lower: f64, upper: f64, holds: bool },
    Skipped { skipped: String },
}

/// Measured mixing time with every applicable bound family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingReport {
    pub tau: usize,
    pub epsilon: f64,
    pub kappa: f64,
    /// False when `κ < 1e-13`; the logarithmic factors are then not trustworthy.
    pub kappa_reliable: bool,
    pub half_lazy: bool,
    pub bounds: BTreeMap<String, BoundEntry>,
    /// Mixing time of `exp(R − I)` and its own bracket.
    pub continuous: Option<ContinuousMixing>,
}

impl MixingReport {
    /// Every bracket that was computed contains the measured value.
    pub fn all_hold(&self) -> bool {
        let cont = self.continuous.as_ref().is_none_or(|c| c.interval.brackets(c.tau));
        cont && self.bounds.values().all(|b| !matches!(b, BoundEntry::Bracket { holds: false, .. }))
    }
}

/// Measures `τ_ε(R)` and evaluates each bound family on it.
pub fn mixing_report(r: &Matrix, pd: &PerronData, eps: f64) -> Result<MixingReport> {
    let (r, pd) = unit_pf(r, pd)?;
    let tau = mixing_time(&r, &pd, eps)?;
    let kappa = pd.kappa();
    let (a, _) = balance(&r, &pd);
    let mut bounds = BTreeMap::new();
    let mut put = |name: &str, res: Result<Interval>| {
        let entry = match res {
            Ok(i) => BoundEntry::Bracket { lower: i.lower, upper: i.upper, holds: i.brackets(tau) },
            Err(e) => BoundEntry::Skipped { skipped: e.to_string() },
        };
        bounds.insert(name.to_string(), entry);
    };
    put("singular", bound_singular(&a, eps, 2.0).map(|b| Interval::new(0.0, b.sharp.min(b.upper))));
    put("phi", bound_phi(&r, &pd, eps));
    put("reversible", bound_reversible(&r, &pd, eps));
    put("spectral", bound_spectral(&r, &pd, eps));
    put("symmetrization", bound_symmetrization(&a, eps).map(|b| b.interval));
    let continuous = mixing_time_continuous(&r, &pd, eps).ok();
    Ok(MixingReport {
        tau,
        epsilon: eps,
        kappa,
        kappa_reliable: kappa >= KAPPA_FLOOR,
        half_lazy: r.is_half_lazy(),
        bounds,
        continuous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{debruijn, rootn};
    use crate::core::lazify;
    use crate::random::{cycle, directed_cycle, hypercube, lazy_cycle, lazy_directed_cycle, random_half_lazy_balanced, rng};

    fn pd(m: &Matrix) -> PerronData {
        perron(m, &PrecisionConfig::machine()).unwrap()
    }

    /// Distances recomputed from `Rᵗ − v uᵀ` at every step.
    fn tau_by_definition(r: &Matrix, pd: &PerronData, eps: f64) -> usize {
        let proj = &pd.v * pd.u.transpose();
        let mut power = r.values().clone();
        for tau in 1.. {
            if basis_distance(&(&power - &proj), &pd.u) <= eps {
                return tau;
            }
            power = &power * r.values();
        }
        unreachable!()
    }

    #[test]
    fn uniform_mixes_in_one_step() {
        let j = Matrix::uniform(5);
        let p = PerronData::uniform(5);
        for eps in [0.9, 0.1, 1e-6] {
            assert_eq!(mixing_time(&j, &p, eps).unwrap(), 1);
        }
        assert!(matches!(mixing_time(&j, &p, 1.0), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn lazy_directed_cycle_matches_definition() {
        let r = lazy_directed_cycle(8);
        let p = pd(&r);
        assert_eq!(mixing_time(&r, &p, 0.25).unwrap(), tau_by_definition(&r, &p, 0.25));
    }

    #[test]
    fn cap_is_enforced() {
        let r = lazy_directed_cycle(8);
        assert_eq!(mixing_time_capped(&r, &pd(&r), 0.25, 3), Err(Error::CapExceeded(3)));
    }

    #[test]
    fn rootn_mixes_below_singular_bound() {
        let r = lazify(&rootn(25).unwrap(), 0.5).unwrap();
        let tau = mixing_time(&r, &PerronData::uniform(25), 0.25).unwrap();
        let b = bound_singular(&r, 0.25, 2.0).unwrap();
        assert!(tau as f64 <= b.sharp && b.sharp <= b.upper, "{tau} {b:?}");
    }

    #[test]
    fn singular_bound_on_rootn9() {
        let a = rootn(9).unwrap();
        let b = bound_singular(&a, 0.25, 2.0).unwrap();
        assert!((b.sigma2 - 0.8).abs() < 1e-12);
        let lazy = lazify(&a, 0.5).unwrap();
        let tau = mixing_time(&lazy, &PerronData::uniform(9), 0.25).unwrap();
        assert!(b.upper.is_finite() && tau as f64 <= b.upper);
    }

    #[test]
    fn singular_bound_degenerate_for_permutations() {
        assert_eq!(bound_singular(&directed_cycle(5), 0.25, 2.0), Err(Error::DegenerateSigma));
        let j = bound_singular(&Matrix::uniform(4), 0.25, 2.0).unwrap();
        assert!(j.sigma2 < 1e-12 && j.sharp < 1.0);
    }

    #[test]
    fn phi_bound_for_uniform() {
        let n = 6;
        let i = bound_phi(&Matrix::uniform(n), &PerronData::uniform(n), 0.25).unwrap();
        assert!((i.lower - 0.5).abs() < 1e-12);
        assert!((i.upper - 16.0 * (4.0 * (n * n) as f64).ln()).abs() < 1e-9);
    }

    #[test]
    fn brackets_on_named_chains() {
        let eps = 0.25;
        let named = [lazy_directed_cycle(8), lazify(&debruijn(3).unwrap(), 0.5).unwrap(), lazy_cycle(8)];
        for r in &named {
            let p = pd(r);
            let tau = mixing_time(r, &p, eps).unwrap();
            assert!(bound_phi(r, &p, eps).unwrap().brackets(tau));
            assert!(bound_spectral(r, &p, eps).unwrap().brackets(tau));
            assert!(bound_symmetrization(r, eps).unwrap().interval.brackets(tau));
        }
    }

    #[test]
    fn reversible_brackets() {
        let eps = 0.25;
        let j = Matrix::uniform(4);
        let i = bound_reversible(&j, &PerronData::uniform(4), eps).unwrap();
        assert!((i.lower - 0.375).abs() < 1e-12 && i.brackets(1));
        for r in [lazify(&hypercube(3), 0.5).unwrap(), lazy_cycle(8)] {
            let p = pd(&r);
            let tau = mixing_time(&r, &p, eps).unwrap();
            assert!(bound_reversible(&r, &p, eps).unwrap().brackets(tau));
        }
        let r = lazy_directed_cycle(5);
        assert_eq!(bound_reversible(&r, &pd(&r), eps), Err(Error::NotReversible));
    }

    #[test]
    fn spectral_bound_for_uniform_and_rootn() {
        let eps = 0.25;
        let n = 5;
        let i = bound_spectral(&Matrix::uniform(n), &PerronData::uniform(n), eps).unwrap();
        assert_eq!(i.lower, 0.0);
        assert!((i.upper - 20.0 * (n as f64 + (n as f64 / eps).ln())).abs() < 1e-9);
        let r = lazify(&rootn(25).unwrap(), 0.5).unwrap();
        let p = PerronData::uniform(25);
        assert!((spectral_gap(&r).unwrap() - 0.5).abs() < 1e-9);
        let tau = mixing_time(&r, &p, eps).unwrap();
        assert!(bound_spectral(&r, &p, eps).unwrap().brackets(tau));
    }

    #[test]
    fn symmetrization_of_symmetric_matrix() {
        let r = lazy_cycle(6);
        let b = bound_symmetrization(&r, 0.25).unwrap();
        let tau = mixing_time(&r, &pd(&r), 0.25).unwrap();
        assert_eq!(b.tau_sym, tau);
        assert!(b.interval.brackets(tau));
        let r = lazify(&rootn(16).unwrap(), 0.5).unwrap();
        let tau = mixing_time(&r, &PerronData::uniform(16), 0.25).unwrap();
        assert!(bound_symmetrization(&r, 0.25).unwrap().interval.brackets(tau));
    }

    #[test]
    fn continuous_operator_brackets() {
        for r in [Matrix::uniform(4), directed_cycle(8), debruijn(3).unwrap()] {
            let c = mixing_time_continuous(&r, &pd(&r), 0.25).unwrap();
            assert!(c.interval.brackets(c.tau), "{c:?}");
        }
    }

    #[test]
    fn half_exponential_is_lazy_and_keeps_phi_in_range() {
        let r = lazy_directed_cycle(6);
        let p = pd(&r);
        let e = exp_operator(&r, 0.5, &PrecisionConfig::machine()).unwrap();
        assert!((0..6).all(|i| e.get(i, i) >= (-0.5f64).exp() - 1e-15));
        let phi = phi_exact(&r, &p, EXACT_LIMIT).unwrap().phi;
        let phi_e = phi_exact(&e, &p, EXACT_LIMIT).unwrap().phi;
        assert!(0.3 * phi <= phi_e + 1e-9 && phi_e <= 0.5 * phi + 1e-9);
    }

    #[test]
    fn canonical_paths_on_complete_graph_and_cycle() {
        let j = Matrix::uniform(5);
        let w = shortest_paths(&j).unwrap();
        assert!(w.paths.values().all(|p| p.len() == 2));
        let rep = canonical_paths_report(&j, &w).unwrap();
        assert!((rep.rho - 1.0).abs() < 1e-12 && rep.holds);

        let c = cycle(8);
        let w = shortest_paths(&c).unwrap();
        assert_eq!(w.paths[&(0, 4)], vec![0, 1, 2, 3, 4]);
        let rep = canonical_paths_report(&c, &w).unwrap();
        assert!(rep.holds, "{rep:?}");
    }

    #[test]
    fn canonical_paths_bound_for_rootn_product() {
        let a = rootn(9).unwrap();
        let m = Matrix::from_dmatrix(a.values() * a.values().transpose()).unwrap();
        let w = shortest_paths(&m).unwrap();
        let rho = canonical_paths_rho(&m, &w).unwrap();
        let eps = 0.25;
        let tau = mixing_time(&a, &PerronData::uniform(9), eps).unwrap();
        assert!(tau as f64 <= 2.0 * rho * (9.0 / eps).ln());
    }

    #[test]
    fn path_errors_and_round_trip() {
        let c = cycle(4);
        let w = shortest_paths(&c).unwrap();
        assert_eq!(PathSet::parse(&w.to_text()).unwrap(), w);
        let mut bad = w.clone();
        bad.paths.insert((0, 2), vec![0, 2]);
        assert!(matches!(canonical_paths_rho(&c, &bad), Err(Error::InvalidPath(_))));
        let mut missing = w;
        missing.paths.remove(&(1, 3));
        assert_eq!(canonical_paths_rho(&c, &missing), Err(Error::MissingPair(1, 3)));
        assert!(matches!(PathSet::parse("0 2: 0 1"), Err(Error::InvalidPath(_))));
        assert!(matches!(PathSet::parse("0 2 0 1 2"), Err(Error::Parse(_))));
    }

    #[test]
    fn fill_inequality_holds() {
        assert!(fill_inequality_check(&lazy_cycle(7)).holds);
        assert!(fill_inequality_check(&lazy_directed_cycle(7)).holds);
        let mut g = rng(11);
        for _ in 0..200 {
            let (a, _) = random_half_lazy_balanced(8, 0.4, &mut g).unwrap();
            assert!(fill_inequality_check(&a).holds);
        }
    }

    #[test]
    fn report_lists_every_family() {
        let r = lazy_directed_cycle(6);
        let rep = mixing_report(&r, &pd(&r), 0.25).unwrap();
        assert_eq!(rep.bounds.len(), 5);
        assert!(matches!(rep.bounds["reversible"], BoundEntry::Skipped { .. }));
        assert!(rep.all_hold(), "{rep:?}");
        let json = serde_json::to_value(&rep).unwrap();
        assert!(json["bounds"]["phi"]["upper"].is_number());
    }
}
