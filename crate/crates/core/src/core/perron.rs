use nalgebra::{DMatrix, DVector};
use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;

use super::decimal::{Decimal, DecimalContext};
use super::matrix::{Matrix, Precision};
use crate::error::{Error, Result};

/// Hard cap on power-iteration steps.
pub const MAX_POWER_ITERATIONS: usize = 1_000_000;

/// Arithmetic mode and convergence tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrecisionConfig {
    pub mode: Precision,
    /// Convergence tolerance for machine mode.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig::machine()
    }
}

impl PrecisionConfig {
    pub fn machine() -> Self {
        PrecisionConfig { mode: Precision::Machine, tol: 1e-12, max_iter: MAX_POWER_ITERATIONS }
    }

    /// Decimal mode with `digits` digits; at least 20 are required.
    pub fn decimal(digits: u32) -> Result<Self> {
        if digits < 20 {
            return Err(Error::OutOfRange(format!("decimal precision needs >= 20 digits, got {digits}")));
        }
        Ok(PrecisionConfig { mode: Precision::Decimal { digits }, tol: 1e-12, max_iter: MAX_POWER_ITERATIONS })
    }

    pub fn digits(&self) -> Option<u32> {
        match self.mode {
            Precision::Decimal { digits } => Some(digits),
            Precision::Machine => None,
        }
    }

    /// Decimal context for this configuration, if decimal.
    pub fn context(&self) -> Option<DecimalContext> {
        self.digits().map(DecimalContext::new)
    }
}

/// Perron eigenvalue and positive eigenvectors with `⟨u, v⟩ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct PerronData {
    pub r: f64,
    /// Left eigenvector.
    pub u: DVector<f64>,
    /// Right eigenvector, scaled to sum to one.
    pub v: DVector<f64>,
    /// `max(‖Rv − rv‖∞, ‖Rᵀu − ru‖∞) / ‖R‖∞`.
    pub residual: f64,
}

impl PerronData {
    /// `wᵢ = √(uᵢvᵢ)`.
    pub fn w(&self) -> DVector<f64> {
        self.u.component_mul(&self.v).map(f64::sqrt)
    }

    /// `κ = minᵢ uᵢvᵢ`.
    pub fn kappa(&self) -> f64 {
        self.u.component_mul(&self.v).min()
    }

    /// Swaps the roles of the eigenvectors, i.e. the Perron data of the transpose.
    pub fn transposed(&self) -> PerronData {
        let s = self.u.sum();
        PerronData { r: self.r, u: &self.v * s, v: &self.u / s, residual: self.residual }
    }

    /// Perron data of a doubly stochastic matrix of size n.
    pub fn uniform(n: usize) -> PerronData {
        PerronData {
            r: 1.0,
            u: DVector::from_element(n, 1.0),
            v: DVector::from_element(n, 1.0 / n as f64),
            residual: 0.0,
        }
    }
}

/// Whether the support digraph (edge j → i iff `M[i,j]` is positive) is strongly connected.
pub fn is_irreducible(m: &Matrix) -> bool {
    let n = m.n();
    let mut g = DiGraph::<(), ()>::with_capacity(n, n * n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if m.has_edge(i, j) {
                g.add_edge(nodes[j], nodes[i], ());
            }
        }
    }
    kosaraju_scc(&g).len() == 1
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Power iteration on `(M + I)/2` from the uniform vector; returns a unit-sum vector.
fn lazy_power(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<DVector<f64>> {
    let n = m.nrows();
    let scale = inf_norm(m).max(f64::MIN_POSITIVE);
    // Scale so the shift by I is comparable to the matrix.
    let lazy = (m / scale + DMatrix::identity(n, n)) * 0.5;
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..max_iter {
        let mut y = &lazy * &x;
        let s = y.sum();
        y /= s;
        let diff = (&y - &x).amax();
        x = y;
        if diff < tol {
            return Ok(x);
        }
    }
    Err(Error::NoConvergence(max_iter))
}

/// Largest dimension for which the power-iteration result is polished by inverse iteration.
const POLISH_LIMIT: usize = 2000;

/// Two steps of inverse iteration shifted by the current eigenvalue estimate, which
/// takes the residual from the power-iteration tolerance down to rounding level.
/// Falls back to the input if the shifted matrix is numerically singular or the
/// iterate leaves the positive orthant.
fn polish(m: &DMatrix<f64>, x: DVector<f64>) -> DVector<f64> {
    let n = m.nrows();
    let mut cur = x.clone();
    for _ in 0..2 {
        let r = (m * &cur).sum() / cur.sum();
        let shifted = m - DMatrix::identity(n, n) * r;
        let Some(y) = shifted.lu().solve(&cur) else { return cur };
        let s = y.sum();
        if !s.is_finite() || s == 0.0 {
            return cur;
        }
        let y = y / s;
        if !y.iter().all(|t| *t > 0.0 && t.is_finite()) {
            return x;
        }
        cur = y;
    }
    cur
}

/// Perron–Frobenius eigenpair of an irreducible nonnegative matrix.
pub fn perron(m: &Matrix, cfg: &PrecisionConfig) -> Result<PerronData> {
    if !m.is_nonnegative() {
        return Err(Error::OutOfRange("perron requires a nonnegative matrix".into()));
    }
    if !is_irreducible(m) {
        return Err(Error::NotIrreducible);
    }
    let a = m.values();
    let at = a.transpose();
    // Converge somewhat past the requested tolerance: the step difference
    // understates the eigen-residual by roughly the lazy contraction factor.
    let inner = cfg.tol * 0.05;
    let v = lazy_power(a, inner, cfg.max_iter)?;
    let u = lazy_power(&at, inner, cfg.max_iter)?;
    let (v, u) = if a.nrows() <= POLISH_LIMIT { (polish(a, v), polish(&at, u)) } else { (v, u) };
    let av = a * &v;
    let r = av.sum() / v.sum();
    let u = &u / u.dot(&v);
    let norm = inf_norm(a).max(f64::MIN_POSITIVE);
    let res_v = (&av - &v * r).amax();
    let res_u = (&at * &u - &u * r).amax();
    let mut pd = PerronData { r, u, v, residual: res_v.max(res_u) / norm };
    if let Some(ctx) = cfg.context() {
        pd = refine_decimal(m, &pd, &ctx, cfg.max_iter)?;
    }
    Ok(pd)
}

/// Continues the power iteration in decimal arithmetic from a machine estimate.
fn refine_decimal(m: &Matrix, start: &PerronData, ctx: &DecimalContext, max_iter: usize) -> Result<PerronData> {
    let n = m.n();
    let entries: Vec<Decimal> = match m.decimal() {
        Some((_, e)) => e.iter().map(|x| ctx.rescale(x)).collect(),
        None => match m.rational() {
            Some(q) => q.iter().map(|x| ctx.from_rational(x)).collect(),
            None => m.values().transpose().iter().map(|&x| ctx.from_f64(x)).collect(),
        },
    };
    let tol = ctx.epsilon(10);
    let half = ctx.from_ratio(&1.into(), &2.into());
    let iterate = |transpose: bool, x0: &DVector<f64>| -> Result<Vec<Decimal>> {
        let mut x: Vec<Decimal> = x0.iter().map(|&t| ctx.from_f64(t)).collect();
        let s = x.iter().fold(ctx.zero(), |acc, t| &acc + t);
        x = x.iter().map(|t| t / &s).collect();
        for _ in 0..max_iter.min(100_000) {
            let mut y = Vec::with_capacity(n);
            for i in 0..n {
                let mut acc = x[i].clone();
                for j in 0..n {
                    let e = if transpose { &entries[j * n + i] } else { &entries[i * n + j] };
                    if !e.is_zero() {
                        acc = &acc + &(e * &x[j]);
                    }
                }
                y.push(&acc * &half);
            }
            let s = y.iter().fold(ctx.zero(), |acc, t| &acc + t);
            let y: Vec<Decimal> = y.iter().map(|t| t / &s).collect();
            let diff = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).max().unwrap_or_else(|| ctx.zero());
            x = y;
            if diff <= tol {
                return Ok(x);
            }
        }
        Err(Error::NoConvergence(max_iter.min(100_000)))
    };
    // The refinement assumes PF eigenvalue near 1 for the shift to be balanced;
    // rescale the start by the machine estimate otherwise.
    if (start.r - 1.0).abs() > 1e-6 {
        return Ok(start.clone());
    }
    let v = iterate(false, &start.v)?;
    let u = iterate(true, &start.u)?;
    let apply = |transpose: bool, x: &[Decimal]| -> Vec<Decimal> {
        (0..n)
            .map(|i| {
                (0..n).fold(ctx.zero(), |acc, j| {
                    let e = if transpose { &entries[j * n + i] } else { &entries[i * n + j] };
                    &acc + &(e * &x[j])
                })
            })
            .collect()
    };
    let av = apply(false, &v);
    let sum = |x: &[Decimal]| x.iter().fold(ctx.zero(), |acc, t| &acc + t);
    let r = &sum(&av) / &sum(&v);
    let uv = u.iter().zip(&v).fold(ctx.zero(), |acc, (a, b)| &acc + &(a * b));
    let u: Vec<Decimal> = u.iter().map(|t| t / &uv).collect();
    let atu = apply(true, &u);
    let res = av
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - &(&r * b)).abs())
        .chain(atu.iter().zip(&u).map(|(a, b)| (a - &(&r * b)).abs()))
        .max()
        .unwrap_or_else(|| ctx.zero());
    Ok(PerronData {
        r: r.to_f64(),
        u: DVector::from_iterator(n, u.iter().map(Decimal::to_f64)),
        v: DVector::from_iterator(n, v.iter().map(Decimal::to_f64)),
        residual: res.to_f64(),
    })
}
