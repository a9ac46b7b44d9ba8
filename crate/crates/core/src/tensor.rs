//! Nonnegative k-tensors acting on probability distributions.
//!
//! A tensor of order `k` and dimension `n` stores `n^k` entries in row-major
//! multi-index order, axis 0 being the output. It moves a history of `k − 1`
//! distributions to a new one by `p(i) = Σ T[i, j₁, …, j_{k−1}] ∏ₘ historyₘ(jₘ)`.
//! All indices are 0-based.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::Matrix;
use crate::error::{Error, Result};

/// Tolerance of the line-stochasticity tests.
pub const LINE_TOL: f64 = 1e-12;
/// Sweep cap of the two-axis Sinkhorn sampler.
pub const SINKHORN_CAP: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Axes {
    output: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stochastic_input: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    k: usize,
    n: usize,
    entries: Vec<f64>,
    axes: Axes,
}

/// A nonnegative tensor with output axis 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TensorJson", into = "TensorJson")]
pub struct Tensor {
    k: usize,
    n: usize,
    entries: Vec<f64>,
    stochastic_input: Option<usize>,
}

impl TryFrom<TensorJson> for Tensor {
    type Error = Error;

    fn try_from(j: TensorJson) -> Result<Tensor> {
        if j.axes.output != 0 {
            return Err(Error::Parse("only output axis 0 is supported".into()));
        }
        let t = Tensor::new(j.k, j.n, j.entries)?;
        if j.axes.stochastic_input.is_some() && j.axes.stochastic_input != t.stochastic_input {
            return Err(Error::Parse(format!(
                "axis {:?} is declared stochastic but the entries say {:?}",
                j.axes.stochastic_input, t.stochastic_input
            )));
        }
        Ok(t)
    }
}

impl From<Tensor> for TensorJson {
    fn from(t: Tensor) -> TensorJson {
        TensorJson { k: t.k, n: t.n, axes: Axes { output: 0, stochastic_input: t.stochastic_input }, entries: t.entries }
    }
}

impl Tensor {
    /// Validates the shape and signs and records the first stochastic input axis.
    pub fn new(k: usize, n: usize, entries: Vec<f64>) -> Result<Tensor> {
        if k < 3 || n == 0 {
            return Err(Error::ShapeMismatch(format!("need order k >= 3 and n >= 1, got k = {k}, n = {n}")));
        }
        let len = u32::try_from(k).ok().and_then(|e| n.checked_pow(e));
        if len != Some(entries.len()) {
            return Err(Error::ShapeMismatch(format!("{} entries for k = {k}, n = {n}", entries.len())));
        }
        if entries.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(Error::OutOfRange("tensor entries must be finite and nonnegative".into()));
        }
        let mut t = Tensor { k, n, entries, stochastic_input: None };
        t.stochastic_input = t.find_stochastic_input();
        Ok(t)
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Entry at a multi-index of length `k`.
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.entries[idx.iter().fold(0, |acc, &i| acc * self.n + i)]
    }

    fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.k - 1 - axis) as u32)
    }

    /// Worst deviation from 1 of the sums along `axis`, over all other indices.
    pub fn axis_residual(&self, axis: usize) -> f64 {
        let (n, s) = (self.n, self.stride(axis));
        let block = s * n;
        let mut worst: f64 = 0.0;
        for start in (0..self.entries.len()).step_by(block) {
            for off in 0..s {
                let sum: f64 = (0..n).map(|a| self.entries[start + off + a * s]).sum();
                worst = worst.max((sum - 1.0).abs());
            }
        }
        worst
    }

    /// Whether every fiber along the output axis sums to 1.
    pub fn is_one_line_stochastic(&self) -> bool {
        self.axis_residual(0) <= LINE_TOL
    }

    fn find_stochastic_input(&self) -> Option<usize> {
        if !self.is_one_line_stochastic() {
            return None;
        }
        (1..self.k).find(|&a| self.axis_residual(a) <= LINE_TOL)
    }

    /// The first input axis (1..k) along which the tensor is also stochastic.
    pub fn stochastic_input(&self) -> Option<usize> {
        self.stochastic_input
    }

    /// Contracts input axes `1..k` against `dists[0..k−1]`, in parallel over the output index.
    fn contract(&self, dists: &[&[f64]]) -> Vec<f64> {
        let tail = self.stride(0);
        self.entries
            .par_chunks(tail)
            .map(|fiber| {
                let mut cur: Vec<f64> = fiber.to_vec();
                for d in dists.iter().rev() {
                    cur = cur.chunks(self.n).map(|c| c.iter().zip(d.iter()).map(|(x, y)| x * y).sum()).collect();
                }
                cur[0]
            })
            .collect()
    }

    fn require_one_line(&self) -> Result<()> {
        if self.is_one_line_stochastic() {
            Ok(())
        } else {
            Err(Error::OutOfRange("tensor is not stochastic along the output axis".into()))
        }
    }
}

fn check_distribution(p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::ShapeMismatch(format!("distribution of length {} for n = {n}", p.len())));
    }
    let s: f64 = p.iter().sum();
    if p.iter().any(|x| !(*x >= 0.0)) || (s - 1.0).abs() > 1e-9 {
        return Err(Error::OutOfRange("not a probability distribution".into()));
    }
    Ok(())
}

/// One step of the lagged walk: `history[m]` feeds input axis `m + 1`, so the most
/// recent distribution comes first.
pub fn step(t: &Tensor, history: &[Vec<f64>]) -> Result<Vec<f64>> {
    t.require_one_line()?;
    if history.len() != t.k - 1 {
        return Err(Error::ShapeMismatch(format!("history of length {} for order {}", history.len(), t.k)));
    }
    for h in history {
        check_distribution(h, t.n)?;
    }
    let refs: Vec<&[f64]> = history.iter().map(Vec::as_slice).collect();
    Ok(t.contract(&refs))
}

/// `T(p, …, p)`.
pub fn apply(t: &Tensor, p: &[f64]) -> Vec<f64> {
    let refs = vec![p; t.k - 1];
    t.contract(&refs)
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `‖p − T(p, …, p)‖₁`.
pub fn fixed_point_residual(t: &Tensor, p: &[f64]) -> f64 {
    l1(p, &apply(t, p))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointReport {
    pub p: Vec<f64>,
    /// `‖p − T(p, …, p)‖₁` at the returned point.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Iterates `p ← T(p, …, p)` until a step moves less than `tol` in ℓ₁.
///
/// The map is homogeneous of degree `k − 1`, so rounding drift in the total mass
/// compounds geometrically; each iterate is rescaled to sum to one. Running out of iterations is reported through `converged`, not as an error.
pub fn fixed_point_iterate(t: &Tensor, p0: &[f64], tol: f64, max_iter: usize) -> Result<FixedPointReport> {
    t.require_one_line()?;
    check_distribution(p0, t.n)?;
    let mut p = p0.to_vec();
    let mut iterations = 0;
    loop {
        let mut next = apply(t, &p);
        let mass: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= mass);
        let moved = l1(&next, &p);
        if moved <= tol {
            return Ok(FixedPointReport { p, residual: moved, iterations, converged: true });
        }
        if iterations == max_iter {
            return Ok(FixedPointReport { p, residual: moved, iterations, converged: false });
        }
        p = next;
        iterations += 1;
    }
}

/// `A_q[i, j] = Σ_tail T[i, j, tail] ∏ q(tail)`, with `j` on the stochastic input axis.
pub fn induced_matrix(t: &Tensor, q: &[f64]) -> Result<Matrix> {
    let axis = t.stochastic_input.ok_or_else(|| Error::OutOfRange("tensor is not 2-line stochastic".into()))?;
    check_distribution(q, t.n)?;
    let n = t.n;
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut idx = vec![0usize; t.k];
    for &x in &t.entries {
        let weight: f64 = (1..t.k).filter(|&m| m != axis).map(|m| q[idx[m]]).product();
        a[(idx[0], idx[axis])] += x * weight;
        for m in (0..t.k).rev() {
            idx[m] += 1;
            if idx[m] < n {
                break;
            }
            idx[m] = 0;
        }
    }
    Matrix::nonnegative(a)
}

/// The positive 4-tensor on two states with the two fixed points `(0.2, 0.8)` and `(0.6, 0.4)`.
pub fn counterexample_tensor() -> Tensor {
    let third = |x: f64| x / 3.0;
    let first = [0.872, third(2.416), third(2.416), third(0.616), third(2.416), third(0.616), third(0.616), 0.072];
    let second = [0.128, third(0.584), third(0.584), third(2.384), third(0.584), third(2.384), third(2.384), 0.928];
    let entries = first.iter().chain(second.iter()).copied().collect();
    Tensor::new(4, 2, entries).expect("valid counterexample")
}

/// Random tensor with positive entries, normalized along the output axis.
pub fn random_one_line_stochastic<R: Rng>(k: usize, n: usize, rng: &mut R) -> Result<Tensor> {
    let len = n.pow(k as u32);
    let mut e: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let s = n.pow(k as u32 - 1);
    for off in 0..s {
        let sum: f64 = (0..n).map(|a| e[off + a * s]).sum();
        (0..n).for_each(|a| e[off + a * s] /= sum);
    }
    Tensor::new(k, n, e)
}

/// Random positive tensor stochastic along axes 0 and 1: each `n × n` slice over a
/// fixed tail is Sinkhorn-balanced until both residuals drop below [`LINE_TOL`].
pub fn random_two_line_stochastic<R: Rng>(k: usize, n: usize, rng: &mut R) -> Result<Tensor> {
    let len = n.pow(k as u32);
    let mut e: Vec<f64> = (0..len).map(|_| rng.gen_range(0.05..1.0)).collect();
    let tails = n.pow(k as u32 - 2);
    let (s0, s1) = (n * tails, tails);
    for tail in 0..tails {
        let at = |i: usize, j: usize| i * s0 + j * s1 + tail;
        let mut done = false;
        for _ in 0..SINKHORN_CAP {
            for i in 0..n {
                let sum: f64 = (0..n).map(|j| e[at(i, j)]).sum();
                (0..n).for_each(|j| e[at(i, j)] /= sum);
            }
            for j in 0..n {
                let sum: f64 = (0..n).map(|i| e[at(i, j)]).sum();
                (0..n).for_each(|i| e[at(i, j)] /= sum);
            }
            let rows = (0..n).map(|i| ((0..n).map(|j| e[at(i, j)]).sum::<f64>() - 1.0).abs()).fold(0.0, f64::max);
            if rows < LINE_TOL {
                done = true;
                break;
            }
        }
        if !done {
            return Err(Error::NoConvergence(SINKHORN_CAP));
        }
    }
    Tensor::new(k, n, e)
}

/// Broadcasts a matrix over `k − 2` extra input axes: `T[i, j, …] = M[i, j]`.
pub fn broadcast_matrix(m: &Matrix, k: usize) -> Result<Tensor> {
    let n = m.n();
    let tails = n.pow(k.saturating_sub(2) as u32);
    let mut e = Vec::with_capacity(n * n * tails);
    for i in 0..n {
        for j in 0..n {
            e.extend(std::iter::repeat_n(m.get(i, j), tails));
        }
    }
    Tensor::new(k, n, e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_doubly_stochastic, rng};

    #[test]
    fn counterexample_has_two_fixed_points() {
        let t = counterexample_tensor();
        assert!(t.is_one_line_stochastic());
        assert_eq!(t.stochastic_input(), None);
        assert!(fixed_point_residual(&t, &[0.2, 0.8]) <= 1e-9);
        assert!(fixed_point_residual(&t, &[0.6, 0.4]) <= 1e-9);
        let h = vec![vec![0.2, 0.8]; 3];
        let p = step(&t, &h).unwrap();
        assert!((p[0] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn point_masses_select_a_fiber() {
        let mut g = rng(2);
        let t = random_one_line_stochastic(4, 3, &mut g).unwrap();
        let delta = |j: usize| (0..3).map(|i| if i == j { 1.0 } else { 0.0 }).collect::<Vec<_>>();
        let p = step(&t, &[delta(2), delta(0), delta(1)]).unwrap();
        for (i, pi) in p.iter().enumerate() {
            assert_eq!(*pi, t.get(&[i, 2, 0, 1]));
        }
    }

    #[test]
    fn uniform_tensor_and_broadcast() {
        let u = Tensor::new(3, 4, vec![0.25; 64]).unwrap();
        assert_eq!(u.stochastic_input(), Some(1));
        let m = random_doubly_stochastic(3, &mut rng(4));
        let t = broadcast_matrix(&m, 4).unwrap();
        assert_eq!(t.stochastic_input(), Some(1));
        let rep = fixed_point_iterate(&t, &[1.0 / 3.0; 3], 1e-12, 10).unwrap();
        assert!(rep.converged && rep.iterations == 0);
    }

    #[test]
    fn history_shape_errors() {
        let t = counterexample_tensor();
        assert!(matches!(step(&t, &[vec![0.5, 0.5]]), Err(Error::ShapeMismatch(_))));
        assert!(matches!(step(&t, &vec![vec![1.0, 0.0, 0.0]; 3]), Err(Error::ShapeMismatch(_))));
        assert!(matches!(Tensor::new(3, 2, vec![0.5; 7]), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn two_line_walk_reaches_uniform() {
        let mut g = rng(9);
        let t = random_two_line_stochastic(3, 4, &mut g).unwrap();
        assert_eq!(t.stochastic_input(), Some(1));
        let rep = fixed_point_iterate(&t, &[0.7, 0.1, 0.1, 0.1], 1e-13, 10_000).unwrap();
        assert!(rep.converged);
        assert!(rep.p.iter().all(|x| (x - 0.25).abs() < 1e-8), "{rep:?}");
    }

    #[test]
    fn induced_matrix_is_doubly_stochastic() {
        let mut g = rng(5);
        let t = random_two_line_stochastic(4, 3, &mut g).unwrap();
        let q = [0.5, 0.3, 0.2];
        let a = induced_matrix(&t, &q).unwrap();
        assert!(a.is_doubly_stochastic(1e-10));
        let uni = [1.0 / 3.0; 3];
        let au = induced_matrix(&t, &uni).unwrap();
        let image = au.values() * nalgebra::DVector::from_column_slice(&uni);
        assert!(image.iter().zip(uni.iter()).map(|(x, y)| (x - y).abs()).sum::<f64>() <= 1e-9);
        assert!(induced_matrix(&counterexample_tensor(), &[0.5, 0.5]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = counterexample_tensor();
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.contains("\"axes\":{\"output\":0}"));
        let back: Tensor = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }
}
