//! Seeded randomized verification suites.
//!
//! Each suite draws `trials` independent instances, evaluates a fixed list of
//! inequalities on every one and reduces the outcomes into per-check verdicts
//! with the worst observed slack. Trial `i` of a run with seed `s` always sees
//! the same generator state, and trials run in parallel but are reduced in
//! index order, so reports are reproducible regardless of thread count.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{
    capacity_monotonicity_check, capacity_report, dirichlet_nonsym_bound, dirichlet_solve, expected_visits,
    expected_visits_mc, hitting_probability, hitting_probability_mc, laplacian, normalized_capacity,
    BoundaryCondition, DirichletForm, NORMALIZED_LIMIT,
};
use crate::core::{normalize_pf, perron, Matrix, PerronData, PrecisionConfig};
use crate::error::{Error, Result};
use crate::expansion::{
    mu_expansion, phi_cut, phi_exact, submultiplicativity_check, verify_main_theorem, Cut, EXACT_LIMIT,
};
use crate::mixing::{fill_inequality_check, mixing_report, BoundEntry, FILL_TOL};
use crate::random::{
    directed_cycle, random_balanced, random_doubly_stochastic, random_half_lazy_balanced, random_irreducible,
    random_symmetric_doubly_stochastic, rng,
};
use crate::spectra::spectral_gap;
use crate::tensor::{apply, counterexample_tensor, fixed_point_iterate, fixed_point_residual, random_two_line_stochastic};

/// At most this many failing observations are kept per check.
const MAX_LISTED: usize = 10;
/// Interpolation grid of the capacity monotonicity suite.
pub const ALPHAS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
/// Accuracy parameter of the mixing suite.
pub const MIXING_EPS: f64 = 0.1;
/// Walks per Monte Carlo estimate.
pub const MC_WALKS: u64 = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    MainTheorem,
    CheegerBuser,
    CapacityMonotone,
    MixingBrackets,
    MuLemmas,
    TensorUnique,
    Submultiplicativity,
    NormalizedCapacity,
    DirichletLemmas,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::MainTheorem,
        Suite::CheegerBuser,
        Suite::CapacityMonotone,
        Suite::MixingBrackets,
        Suite::MuLemmas,
        Suite::TensorUnique,
        Suite::Submultiplicativity,
        Suite::NormalizedCapacity,
        Suite::DirichletLemmas,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::MainTheorem => "main-theorem",
            Suite::CheegerBuser => "cheeger-buser",
            Suite::CapacityMonotone => "capacity-monotone",
            Suite::MixingBrackets => "mixing-brackets",
            Suite::MuLemmas => "mu-lemmas",
            Suite::TensorUnique => "tensor-unique",
            Suite::Submultiplicativity => "submultiplicativity",
            Suite::NormalizedCapacity => "normalized-capacity",
            Suite::DirichletLemmas => "dirichlet-lemmas",
        }
    }

    pub fn default_trials(self) -> usize {
        match self {
            Suite::MainTheorem => 500,
            Suite::CheegerBuser => 200,
            Suite::NormalizedCapacity | Suite::DirichletLemmas => 50,
            _ => 100,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite '{s}'")))
    }
}

/// Verdict for one inequality across all trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub evaluations: usize,
    /// Smallest margin seen; the check passes while it stays above `−tolerance`.
    pub worst_slack: Option<f64>,
    pub tolerance: f64,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub trials: usize,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// One evaluated inequality: `slack ≥ −tol` is a pass.
#[derive(Clone, Debug)]
struct Obs {
    check: String,
    slack: f64,
    tol: f64,
    note: String,
}

#[derive(Default)]
struct Trial(Vec<Obs>);

impl Trial {
    fn push(&mut self, check: impl Into<String>, slack: f64, tol: f64, note: impl Into<String>) {
        self.0.push(Obs { check: check.into(), slack, tol, note: note.into() });
    }

    /// Records `−|diff|` so the check passes when the two sides agree within `tol`.
    fn equal(&mut self, check: &str, lhs: f64, rhs: f64, tol: f64) {
        self.push(check, -(lhs - rhs).abs(), tol, format!("{lhs} vs {rhs}"));
    }

    fn flag(&mut self, check: &str, ok: bool, note: impl Into<String>) {
        self.push(check, if ok { 0.0 } else { -1.0 }, 0.0, note);
    }
}

/// Generator for trial `i` of a run with `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    rng(seed ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

type TrialFn = fn(usize, &mut ChaCha8Rng, &mut Trial) -> Result<()>;

/// Runs `trials` instances of `suite`; the instance-free checks run once more up front.
pub fn run_suite(suite: Suite, trials: usize, seed: u64) -> Result<SuiteReport> {
    let (fixed, per_trial): (Option<fn(&mut Trial) -> Result<()>>, TrialFn) = match suite {
        Suite::MainTheorem => (None, main_theorem_trial),
        Suite::CheegerBuser => (None, cheeger_buser_trial),
        Suite::CapacityMonotone => (None, capacity_monotone_trial),
        Suite::MixingBrackets => (None, mixing_trial),
        Suite::MuLemmas => (None, mu_trial),
        Suite::TensorUnique => (Some(tensor_fixed), tensor_trial),
        Suite::Submultiplicativity => (None, submultiplicativity_trial),
        Suite::NormalizedCapacity => (Some(normalized_fixed), normalized_trial),
        Suite::DirichletLemmas => (None, dirichlet_trial),
    };
    let mut runs = Vec::with_capacity(trials + 1);
    if let Some(f) = fixed {
        let mut t = Trial::default();
        if let Err(e) = f(&mut t) {
            t.push("evaluation", -1.0, 0.0, format!("fixed instances: {e}"));
        }
        runs.push(("fixed".to_string(), t));
    }
    let trial_runs: Vec<(String, Trial)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut g = trial_rng(seed, i);
            let mut t = Trial::default();
            if let Err(e) = per_trial(i, &mut g, &mut t) {
                t.push("evaluation", -1.0, 0.0, e.to_string());
            }
            (format!("trial {i}"), t)
        })
        .collect();
    runs.extend(trial_runs);
    let checks = reduce(runs);
    let passed = checks.iter().all(|c| c.passed);
    Ok(SuiteReport { suite, seed, trials, checks, passed })
}

fn reduce(runs: Vec<(String, Trial)>) -> Vec<Check> {
    let mut checks: Vec<Check> = Vec::new();
    for (label, trial) in runs {
        for o in trial.0 {
            let pos = match checks.iter().position(|c| c.name == o.check) {
                Some(p) => p,
                None => {
                    checks.push(Check {
                        name: o.check.clone(),
                        passed: true,
                        evaluations: 0,
                        worst_slack: None,
                        tolerance: o.tol,
                        failures: Vec::new(),
                    });
                    checks.len() - 1
                }
            };
            let c = &mut checks[pos];
            c.evaluations += 1;
            c.worst_slack = Some(c.worst_slack.map_or(o.slack, |w| w.min(o.slack)));
            // NaN slack counts as a failure.
            if !(o.slack >= -o.tol) {
                c.passed = false;
                if c.failures.len() < MAX_LISTED {
                    c.failures.push(format!("{label}: slack {:e}; {}", o.slack, o.note));
                }
            }
        }
    }
    checks
}

fn random_subset(n: usize, size: usize, g: &mut ChaCha8Rng) -> Vec<usize> {
    let mut all: Vec<usize> = (0..n).collect();
    all.shuffle(g);
    let mut s = all[..size].to_vec();
    s.sort_unstable();
    s
}

/// Boundary on `2 ≤ |U| < n` vertices; half the time with {0, 1} values, otherwise uniform
/// values. Either way the values are not constant, so the capacity does not vanish.
fn random_boundary(n: usize, g: &mut ChaCha8Rng) -> BoundaryCondition {
    let k = g.gen_range(2..n);
    let u = random_subset(n, k, g);
    let binary = g.gen_bool(0.5);
    let mut a: Vec<f64> = (0..k).map(|_| if binary { f64::from(u8::from(g.gen_bool(0.5))) } else { g.gen() }).collect();
    a[0] = 1.0;
    a[1] = 0.0;
    BoundaryCondition::new(u, a)
}

/// Boundary with values in {0, 1}, both present.
fn binary_boundary(n: usize, g: &mut ChaCha8Rng) -> BoundaryCondition {
    let k = g.gen_range(2..=n);
    let mut u: Vec<usize> = (0..n).collect();
    u.shuffle(g);
    u.truncate(k);
    let mut a: Vec<f64> = (0..k).map(|_| f64::from(u8::from(g.gen_bool(0.5)))).collect();
    a[0] = 1.0;
    a[1] = 0.0;
    let mut pairs: Vec<(usize, f64)> = u.into_iter().zip(a).collect();
    pairs.sort_by_key(|p| p.0);
    BoundaryCondition::new(pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1).collect())
}

fn feasible_vector(n: usize, w: &DVector<f64>, bc: &BoundaryCondition, g: &mut ChaCha8Rng) -> DVector<f64> {
    let mut x = DVector::from_fn(n, |_, _| g.gen_range(-1.0..1.0));
    for (k, &i) in bc.u.iter().enumerate() {
        x[i] = w[i] * bc.a[k];
    }
    x
}

fn uniform_w(n: usize) -> DVector<f64> {
    DVector::from_element(n, 1.0 / (n as f64).sqrt())
}

fn unit_pd(w: &DVector<f64>) -> PerronData {
    PerronData { r: 1.0, u: w.clone(), v: w.clone(), residual: 0.0 }
}

fn main_theorem_trial(_: usize, g: &mut ChaCha8Rng, t: &mut Trial) -> Result<()> {
    let n = g.gen_range(2..=10);
    let r = random_irreducible(n, g.gen_range(0.1..0.9), g);
    let rep = verify_main_theorem(&r)?;
    let note = format!("n = {n}, delta = {}, phi = {}", rep.delta, rep.phi);
    t.push("lower", rep.phi - rep.lower, 1e-9, note.clone());
    t.push("upper", rep.upper - rep.phi, 1e-9, note);
    Ok(())
}

fn cheeger_buser_trial(_: usize, g: &mut ChaCha8Rng, t: &mut Trial) -> Result<()> {
    let n = g.gen_range(2..=12);
    let a = random_symmetric_doubly_stochastic(n, g);
    let phi = phi_exact(&a, &PerronData::uniform(n), EXACT_LIMIT)?.phi;
    let delta = spectral_gap(&a)?;
    let note = format!("n = {n}, delta = {delta}, phi = {phi}");
    t.push("half-gap-below-phi", phi - delta / 2.0, 1e-9, note.clone());
    t.push("phi-below-root-gap", (2.0 * delta).sqrt() - phi, 1e-9, note);

    // Additive symmetrization preserves every cut of a balanced matrix.
    let m = random_irreducible(g.gen_range(2..=10), g.gen_range(0.1..0.9), g);
    let (b, pd) = crate::core::balanced(&m, &PrecisionConfig::machine())?;
    let bv = b.values();
    let sym = Matrix::from_dmatrix((bv + bv.transpose()) * 0.5)?;
    let pb = PerronData { r: 1.0, ..pd };
    let lhs = phi_exact(&normalize_pf(&b, &pb), &pb, EXACT_LIMIT)?.phi;
    let rhs = phi_exact(&sym, &pb, EXACT_LIMIT)?.phi;
    t.equal("symmetrization-preserves-phi", lhs, rhs, 1e-9);
    Ok(())
}

fn capacity_monotone_trial(_: usize, g: &mut ChaCha8Rng, t: &mut Trial) -> Result<()> {
    let n = g.gen_range(3..=8);
    let (a, pd) = random_balanced(n, g.gen_range(0.2..0.9), g)?;
    let w = pd.w();
    let bc = random_boundary(n, g);
    let mono = capacity_monotonicity_check(&a, &w, &bc, &ALPHAS)?;
    t.push("monotone-in-alpha", -mono.max_violation, 1e-9, format!("capacities {:?}", mono.capacities));
    let clump = mono
        .capacities
        .iter()
        .zip(&mono.clumped)
        .map(|(c, h)| (c - h).abs() / (1.0 + c.abs()))
        .fold(0.0, f64::max);
    t.push("vertex-clump", -clump, 1e-9, format!("clumped {:?}", mono.clumped));
    let rep = capacity_report(&a, &w, &bc)?;
    t.push("four-formulas", -rep.max_deviation / (1.0 + rep.dirichlet.abs()), 1e-9, format!("{rep:?}"));
    Ok(())
}

fn mixing_trial(_: usize, g: &mut ChaCha8Rng, t: &mut Trial) -> Result<()> {
    let n = g.gen_range(2..=8);
    let (r, pd) = random_half_lazy_balanced(n, g.gen_range(0.2..0.9), g)?;
    let rep = mixing_report(&r, &pd, MIXING_EPS)?;
    let tau = rep.tau as f64;
    for (name, entry) in &rep.bounds {
        if let BoundEntry::Bracket { lower, upper, .. } = entry {
            let slack = (tau - (lower - 1.0)).min(upper + 1.0 - tau);
            t.push(format!("bracket-{name}"), slack, 0.0, format!("n = {n}, tau = {tau}, [{lower}, {upper}]"));
        }
    }
    match &rep.continuous {
        Some(c) => {
            let ct = c.tau as f64;
            let slack = (ct - (c.interval.lower - 1.0)).min(c.interval.upper + 1.0 - ct);
            t.push("bracket-continuous", slack, 0.0, format!("n = {n}, tau = {ct}, {:?}", c.interval));
        }
        None => t.flag("bracket-continuous", false, "continuous mixing time unavailable"),
    }
    let fill = fill_inequality_check(&r);
    t.push("fill", fill.lambda2_sym - fill.lambda2_aat, FILL_TOL, format!("{fill:?}"));
    Ok(())
}

/// `μ_S(A) = ½‖A1'_S − A1'_S̄‖₁` with `1'_S = 1_S/|S|`.
fn mu_cut(a: &Matrix, mask: u64) -> f64 {
    let n = a.n();
    let m = a.values();
    let k = mask.count_ones() as f64;
    let kc = n as f64 - k;
    let mut x = DVector::zeros(n);
    for j in 0..n {
        x[j] = if mask >> j & 1 == 1 { 1.0 / k } else { -1.0 / kc };
    }
    0.5 * (m * x).lp_norm(1)
}

fn mu_trial(_: usize, g: &mut ChaCha8Rng, t: &mut Trial) -> Result<()> {
    let n = g.gen_range(2..=10);
    let a = random_doubly_stochastic(n, g);
    let b = random_doubly_stochastic(n, g);
    let ab = a.mul(&b)?;
    let mu_a = mu_expansion(&a, 30)?.mu;
    let mu_b = mu_expansion(&b, 30)?.mu;
    let mu_ab = mu_expansion(&ab, 30)?.mu;
    let phi_a = phi_exact(&a, &PerronData::uniform(n), EXACT_LIMIT)?.phi;
    t.push("mu-above-one-minus-two-phi", mu_a - (1.0 - 2.0 * phi_a), 1e-9, format!("n = {n}, mu = {mu_a}, phi = {phi_a}"));
    t.push("mu-product", mu_a.min(mu_b) - mu_ab, 1e-9, format!("n = {n}, {mu_a} {mu_b} {mu_ab}"));
    let mut worst = f64::INFINITY;
    for mask in 1u64..(1 << n) - 1 {
        if 2 * mask.count_ones() as usize <= n {
            worst = worst.min(mu_cut(&b, mask) - mu_cut(&ab, mask));
        }
    }
    t.push("mu-cutwise-right-factor", worst, 1e-9, format!("n = {n}"));
    Ok(())
}

fn tensor_fixed(t: &mut Trial) -> Result<()> {
    let c = counterexample_tensor();
    t.flag("counterexample-one-line", c.is_one_line_stochastic(), "output-axis sums");
    for p in [[0.2, 0.8], [0.6, 0.4]] {
        let res = fixed_point_residual(&c, &p);
        t.push("counterexample-fixed-points", -res, 1e-9, format!("p = {p:?}"));
    }
    Ok(())
}

/// Fixed points of a two-state 3-tensor away from `(½, ½)` on a grid of step `1e−3`:
/// sign changes of `T(p)₀ − p₀` and grid points with residual below `1e−6`.
fn second_fixed_points(t: &crate::tensor::Tensor) -> Vec<f64> {
    let f = |i: usize| {
        let p = i as f64 / 1000.0;
        apply(t, &[p, 1.0 - p])[0] - p
    };
    let vals: Vec<f64> = (1..1000).map(f).collect();
    let near_half = |i: usize| i.abs_diff(500) <= 2;
    let mut found = Vec::new();
    for (k, &v) in vals.iter().enumerate() {
        let i = k + 1;
        if near_half(i) {
            continue;
        }
        let res = 2.0 * v.abs();
        let crossing = k + 1 < vals.len() && !near_half(i + 1) && v * vals[k + 1] < 0.0;
        if res < 1e-6 || crossing {
            found.push(i as f64 / 1000.0);
        }
    }
    found
}

fn tensor_trial(_: usize, g: &mut ChaCha8Rng, t: &mut Trial) -> Result<()> {
    let n = 4;
    let ten = random_two_line_stochastic(3, n, g)?;
    let line = ten.axis_residual(0).max(ten.axis_residual(1));
    t.push("two-line-stochastic", -line, 1e-10, "");
    for start in 0..10 {
        let mut p0: Vec<f64> = (0..n).map(|_| g.gen_range(0.01..1.0)).collect();
        let s: f64 = p0.iter().sum();
        p0.iter_mut().for_each(|x| *x /= s);
        let out = apply(&ten, &p0);
        let closure = (out.iter().sum::<f64>() - 1.0).abs().max(-out.iter().copied().fold(0.0, f64::min));
        t.push("probability-closure", -closure, 1e-12, format!("start {start}"));
        let rep = fixed_point_iterate(&ten, &p0, 1e-13, 100_000)?;
        let dist: f64 = rep.p.iter().map(|x| (x - 1.0 / n as f64).abs()).sum();
        let slack = if rep.converged { -dist } else { f64::NEG_INFINITY };
        t.push("converges-to-uniform", slack, 1e-8, format!("start {start}: {:?} after {} steps", rep.p, rep.iterations));
    }
    let two = random_two_line_stochastic(3, 2, g)?;
    let extra = second_fixed_points(&two);
    t.push("grid-unique-fixed-point", -(extra.len() as f64), 0.0, format!("candidates {extra:?}"));
    Ok(())
}

fn submultiplicativity_trial(_: usize, g: &mut ChaCha8Rng, t: &mut Trial) -> Result<()> {
    let n = g.gen_range(2..=8);
    let r = random_irreducible(n, g.gen_range(0.1..0.9), g);
    let pd = perron(&r, &PrecisionConfig::machine())?;
    let rep = submultiplicativity_check(&r, &pd, 5)?;
    let worst = rep.steps.iter().map(|s| s.k_phi - s.phi_power).fold(f64::INFINITY, f64::min);
    t.push("power-at-most-k-phi", worst, 1e-9, format!("n = {n}, phi = {}", rep.phi));

    // Every cut, for R·R^{k−1}, k = 2..5.
    let r1 = normalize_pf(&r, &pd);
    let pd1 = PerronData { r: 1.0, ..pd };
    let mut prev = r1.clone();
    let mut worst_cut = f64::INFINITY;
    for _ in 2..=5 {
        let next = r1.mul(&prev)?;
        for mask in 1u64..(1 << n) - 1 {
            let members: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let cut = Cut::new(&members, &pd1)?;
            let lhs = phi_cut(&next, &pd1, &cut)?;
            let rhs = phi_cut(&r1, &pd1, &cut)? + phi_cut(&prev, &pd1, &cut)?;
            worst_cut = worst_cut.min(rhs - lhs);
        }
        prev = next;
    }
    t.push("cutwise-product", worst_cut, 1e-9, format!("n = {n}"));
    Ok(())
}

fn normalized_fixed(t: &mut Trial) -> Result<()> {
    let n = 8;
    let c = directed_cycle(n);
    let rep = normalized_capacity(&c, &uniform_w(n), NORMALIZED_LIMIT)?;
    let phi = phi_exact(&c, &PerronData::uniform(n), EXACT_LIMIT)?.phi;
    let delta = spectral_gap(&c)?;
    t.equal("cycle-sigma", rep.sigma, 0.25, 1e-9);
    t.equal("cycle-phi", phi, 0.25, 1e-9);
    t.equal("cycle-gap", delta, 1.0 - (std::f64::consts::PI / 4.0).cos(), 1e-9);
    Ok(())
}

fn normalized_trial(_: usize, g: &mut ChaCha8Rng, t: &mut Trial) -> Result<()> {
    let n = g.gen_range(2..=8);
    let (a, pd) = random_balanced(n, g.gen_range(0.2..0.9), g)?;
    let rep = normalized_capacity(&a, &pd.w(), NORMALIZED_LIMIT)?;
    t.push("sigma-equals-min-phi", -rep.deviation, 1e-9, format!("n = {n}, sigma = {}, phi = {}", rep.sigma, rep.phi_min));

    let m = g.gen_range(2..=8);
    let s = random_symmetric_doubly_stochastic(m, g);
    let sigma = normalized_capacity(&s, &uniform_w(m), NORMALIZED_LIMIT)?.sigma;
    let delta = spectral_gap(&s)?;
    let note = format!("n = {m}, sigma = {sigma}, delta = {delta}");
    t.push("symmetric-half-gap-below-sigma", sigma - delta / 2.0, 1e-9, note.clone());
    t.push("symmetric-sigma-below-four-gap", 4.0 * delta - sigma, 1e-9, note);
    Ok(())
}

fn dirichlet_trial(i: usize, g: &mut ChaCha8Rng, t: &mut Trial) -> Result<()> {
    // Symmetric minimality over random feasible vectors.
    let n = g.gen_range(3..=8);
    let s = random_symmetric_doubly_stochastic(n, g);
    let w = uniform_w(n);
    let bc = random_boundary(n, g);
    let l = laplacian(&s, 1.0);
    let y = dirichlet_solve(&s, &unit_pd(&w), &bc, DirichletForm::R)?.q.component_mul(&w);
    let cap = y.dot(&(&l * &y));
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let x = feasible_vector(n, &w, &bc, g);
        worst = worst.min(x.dot(&(&l * &x)) - cap);
    }
    t.push("symmetric-minimality", worst, 1e-9, format!("n = {n}, cap = {cap}"));

    // Maximum principle and flux signs for a nonsymmetric balanced matrix.
    let (a, pd) = random_balanced(n, g.gen_range(0.2..0.9), g)?;
    let w = pd.w();
    let pw = unit_pd(&w);
    let bin = binary_boundary(n, g);
    let sol = dirichlet_solve(&a, &pw, &bin, DirichletForm::R)?;
    let range = sol.q.iter().map(|&q| q.min(1.0 - q)).fold(f64::INFINITY, f64::min);
    t.push("maximum-principle", range, 1e-10, format!("q/w = {:?}", sol.q.as_slice()));
    let flux = bin
        .a
        .iter()
        .zip(sol.boundary_flux.iter())
        .map(|(&v, &f)| if v == 1.0 { f } else { -f })
        .fold(f64::INFINITY, f64::min);
    t.push("boundary-flux-sign", flux, 1e-10, format!("flux = {:?}", sol.boundary_flux.as_slice()));

    // Upper bound through H at random feasible vectors, general boundaries.
    let gen = random_boundary(n, g);
    let mut worst = f64::INFINITY;
    for _ in 0..5 {
        let x = feasible_vector(n, &w, &gen, g);
        let rep = dirichlet_nonsym_bound(&a, &w, &gen, &x)?;
        worst = worst.min(rep.bound - rep.capacity);
    }
    t.push("h-bound", worst, 1e-9, format!("n = {n}"));

    // Tightness at the witness for s–t boundaries.
    let st = random_subset(n, 2, g);
    let bc_st = BoundaryCondition::st(st[0], st[1]);
    let x = feasible_vector(n, &w, &bc_st, g);
    let rep = dirichlet_nonsym_bound(&a, &w, &bc_st, &x)?;
    t.push("h-witness-tight", -rep.witness_gap.abs(), 1e-8, format!("{rep:?}"));
    let strength = (rep.strengthening_lhs - rep.strengthening_rhs).abs() / (1.0 + rep.strengthening_rhs.abs());
    t.push("h-strengthening", -strength, 1e-8, format!("{rep:?}"));

    // Random-walk identities on a doubly stochastic matrix.
    let m = g.gen_range(3..=7);
    let d = random_doubly_stochastic(m, g);
    let k = g.gen_range(2..=m);
    let chosen = random_subset(m, k, g);
    let split = g.gen_range(1..k);
    let (sset, tset) = chosen.split_at(split);
    let hit = hitting_probability(&d, sset, tset)?;
    t.push("hitting-identity", -hit.dirichlet_deviation, 1e-9, format!("S = {sset:?}, T = {tset:?}"));
    let (vs, vt) = (chosen[0], chosen[1]);
    let visits = expected_visits(&d, vs, vt)?;
    t.push("visits-identity", -visits.deviation, 1e-9, format!("s = {vs}, t = {vt}"));

    if i == 0 {
        let seed = g.gen();
        let est = hitting_probability_mc(&d, sset, tset, MC_WALKS, seed)?;
        for (v, e) in est.iter().enumerate() {
            t.flag("hitting-monte-carlo", e.covers(hit.prob[v]), format!("vertex {v}: {e:?} vs {}", hit.prob[v]));
        }
        let est = expected_visits_mc(&d, vs, vt, MC_WALKS, seed)?;
        for (v, e) in est.iter().enumerate() {
            t.flag("visits-monte-carlo", e.covers(visits.q[v]), format!("vertex {v}: {e:?} vs {}", visits.q[v]));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite(Suite::MainTheorem, 12, 3).unwrap();
        let b = run_suite(Suite::MainTheorem, 12, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.passed, "{a:#?}");
        assert_eq!(a.check("lower").unwrap().evaluations, 12);
    }

    #[test]
    fn small_runs_of_every_suite_pass() {
        for s in Suite::ALL {
            let rep = run_suite(s, 3, 11).unwrap();
            assert!(rep.passed, "{:#?}", rep);
        }
    }

    #[test]
    fn failures_are_recorded() {
        let mut t = Trial::default();
        t.push("x", 0.5, 0.0, "");
        t.push("x", -0.25, 0.1, "bad");
        t.equal("y", 1.0, 1.0 + 1e-12, 1e-9);
        let checks = reduce(vec![("trial 0".into(), t)]);
        assert!(!checks[0].passed);
        assert_eq!(checks[0].worst_slack, Some(-0.25));
        assert_eq!(checks[0].failures.len(), 1);
        assert!(checks[1].passed);
    }

    #[test]
    fn grid_search_on_broadcast_matrix_is_clean() {
        // A broadcast 2×2 doubly stochastic matrix has the single fixed point (½, ½).
        let m = Matrix::from_rows(&[vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        let ten = crate::tensor::broadcast_matrix(&m, 3).unwrap();
        assert!(second_fixed_points(&ten).is_empty());
    }
}
