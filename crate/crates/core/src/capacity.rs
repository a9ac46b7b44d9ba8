//! Laplacians, Schur complements, Dirichlet problems and capacity.
//!
//! Conventions follow the rest of the crate: `L = I − A` acts on column vectors,
//! entry `(i, j)` of `A` is the weight of the edge `j → i`, and indices are 0-based.
//! For a balanced `A` with Perron vector `w`, a boundary condition `(U, a)` fixes the
//! Dirichlet vector to `q_U = (D_w)_U a`; capacity is `⟨q, Lq⟩` for that vector.

use nalgebra::{DMatrix, DVector};
use rand::distributions::{Distribution, WeightedIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{is_irreducible, Matrix, PerronData};
use crate::error::{Error, Result};
use crate::expansion::phi_exact;
use crate::random::rng;

/// Largest dimension accepted by [`normalized_capacity`] by default.
pub const NORMALIZED_LIMIT: usize = 12;
/// Agreement required between the equivalent capacity formulas.
pub const CROSS_TOL: f64 = 1e-9;
/// Relative pivot size below which an eliminated block counts as singular.
const PIVOT_TOL: f64 = 1e-14;

/// Boundary vertices `U` and the values `a` prescribed on them, in the order of `U`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    #[serde(rename = "U")]
    pub u: Vec<usize>,
    pub a: Vec<f64>,
}

impl BoundaryCondition {
    pub fn new(u: Vec<usize>, a: Vec<f64>) -> Self {
        BoundaryCondition { u, a }
    }

    /// Value 1 on `s` and 0 on `t`; `U` lists `s` first, then `t`.
    pub fn sets(s: &[usize], t: &[usize]) -> Self {
        let u = s.iter().chain(t).copied().collect();
        let a = s.iter().map(|_| 1.0).chain(t.iter().map(|_| 0.0)).collect();
        BoundaryCondition { u, a }
    }

    pub fn st(s: usize, t: usize) -> Self {
        Self::sets(&[s], &[t])
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.u.len() != self.a.len() {
            return Err(Error::ShapeMismatch(format!("{} boundary vertices but {} values", self.u.len(), self.a.len())));
        }
        validate_subset(n, &self.u)
    }

    pub fn values(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.a)
    }

    /// Whether this is `U = {s, t}` with `a = (1, 0)`.
    pub fn is_st(&self) -> bool {
        self.u.len() == 2 && self.a == [1.0, 0.0]
    }
}

fn validate_subset(n: usize, u: &[usize]) -> Result<()> {
    if u.is_empty() {
        return Err(Error::EmptyCut);
    }
    let mut seen = vec![false; n];
    for &i in u {
        if i >= n {
            return Err(Error::OutOfRange(format!("vertex {i} outside 0..{n}")));
        }
        if std::mem::replace(&mut seen[i], true) {
            return Err(Error::ShapeMismatch(format!("vertex {i} listed twice")));
        }
    }
    Ok(())
}

/// Vertices of `0..n` not in `u`, ascending.
pub fn complement(n: usize, u: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; n];
    for &i in u {
        inside[i] = true;
    }
    (0..n).filter(|&i| !inside[i]).collect()
}

fn block(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn sub(v: &DVector<f64>, idx: &[usize]) -> DVector<f64> {
    DVector::from_fn(idx.len(), |i, _| v[idx[i]])
}

/// `L = I − A/r`.
pub fn laplacian(m: &Matrix, r: f64) -> DMatrix<f64> {
    DMatrix::identity(m.n(), m.n()) - m.values() / r
}

/// LU factorization of a block that must be invertible.
struct BlockSolver(Option<nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>>);

impl BlockSolver {
    fn new(d: DMatrix<f64>) -> Result<Self> {
        if d.nrows() == 0 {
            return Ok(BlockSolver(None));
        }
        let scale = d.amax().max(f64::MIN_POSITIVE);
        let lu = d.lu();
        let piv = lu.u().diagonal().amin();
        if !(piv > PIVOT_TOL * scale) {
            return Err(Error::SingularBlock);
        }
        Ok(BlockSolver(Some(lu)))
    }

    fn solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        match &self.0 {
            None => Ok(rhs.clone()),
            Some(lu) => lu.solve(rhs).filter(|x| x.iter().all(|v| v.is_finite())).ok_or(Error::SingularBlock),
        }
    }

    fn solve_vec(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.0 {
            None => Ok(rhs.clone()),
            Some(lu) => lu.solve(rhs).filter(|x| x.iter().all(|v| v.is_finite())).ok_or(Error::SingularBlock),
        }
    }
}

/// Schur complement `L|_U = L_U − L_{U,Ū} L_Ū⁻¹ L_{Ū,U}`, rows and columns in the order of `u`.
/// With `U` the whole index set the result is `L` permuted to that order.
pub fn schur(l: &DMatrix<f64>, u: &[usize]) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    validate_subset(n, u)?;
    let ub = complement(n, u);
    let lu_u = block(l, u, u);
    if ub.is_empty() {
        return Ok(lu_u);
    }
    let solver = BlockSolver::new(block(l, &ub, &ub))?;
    let x = solver.solve(&block(l, &ub, u))?;
    Ok(lu_u - block(l, u, &ub) * x)
}

/// `R|_U = I − (I − R)|_U`, the nonnegative matrix left after eliminating `Ū`.
pub fn nonnegative_schur(r: &DMatrix<f64>, u: &[usize]) -> Result<DMatrix<f64>> {
    let n = r.nrows();
    let l = DMatrix::identity(n, n) - r;
    Ok(DMatrix::identity(u.len(), u.len()) - schur(&l, u)?)
}

/// `A + B Σ_{i<terms} Dⁱ C` for the partition of `r` into `U` and `Ū`: the weight of walks
/// between vertices of `U` whose interior stays in `Ū`, truncated at `terms` interior lengths.
pub fn schur_path_sum(r: &DMatrix<f64>, u: &[usize], terms: usize) -> Result<DMatrix<f64>> {
    let n = r.nrows();
    validate_subset(n, u)?;
    let ub = complement(n, u);
    let a = block(r, u, u);
    if ub.is_empty() {
        return Ok(a);
    }
    let b = block(r, u, &ub);
    let c = block(r, &ub, u);
    let d = block(r, &ub, &ub);
    let mut term = c.clone();
    let mut acc = DMatrix::zeros(ub.len(), u.len());
    for _ in 0..terms {
        acc += &term;
        term = &d * term;
    }
    Ok(a + b * acc)
}

/// Which normalization the Dirichlet problem uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DirichletForm {
    /// `q_U = a`, `(Lq)_Ū = 0` for `L = I − A/r`.
    A,
    /// `q_U = a`, `(L D_v q)_Ū = 0` for `L = I − R/r`.
    R,
}

#[derive(Clone, Debug)]
pub struct DirichletSolution {
    pub q: DVector<f64>,
    /// `‖(L y)_Ū‖∞` where `y = q` (A-form) or `y = D_v q` (R-form).
    pub residual_interior: f64,
    /// `(L y)_U`.
    pub boundary_flux: DVector<f64>,
}

/// Fills `y_Ū` so that `(L y)_Ū = 0` given `y_U`.
fn dirichlet_core(l: &DMatrix<f64>, u: &[usize], yu: &DVector<f64>) -> Result<DVector<f64>> {
    let n = l.nrows();
    let ub = complement(n, u);
    let solver = BlockSolver::new(block(l, &ub, &ub))?;
    let rhs = -(block(l, &ub, u) * yu);
    let yb = solver.solve_vec(&rhs)?;
    let mut y = DVector::zeros(n);
    for (k, &i) in u.iter().enumerate() {
        y[i] = yu[k];
    }
    for (k, &i) in ub.iter().enumerate() {
        y[i] = yb[k];
    }
    Ok(y)
}

fn flux_parts(l: &DMatrix<f64>, u: &[usize], y: &DVector<f64>) -> (f64, DVector<f64>) {
    let ly = l * y;
    let ub = complement(l.nrows(), u);
    let residual = ub.iter().map(|&i| ly[i].abs()).fold(0.0, f64::max);
    (residual, sub(&ly, u))
}

pub fn dirichlet_solve(m: &Matrix, pd: &PerronData, bc: &BoundaryCondition, form: DirichletForm) -> Result<DirichletSolution> {
    let n = m.n();
    bc.validate(n)?;
    let l = laplacian(m, pd.r);
    let a = bc.values();
    match form {
        DirichletForm::A => {
            let q = dirichlet_core(&l, &bc.u, &a)?;
            let (residual_interior, boundary_flux) = flux_parts(&l, &bc.u, &q);
            Ok(DirichletSolution { q, residual_interior, boundary_flux })
        }
        DirichletForm::R => {
            let yu = DVector::from_fn(bc.u.len(), |k, _| pd.v[bc.u[k]] * a[k]);
            let y = dirichlet_core(&l, &bc.u, &yu)?;
            let (residual_interior, boundary_flux) = flux_parts(&l, &bc.u, &y);
            let mut q = y.component_div(&pd.v);
            for (k, &i) in bc.u.iter().enumerate() {
                q[i] = a[k];
            }
            Ok(DirichletSolution { q, residual_interior, boundary_flux })
        }
    }
}

/// Errors when the prescribed boundary values `y_U` are proportional to `w_U`: the
/// Dirichlet vector is then a multiple of `w` and the capacity vanishes.
fn check_nondegenerate(yu: &DVector<f64>, wu: &DVector<f64>) -> Result<()> {
    let norm = yu.norm();
    let wh = wu.normalize();
    let perp = yu - &wh * wh.dot(yu);
    if norm == 0.0 || perp.norm() <= 1e-12 * norm {
        return Err(Error::DegenerateBoundary);
    }
    Ok(())
}

fn boundary_values(w: &DVector<f64>, bc: &BoundaryCondition) -> DVector<f64> {
    DVector::from_fn(bc.u.len(), |k, _| w[bc.u[k]] * bc.a[k])
}

fn check_w(n: usize, w: &DVector<f64>) -> Result<()> {
    if w.len() != n {
        return Err(Error::ShapeMismatch(format!("Perron vector has length {}, matrix has {n} rows", w.len())));
    }
    if !w.iter().all(|&x| x > 0.0) {
        return Err(Error::OutOfRange("Perron vector must be positive".into()));
    }
    Ok(())
}

/// Capacity `⟨q, Lq⟩` of a balanced `A` with Perron vector `w`, with `q_U = (D_w)_U a`.
pub fn capacity(a: &Matrix, w: &DVector<f64>, bc: &BoundaryCondition) -> Result<f64> {
    let n = a.n();
    bc.validate(n)?;
    check_w(n, w)?;
    let yu = boundary_values(w, bc);
    check_nondegenerate(&yu, &sub(w, &bc.u))?;
    let l = laplacian(a, 1.0);
    let q = dirichlet_core(&l, &bc.u, &yu)?;
    Ok(q.dot(&(&l * &q)))
}

/// Capacity of `R` in its own normalization, `⟨D_u q, L D_v q⟩` with the R-form Dirichlet vector.
pub fn capacity_r(r: &Matrix, pd: &PerronData, bc: &BoundaryCondition) -> Result<f64> {
    let n = r.n();
    bc.validate(n)?;
    // L D_v q vanishes exactly when q ∝ 1, so a constant boundary is degenerate here.
    check_nondegenerate(&bc.values(), &DVector::from_element(bc.u.len(), 1.0))?;
    let sol = dirichlet_solve(r, pd, bc, DirichletForm::R)?;
    let l = laplacian(r, pd.r);
    let lv = &l * sol.q.component_mul(&pd.v);
    Ok(sol.q.component_mul(&pd.u).dot(&lv))
}

/// Moore–Penrose inverse of a matrix with one-dimensional left kernel `u` and right kernel `v`:
/// `(L + û v̂ᵀ)⁻¹ − v̂ ûᵀ` with unit vectors `û`, `v̂`.
pub fn pseudoinverse(l: &DMatrix<f64>, u: &DVector<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let uh = u.normalize();
    let vh = v.normalize();
    let m = l + &uh * vh.transpose();
    let inv = m.try_inverse().ok_or(Error::SingularBlock)?;
    Ok(inv - &vh * uh.transpose())
}

/// Pseudoinverse by singular value decomposition, used to cross-check [`pseudoinverse`].
pub fn pseudoinverse_svd(l: &DMatrix<f64>) -> DMatrix<f64> {
    crate::linalg::pseudo_inverse(l, 1e-12)
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityReport {
    /// `⟨q, Lq⟩`.
    pub dirichlet: f64,
    /// `⟨D_w a, L|_U D_w a⟩`.
    pub schur: f64,
    /// `⟨r, L⁺ r⟩` with `r = Lq`.
    pub pseudoinverse: f64,
    /// `⟨r_U, (L⁺)_U r_U⟩`.
    pub restricted: f64,
    pub max_deviation: f64,
}

impl CapacityReport {
    pub fn consistent(&self) -> bool {
        self.max_deviation <= CROSS_TOL * (1.0 + self.dirichlet.abs())
    }
}

/// Capacity in all four equivalent forms.
pub fn capacity_report(a: &Matrix, w: &DVector<f64>, bc: &BoundaryCondition) -> Result<CapacityReport> {
    let dirichlet = capacity(a, w, bc)?;
    let l = laplacian(a, 1.0);
    let yu = boundary_values(w, bc);
    let q = dirichlet_core(&l, &bc.u, &yu)?;
    let r = &l * &q;
    let schur_val = yu.dot(&(schur(&l, &bc.u)? * &yu));
    let lp = pseudoinverse(&l, w, w)?;
    let pinv = r.dot(&(&lp * &r));
    let ru = sub(&r, &bc.u);
    let restricted = ru.dot(&(block(&lp, &bc.u, &bc.u) * &ru));
    let vals = [dirichlet, schur_val, pinv, restricted];
    let mut max_deviation = 0.0f64;
    for i in 0..4 {
        for j in i + 1..4 {
            max_deviation = max_deviation.max((vals[i] - vals[j]).abs());
        }
    }
    Ok(CapacityReport { dirichlet, schur: schur_val, pseudoinverse: pinv, restricted, max_deviation })
}

#[derive(Clone, Debug)]
pub struct ClumpReport {
    /// `[[a*Aa, a*B], [Ca, D]]` with the clumped vertex first and `Ū` ascending after it.
    pub t: DMatrix<f64>,
    /// `1/⟨e₁, T⁺e₁⟩`.
    pub value: f64,
    /// `⟨x, Qx⟩` for the Dirichlet vector `x` with `x_U = a`, `(Qx)_Ū = 0`.
    pub direct: f64,
    pub x: DVector<f64>,
}

/// Collapses the vertices of `U` into one vertex weighted by `a`.
pub fn vertex_clump(q: &DMatrix<f64>, u: &[usize], a: &DVector<f64>) -> Result<ClumpReport> {
    let n = q.nrows();
    validate_subset(n, u)?;
    if a.len() != u.len() {
        return Err(Error::ShapeMismatch(format!("{} values for {} clumped vertices", a.len(), u.len())));
    }
    let ub = complement(n, u);
    let qa = block(q, u, u);
    let qb = block(q, u, &ub);
    let qc = block(q, &ub, u);
    let qd = block(q, &ub, &ub);
    let m = ub.len();
    let mut t = DMatrix::zeros(m + 1, m + 1);
    t[(0, 0)] = a.dot(&(&qa * a));
    let ab = qb.tr_mul(a);
    let ca = &qc * a;
    for j in 0..m {
        t[(0, j + 1)] = ab[j];
        t[(j + 1, 0)] = ca[j];
    }
    t.view_mut((1, 1), (m, m)).copy_from(&qd);
    let x = dirichlet_core(q, u, a).map_err(|_| Error::SingularClump)?;
    let direct = x.dot(&(q * &x));
    let scale = q.amax().max(f64::MIN_POSITIVE) * a.norm_squared().max(1.0);
    if direct.abs() <= 1e-13 * scale {
        return Err(Error::SingularClump);
    }
    let e11 = pseudoinverse_svd(&t)[(0, 0)];
    if e11.abs() <= f64::MIN_POSITIVE || !e11.is_finite() {
        return Err(Error::SingularClump);
    }
    Ok(ClumpReport { t, value: 1.0 / e11, direct, x })
}

/// `(A + Aᵀ)/2 + α (A − Aᵀ)/2`.
pub fn interpolate(a: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
    let at = a.transpose();
    (a + &at) * 0.5 + (a - &at) * (0.5 * alpha)
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub alphas: Vec<f64>,
    pub capacities: Vec<f64>,
    /// The same capacities through `1/⟨e₁, H_α⁻¹e₁⟩` on the clumped Laplacian.
    pub clumped: Vec<f64>,
    /// Capacity of the symmetric part.
    pub symmetric: f64,
    /// Largest `cap(A_α) − cap(A_β)` over grid pairs with `|α| ≤ |β|`.
    pub max_violation: f64,
    pub holds: bool,
}

pub fn capacity_monotonicity_check(a: &Matrix, w: &DVector<f64>, bc: &BoundaryCondition, alphas: &[f64]) -> Result<MonotonicityReport> {
    if let Some(x) = alphas.iter().find(|x| !(-1.0..=1.0).contains(*x)) {
        return Err(Error::OutOfRange(format!("interpolation parameter {x} outside [-1, 1]")));
    }
    let n = a.n();
    let one = |alpha: f64| -> Result<(f64, f64)> {
        let m = Matrix::from_dmatrix(interpolate(a.values(), alpha).map(|x| x.max(0.0)))?;
        let cap = capacity(&m, w, bc)?;
        let l = DMatrix::identity(n, n) - m.values();
        let clump = vertex_clump(&l, &bc.u, &boundary_values(w, bc))?;
        Ok((cap, clump.value))
    };
    let vals: Vec<(f64, f64)> = alphas.par_iter().map(|&x| one(x)).collect::<Result<_>>()?;
    let symmetric = one(0.0)?.0;
    let capacities: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let clumped: Vec<f64> = vals.iter().map(|v| v.1).collect();
    let mut max_violation = f64::NEG_INFINITY;
    for i in 0..alphas.len() {
        max_violation = max_violation.max(symmetric - capacities[i]);
        for j in 0..alphas.len() {
            if alphas[i].abs() <= alphas[j].abs() {
                max_violation = max_violation.max(capacities[i] - capacities[j]);
            }
        }
    }
    let agree = capacities.iter().zip(&clumped).all(|(c, h)| (c - h).abs() <= CROSS_TOL * (1.0 + c.abs()));
    Ok(MonotonicityReport {
        alphas: alphas.to_vec(),
        capacities,
        clumped,
        symmetric,
        max_violation,
        holds: max_violation <= CROSS_TOL && agree,
    })
}

/// Smallest eigenvalue of the symmetric part of `d`, and whether it clears the
/// scale-aware threshold `−1e−9 (1 + ‖d‖₂)`.
pub fn psd_margin(d: &DMatrix<f64>) -> (f64, bool) {
    let sym = (d + d.transpose()) * 0.5;
    let norm = d.clone().singular_values().max();
    let min = sym.symmetric_eigenvalues().min();
    (min, min >= -1e-9 * (1.0 + norm))
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityPart {
    pub part: u8,
    /// Smallest singular value for part 1, smallest eigenvalue of the relevant
    /// (difference) matrix otherwise.
    pub margin: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub parts: Vec<InequalityPart>,
    pub holds: bool,
}

/// Grid used for the `W_α` family.
pub const INEQUALITY_ALPHAS: [f64; 9] = [-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0];

/// The five operator inequalities for a real `R` whose symmetric part is positive definite.
pub fn matrix_inequality_suite(r: &DMatrix<f64>) -> Result<InequalityReport> {
    if !r.is_square() {
        return Err(Error::ShapeMismatch("matrix must be square".into()));
    }
    let rt = r.transpose();
    let rs = (r + &rt) * 0.5;
    let rbar = (r - &rt) * 0.5;
    let smin = rs.clone().symmetric_eigenvalues().min();
    if !(smin > 1e-12 * (1.0 + rs.amax())) {
        return Err(Error::NotPDSymPart);
    }
    let inv = |m: &DMatrix<f64>| m.clone().try_inverse().ok_or(Error::NotPDSymPart);
    let sym_inv = |m: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let i = inv(m)?;
        Ok((&i + i.transpose()) * 0.5)
    };
    let mut parts = Vec::with_capacity(5);

    let sv = r.clone().singular_values();
    let smallest = sv.min();
    parts.push(InequalityPart { part: 1, margin: smallest, holds: smallest > 1e-12 * sv.max() });

    let ri = inv(r)?;
    let rti = ri.transpose();
    let x1 = (&ri + &rti) * 0.5;
    let m2 = x1.clone().symmetric_eigenvalues().min();
    parts.push(InequalityPart { part: 2, margin: m2, holds: m2 > 0.0 });

    let (m3, ok3) = psd_margin(&(inv(&rs)? - &x1));
    parts.push(InequalityPart { part: 3, margin: m3, holds: ok3 });

    let rhs4 = (&rt * &ri * &rt + r * &rti * r) * 0.5;
    let (m4, ok4) = psd_margin(&(&rs - rhs4));
    parts.push(InequalityPart { part: 4, margin: m4, holds: ok4 });

    let xs: Vec<DMatrix<f64>> = INEQUALITY_ALPHAS.iter().map(|&al| sym_inv(&(&rs + &rbar * al))).collect::<Result<_>>()?;
    let mut m5 = f64::INFINITY;
    let mut ok5 = true;
    for (i, ai) in INEQUALITY_ALPHAS.iter().enumerate() {
        for (j, aj) in INEQUALITY_ALPHAS.iter().enumerate() {
            if i != j && ai.abs() <= aj.abs() {
                let (m, ok) = psd_margin(&(&xs[i] - &xs[j]));
                m5 = m5.min(m);
                ok5 &= ok;
            }
        }
    }
    parts.push(InequalityPart { part: 5, margin: m5, holds: ok5 });
    let holds = parts.iter().all(|p| p.holds);
    Ok(InequalityReport { parts, holds })
}

#[derive(Clone, Debug, Serialize)]
pub struct NonsymBoundReport {
    pub capacity: f64,
    /// `⟨x, Hx⟩` for the supplied test vector, `H = L L̃⁺ Lᵀ`.
    pub bound: f64,
    pub holds: bool,
    /// `⟨x, Hx⟩` at `x = (q + p)/2`, `q` and `p` the Dirichlet vectors of `L` and `Lᵀ`.
    pub witness_value: f64,
    /// `witness_value − capacity`; zero up to rounding for s–t boundaries.
    pub witness_gap: f64,
    /// `⟨p, Hp⟩`.
    pub strengthening_lhs: f64,
    /// `cap(A)² / cap(Ã)`.
    pub strengthening_rhs: f64,
    pub st_boundary: bool,
}

/// Upper bound on capacity through `H = L L̃⁺ Lᵀ`; `x_U` must equal `(D_w)_U a`.
pub fn dirichlet_nonsym_bound(a: &Matrix, w: &DVector<f64>, bc: &BoundaryCondition, x: &DVector<f64>) -> Result<NonsymBoundReport> {
    let n = a.n();
    let cap = capacity(a, w, bc)?;
    if x.len() != n {
        return Err(Error::ShapeMismatch(format!("test vector has length {}, expected {n}", x.len())));
    }
    let yu = boundary_values(w, bc);
    for (k, &i) in bc.u.iter().enumerate() {
        if (x[i] - yu[k]).abs() > 1e-12 * (1.0 + yu[k].abs()) {
            return Err(Error::ShapeMismatch(format!("test vector differs from the boundary at vertex {i}")));
        }
    }
    let l = laplacian(a, 1.0);
    let lt = l.transpose();
    let ls = (&l + &lt) * 0.5;
    let h = &l * pseudoinverse(&ls, w, w)? * &lt;
    let bound = x.dot(&(&h * x));
    let q = dirichlet_core(&l, &bc.u, &yu)?;
    let p = dirichlet_core(&lt, &bc.u, &yu)?;
    let xw = (&q + &p) * 0.5;
    let witness_value = xw.dot(&(&h * &xw));
    let sym = Matrix::from_dmatrix(interpolate(a.values(), 0.0))?;
    let cap_sym = capacity(&sym, w, bc)?;
    Ok(NonsymBoundReport {
        capacity: cap,
        bound,
        holds: cap <= bound + CROSS_TOL,
        witness_value,
        witness_gap: witness_value - cap,
        strengthening_lhs: p.dot(&(&h * &p)),
        strengthening_rhs: cap * cap / cap_sym,
        st_boundary: bc.is_st(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalizedCapacity {
    pub sigma: f64,
    pub s: Vec<usize>,
    pub t: Vec<usize>,
    /// `min_U φ(A|_U)` over all `U` with at least two vertices.
    pub phi_min: f64,
    pub phi_argmin: Vec<usize>,
    pub deviation: f64,
}

fn members(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

/// Normalized capacity by enumerating all disjoint `(S, T)`, cross-checked against
/// `min_U φ(A|_U)`. Ties in σ go to the smaller `|S ∪ T|`, then to the
/// lexicographically first `S`, then `T`.
pub fn normalized_capacity(a: &Matrix, w: &DVector<f64>, limit: usize) -> Result<NormalizedCapacity> {
    let n = a.n();
    if n > limit.min(20) {
        return Err(Error::TooLarge { n, limit });
    }
    if n < 2 {
        return Err(Error::OutOfRange("normalized capacity needs at least two vertices".into()));
    }
    check_w(n, w)?;
    let l = laplacian(a, 1.0);
    let w2: Vec<f64> = w.iter().map(|x| x * x).collect();
    let full = (1u32 << n) - 1;
    let masks: Vec<u32> = (1..=full).filter(|m| m.count_ones() >= 2).collect();

    // Every (S, T) pair as (ratio, S mask, T mask).
    let per_u: Vec<Vec<(f64, u32, u32)>> = masks
        .par_iter()
        .map(|&um| -> Result<Vec<(f64, u32, u32)>> {
            let u = members(um);
            let ub = complement(n, &u);
            let solver = BlockSolver::new(block(&l, &ub, &ub))?;
            let c = block(&l, &ub, &u);
            let mut out = Vec::new();
            let mut sm = (um - 1) & um;
            while sm != 0 {
                let tm = um & !sm;
                let ws: f64 = members(sm).iter().map(|&i| w2[i]).sum();
                let wt: f64 = members(tm).iter().map(|&i| w2[i]).sum();
                if ws <= wt * (1.0 + 1e-12) {
                    let yu = DVector::from_fn(u.len(), |k, _| if sm >> u[k] & 1 == 1 { w[u[k]] } else { 0.0 });
                    let yb = solver.solve_vec(&-(&c * &yu))?;
                    let mut y = DVector::zeros(n);
                    for (k, &i) in u.iter().enumerate() {
                        y[i] = yu[k];
                    }
                    for (k, &i) in ub.iter().enumerate() {
                        y[i] = yb[k];
                    }
                    out.push((y.dot(&(&l * &y)) / ws, sm, tm));
                }
                sm = (sm - 1) & um;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let all: Vec<(f64, u32, u32)> = per_u.into_iter().flatten().collect();
    let best = all.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let tie = best + 1e-10 * best.abs().max(1e-300);
    let key = |c: &(f64, u32, u32)| ((c.1 | c.2).count_ones(), members(c.1), members(c.2));
    let winner = all.iter().filter(|c| c.0 <= tie).min_by_key(|c| key(c)).expect("at least one admissible pair");

    let phis: Vec<(f64, u32)> = masks
        .par_iter()
        .map(|&um| -> Result<(f64, u32)> {
            let u = members(um);
            let k = schur(&l, &u)?;
            let au = (DMatrix::identity(u.len(), u.len()) - k).map(|x| if x.abs() < 1e-13 { 0.0 } else { x });
            let m = Matrix::nonnegative(au.map(|x| x.max(0.0)))?;
            let wu = sub(w, &u).normalize();
            let pd = PerronData { r: 1.0, u: wu.clone(), v: wu, residual: 0.0 };
            Ok((phi_exact(&m, &pd, limit)?.phi, um))
        })
        .collect::<Result<_>>()?;
    let (phi_min, phi_mask) = phis.iter().copied().fold((f64::INFINITY, 0), |acc, p| if p.0 < acc.0 { p } else { acc });
    Ok(NormalizedCapacity {
        sigma: winner.0,
        s: members(winner.1),
        t: members(winner.2),
        phi_min,
        phi_argmin: members(phi_mask),
        deviation: (winner.0 - phi_min).abs(),
    })
}

fn require_doubly_stochastic(a: &Matrix) -> Result<()> {
    if !a.is_doubly_stochastic(1e-9) {
        return Err(Error::OutOfRange("matrix must be doubly stochastic".into()));
    }
    if !is_irreducible(a) {
        return Err(Error::NotIrreducible);
    }
    Ok(())
}

fn disjoint_sets(n: usize, s: &[usize], t: &[usize]) -> Result<()> {
    validate_subset(n, s)?;
    validate_subset(n, t)?;
    if s.iter().any(|i| t.contains(i)) {
        return Err(Error::ShapeMismatch("S and T overlap".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct HittingReport {
    /// Probability that the walk from each vertex reaches `S` before `T`.
    pub prob: Vec<f64>,
    /// Distance to the {1,0} Dirichlet vector of `Lᵀ`.
    pub dirichlet_deviation: f64,
    /// Distance to the {1,0} Dirichlet vector of `L`; zero only when the walk's
    /// reversal hits with the same probabilities, e.g. for symmetric `A`.
    pub untransposed_deviation: f64,
}

/// A walk at `j` moves to `i` with probability `A_{ij}`, so the hitting vector solves
/// `h_i = Σ_j A_{ji} h_j` off `S ∪ T`.
pub fn hitting_probability(a: &Matrix, s: &[usize], t: &[usize]) -> Result<HittingReport> {
    let n = a.n();
    require_doubly_stochastic(a)?;
    disjoint_sets(n, s, t)?;
    let bc = BoundaryCondition::sets(s, t);
    bc.validate(n)?;
    // Absorbing-chain form: P = Aᵀ is row-stochastic, h_Ū = (I − P_ŪŪ)⁻¹ P_ŪS 1.
    let p = a.values().transpose();
    let ub = complement(n, &bc.u);
    let solver = BlockSolver::new(DMatrix::identity(ub.len(), ub.len()) - block(&p, &ub, &ub))?;
    let into_s = block(&p, &ub, s) * DVector::from_element(s.len(), 1.0);
    let hb = solver.solve_vec(&into_s)?;
    let mut prob = vec![0.0; n];
    for &i in s {
        prob[i] = 1.0;
    }
    for (k, &i) in ub.iter().enumerate() {
        prob[i] = hb[k];
    }
    let pd = PerronData::uniform(n);
    let dev = |m: &Matrix| -> Result<f64> {
        let q = dirichlet_solve(m, &pd, &bc, DirichletForm::A)?.q;
        Ok(q.iter().zip(&prob).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
    };
    Ok(HittingReport { dirichlet_deviation: dev(&a.transpose())?, untransposed_deviation: dev(a)?, prob })
}

/// Per-column samplers for the walk `j → i` with probability `A_{ij}`.
fn walk_samplers(a: &Matrix) -> Result<Vec<WeightedIndex<f64>>> {
    let v = a.values();
    (0..a.n())
        .map(|j| WeightedIndex::new(v.column(j).iter().copied()).map_err(|e| Error::OutOfRange(format!("column {j}: {e}"))))
        .collect()
}

/// Mean and standard error of a sample.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    fn from_sums(sum: f64, sum_sq: f64, count: u64) -> Estimate {
        let k = count as f64;
        let mean = sum / k;
        let var = (sum_sq / k - mean * mean).max(0.0) * k / (k - 1.0).max(1.0);
        Estimate { mean, stderr: (var / k).sqrt() }
    }

    /// Whether `x` lies within three standard errors (plus a floor for zero-variance samples).
    pub fn covers(&self, x: f64) -> bool {
        (self.mean - x).abs() <= 3.0 * self.stderr + 1e-12
    }
}

/// Walks longer than this are abandoned as a sign of a non-absorbing chain.
const MAX_WALK: usize = 10_000_000;

/// Monte Carlo hitting probabilities with `walks` walks from every vertex.
pub fn hitting_probability_mc(a: &Matrix, s: &[usize], t: &[usize], walks: u64, seed: u64) -> Result<Vec<Estimate>> {
    let n = a.n();
    require_doubly_stochastic(a)?;
    disjoint_sets(n, s, t)?;
    let samplers = walk_samplers(a)?;
    (0..n)
        .into_par_iter()
        .map(|start| {
            if s.contains(&start) {
                return Ok(Estimate { mean: 1.0, stderr: 0.0 });
            }
            if t.contains(&start) {
                return Ok(Estimate { mean: 0.0, stderr: 0.0 });
            }
            let mut g = rng(seed ^ (start as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut hits = 0u64;
            for _ in 0..walks {
                let mut at = start;
                let mut steps = 0;
                loop {
                    if s.contains(&at) {
                        hits += 1;
                        break;
                    }
                    if t.contains(&at) {
                        break;
                    }
                    steps += 1;
                    if steps > MAX_WALK {
                        return Err(Error::NoConvergence(MAX_WALK));
                    }
                    at = samplers[at].sample(&mut g);
                }
            }
            Ok(Estimate::from_sums(hits as f64, hits as f64, walks))
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct VisitsReport {
    /// Expected visits to each vertex by a walk from `s` stopped at `t`.
    pub q: Vec<f64>,
    /// `cap_{s,t}` with boundary values 1 at `s` and 0 at `t`.
    pub capacity: f64,
    /// `|q_s − 1/cap_{s,t}|`.
    pub deviation: f64,
}

/// Solves `Lq = 1_s − 1_t` with `q_t = 0`.
pub fn expected_visits(a: &Matrix, s: usize, t: usize) -> Result<VisitsReport> {
    let n = a.n();
    require_doubly_stochastic(a)?;
    disjoint_sets(n, &[s], &[t])?;
    let l = laplacian(a, 1.0);
    let keep = complement(n, &[t]);
    let solver = BlockSolver::new(block(&l, &keep, &keep))?;
    let rhs = DVector::from_fn(keep.len(), |k, _| if keep[k] == s { 1.0 } else { 0.0 });
    let qk = solver.solve_vec(&rhs)?;
    let mut q = vec![0.0; n];
    for (k, &i) in keep.iter().enumerate() {
        q[i] = qk[k];
    }
    let bc = BoundaryCondition::st(s, t);
    let dq = dirichlet_solve(a, &PerronData::uniform(n), &bc, DirichletForm::A)?.q;
    let capacity = dq.dot(&(&l * &dq));
    Ok(VisitsReport { deviation: (q[s] - 1.0 / capacity).abs(), q, capacity })
}

/// Monte Carlo visit counts from `s` until the walk reaches `t`, the start counted once.
pub fn expected_visits_mc(a: &Matrix, s: usize, t: usize, walks: u64, seed: u64) -> Result<Vec<Estimate>> {
    let n = a.n();
    require_doubly_stochastic(a)?;
    disjoint_sets(n, &[s], &[t])?;
    let samplers = walk_samplers(a)?;
    let chunks = rayon::current_num_threads().max(1) as u64 * 4;
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut g = rng(seed ^ c.wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut sum = vec![0.0; n];
            let mut sq = vec![0.0; n];
            let mut counts = vec![0u64; n];
            let share = walks / chunks + u64::from(c < walks % chunks);
            for _ in 0..share {
                counts.iter_mut().for_each(|x| *x = 0);
                let mut at = s;
                let mut steps = 0;
                while at != t {
                    counts[at] += 1;
                    steps += 1;
                    if steps > MAX_WALK {
                        return Err(Error::NoConvergence(MAX_WALK));
                    }
                    at = samplers[at].sample(&mut g);
                }
                for i in 0..n {
                    let x = counts[i] as f64;
                    sum[i] += x;
                    sq[i] += x * x;
                }
            }
            Ok((sum, sq))
        })
        .collect::<Result<_>>()?;
    let mut sum = vec![0.0; n];
    let mut sq = vec![0.0; n];
    for (a, b) in partial {
        for i in 0..n {
            sum[i] += a[i];
            sq[i] += b[i];
        }
    }
    Ok((0..n).map(|i| Estimate::from_sums(sum[i], sq[i], walks)).collect())
}
