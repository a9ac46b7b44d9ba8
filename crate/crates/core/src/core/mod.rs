//! Matrix carrier, precision policy, the Perron eigenpair and the canonical
//! transforms (normalization, balancing, lazification, exponentiation).

pub mod decimal;
pub mod matrix;
pub mod perron;
pub mod transforms;

pub use decimal::{Decimal, DecimalContext};
pub use matrix::{Matrix, Precision};
pub use perron::{is_irreducible, perron, PerronData, PrecisionConfig};
pub use transforms::{balance, eulerian_residual, exp_operator, lazify, normalize_pf};

/// Perron data followed by the balanced form, the usual entry point for analyses
/// that need `A` with `Aw = Aᵀw = w`.
pub fn balanced(m: &Matrix, cfg: &PrecisionConfig) -> crate::Result<(Matrix, PerronData)> {
    let pd = perron(m, cfg)?;
    let r = normalize_pf(m, &pd);
    let pd1 = PerronData { r: 1.0, ..pd.clone() };
    let (a, w) = balance(&r, &pd1);
    let n = m.n();
    let pw = PerronData {
        r: 1.0,
        u: w.clone(),
        v: w,
        residual: pd.residual,
    };
    debug_assert_eq!(pw.u.len(), n);
    Ok((a, pw))
}
