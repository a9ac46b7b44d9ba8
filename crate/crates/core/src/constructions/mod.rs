//! Generators for the named matrix families and the conjecture scanners.

pub mod chet;
pub mod conjectures;
pub mod families;
pub mod rootn;

pub use chet::{chet, chet16_equation, chet_analytic, chet_permanent_check, chet_scan, ChetData, ChetScanRow};
pub use conjectures::{trace_conjecture_search, TraceConjectureReport, TraceOutcome};
pub use families::{
    approx_trace_counterexample, beyond_half, debruijn, debruijn_nonexpanding_set, debruijn_set_size_formula,
    jordan_census_zero, klawe_vazirani, ApproxTraceReport,
};
pub use rootn::{rootn, rootn_data, rootn_perturbed, rootn_quadratic_check, rootn_schur, RootnData, RootnSchur};
