//! Coupled fixed points `x = F(x, y)`, `y = F(y, x)` of mixed monotone
//! operators on partially ordered metric spaces.
//!
//! The crate is organised around the product-space view of a coupled problem:
//! a pair `Z = (x, y)` lives in `X²`, which carries the averaged metric `d₂`
//! and the mixed product order `≤₂`, and the operator `T(x, y) = (F(x, y), F(y, x))`
//! turns coupled fixed points of `F` into ordinary fixed points of `T`.
//!
//! * [`space`] – ordered metric spaces, the product space and axiom audits.
//! * [`operator`] – coupled operators, `T`, and the mixed monotone check.
//! * [`conditions`] – falsification of the Banach, Meir–Keeler and symmetric
//!   Meir–Keeler contractive conditions, plus `δ(ε)` curve estimation.
//! * [`solver`] – Picard iteration on `X²` with the `η_n` step diagnostic.
//! * [`uniqueness`] – multi-start and comparability probes.
//! * [`problems`] – built-in instances and the finite-problem file loader.

pub mod conditions;
pub mod error;
pub mod operator;
pub mod problems;
pub mod scalar;
pub mod solver;
pub mod space;
pub mod uniqueness;

pub(crate) mod seeds;

pub use conditions::{
    check_banach_k, check_samet, check_strict_contraction, check_symmetric_mk, delta_from_k, estimate_delta_curve,
    ConditionId, ConditionReport, DeltaBound, DeltaEstimate, EpsilonProbe, Verdict, Witness,
};
pub use error::{Error, Result};
pub use operator::{check_mixed_monotone, product_t, CoupledOperator, FnOperator, LinearOperator, TabulatedOperator};
pub use problems::{builtin, load_finite, parse_finite, Instance, Problem};
pub use scalar::Scalar;
pub use solver::{check_start, residual, solve, Direction, IterationTrace, SolveOptions, StartVerdict, Termination};
pub use space::{
    audit_space, d2, product_leq, AuditReport, CustomSpace, FiniteSpace, OrderedMetricSpace, PairPoint, ProductSpace,
    RealLine, Relation,
};
pub use uniqueness::{check_diagonal, multi_start_uniqueness, probe_comparability, DiagonalCheck, UniquenessReport};

/// Version tag written into every JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;
