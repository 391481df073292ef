//! Numerical extrinsic geometry of a pair of orthogonal distributions on a
//! metric-affine manifold `(M, g, ∇̄ = ∇ + 𝒯)`.
//!
//! Scenarios are closed manifolds described on a single periodic chart.
//! Everything is computed pointwise with forward-mode dual numbers, so the
//! divergence identities hold to roundoff and the integral formulas to
//! quadrature accuracy.

pub mod chart;
pub mod contorsion;
pub mod dual;
pub mod catalog;
pub mod error;
pub mod expr;
pub mod extrinsic;
pub mod frame;
pub mod invariants;
pub mod linalg;
pub mod point;
pub mod predicates;
pub mod quadrature;
pub mod report;
pub mod scenario;
pub mod splitting;
pub mod zoo;

pub use error::{GeomError, Result};
pub use scenario::Scenario;
