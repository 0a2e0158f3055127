//! Volume-preserving Hopf-zero normal forms: Lie algebra arithmetic in the
//! `F`/`Θ` basis, classical and hyper normalization, first integrals,
//! optimal truncation estimates and radius-of-convergence scans.

pub mod algebra;
pub mod classical;
pub mod hypernorm;
pub mod integral;
pub mod linalg;
pub mod parametric;
pub mod radius;
pub mod systems;
pub mod truncation;

pub use algebra::{
    apply_exp_ad, canonical_rescale, AnyLieElement, Backend, BasisTerm, BigFloat, Coeff, GradingSpec, Kind,
    LieElement, Poly3, PolyField3, RatFunc, Scalar, ScalingRecord, Q,
};
