//! Basis terms, coefficient backends, sparse Lie elements and polynomial fields.

pub mod any;
pub mod basis;
pub mod bigfloat;
pub mod grading;
pub mod json;
pub mod lie;
pub mod poly;
pub mod ratfunc;
pub mod scalar;
pub mod transform;

pub use any::{AnyLieElement, Scalar, ScalarError};
pub use basis::{BasisTerm, Kind};
pub use bigfloat::BigFloat;
pub use grading::{GradingError, GradingSpec};
pub use lie::{structure, LieElement};
pub use poly::{Mono, Poly3, PolyField3};
pub use ratfunc::{RatFunc, UPoly};
pub use scalar::{Backend, Coeff, Q};
pub use transform::{apply_exp_ad, canonical_rescale, RescaleError, ScalingRecord};
