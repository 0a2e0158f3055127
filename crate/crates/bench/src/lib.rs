//! Shared inputs for the criterion benches.

use hopfzero::algebra::bigfloat::digits_to_bits;
use hopfzero::algebra::scalar::{q, qi};
use hopfzero::systems::rossler_cubic_nf_golden;
use hopfzero::{BasisTerm, BigFloat, LieElement, Q};

/// Rössler cubic normal form at `a = 1`, exact.
pub fn rossler_exact() -> LieElement<Q> {
    rossler_cubic_nf_golden(&qi(1)).expect("a = 1 is in the domain")
}

/// Same at 128 digits.
pub fn rossler_float() -> LieElement<BigFloat> {
    rossler_cubic_nf_golden(&BigFloat::with_bits(digits_to_bits(128), 1.0)).expect("a = 1 is in the domain")
}

/// A dense element with every basis term up to grade `k`.
pub fn dense(k: i32) -> LieElement<Q> {
    LieElement::from_terms((0..=k).flat_map(BasisTerm::with_lower).enumerate().map(|(i, t)| (t, q(i as i64 % 7 - 3, 1 + i as i64 % 4))))
}
