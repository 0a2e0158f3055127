//! Backend-tagged values for places where the backend is a run-time choice.

use std::fmt;

use super::bigfloat::BigFloat;
use super::lie::LieElement;
use super::ratfunc::RatFunc;
use super::scalar::{format_q, Backend, Q};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ScalarError {
    #[error("backend mismatch: {0} vs {1}")]
    BackendMismatch(Backend, Backend),
    #[error("division by zero")]
    DivByZero,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rational(Q),
    RatFunc(RatFunc),
    Float(BigFloat),
}

macro_rules! checked_op {
    ($name:ident, $op:tt) => {
        pub fn $name(&self, o: &Scalar) -> Result<Scalar, ScalarError> {
            match (self, o) {
                (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(a.clone() $op b.clone())),
                (Scalar::RatFunc(a), Scalar::RatFunc(b)) => Ok(Scalar::RatFunc(a.clone() $op b.clone())),
                (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a.clone() $op b.clone())),
                _ => Err(ScalarError::BackendMismatch(self.backend(), o.backend())),
            }
        }
    };
}

impl Scalar {
    pub fn backend(&self) -> Backend {
        match self {
            Scalar::Rational(_) => Backend::Rational,
            Scalar::RatFunc(_) => Backend::RatFunc,
            Scalar::Float(_) => Backend::Float,
        }
    }

    pub fn is_zero(&self) -> bool {
        use super::scalar::Coeff;
        match self {
            Scalar::Rational(a) => Coeff::is_zero(a),
            Scalar::RatFunc(a) => a.is_zero(),
            Scalar::Float(a) => a.is_zero(),
        }
    }

    checked_op!(checked_add, +);
    checked_op!(checked_sub, -);
    checked_op!(checked_mul, *);

    pub fn checked_div(&self, o: &Scalar) -> Result<Scalar, ScalarError> {
        if self.backend() == o.backend() && o.is_zero() {
            return Err(ScalarError::DivByZero);
        }
        match (self, o) {
            (Scalar::Rational(a), Scalar::Rational(b)) => Ok(Scalar::Rational(a / b)),
            (Scalar::RatFunc(a), Scalar::RatFunc(b)) => Ok(Scalar::RatFunc(a.clone() / b.clone())),
            (Scalar::Float(a), Scalar::Float(b)) => Ok(Scalar::Float(a.clone() / b.clone())),
            _ => Err(ScalarError::BackendMismatch(self.backend(), o.backend())),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(a) => f.write_str(&format_q(a)),
            Scalar::RatFunc(a) => write!(f, "{a}"),
            Scalar::Float(a) => write!(f, "{a}"),
        }
    }
}

/// A `LieElement` whose backend is chosen at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyLieElement {
    Rational(LieElement<Q>),
    RatFunc(LieElement<RatFunc>),
    Float(LieElement<BigFloat>),
}

impl AnyLieElement {
    pub fn backend(&self) -> Backend {
        match self {
            AnyLieElement::Rational(_) => Backend::Rational,
            AnyLieElement::RatFunc(_) => Backend::RatFunc,
            AnyLieElement::Float(_) => Backend::Float,
        }
    }

    pub fn bracket(&self, o: &AnyLieElement) -> Result<AnyLieElement, ScalarError> {
        match (self, o) {
            (AnyLieElement::Rational(a), AnyLieElement::Rational(b)) => Ok(AnyLieElement::Rational(a.bracket(b))),
            (AnyLieElement::RatFunc(a), AnyLieElement::RatFunc(b)) => Ok(AnyLieElement::RatFunc(a.bracket(b))),
            (AnyLieElement::Float(a), AnyLieElement::Float(b)) => Ok(AnyLieElement::Float(a.bracket(b))),
            _ => Err(ScalarError::BackendMismatch(self.backend(), o.backend())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::qi;

    #[test]
    fn mixing_backends_is_an_error() {
        let a = Scalar::Rational(qi(1));
        let b = Scalar::RatFunc(RatFunc::alpha());
        assert_eq!(a.checked_add(&b), Err(ScalarError::BackendMismatch(Backend::Rational, Backend::RatFunc)));
        assert_eq!(a.checked_div(&Scalar::Rational(qi(0))), Err(ScalarError::DivByZero));
        assert_eq!(a.checked_mul(&Scalar::Rational(qi(3))).unwrap(), Scalar::Rational(qi(3)));
    }
}
