//! Multiprecision float backend on top of MPFR.
//!
//! Precision is set in decimal digits through a process-wide default; results
//! of binary operations carry the larger precision of the two operands.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};

use rug::ops::Pow;
use rug::Float;

use super::scalar::{Backend, Coeff, Q};

pub const DEFAULT_DIGITS: u32 = 128;

static DEFAULT_PREC_BITS: AtomicU32 = AtomicU32::new(0);

pub fn digits_to_bits(digits: u32) -> u32 {
    // log2(10) plus a few guard bits
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 8
}

pub fn set_default_digits(digits: u32) {
    DEFAULT_PREC_BITS.store(digits_to_bits(digits), AtomicOrdering::Relaxed);
}

pub fn default_bits() -> u32 {
    match DEFAULT_PREC_BITS.load(AtomicOrdering::Relaxed) {
        0 => digits_to_bits(DEFAULT_DIGITS),
        b => b,
    }
}

/// Decimal digits represented by the current default precision.
pub fn default_digits() -> u32 {
    ((default_bits() - 8) as f64 / std::f64::consts::LOG2_10).floor() as u32
}

#[derive(Clone, Debug, PartialEq, PartialOrd)]
pub struct BigFloat(pub Float);

impl BigFloat {
    pub fn with_bits(bits: u32, v: f64) -> Self {
        BigFloat(Float::with_val(bits, v))
    }

    pub fn from_f64(v: f64) -> Self {
        BigFloat(Float::with_val(default_bits(), v))
    }

    pub fn from_q_bits(q: &Q, bits: u32) -> Self {
        let r = rug::Rational::from((
            rug::Integer::from_str_radix(&q.numer().to_str_radix(16), 16).expect("integer"),
            rug::Integer::from_str_radix(&q.denom().to_str_radix(16), 16).expect("integer"),
        ));
        BigFloat(Float::with_val(bits, &r))
    }

    /// Parses a decimal string at the default precision.
    pub fn parse(s: &str) -> Result<Self, String> {
        Self::parse_bits(s, default_bits())
    }

    pub fn parse_bits(s: &str, bits: u32) -> Result<Self, String> {
        if s.contains('/') {
            let q = super::scalar::parse_q(s)?;
            return Ok(Self::from_q_bits(&q, bits));
        }
        let v = Float::parse(s.trim()).map_err(|e| format!("bad float '{s}': {e}"))?;
        Ok(BigFloat(Float::with_val(bits, v)))
    }

    pub fn prec(&self) -> u32 {
        self.0.prec()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }

    pub fn sqrt(&self) -> Self {
        BigFloat(self.0.clone().sqrt())
    }

    pub fn pi(bits: u32) -> Self {
        BigFloat(Float::with_val(bits, rug::float::Constant::Pi))
    }

    pub fn e(bits: u32) -> Self {
        BigFloat(Float::with_val(bits, 1).exp())
    }

    /// Decimal string with `digits` significant digits.
    pub fn to_string_digits(&self, digits: usize) -> String {
        if self.0.is_zero() {
            return "0".into();
        }
        self.0.to_string_radix(10, Some(digits))
    }
}

fn prec2(a: &Float, b: &Float) -> u32 {
    a.prec().max(b.prec())
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = ((self.0.prec().saturating_sub(8)) as f64 / std::f64::consts::LOG2_10).floor() as usize;
        f.write_str(&self.to_string_digits(digits.max(1)))
    }
}

impl Add for BigFloat {
    type Output = BigFloat;
    fn add(self, o: BigFloat) -> BigFloat {
        BigFloat(Float::with_val(prec2(&self.0, &o.0), &self.0 + &o.0))
    }
}

impl Sub for BigFloat {
    type Output = BigFloat;
    fn sub(self, o: BigFloat) -> BigFloat {
        BigFloat(Float::with_val(prec2(&self.0, &o.0), &self.0 - &o.0))
    }
}

impl Mul for BigFloat {
    type Output = BigFloat;
    fn mul(self, o: BigFloat) -> BigFloat {
        BigFloat(Float::with_val(prec2(&self.0, &o.0), &self.0 * &o.0))
    }
}

impl Div for BigFloat {
    type Output = BigFloat;
    fn div(self, o: BigFloat) -> BigFloat {
        BigFloat(Float::with_val(prec2(&self.0, &o.0), &self.0 / &o.0))
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;
    fn neg(self) -> BigFloat {
        BigFloat(-self.0)
    }
}

impl Coeff for BigFloat {
    const BACKEND: Backend = Backend::Float;

    fn zero() -> Self {
        BigFloat(Float::new(default_bits()))
    }
    fn one() -> Self {
        BigFloat(Float::with_val(default_bits(), 1))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        BigFloat(Float::with_val(default_bits(), n))
    }
    fn from_q(q: &Q) -> Self {
        BigFloat::from_q_bits(q, default_bits())
    }
    fn magnitude(&self) -> f64 {
        self.0.to_f64().abs()
    }
    fn negligible(&self, scale: f64) -> bool {
        if self.0.is_zero() {
            return true;
        }
        // keep a quarter of the mantissa as safety margin
        let eps = 2f64.powi(-((self.0.prec() as i32 * 3) / 4).min(1000));
        self.0.to_f64().abs() <= eps * scale.max(f64::MIN_POSITIVE)
    }
    fn sign(&self) -> Option<Ordering> {
        self.0.partial_cmp(&0)
    }
    fn nth_root(&self, n: u32) -> Option<Self> {
        if self.0 <= 0 {
            return None;
        }
        let p = self.0.prec();
        let inv = Float::with_val(p, 1) / Float::with_val(p, n);
        Some(BigFloat(Float::with_val(p, self.0.clone().pow(&inv))))
    }
    fn mul_i64(&self, n: i64) -> Self {
        BigFloat(Float::with_val(self.0.prec(), &self.0 * n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::q;

    #[test]
    fn rational_conversion_is_accurate() {
        let x = BigFloat::from_q_bits(&q(1, 3), 400);
        let three = BigFloat::with_bits(400, 3.0);
        let one = x * three;
        let err = (one - BigFloat::with_bits(400, 1.0)).0.abs();
        assert!(err < 1e-110);
    }

    #[test]
    fn root_and_sign() {
        let x = BigFloat::with_bits(300, 8.0);
        let r = x.nth_root(3).unwrap();
        assert!((r.to_f64() - 2.0).abs() < 1e-15);
        assert_eq!(BigFloat::with_bits(300, -1.0).nth_root(2), None);
        assert_eq!(BigFloat::with_bits(300, -1.0).sign(), Some(Ordering::Less));
    }

    #[test]
    fn precision_follows_larger_operand() {
        let a = BigFloat::with_bits(100, 1.0);
        let b = BigFloat::with_bits(300, 1.0);
        assert_eq!((a + b).prec(), 300);
    }
}
