//! Coefficient backends.
//!
//! Every algorithm in the crate is generic over [`Coeff`]. Three backends exist:
//! exact rationals ([`Q`]), rational functions in a single indeterminate
//! ([`RatFunc`](super::ratfunc::RatFunc)) and multiprecision floats
//! ([`BigFloat`](super::bigfloat::BigFloat)).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Exact rational backend.
pub type Q = BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    #[serde(rename = "ratfunc")]
    RatFunc,
    Float,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Rational => "rational",
            Backend::RatFunc => "ratfunc",
            Backend::Float => "float",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rational" => Ok(Backend::Rational),
            "ratfunc" => Ok(Backend::RatFunc),
            "float" => Ok(Backend::Float),
            other => Err(format!("unknown backend '{other}'")),
        }
    }
}

pub trait Coeff:
    Clone
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;

    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn from_i64(n: i64) -> Self;
    fn from_q(q: &Q) -> Self;

    /// Rough absolute size, used for pivoting and tolerances only.
    fn magnitude(&self) -> f64;

    /// Zero test relative to `scale`. Exact backends ignore `scale`.
    fn negligible(&self, _scale: f64) -> bool {
        self.is_zero()
    }

    /// Sign of a constant value; `None` when the value is not a constant
    /// (a non-constant rational function).
    fn sign(&self) -> Option<Ordering>;

    /// Positive real `n`-th root of a positive value, when the backend can
    /// represent it.
    fn nth_root(&self, n: u32) -> Option<Self>;

    fn mul_i64(&self, n: i64) -> Self {
        self.clone() * Self::from_i64(n)
    }

    fn ratio(n: i64, d: i64) -> Self {
        Self::from_q(&Q::new(BigInt::from(n), BigInt::from(d)))
    }

    fn abs(&self) -> Option<Self> {
        match self.sign()? {
            Ordering::Less => Some(-self.clone()),
            _ => Some(self.clone()),
        }
    }

    fn pow(&self, e: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..e {
            r = r * self.clone();
        }
        r
    }
}

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Exact integer `n`-th root, if there is one.
fn int_root(x: &BigInt, n: u32) -> Option<BigInt> {
    if x.is_negative() {
        return None;
    }
    let r = x.nth_root(n);
    (num_traits::pow(r.clone(), n as usize) == *x).then_some(r)
}

impl Coeff for Q {
    const BACKEND: Backend = Backend::Rational;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn from_i64(n: i64) -> Self {
        qi(n)
    }
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn magnitude(&self) -> f64 {
        Signed::abs(self).to_f64().unwrap_or(f64::INFINITY)
    }
    fn sign(&self) -> Option<Ordering> {
        Some(self.cmp(&Zero::zero()))
    }
    fn nth_root(&self, n: u32) -> Option<Self> {
        if !self.is_positive() {
            return None;
        }
        let num = int_root(self.numer(), n)?;
        let den = int_root(self.denom(), n)?;
        Some(Q::new(num, den))
    }
    fn mul_i64(&self, n: i64) -> Self {
        self * BigInt::from(n)
    }
}

/// Pochhammer k-symbol (a)^k_b = a(a+b)...(a+(k-1)b); the empty product is 1.
pub fn pochhammer(a: i64, k: u32, b: i64) -> Q {
    let mut r = BigInt::one();
    for i in 0..k as i64 {
        r *= BigInt::from(a + i * b);
    }
    Q::from_integer(r)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// Parses "n", "n/d" or a plain decimal like "-0.25" into an exact rational.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| format!("bad rational '{s}'"))?;
        let d: BigInt = d.trim().parse().map_err(|_| format!("bad rational '{s}'"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in '{s}'"));
        }
        return Ok(Q::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| format!("bad number '{s}'"))?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(format!("bad number '{s}'"));
    }
    let digits = format!("{ip}{fp}");
    if !digits.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("bad number '{s}'"));
    }
    let mut v = Q::from_integer(digits.parse::<BigInt>().unwrap_or_default());
    let shift = exp - fp.len() as i32;
    let ten = Q::from_integer(BigInt::from(10));
    if shift >= 0 {
        v *= num_traits::pow(ten, shift as usize);
    } else {
        v /= num_traits::pow(ten, (-shift) as usize);
    }
    Ok(if neg { -v } else { v })
}

/// "num/den" always, as the JSON contract asks.
pub fn format_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse_q("3/4").unwrap(), q(3, 4));
        assert_eq!(parse_q("-0.25").unwrap(), q(-1, 4));
        assert_eq!(parse_q("1.5e2").unwrap(), qi(150));
        assert_eq!(parse_q("7").unwrap(), qi(7));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
    }

    #[test]
    fn roots() {
        assert_eq!(q(9, 4).nth_root(2), Some(q(3, 2)));
        assert_eq!(q(2, 1).nth_root(2), None);
        assert_eq!(q(-8, 1).nth_root(3), None);
        assert_eq!(q(27, 8).nth_root(3), Some(q(3, 2)));
    }

    #[test]
    fn pochhammer_empty_is_one() {
        assert_eq!(pochhammer(5, 0, 3), qi(1));
        assert_eq!(pochhammer(3, 3, -2), qi(-3));
    }
}
