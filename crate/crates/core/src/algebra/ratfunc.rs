//! Rational functions in one indeterminate `alpha` over the rationals.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::Signed;

use super::scalar::{parse_q, Backend, Coeff, Q};

/// Dense univariate polynomial, coefficients from low to high degree, no
/// trailing zeros. The zero polynomial is the empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UPoly(pub Vec<Q>);

impl UPoly {
    pub fn zero() -> Self {
        UPoly(Vec::new())
    }

    pub fn constant(c: Q) -> Self {
        UPoly(vec![c]).trimmed()
    }

    pub fn x() -> Self {
        UPoly(vec![Q::zero(), Q::one()])
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Option<&Q> {
        self.0.last()
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return UPoly::zero();
        }
        UPoly(self.0.iter().map(|a| a * c).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.0.get(i).cloned().unwrap_or_else(Q::zero);
            let b = o.0.get(i).cloned().unwrap_or_else(Q::zero);
            out.push(a + b);
        }
        UPoly(out).trimmed()
    }

    pub fn neg(&self) -> Self {
        UPoly(self.0.iter().map(|a| -a).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return UPoly::zero();
        }
        let mut out = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly(out).trimmed()
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.0[dd].clone();
        let mut rem = self.0.clone();
        if rem.len() <= dd {
            return (UPoly::zero(), self.clone());
        }
        let mut quo = vec![Q::zero(); rem.len() - dd];
        for i in (0..quo.len()).rev() {
            let c = &rem[i + dd] / &lead;
            if !c.is_zero() {
                for (j, b) in d.0.iter().enumerate() {
                    rem[i + j] -= &c * b;
                }
            }
            quo[i] = c;
        }
        rem.truncate(dd);
        (UPoly(quo).trimmed(), UPoly(rem).trimmed())
    }

    pub fn monic(&self) -> Self {
        match self.lead() {
            Some(l) => self.scale(&(Q::one() / l)),
            None => UPoly::zero(),
        }
    }

    /// Monic gcd (zero if both are zero).
    pub fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    fn fmt_alpha(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = Signed::abs(c);
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let coef = if a.is_integer() { a.numer().to_string() } else { format!("{}/{}", a.numer(), a.denom()) };
            match i {
                0 => s.push_str(&coef),
                _ => {
                    if a != Q::one() {
                        s.push_str(&coef);
                        s.push('*');
                    }
                    s.push_str("alpha");
                    if i > 1 {
                        s.push_str(&format!("^{i}"));
                    }
                }
            }
        }
        s
    }

    /// Inverse of the `Display` form: sums of `c`, `c*alpha`, `c*alpha^n`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err("empty polynomial".into());
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (i, ch) in s.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 && !cur.ends_with('^') && !cur.ends_with('e') {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        let mut out = UPoly::zero();
        for t in terms {
            let (sign, body) = match t.strip_prefix('-') {
                Some(b) => (-1, b.to_string()),
                None => (1, t.strip_prefix('+').unwrap_or(&t).to_string()),
            };
            let (coef, power) = match body.find("alpha") {
                Some(pos) => {
                    let c = body[..pos].trim_end_matches('*');
                    let c = if c.is_empty() { Q::one() } else { parse_q(c)? };
                    let rest = &body[pos + 5..];
                    let e = match rest.strip_prefix('^') {
                        Some(e) => e.parse::<usize>().map_err(|_| format!("bad exponent in '{t}'"))?,
                        None if rest.is_empty() => 1,
                        None => return Err(format!("bad term '{t}'")),
                    };
                    (c, e)
                }
                None => (parse_q(&body)?, 0),
            };
            let mut v = vec![Q::zero(); power + 1];
            v[power] = coef * BigInt::from(sign);
            out = out.add(&UPoly(v).trimmed());
        }
        Ok(out)
    }
}

impl fmt::Display for UPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.fmt_alpha())
    }
}

/// Reduced fraction num/den with a monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    num: UPoly,
    den: UPoly,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VanishingDenominator(pub UPoly);

impl RatFunc {
    pub fn new(num: UPoly, den: UPoly) -> Self {
        assert!(!den.is_zero(), "rational function with zero denominator");
        if num.is_zero() {
            return RatFunc { num, den: UPoly::constant(Q::one()) };
        }
        let g = UPoly::gcd(&num, &den);
        let (mut n, _) = num.divrem(&g);
        let (mut d, _) = den.divrem(&g);
        let l = d.lead().cloned().unwrap_or_else(Q::one);
        if l != Q::one() {
            let inv = Q::one() / l;
            n = n.scale(&inv);
            d = d.scale(&inv);
        }
        RatFunc { num: n, den: d }
    }

    pub fn from_poly(p: UPoly) -> Self {
        RatFunc { num: p, den: UPoly::constant(Q::one()) }
    }

    /// The indeterminate itself.
    pub fn alpha() -> Self {
        RatFunc::from_poly(UPoly::x())
    }

    pub fn numer(&self) -> &UPoly {
        &self.num
    }

    pub fn denom(&self) -> &UPoly {
        &self.den
    }

    /// Value as a constant, if it is one.
    pub fn as_constant(&self) -> Option<Q> {
        match (self.num.degree(), self.den.degree()) {
            (None, _) => Some(Q::zero()),
            (Some(0), Some(0)) => Some(&self.num.0[0] / &self.den.0[0]),
            _ => None,
        }
    }

    /// Specializes alpha := x. Fails when the denominator vanishes there.
    pub fn eval(&self, x: &Q) -> Result<Q, VanishingDenominator> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(VanishingDenominator(self.den.clone()));
        }
        Ok(self.num.eval(x) / d)
    }

    pub fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(body) = s.strip_prefix('(') {
            if let Some(idx) = body.find(")/(") {
                let num = UPoly::parse(&body[..idx])?;
                let den = body[idx + 3..].strip_suffix(')').ok_or_else(|| format!("bad ratfunc '{s}'"))?;
                let den = UPoly::parse(den)?;
                if den.is_zero() {
                    return Err(format!("zero denominator in '{s}'"));
                }
                return Ok(RatFunc::new(num, den));
            }
        }
        Ok(RatFunc::from_poly(UPoly::parse(s)?))
    }
}

impl fmt::Display for RatFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})/({})", self.num, self.den)
    }
}

impl Add for RatFunc {
    type Output = RatFunc;
    fn add(self, o: RatFunc) -> RatFunc {
        if self.den == o.den {
            return RatFunc::new(self.num.add(&o.num), self.den);
        }
        RatFunc::new(self.num.mul(&o.den).add(&o.num.mul(&self.den)), self.den.mul(&o.den))
    }
}

impl Sub for RatFunc {
    type Output = RatFunc;
    fn sub(self, o: RatFunc) -> RatFunc {
        self + (-o)
    }
}

impl Neg for RatFunc {
    type Output = RatFunc;
    fn neg(self) -> RatFunc {
        RatFunc { num: self.num.neg(), den: self.den }
    }
}

impl Mul for RatFunc {
    type Output = RatFunc;
    fn mul(self, o: RatFunc) -> RatFunc {
        if self.num.is_zero() || o.num.is_zero() {
            return RatFunc::zero();
        }
        RatFunc::new(self.num.mul(&o.num), self.den.mul(&o.den))
    }
}

impl Div for RatFunc {
    type Output = RatFunc;
    fn div(self, o: RatFunc) -> RatFunc {
        assert!(!o.num.is_zero(), "rational function division by zero");
        RatFunc::new(self.num.mul(&o.den), self.den.mul(&o.num))
    }
}

impl Coeff for RatFunc {
    const BACKEND: Backend = Backend::RatFunc;

    fn zero() -> Self {
        RatFunc::from_poly(UPoly::zero())
    }
    fn one() -> Self {
        RatFunc::from_poly(UPoly::constant(Q::one()))
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn from_i64(n: i64) -> Self {
        RatFunc::from_poly(UPoly::constant(Q::from_integer(BigInt::from(n))))
    }
    fn from_q(q: &Q) -> Self {
        RatFunc::from_poly(UPoly::constant(q.clone()))
    }
    fn magnitude(&self) -> f64 {
        if self.num.is_zero() {
            0.0
        } else {
            1.0
        }
    }
    fn sign(&self) -> Option<Ordering> {
        self.as_constant().map(|c| c.cmp(&Q::zero()))
    }
    fn nth_root(&self, n: u32) -> Option<Self> {
        self.as_constant().and_then(|c| c.nth_root(n)).map(|c| RatFunc::from_q(&c))
    }
    fn mul_i64(&self, n: i64) -> Self {
        if n == 0 {
            return RatFunc::zero();
        }
        RatFunc { num: self.num.scale(&Q::from_integer(BigInt::from(n))), den: self.den.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::q;

    fn a() -> RatFunc {
        RatFunc::alpha()
    }

    #[test]
    fn reduces_to_lowest_terms() {
        // (alpha^2 - 1)/(alpha - 1) = alpha + 1
        let num = a() * a() - RatFunc::one();
        let r = num / (a() - RatFunc::one());
        assert_eq!(r, a() + RatFunc::one());
        assert_eq!(r.denom(), &UPoly::constant(Q::one()));
    }

    #[test]
    fn field_axioms_spot() {
        let x = (a() + RatFunc::from_i64(2)) / (a() * a() + RatFunc::one());
        let y = RatFunc::ratio(3, 7) * a() - RatFunc::from_i64(5);
        assert_eq!((x.clone() + y.clone()) - y.clone(), x);
        assert_eq!((x.clone() * y.clone()) / y, x);
        assert!((x.clone() - x).is_zero());
    }

    #[test]
    fn display_roundtrip() {
        let x = (RatFunc::ratio(3, 2) * a() * a() - a() + RatFunc::ratio(1, 4)) / (a() - RatFunc::from_i64(2));
        let s = x.to_string();
        assert_eq!(RatFunc::parse(&s).unwrap(), x);
        assert_eq!(RatFunc::parse("(alpha)/(1)").unwrap(), a());
    }

    #[test]
    fn eval_and_vanishing() {
        let x = RatFunc::one() / (a() - RatFunc::one());
        assert_eq!(x.eval(&q(3, 1)).unwrap(), q(1, 2));
        assert!(x.eval(&q(1, 1)).is_err());
    }
}
