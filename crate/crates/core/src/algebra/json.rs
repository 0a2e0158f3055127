//! JSON wire formats for Lie elements and polynomial fields.
//!
//! Coefficients always travel as strings: `"num/den"` for rationals,
//! `"(p)/(q)"` in `alpha` for rational functions, decimal for floats.

use serde::{Deserialize, Serialize};

use super::basis::{BasisTerm, Kind};
use super::bigfloat::BigFloat;
use super::lie::LieElement;
use super::poly::{Poly3, PolyField3};
use super::ratfunc::RatFunc;
use super::scalar::{format_q, parse_q, Backend, Coeff, Q};
use super::AnyLieElement;

pub trait CoeffIo: Coeff {
    fn parse_coeff(s: &str) -> Result<Self, String>;
    fn format_coeff(&self) -> String;
}

impl CoeffIo for Q {
    fn parse_coeff(s: &str) -> Result<Self, String> {
        parse_q(s)
    }
    fn format_coeff(&self) -> String {
        format_q(self)
    }
}

impl CoeffIo for RatFunc {
    fn parse_coeff(s: &str) -> Result<Self, String> {
        RatFunc::parse(s)
    }
    fn format_coeff(&self) -> String {
        self.to_string()
    }
}

impl CoeffIo for BigFloat {
    fn parse_coeff(s: &str) -> Result<Self, String> {
        BigFloat::parse(s)
    }
    fn format_coeff(&self) -> String {
        self.to_string()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("json: {0}")]
    Serde(#[from] serde_json::Error),
    #[error("bad coefficient: {0}")]
    Coeff(String),
    #[error("invalid basis term {0:?}^{1}_{2}")]
    Term(Kind, i32, i32),
    #[error("expected backend {expected}, found {found}")]
    Backend { expected: Backend, found: Backend },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TermJson {
    pub kind: Kind,
    pub l: i32,
    pub k: i32,
    pub coeff: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LieJson {
    pub backend: Backend,
    pub terms: Vec<TermJson>,
}

impl LieJson {
    pub fn from_element<C: CoeffIo>(v: &LieElement<C>) -> Self {
        LieJson {
            backend: C::BACKEND,
            terms: v
                .iter()
                .map(|(t, c)| TermJson { kind: t.kind, l: t.l, k: t.k, coeff: c.format_coeff() })
                .collect(),
        }
    }

    /// Reads the terms in backend `C`, regardless of the stored tag.
    pub fn to_element_as<C: CoeffIo>(&self) -> Result<LieElement<C>, JsonError> {
        let mut v = LieElement::zero();
        for t in &self.terms {
            let bt = BasisTerm::new(t.kind, t.l, t.k).ok_or(JsonError::Term(t.kind, t.l, t.k))?;
            v.add_term(bt, C::parse_coeff(&t.coeff).map_err(JsonError::Coeff)?);
        }
        Ok(v)
    }

    pub fn to_element<C: CoeffIo>(&self) -> Result<LieElement<C>, JsonError> {
        if self.backend != C::BACKEND {
            return Err(JsonError::Backend { expected: C::BACKEND, found: self.backend });
        }
        self.to_element_as()
    }

    pub fn to_any(&self) -> Result<AnyLieElement, JsonError> {
        Ok(match self.backend {
            Backend::Rational => AnyLieElement::Rational(self.to_element()?),
            Backend::RatFunc => AnyLieElement::RatFunc(self.to_element()?),
            Backend::Float => AnyLieElement::Float(self.to_element()?),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MonoJson {
    pub i: u32,
    pub j: u32,
    pub k: u32,
    pub coeff: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FieldJson {
    #[serde(default = "default_backend")]
    pub backend: Backend,
    pub deg: u32,
    pub x: Vec<MonoJson>,
    pub y: Vec<MonoJson>,
    pub z: Vec<MonoJson>,
}

fn default_backend() -> Backend {
    Backend::Rational
}

impl FieldJson {
    pub fn from_field<C: CoeffIo>(f: &PolyField3<C>) -> Self {
        let comp = |p: &Poly3<C>| {
            p.iter().map(|(m, c)| MonoJson { i: m[0], j: m[1], k: m[2], coeff: c.format_coeff() }).collect()
        };
        FieldJson {
            backend: C::BACKEND,
            deg: f.deg,
            x: comp(&f.comps[0]),
            y: comp(&f.comps[1]),
            z: comp(&f.comps[2]),
        }
    }

    pub fn to_field_as<C: CoeffIo>(&self) -> Result<PolyField3<C>, JsonError> {
        let comp = |ms: &[MonoJson]| -> Result<Poly3<C>, JsonError> {
            let mut p = Poly3::zero();
            for m in ms {
                p.add_term([m.i, m.j, m.k], C::parse_coeff(&m.coeff).map_err(JsonError::Coeff)?);
            }
            Ok(p)
        };
        Ok(PolyField3::new([comp(&self.x)?, comp(&self.y)?, comp(&self.z)?], self.deg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::q;

    #[test]
    fn lie_roundtrip() {
        let v = LieElement::<Q>::from_terms([(BasisTerm::f(-1, 0), q(1, 2)), (BasisTerm::theta(1, 2), q(-3, 7))]);
        let s = serde_json::to_string(&LieJson::from_element(&v)).unwrap();
        assert!(s.contains("\"Theta\""));
        let back: LieJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_element::<Q>().unwrap(), v);
        assert!(back.to_element::<RatFunc>().is_err());
    }

    #[test]
    fn field_roundtrip() {
        let f = PolyField3::new([Poly3::<Q>::var(1).pow(2), Poly3::var(2), Poly3::var(1).scale(&q(-1, 1))], 3);
        let s = serde_json::to_string(&FieldJson::from_field(&f)).unwrap();
        let back: FieldJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_field_as::<Q>().unwrap(), f);
    }

    #[test]
    fn rejects_invalid_term() {
        let j = LieJson {
            backend: Backend::Rational,
            terms: vec![TermJson { kind: Kind::Theta, l: -1, k: 0, coeff: "1".into() }],
        };
        assert!(matches!(j.to_element::<Q>(), Err(JsonError::Term(..))));
    }
}
