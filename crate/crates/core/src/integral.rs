//! First integrals of elements of the algebra and the symmetries they generate.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::algebra::json::CoeffIo;
use crate::algebra::{BasisTerm, Coeff, Kind, LieElement, Poly3, PolyField3};

/// `Σ c_ij x^i u^j` with `u = y^2 + z^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstIntegral<C> {
    terms: BTreeMap<(u32, u32), C>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum IntegralError {
    #[error("no-unique-generator: coefficient of F^-1_0 is zero")]
    NoUniqueGenerator,
    #[error("polynomial is not a function of x and y^2+z^2")]
    NotInXU,
}

impl<C: Coeff> FirstIntegral<C> {
    pub fn zero() -> Self {
        FirstIntegral { terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: C) {
        if c.is_zero() {
            return;
        }
        let s = match self.terms.remove(&(i, j)) {
            Some(old) => old + c,
            None => c,
        };
        if !s.is_zero() {
            self.terms.insert((i, j), s);
        }
    }

    pub fn get(&self, i: u32, j: u32) -> C {
        self.terms.get(&(i, j)).cloned().unwrap_or_else(C::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn to_poly(&self) -> Poly3<C> {
        let mut p = Poly3::zero();
        for (&(i, j), c) in &self.terms {
            p = p.add(&xu_monomial::<C>(i, j).scale(c));
        }
        p
    }

    /// Inverse of [`to_poly`](Self::to_poly). Peels off the `y`-leading
    /// monomial of each `x`-slice, which identifies the `u` power uniquely.
    pub fn from_poly(p: &Poly3<C>) -> Result<Self, IntegralError> {
        let mut rest = p.clone();
        let mut out = Self::zero();
        while let Some((m, c)) = rest.iter().max_by_key(|(m, _)| (m[1], m[2])).map(|(m, c)| (*m, c.clone())) {
            if m[1] % 2 != 0 || m[2] % 2 != 0 {
                return Err(IntegralError::NotInXU);
            }
            let (i, j) = (m[0], (m[1] + m[2]) / 2);
            if m[1] != 2 * j {
                return Err(IntegralError::NotInXU);
            }
            out.add_term(i, j, c.clone());
            rest = rest.sub(&xu_monomial::<C>(i, j).scale(&c));
        }
        Ok(out)
    }

    /// Weighted degree with `x` of weight 2 and `y, z` of weight 1, when homogeneous.
    pub fn weighted_degree(&self) -> Option<u32> {
        let mut ws = self.terms.keys().map(|&(i, j)| 2 * i + 2 * j);
        let first = ws.next()?;
        ws.all(|w| w == first).then_some(first)
    }
}

fn xu_monomial<C: Coeff>(i: u32, j: u32) -> Poly3<C> {
    let u = Poly3::from_terms([([0, 2, 0], C::one()), ([0, 0, 2], C::one())]);
    u.pow(j).mul(&Poly3::monomial([i, 0, 0], C::one()))
}

/// `a^{-1}_0 u^2 + Σ a^l_k x^{l+1} u^{k-l+1}` over the `F`-part of `v`.
pub fn first_integral_closed<C: Coeff>(v: &LieElement<C>) -> Result<FirstIntegral<C>, IntegralError> {
    if v.get(&BasisTerm::f(-1, 0)).is_zero() {
        return Err(IntegralError::NoUniqueGenerator);
    }
    let mut f = FirstIntegral::zero();
    for (t, c) in v.iter().filter(|(t, _)| t.kind == Kind::F) {
        f.add_term((t.l + 1) as u32, (t.k - t.l + 1) as u32, c.clone());
    }
    Ok(f)
}

/// Evaluates `∫_0^1 <v(tx, √t y, √t z), (u, -2√t xy, -2√t xz)> dt` term by term.
///
/// Every monomial `x^a y^b z^c` picks up `t^{a+(b+c)/2}`, so the integral
/// of each product is a rational number.
pub fn first_integral_by_quadrature<C: Coeff>(v: &LieElement<C>) -> Result<FirstIntegral<C>, IntegralError> {
    if v.get(&BasisTerm::f(-1, 0)).is_zero() {
        return Err(IntegralError::NoUniqueGenerator);
    }
    let field = v.filter(|t| t.kind == Kind::F).expand(None);
    let mut f = Poly3::zero();
    for (m, c) in field.comps[0].iter() {
        // t^{a+(b+c)/2} against u
        let w = (2 * m[0] + m[1] + m[2] + 2) as i64;
        let base = Poly3::monomial(*m, c.clone() * C::ratio(2, w));
        f = f.add(&base.mul(&Poly3::from_terms([([0, 2, 0], C::one()), ([0, 0, 2], C::one())])));
    }
    for (axis, comp) in [(1usize, &field.comps[1]), (2, &field.comps[2])] {
        for (m, c) in comp.iter() {
            // extra √t from the second factor
            let w = (2 * m[0] + m[1] + m[2] + 3) as i64;
            let mut e = [1, 0, 0];
            e[axis] = 1;
            let base = Poly3::monomial(*m, c.clone() * C::ratio(-4, w));
            f = f.add(&base.mul(&Poly3::monomial(e, C::one())));
        }
    }
    FirstIntegral::from_poly(&f)
}

pub fn lie_derivative<C: Coeff>(f: &PolyField3<C>, g: &Poly3<C>) -> Poly3<C> {
    f.lie_derivative(g)
}

/// `[g^l (z∂y - y∂z), expand(v)]` computed without truncation.
pub fn symmetry_defect<C: Coeff>(v: &LieElement<C>, f: &FirstIntegral<C>, l: u32) -> PolyField3<C> {
    let field = v.expand(None);
    symmetry_defect_field(&field, f, l)
}

pub fn symmetry_defect_field<C: Coeff>(field: &PolyField3<C>, f: &FirstIntegral<C>, l: u32) -> PolyField3<C> {
    let g = f.to_poly().pow(l);
    let rot = [Poly3::zero(), g.mul(&Poly3::var(2)), g.mul(&Poly3::var(1)).scale(&C::from_i64(-1))];
    let cap = rot.iter().chain(field.comps.iter()).filter_map(|p| p.degree()).max().unwrap_or(0) * 2 + 2;
    let s = PolyField3::new(rot, cap);
    s.bracket(&field.with_deg(cap))
}

/// Whether `f^l Θ^0_0` commutes with `v`, with `f = first_integral_closed(v)`.
pub fn check_symmetry<C: Coeff>(v: &LieElement<C>, l: u32) -> bool {
    match first_integral_closed(v) {
        Ok(f) => symmetry_defect(v, &f, l).is_zero(),
        Err(_) => l == 0 && symmetry_defect(v, &FirstIntegral::zero(), 0).is_zero(),
    }
}

/// Same check against a caller-supplied integral.
pub fn check_symmetry_with<C: Coeff>(v: &LieElement<C>, f: &FirstIntegral<C>, l: u32) -> bool {
    symmetry_defect(v, f, l).is_zero()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IntegralTermJson {
    pub x: u32,
    pub u: u32,
    pub coeff: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IntegralJson {
    pub terms: Vec<IntegralTermJson>,
}

impl IntegralJson {
    pub fn from_integral<C: CoeffIo>(f: &FirstIntegral<C>) -> Self {
        IntegralJson {
            terms: f
                .iter()
                .map(|(&(x, u), c)| IntegralTermJson { x, u, coeff: c.format_coeff() })
                .collect(),
        }
    }

    pub fn to_integral<C: CoeffIo>(&self) -> Result<FirstIntegral<C>, String> {
        let mut f = FirstIntegral::zero();
        for t in &self.terms {
            f.add_term(t.x, t.u, C::parse_coeff(&t.coeff)?);
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::{q, qi, Q};

    fn model() -> LieElement<Q> {
        LieElement::from_terms([
            (BasisTerm::theta(0, 0), qi(1)),
            (BasisTerm::f(-1, 0), q(1, 2)),
            (BasisTerm::f(1, 1), qi(1)),
        ])
    }

    #[test]
    fn closed_form_of_model() {
        let f = first_integral_closed(&model()).unwrap();
        assert_eq!(f.get(0, 2), q(1, 2));
        assert_eq!(f.get(2, 1), qi(1));
        assert_eq!(f.len(), 2);
        assert_eq!(first_integral_by_quadrature(&model()).unwrap(), f);
    }

    #[test]
    fn theta_only_has_no_generator() {
        let v = LieElement::<Q>::term(BasisTerm::theta(1, 2), qi(1));
        assert_eq!(first_integral_closed(&v), Err(IntegralError::NoUniqueGenerator));
    }

    #[test]
    fn single_term_quadrature() {
        let v = LieElement::<Q>::from_terms([(BasisTerm::f(-1, 0), qi(3)), (BasisTerm::f(2, 3), qi(1))]);
        let f = first_integral_by_quadrature(&v).unwrap();
        assert_eq!(f.get(3, 2), qi(1));
        assert_eq!(f.get(0, 2), qi(3));
    }

    #[test]
    fn rotation_kills_x_and_u() {
        let rot = LieElement::<Q>::term(BasisTerm::theta(0, 0), qi(1)).expand(Some(4));
        assert!(lie_derivative(&rot, &Poly3::var(0)).is_zero());
        let g = xu_monomial::<Q>(1, 2);
        let f01 = LieElement::<Q>::term(BasisTerm::f(0, 1), qi(1)).expand(Some(4));
        assert!(lie_derivative(&f01, &g).is_zero());
    }

    #[test]
    fn symmetry_checks() {
        assert!(check_symmetry(&model(), 0));
        assert!(check_symmetry(&model(), 1));
        let f = first_integral_closed(&model()).unwrap();
        let perturbed = model().add(&LieElement::term(BasisTerm::f(0, 1), qi(1)));
        assert!(!check_symmetry_with(&perturbed, &f, 1));
    }

    #[test]
    fn xu_roundtrip_and_rejection() {
        let f = first_integral_closed(&model()).unwrap();
        assert_eq!(FirstIntegral::from_poly(&f.to_poly()).unwrap(), f);
        assert_eq!(FirstIntegral::<Q>::from_poly(&Poly3::var(1)), Err(IntegralError::NotInXU));
    }
}
