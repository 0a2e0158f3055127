//! Sparse elements of the volume-preserving Lie algebra in the `F`/`Θ` basis.

use std::collections::BTreeMap;
use std::fmt;

use super::basis::{BasisTerm, Kind};
use super::grading::GradingSpec;
use super::poly::{Poly3, PolyField3};
use super::scalar::{binomial, Coeff};

/// Structure constants. Returns `None` when the bracket vanishes.
pub fn structure(a: &BasisTerm, b: &BasisTerm) -> Option<(i64, BasisTerm)> {
    let (l, k, m, n) = (a.l as i64, a.k as i64, b.l as i64, b.k as i64);
    let (c, kind) = match (a.kind, b.kind) {
        (Kind::F, Kind::F) => ((m + 1) * (k + 2) - (l + 1) * (n + 2), Kind::F),
        (Kind::F, Kind::Theta) => (m * (k + 2) - n * (l + 1), Kind::Theta),
        (Kind::Theta, Kind::F) => (-(l * (n + 2) - k * (m + 1)), Kind::Theta),
        (Kind::Theta, Kind::Theta) => return None,
    };
    if c == 0 {
        return None;
    }
    let t = BasisTerm::new(kind, a.l + b.l, a.k + b.k).expect("bracket closes in the basis");
    Some((c, t))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LieElement<C> {
    terms: BTreeMap<BasisTerm, C>,
}

impl<C: Coeff> Default for LieElement<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> LieElement<C> {
    pub fn zero() -> Self {
        LieElement { terms: BTreeMap::new() }
    }

    pub fn term(t: BasisTerm, c: C) -> Self {
        let mut e = Self::zero();
        e.add_term(t, c);
        e
    }

    pub fn from_terms(it: impl IntoIterator<Item = (BasisTerm, C)>) -> Self {
        let mut e = Self::zero();
        for (t, c) in it {
            e.add_term(t, c);
        }
        e
    }

    pub fn add_term(&mut self, t: BasisTerm, c: C) {
        debug_assert!(t.is_valid());
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&t) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(t, s);
                }
            }
            None => {
                self.terms.insert(t, c);
            }
        }
    }

    pub fn set(&mut self, t: BasisTerm, c: C) {
        if c.is_zero() {
            self.terms.remove(&t);
        } else {
            self.terms.insert(t, c);
        }
    }

    pub fn remove(&mut self, t: &BasisTerm) -> Option<C> {
        self.terms.remove(t)
    }

    pub fn get(&self, t: &BasisTerm) -> C {
        self.terms.get(t).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeff(&self, t: &BasisTerm) -> Option<&C> {
        self.terms.get(t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisTerm, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (t, c) in &o.terms {
            r.add_term(*t, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (t, c) in &o.terms {
            r.add_term(*t, -c.clone());
        }
        r
    }

    pub fn neg(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(t, c)| (*t, -c.clone())))
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(t, c)| (*t, c.clone() * s.clone())))
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> LieElement<D> {
        LieElement::from_terms(self.terms.iter().map(|(t, c)| (*t, f(c))))
    }

    /// Drops coefficients that are negligible relative to `scale` (float backend).
    pub fn prune(&self, scale: f64) -> Self {
        Self::from_terms(self.terms.iter().filter(|(_, c)| !c.negligible(scale)).map(|(t, c)| (*t, c.clone())))
    }

    pub fn max_magnitude(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    pub fn bracket(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if let Some((s, t)) = structure(a, b) {
                    r.add_term(t, (ca.clone() * cb.clone()).mul_i64(s));
                }
            }
        }
        r
    }

    /// Bracket keeping only results of grade `<= cap`. Gradings are additive
    /// under the bracket, so pairs are skipped before multiplying.
    pub fn bracket_capped(&self, o: &Self, g: &GradingSpec, cap: i64) -> Self {
        let mut r = Self::zero();
        let og: Vec<(i64, &BasisTerm, &C)> = o.terms.iter().map(|(t, c)| (g.grade(t), t, c)).collect();
        for (a, ca) in &self.terms {
            let ga = g.grade(a);
            for (gb, b, cb) in &og {
                if ga + gb > cap {
                    continue;
                }
                if let Some((s, t)) = structure(a, b) {
                    r.add_term(t, (ca.clone() * (*cb).clone()).mul_i64(s));
                }
            }
        }
        r
    }

    pub fn truncate(&self, g: &GradingSpec, n: i64) -> Self {
        self.filter(|t| g.grade(t) <= n)
    }

    pub fn homogeneous(&self, g: &GradingSpec, d: i64) -> Self {
        self.filter(|t| g.grade(t) == d)
    }

    pub fn filter(&self, keep: impl Fn(&BasisTerm) -> bool) -> Self {
        Self::from_terms(self.terms.iter().filter(|(t, _)| keep(t)).map(|(t, c)| (*t, c.clone())))
    }

    pub fn min_grade(&self, g: &GradingSpec) -> Option<i64> {
        self.terms.keys().map(|t| g.grade(t)).min()
    }

    pub fn max_grade(&self, g: &GradingSpec) -> Option<i64> {
        self.terms.keys().map(|t| g.grade(t)).max()
    }

    /// Expands into a polynomial vector field of degree cap `deg`
    /// (defaults to the largest term degree).
    pub fn expand(&self, deg: Option<u32>) -> PolyField3<C> {
        let d = deg.unwrap_or_else(|| self.terms.keys().map(|t| t.poly_degree().max(0) as u32).max().unwrap_or(1));
        let mut f = PolyField3::zero(d);
        for (t, c) in &self.terms {
            if t.poly_degree() as u32 > d {
                continue;
            }
            f = f.add(&expand_term::<C>(t, d).scale(c));
        }
        f
    }
}

/// `u^n = (y^2 + z^2)^n` times `x^a`, as a polynomial.
fn x_u_pow<C: Coeff>(a: u32, n: u32) -> Poly3<C> {
    Poly3::from_terms((0..=n).map(|i| {
        let b = binomial(n, i);
        ([a, 2 * i, 2 * (n - i)], C::from_q(&b.into()))
    }))
}

pub fn expand_term<C: Coeff>(t: &BasisTerm, deg: u32) -> PolyField3<C> {
    let (l, k) = (t.l, t.k);
    match t.kind {
        Kind::F => {
            let n = (k - l) as u32;
            let xc = x_u_pow::<C>((l + 1) as u32, n).scale(&C::from_i64((k - l + 1) as i64));
            if l == -1 {
                return PolyField3::new([xc, Poly3::zero(), Poly3::zero()], deg);
            }
            let base = x_u_pow::<C>(l as u32, n).scale(&C::ratio(-(l as i64 + 1), 2));
            let y = base.mul(&Poly3::var(1));
            let z = base.mul(&Poly3::var(2));
            PolyField3::new([xc, y, z], deg)
        }
        Kind::Theta => {
            let base = x_u_pow::<C>(l as u32, (k - l) as u32);
            let y = base.mul(&Poly3::var(2));
            let z = base.mul(&Poly3::var(1)).scale(&C::from_i64(-1));
            PolyField3::new([Poly3::zero(), y, z], deg)
        }
    }
}

impl<C: Coeff> fmt::Display for LieElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (t, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            write!(f, "({c})*{t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::{qi, Q};

    #[test]
    fn documented_bracket() {
        let a = LieElement::<Q>::term(BasisTerm::f(-1, 0), qi(1));
        let b = LieElement::<Q>::term(BasisTerm::f(1, 1), qi(1));
        assert_eq!(a.bracket(&b), LieElement::term(BasisTerm::f(0, 1), qi(4)));
    }

    #[test]
    fn bracket_matches_expansion() {
        let terms: Vec<BasisTerm> = (0..4).flat_map(BasisTerm::with_lower).collect();
        for a in &terms {
            for b in &terms {
                let ea = LieElement::<Q>::term(*a, qi(1));
                let eb = LieElement::<Q>::term(*b, qi(1));
                let sym = ea.bracket(&eb).expand(Some(12));
                let num = ea.expand(Some(12)).bracket(&eb.expand(Some(12)));
                assert_eq!(sym, num, "[{a}, {b}]");
            }
        }
    }

    #[test]
    fn terms_are_divergence_free() {
        for t in (0..5).flat_map(BasisTerm::with_lower) {
            assert!(expand_term::<Q>(&t, 20).divergence().is_zero(), "{t}");
        }
    }
}
