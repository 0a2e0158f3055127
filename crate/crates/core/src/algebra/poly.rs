//! Sparse polynomials in (x, y, z) and polynomial vector fields.

use std::collections::BTreeMap;

use super::scalar::Coeff;

pub type Mono = [u32; 3];

pub fn mono_degree(m: &Mono) -> u32 {
    m[0] + m[1] + m[2]
}

#[derive(Clone, Debug, PartialEq)]
pub struct Poly3<C> {
    terms: BTreeMap<Mono, C>,
}

impl<C: Coeff> Default for Poly3<C> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<C: Coeff> Poly3<C> {
    pub fn zero() -> Self {
        Poly3 { terms: BTreeMap::new() }
    }

    pub fn constant(c: C) -> Self {
        Self::monomial([0, 0, 0], c)
    }

    pub fn monomial(m: Mono, c: C) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn var(i: usize) -> Self {
        let mut m = [0; 3];
        m[i] = 1;
        Self::monomial(m, C::one())
    }

    pub fn from_terms(it: impl IntoIterator<Item = (Mono, C)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Mono, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.remove(&m) {
            Some(old) => {
                let s = old + c;
                if !s.is_zero() {
                    self.terms.insert(m, s);
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn get(&self, m: &Mono) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Mono, &C)> {
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

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(mono_degree).max()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, -c.clone());
        }
        r
    }

    pub fn scale(&self, s: &C) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (*m, c.clone() * s.clone())))
    }

    /// Product, dropping monomials of degree above `cap`.
    pub fn mul_capped(&self, o: &Self, cap: Option<u32>) -> Self {
        let mut r = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                let m = [m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2]];
                if cap.is_some_and(|d| mono_degree(&m) > d) {
                    continue;
                }
                r.add_term(m, c1.clone() * c2.clone());
            }
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        self.mul_capped(o, None)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut r = Self::constant(C::one());
        for _ in 0..n {
            r = r.mul(self);
        }
        r
    }

    pub fn diff(&self, i: usize) -> Self {
        Self::from_terms(self.terms.iter().filter(|(m, _)| m[i] > 0).map(|(m, c)| {
            let mut mm = *m;
            mm[i] -= 1;
            (mm, c.mul_i64(m[i] as i64))
        }))
    }

    pub fn homogeneous(&self, d: u32) -> Self {
        Self::from_terms(self.terms.iter().filter(|(m, _)| mono_degree(m) == d).map(|(m, c)| (*m, c.clone())))
    }

    pub fn truncate(&self, d: u32) -> Self {
        Self::from_terms(self.terms.iter().filter(|(m, _)| mono_degree(m) <= d).map(|(m, c)| (*m, c.clone())))
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Poly3<D> {
        Poly3::from_terms(self.terms.iter().map(|(m, c)| (*m, f(c))))
    }

    /// Substitutes each variable by a polynomial, dropping degrees above `cap`.
    pub fn compose(&self, subs: &[Poly3<C>; 3], cap: u32) -> Self {
        let mut out = Self::zero();
        let mut powers: [Vec<Poly3<C>>; 3] = Default::default();
        for i in 0..3 {
            let maxe = self.terms.keys().map(|m| m[i]).max().unwrap_or(0);
            powers[i].push(Poly3::constant(C::one()));
            for e in 1..=maxe {
                let next = powers[i][e as usize - 1].mul_capped(&subs[i], Some(cap));
                powers[i].push(next);
            }
        }
        for (m, c) in &self.terms {
            let t = powers[0][m[0] as usize]
                .mul_capped(&powers[1][m[1] as usize], Some(cap))
                .mul_capped(&powers[2][m[2] as usize], Some(cap));
            out = out.add(&t.scale(c));
        }
        out
    }

    pub fn eval_f64(&self, p: [f64; 3], conv: impl Fn(&C) -> f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| conv(c) * p[0].powi(m[0] as i32) * p[1].powi(m[1] as i32) * p[2].powi(m[2] as i32))
            .sum()
    }
}

/// Polynomial vector field `x' = f0, y' = f1, z' = f2`, truncated at total degree `deg`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyField3<C> {
    pub comps: [Poly3<C>; 3],
    pub deg: u32,
}

impl<C: Coeff> PolyField3<C> {
    pub fn zero(deg: u32) -> Self {
        PolyField3 { comps: [Poly3::zero(), Poly3::zero(), Poly3::zero()], deg }
    }

    /// Builds a field and drops monomials above `deg`.
    pub fn new(comps: [Poly3<C>; 3], deg: u32) -> Self {
        let [a, b, c] = comps;
        PolyField3 { comps: [a.truncate(deg), b.truncate(deg), c.truncate(deg)], deg }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|p| p.is_zero())
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.comps.iter().filter_map(|p| p.degree()).max()
    }

    fn zip(&self, o: &Self, f: impl Fn(&Poly3<C>, &Poly3<C>) -> Poly3<C>) -> Self {
        let deg = self.deg.min(o.deg);
        PolyField3::new(
            [f(&self.comps[0], &o.comps[0]), f(&self.comps[1], &o.comps[1]), f(&self.comps[2], &o.comps[2])],
            deg,
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.add(b))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.zip(o, |a, b| a.sub(b))
    }

    pub fn scale(&self, s: &C) -> Self {
        PolyField3 { comps: self.comps.clone().map(|p| p.scale(s)), deg: self.deg }
    }

    pub fn homogeneous(&self, d: u32) -> Self {
        PolyField3 { comps: self.comps.clone().map(|p| p.homogeneous(d)), deg: self.deg }
    }

    pub fn truncate(&self, d: u32) -> Self {
        PolyField3::new(self.comps.clone(), d.min(self.deg))
    }

    pub fn with_deg(&self, d: u32) -> Self {
        PolyField3::new(self.comps.clone(), d)
    }

    pub fn map<D: Coeff>(&self, f: impl Fn(&C) -> D) -> PolyField3<D> {
        PolyField3 { comps: [self.comps[0].map(&f), self.comps[1].map(&f), self.comps[2].map(&f)], deg: self.deg }
    }

    /// Lie bracket `[v, w] = Dw·v - Dv·w`, truncated at the smaller degree cap.
    pub fn bracket(&self, w: &Self) -> Self {
        let cap = self.deg.min(w.deg);
        let mut out: [Poly3<C>; 3] = Default::default();
        for (i, o) in out.iter_mut().enumerate() {
            for j in 0..3 {
                let a = w.comps[i].diff(j).mul_capped(&self.comps[j], Some(cap));
                let b = self.comps[i].diff(j).mul_capped(&w.comps[j], Some(cap));
                *o = o.add(&a).sub(&b);
            }
        }
        PolyField3 { comps: out, deg: cap }
    }

    pub fn divergence(&self) -> Poly3<C> {
        self.comps[0].diff(0).add(&self.comps[1].diff(1)).add(&self.comps[2].diff(2))
    }

    /// `f0 ∂x g + f1 ∂y g + f2 ∂z g`, exact (no truncation).
    pub fn lie_derivative(&self, g: &Poly3<C>) -> Poly3<C> {
        let mut r = Poly3::zero();
        for i in 0..3 {
            r = r.add(&self.comps[i].mul(&g.diff(i)));
        }
        r
    }

    /// `Σ ad_h^j (self) / j!` up to the degree cap. `h` must have no
    /// constant or linear part, otherwise the series does not terminate.
    pub fn exp_ad(&self, h: &Self) -> Self {
        assert!(
            h.comps.iter().all(|p| p.iter().all(|(m, _)| mono_degree(m) >= 2)),
            "generator must start at degree 2"
        );
        let mut res = self.clone();
        let mut term = self.clone();
        let mut j = 1i64;
        loop {
            term = h.bracket(&term).scale(&(C::one() / C::from_i64(j)));
            if term.is_zero() {
                break;
            }
            res = res.add(&term);
            j += 1;
        }
        res
    }

    /// Linear change of state variables `old = P·new`: returns `P^{-1} f(P·new)`.
    pub fn linear_conjugate(&self, p: &[[C; 3]; 3], pinv: &[[C; 3]; 3]) -> Self {
        let subs: [Poly3<C>; 3] = std::array::from_fn(|i| {
            Poly3::from_terms((0..3).map(|j| {
                let mut m = [0; 3];
                m[j] = 1;
                (m, p[i][j].clone())
            }))
        });
        let composed: Vec<Poly3<C>> = self.comps.iter().map(|c| c.compose(&subs, self.deg)).collect();
        let comps = std::array::from_fn(|i| {
            let mut acc = Poly3::zero();
            for (j, c) in composed.iter().enumerate() {
                acc = acc.add(&c.scale(&pinv[i][j]));
            }
            acc
        });
        PolyField3 { comps, deg: self.deg }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::{qi, Q};

    fn x() -> Poly3<Q> {
        Poly3::var(0)
    }
    fn y() -> Poly3<Q> {
        Poly3::var(1)
    }
    fn z() -> Poly3<Q> {
        Poly3::var(2)
    }

    #[test]
    fn euler_divergence_is_three() {
        let f = PolyField3::new([x(), y(), z()], 3);
        assert_eq!(f.divergence(), Poly3::constant(qi(3)));
    }

    #[test]
    fn rotation_kills_x() {
        let rot = PolyField3::new([Poly3::zero(), z(), y().scale(&qi(-1))], 4);
        assert!(rot.lie_derivative(&x()).is_zero());
        let u = y().pow(2).add(&z().pow(2));
        assert!(rot.lie_derivative(&u).is_zero());
    }

    #[test]
    fn bracket_antisymmetric() {
        let a = PolyField3::new([x().mul(&y()), z().pow(2), x()], 5);
        let b = PolyField3::new([y(), x().pow(2), x().mul(&z())], 5);
        assert!(a.bracket(&b).add(&b.bracket(&a)).is_zero());
    }
}
