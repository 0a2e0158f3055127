//! Parametric support: gradings with parameter monomials, admissible index
//! sets, the non-degeneracy rank test and the truncated parametric template.
//!
//! The full parametric reduction is not executed here. The template is
//! emitted with named placeholders and can be instantiated with concrete
//! coefficients.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::algebra::{Backend, BasisTerm, Coeff, GradingSpec, LieElement};
use crate::integral::FirstIntegral;
use crate::linalg::{self, Matrix};

/// Exponent vector of `μ^m = μ_1^{m_1} ⋯ μ_j^{m_j}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ParamMonomial(pub Vec<u32>);

impl ParamMonomial {
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        ParamMonomial((0..n).map(|i| self.0.get(i).unwrap_or(&0) + o.0.get(i).unwrap_or(&0)).collect())
    }
}

/// Coefficients indexed by basis term and parameter monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamLieElement<C> {
    terms: BTreeMap<(BasisTerm, ParamMonomial), C>,
}

impl<C: Coeff> ParamLieElement<C> {
    pub fn zero() -> Self {
        ParamLieElement { terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, t: BasisTerm, m: ParamMonomial, c: C) {
        if c.is_zero() {
            return;
        }
        let key = (t, m);
        let s = match self.terms.remove(&key) {
            Some(old) => old + c,
            None => c,
        };
        if !s.is_zero() {
            self.terms.insert(key, s);
        }
    }

    pub fn get(&self, t: &BasisTerm, m: &ParamMonomial) -> C {
        self.terms.get(&(*t, m.clone())).cloned().unwrap_or_else(C::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(BasisTerm, ParamMonomial), &C)> {
        self.terms.iter()
    }

    /// Coefficients at `μ = 0`.
    pub fn at_origin(&self) -> LieElement<C> {
        let mut out = LieElement::zero();
        for ((t, m), c) in &self.terms {
            if m.order() == 0 {
                out.add_term(*t, c.clone());
            }
        }
        out
    }

    /// Bracket in the state variables; parameter monomials multiply.
    pub fn bracket(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for ((a, ma), ca) in &self.terms {
            for ((b, mb), cb) in &o.terms {
                let e = LieElement::term(*a, ca.clone()).bracket(&LieElement::term(*b, cb.clone()));
                for (t, c) in e.iter() {
                    out.add_term(*t, ma.mul(mb), c.clone());
                }
            }
        }
        out
    }
}

/// Weighted grade plus `(p+q+3)|m|`.
pub fn param_grade(t: &BasisTerm, m: &ParamMonomial, p: u32, q: u32) -> i64 {
    GradingSpec::Weighted { p }.grade(t) + (p as i64 + q as i64 + 3) * m.order() as i64
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexSets {
    pub n_list: Vec<i64>,
    pub m_list: Vec<i64>,
    pub r: usize,
    pub s: usize,
    pub n: i64,
    pub p: u32,
    pub q: u32,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParamError {
    #[error("invalid index-set request: need N >= p >= 1 and q >= 1 (N={n}, p={p}, q={q})")]
    InvalidN { n: i64, p: u32, q: u32 },
    #[error("matrix has {got} columns, expected r+s = {want}")]
    Dimension { got: usize, want: usize },
}

fn excluded_n(n: i64, p: i64) -> bool {
    n > p && (n - (p - 1)).rem_euclid(2 * (p + 1)) == 0
}

fn excluded_m(m: i64, p: i64, q: i64) -> bool {
    let md = 2 * (p + 1);
    (m + 1).rem_euclid(md) == 0 || (m - p - q).rem_euclid(md) == 0
}

/// Enumerates the admissible `n_j` and `m_k`.
pub fn index_sets(n: i64, p: u32, q: u32) -> Result<IndexSets, ParamError> {
    if p < 1 || q < 1 || n < p as i64 {
        return Err(ParamError::InvalidN { n, p, q });
    }
    let (pi, qi) = (p as i64, q as i64);
    let n_list: Vec<i64> = (-1..n).filter(|&j| !excluded_n(j, pi)).collect();
    let m_list: Vec<i64> = (1..=n).filter(|&j| !excluded_m(j, pi, qi)).collect();
    Ok(IndexSets { r: n_list.len(), s: m_list.len(), n_list, m_list, n, p, q })
}

/// Closed-form count `k(2p+1) + l + 2` with `k = ⌊N/(2(p+1))⌋`, `l = N - 2k(p+1)`.
/// It agrees with the enumeration only for some `(N, p)`; see
/// [`r_count`] for the exact count.
pub fn r_formula(n: i64, p: u32) -> i64 {
    let p = p as i64;
    let k = n.div_euclid(2 * (p + 1));
    let l = n - 2 * k * (p + 1);
    k * (2 * p + 1) + l + 2
}

/// Number of admissible `n_j`: `N + 1 - ⌊(N-p)/(2(p+1))⌋`.
pub fn r_count(n: i64, p: u32) -> i64 {
    let p = p as i64;
    n + 1 - (n - p).div_euclid(2 * (p + 1))
}

/// `rank(A) == r + s`. Exact for rational backends; float backends treat
/// pivots below `1e-10` of the largest entry as zero.
pub fn nondegeneracy_rank<C: Coeff>(a: &Matrix<C>, r: usize, s: usize) -> Result<bool, ParamError> {
    let cols = a.first().map_or(0, |row| row.len());
    if cols != r + s || a.iter().any(|row| row.len() != cols) {
        return Err(ParamError::Dimension { got: cols, want: r + s });
    }
    let rank = match C::BACKEND {
        Backend::Float => linalg::rank_with_tol(a, 1e-10),
        _ => linalg::rank(a),
    };
    Ok(rank == r + s)
}

/// Truncated infinite-level parametric normal form with placeholder
/// coefficients `α_k`, `β_l` and parameters `μ_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamTemplate {
    pub idx: IndexSets,
    /// `+1` or `-1`, the sign in front of `x^{p+1}`.
    pub sign: i8,
    /// `k` with a free `α_k F^k_k` term, `p < k <= N`.
    pub alpha: Vec<i64>,
    /// `l` with a free `β_l Θ^l_l` term, `q <= l <= N`.
    pub beta: Vec<i64>,
    pub text: String,
    pub integral: String,
}

fn xpow(e: i64) -> String {
    match e {
        0 => String::new(),
        1 => "x".into(),
        _ => format!("x^{e}"),
    }
}

fn term(c: &str, e: i64) -> String {
    let x = xpow(e);
    if x.is_empty() {
        c.to_string()
    } else {
        format!("{c}*{x}")
    }
}

pub fn emit_parametric_template(idx: &IndexSets, sign: i8) -> ParamTemplate {
    let (p, q) = (idx.p as i64, idx.q as i64);
    let sgn = if sign < 0 { "-" } else { "+" };
    let alpha: Vec<i64> = ((p + 1)..=idx.n).filter(|&k| !excluded_n(k, p)).collect();
    let beta: Vec<i64> = (q..=idx.n).filter(|&l| !excluded_m(l, p, q)).collect();

    let mut xdot = format!("rho^2 {sgn} {}", xpow(p + 1));
    let mut rdot = format!("{} {}*{}*rho", if sign < 0 { "+" } else { "-" }, frac(p + 1, 2), xpow(p));
    let mut tdot = "1".to_string();
    let mut integ = format!("(y^2+z^2)*( 1/2*(y^2+z^2) {sgn} {}", xpow(p + 1));
    for (i, &nj) in idx.n_list.iter().enumerate() {
        let mu = format!("mu_{}", i + 1);
        let _ = write!(xdot, " + {}", term(&mu, nj + 1));
        if nj != -1 {
            let _ = write!(rdot, " - {}*{}*rho", frac(nj + 1, 2), term(&mu, nj));
        }
        let _ = write!(integ, " + {}", term(&mu, nj + 1));
    }
    for k in &alpha {
        let a = format!("alpha_{k}");
        let _ = write!(xdot, " + {}", term(&a, k + 1));
        let _ = write!(rdot, " - {}*{}*rho", frac(k + 1, 2), term(&a, *k));
        let _ = write!(integ, " + {}", term(&a, k + 1));
    }
    for (i, &mk) in idx.m_list.iter().enumerate() {
        let _ = write!(tdot, " + {}", term(&format!("mu_{}", idx.r + i + 1), mk));
    }
    for l in &beta {
        let _ = write!(tdot, " + {}", term(&format!("beta_{l}"), *l));
    }
    integ.push_str(" )");
    let text = format!("x'     = {xdot}\nrho'   = {rdot}\ntheta' = {tdot}\n");
    ParamTemplate { idx: idx.clone(), sign, alpha, beta, text, integral: integ }
}

fn frac(n: i64, d: i64) -> String {
    let g = num_integer::gcd(n, d);
    let (n, d) = (n / g, d / g);
    if d == 1 {
        n.to_string()
    } else {
        format!("({n}/{d})")
    }
}

impl ParamTemplate {
    /// Support of the template at `μ = 0`: the terms a conforming
    /// infinite-level normal form may carry.
    pub fn support_at_origin(&self) -> Vec<BasisTerm> {
        let p = self.idx.p as i32;
        let mut out = vec![BasisTerm::theta(0, 0), BasisTerm::f(-1, 0), BasisTerm::f(p, p)];
        out.extend(self.alpha.iter().map(|&k| BasisTerm::f(k as i32, k as i32)));
        out.extend(self.beta.iter().map(|&l| BasisTerm::theta(l as i32, l as i32)));
        out.sort();
        out
    }

    /// Instantiates the template with `Θ^0_0` restored. Missing coefficients
    /// are zero; coefficients outside the admissible indices are ignored.
    pub fn instantiate<C: Coeff>(
        &self,
        alpha: &BTreeMap<i64, C>,
        beta: &BTreeMap<i64, C>,
        mu: &[C],
    ) -> (ParamLieElement<C>, FirstIntegral<C>) {
        let p = self.idx.p as i32;
        let nparams = self.idx.r + self.idx.s;
        let unit = |i: usize| {
            let mut e = vec![0; nparams];
            e[i] = 1;
            ParamMonomial(e)
        };
        let origin = ParamMonomial(vec![0; nparams]);
        let sign = if self.sign < 0 { C::from_i64(-1) } else { C::one() };
        let mut w = ParamLieElement::zero();
        w.add_term(BasisTerm::theta(0, 0), origin.clone(), C::one());
        w.add_term(BasisTerm::f(-1, 0), origin.clone(), C::ratio(1, 2));
        w.add_term(BasisTerm::f(p, p), origin.clone(), sign.clone());
        for &k in &self.alpha {
            if let Some(c) = alpha.get(&k) {
                w.add_term(BasisTerm::f(k as i32, k as i32), origin.clone(), c.clone());
            }
        }
        for &l in &self.beta {
            if let Some(c) = beta.get(&l) {
                w.add_term(BasisTerm::theta(l as i32, l as i32), origin.clone(), c.clone());
            }
        }
        for (i, &nj) in self.idx.n_list.iter().enumerate() {
            w.add_term(BasisTerm::f(nj as i32, nj as i32), unit(i), C::one());
        }
        for (i, &mk) in self.idx.m_list.iter().enumerate() {
            w.add_term(BasisTerm::theta(mk as i32, mk as i32), unit(self.idx.r + i), C::one());
        }
        let mut f = FirstIntegral::zero();
        f.add_term(0, 2, C::ratio(1, 2));
        f.add_term((p + 1) as u32, 1, sign);
        for &k in &self.alpha {
            if let Some(c) = alpha.get(&k) {
                f.add_term((k + 1) as u32, 1, c.clone());
            }
        }
        for (nj, m) in self.idx.n_list.iter().zip(mu) {
            f.add_term((nj + 1) as u32, 1, m.clone());
        }
        (w, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::{qi, Q};
    use crate::integral::first_integral_closed;

    #[test]
    fn grades() {
        let m1 = ParamMonomial(vec![1]);
        assert_eq!(param_grade(&BasisTerm::f(-1, 0), &m1, 1, 1), 6);
        assert_eq!(param_grade(&BasisTerm::theta(1, 1), &ParamMonomial(vec![1, 1]), 1, 2), 15);
        assert_eq!(param_grade(&BasisTerm::f(2, 3), &ParamMonomial::default(), 2, 1), 5);
    }

    #[test]
    fn index_sets_small() {
        let idx = index_sets(4, 1, 1).unwrap();
        assert_eq!(idx.n_list, vec![-1, 0, 1, 2, 3]);
        assert_eq!(idx.r, 5);
        assert_eq!(r_formula(4, 1), 5);
        assert_eq!(&idx.n_list[..3], &[-1, 0, 1]);
        assert_eq!(idx.m_list[0], 1);
        let idx = index_sets(8, 1, 1).unwrap();
        assert_eq!(idx.m_list, vec![1, 4, 5, 8]);
        assert!(index_sets(0, 1, 1).is_err());
    }

    #[test]
    fn r_count_matches_enumeration() {
        for p in 1..=3 {
            for q in 1..=3 {
                for n in p as i64..=30 {
                    assert_eq!(index_sets(n, p, q).unwrap().r as i64, r_count(n, p));
                }
            }
        }
        // the closed form overcounts once N reaches p+1 past a multiple of 2(p+1)
        assert_ne!(r_formula(5, 1), r_count(5, 1));
    }

    #[test]
    fn rank_test() {
        let id: Matrix<Q> = vec![vec![qi(1), qi(0)], vec![qi(0), qi(1)]];
        assert_eq!(nondegeneracy_rank(&id, 1, 1), Ok(true));
        let zc: Matrix<Q> = vec![vec![qi(1), qi(0)], vec![qi(3), qi(0)]];
        assert_eq!(nondegeneracy_rank(&zc, 1, 1), Ok(false));
        assert!(nondegeneracy_rank(&id, 2, 1).is_err());
    }

    #[test]
    fn template_at_origin() {
        let idx = index_sets(4, 1, 1).unwrap();
        let t = emit_parametric_template(&idx, -1);
        assert_eq!(t.idx.r, 5);
        for k in [0, 1, 2, 3, 4] {
            assert!(t.text.contains(&format!("mu_{}*", k + 1)) || k == 0);
        }
        let alpha: BTreeMap<i64, Q> = [(2, qi(3)), (3, qi(5))].into();
        let beta: BTreeMap<i64, Q> = [(1, qi(7))].into();
        let mu = vec![qi(0); idx.r];
        let (w, f) = t.instantiate(&alpha, &beta, &mu);
        let w0 = w.at_origin();
        assert_eq!(first_integral_closed(&w0).unwrap(), f);
        for (term, _) in w0.iter() {
            assert!(t.support_at_origin().contains(term));
        }
    }
}
