//! First-level normal form of Hopf-zero systems with linear part `z∂y - y∂z`.

use crate::algebra::{BasisTerm, Coeff, LieElement, Poly3, PolyField3};
use crate::linalg;

#[derive(Debug, thiserror::Error)]
pub enum ClassicalError {
    #[error("linear part is not (0, z, -y)")]
    WrongLinearPart,
    #[error("homological system is singular at degree {0}")]
    Singular(u32),
    #[error("not-in-L: classical normal form has a non-volume-preserving part")]
    NotInL(Box<dyn std::fmt::Debug + Send + Sync>),
}

/// Resonant (rotation-equivariant) field of degree `deg`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalNF<C> {
    pub field: PolyField3<C>,
    pub deg: u32,
}

pub fn rotation<C: Coeff>(deg: u32) -> PolyField3<C> {
    PolyField3::new([Poly3::zero(), Poly3::var(2), Poly3::var(1).scale(&C::from_i64(-1))], deg)
}

fn check_linear_part<C: Coeff>(sys: &PolyField3<C>) -> Result<(), ClassicalError> {
    let low = PolyField3::new(sys.comps.clone(), 1);
    if low != rotation(1) {
        return Err(ClassicalError::WrongLinearPart);
    }
    Ok(())
}

fn monos(d: u32) -> Vec<[u32; 3]> {
    let mut v = Vec::new();
    for i in 0..=d {
        for j in 0..=d - i {
            v.push([i, j, d - i - j]);
        }
    }
    v
}

fn xu<C: Coeff>(a: u32, b: u32) -> Poly3<C> {
    let u = Poly3::from_terms([([0, 2, 0], C::one()), ([0, 0, 2], C::one())]);
    u.pow(b).mul(&Poly3::monomial([a, 0, 0], C::one()))
}

/// Basis of rotation-equivariant fields of degree `d`:
/// `x^a u^b ∂x`, `x^a u^b (y∂y + z∂z)` and `x^a u^b (z∂y - y∂z)`.
fn resonant_basis<C: Coeff>(d: u32) -> Vec<[Poly3<C>; 3]> {
    let mut out = Vec::new();
    for b in 0..=d / 2 {
        out.push([xu(d - 2 * b, b), Poly3::zero(), Poly3::zero()]);
    }
    if d >= 1 {
        for b in 0..=(d - 1) / 2 {
            let m: Poly3<C> = xu(d - 1 - 2 * b, b);
            out.push([Poly3::zero(), m.mul(&Poly3::var(1)), m.mul(&Poly3::var(2))]);
            out.push([Poly3::zero(), m.mul(&Poly3::var(2)), m.mul(&Poly3::var(1)).scale(&C::from_i64(-1))]);
        }
    }
    out
}

fn factorial_weight(m: &[u32; 3]) -> i64 {
    m.iter().map(|&e| (1..=e as i64).product::<i64>()).product()
}

/// Degree-by-degree normalization. At each degree the generator is the
/// unique solution of `[h, R] + r = f_d` with `h` orthogonal (Fischer
/// product) to the resonant space, and `exp(ad_{-h})` is applied.
pub fn classical_normal_form<C: Coeff>(
    sys: &PolyField3<C>,
    deg: u32,
) -> Result<(ClassicalNF<C>, Vec<PolyField3<C>>), ClassicalError> {
    check_linear_part(sys)?;
    let rot = rotation::<C>(deg);
    let mut f = sys.with_deg(deg);
    let mut gens = Vec::new();
    for d in 2..=deg {
        let g = f.homogeneous(d);
        let ms = monos(d);
        let coords: Vec<(usize, [u32; 3])> = (0..3).flat_map(|c| ms.iter().map(move |m| (c, *m))).collect();
        let index = |c: usize, m: &[u32; 3]| coords.iter().position(|(cc, mm)| *cc == c && mm == m).expect("coord");
        let n = coords.len();
        let res = resonant_basis::<C>(d);
        let size = n + res.len();
        let mut a = linalg::zeros::<C>(size, size);
        for (col, (c, m)) in coords.iter().enumerate() {
            let mut e: [Poly3<C>; 3] = Default::default();
            e[*c] = Poly3::monomial(*m, C::one());
            let le = PolyField3::new(e, deg).bracket(&rot);
            for (cc, comp) in le.comps.iter().enumerate() {
                for (mm, v) in comp.iter() {
                    a[index(cc, mm)][col] = a[index(cc, mm)][col].clone() + v.clone();
                }
            }
        }
        for (j, r) in res.iter().enumerate() {
            for (cc, comp) in r.iter().enumerate() {
                for (mm, v) in comp.iter() {
                    a[index(cc, mm)][n + j] = v.clone();
                    a[n + j][index(cc, mm)] = v.mul_i64(factorial_weight(mm));
                }
            }
        }
        let mut rhs = vec![C::zero(); size];
        for (cc, comp) in g.comps.iter().enumerate() {
            for (mm, v) in comp.iter() {
                rhs[index(cc, mm)] = v.clone();
            }
        }
        let sol = linalg::solve(&a, &rhs).ok_or(ClassicalError::Singular(d))?;
        let mut h: [Poly3<C>; 3] = Default::default();
        for (i, (c, m)) in coords.iter().enumerate() {
            h[*c].add_term(*m, -sol[i].clone());
        }
        let h = PolyField3::new(h, deg);
        if h.is_zero() {
            continue;
        }
        f = f.exp_ad(&h);
        gens.push(h);
    }
    Ok((ClassicalNF { field: f, deg }, gens))
}

/// Applies a generator log to `sys`.
pub fn replay<C: Coeff>(sys: &PolyField3<C>, gens: &[PolyField3<C>], deg: u32) -> PolyField3<C> {
    gens.iter().fold(sys.with_deg(deg), |f, h| f.exp_ad(&h.with_deg(deg)))
}

/// `a^{-1}_0, a^1_1, a^0_1, a^2_2` read off the cubic classical normal form.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicCoeffs<C> {
    pub am1_0: C,
    pub a1_1: C,
    pub a0_1: C,
    pub a2_2: C,
}

struct Coefs<'a, C>(&'a PolyField3<C>);

impl<C: Coeff> Coefs<'_, C> {
    fn a(&self, i: u32, j: u32, k: u32) -> C {
        self.0.comps[0].get(&[i, j, k])
    }
    fn b(&self, i: u32, j: u32, k: u32) -> C {
        self.0.comps[1].get(&[i, j, k])
    }
    fn c(&self, i: u32, j: u32, k: u32) -> C {
        self.0.comps[2].get(&[i, j, k])
    }
}

fn h<C: Coeff>(n: i64, d: i64) -> C {
    C::ratio(n, d)
}

/// Closed-form cubic coefficients in terms of the raw system's monomials.
pub fn cubic_nf_coefficients<C: Coeff>(sys: &PolyField3<C>) -> CubicCoeffs<C> {
    let s = Coefs(sys);
    let am1_0 = h::<C>(1, 2) * (s.a(0, 2, 0) + s.a(2, 0, 0));
    let a1_1 = h::<C>(1, 2) * (s.b(0, 1, 1) + s.c(1, 0, 1));
    let two = C::from_i64(2);
    let a0_1 = h::<C>(1, 32)
        * (s.b(0, 2, 0)
            + two.clone() * s.b(2, 1, 0)
            + two.clone() * s.c(2, 0, 0)
            + two.clone() * s.c(0, 2, 0)
            + s.c(0, 1, 1) * (s.a(2, 0, 0) - s.a(0, 2, 0))
            + s.a(1, 1, 0) * (s.b(0, 1, 1) - s.c(1, 0, 1)))
        + h::<C>(1, 16) * s.c(2, 0, 0) * (s.c(1, 1, 0) - two.clone() * s.b(2, 0, 0))
        + h::<C>(1, 32) * s.b(1, 0, 1) * (s.a(2, 0, 0) - s.a(0, 2, 0))
        - h::<C>(1, 16) * s.b(2, 0, 0) * (s.b(1, 1, 0) + two.clone() * s.b(0, 2, 0));
    let a2_2 = h::<C>(1, 2)
        * (s.c(1, 0, 2)
            + s.b(0, 1, 2)
            + s.c(0, 0, 2) * (s.c(1, 1, 0) - two.clone() * s.a(0, 1, 1) + two.clone() * s.b(0, 2, 0))
            + s.b(0, 0, 2) * (two.clone() * s.a(1, 0, 1) - two * s.c(2, 0, 0) - s.b(1, 1, 0)));
    CubicCoeffs { am1_0, a1_1, a0_1, a2_2 }
}

/// The three polynomial relations on the raw coefficients that are
/// necessary for the cubic classical normal form to be volume preserving.
pub fn membership_conditions<C: Coeff>(sys: &PolyField3<C>) -> [C; 3] {
    let s = Coefs(sys);
    let n = |k: i64| C::from_i64(k);
    let r1 = s.a(0, 0, 2) + s.b(0, 1, 1) + s.c(1, 0, 1);
    let r2 = n(2) * s.a(0, 0, 3) + n(3) * s.b(0, 1, 2) + n(3) * s.c(1, 0, 2)
        - s.b(0, 0, 2) * (n(3) * s.b(1, 1, 0) - n(4) * s.a(1, 0, 1) + n(6) * s.c(2, 0, 0))
        - s.c(0, 0, 2) * (n(4) * s.a(0, 1, 1) - n(6) * s.b(0, 2, 0) - n(3) * s.c(1, 1, 0));
    let r3 = s.b(0, 2, 0) + n(16) * s.a(0, 2, 1) + n(2) * s.b(2, 1, 0) + n(2) * s.c(2, 0, 0) + n(2) * s.c(0, 2, 0)
        + n(8) * s.a(1, 0, 2)
        - n(16) * s.b(0, 2, 0) * s.a(1, 0, 1)
        + n(16) * s.c(0, 2, 0) * s.a(0, 1, 1)
        - n(7) * s.c(0, 1, 1) * (s.a(2, 0, 0) - s.a(0, 2, 0))
        - n(16) * s.a(1, 1, 0) * (s.c(1, 0, 1) + n(7) * s.b(0, 1, 1))
        - s.b(1, 0, 1) * (n(7) * s.a(2, 0, 0) - n(15) * s.a(0, 2, 0))
        - n(2) * s.b(2, 0, 0) * (s.b(1, 1, 0) + n(2) * s.c(2, 0, 0) + n(2) * s.b(0, 2, 0) + n(8) * s.a(1, 0, 1))
        + n(2) * s.c(2, 0, 0) * (s.c(1, 1, 0) + n(8) * s.a(1, 1, 0) + n(8) * s.a(0, 1, 1));
    [r1, r2, r3]
}

/// Writes a rotation-invariant polynomial as `Σ c_ab x^a u^b`.
fn to_xu<C: Coeff>(p: &Poly3<C>, scale: f64) -> Option<Vec<((u32, u32), C)>> {
    let mut rest = p.clone();
    let mut out = Vec::new();
    loop {
        let rest_pruned = Poly3::from_terms(rest.iter().filter(|(_, c)| !c.negligible(scale)).map(|(m, c)| (*m, c.clone())));
        rest = rest_pruned;
        let Some((m, c)) = rest.iter().max_by_key(|(m, _)| (m[1] + m[2], m[1])).map(|(m, c)| (*m, c.clone())) else {
            return Some(out);
        };
        if m[2] != 0 || m[1] % 2 != 0 {
            return None;
        }
        let (a, b) = (m[0], m[1] / 2);
        rest = rest.sub(&xu::<C>(a, b).scale(&c));
        out.push(((a, b), c));
    }
}

/// Exact change of basis from resonant monomial fields to `F`/`Θ` terms.
///
/// Each resonant pair `x^{l+1}u^m ∂x`, `x^l u^m (y∂y+z∂z)` splits into
/// `F^l_{l+m}` plus a multiple of `x^l u^m (2x∂x + y∂y + z∂z)`; the
/// latter has nonzero divergence and must vanish.
pub fn to_lie_element<C: Coeff>(nf: &ClassicalNF<C>) -> Result<LieElement<C>, ClassicalError> {
    let (v, residual) = decompose(nf)?;
    if !residual.is_empty() {
        let desc: Vec<String> = residual.iter().map(|r| r.to_string()).collect();
        return Err(ClassicalError::NotInL(Box::new(desc)));
    }
    Ok(v)
}

/// Multiple of `x^l u^m (2x∂x + y∂y + z∂z)` left over by [`decompose`].
#[derive(Clone, Debug, PartialEq)]
pub struct EulerResidual<C> {
    pub l: u32,
    pub m: u32,
    pub coeff: C,
}

impl<C: Coeff> std::fmt::Display for EulerResidual<C> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}) x^{} u^{} (2x∂x+y∂y+z∂z)", self.coeff, self.l, self.m)
    }
}

/// Splits a resonant field into its `F`/`Θ` part and the divergent remainder.
pub fn decompose<C: Coeff>(nf: &ClassicalNF<C>) -> Result<(LieElement<C>, Vec<EulerResidual<C>>), ClassicalError> {
    let f = &nf.field;
    let scale = f.comps.iter().flat_map(|p| p.iter().map(|(_, c)| c.magnitude())).fold(1.0, f64::max);
    let y = Poly3::<C>::var(1);
    let z = Poly3::<C>::var(2);
    let num_q = y.mul(&f.comps[1]).add(&z.mul(&f.comps[2]));
    let num_s = z.mul(&f.comps[1]).sub(&y.mul(&f.comps[2]));
    let not_in_l = |what: &str| ClassicalError::NotInL(Box::new(format!("{what} is not rotation-equivariant")));
    let p = to_xu(&f.comps[0], scale).ok_or_else(|| not_in_l("x-component"))?;
    let q = to_xu(&num_q, scale).ok_or_else(|| not_in_l("radial part"))?;
    let s = to_xu(&num_s, scale).ok_or_else(|| not_in_l("angular part"))?;
    let mut v = LieElement::zero();
    for ((a, b), c) in s {
        // num_s carries one extra factor u
        if b == 0 {
            return Err(not_in_l("angular part"));
        }
        v.add_term(BasisTerm::theta(a as i32, (a + b - 1) as i32), c);
    }
    let mut pmap: std::collections::BTreeMap<(u32, u32), C> = p.into_iter().collect();
    let mut residual = Vec::new();
    for ((l, m1), qc) in q {
        if m1 == 0 {
            return Err(not_in_l("radial part"));
        }
        let m = m1 - 1;
        let pc = pmap.remove(&(l + 1, m)).unwrap_or_else(C::zero);
        let a = (pc - qc.mul_i64(2)) / C::from_i64((l + m + 2) as i64);
        let e = qc + a.clone() * C::ratio(l as i64 + 1, 2);
        v.add_term(BasisTerm::f(l as i32, (l + m) as i32), a);
        if !e.negligible(scale) {
            residual.push(EulerResidual { l, m, coeff: e });
        }
    }
    for ((a0, b), pc) in pmap {
        if a0 == 0 {
            if b == 0 {
                return Err(not_in_l("constant x-component"));
            }
            v.add_term(BasisTerm::f(-1, b as i32 - 1), pc / C::from_i64(b as i64 + 1));
        } else {
            let (l, m) = (a0 - 1, b);
            let a = pc / C::from_i64((l + m + 2) as i64);
            let e = a.clone() * C::ratio(l as i64 + 1, 2);
            v.add_term(BasisTerm::f(l as i32, (l + m) as i32), a);
            residual.push(EulerResidual { l, m, coeff: e });
        }
    }
    Ok((v, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::{qi, Q};

    #[test]
    fn resonant_input_is_unchanged() {
        let v = LieElement::<Q>::from_terms([
            (BasisTerm::theta(0, 0), qi(1)),
            (BasisTerm::f(-1, 0), qi(2)),
            (BasisTerm::f(0, 1), qi(-3)),
            (BasisTerm::theta(1, 1), qi(5)),
        ]);
        let f = v.expand(Some(3));
        let (nf, gens) = classical_normal_form(&f, 3).unwrap();
        assert_eq!(nf.field, f);
        assert!(gens.is_empty());
        assert_eq!(to_lie_element(&nf).unwrap(), v);
    }

    #[test]
    fn euler_field_is_not_in_l() {
        let f = PolyField3::new(
            [Poly3::<Q>::monomial([2, 0, 0], qi(2)), Poly3::monomial([1, 1, 0], qi(1)), Poly3::monomial([1, 0, 1], qi(1))],
            3,
        );
        let nf = ClassicalNF { field: f.clone(), deg: 3 };
        assert!(matches!(to_lie_element(&nf), Err(ClassicalError::NotInL(_))));
        assert!(!f.divergence().is_zero());
    }

    #[test]
    fn zero_field_gives_zero() {
        let nf = ClassicalNF { field: PolyField3::<Q>::zero(3), deg: 3 };
        assert!(to_lie_element(&nf).unwrap().is_zero());
        let [r1, r2, r3] = membership_conditions(&rotation::<Q>(3));
        assert!(r1.is_zero() && r2.is_zero() && r3.is_zero());
    }

    #[test]
    fn first_relation_unit() {
        let mut f = rotation::<Q>(3);
        f.comps[0].add_term([0, 0, 2], qi(1));
        assert_eq!(membership_conditions(&f)[0], qi(1));
    }

    #[test]
    fn rejects_wrong_linear_part() {
        let f = PolyField3::new([Poly3::<Q>::var(0), Poly3::var(2), Poly3::var(1).scale(&qi(-1))], 3);
        assert!(matches!(classical_normal_form(&f, 3), Err(ClassicalError::WrongLinearPart)));
    }
}
