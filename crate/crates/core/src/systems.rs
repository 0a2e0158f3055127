//! The modified Rössler and generalized Kuramoto–Sivashinsky case studies.

use crate::algebra::{BasisTerm, Coeff, LieElement, Poly3, PolyField3};
use crate::classical::rotation;
use crate::linalg;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SystemError {
    #[error("parameter a = {0} outside the domain a^2 < 2")]
    OutOfDomain(String),
    #[error("sqrt(2 - a^2) is irrational at a = {0}; use the float backend")]
    Irrational(String),
    #[error("closed form undefined at a = {0}")]
    Singular(String),
    #[error("unknown example '{0}'")]
    Unknown(String),
}

fn n<C: Coeff>(k: i64) -> C {
    C::from_i64(k)
}

fn poly_eval<C: Coeff>(a: &C, coeffs_high_to_low: &[i64]) -> C {
    coeffs_high_to_low.iter().fold(C::zero(), |acc, &c| acc * a.clone() + n(c))
}

/// `sqrt(2 - a^2)`, with domain check.
pub fn rossler_s<C: Coeff>(a: &C) -> Result<C, SystemError> {
    let rad = n::<C>(2) - a.clone() * a.clone();
    if rad.sign() != Some(std::cmp::Ordering::Greater) {
        return Err(SystemError::OutOfDomain(a.to_string()));
    }
    rad.nth_root(2).ok_or_else(|| SystemError::Irrational(a.to_string()))
}

/// `(r, e)` of the Rössler family.
pub fn rossler_re<C: Coeff>(a: &C) -> (C, C) {
    let a2 = a.clone() * a.clone();
    let r = poly_eval(a, &[510, 0, -891, -170, -1316, 510, 1058, -340])
        / (n::<C>(15) * (a2.clone() - n(2)) * poly_eval(a, &[15, 0, -2, 0, -96]));
    let e = n::<C>(-2) * a2.clone() * a.clone() + C::ratio(15, 17) * r.clone() * a2 + C::ratio(5, 17) * a.clone()
        - C::ratio(13, 17) * r.clone();
    (r, e)
}

fn inverse3<C: Coeff>(p: &[[C; 3]; 3]) -> [[C; 3]; 3] {
    let mut m: linalg::Matrix<C> = (0..3)
        .map(|i| {
            let mut row: Vec<C> = p[i].to_vec();
            row.extend((0..3).map(|j| if i == j { C::one() } else { C::zero() }));
            row
        })
        .collect();
    linalg::rref(&mut m);
    std::array::from_fn(|i| std::array::from_fn(|j| m[i][3 + j].clone()))
}

/// Modified Rössler system `x' = -y - z + d y^2`, `y' = x + a y + e z^3`,
/// `z' = x - a z + x z + r z^3` with `d = a^2 - 1`, brought to linear part
/// `(0, z, -y)` by `old = P·new` and the time scaling `t = τ/s`,
/// `s = sqrt(2 - a^2)`.
pub fn rossler<C: Coeff>(a: &C) -> Result<PolyField3<C>, SystemError> {
    let s = rossler_s(a)?;
    let d = a.clone() * a.clone() - n(1);
    let (r, e) = rossler_re(a);
    let zero = C::zero;
    let p = [
        [-a.clone(), zero(), n(2)],
        [n(1), s.clone(), -a.clone()],
        [n(-1), s.clone(), a.clone()],
    ];
    let pinv = inverse3(&p);
    let (x, y, z) = (Poly3::<C>::var(0), Poly3::<C>::var(1), Poly3::<C>::var(2));
    let nl = PolyField3::new(
        [
            y.pow(2).scale(&d),
            z.pow(3).scale(&e),
            x.mul(&z).add(&z.pow(3).scale(&r)),
        ],
        3,
    );
    let conj = nl.linear_conjugate(&p, &pinv).scale(&(C::one() / s));
    Ok(rotation::<C>(3).add(&conj))
}

/// Real form of the traveling-wave reduction with `b = 3a`,
/// `c = 7/975 (31 + 859a - 906a^2)`, `d = -11c/7 + 10a - 10a^2`.
pub fn ks<C: Coeff>(a: &C) -> PolyField3<C> {
    let (b, c, d) = ks_constants(a);
    let (x, y, z) = (Poly3::<C>::var(0), Poly3::<C>::var(1), Poly3::<C>::var(2));
    let u = y.pow(2).add(&z.pow(2));
    let yz = y.mul(&z);
    let ypz = y.add(&z);
    let cubes = z.pow(3).add(&y.pow(3));
    let half = C::ratio(1, 2);
    let fx = u
        .scale(&(b.clone() - a.clone() - n(2)))
        .add(&yz.scale(&(n::<C>(2) * (b.clone() + a.clone() - n(2)))))
        .sub(&x.mul(&ypz).scale(&n(4)))
        .sub(&x.pow(2).scale(&n(2)))
        .add(&cubes.scale(&(c.clone() - d.clone())))
        .sub(&yz.mul(&ypz).scale(&(c.clone() + n::<C>(3) * d.clone())))
        .sub(
            &x.mul(&u.scale(&n(2)).add(&yz.scale(&n(4))).add(&x.mul(&ypz)))
                .scale(&d),
        );
    let q = u
        .scale(&(half.clone() * (a.clone() - b.clone() + n(2))))
        .add(&yz.scale(&(n::<C>(2) - b - a.clone())))
        .add(&x.mul(&ypz).scale(&n(2)))
        .add(&x.pow(2))
        .add(&cubes.scale(&(half.clone() * (d.clone() - c.clone()))))
        .add(&yz.mul(&ypz).scale(&(half.clone() * (c + n::<C>(3) * d.clone()))))
        .add(&x.mul(&u.add(&yz.scale(&n(2))).add(&x.mul(&ypz).scale(&half))).scale(&d));
    PolyField3::new([fx, z.add(&q), y.scale(&n(-1)).add(&q)], 3)
}

pub fn ks_constants<C: Coeff>(a: &C) -> (C, C, C) {
    let b = n::<C>(3) * a.clone();
    let c = C::ratio(7, 975) * poly_eval(a, &[-906, 859, 31]);
    let d = C::ratio(-11, 7) * c.clone() + n::<C>(10) * a.clone() - n::<C>(10) * a.clone() * a.clone();
    (b, c, d)
}

/// Closed-form cubic classical normal form of the Rössler family.
pub fn rossler_cubic_nf_golden<C: Coeff>(a: &C) -> Result<LieElement<C>, SystemError> {
    let s = rossler_s(a)?;
    let s3 = s.clone() * s.clone() * s.clone();
    let a2 = a.clone() * a.clone();
    let q = poly_eval(a, &[15, 0, -2, 0, -96]);
    let am2sq = (a2.clone() - n(2)) * (a2.clone() - n(2));
    let am10 = -a.clone() / s.clone();
    let a11 = a.clone() / (n::<C>(2) * s.clone());
    let a22 = poly_eval(a, &[15, 0, -24, -5, -39, 15, 17, -10]) / (C::ratio(5, 2) * s3.clone() * q.clone());
    let a01 = poly_eval(a, &[15, 0, 577, 60, -1788, -420, 504, 840, 240, -480]) / (n::<C>(40) * q.clone() * s3);
    let b01 = poly_eval(a, &[4185, 0, -7671, -1020, -12331, 3060, 19938, -2040, -15840])
        / (n::<C>(-240) * am2sq.clone() * q.clone());
    let b22 = poly_eval(a, &[17235, 0, -28066, -2720, -72356, 8160, 96888, -5440, -32640])
        / (n::<C>(-320) * am2sq * q);
    let b11 = (n::<C>(3) * a2.clone() - n(1)) / (n::<C>(4) * a2 - n(2));
    Ok(LieElement::from_terms([
        (BasisTerm::theta(0, 0), n(1)),
        (BasisTerm::f(-1, 0), am10),
        (BasisTerm::f(1, 1), a11),
        (BasisTerm::f(0, 1), a01),
        (BasisTerm::f(2, 2), a22),
        (BasisTerm::theta(0, 1), b01),
        (BasisTerm::theta(1, 1), b11),
        (BasisTerm::theta(2, 2), b22),
    ]))
}

/// Numerator of the closed-form `a^0_1` coefficient of the Rössler family.
pub const ROSSLER_A01_NUMERATOR: [i64; 10] = [15, 0, 577, 60, -1788, -420, 504, 840, 240, -480];

/// Closed-form cubic classical normal form of the KS family.
pub fn ks_cubic_nf_golden<C: Coeff>(a: &C) -> LieElement<C> {
    LieElement::from_terms([
        (BasisTerm::theta(0, 0), n(1)),
        (BasisTerm::f(-1, 0), a.clone() - n(2)),
        (BasisTerm::f(0, 1), poly_eval(a, &[176, 161, -1]) / n(1300)),
        (BasisTerm::f(1, 1), n::<C>(1) - a.clone()),
        (BasisTerm::f(2, 2), poly_eval(a, &[1162, -1068, -62]) / n(325)),
        (
            BasisTerm::theta(0, 1),
            -(C::ratio(1013, 3900) * a.clone() * a.clone() - C::ratio(5737, 62400) * a.clone() - C::ratio(14333, 62400)),
        ),
        (BasisTerm::theta(1, 1), C::ratio(1, 2) * a.clone()),
        (BasisTerm::theta(2, 2), poly_eval(a, &[1901, -4689, 2399]) / n(1300)),
    ])
}

/// Closed-form quartic infinite-level normal form of the KS family.
pub fn ks_infinite<C: Coeff>(a: &C) -> Result<LieElement<C>, SystemError> {
    let am1 = a.clone() - n(1);
    let am2 = a.clone() - n(2);
    if am1.is_zero() || am2.is_zero() {
        return Err(SystemError::Singular(a.to_string()));
    }
    let prod = am2.clone() * am1.clone();
    let root = prod.abs().and_then(|p| p.nth_root(2)).ok_or_else(|| SystemError::Irrational(a.to_string()))?;
    let sqrt2 = n::<C>(2).nth_root(2).ok_or_else(|| SystemError::Irrational("sqrt(2)".into()))?;
    // v_+ on (1, 2), where (a-2)(a-1) < 0
    let pm: C = if prod.sign() == Some(std::cmp::Ordering::Less) { n(1) } else { n(-1) };
    let t2 = pm.clone() * sqrt2.clone() * poly_eval(a, &[15384, -67767, 94215, -38384])
        / (n::<C>(-20800) * am1.clone() * root.clone());
    let f2 = -(sqrt2 * am2 * poly_eval(a, &[581, -534, -31])) / (n::<C>(325) * am1.clone() * root);
    let f3 = poly_eval(a, &[176, 161, -1]) * poly_eval(a, &[581, -534, -31]) / (n::<C>(1690000) * am1.clone() * am1.clone());
    Ok(LieElement::from_terms([
        (BasisTerm::theta(0, 0), n(1)),
        (BasisTerm::f(-1, 0), C::ratio(1, 2)),
        (BasisTerm::f(1, 1), pm.clone()),
        (BasisTerm::theta(1, 1), pm * a.clone() / (n::<C>(2) * (n::<C>(1) - a.clone()))),
        (BasisTerm::theta(2, 2), t2),
        (BasisTerm::f(2, 2), f2),
        (BasisTerm::f(3, 3), f3),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::{qi, Q};
    use crate::classical::membership_conditions;

    #[test]
    fn rossler_linear_part_and_domain() {
        let f = rossler(&qi(1)).unwrap();
        assert_eq!(PolyField3::new(f.comps.clone(), 1), rotation(1));
        assert!(matches!(rossler(&qi(2)), Err(SystemError::OutOfDomain(_))));
        assert!(matches!(rossler(&Q::new(1.into(), 2.into())), Err(SystemError::Irrational(_))));
    }

    #[test]
    fn rossler_quadratic_part_is_not_volume_preserving() {
        // the cubic classical normal form keeps an Euler residual, so the
        // builder cannot be fed to the hypernormal engine directly
        let f = rossler(&qi(1)).unwrap();
        assert!(!membership_conditions(&f)[0].is_zero());
    }

    #[test]
    fn golden_fixture_at_one() {
        let g = rossler_cubic_nf_golden::<Q>(&qi(1)).unwrap();
        assert_eq!(g.get(&BasisTerm::theta(0, 0)), qi(1));
        assert_eq!(g.get(&BasisTerm::f(-1, 0)), qi(-1));
    }

    #[test]
    fn ks_linear_part() {
        let f = ks(&qi(0));
        assert_eq!(PolyField3::new(f.comps.clone(), 1), rotation(1));
    }

    #[test]
    fn ks_infinite_rejects_singular_points() {
        assert!(ks_infinite::<Q>(&qi(1)).is_err());
        assert!(ks_infinite::<Q>(&qi(2)).is_err());
    }
}
