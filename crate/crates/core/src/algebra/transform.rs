//! Lie transforms and the linear state/time rescaling of the principal part.

use serde::{Deserialize, Serialize};

use super::basis::BasisTerm;
use super::grading::GradingSpec;
use super::lie::LieElement;
use super::scalar::Coeff;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TransformError {
    #[error("generator has a term of grade {0} < 1")]
    GeneratorGrade(i64),
}

/// `Σ_j ad_Y^j v / j!` with `ad_Y v = [Y, v]`, dropping everything above grade `n`.
///
/// `Y` may mix grades as long as every term has grade at least 1.
pub fn apply_exp_ad<C: Coeff>(
    y: &LieElement<C>,
    v: &LieElement<C>,
    n: i64,
    g: &GradingSpec,
) -> Result<LieElement<C>, TransformError> {
    if let Some(m) = y.min_grade(g) {
        if m < 1 {
            return Err(TransformError::GeneratorGrade(m));
        }
    } else {
        return Ok(v.truncate(g, n));
    }
    let mut res = v.truncate(g, n);
    let mut term = res.clone();
    let mut j = 1i64;
    loop {
        term = y.bracket_capped(&term, g, n).scale(&(C::one() / C::from_i64(j)));
        if term.is_zero() {
            break;
        }
        res = res.add(&term);
        j += 1;
    }
    Ok(res)
}

/// Substitution constants of `t = d·τ`, `x = c·X`: every term except `Θ^0_0`
/// picks up the factor `d·c^l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRecord<C> {
    pub p: u32,
    pub c: C,
    pub d: C,
}

impl<C: Coeff> ScalingRecord<C> {
    pub fn identity(p: u32) -> Self {
        ScalingRecord { p, c: C::one(), d: C::one() }
    }

    pub fn apply(&self, v: &LieElement<C>) -> LieElement<C> {
        let c_inv = C::one() / self.c.clone();
        LieElement::from_terms(v.iter().map(|(t, a)| {
            if *t == BasisTerm::theta(0, 0) {
                return (*t, a.clone());
            }
            let cl = if t.l >= 0 { self.c.pow(t.l as u32) } else { c_inv.pow((-t.l) as u32) };
            (*t, a.clone() * self.d.clone() * cl)
        }))
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RescaleError {
    #[error("coefficient of F^-1_0 is zero")]
    ZeroAlpha0,
    #[error("coefficient of F^{0}_{0} is zero")]
    ZeroAlphaP(u32),
    #[error("targets must be positive constants")]
    BadTarget,
    #[error("scaling factor is not representable in this backend (irrational root); use the float backend")]
    Irrational,
}

/// Rescales so that `F^{-1}_0` has coefficient `t0` and `F^p_p` has
/// coefficient `±tp`; the sign `sign(α_0 α_p)` cannot be changed.
pub fn canonical_rescale<C: Coeff>(
    v: &LieElement<C>,
    p: u32,
    t0: &C,
    tp: &C,
) -> Result<(LieElement<C>, ScalingRecord<C>), RescaleError> {
    let a0 = v.get(&BasisTerm::f(-1, 0));
    let ap = v.get(&BasisTerm::f(p as i32, p as i32));
    if a0.is_zero() {
        return Err(RescaleError::ZeroAlpha0);
    }
    if ap.is_zero() {
        return Err(RescaleError::ZeroAlphaP(p));
    }
    use std::cmp::Ordering::Greater;
    if t0.sign() != Some(Greater) || tp.sign() != Some(Greater) {
        return Err(RescaleError::BadTarget);
    }
    let ratio = (a0.clone() / ap).abs().ok_or(RescaleError::Irrational)?;
    let radicand = tp.clone() * ratio / t0.clone();
    let c = radicand.nth_root(p + 1).ok_or(RescaleError::Irrational)?;
    let d = t0.clone() * c.clone() / a0;
    let rec = ScalingRecord { p, c, d };
    Ok((rec.apply(v), rec))
}
