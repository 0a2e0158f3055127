//! High-grade second-level normalization of the `F`-part and ratio-test
//! radius estimates.
//!
//! The `F`-terms form a subalgebra and `Θ`-terms never feed back into it, so
//! the diagonal sequence `α_k` of the second level depends on the `F`-part
//! alone. The engine below stores it densely by grade and works on raw MPFR
//! floats with reused temporaries.

use std::cmp::Ordering;

use rayon::prelude::*;
use rug::{Assign, Float};
use serde::{Deserialize, Serialize};

use crate::algebra::bigfloat::{digits_to_bits, BigFloat};
use crate::algebra::{Kind, LieElement};
use crate::systems::{self, ROSSLER_A01_NUMERATOR};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RadiusError {
    #[error("coefficient of F^-1_0 is zero")]
    ZeroAlpha0,
    #[error("precision-insufficient: relative disagreement {rel:e} at k={k}")]
    Precision { k: usize, rel: f64 },
    #[error("too-few-terms: {0} nonzero coefficients")]
    TooFew(usize),
    #[error("sparse-tail: three consecutive zero coefficients ending at k={0}")]
    SparseTail(usize),
    #[error("{0}")]
    System(String),
}

/// `F`-part by grade: `rows[k][l+1]` is the coefficient of `F^l_k`.
struct Dense {
    rows: Vec<Vec<Float>>,
}

impl Dense {
    fn zero(g: usize, bits: u32) -> Self {
        Dense { rows: (0..=g).map(|k| vec![Float::new(bits); k + 2]).collect() }
    }

    fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(|c| c.is_zero()))
    }
}

/// `acc += scale · [Y, src]` truncated at grade `g`, where `y[l]` is the
/// coefficient of `F^l_s`, `l = 0..=s`.
fn bracket_into(acc: &mut Dense, y: &[Float], s: usize, src: &Dense, g: usize, tmp: &mut Float) {
    for (n, row) in src.rows.iter().enumerate() {
        if n + s > g {
            break;
        }
        let out = &mut acc.rows[n + s];
        for (mi, t) in row.iter().enumerate() {
            if t.is_zero() {
                continue;
            }
            let m = mi as i64 - 1;
            for (l, yl) in y.iter().enumerate() {
                if yl.is_zero() {
                    continue;
                }
                let l = l as i64;
                // [F^l_s, F^m_n] = ((m+1)(s+2) - (l+1)(n+2)) F^{l+m}_{s+n}
                let c = (m + 1) * (s as i64 + 2) - (l + 1) * (n as i64 + 2);
                if c == 0 {
                    continue;
                }
                tmp.assign(yl * t);
                *tmp *= c;
                out[(l + m + 1) as usize] += &*tmp;
            }
        }
    }
}

/// Second-level `F`-normalization to grade `g` at `bits` of precision.
/// Returns `α_1..=α_g` (index 0 holds `α_0 = a^{-1}_0`).
fn diag_dense(f: &[Vec<Float>], g: usize, bits: u32) -> Vec<Float> {
    let mut v = Dense::zero(g, bits);
    for (k, row) in f.iter().enumerate().take(g + 1) {
        for (i, c) in row.iter().enumerate() {
            v.rows[k][i].assign(c);
        }
    }
    let a0 = v.rows[0][0].clone();
    let mut tmp = Float::new(bits);
    for k in 1..=g {
        // [F^l_k, a0 F^{-1}_0] = -2(l+1) a0 F^{l-1}_k kills F^{l-1}_k
        let y: Vec<Float> = (0..=k)
            .map(|l| {
                let mut c = Float::with_val(bits, &v.rows[k][l]);
                c /= &a0;
                c /= 2 * (l as i64 + 1);
                c
            })
            .collect();
        if y.iter().all(|c| c.is_zero()) {
            continue;
        }
        let mut term = Dense { rows: v.rows.clone() };
        let mut j = 1i64;
        loop {
            let mut next = Dense::zero(g, bits);
            bracket_into(&mut next, &y, k, &term, g, &mut tmp);
            if next.is_zero() {
                break;
            }
            for row in next.rows.iter_mut() {
                for c in row.iter_mut() {
                    *c /= j;
                }
            }
            for (vr, nr) in v.rows.iter_mut().zip(&next.rows) {
                for (a, b) in vr.iter_mut().zip(nr) {
                    *a += b;
                }
            }
            term = next;
            j += 1;
        }
    }
    (0..=g).map(|k| if k == 0 { a0.clone() } else { v.rows[k][k + 1].clone() }).collect()
}

fn dense_input(v: &LieElement<BigFloat>, g: usize, bits: u32) -> Result<Vec<Vec<Float>>, RadiusError> {
    let mut rows: Vec<Vec<Float>> = (0..=g).map(|k| vec![Float::new(bits); k + 2]).collect();
    for (t, c) in v.iter() {
        if t.kind == Kind::F && (t.k as usize) <= g && t.k >= 0 {
            rows[t.k as usize][(t.l + 1) as usize] = Float::with_val(bits, &c.0);
        }
    }
    if rows[0][0].is_zero() {
        return Err(RadiusError::ZeroAlpha0);
    }
    Ok(rows)
}

/// Diagonal coefficients `α_0, α_1, …, α_G` of the second-level normal form.
pub fn diag_sequence(v: &LieElement<BigFloat>, grade: usize, digits: u32) -> Result<Vec<BigFloat>, RadiusError> {
    let bits = digits_to_bits(digits);
    let f = dense_input(v, grade, bits)?;
    Ok(diag_dense(&f, grade, bits).into_iter().map(BigFloat).collect())
}

/// As [`diag_sequence`], repeated at twice the digits; fails when any
/// coefficient differs by more than `1e-20` relative.
pub fn diag_sequence_checked(
    v: &LieElement<BigFloat>,
    grade: usize,
    digits: u32,
) -> Result<Vec<BigFloat>, RadiusError> {
    let lo = diag_sequence(v, grade, digits)?;
    let hi = diag_sequence(v, grade, 2 * digits)?;
    let bits = digits_to_bits(2 * digits);
    for (k, (a, b)) in lo.iter().zip(&hi).enumerate() {
        if b.0.is_zero() {
            if !a.0.is_zero() && a.0.clone().abs() > 1e-60 {
                return Err(RadiusError::Precision { k, rel: f64::INFINITY });
            }
            continue;
        }
        let mut d = Float::with_val(bits, &a.0 - &b.0);
        d /= &b.0;
        let rel = d.abs().to_f64();
        if rel > 1e-20 {
            return Err(RadiusError::Precision { k, rel });
        }
    }
    Ok(lo)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RadiusFlag {
    Converged,
    NotConverged,
    /// Ratios tend to zero: `R = ∞`.
    Entire,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub l: f64,
    pub r: f64,
    pub spread: f64,
    pub flag: RadiusFlag,
    /// Tail ratios used for the estimate.
    pub tail: Vec<f64>,
}

/// Ratio test on `|α_k|`, `k >= 1`. Zero entries are skipped (the ratio
/// across a gap is the geometric mean over the gap); three zeros in a row
/// abort.
pub fn ratio_radius(seq: &[f64]) -> Result<RadiusEstimate, RadiusError> {
    let logs: Vec<Option<f64>> = seq.iter().map(|&a| (a != 0.0).then(|| a.abs().ln())).collect();
    ratio_radius_ln(&logs)
}

/// [`ratio_radius`] on arbitrary-precision values, whose tails routinely
/// leave the `f64` range.
pub fn ratio_radius_big(seq: &[BigFloat]) -> Result<RadiusEstimate, RadiusError> {
    let logs: Vec<Option<f64>> =
        seq.iter().map(|a| (!a.0.is_zero()).then(|| a.0.clone().abs().ln().to_f64())).collect();
    ratio_radius_ln(&logs)
}

/// Ratio test on `ln|α_k|`, `None` marking a zero.
fn ratio_radius_ln(logs: &[Option<f64>]) -> Result<RadiusEstimate, RadiusError> {
    let mut zeros = 0;
    let mut last: Option<(usize, f64)> = None;
    let mut ratios = Vec::new();
    for (k, a) in logs.iter().enumerate() {
        let Some(a) = *a else {
            zeros += 1;
            if zeros == 3 && last.is_some() {
                return Err(RadiusError::SparseTail(k));
            }
            continue;
        };
        zeros = 0;
        if let Some((j, b)) = last {
            ratios.push((a - b) / (k - j) as f64);
        }
        last = Some((k, a));
    }
    if ratios.len() < 32 {
        return Err(RadiusError::TooFew(ratios.len() + 1));
    }
    let tail: Vec<f64> = ratios[ratios.len() - ratios.len() / 4..].iter().map(|x| x.exp()).collect();
    let max = tail.iter().cloned().fold(f64::MIN, f64::max);
    let min = tail.iter().cloned().fold(f64::MAX, f64::min);
    let spread = (max - min) / max;
    // ratios falling like 1/k: extrapolate r_k against 1/k to k = ∞
    let n = tail.len() as f64;
    let k0 = (ratios.len() - tail.len() + 1) as f64;
    let xs: Vec<f64> = (0..tail.len()).map(|i| 1.0 / (k0 + i as f64)).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, tail.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&tail).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let intercept = my - sxy / sxx * mx;
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    if decreasing && spread >= 1e-6 && intercept.abs() < 1e-3 * max {
        return Ok(RadiusEstimate { l: 0.0, r: f64::INFINITY, spread, flag: RadiusFlag::Entire, tail });
    }
    let flag = if spread < 1e-6 { RadiusFlag::Converged } else { RadiusFlag::NotConverged };
    Ok(RadiusEstimate { l: max, r: 1.0 / max, spread, flag, tail })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Example {
    Rossler,
    Ks,
}

impl std::str::FromStr for Example {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rossler" => Ok(Example::Rossler),
            "ks" => Ok(Example::Ks),
            _ => Err(format!("unknown example '{s}' (expected rossler or ks)")),
        }
    }
}

/// The closed-form cubic classical normal form of an example at `a`.
pub fn example_cubic_nf(ex: Example, a: &BigFloat) -> Result<LieElement<BigFloat>, RadiusError> {
    match ex {
        Example::Rossler => systems::rossler_cubic_nf_golden(a).map_err(|e| RadiusError::System(e.to_string())),
        Example::Ks => Ok(systems::ks_cubic_nf_golden(a)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusRow {
    pub a: f64,
    pub grade: usize,
    pub estimate: Result<RadiusEstimate, String>,
}

/// One radius estimate per grid point, in grid order. With `check` every
/// point is also rerun at twice the digits.
pub fn sweep(ex: Example, grid: &[f64], grade: usize, digits: u32, check: bool) -> Vec<RadiusRow> {
    let bits = digits_to_bits(digits);
    grid.par_iter()
        .map(|&a| {
            let estimate = (|| {
                let v = example_cubic_nf(ex, &BigFloat::with_bits(bits, a))?;
                let seq = if check {
                    diag_sequence_checked(&v, grade, digits)?
                } else {
                    diag_sequence(&v, grade, digits)?
                };
                ratio_radius_big(&seq[1..])
            })()
            .map_err(|e| e.to_string());
            RadiusRow { a, grade, estimate }
        })
        .collect()
}

/// `a_min, a_min + step, …` up to `a_max` (inclusive within half a step).
pub fn grid(a_min: f64, a_max: f64, step: f64) -> Vec<f64> {
    let n = ((a_max - a_min) / step + 0.5).floor() as i64;
    (0..=n).map(|i| ((a_min + i as f64 * step) * 1e9).round() / 1e9).collect()
}

fn horner(coeffs: &[i64], x: &Float) -> Float {
    let mut acc = Float::new(x.prec());
    for &c in coeffs {
        acc *= x;
        acc += c;
    }
    acc
}

/// Root of the `a^0_1` numerator in `(-√2, 0)`, where the Rössler radius
/// blows up. Bisection to `1e-12` at 128 digits.
pub fn rossler_critical() -> f64 {
    let bits = digits_to_bits(128);
    let mut lo = -Float::with_val(bits, 2).sqrt();
    let mut hi = Float::with_val(bits, 0);
    let flo = horner(&ROSSLER_A01_NUMERATOR, &lo).cmp0();
    while Float::with_val(bits, &hi - &lo) > 1e-13 {
        let mid = Float::with_val(bits, &lo + &hi) / 2;
        if horner(&ROSSLER_A01_NUMERATOR, &mid).cmp0() == flo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid: Float = Float::with_val(bits, &lo + &hi) / 2;
    mid.to_f64()
}

pub fn rossler_numerator(a: f64) -> f64 {
    horner(&ROSSLER_A01_NUMERATOR, &Float::with_val(digits_to_bits(64), a)).to_f64()
}

/// Roots `(-161 ± 5√1065)/352` of `176a² + 161a - 1`.
pub fn ks_critical() -> [f64; 2] {
    let s = 1065f64.sqrt();
    [(-161.0 - 5.0 * s) / 352.0, (-161.0 + 5.0 * s) / 352.0]
}

/// Checks exactly, in `Q(√1065)`, that both roots annihilate `176a² + 161a - 1`.
pub fn ks_roots_identity() -> bool {
    use crate::algebra::scalar::{q, qi, Q};
    // (x, y) stands for x + y√1065
    let mul = |a: (Q, Q), b: (Q, Q)| (&a.0 * &b.0 + &a.1 * &b.1 * qi(1065), &a.0 * &b.1 + &a.1 * &b.0);
    [1i64, -1].iter().all(|&sg| {
        let r = (q(-161, 352), q(5 * sg, 352));
        let r2 = mul(r.clone(), r.clone());
        let val0 = qi(176) * &r2.0 + qi(161) * &r.0 - qi(1);
        let val1 = qi(176) * &r2.1 + qi(161) * &r.1;
        val0 == qi(0) && val1 == qi(0)
    })
}

/// Median of the finite values.
pub fn median(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.iter().cloned().filter(|x| x.is_finite()).collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    if v.is_empty() {
        return f64::NAN;
    }
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
