//! Optimal truncation estimates: per-degree norm constants, the optimal
//! degree and the exponentially small remainder bound.
//!
//! Everything here is evaluated in `f64`; the quantities are bounds with
//! at most ten significant digits of interest.

use std::cmp::Ordering;
use std::f64::consts::E;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Coeff, Poly3, PolyField3};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TruncationError {
    #[error("system has no terms of degree >= 2")]
    NoNonlinearTerms,
    #[error("sphere maximization did not converge at degree {degree} (best {best}, residual {residual:e})")]
    NoConvergence { degree: u32, best: f64, residual: f64 },
    #[error("delta must be positive")]
    BadDelta,
}

pub fn to_f64<C: Coeff>(c: &C) -> f64 {
    match c.sign() {
        Some(Ordering::Less) => -c.magnitude(),
        _ => c.magnitude(),
    }
}

fn nonlinear_degrees<C: Coeff>(sys: &PolyField3<C>) -> Vec<u32> {
    let top = sys.comps.iter().filter_map(|p| p.degree()).max().unwrap_or(0);
    (2..=top).filter(|&d| sys.comps.iter().any(|p| !p.homogeneous(d).is_zero())).collect()
}

/// Returns `(raw, effective)` where `raw` is the largest per-degree sum of
/// absolute coefficients and `effective = max(raw, 2)`.
pub fn c_sum<C: Coeff>(sys: &PolyField3<C>) -> Result<(f64, f64), TruncationError> {
    let degs = nonlinear_degrees(sys);
    if degs.is_empty() {
        return Err(TruncationError::NoNonlinearTerms);
    }
    let raw = degs
        .iter()
        .map(|&d| sys.comps.iter().flat_map(|p| p.homogeneous(d).iter().map(|(_, c)| c.magnitude()).collect::<Vec<_>>()).sum::<f64>())
        .fold(0.0, f64::max);
    Ok((raw, raw.max(2.0)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereMax {
    pub degree: u32,
    pub value: f64,
    pub argmax: [f64; 3],
    /// Norm of the tangential gradient of `|P|^2` at `argmax`.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CMin {
    pub raw: f64,
    pub effective: f64,
    pub per_degree: Vec<SphereMax>,
}

type Flat = Vec<([i32; 3], f64)>;

struct Homog {
    comps: [Flat; 3],
    grads: [[Flat; 3]; 3],
}

fn flat<C: Coeff>(p: &Poly3<C>) -> Flat {
    p.iter().map(|(m, c)| ([m[0] as i32, m[1] as i32, m[2] as i32], to_f64(c))).collect()
}

fn ev(p: &[([i32; 3], f64)], w: &[f64; 3]) -> f64 {
    p.iter().map(|(m, c)| c * w[0].powi(m[0]) * w[1].powi(m[1]) * w[2].powi(m[2])).sum()
}

impl Homog {
    fn new<C: Coeff>(sys: &PolyField3<C>, d: u32) -> Self {
        let h: [Poly3<C>; 3] = std::array::from_fn(|i| sys.comps[i].homogeneous(d));
        Homog {
            comps: std::array::from_fn(|i| flat(&h[i])),
            grads: std::array::from_fn(|i| std::array::from_fn(|j| flat(&h[i].diff(j)))),
        }
    }

    /// `|P(w)|^2` and its gradient.
    fn value_grad(&self, w: &[f64; 3]) -> (f64, [f64; 3]) {
        let p: [f64; 3] = std::array::from_fn(|i| ev(&self.comps[i], w));
        let g = std::array::from_fn(|j| 2.0 * (0..3).map(|i| p[i] * ev(&self.grads[i][j], w)).sum::<f64>());
        (p.iter().map(|x| x * x).sum(), g)
    }
}

fn normalize(w: [f64; 3]) -> [f64; 3] {
    let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.map(|x| x / n)
}

fn tangential(w: &[f64; 3], g: &[f64; 3]) -> [f64; 3] {
    let d: f64 = (0..3).map(|i| w[i] * g[i]).sum();
    std::array::from_fn(|i| g[i] - d * w[i])
}

fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|i| a[i] * b[i]).sum()
}

/// Orthonormal basis of the tangent plane at `w`.
fn tangent_basis(w: &[f64; 3]) -> ([f64; 3], [f64; 3]) {
    let a = if w[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(&a, w);
    let e1 = normalize(std::array::from_fn(|i| a[i] - d * w[i]));
    let e2 = [w[1] * e1[2] - w[2] * e1[1], w[2] * e1[0] - w[0] * e1[2], w[0] * e1[1] - w[1] * e1[0]];
    (e1, e2)
}

/// Gradient of `h(s,t) = g(normalize(w + s e1 + t e2))`.
fn chart_grad(h: &Homog, w: &[f64; 3], e: &([f64; 3], [f64; 3]), s: f64, t: f64) -> [f64; 2] {
    let raw: [f64; 3] = std::array::from_fn(|i| w[i] + s * e.0[i] + t * e.1[i]);
    let n = norm(&raw);
    let q = raw.map(|x| x / n);
    let (_, g) = h.value_grad(&q);
    let dq = |v: &[f64; 3]| -> [f64; 3] {
        let d = dot(v, &q);
        std::array::from_fn(|i| (v[i] - d * q[i]) / n)
    };
    [dot(&g, &dq(&e.0)), dot(&g, &dq(&e.1))]
}

/// Projected gradient ascent of `|P|^2` on the unit sphere from `w0` with
/// backtracking, finished by Newton steps in a tangent chart. Returns the
/// point, the value and the final tangential gradient norm.
fn ascend(h: &Homog, w0: [f64; 3]) -> ([f64; 3], f64, f64) {
    let mut w = normalize(w0);
    let (mut f, mut g) = h.value_grad(&w);
    let mut step = 1.0 / (1.0 + f);
    for _ in 0..2_000 {
        let t = tangential(&w, &g);
        let tn = norm(&t);
        if tn <= 1e-6 * f.max(1.0) {
            break;
        }
        loop {
            let cand = normalize(std::array::from_fn(|i| w[i] + step * t[i]));
            let (fc, gc) = h.value_grad(&cand);
            if fc >= f + 1e-4 * step * tn * tn || step < 1e-18 {
                w = cand;
                f = fc;
                g = gc;
                step *= 2.0;
                break;
            }
            step *= 0.5;
        }
    }
    for _ in 0..50 {
        let r = norm(&tangential(&w, &g));
        if r <= 1e-13 * f.max(1.0) {
            break;
        }
        let e = tangent_basis(&w);
        let g0 = chart_grad(h, &w, &e, 0.0, 0.0);
        let eps = 1e-5;
        let gs = [chart_grad(h, &w, &e, eps, 0.0), chart_grad(h, &w, &e, -eps, 0.0)];
        let gt = [chart_grad(h, &w, &e, 0.0, eps), chart_grad(h, &w, &e, 0.0, -eps)];
        let hss = (gs[0][0] - gs[1][0]) / (2.0 * eps);
        let hst = 0.5 * ((gs[0][1] - gs[1][1]) + (gt[0][0] - gt[1][0])) / (2.0 * eps);
        let htt = (gt[0][1] - gt[1][1]) / (2.0 * eps);
        let det = hss * htt - hst * hst;
        // Newton only where the chart Hessian is negative definite
        let (ds, dt) = if hss < 0.0 && det > 0.0 {
            (-(htt * g0[0] - hst * g0[1]) / det, -(-hst * g0[0] + hss * g0[1]) / det)
        } else {
            let sc = 1.0 / (1.0 + f);
            (sc * g0[0], sc * g0[1])
        };
        let cand = normalize(std::array::from_fn(|i| w[i] + ds * e.0[i] + dt * e.1[i]));
        let (fc, gc) = h.value_grad(&cand);
        if fc < f - 1e-12 * f.max(1.0) {
            break;
        }
        w = cand;
        f = fc;
        g = gc;
    }
    let r = norm(&tangential(&w, &g));
    (w, f, r)
}

/// Largest `|P_N(w)|` over the unit sphere for each nonlinear degree `N`,
/// from `starts` deterministic random starts per degree.
pub fn c_min<C: Coeff>(sys: &PolyField3<C>, starts: usize) -> Result<CMin, TruncationError> {
    let degs = nonlinear_degrees(sys);
    if degs.is_empty() {
        return Err(TruncationError::NoNonlinearTerms);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut per_degree = Vec::new();
    for d in degs {
        let h = Homog::new(sys, d);
        let mut best: Option<SphereMax> = None;
        // coordinate axes and diagonals first, then random directions
        let mut seeds: Vec<[f64; 3]> = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 1.0, 1.0]];
        while seeds.len() < starts.max(32) {
            let w: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            if norm(&w) > 1e-3 {
                seeds.push(w);
            }
        }
        for s in seeds {
            let (w, f, r) = ascend(&h, s);
            let cand = SphereMax { degree: d, value: f.sqrt(), argmax: w, residual: r };
            if best.as_ref().is_none_or(|b| cand.value > b.value) {
                best = Some(cand);
            }
        }
        let best = best.expect("at least one start");
        // stationarity of |P|^2 relative to its size
        if best.residual > 1e-10 * (best.value * best.value).max(1.0) {
            return Err(TruncationError::NoConvergence { degree: d, best: best.value, residual: best.residual });
        }
        per_degree.push(best);
    }
    let raw = per_degree.iter().map(|s| s.value).fold(0.0, f64::max);
    Ok(CMin { raw, effective: raw.max(2.0), per_degree })
}

/// `𝔪 = sup_p e^2 p! / (p^{p+1/2} e^{-p})`, evaluated over `p = 1..=100`.
/// Returns the maximizing `p` and the value.
pub fn m_sup() -> (u32, f64) {
    let mut best = (0, 0.0);
    let mut ln_fact = 0.0f64;
    for p in 1..=100u32 {
        ln_fact += (p as f64).ln();
        let pf = p as f64;
        let v = (2.0 + ln_fact - (pf + 0.5) * pf.ln() + pf).exp();
        if v > best.1 {
            best = (p, v);
        }
    }
    best
}

/// Which optimal-degree formula to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum POptFormula {
    /// `⌊2/(δ(19√3𝔠+6√3)e)⌋`
    #[default]
    Proposition,
    /// `⌊1/(δ(19√3𝔠+3√3)e)⌋`, the variant used in the KS example.
    KsExample,
}

/// The constant `C` with `p_opt(δ) = ⌊C/δ⌋`.
pub fn p_opt_constant(c: f64, formula: POptFormula) -> f64 {
    let s3 = 3f64.sqrt();
    match formula {
        POptFormula::Proposition => 2.0 / ((19.0 * s3 * c + 6.0 * s3) * E),
        POptFormula::KsExample => 1.0 / ((19.0 * s3 * c + 3.0 * s3) * E),
    }
}

/// Returns `(p_opt, applicable)` with `applicable = p_opt >= 2`.
pub fn p_opt(delta: f64, c: f64, formula: POptFormula) -> Result<(u64, bool), TruncationError> {
    if delta <= 0.0 || delta.is_nan() {
        return Err(TruncationError::BadDelta);
    }
    let v = (p_opt_constant(c, formula) / delta).floor();
    let p = if v.is_finite() { v as u64 } else { u64::MAX };
    Ok((p, p >= 2))
}

/// `M / (𝔠 (19𝔠+6)^2) = (5/6)(𝔪 √(27/(8e)) + 4e^2)`.
pub fn m_prefactor() -> f64 {
    let (_, m) = m_sup();
    5.0 / 6.0 * (m * (27.0 / (8.0 * E)).sqrt() + 4.0 * E * E)
}

/// `M = m_prefactor · 𝔠 (19𝔠+6)^2`.
pub fn m_constant(c: f64) -> f64 {
    m_prefactor() * c * (19.0 * c + 6.0).powi(2)
}

/// Exponent constant `w` in `M δ^2 exp(-w/δ)`.
pub fn exponent_constant(c: f64) -> f64 {
    2.0 / (E * 3f64.sqrt() * (19.0 * c + 6.0))
}

/// Returns `(M, M δ^2 exp(-w/δ))`.
pub fn remainder_bound(delta: f64, c: f64) -> Result<(f64, f64), TruncationError> {
    if delta <= 0.0 || delta.is_nan() {
        return Err(TruncationError::BadDelta);
    }
    let m = m_constant(c);
    Ok((m, m * delta * delta * (-exponent_constant(c) / delta).exp()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub method: String,
    pub delta: f64,
    pub c: f64,
    pub p_opt: u64,
    pub applicable: bool,
    pub m: f64,
    pub bound: f64,
}

/// Bound rows for each `(method, 𝔠)` over the grid.
pub fn bound_curve(
    cs: &[(&str, f64)],
    deltas: &[f64],
    formula: POptFormula,
) -> Result<Vec<BoundRow>, TruncationError> {
    let mut rows = Vec::new();
    for &(method, c) in cs {
        for &d in deltas {
            let (p, applicable) = p_opt(d, c, formula)?;
            let (m, bound) = remainder_bound(d, c)?;
            rows.push(BoundRow { method: method.to_string(), delta: d, c, p_opt: p, applicable, m, bound });
        }
    }
    Ok(rows)
}

/// `n` log-spaced points in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}
