//! Hypernormalization inside the volume-preserving algebra.
//!
//! One grade-by-grade engine serves every level. At grade `g` the candidate
//! generators are the basis terms of grade `g - g0` (`g0` the grade of the
//! principal part) plus, when kernel tracking is on, every combination of
//! earlier candidates whose image vanished at all lower grades. The
//! coordinates the level's pattern marks as removable are solved away; what
//! is left is the normal form.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::scalar::{binomial, factorial, pochhammer};
use crate::algebra::transform::{RescaleError, TransformError};
use crate::algebra::{apply_exp_ad, canonical_rescale, BasisTerm, Coeff, GradingSpec, Kind, LieElement, ScalingRecord};
use crate::algebra::json::{CoeffIo, JsonError, LieJson, TermJson};
use crate::integral::{first_integral_closed, IntegralJson};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Level {
    Second,
    PPlus1,
    Infinite,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Second => "2",
            Level::PPlus1 => "p1",
            Level::Infinite => "inf",
        })
    }
}

impl std::str::FromStr for Level {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "2" => Ok(Level::Second),
            "p1" => Ok(Level::PPlus1),
            "inf" => Ok(Level::Infinite),
            _ => Err(format!("unknown level '{s}' (expected 2, p1 or inf)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step<C> {
    /// `v <- exp(ad_y) v`, truncated at `cap` in `grading`.
    Generator { grading: GradingSpec, grade: i64, cap: i64, y: LieElement<C> },
    Scale(ScalingRecord<C>),
    Truncate { grading: GradingSpec, cap: i64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormalizationReport<C> {
    pub level: Level,
    pub input: LieElement<C>,
    pub output: LieElement<C>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub n: i64,
    pub steps: Vec<Step<C>>,
    pub flags: Vec<String>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HyperError {
    #[error("coefficient of F^-1_0 is zero")]
    ZeroAlpha0,
    #[error("coefficient of Theta^0_0 must be 1, found {0}")]
    RotationNotUnit(String),
    #[error("p-undetected-at-{0}: no diagonal F^k_k below the truncation grade")]
    PUndetected(i64),
    #[error("q-undetected-at-{0}")]
    QUndetected(i64),
    #[error("cannot remove {terms} at grade {grade}{hint}")]
    Infeasible { grade: i64, terms: String, hint: String },
    #[error(transparent)]
    Rescale(#[from] RescaleError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error("invalid index range: {0}")]
    Index(String),
}

/// Which terms a level keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pattern {
    Second,
    PPlus1 { p: u32 },
    Infinite { p: u32, q: u32 },
}

/// What the engine does with a coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    Keep,
    Remove,
    /// Removed when the current image allows it, otherwise kept and flagged.
    Attempt,
}

impl Pattern {
    pub fn role(&self, t: &BasisTerm) -> Role {
        if *t == BasisTerm::theta(0, 0) || *t == BasisTerm::f(-1, 0) || *t == BasisTerm::f(0, 0) {
            return Role::Keep;
        }
        if !t.is_diagonal() {
            return Role::Remove;
        }
        let k = t.k as i64;
        let keep = |b: bool| if b { Role::Keep } else { Role::Remove };
        match *self {
            Pattern::Second => Role::Keep,
            Pattern::PPlus1 { p } => keep(keeps_p1(t.kind, k, p as i64)),
            Pattern::Infinite { p, q } => {
                let (p, q) = (p as i64, q as i64);
                if !keeps_p1(t.kind, k, p) {
                    Role::Remove
                } else if t.kind == Kind::Theta && k >= p + q && (k - p - q).rem_euclid(2 * (p + 1)) == 0 {
                    Role::Attempt
                } else {
                    Role::Keep
                }
            }
        }
    }

    pub fn keeps(&self, t: &BasisTerm) -> bool {
        self.role(t) == Role::Keep
    }
}

fn keeps_p1(kind: Kind, k: i64, p: i64) -> bool {
    let m = 2 * (p + 1);
    match kind {
        Kind::F => !(k > p && (k - (p - 1)).rem_euclid(m) == 0),
        Kind::Theta => (k + 1).rem_euclid(m) != 0,
    }
}

struct Engine {
    grading: GradingSpec,
    g0: i64,
    cap: i64,
    track_kernel: bool,
}

impl Engine {
    fn fresh(&self, s: i64) -> Vec<BasisTerm> {
        self.grading
            .terms_of_grade(s)
            .into_iter()
            .filter(|t| *t != BasisTerm::theta(0, 0) && *t != BasisTerm::f(0, 0))
            .collect()
    }

    fn run<C: Coeff>(
        &self,
        mut v: LieElement<C>,
        pattern: Pattern,
        steps: &mut Vec<Step<C>>,
        flags: &mut Vec<String>,
    ) -> Result<LieElement<C>, HyperError> {
        let g = &self.grading;
        v = v.truncate(g, self.cap);
        steps.push(Step::Truncate { grading: *g, cap: self.cap });
        let mut kernel: Vec<LieElement<C>> = Vec::new();
        for grade in (self.g0 + 1)..=self.cap {
            let mut cands: Vec<LieElement<C>> =
                self.fresh(grade - self.g0).into_iter().map(|t| LieElement::term(t, C::one())).collect();
            if self.track_kernel {
                cands.append(&mut kernel);
            }
            let coords = g.terms_of_grade(grade);
            let mut removable: Vec<usize> =
                (0..coords.len()).filter(|&i| pattern.role(&coords[i]) == Role::Remove).collect();
            let mut a_full = linalg::zeros::<C>(coords.len(), cands.len());
            for (j, y) in cands.iter().enumerate() {
                let img = y.bracket_capped(&v, g, grade);
                for (i, t) in coords.iter().enumerate() {
                    if let Some(c) = img.coeff(t) {
                        a_full[i][j] = c.clone();
                    }
                }
            }
            let mut a_rem: linalg::Matrix<C> = removable.iter().map(|&i| a_full[i].clone()).collect();
            let mut r_rem = linalg::rank(&a_rem);
            for i in (0..coords.len()).filter(|&i| pattern.role(&coords[i]) == Role::Attempt) {
                let mut m = a_rem.clone();
                m.push(a_full[i].clone());
                let r = linalg::rank(&m);
                if r > r_rem {
                    a_rem = m;
                    r_rem = r;
                    removable.push(i);
                } else {
                    flags.push(format!("{} kept at grade {grade}: outside the image", coords[i]));
                }
            }
            let rhs: Vec<C> = removable.iter().map(|&i| -v.get(&coords[i])).collect();
            let Some(sol) = linalg::solve(&a_rem, &rhs) else {
                let left: Vec<String> = removable
                    .iter()
                    .filter(|&&i| !v.get(&coords[i]).negligible(1.0))
                    .map(|&i| coords[i].to_string())
                    .collect();
                let hint = if C::BACKEND == crate::algebra::Backend::Rational {
                    "; the principal coefficient may be non-generic, retry with the ratfunc backend".to_string()
                } else {
                    String::new()
                };
                return Err(HyperError::Infeasible { grade, terms: left.join(", "), hint });
            };
            if self.track_kernel {
                let r_full = linalg::rank(&a_full);
                if r_full > r_rem {
                    // kept coordinates that some candidate moves while fixing the removable ones
                    let loose: Vec<String> = (0..coords.len())
                        .filter(|&i| pattern.keeps(&coords[i]))
                        .filter(|&i| {
                            let mut m = a_rem.clone();
                            m.push(a_full[i].clone());
                            linalg::rank(&m) > r_rem
                        })
                        .map(|i| coords[i].to_string())
                        .collect();
                    flags.push(format!("pattern slack at grade {grade}: {}", loose.join(", ")));
                }
            }
            let mut y = LieElement::zero();
            for (c, cand) in sol.iter().zip(&cands) {
                if !c.is_zero() {
                    y = y.add(&cand.scale(c));
                }
            }
            if !y.is_zero() {
                v = apply_exp_ad(&y, &v, self.cap, g)?;
                steps.push(Step::Generator { grading: *g, grade: grade - self.g0, cap: self.cap, y });
            }
            if self.track_kernel {
                kernel = linalg::nullspace(&a_full, cands.len())
                    .into_iter()
                    .map(|w| {
                        let mut z = LieElement::zero();
                        for (c, cand) in w.iter().zip(&cands) {
                            if !c.is_zero() {
                                z = z.add(&cand.scale(c));
                            }
                        }
                        z
                    })
                    .filter(|z| !z.is_zero())
                    .collect();
            }
        }
        Ok(v)
    }
}

fn check_input<C: Coeff>(v: &LieElement<C>) -> Result<(), HyperError> {
    let rot = v.get(&BasisTerm::theta(0, 0));
    if rot != C::one() {
        return Err(HyperError::RotationNotUnit(rot.to_string()));
    }
    if v.get(&BasisTerm::f(-1, 0)).is_zero() {
        return Err(HyperError::ZeroAlpha0);
    }
    Ok(())
}

/// Removes every off-diagonal term up to classic grade `n`.
pub fn second_level<C: Coeff>(v: &LieElement<C>, n: i64) -> Result<NormalizationReport<C>, HyperError> {
    check_input(v)?;
    let mut steps = Vec::new();
    let mut flags = Vec::new();
    let engine = Engine { grading: GradingSpec::Classic, g0: 0, cap: n, track_kernel: false };
    let out = engine.run(v.clone(), Pattern::Second, &mut steps, &mut flags)?;
    let p = detect_p(&out, n).ok();
    Ok(NormalizationReport { level: Level::Second, input: v.clone(), output: out, p, q: None, n, steps, flags })
}

/// `p = min{k >= 1 : α_k != 0}` on a second-level output.
pub fn detect_p<C: Coeff>(v: &LieElement<C>, n: i64) -> Result<u32, HyperError> {
    let scale = v.max_magnitude().max(1.0);
    (1..=n)
        .find(|&k| !v.get(&BasisTerm::f(k as i32, k as i32)).negligible(scale))
        .map(|k| k as u32)
        .ok_or(HyperError::PUndetected(n))
}

/// `q = min{k >= 1 : β_k != 0}` on a `(p+1)`-level output.
pub fn detect_q<C: Coeff>(v: &LieElement<C>, n: i64) -> Result<u32, HyperError> {
    let scale = v.max_magnitude().max(1.0);
    (1..=n)
        .find(|&k| !v.get(&BasisTerm::theta(k as i32, k as i32)).negligible(scale))
        .map(|k| k as u32)
        .ok_or(HyperError::QUndetected(n))
}

pub fn detect_pq<C: Coeff>(report: &NormalizationReport<C>) -> Result<(u32, Option<u32>), HyperError> {
    let p = detect_p(&report.output, report.n)?;
    let q = match report.level {
        Level::Second => None,
        _ => detect_q(&report.output, report.n).ok(),
    };
    Ok((p, q))
}

#[derive(Clone, Debug)]
pub struct HyperOptions<C> {
    /// Target coefficients of `F^{-1}_0` and `|F^p_p|`.
    pub targets: (C, C),
    /// After the canonical rescale, additionally scale by `x -> c X`,
    /// `t -> c τ`, so that `α_p` becomes `±c^{p+1}`. With an indeterminate
    /// `c` this keeps `α_p` generic.
    pub generic: Option<C>,
}

impl<C: Coeff> Default for HyperOptions<C> {
    fn default() -> Self {
        HyperOptions { targets: (C::ratio(1, 2), C::one()), generic: None }
    }
}

fn rescale_stage<C: Coeff>(
    v: &LieElement<C>,
    p: u32,
    opts: &HyperOptions<C>,
    steps: &mut Vec<Step<C>>,
) -> Result<LieElement<C>, HyperError> {
    let (mut w, rec) = canonical_rescale(v, p, &opts.targets.0, &opts.targets.1)?;
    steps.push(Step::Scale(rec));
    if let Some(c) = &opts.generic {
        let rec = ScalingRecord { p, c: c.clone(), d: c.clone() };
        w = rec.apply(&w);
        steps.push(Step::Scale(rec));
    }
    Ok(w)
}

/// Second level, rescale, then the weighted `(p+1)`-level pass.
pub fn level_p_plus_1<C: Coeff>(
    v: &LieElement<C>,
    n: i64,
    opts: &HyperOptions<C>,
) -> Result<NormalizationReport<C>, HyperError> {
    let second = second_level(v, n)?;
    let p = detect_p(&second.output, n)?;
    let mut steps = second.steps;
    let mut flags = second.flags;
    let w = rescale_stage(&second.output, p, opts, &mut steps)?;
    let engine = Engine { grading: GradingSpec::Weighted { p }, g0: p as i64, cap: n, track_kernel: false };
    let out = engine.run(w, Pattern::PPlus1 { p }, &mut steps, &mut flags)?;
    let q = detect_q(&out, n).ok();
    Ok(NormalizationReport { level: Level::PPlus1, input: v.clone(), output: out, p: Some(p), q, n, steps, flags })
}

/// Full reduction to the infinite-level pattern up to weighted grade `n`.
/// If `q` cannot be detected the `(p+1)`-level result is returned with a flag.
pub fn infinite_level<C: Coeff>(
    v: &LieElement<C>,
    n: i64,
    opts: &HyperOptions<C>,
) -> Result<NormalizationReport<C>, HyperError> {
    let p1 = level_p_plus_1(v, n, opts)?;
    let p = p1.p.expect("p detected");
    let Some(q) = p1.q else {
        let mut r = p1;
        r.flags.push(format!("q-undetected-at-{n}: returning the (p+1)-level normal form"));
        return Ok(r);
    };
    let mut steps = p1.steps;
    let mut flags = p1.flags;
    let engine = Engine { grading: GradingSpec::Weighted { p }, g0: p as i64, cap: n, track_kernel: true };
    let out = engine.run(p1.output, Pattern::Infinite { p, q }, &mut steps, &mut flags)?;
    Ok(NormalizationReport { level: Level::Infinite, input: v.clone(), output: out, p: Some(p), q: Some(q), n, steps, flags })
}

pub fn normalize<C: Coeff>(
    v: &LieElement<C>,
    level: Level,
    n: i64,
    opts: &HyperOptions<C>,
) -> Result<NormalizationReport<C>, HyperError> {
    match level {
        Level::Second => second_level(v, n),
        Level::PPlus1 => level_p_plus_1(v, n, opts),
        Level::Infinite => infinite_level(v, n, opts),
    }
}

pub fn replay<C: Coeff>(input: &LieElement<C>, steps: &[Step<C>]) -> Result<LieElement<C>, HyperError> {
    let mut v = input.clone();
    for s in steps {
        v = match s {
            Step::Generator { grading, cap, y, .. } => apply_exp_ad(y, &v, *cap, grading)?,
            Step::Scale(rec) => rec.apply(&v),
            Step::Truncate { grading, cap } => v.truncate(grading, *cap),
        };
    }
    Ok(v)
}

/// Replays the report and compares with its output (exact, or to working
/// precision for floats).
pub fn conjugacy_check<C: Coeff>(report: &NormalizationReport<C>) -> bool {
    let Ok(w) = replay(&report.input, &report.steps) else {
        return false;
    };
    let scale = report.output.max_magnitude().max(1.0);
    w.sub(&report.output).prune(scale).is_zero()
}
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum StepJson {
    Generator { grading: GradingSpec, grade: i64, cap: i64, y: Vec<TermJson> },
    Scale { p: u32, c: String, d: String },
    Truncate { grading: GradingSpec, cap: i64 },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ReportJson {
    pub level: Level,
    pub p: Option<u32>,
    pub q: Option<u32>,
    pub n: i64,
    pub input: LieJson,
    pub output: LieJson,
    pub steps: Vec<StepJson>,
    pub flags: Vec<String>,
    /// First integral of the output, when it has a unique generator.
    pub first_integral: Option<IntegralJson>,
}

impl ReportJson {
    pub fn from_report<C: CoeffIo>(r: &NormalizationReport<C>) -> Self {
        let steps = r
            .steps
            .iter()
            .map(|s| match s {
                Step::Generator { grading, grade, cap, y } => StepJson::Generator {
                    grading: *grading,
                    grade: *grade,
                    cap: *cap,
                    y: LieJson::from_element(y).terms,
                },
                Step::Scale(rec) => StepJson::Scale { p: rec.p, c: rec.c.format_coeff(), d: rec.d.format_coeff() },
                Step::Truncate { grading, cap } => StepJson::Truncate { grading: *grading, cap: *cap },
            })
            .collect();
        ReportJson {
            level: r.level,
            p: r.p,
            q: r.q,
            n: r.n,
            input: LieJson::from_element(&r.input),
            output: LieJson::from_element(&r.output),
            steps,
            flags: r.flags.clone(),
            first_integral: first_integral_closed(&r.output).ok().map(|f| IntegralJson::from_integral(&f)),
        }
    }

    pub fn to_report<C: CoeffIo>(&self) -> Result<NormalizationReport<C>, JsonError> {
        let coeff = |s: &str| C::parse_coeff(s).map_err(JsonError::Coeff);
        let mut steps = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            steps.push(match s {
                StepJson::Generator { grading, grade, cap, y } => {
                    let y = LieJson { backend: C::BACKEND, terms: y.clone() }.to_element()?;
                    Step::Generator { grading: *grading, grade: *grade, cap: *cap, y }
                }
                StepJson::Scale { p, c, d } => Step::Scale(ScalingRecord { p: *p, c: coeff(c)?, d: coeff(d)? }),
                StepJson::Truncate { grading, cap } => Step::Truncate { grading: *grading, cap: *cap },
            });
        }
        Ok(NormalizationReport {
            level: self.level,
            input: self.input.to_element()?,
            output: self.output.to_element()?,
            p: self.p,
            q: self.q,
            n: self.n,
            steps,
            flags: self.flags.clone(),
        })
    }
}


/// `Θ^m_n + [Y, X_p] = c Θ^{s}_{s}`, `s = pn - pm + n`, for
/// `X_p = ½F^{-1}_0 + α F^p_p`. Returns `(Y, c, Θ^s_s)`.
pub fn eliminate_theta_offdiag<C: Coeff>(
    m: i32,
    n: i32,
    p: i32,
    alpha: &C,
) -> Result<(LieElement<C>, C, BasisTerm), HyperError> {
    if !(0 <= m && m < n && p >= 1) {
        return Err(HyperError::Index(format!("need 0 <= m < n and p >= 1, got m={m}, n={n}, p={p}")));
    }
    let (m64, n64, p64) = (m as i64, n as i64, p as i64);
    let s = m64 + 1 + (m64 - n64 + 1) * (p64 + 1);
    let neg_alpha = -alpha.clone();
    let mut y = LieElement::zero();
    for i in 0..(n - m) {
        let c = pochhammer(s, i as u32, 2 * p64 + 2) / pochhammer(m64 + 1, i as u32 + 1, p64 + 1);
        let t = BasisTerm::theta(m + 1 + i * (p + 1), n + i * p);
        y.add_term(t, neg_alpha.pow(i as u32) * C::from_q(&c));
    }
    let len = (n - m) as u32;
    let c = pochhammer(s, len, 2 * p64 + 2) / pochhammer(m64 + 1, len, p64 + 1);
    let d = p * n - p * m + n;
    Ok((y, neg_alpha.pow(len) * C::from_q(&c), BasisTerm::theta(d, d)))
}

/// `½F^{-1}_0 + α F^p_p`.
pub fn principal<C: Coeff>(p: i32, alpha: &C) -> LieElement<C> {
    LieElement::from_terms([(BasisTerm::f(-1, 0), C::ratio(1, 2)), (BasisTerm::f(p, p), alpha.clone())])
}

/// The three kernel families attached to `X_p = ½F^{-1}_0 + α F^p_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelFamily<C> {
    /// `(k, 𝓕^{-1}_k)` for `k >= 1`.
    pub f: Vec<(u32, LieElement<C>)>,
    /// `(k, 𝓧^k_p)` for `k >= 1`.
    pub x: Vec<(u32, LieElement<C>)>,
    /// `(k, 𝓣^0_{k,p})` for `k >= 0`.
    pub t: Vec<(u32, LieElement<C>)>,
}

fn push_valid<C: Coeff>(e: &mut LieElement<C>, kind: Kind, l: i64, k: i64, c: C) {
    if let Some(t) = BasisTerm::new(kind, l as i32, k as i32) {
        e.add_term(t, c);
    }
}

/// Families built from their coefficient formulas, with `α' = 2α` (the
/// formulas assume unit `F^{-1}_0` coefficient) and formal terms with
/// upper index above the lower one dropped. Members of weighted grade above
/// `n` are omitted.
pub fn kernel_basis<C: Coeff>(p: u32, alpha: &C, n: i64) -> KernelFamily<C> {
    let a2 = alpha.clone() * C::from_i64(2);
    let p64 = p as i64;
    let g = GradingSpec::Weighted { p };
    let mut fam = KernelFamily { f: Vec::new(), x: Vec::new(), t: Vec::new() };
    for k in 0..=n {
        if k >= 1 {
            let mut e = LieElement::zero();
            for m in 0..=2 * k {
                let c = pochhammer(2 * k + 1, m as u32, -2) / (num_rational::BigRational::from_integer(
                    num_bigint::BigInt::from(2).pow(m as u32) * factorial(m as u32),
                ));
                push_valid(&mut e, Kind::F, m * (p64 + 1) - 1, 2 * k - 1 + m * p64, a2.pow(m as u32) * C::from_q(&c));
            }
            if e.min_grade(&g).is_some_and(|x| x <= n) {
                fam.f.push((k as u32, e.truncate(&g, n.max(e.max_grade(&g).unwrap_or(0)))));
            }
            let mut e = LieElement::zero();
            for m in 0..=k {
                let c = num_rational::BigRational::from_integer(binomial(k as u32, m as u32));
                push_valid(&mut e, Kind::F, m * (p64 + 1) - 1, 2 * k - 2 + m * p64, a2.pow(m as u32) * C::from_q(&c));
            }
            if e.min_grade(&g).is_some_and(|x| x <= n) {
                fam.x.push((k as u32, e));
            }
        }
        let mut e = LieElement::zero();
        for m in 0..=k {
            let c = pochhammer(k, m as u32, -2)
                / num_rational::BigRational::from_integer(num_bigint::BigInt::from(2).pow(m as u32) * factorial(m as u32));
            push_valid(&mut e, Kind::Theta, m * (p64 + 1), k + m * p64, a2.pow(m as u32) * C::from_q(&c));
        }
        if e.min_grade(&g).is_some_and(|x| x <= n) {
            fam.t.push((k as u32, e));
        }
    }
    fam
}

/// Inputs of the quartic closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct CubicData<C> {
    pub am1_0: C,
    pub a0_1: C,
    pub a1_1: C,
    pub a2_2: C,
    pub b1_1: C,
    pub b0_1: C,
    pub b2_2: C,
}

impl<C: Coeff> CubicData<C> {
    pub fn from_element(v: &LieElement<C>) -> Self {
        CubicData {
            am1_0: v.get(&BasisTerm::f(-1, 0)),
            a0_1: v.get(&BasisTerm::f(0, 1)),
            a1_1: v.get(&BasisTerm::f(1, 1)),
            a2_2: v.get(&BasisTerm::f(2, 2)),
            b1_1: v.get(&BasisTerm::theta(1, 1)),
            b0_1: v.get(&BasisTerm::theta(0, 1)),
            b2_2: v.get(&BasisTerm::theta(2, 2)),
        }
    }
}

/// Quartic truncated infinite-level normal form in closed form, with
/// `± = sign(a^{-1}_0 a^1_1)`.
pub fn quartic_closed_form<C: Coeff>(c: &CubicData<C>) -> Result<LieElement<C>, HyperError> {
    if c.am1_0.is_zero() {
        return Err(HyperError::ZeroAlpha0);
    }
    if c.a1_1.is_zero() {
        return Err(HyperError::PUndetected(1));
    }
    let prod = c.am1_0.clone() * c.a1_1.clone();
    let pm = match prod.sign() {
        Some(std::cmp::Ordering::Less) => C::from_i64(-1),
        Some(_) => C::one(),
        None => return Err(HyperError::Rescale(RescaleError::Irrational)),
    };
    // sqrt(2) |a^{-1}_0 a^1_1|^{1/2}
    let root = (C::from_i64(2) * prod.abs().ok_or(RescaleError::Irrational)?)
        .nth_root(2)
        .ok_or(RescaleError::Irrational)?;
    let f22 = pm.clone() * c.am1_0.clone() * c.a2_2.clone() / (c.a1_1.clone() * root.clone());
    let f33 = c.a0_1.clone() * c.a2_2.clone() / (C::from_i64(8) * c.a1_1.clone() * c.a1_1.clone());
    let t11 = pm.clone() * c.b1_1.clone() / c.a1_1.clone();
    let t22 = pm.clone() * (C::from_i64(4) * c.b2_2.clone() * c.am1_0.clone() + c.a0_1.clone() * c.b1_1.clone())
        / (C::from_i64(4) * c.a1_1.clone() * root);
    Ok(LieElement::from_terms([
        (BasisTerm::theta(0, 0), C::one()),
        (BasisTerm::f(-1, 0), C::ratio(1, 2)),
        (BasisTerm::f(1, 1), pm),
        (BasisTerm::f(2, 2), f22),
        (BasisTerm::f(3, 3), f33),
        (BasisTerm::theta(1, 1), t11),
        (BasisTerm::theta(2, 2), t22),
    ]))
}

/// Terms of polynomial degree at most four.
pub fn quartic_part<C: Coeff>(v: &LieElement<C>) -> LieElement<C> {
    v.filter(|t| t.poly_degree() <= 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::{q, qi, Q};

    fn el(terms: &[(BasisTerm, Q)]) -> LieElement<Q> {
        LieElement::from_terms(terms.iter().cloned())
    }

    #[test]
    fn second_level_removes_f01() {
        let v = el(&[(BasisTerm::theta(0, 0), qi(1)), (BasisTerm::f(-1, 0), qi(1)), (BasisTerm::f(0, 1), qi(1))]);
        let r = second_level(&v, 6).unwrap();
        assert!(r.output.iter().all(|(t, _)| Pattern::Second.keeps(t)));
        assert!(r.output.get(&BasisTerm::f(0, 1)).is_zero());
        assert!(conjugacy_check(&r));
    }

    #[test]
    fn diagonal_input_unchanged() {
        let v = el(&[
            (BasisTerm::theta(0, 0), qi(1)),
            (BasisTerm::f(-1, 0), q(1, 2)),
            (BasisTerm::f(1, 1), qi(1)),
            (BasisTerm::theta(1, 1), qi(1)),
        ]);
        let r = second_level(&v, 6).unwrap();
        assert_eq!(r.output, v);
        let r = infinite_level(&v, 8, &HyperOptions::default()).unwrap();
        assert_eq!(r.output, v);
        assert_eq!((r.p, r.q), (Some(1), Some(1)));
    }

    #[test]
    fn detects_p() {
        let v = el(&[(BasisTerm::theta(0, 0), qi(1)), (BasisTerm::f(-1, 0), q(1, 2)), (BasisTerm::f(3, 3), qi(1))]);
        assert_eq!(detect_p(&second_level(&v, 6).unwrap().output, 6), Ok(3));
        let d = el(&[(BasisTerm::theta(0, 0), qi(1)), (BasisTerm::f(-1, 0), q(1, 2)), (BasisTerm::f(1, 1), qi(1))]);
        assert_eq!(detect_q(&d, 6), Err(HyperError::QUndetected(6)));
    }

    #[test]
    fn rejects_missing_alpha0() {
        let v = el(&[(BasisTerm::theta(0, 0), qi(1)), (BasisTerm::theta(1, 2), qi(1))]);
        assert_eq!(second_level(&v, 4), Err(HyperError::ZeroAlpha0));
    }

    #[test]
    fn convert_identity() {
        for (m, n, p) in [(0, 1, 1), (1, 3, 1), (0, 3, 2), (2, 5, 3), (0, 4, 1)] {
            let alpha = q(3, 7);
            let (y, c, t) = eliminate_theta_offdiag::<Q>(m, n, p, &alpha).unwrap();
            let lhs = LieElement::term(BasisTerm::theta(m, n), qi(1)).add(&y.bracket(&principal(p, &alpha)));
            assert_eq!(lhs, LieElement::term(t, c), "(m,n,p)=({m},{n},{p})");
        }
        let (_, c, t) = eliminate_theta_offdiag::<Q>(0, 1, 1, &qi(1)).unwrap();
        assert_eq!((c, t), (qi(-1), BasisTerm::theta(2, 2)));
        assert!(eliminate_theta_offdiag::<Q>(2, 2, 1, &qi(1)).is_err());
    }

    #[test]
    fn kernel_families() {
        let alpha = q(2, 3);
        for p in 1..=3u32 {
            let x = principal(p as i32, &alpha);
            let fam = kernel_basis(p, &alpha, 14);
            for (k, e) in &fam.x {
                assert!(x.bracket(e).is_zero(), "X^{k}");
            }
            for (k, e) in &fam.f {
                let b = x.bracket(e);
                let d = (2 * k * (p + 1) + p - 1) as i32;
                assert_eq!(b.len(), 1, "F^-1_{k}");
                assert!(!b.get(&BasisTerm::f(d, d)).is_zero());
            }
            for (k, e) in &fam.t {
                let b = x.bracket(e);
                assert_eq!(b.is_zero(), k % 2 == 0, "T_{k}");
            }
        }
        assert_eq!(kernel_basis(1, &alpha, 14).x[0].1, principal(1, &alpha).scale(&qi(2)));
    }

    #[test]
    fn t2_matches_integral_shape() {
        let alpha = q(1, 3);
        let fam = kernel_basis(1, &alpha, 10);
        let t2 = &fam.t.iter().find(|(k, _)| *k == 2).unwrap().1;
        let want = el(&[(BasisTerm::theta(0, 2), qi(1)), (BasisTerm::theta(2, 3), q(2, 3))]);
        assert_eq!(*t2, want);
    }

    #[test]
    fn quartic_trivial_case() {
        let c = CubicData {
            am1_0: q(1, 2),
            a0_1: qi(0),
            a1_1: qi(1),
            a2_2: qi(0),
            b1_1: qi(0),
            b0_1: qi(5),
            b2_2: qi(0),
        };
        let v = quartic_closed_form(&c).unwrap();
        assert_eq!(v, el(&[(BasisTerm::theta(0, 0), qi(1)), (BasisTerm::f(-1, 0), q(1, 2)), (BasisTerm::f(1, 1), qi(1))]));
    }

    #[test]
    fn perturbed_report_fails_check() {
        let v = el(&[(BasisTerm::theta(0, 0), qi(1)), (BasisTerm::f(-1, 0), qi(1)), (BasisTerm::f(0, 1), qi(1))]);
        let mut r = second_level(&v, 5).unwrap();
        for s in r.steps.iter_mut() {
            if let Step::Generator { y, .. } = s {
                *y = y.scale(&q(11, 10));
                break;
            }
        }
        assert!(!conjugacy_check(&r));
    }

    #[test]
    fn report_json_round_trip() {
        let v = el(&[(BasisTerm::theta(0, 0), qi(1)), (BasisTerm::f(-1, 0), qi(1)), (BasisTerm::f(0, 1), qi(1)), (BasisTerm::f(1, 1), qi(2))]);
        let r = level_p_plus_1(&v, 6, &HyperOptions::default()).unwrap();
        let j = ReportJson::from_report(&r);
        assert!(j.first_integral.is_some());
        let text = serde_json::to_string(&j).unwrap();
        let back: ReportJson = serde_json::from_str(&text).unwrap();
        let r2 = back.to_report::<Q>().unwrap();
        assert_eq!(r2, r);
        assert!(conjugacy_check(&r2));
    }

    #[test]
    fn classic_grading_with_kernel_adds_nothing() {
        let v = crate::systems::rossler_cubic_nf_golden::<Q>(&qi(1)).unwrap();
        let n = 8;
        let weighted = level_p_plus_1(&v, n, &HyperOptions::default()).unwrap();
        let mut steps = Vec::new();
        let mut flags = Vec::new();
        let w = rescale_stage(&second_level(&v, n).unwrap().output, 1, &HyperOptions::default(), &mut steps).unwrap();
        let engine = Engine { grading: GradingSpec::Classic, g0: 0, cap: n, track_kernel: true };
        let classic = engine.run(w, Pattern::PPlus1 { p: 1 }, &mut steps, &mut flags).unwrap();
        // diagonal terms fixed by both truncations
        let fixed = |t: &BasisTerm| t.is_diagonal() && (t.kind == Kind::F || t.k + 2 <= n as i32);
        assert_eq!(classic.filter(fixed), weighted.output.filter(fixed));
    }
}
