use serde::{Deserialize, Serialize};

use super::basis::{BasisTerm, Kind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GradingSpec {
    /// `δ = k`
    Classic,
    /// `δ(F^l_k) = p(k-l)+k`, `δ(Θ^l_k) = p(k-l)+k+p+1`
    Weighted { p: u32 },
    /// Weighted grading; the parameter part `(p+q+3)|m|` is added by
    /// [`crate::parametric::param_grade`].
    Parametric { p: u32, q: u32 },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("invalid grading: {0}")]
pub struct GradingError(pub String);

impl GradingSpec {
    pub fn weighted(p: u32) -> Result<Self, GradingError> {
        if p < 1 {
            return Err(GradingError("weighted grading needs p >= 1".into()));
        }
        Ok(GradingSpec::Weighted { p })
    }

    pub fn parametric(p: u32, q: u32) -> Result<Self, GradingError> {
        if p < 1 || q < 1 {
            return Err(GradingError("parametric grading needs p, q >= 1".into()));
        }
        Ok(GradingSpec::Parametric { p, q })
    }

    pub fn grade(&self, t: &BasisTerm) -> i64 {
        let (l, k) = (t.l as i64, t.k as i64);
        match *self {
            GradingSpec::Classic => k,
            GradingSpec::Weighted { p } | GradingSpec::Parametric { p, .. } => {
                let p = p as i64;
                let base = p * (k - l) + k;
                match t.kind {
                    Kind::F => base,
                    Kind::Theta => base + p + 1,
                }
            }
        }
    }

    /// Every valid term of grade exactly `g`.
    pub fn terms_of_grade(&self, g: i64) -> Vec<BasisTerm> {
        let mut out = Vec::new();
        if g < 0 {
            return out;
        }
        match *self {
            GradingSpec::Classic => out.extend(BasisTerm::with_lower(g as i32)),
            GradingSpec::Weighted { p } | GradingSpec::Parametric { p, .. } => {
                let p = p as i64;
                // grade >= k for every term, so k ranges over 0..=g
                for k in 0..=g {
                    // F: p(k-l)+k = g  =>  k-l = (g-k)/p
                    if (g - k) % p == 0 {
                        let l = k - (g - k) / p;
                        if let Some(t) = BasisTerm::new(Kind::F, l as i32, k as i32) {
                            out.push(t);
                        }
                    }
                    let r = g - k - p - 1;
                    if r >= 0 && r % p == 0 {
                        let l = k - r / p;
                        if let Some(t) = BasisTerm::new(Kind::Theta, l as i32, k as i32) {
                            out.push(t);
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_values() {
        let w1 = GradingSpec::weighted(1).unwrap();
        assert_eq!(GradingSpec::Classic.grade(&BasisTerm::f(0, 1)), 1);
        assert_eq!(w1.grade(&BasisTerm::f(-1, 0)), 1);
        assert_eq!(w1.grade(&BasisTerm::f(1, 1)), 1);
        assert_eq!(w1.grade(&BasisTerm::theta(0, 0)), 2);
        assert!(GradingSpec::weighted(0).is_err());
        assert!(GradingSpec::parametric(1, 0).is_err());
    }

    #[test]
    fn terms_of_grade_matches_filter() {
        for spec in [GradingSpec::Classic, GradingSpec::Weighted { p: 1 }, GradingSpec::Weighted { p: 3 }] {
            for g in 0..14 {
                let listed = spec.terms_of_grade(g);
                let mut brute: Vec<_> = (0..=g as i32)
                    .flat_map(BasisTerm::with_lower)
                    .filter(|t| spec.grade(t) == g)
                    .collect();
                brute.sort();
                assert_eq!(listed, brute, "{spec:?} grade {g}");
            }
        }
    }
}
