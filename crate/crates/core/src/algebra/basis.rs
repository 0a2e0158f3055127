use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Kind {
    F,
    #[serde(rename = "Theta")]
    Theta,
}

/// `F^l_k` or `Θ^l_k`.
///
/// `F^l_k = x^l u^{k-l} ((k-l+1) x∂x - (l+1)/2 (y∂y + z∂z))` for `-1 <= l <= k`,
/// `Θ^l_k = x^l u^{k-l} (z∂y - y∂z)` for `0 <= l <= k`, with `u = y^2 + z^2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BasisTerm {
    pub kind: Kind,
    pub l: i32,
    pub k: i32,
}

impl BasisTerm {
    pub fn f(l: i32, k: i32) -> Self {
        let t = BasisTerm { kind: Kind::F, l, k };
        debug_assert!(t.is_valid(), "invalid term {t}");
        t
    }

    pub fn theta(l: i32, k: i32) -> Self {
        let t = BasisTerm { kind: Kind::Theta, l, k };
        debug_assert!(t.is_valid(), "invalid term {t}");
        t
    }

    pub fn new(kind: Kind, l: i32, k: i32) -> Option<Self> {
        let t = BasisTerm { kind, l, k };
        t.is_valid().then_some(t)
    }

    pub fn is_valid(&self) -> bool {
        match self.kind {
            Kind::F => -1 <= self.l && self.l <= self.k,
            Kind::Theta => 0 <= self.l && self.l <= self.k,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.l == self.k
    }

    /// Total polynomial degree of the expanded field, `2k - l + 1`.
    pub fn poly_degree(&self) -> i32 {
        2 * self.k - self.l + 1
    }

    /// All valid terms with lower index `k`.
    pub fn with_lower(k: i32) -> impl Iterator<Item = BasisTerm> {
        let fs = (-1..=k).map(move |l| BasisTerm { kind: Kind::F, l, k });
        let ts = (0..=k).map(move |l| BasisTerm { kind: Kind::Theta, l, k });
        fs.chain(ts)
    }
}

impl Ord for BasisTerm {
    fn cmp(&self, o: &Self) -> Ordering {
        (self.k, self.kind, self.l).cmp(&(o.k, o.kind, o.l))
    }
}

impl PartialOrd for BasisTerm {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for BasisTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            Kind::F => "F",
            Kind::Theta => "Theta",
        };
        write!(f, "{name}^{}_{}", self.l, self.k)
    }
}
