//! Dense Gaussian elimination over any coefficient backend.
//!
//! Pivots are chosen by largest magnitude within a column, so the same code
//! serves exact and float backends. Zero tests go through `negligible`
//! relative to the largest entry of the input.

use crate::algebra::Coeff;

pub type Matrix<C> = Vec<Vec<C>>;

pub fn zeros<C: Coeff>(rows: usize, cols: usize) -> Matrix<C> {
    vec![vec![C::zero(); cols]; rows]
}

fn max_magnitude<C: Coeff>(a: &Matrix<C>) -> f64 {
    a.iter().flatten().map(|c| c.magnitude()).fold(0.0, f64::max)
}

/// Reduced row echelon form in place. Returns the pivot columns in order.
pub fn rref<C: Coeff>(a: &mut Matrix<C>) -> Vec<usize> {
    rref_with(a, None)
}

/// As [`rref`], but with an explicit relative threshold below which an
/// entry cannot be a pivot.
pub fn rref_with<C: Coeff>(a: &mut Matrix<C>, rel_tol: Option<f64>) -> Vec<usize> {
    let max = max_magnitude(a);
    let scale = max.max(1.0);
    let small = |c: &C| match rel_tol {
        Some(t) => c.is_zero() || c.magnitude() <= t * max,
        None => c.negligible(scale),
    };
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let best = (r..rows)
            .filter(|&i| !small(&a[i][c]))
            .max_by(|&i, &j| a[i][c].magnitude().total_cmp(&a[j][c].magnitude()));
        let Some(piv) = best else {
            for row in a.iter_mut().skip(r) {
                row[c] = C::zero();
            }
            continue;
        };
        a.swap(r, piv);
        let inv = C::one() / a[r][c].clone();
        for x in a[r].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        let pivot_row = a[r].clone();
        for (i, row) in a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row).skip(c) {
                if !p.is_zero() {
                    *x = x.clone() - f.clone() * p.clone();
                }
            }
            row[c] = C::zero();
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank<C: Coeff>(a: &Matrix<C>) -> usize {
    let mut m = a.clone();
    rref(&mut m).len()
}

pub fn rank_with_tol<C: Coeff>(a: &Matrix<C>, rel_tol: f64) -> usize {
    let mut m = a.clone();
    rref_with(&mut m, Some(rel_tol)).len()
}

/// Basis of the right null space `{x : A x = 0}`.
pub fn nullspace<C: Coeff>(a: &Matrix<C>, cols: usize) -> Vec<Vec<C>> {
    let mut m = a.clone();
    let pivots = rref(&mut m);
    let mut out = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![C::zero(); cols];
        v[free] = C::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -m[r][free].clone();
        }
        out.push(v);
    }
    out
}

/// Some solution of `A x = b` (free variables set to zero), or `None` if
/// the system is inconsistent.
pub fn solve<C: Coeff>(a: &Matrix<C>, b: &[C]) -> Option<Vec<C>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Matrix<C> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut m);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![C::zero(); cols];
    for (r, &pc) in pivots.iter().enumerate() {
        x[pc] = m[r][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::scalar::{qi, Q};

    fn m(rows: &[&[i64]]) -> Matrix<Q> {
        rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect()
    }

    #[test]
    fn rank_and_nullspace() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]]);
        assert_eq!(rank(&a), 2);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 1);
        for row in &a {
            let dot: Q = row.iter().zip(&ns[0]).map(|(x, y)| x * y).sum();
            assert_eq!(dot, qi(0));
        }
    }

    #[test]
    fn solve_consistent_and_not() {
        let a = m(&[&[1, 1], &[1, -1]]);
        assert_eq!(solve(&a, &[qi(3), qi(1)]).unwrap(), vec![qi(2), qi(1)]);
        let s = m(&[&[1, 1], &[2, 2]]);
        assert!(solve(&s, &[qi(1), qi(3)]).is_none());
    }
}
