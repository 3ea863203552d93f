//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use quatgroups::Quaternion;

/// Determinant by cofactor expansion.
pub fn det(m: &[Vec<i64>]) -> i128 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0] as i128;
    }
    (0..n)
        .map(|j| {
            let minor: Vec<Vec<i64>> =
                m[1..].iter().map(|row| row.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect()).collect();
            let sign = if j % 2 == 0 { 1 } else { -1 };
            sign * m[0][j] as i128 * det(&minor)
        })
        .sum()
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if n < k {
        return Vec::new();
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Invariant factors (zeros for the free part, trailing) from the gcds of
/// the k×k minors: `d_k = D_k / D_(k-1)`.
pub fn minor_gcd_diagonal(m: &[Vec<i64>], cols: usize) -> Vec<BigInt> {
    let rows = m.len();
    let mut prev = BigInt::from(1);
    let mut out = Vec::new();
    for k in 1..=rows.min(cols) {
        let mut g = BigInt::zero();
        for rs in subsets(rows, k) {
            for cs in subsets(cols, k) {
                let sub: Vec<Vec<i64>> = rs.iter().map(|&r| cs.iter().map(|&c| m[r][c]).collect()).collect();
                g = g.gcd(&BigInt::from(det(&sub)));
            }
        }
        if g.is_zero() {
            out.extend(std::iter::repeat_n(BigInt::zero(), rows.min(cols) - out.len()));
            break;
        }
        out.push(&g / &prev);
        prev = g;
    }
    out.iter().map(|d| d.abs()).collect()
}

/// Number of `(y', x') ∈ X_l × X_p` with `x·y = ±y'·x'`, counting each sign,
/// found by scanning `y'` (`x' = conj(y')·x·y / l`).
pub fn count_factorizations(x: &Quaternion, y: &Quaternion, xp: &[Quaternion], xl: &[Quaternion], l: i64) -> usize {
    let prod = *x * *y;
    let mut n = 0;
    for yc in xl {
        let t = yc.conj() * prod;
        if t.coords().iter().any(|c| c % l != 0) {
            continue;
        }
        let xc = t.map(|c| c / l);
        n += xp.contains(&xc) as usize + xp.contains(&-xc) as usize;
    }
    n
}
