//! Smith normal form over the integers.
//!
//! The elimination is generic over [`Entry`]: it first runs on checked `i64`
//! and is replayed on `BigInt` only when an intermediate overflows.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Overflow;

pub(crate) type Checked<T> = Result<T, Overflow>;

pub(crate) trait Entry: Clone + PartialEq + Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    fn from_bigint(v: &BigInt) -> Option<Self>;
    fn to_bigint(&self) -> BigInt;
    fn is_zero(&self) -> bool;
    fn is_unit(&self) -> bool;
    fn is_negative(&self) -> bool;
    fn abs_lt(&self, other: &Self) -> bool;
    fn add(&self, other: &Self) -> Checked<Self>;
    fn sub(&self, other: &Self) -> Checked<Self>;
    fn mul(&self, other: &Self) -> Checked<Self>;
    fn neg(&self) -> Checked<Self>;
    /// Floor quotient.
    fn quo(&self, other: &Self) -> Checked<Self>;
    /// `self | other`.
    fn divides(&self, other: &Self) -> bool;
}

impl Entry for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_i64(v: i64) -> Self {
        v
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        v.to_i64()
    }
    fn to_bigint(&self) -> BigInt {
        BigInt::from(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn is_unit(&self) -> bool {
        *self == 1 || *self == -1
    }
    fn is_negative(&self) -> bool {
        *self < 0
    }
    fn abs_lt(&self, other: &Self) -> bool {
        self.unsigned_abs() < other.unsigned_abs()
    }
    fn add(&self, other: &Self) -> Checked<Self> {
        self.checked_add(*other).ok_or(Overflow)
    }
    fn sub(&self, other: &Self) -> Checked<Self> {
        self.checked_sub(*other).ok_or(Overflow)
    }
    fn mul(&self, other: &Self) -> Checked<Self> {
        self.checked_mul(*other).ok_or(Overflow)
    }
    fn neg(&self) -> Checked<Self> {
        self.checked_neg().ok_or(Overflow)
    }
    fn quo(&self, other: &Self) -> Checked<Self> {
        if *self == i64::MIN && *other == -1 {
            return Err(Overflow);
        }
        Ok(Integer::div_floor(self, other))
    }
    fn divides(&self, other: &Self) -> bool {
        if *self == 0 {
            *other == 0
        } else {
            other.checked_rem(*self).is_none_or(|r| r == 0)
        }
    }
}

impl Entry for BigInt {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigInt::from(v)
    }
    fn from_bigint(v: &BigInt) -> Option<Self> {
        Some(v.clone())
    }
    fn to_bigint(&self) -> BigInt {
        self.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn is_unit(&self) -> bool {
        self.magnitude().is_one()
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
    fn abs_lt(&self, other: &Self) -> bool {
        self.magnitude() < other.magnitude()
    }
    fn add(&self, other: &Self) -> Checked<Self> {
        Ok(self + other)
    }
    fn sub(&self, other: &Self) -> Checked<Self> {
        Ok(self - other)
    }
    fn mul(&self, other: &Self) -> Checked<Self> {
        Ok(self * other)
    }
    fn neg(&self) -> Checked<Self> {
        Ok(-self)
    }
    fn quo(&self, other: &Self) -> Checked<Self> {
        Ok(Integer::div_floor(self, other))
    }
    fn divides(&self, other: &Self) -> bool {
        if Zero::is_zero(self) {
            Zero::is_zero(other)
        } else {
            Zero::is_zero(&(other % self))
        }
    }
}

/// Row-major dense matrix used by the elimination.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Dense<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Entry> Dense<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Dense { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    #[inline]
    fn at_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.cols + c]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + a, r * self.cols + b);
        }
    }

    /// `row[dst] -= f * row[src]`, skipping columns before `from`.
    fn row_axpy(&mut self, dst: usize, src: usize, f: &T, from: usize) -> Checked<()> {
        for c in from..self.cols {
            let s = self.at(src, c);
            if s.is_zero() {
                continue;
            }
            let v = self.at(dst, c).sub(&f.mul(s)?)?;
            *self.at_mut(dst, c) = v;
        }
        Ok(())
    }

    /// `col[dst] -= f * col[src]`, skipping rows before `from`.
    fn col_axpy(&mut self, dst: usize, src: usize, f: &T, from: usize) -> Checked<()> {
        for r in from..self.rows {
            let s = self.at(r, src);
            if s.is_zero() {
                continue;
            }
            let v = self.at(r, dst).sub(&f.mul(s)?)?;
            *self.at_mut(r, dst) = v;
        }
        Ok(())
    }

    fn negate_row(&mut self, r: usize) -> Checked<()> {
        for c in 0..self.cols {
            let v = self.at(r, c).neg()?;
            *self.at_mut(r, c) = v;
        }
        Ok(())
    }
}

/// In-place Smith normal form with optional transforms.
///
/// On success `u·a₀·v = a` with `a` diagonal, non-negative and forming a
/// divisibility chain. `u` must start as the `rows×rows` identity and `v` as
/// the `cols×cols` identity.
pub(crate) fn dense_snf<T: Entry>(
    a: &mut Dense<T>,
    mut u: Option<&mut Dense<T>>,
    mut v: Option<&mut Dense<T>>,
) -> Checked<()> {
    let (m, n) = (a.rows, a.cols);
    for t in 0..m.min(n) {
        let Some((pi, pj)) = min_entry(a, (t..m).flat_map(|i| (t..n).map(move |j| (i, j))))
        else {
            break;
        };
        swap_rows(a, &mut u, t, pi);
        swap_cols(a, &mut v, t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..m {
                if a.at(i, t).is_zero() {
                    continue;
                }
                let f = a.at(i, t).quo(a.at(t, t))?;
                a.row_axpy(i, t, &f, t)?;
                if let Some(u) = u.as_deref_mut() {
                    u.row_axpy(i, t, &f, 0)?;
                }
                clean &= a.at(i, t).is_zero();
            }
            for j in t + 1..n {
                if a.at(t, j).is_zero() {
                    continue;
                }
                let f = a.at(t, j).quo(a.at(t, t))?;
                a.col_axpy(j, t, &f, t)?;
                if let Some(v) = v.as_deref_mut() {
                    v.col_axpy(j, t, &f, 0)?;
                }
                clean &= a.at(t, j).is_zero();
            }
            if !clean {
                let cross = (t..m).map(|i| (i, t)).chain((t + 1..n).map(|j| (t, j)));
                let (pi, pj) = min_entry(a, cross).expect("pivot is nonzero");
                swap_rows(a, &mut u, t, pi);
                swap_cols(a, &mut v, t, pj);
                continue;
            }
            // Row and column are clear; enforce d_t | every remaining entry.
            let piv = a.at(t, t).clone();
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !piv.divides(a.at(i, j))));
            match bad {
                Some(i) => {
                    let minus_one = T::from_i64(-1);
                    a.row_axpy(t, i, &minus_one, t)?;
                    if let Some(u) = u.as_deref_mut() {
                        u.row_axpy(t, i, &minus_one, 0)?;
                    }
                }
                None => break,
            }
        }
        if a.at(t, t).is_negative() {
            a.negate_row(t)?;
            if let Some(u) = u.as_deref_mut() {
                u.negate_row(t)?;
            }
        }
    }
    Ok(())
}

fn min_entry<T: Entry>(
    a: &Dense<T>,
    cells: impl Iterator<Item = (usize, usize)>,
) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, j) in cells {
        let x = a.at(i, j);
        if x.is_zero() {
            continue;
        }
        match best {
            Some((bi, bj)) if !x.abs_lt(a.at(bi, bj)) => {}
            _ => {
                if x.is_unit() {
                    return Some((i, j));
                }
                best = Some((i, j));
            }
        }
    }
    best
}

fn swap_rows<T: Entry>(a: &mut Dense<T>, u: &mut Option<&mut Dense<T>>, x: usize, y: usize) {
    a.swap_rows(x, y);
    if let Some(u) = u.as_deref_mut() {
        u.swap_rows(x, y);
    }
}

fn swap_cols<T: Entry>(a: &mut Dense<T>, v: &mut Option<&mut Dense<T>>, x: usize, y: usize) {
    a.swap_cols(x, y);
    if let Some(v) = v.as_deref_mut() {
        v.swap_cols(x, y);
    }
}

/// Diagonal of a matrix already in Smith form.
pub(crate) fn diagonal<T: Entry>(a: &Dense<T>) -> Vec<T> {
    (0..a.rows.min(a.cols)).map(|i| a.at(i, i).clone()).collect()
}

/// Outcome of an invariants-only reduction: the number of unit pivots taken
/// plus the nonzero diagonal of the remaining block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Reduced {
    pub rank: usize,
    /// Nonzero Smith diagonal entries, including units, in chain order.
    pub diagonal: Vec<BigInt>,
}

/// Smith invariants of a sparse integer matrix, without transforms.
///
/// Unit pivots are eliminated first (shortest row, then sparsest column);
/// whatever survives is handed to the dense routine.
pub(crate) fn sparse_invariants<T: Entry>(
    input: &[Vec<(usize, i64)>],
    cols: usize,
) -> Checked<Reduced> {
    let mut rows: Vec<Vec<(usize, T)>> = Vec::with_capacity(input.len());
    for r in input {
        let mut row: Vec<(usize, T)> = Vec::with_capacity(r.len());
        let mut sorted = r.clone();
        sorted.sort_by_key(|e| e.0);
        for (c, v) in sorted {
            assert!(c < cols, "column {c} out of range");
            match row.last_mut() {
                Some((lc, lv)) if *lc == c => *lv = lv.add(&T::from_i64(v))?,
                _ => row.push((c, T::from_i64(v))),
            }
        }
        row.retain(|(_, v)| !v.is_zero());
        rows.push(row);
    }

    let mut col_rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); cols];
    let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
    for (ri, row) in rows.iter().enumerate() {
        for (c, _) in row {
            col_rows[*c].insert(ri);
        }
        if row.iter().any(|(_, v)| v.is_unit()) {
            candidates.insert((row.len(), ri));
        }
    }
    let mut alive = vec![true; rows.len()];
    let mut units = 0usize;

    while let Some((_, r)) = candidates.pop_first() {
        let (pc, pv) = rows[r]
            .iter()
            .filter(|(_, v)| v.is_unit())
            .min_by_key(|(c, _)| (col_rows[*c].len(), *c))
            .map(|(c, v)| (*c, v.clone()))
            .expect("candidate rows hold a unit");
        let pivot_row = std::mem::take(&mut rows[r]);
        let others: Vec<usize> = col_rows[pc].iter().copied().filter(|&i| i != r).collect();
        for i in others {
            let coeff = rows[i]
                .iter()
                .find(|(c, _)| *c == pc)
                .map(|(_, v)| v.clone())
                .expect("column index is consistent");
            // pv is ±1, so pv is its own inverse.
            let f = coeff.mul(&pv)?;
            let old_len = rows[i].len();
            let had_unit = rows[i].iter().any(|(_, v)| v.is_unit());
            let merged = axpy_sparse(&rows[i], &pivot_row, &f)?;
            for (c, _) in &rows[i] {
                col_rows[*c].remove(&i);
            }
            for (c, _) in &merged {
                col_rows[*c].insert(i);
            }
            if had_unit {
                candidates.remove(&(old_len, i));
            }
            if merged.iter().any(|(_, v)| v.is_unit()) {
                candidates.insert((merged.len(), i));
            }
            rows[i] = merged;
        }
        for (c, _) in &pivot_row {
            col_rows[*c].remove(&r);
        }
        alive[r] = false;
        units += 1;
    }

    // Dense remainder over the surviving columns, with duplicate rows removed.
    let live_cols: Vec<usize> = (0..cols).filter(|&c| !col_rows[c].is_empty()).collect();
    let mut col_pos = vec![usize::MAX; cols];
    for (k, &c) in live_cols.iter().enumerate() {
        col_pos[c] = k;
    }
    let mut seen: HashSet<Vec<(usize, BigInt)>> = HashSet::new();
    let mut keep: Vec<usize> = Vec::new();
    for (ri, row) in rows.iter().enumerate() {
        if !alive[ri] || row.is_empty() {
            continue;
        }
        let neg = row[0].1.is_negative();
        let key: Vec<(usize, BigInt)> = row
            .iter()
            .map(|(c, v)| (*c, if neg { -v.to_bigint() } else { v.to_bigint() }))
            .collect();
        if seen.insert(key) {
            keep.push(ri);
        }
    }
    let mut dense = Dense::<T>::zeros(keep.len(), live_cols.len());
    for (k, &ri) in keep.iter().enumerate() {
        for (c, v) in &rows[ri] {
            *dense.at_mut(k, col_pos[*c]) = v.clone();
        }
    }
    dense_snf(&mut dense, None, None)?;
    let mut diagonal_entries = vec![<BigInt as One>::one(); units];
    diagonal_entries.extend(
        diagonal(&dense)
            .into_iter()
            .filter(|d| !d.is_zero())
            .map(|d| d.to_bigint()),
    );
    Ok(Reduced { rank: diagonal_entries.len(), diagonal: diagonal_entries })
}

fn axpy_sparse<T: Entry>(
    dst: &[(usize, T)],
    src: &[(usize, T)],
    f: &T,
) -> Checked<Vec<(usize, T)>> {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let (mut a, mut b) = (0, 0);
    while a < dst.len() || b < src.len() {
        let ca = dst.get(a).map_or(usize::MAX, |e| e.0);
        let cb = src.get(b).map_or(usize::MAX, |e| e.0);
        if ca < cb {
            out.push(dst[a].clone());
            a += 1;
        } else if cb < ca {
            out.push((cb, f.mul(&src[b].1)?.neg()?));
            b += 1;
        } else {
            let v = dst[a].1.sub(&f.mul(&src[b].1)?)?;
            if !v.is_zero() {
                out.push((ca, v));
            }
            a += 1;
            b += 1;
        }
    }
    Ok(out)
}
