//! Integer matrices, Smith normal form and finitely generated abelian groups.

mod snf;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::presentation::{GroupPresentation, Word};
use crate::primes::factorize;
use snf::{dense_snf, diagonal, sparse_invariants, Dense, Overflow};

/// Matrices whose nonzero density is below this go through the sparse
/// unit-pivot elimination before the dense Smith step.
pub const DEFAULT_SPARSE_DENSITY: f64 = 0.25;

/// Dense integer matrix with arbitrary-size entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    /// From `i64` rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R], cols: usize) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "row {i} has {} entries, expected {cols}", r.len());
            for (j, v) in r.iter().enumerate() {
                m.data[i * cols + j] = BigInt::from(*v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: impl Into<BigInt>) {
        self.data[r * self.cols + c] = v.into();
    }

    pub fn nonzeros(&self) -> usize {
        self.data.iter().filter(|v| !v.is_zero()).count()
    }

    pub fn density(&self) -> f64 {
        if self.data.is_empty() {
            0.0
        } else {
            self.nonzeros() as f64 / self.data.len() as f64
        }
    }

    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        out.data[i * rhs.cols + j] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a = self.data.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k * n + k].is_zero() {
                let Some(s) = (k + 1..n).find(|&i| !a[i * n + k].is_zero()) else {
                    return BigInt::zero();
                };
                for c in 0..n {
                    a.swap(k * n + c, s * n + c);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i * n + j] * &a[k * n + k] - &a[i * n + k] * &a[k * n + j];
                    a[i * n + j] = v / &prev;
                }
            }
            prev = a[k * n + k].clone();
        }
        sign * &a[n * n - 1]
    }

    /// Coordinate text: a `rows cols` header, then one `row col value` line
    /// (0-based) per nonzero entry. `#` starts a comment.
    pub fn to_coordinate_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if !v.is_zero() {
                    s.push_str(&format!("{i} {j} {v}\n"));
                }
            }
        }
        s
    }

    pub fn from_coordinate_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let parse_err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let (hn, header) = lines.next().ok_or_else(|| parse_err(0, "missing header"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(hn, "bad dimension")))
            .collect::<Result<_>>()?;
        let [rows, cols] = dims[..] else {
            return Err(parse_err(hn, "header must be `rows cols`"));
        };
        let mut m = IntMatrix::zeros(rows, cols);
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            let [r, c, v] = toks[..] else {
                return Err(parse_err(ln, "entry must be `row col value`"));
            };
            let r: usize = r.parse().map_err(|_| parse_err(ln, "bad row"))?;
            let c: usize = c.parse().map_err(|_| parse_err(ln, "bad column"))?;
            let v: BigInt = v.parse().map_err(|_| parse_err(ln, "bad value"))?;
            if r >= rows || c >= cols {
                return Err(parse_err(ln, "index out of range"));
            }
            m.set(r, c, v);
        }
        Ok(m)
    }

    fn to_dense<T: snf::Entry>(&self) -> Option<Dense<T>> {
        let data = self.data.iter().map(T::from_bigint).collect::<Option<Vec<T>>>()?;
        Some(Dense { rows: self.rows, cols: self.cols, data })
    }

    fn from_dense<T: snf::Entry>(d: &Dense<T>) -> Self {
        IntMatrix { rows: d.rows, cols: d.cols, data: d.data.iter().map(snf::Entry::to_bigint).collect() }
    }

    fn sparse_rows(&self) -> Option<Vec<Vec<(usize, i64)>>> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .filter(|&j| !self.get(i, j).is_zero())
                    .map(|j| self.get(i, j).to_i64().map(|v| (j, v)))
                    .collect()
            })
            .collect()
    }
}

/// `u · m · v = d` with `d` in Smith normal form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub d: IntMatrix,
    pub u: IntMatrix,
    pub v: IntMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

pub fn smith_normal_form(m: &IntMatrix) -> SmithForm {
    fn run<T: snf::Entry>(m: &IntMatrix) -> Result<SmithForm, Overflow> {
        let mut a = m.to_dense::<T>().ok_or(Overflow)?;
        let mut u = Dense::<T>::identity(m.rows);
        let mut v = Dense::<T>::identity(m.cols);
        dense_snf(&mut a, Some(&mut u), Some(&mut v))?;
        Ok(SmithForm {
            d: IntMatrix::from_dense(&a),
            u: IntMatrix::from_dense(&u),
            v: IntMatrix::from_dense(&v),
        })
    }
    run::<i64>(m).unwrap_or_else(|_| run::<BigInt>(m).expect("bigint elimination cannot overflow"))
}

/// A finitely generated abelian group `Z^r × Z_{d_1} × … × Z_{d_k}` with
/// `2 <= d_1 | d_2 | … | d_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbelianGroup {
    free_rank: usize,
    invariant_factors: Vec<BigUint>,
}

impl AbelianGroup {
    pub fn new(free_rank: usize, invariant_factors: Vec<BigUint>) -> Result<Self> {
        for w in invariant_factors.windows(2) {
            if !(&w[1] % &w[0]).is_zero() {
                return Err(Error::Config(format!("{} does not divide {}", w[0], w[1])));
            }
        }
        if invariant_factors.iter().any(|d| *d < BigUint::from(2u32)) {
            return Err(Error::Config("invariant factors must be at least 2".into()));
        }
        Ok(AbelianGroup { free_rank, invariant_factors })
    }

    pub fn trivial() -> Self {
        Self::default()
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup { free_rank: rank, invariant_factors: Vec::new() }
    }

    /// Finite group from an invariant-factor chain given as `u64`s.
    pub fn finite(chain: &[u64]) -> Result<Self> {
        Self::new(0, chain.iter().map(|&d| BigUint::from(d)).collect())
    }

    /// Any product of cyclic groups `Z_{n_1} × … × Z_{n_k} × Z^free_rank`;
    /// orders equal to 1 are ignored.
    pub fn from_cyclic_orders(orders: &[u64], free_rank: usize) -> Result<Self> {
        let mut powers = Vec::new();
        for &n in orders {
            if n == 0 {
                return Err(Error::Config("cyclic order 0".into()));
            }
            powers.extend(factorize(n).into_iter().map(|(p, e)| p.pow(e)));
        }
        canonicalize(&powers, free_rank)
    }

    /// From the nonzero part of a Smith diagonal plus the column count.
    fn from_smith_diagonal(diag: &[BigInt], cols: usize) -> Self {
        let nonzero: Vec<&BigInt> = diag.iter().filter(|d| !d.is_zero()).collect();
        let factors = nonzero
            .iter()
            .filter(|d| !d.magnitude().is_one())
            .map(|d| d.magnitude().clone())
            .collect();
        AbelianGroup { free_rank: cols - nonzero.len(), invariant_factors: factors }
    }

    pub fn free_rank(&self) -> usize {
        self.free_rank
    }

    pub fn invariant_factors(&self) -> &[BigUint] {
        &self.invariant_factors
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.invariant_factors.is_empty()
    }

    pub fn order(&self) -> Option<BigUint> {
        self.is_finite().then(|| self.invariant_factors.iter().product())
    }

    pub fn min_generators(&self) -> usize {
        min_generators(self)
    }

    /// Cyclic factors of prime-power order, ascending; `None` if some
    /// factor does not fit in `u64`.
    pub fn primary_decomposition(&self) -> Option<Vec<u64>> {
        let mut out = Vec::new();
        for d in &self.invariant_factors {
            let d = d.to_u64()?;
            out.extend(factorize(d).into_iter().map(|(p, e)| p.pow(e)));
        }
        out.sort_unstable();
        Some(out)
    }
}

/// Recombine prime-power cyclic orders into the invariant-factor chain.
pub fn canonicalize(prime_powers: &[u64], free_rank: usize) -> Result<AbelianGroup> {
    let mut by_prime: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &q in prime_powers {
        let f = factorize(q);
        if f.len() != 1 {
            return Err(Error::NotPrimePower(q));
        }
        by_prime.entry(f[0].0).or_default().push(q);
    }
    let len = by_prime.values().map(Vec::len).max().unwrap_or(0);
    let mut chain = vec![BigUint::one(); len];
    for powers in by_prime.values_mut() {
        powers.sort_unstable_by(|a, b| b.cmp(a));
        // Largest power goes into the last factor.
        for (k, q) in powers.iter().enumerate() {
            chain[len - 1 - k] *= BigUint::from(*q);
        }
    }
    AbelianGroup::new(free_rank, chain)
}

pub fn min_generators(g: &AbelianGroup) -> usize {
    g.free_rank + g.invariant_factors.len()
}

/// Renders the primary decomposition, e.g. `Z_2 x Z_3 x Z_8^2`, with free
/// part `Z^r` first; the trivial group is `0`.
impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        match self.primary_decomposition() {
            Some(primary) => {
                let mut i = 0;
                while i < primary.len() {
                    let n = primary[i..].iter().take_while(|&&x| x == primary[i]).count();
                    parts.push(if n == 1 {
                        format!("Z_{}", primary[i])
                    } else {
                        format!("Z_{}^{}", primary[i], n)
                    });
                    i += n;
                }
            }
            None => parts.extend(self.invariant_factors.iter().map(|d| format!("Z_{d}"))),
        }
        if parts.is_empty() {
            f.write_str("0")
        } else {
            f.write_str(&parts.join(" x "))
        }
    }
}

/// Parses the [`Display`](fmt::Display) form; `×` and `*` are accepted as
/// separators and cyclic orders need not be prime powers.
impl FromStr for AbelianGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |m: &str| Error::Parse { line: 0, msg: format!("{m}: `{s}`") };
        let s = s.trim();
        if s == "0" || s == "1" || s.is_empty() {
            return Ok(AbelianGroup::trivial());
        }
        let mut orders = Vec::new();
        let mut free = 0usize;
        for part in s.split(['x', '×', '*']).map(str::trim) {
            let (base, mult) = match part.split_once('^') {
                Some((b, m)) => (b.trim(), m.trim().parse::<usize>().map_err(|_| bad("bad exponent"))?),
                None => (part, 1),
            };
            if base == "Z" {
                free += mult;
                continue;
            }
            let n = base
                .strip_prefix("Z_")
                .or_else(|| base.strip_prefix('Z'))
                .ok_or_else(|| bad("expected Z_n"))?
                .parse::<u64>()
                .map_err(|_| bad("bad cyclic order"))?;
            orders.extend(std::iter::repeat_n(n, mult));
        }
        AbelianGroup::from_cyclic_orders(&orders, free)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FactorRepr {
    Small(u64),
    Big(String),
}

#[derive(Serialize, Deserialize)]
struct GroupRepr {
    free_rank: usize,
    invariant_factors: Vec<FactorRepr>,
}

impl Serialize for AbelianGroup {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GroupRepr {
            free_rank: self.free_rank,
            invariant_factors: self
                .invariant_factors
                .iter()
                .map(|d| d.to_u64().map_or_else(|| FactorRepr::Big(d.to_string()), FactorRepr::Small))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for AbelianGroup {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GroupRepr::deserialize(d)?;
        let factors = repr
            .invariant_factors
            .into_iter()
            .map(|f| match f {
                FactorRepr::Small(n) => Ok(BigUint::from(n)),
                FactorRepr::Big(s) => s.parse::<BigUint>().map_err(serde::de::Error::custom),
            })
            .collect::<std::result::Result<Vec<_>, _>>()?;
        AbelianGroup::new(repr.free_rank, factors).map_err(serde::de::Error::custom)
    }
}

/// Invariants of `Z^n / rowspace(m)`.
pub fn abelian_invariants(m: &IntMatrix, n_generators: usize) -> AbelianGroup {
    abelian_invariants_with(m, n_generators, DEFAULT_SPARSE_DENSITY)
}

pub fn abelian_invariants_with(m: &IntMatrix, n_generators: usize, sparse_density: f64) -> AbelianGroup {
    assert_eq!(m.cols, n_generators, "relation matrix has {} columns, expected {n_generators}", m.cols);
    if m.density() < sparse_density {
        if let Some(rows) = m.sparse_rows() {
            return abelian_invariants_sparse(&rows, n_generators);
        }
    }
    fn run<T: snf::Entry>(m: &IntMatrix) -> Result<Vec<BigInt>, Overflow> {
        let mut a = m.to_dense::<T>().ok_or(Overflow)?;
        dense_snf(&mut a, None, None)?;
        Ok(diagonal(&a).iter().map(snf::Entry::to_bigint).collect())
    }
    let diag = run::<i64>(m).unwrap_or_else(|_| run::<BigInt>(m).expect("bigint elimination cannot overflow"));
    AbelianGroup::from_smith_diagonal(&diag, n_generators)
}

/// Invariants of `Z^cols` modulo the given sparse rows.
pub fn abelian_invariants_sparse(rows: &[Vec<(usize, i64)>], cols: usize) -> AbelianGroup {
    let red = sparse_invariants::<i64>(rows, cols)
        .or_else(|_| sparse_invariants::<BigInt>(rows, cols))
        .expect("bigint elimination cannot overflow");
    debug_assert_eq!(red.rank, red.diagonal.len());
    AbelianGroup::from_smith_diagonal(&red.diagonal, cols)
}

/// Where each generator of a presentation lands in the canonical
/// decomposition `Z_{d_1} × … × Z_{d_k} × Z^r` of its abelianization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianizationMap {
    target: AbelianGroup,
    images: Vec<Vec<BigInt>>,
}

impl AbelianizationMap {
    pub fn target(&self) -> &AbelianGroup {
        &self.target
    }

    /// Coordinates of generator `g`: torsion coordinates reduced into
    /// `[0, d_i)`, then free coordinates.
    pub fn generator_image(&self, g: usize) -> &[BigInt] {
        &self.images[g]
    }

    pub fn generator_images(&self) -> &[Vec<BigInt>] {
        &self.images
    }

    pub fn word_image(&self, w: &Word) -> Vec<BigInt> {
        let k = self.target.invariant_factors.len() + self.target.free_rank;
        let mut acc = vec![BigInt::zero(); k];
        for l in w.letters() {
            for (a, x) in acc.iter_mut().zip(&self.images[l.generator]) {
                if l.inverse {
                    *a -= x;
                } else {
                    *a += x;
                }
            }
        }
        self.reduce(&mut acc);
        acc
    }

    fn reduce(&self, v: &mut [BigInt]) {
        for (x, d) in v.iter_mut().zip(&self.target.invariant_factors) {
            *x = x.mod_floor(&BigInt::from(d.clone()));
        }
    }
}

/// Relation matrix (one row of exponent sums per relator), its abelian
/// invariants, and the generator images read off the column transform.
pub fn abelianize_presentation(p: &GroupPresentation) -> (AbelianGroup, AbelianizationMap) {
    let n = p.generator_count();
    let m = p.relation_matrix();

    fn run<T: snf::Entry>(m: &IntMatrix) -> Result<(Vec<BigInt>, IntMatrix), Overflow> {
        let mut a = m.to_dense::<T>().ok_or(Overflow)?;
        let mut v = Dense::<T>::identity(m.cols);
        dense_snf(&mut a, None, Some(&mut v))?;
        Ok((diagonal(&a).iter().map(snf::Entry::to_bigint).collect(), IntMatrix::from_dense(&v)))
    }
    let (diag, v) =
        run::<i64>(&m).unwrap_or_else(|_| run::<BigInt>(&m).expect("bigint elimination cannot overflow"));

    let group = AbelianGroup::from_smith_diagonal(&diag, n);
    // Column c of the Smith form is a unit (dropped), a torsion factor or free.
    let kept: Vec<usize> = (0..n)
        .filter(|&c| diag.get(c).is_none_or(|d| !d.magnitude().is_one()))
        .collect();
    debug_assert_eq!(kept.len(), min_generators(&group));
    let mut map = AbelianizationMap { target: group.clone(), images: Vec::with_capacity(n) };
    let images = (0..n)
        .map(|g| {
            let mut img: Vec<BigInt> = kept.iter().map(|&c| v.get(g, c).clone()).collect();
            map.reduce(&mut img);
            img
        })
        .collect();
    map.images = images;
    (group, map)
}
