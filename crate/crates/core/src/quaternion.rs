//! Integer Hamilton quaternions and the generating sets `X_q`, `Y_q`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Mul, Neg};

use num_traits::{Num, Signed};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::primes::is_odd_prime;

/// `re + i·i + j·j + k·k` with integer coefficients.
///
/// Generic over the coefficient ring so that sweeps beyond machine words can
/// run on `BigInt`; the default `i64` covers every norm set built here.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quaternion<T = i64> {
    pub re: T,
    pub i: T,
    pub j: T,
    pub k: T,
}

impl<T> Quaternion<T> {
    pub const fn new(re: T, i: T, j: T, k: T) -> Self {
        Quaternion { re, i, j, k }
    }
}

impl<T: Clone + Num + Neg<Output = T>> Quaternion<T> {
    pub fn one() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    pub fn scalar(s: T) -> Self {
        Self::new(s, T::zero(), T::zero(), T::zero())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.i.clone(), -self.j.clone(), -self.k.clone())
    }

    /// `x·conj(x)`, the sum of squares of the coefficients.
    pub fn norm(&self) -> T {
        let sq = |a: &T| a.clone() * a.clone();
        sq(&self.re) + sq(&self.i) + sq(&self.j) + sq(&self.k)
    }

    pub fn is_real(&self) -> bool {
        self.i.is_zero() && self.j.is_zero() && self.k.is_zero()
    }

    /// Hamilton product `self · rhs`.
    pub fn mul_ref(&self, rhs: &Self) -> Self {
        let (a0, a1, a2, a3) = (&self.re, &self.i, &self.j, &self.k);
        let (b0, b1, b2, b3) = (&rhs.re, &rhs.i, &rhs.j, &rhs.k);
        let m = |x: &T, y: &T| x.clone() * y.clone();
        Self::new(
            m(a0, b0) - m(a1, b1) - m(a2, b2) - m(a3, b3),
            m(a0, b1) + m(a1, b0) + m(a2, b3) - m(a3, b2),
            m(a0, b2) - m(a1, b3) + m(a2, b0) + m(a3, b1),
            m(a0, b3) + m(a1, b2) - m(a2, b1) + m(a3, b0),
        )
    }

    /// Whether `xy = yx`, tested as a vanishing cross product of the
    /// imaginary parts.
    pub fn commutes(&self, other: &Self) -> bool {
        let m = |x: &T, y: &T| x.clone() * y.clone();
        let c1 = m(&self.j, &other.k) - m(&self.k, &other.j);
        let c2 = m(&self.k, &other.i) - m(&self.i, &other.k);
        let c3 = m(&self.i, &other.j) - m(&self.j, &other.i);
        let r = c1.is_zero() && c2.is_zero() && c3.is_zero();
        debug_assert_eq!(r, self.mul_ref(other) == other.mul_ref(self));
        r
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> Quaternion<U> {
        Quaternion::new(f(&self.re), f(&self.i), f(&self.j), f(&self.k))
    }

    pub fn coords(&self) -> [T; 4] {
        [self.re.clone(), self.i.clone(), self.j.clone(), self.k.clone()]
    }
}

impl<T: Clone + Num + Neg<Output = T>> Mul for Quaternion<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_ref(&rhs)
    }
}

impl<T: Clone + Num + Neg<Output = T>> Mul for &Quaternion<T> {
    type Output = Quaternion<T>;
    fn mul(self, rhs: Self) -> Quaternion<T> {
        self.mul_ref(rhs)
    }
}

impl<T: Neg<Output = T>> Neg for Quaternion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Quaternion::new(-self.re, -self.i, -self.j, -self.k)
    }
}

impl<T: Clone + Signed + fmt::Display> fmt::Display for Quaternion<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (c, unit) in [(&self.re, ""), (&self.i, "i"), (&self.j, "j"), (&self.k, "k")] {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if c.is_negative() {
                f.write_str("-")?;
            } else if wrote {
                f.write_str("+")?;
            }
            if !(mag.is_one() && !unit.is_empty()) {
                write!(f, "{}", mag)?;
            }
            f.write_str(unit)?;
            wrote = true;
        }
        if !wrote {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Quaternion<i64> {
    /// The representative of `{x, -x, conj(x), -conj(x)}` with positive real
    /// part whose first nonzero imaginary coefficient is positive.
    pub fn orbit_representative(&self) -> Self {
        let pos = if self.re < 0 { -*self } else { *self };
        let first = [pos.i, pos.j, pos.k].into_iter().find(|&c| c != 0);
        match first {
            Some(c) if c < 0 => pos.conj(),
            _ => pos,
        }
    }

    /// `x` or `-x`, whichever has non-negative real part.
    pub fn sign_normalized(&self) -> Self {
        if self.re < 0 {
            -*self
        } else {
            *self
        }
    }
}

/// The set `X_q` of integer quaternions of norm `q` with the parity
/// normalization: `x0` odd for `q = 1 mod 4`, `x1` even for `q = 3 mod 4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormSet {
    q: u64,
    elements: Vec<Quaternion>,
}

impl NormSet {
    /// Exhaustive scan of the lattice sphere of radius `sqrt(q)`.
    pub fn enumerate(q: u64) -> Result<Self> {
        if !is_odd_prime(q) {
            return Err(Error::NotOddPrime(q));
        }
        let q = q as i64;
        let r = (q as f64).sqrt() as i64 + 1;
        let mut elements = Vec::with_capacity(2 * (q as usize + 1));
        for x0 in -r..=r {
            let s0 = x0 * x0;
            if s0 > q {
                continue;
            }
            for x1 in -r..=r {
                let s1 = s0 + x1 * x1;
                if s1 > q {
                    continue;
                }
                for x2 in -r..=r {
                    let s2 = s1 + x2 * x2;
                    if s2 > q {
                        continue;
                    }
                    let rest = q - s2;
                    let x3 = isqrt(rest);
                    if x3 * x3 != rest {
                        continue;
                    }
                    let mut push = |x3: i64| {
                        let z = Quaternion::new(x0, x1, x2, x3);
                        if parity_ok(q as u64, &z) {
                            elements.push(z);
                        }
                    };
                    push(x3);
                    if x3 != 0 {
                        push(-x3);
                    }
                }
            }
        }
        elements.sort();
        Ok(NormSet { q: q as u64, elements })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn residue_class(&self) -> u64 {
        self.q % 4
    }

    pub fn elements(&self) -> &[Quaternion] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, z: &Quaternion) -> bool {
        self.elements.binary_search(z).is_ok()
    }

    /// One element per `±` pair (the one with positive real part).
    pub fn projective(&self) -> impl Iterator<Item = &Quaternion> + '_ {
        self.elements.iter().filter(|z| z.re > 0)
    }
}

/// Membership test for `X_q` without enumerating it.
pub fn in_norm_set(q: u64, z: &Quaternion) -> bool {
    z.norm() == q as i64 && parity_ok(q, z)
}

fn parity_ok(q: u64, z: &Quaternion) -> bool {
    match q % 4 {
        1 => z.re.rem_euclid(2) == 1,
        3 => z.i.rem_euclid(2) == 0,
        _ => false,
    }
}

fn isqrt(n: i64) -> i64 {
    if n < 0 {
        return -1;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// An admissible `Y_q`: one element with positive real part from each orbit
/// `{±x, ±conj(x)}` of `X_q`.
#[derive(Clone, Debug)]
pub struct HalfSet {
    q: u64,
    elements: Vec<Quaternion>,
    lookup: HashMap<Quaternion, (usize, bool)>,
}

impl PartialEq for HalfSet {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q && self.elements == other.elements
    }
}

impl Eq for HalfSet {}

impl HalfSet {
    /// The canonical choice: orbit representatives sorted by `(x0, x1, x2, x3)`.
    pub fn canonical(set: &NormSet) -> Self {
        let mut reps: Vec<Quaternion> = set
            .elements()
            .iter()
            .map(Quaternion::orbit_representative)
            .collect();
        reps.sort();
        reps.dedup();
        Self::from_elements(set, reps).expect("canonical half-set is admissible")
    }

    /// A uniformly random admissible choice, in random order.
    pub fn random<R: Rng + ?Sized>(set: &NormSet, rng: &mut R) -> Self {
        let mut elems: Vec<Quaternion> = Self::canonical(set)
            .elements
            .into_iter()
            .map(|y| if rng.gen::<bool>() { y.conj() } else { y })
            .collect();
        elems.shuffle(rng);
        Self::from_elements(set, elems).expect("random half-set is admissible")
    }

    pub fn from_elements(set: &NormSet, elements: Vec<Quaternion>) -> Result<Self> {
        let q = set.q();
        let bad = |reason: String| Error::InadmissibleHalfSet { q, reason };
        if elements.len() != (q as usize).div_ceil(2) {
            return Err(bad(format!(
                "has {} elements, expected {}",
                elements.len(),
                q.div_ceil(2)
            )));
        }
        let mut lookup = HashMap::with_capacity(4 * elements.len());
        for (idx, y) in elements.iter().enumerate() {
            if !set.contains(y) {
                return Err(bad(format!("{y} is not in X_{q}")));
            }
            if y.re <= 0 {
                return Err(bad(format!("{y} has non-positive real part")));
            }
            for (z, inv) in [(*y, false), (-*y, false), (y.conj(), true), (-y.conj(), true)] {
                if lookup.insert(z, (idx, inv)).is_some() {
                    return Err(bad(format!("{y} shares an orbit with another element")));
                }
            }
        }
        debug_assert_eq!(lookup.len(), set.len());
        Ok(HalfSet { q, elements, lookup })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn elements(&self) -> &[Quaternion] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `(index, inverted)` with `z = ±y` (not inverted) or `z = ±conj(y)`
    /// (inverted) for the listed `y` at `index`.
    pub fn locate(&self, z: &Quaternion) -> Option<(usize, bool)> {
        self.lookup.get(z).copied()
    }
}

/// `t_(p,l)`: the number of commuting pairs in `Y_p × Y_l`.
pub fn count_commuting(yp: &HalfSet, yl: &HalfSet) -> Result<u64> {
    if yp.q() == yl.q() {
        return Err(Error::SamePrime(yp.q()));
    }
    let mut t = 0;
    for x in yp.elements() {
        for y in yl.elements() {
            if x.commutes(y) {
                t += 1;
            }
        }
    }
    Ok(t)
}

/// `t_(p,l)` from the primes, using canonical half-sets.
pub fn t_invariant(p: u64, l: u64) -> Result<u64> {
    let yp = HalfSet::canonical(&NormSet::enumerate(p)?);
    let yl = HalfSet::canonical(&NormSet::enumerate(l)?);
    count_commuting(&yp, &yl)
}
