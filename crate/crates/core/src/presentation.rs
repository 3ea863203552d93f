//! Square-complex presentations of `Γ_(p,l)`.
//!
//! Generators are the half-sets `Y_p` (family `a`) and `Y_l` (family `b`);
//! a generator's inverse is the conjugate quaternion and sign is ignored.
//! Every product `x·y` with `x ∈ X_p`, `y ∈ X_l` refactors uniquely (up to
//! sign) as `y'·x'`, and each resulting square `x·y·x'⁻¹·y'⁻¹` is one relator.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::quaternion::{in_norm_set, HalfSet, NormSet, Quaternion};
use crate::zmodule::IntMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inv(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }

    pub fn exponent(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    /// 1-based signed index, as in the text format.
    pub fn signed_index(self) -> i64 {
        (self.generator as i64 + 1) * self.exponent()
    }
}

/// A freely reduced word in the generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: impl IntoIterator<Item = Letter>) -> Self {
        let mut out: Vec<Letter> = Vec::new();
        for l in letters {
            if out.last() == Some(&l.inv()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word(out)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        Word::new(self.0.iter().chain(other.0.iter()).copied())
    }

    /// Strip letters that cancel cyclically (`g·w·g⁻¹ ↦ w`).
    pub fn cyclically_reduced(&self) -> Word {
        let mut s = &self.0[..];
        while s.len() >= 2 && s[0] == s[s.len() - 1].inv() {
            s = &s[1..s.len() - 1];
        }
        Word(s.to_vec())
    }

    /// Lexicographically least rotation of the word or of its inverse.
    pub fn canonical_cyclic(&self) -> Word {
        let w = self.cyclically_reduced();
        let n = w.len();
        if n == 0 {
            return w;
        }
        let inv = w.inverse();
        let mut best: Option<Vec<Letter>> = None;
        for base in [&w.0, &inv.0] {
            for r in 0..n {
                let cand: Vec<Letter> = base[r..].iter().chain(&base[..r]).copied().collect();
                if best.as_ref().is_none_or(|b| cand < *b) {
                    best = Some(cand);
                }
            }
        }
        Word(best.unwrap())
    }

    pub fn exponent_sums(&self, n_generators: usize) -> Vec<i64> {
        let mut v = vec![0; n_generators];
        for l in &self.0 {
            v[l.generator] += l.exponent();
        }
        v
    }

    /// Nonzero exponent sums as `(generator, sum)`, sorted by generator.
    pub fn sparse_exponent_sums(&self) -> Vec<(usize, i64)> {
        let mut v: Vec<(usize, i64)> = self.0.iter().map(|l| (l.generator, l.exponent())).collect();
        v.sort_unstable_by_key(|e| e.0);
        let mut out: Vec<(usize, i64)> = Vec::with_capacity(v.len());
        for (g, e) in v {
            match out.last_mut() {
                Some((lg, le)) if *lg == g => *le += e,
                _ => out.push((g, e)),
            }
        }
        out.retain(|e| e.1 != 0);
        out
    }
}

impl FromIterator<Letter> for Word {
    fn from_iter<I: IntoIterator<Item = Letter>>(iter: I) -> Self {
        Word::new(iter)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str(".");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.signed_index().to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Norm `p`.
    A,
    /// Norm `l`.
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct GeneratorSymbol {
    pub family: Family,
    /// Position in the family's half-set.
    pub index: usize,
    pub quaternion: Quaternion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    Quaternion(GeneratorSymbol),
    /// Schreier generator `t_c · g · t_(c·g)⁻¹` of a subgroup presentation.
    Schreier { coset: usize, generator: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPresentation {
    generators: Vec<Generator>,
    relators: Vec<Word>,
    primes: Option<(u64, u64)>,
}

/// `x·y = sign · y'·x'`, with `y'` and `x'` both of positive real part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Factorization {
    pub y: Quaternion,
    pub x: Quaternion,
    pub sign: i64,
}

/// Refactor `x·y` (`x ∈ X_p`, `y ∈ X_l`) as `±y'·x'` with `y' ∈ X_l`, `x' ∈ X_p`.
///
/// Each `x'` in `X_p` forces `y' = x·y·conj(x')/p`, so scanning `X_p` finds
/// every solution; the full set must be `{(±y', ±x')}` (four pairs over both
/// signs) or the call fails.
pub fn factor_product(x: &Quaternion, y: &Quaternion, xp: &NormSet, l: u64) -> Result<Factorization> {
    let p = xp.q();
    if !xp.contains(x) {
        return Err(Error::NotInNormSet { z: *x, q: p });
    }
    if !in_norm_set(l, y) {
        return Err(Error::NotInNormSet { z: *y, q: l });
    }
    let prod = x * y;
    let pi = p as i64;
    let mut found: Vec<(Quaternion, Quaternion)> = Vec::new();
    for xc in xp.elements() {
        let t = prod * xc.conj();
        if t.coords().iter().any(|c| c % pi != 0) {
            continue;
        }
        let yc = t.map(|c| c / pi);
        if in_norm_set(l, &yc) {
            // (yc, xc) with sign +1 and (-yc, xc) with sign -1.
            found.push((yc, *xc));
        }
    }
    if found.len() != 2 {
        return Err(Error::Factorization { x: *x, y: *y, found: 2 * found.len() });
    }
    let (yc, xc) = found[0];
    let (yc, xc) = (yc.sign_normalized(), xc.sign_normalized());
    let back = yc * xc;
    let sign = if back == prod {
        1
    } else {
        debug_assert_eq!(-back, prod);
        -1
    };
    Ok(Factorization { y: yc, x: xc, sign })
}

/// `(index, ±1)`: `+1` when `±z` is listed in `half`, `-1` when `±conj(z)` is.
pub fn to_letter(z: &Quaternion, half: &HalfSet) -> Result<(usize, i8)> {
    half.locate(z)
        .map(|(i, inv)| (i, if inv { -1 } else { 1 }))
        .ok_or(Error::NotInNormSet { z: *z, q: half.q() })
}

impl GroupPresentation {
    pub fn new(generators: Vec<Generator>, relators: Vec<Word>, primes: Option<(u64, u64)>) -> Self {
        let n = generators.len();
        assert!(
            relators.iter().all(|r| r.letters().iter().all(|l| l.generator < n)),
            "relator mentions an unknown generator"
        );
        GroupPresentation { generators, relators, primes }
    }

    /// The presentation of `Γ_(p,l)` on the canonical half-sets.
    pub fn build(p: u64, l: u64) -> Result<Self> {
        if p == l {
            return Err(Error::SamePrime(p));
        }
        let xp = NormSet::enumerate(p)?;
        let xl = NormSet::enumerate(l)?;
        let yp = HalfSet::canonical(&xp);
        let yl = HalfSet::canonical(&xl);
        Self::build_with(&xp, &xl, &yp, &yl)
    }

    /// The presentation on any admissible half-sets.
    pub fn build_with(xp: &NormSet, xl: &NormSet, yp: &HalfSet, yl: &HalfSet) -> Result<Self> {
        let (p, l) = (xp.q(), xl.q());
        if p == l {
            return Err(Error::SamePrime(p));
        }
        let na = yp.len();
        let mut generators = Vec::with_capacity(na + yl.len());
        for (index, q) in yp.elements().iter().enumerate() {
            generators.push(Generator::Quaternion(GeneratorSymbol { family: Family::A, index, quaternion: *q }));
        }
        for (index, q) in yl.elements().iter().enumerate() {
            generators.push(Generator::Quaternion(GeneratorSymbol { family: Family::B, index, quaternion: *q }));
        }
        let a_letter = |z: &Quaternion| -> Result<Letter> {
            let (i, e) = to_letter(z, yp)?;
            Ok(Letter::new(i, e < 0))
        };
        let b_letter = |z: &Quaternion| -> Result<Letter> {
            let (i, e) = to_letter(z, yl)?;
            Ok(Letter::new(na + i, e < 0))
        };

        // One corner per (±x, ±y); each square has four corners.
        let mut squares = BTreeSet::new();
        for x in xp.projective() {
            for y in xl.projective() {
                let f = factor_product(x, y, xp, l)?;
                let w = Word::new([a_letter(x)?, b_letter(y)?, a_letter(&f.x)?.inv(), b_letter(&f.y)?.inv()]);
                debug_assert_eq!(w.len(), 4);
                squares.insert(w.canonical_cyclic());
            }
        }
        let expected = yp.len() * yl.len();
        if squares.len() != expected {
            return Err(Error::RelatorCount { expected, found: squares.len() });
        }
        Ok(GroupPresentation { generators, relators: squares.into_iter().collect(), primes: Some((p, l)) })
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn primes(&self) -> Option<(u64, u64)> {
        self.primes
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn relator_count(&self) -> usize {
        self.relators.len()
    }

    pub fn family(&self, g: usize) -> Option<Family> {
        match self.generators[g] {
            Generator::Quaternion(s) => Some(s.family),
            Generator::Schreier { .. } => None,
        }
    }

    pub fn symbol(&self, g: usize) -> Option<&GeneratorSymbol> {
        match &self.generators[g] {
            Generator::Quaternion(s) => Some(s),
            Generator::Schreier { .. } => None,
        }
    }

    /// One row of exponent sums per relator.
    pub fn relation_matrix(&self) -> IntMatrix {
        let n = self.generator_count();
        let rows: Vec<Vec<i64>> = self.relators.iter().map(|r| r.exponent_sums(n)).collect();
        IntMatrix::from_rows(&rows, n)
    }

    pub fn sparse_relation_rows(&self) -> Vec<Vec<(usize, i64)>> {
        self.relators.iter().map(Word::sparse_exponent_sums).collect()
    }

    /// The quaternion product of a word (inverse letters become conjugates).
    pub fn evaluate(&self, w: &Word) -> Option<Quaternion> {
        let mut acc = Quaternion::one();
        for l in w.letters() {
            let q = self.symbol(l.generator)?.quaternion;
            acc = acc * if l.inverse { q.conj() } else { q };
        }
        Some(acc)
    }

    /// Every relator evaluates to a real quaternion, i.e. `x·y = ±y'·x'`
    /// holds exactly in the integer quaternions.
    pub fn verify_relators(&self) -> bool {
        self.relators.iter().all(|r| self.evaluate(r).is_some_and(|q| q.is_real() && q.re != 0))
    }

    /// Plain-text serialization.
    ///
    /// ```text
    /// presentation 1
    /// primes 5 13
    /// generators 10
    /// a 0 1 0 0 2
    /// b 0 1 0 2 -3
    /// s 3 2
    /// relators 21
    /// 1 4 -2 -5
    /// ```
    ///
    /// `a`/`b` lines give family, index and quaternion coordinates; `s` lines
    /// give the coset and parent generator (0-based) of a Schreier generator.
    /// Relators list 1-based generator numbers, negative for inverses; `.`
    /// is the empty word.
    pub fn to_text(&self) -> String {
        let mut s = String::from("presentation 1\n");
        if let Some((p, l)) = self.primes {
            s.push_str(&format!("primes {p} {l}\n"));
        }
        s.push_str(&format!("generators {}\n", self.generators.len()));
        for g in &self.generators {
            match g {
                Generator::Quaternion(sym) => {
                    let fam = if sym.family == Family::A { 'a' } else { 'b' };
                    let [x0, x1, x2, x3] = sym.quaternion.coords();
                    s.push_str(&format!("{fam} {} {x0} {x1} {x2} {x3}\n", sym.index));
                }
                Generator::Schreier { coset, generator } => s.push_str(&format!("s {coset} {generator}\n")),
            }
        }
        s.push_str(&format!("relators {}\n", self.relators.len()));
        for r in &self.relators {
            s.push_str(&format!("{r}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(n, l)| (n + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .peekable();
        let err = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
        let num = |line: usize, t: &str| -> Result<i64> { t.parse().map_err(|_| err(line, "bad number")) };

        match lines.next() {
            Some((_, "presentation 1")) => {}
            Some((n, _)) => return Err(err(n, "expected `presentation 1`")),
            None => return Err(err(0, "empty input")),
        }
        let mut primes = None;
        if let Some((n, line)) = lines.peek().copied() {
            if let Some(rest) = line.strip_prefix("primes ") {
                let v: Vec<i64> = rest.split_whitespace().map(|t| num(n, t)).collect::<Result<_>>()?;
                let [p, l] = v[..] else { return Err(err(n, "expected two primes")) };
                primes = Some((p as u64, l as u64));
                lines.next();
            }
        }
        let count = |lines: &mut dyn Iterator<Item = (usize, &str)>, key: &str| -> Result<usize> {
            let (n, line) = lines.next().ok_or_else(|| err(0, "truncated input"))?;
            line.strip_prefix(key)
                .and_then(|r| r.trim().parse().ok())
                .ok_or_else(|| err(n, &format!("expected `{key} <count>`")))
        };
        let ng = count(&mut lines, "generators")?;
        let mut generators = Vec::with_capacity(ng);
        for _ in 0..ng {
            let (n, line) = lines.next().ok_or_else(|| err(0, "truncated generator list"))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            let g = match toks[..] {
                [fam @ ("a" | "b"), idx, x0, x1, x2, x3] => Generator::Quaternion(GeneratorSymbol {
                    family: if fam == "a" { Family::A } else { Family::B },
                    index: num(n, idx)? as usize,
                    quaternion: Quaternion::new(num(n, x0)?, num(n, x1)?, num(n, x2)?, num(n, x3)?),
                }),
                ["s", c, g] => Generator::Schreier { coset: num(n, c)? as usize, generator: num(n, g)? as usize },
                _ => return Err(err(n, "bad generator line")),
            };
            generators.push(g);
        }
        let nr = count(&mut lines, "relators")?;
        let mut relators = Vec::with_capacity(nr);
        for _ in 0..nr {
            let (n, line) = lines.next().ok_or_else(|| err(0, "truncated relator list"))?;
            if line == "." {
                relators.push(Word::empty());
                continue;
            }
            let mut letters = Vec::new();
            for t in line.split_whitespace() {
                let v = num(n, t)?;
                if v == 0 || v.unsigned_abs() as usize > ng {
                    return Err(err(n, "generator number out of range"));
                }
                letters.push(Letter::new(v.unsigned_abs() as usize - 1, v < 0));
            }
            relators.push(Word(letters));
        }
        if let Some((n, _)) = lines.next() {
            return Err(err(n, "trailing input"));
        }
        Ok(GroupPresentation { generators, relators, primes })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64, c: i64, d: i64) -> Quaternion {
        Quaternion::new(a, b, c, d)
    }

    #[test]
    fn word_reduction_and_canonical_form() {
        let a = Letter::new(0, false);
        let b = Letter::new(1, false);
        assert!(Word::new([a, b, b.inv(), a.inv()]).is_empty());
        let w = Word::new([b, a, b.inv(), a.inv()]);
        let c = w.canonical_cyclic();
        assert_eq!(c, Word::new([a, b, a.inv(), b.inv()]));
        assert_eq!(c.canonical_cyclic(), c);
        assert_eq!(w.inverse().canonical_cyclic(), c);
        assert_eq!(Word::new([a, b, a.inv()]).cyclically_reduced(), Word::new([b]));
    }

    #[test]
    fn commuting_pair_factors_as_itself() {
        let x5 = NormSet::enumerate(5).unwrap();
        let f = factor_product(&q(1, 2, 0, 0), &q(3, 2, 0, 0), &x5, 13).unwrap();
        assert_eq!(f, Factorization { y: q(3, 2, 0, 0), x: q(1, 2, 0, 0), sign: 1 });
    }

    #[test]
    fn noncommuting_factorization() {
        let x5 = NormSet::enumerate(5).unwrap();
        let (x, y) = (q(1, 2, 0, 0), q(3, 0, 2, 0));
        let f = factor_product(&x, &y, &x5, 13).unwrap();
        assert_eq!(x * y, q(3, 6, 2, 4));
        assert_eq!(q(-1, 2, -2, 2) * q(1, 0, 0, -2), q(3, 6, 2, 4));
        assert_eq!(f.x, q(1, 0, 0, -2));
        assert_eq!(f.y, q(1, -2, 2, -2));
        assert_eq!(f.sign, -1);
        assert_eq!(q(f.sign, 0, 0, 0) * (f.y * f.x), x * y);
    }

    #[test]
    fn factor_rejects_foreign_input() {
        let x5 = NormSet::enumerate(5).unwrap();
        assert!(factor_product(&q(1, 1, 1, 1), &q(3, 2, 0, 0), &x5, 13).is_err());
        assert!(factor_product(&q(1, 2, 0, 0), &q(2, 3, 0, 0), &x5, 13).is_err());
    }

    #[test]
    fn letters() {
        let y5 = HalfSet::canonical(&NormSet::enumerate(5).unwrap());
        let i = y5.elements().iter().position(|z| *z == q(1, 2, 0, 0)).unwrap();
        assert_eq!(to_letter(&q(1, 2, 0, 0), &y5).unwrap(), (i, 1));
        assert_eq!(to_letter(&q(-1, -2, 0, 0), &y5).unwrap(), (i, 1));
        assert_eq!(to_letter(&q(1, -2, 0, 0), &y5).unwrap(), (i, -1));
        assert!(to_letter(&q(3, 2, 0, 0), &y5).is_err());
    }

    #[test]
    fn presentation_sizes() {
        let p = GroupPresentation::build(5, 13).unwrap();
        assert_eq!((p.generator_count(), p.relator_count()), (10, 21));
        let p = GroupPresentation::build(3, 5).unwrap();
        assert_eq!((p.generator_count(), p.relator_count()), (5, 6));
        assert!(matches!(GroupPresentation::build(7, 7), Err(Error::SamePrime(7))));
        assert!(GroupPresentation::build(9, 7).is_err());
    }

    #[test]
    fn relator_for_noncommuting_corner() {
        // x = 1+2i, y = 3+2j refactors through 1-2i+2j-2k and 1-2k.
        let p = GroupPresentation::build(5, 13).unwrap();
        let yp = HalfSet::canonical(&NormSet::enumerate(5).unwrap());
        let yl = HalfSet::canonical(&NormSet::enumerate(13).unwrap());
        let na = yp.len();
        let l = |z: Quaternion, half: &HalfSet, off: usize| {
            let (i, e) = to_letter(&z, half).unwrap();
            Letter::new(off + i, e < 0)
        };
        let expected = Word::new([
            l(q(1, 2, 0, 0), &yp, 0),
            l(q(3, 0, 2, 0), &yl, na),
            l(q(1, 0, 0, -2), &yp, 0).inv(),
            l(q(1, -2, 2, -2), &yl, na).inv(),
        ])
        .canonical_cyclic();
        assert!(p.relators().contains(&expected));
    }

    #[test]
    fn relators_hold_in_quaternions() {
        for (a, b) in [(3, 5), (5, 13), (7, 11), (3, 7), (13, 5)] {
            let p = GroupPresentation::build(a, b).unwrap();
            assert!(p.verify_relators(), "({a},{b})");
            let na = (a as usize).div_ceil(2);
            for r in p.relators() {
                assert_eq!(r.len(), 4);
                assert_eq!(r.letters().iter().filter(|l| l.generator < na).count(), 2);
            }
        }
    }

    #[test]
    fn text_roundtrip() {
        let p = GroupPresentation::build(3, 5).unwrap();
        let t = p.to_text();
        assert!(t.starts_with("presentation 1\nprimes 3 5\ngenerators 5\n"));
        assert_eq!(GroupPresentation::from_text(&t).unwrap(), p);
        let s = GroupPresentation::new(
            vec![Generator::Schreier { coset: 1, generator: 0 }],
            vec![Word::empty(), Word::new([Letter::new(0, true)])],
            None,
        );
        assert_eq!(GroupPresentation::from_text(&s.to_text()).unwrap(), s);
        assert!(GroupPresentation::from_text("presentation 1\ngenerators 1\ns 0 0\nrelators 1\n2\n").is_err());
    }
}
