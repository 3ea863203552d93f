//! Arithmetic invariants of prime pairs and the conjectured abelianizations.

use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::primes::is_odd_prime;
use crate::zmodule::{canonicalize, AbelianGroup};

/// Two distinct odd primes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrimePair {
    p: u64,
    l: u64,
}

impl PrimePair {
    pub fn new(p: u64, l: u64) -> Result<Self> {
        for q in [p, l] {
            if !is_odd_prime(q) {
                return Err(Error::NotOddPrime(q));
            }
        }
        if p == l {
            return Err(Error::SamePrime(p));
        }
        Ok(PrimePair { p, l })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn residues(&self, m: u64) -> (u64, u64) {
        (self.p % m, self.l % m)
    }

    pub fn both_one_mod_four(&self) -> bool {
        self.residues(4) == (1, 1)
    }

    pub fn both_three_mod_four(&self) -> bool {
        self.residues(4) == (3, 3)
    }

    pub fn is_mixed(&self) -> bool {
        self.p % 4 != self.l % 4
    }

    /// Mixed pairs reordered to `p = 3, l = 1 (mod 4)`; others unchanged.
    pub fn normalized(&self) -> Self {
        if self.p % 4 == 1 && self.l % 4 == 3 {
            PrimePair { p: self.l, l: self.p }
        } else {
            *self
        }
    }

    pub fn contains_three(&self) -> bool {
        self.p == 3 || self.l == 3
    }

    fn both_one_mod_three(&self) -> bool {
        self.residues(3) == (1, 1)
    }
}

impl fmt::Display for PrimePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.l)
    }
}

/// `gcd((p-1)/4, (l-1)/4, 6)` for `p, l = 1 (mod 4)`.
pub fn r_invariant(pair: &PrimePair) -> Result<u64> {
    if !pair.both_one_mod_four() {
        return Err(Error::NotBothOneModFour { p: pair.p, l: pair.l });
    }
    Ok(r_from_residues(pair.p, pair.l))
}

fn r_from_residues(p: u64, l: u64) -> u64 {
    ((p - 1) / 4).gcd(&((l - 1) / 4)).gcd(&6)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CaseLabel {
    R1,
    R2,
    R3,
    R6,
    B1,
    B2,
    B3,
    B4,
    C1,
    C2,
    C3,
    C4,
}

impl CaseLabel {
    pub const ALL: [CaseLabel; 12] = [
        CaseLabel::R1,
        CaseLabel::R2,
        CaseLabel::R3,
        CaseLabel::R6,
        CaseLabel::B1,
        CaseLabel::B2,
        CaseLabel::B3,
        CaseLabel::B4,
        CaseLabel::C1,
        CaseLabel::C2,
        CaseLabel::C3,
        CaseLabel::C4,
    ];

    pub fn description(self) -> &'static str {
        use CaseLabel::*;
        match self {
            R1 => "p, l = 1 mod 4 with r = 1",
            R2 => "p, l = 1 mod 4 with r = 2",
            R3 => "p, l = 1 mod 4 with r = 3",
            R6 => "p, l = 1 mod 4 with r = 6",
            B1 => "p, l = 3 mod 4, p = l mod 8, p, l = 1 mod 3",
            B2 => "p, l = 3 mod 4, p = l mod 8, not both 1 mod 3",
            B3 => "p, l = 3 mod 4, p != l mod 8, p, l = 1 mod 3",
            B4 => "p, l = 3 mod 4, p != l mod 8, not both 1 mod 3",
            C1 => "p = 3, l = 1 mod 4, l = 1 mod 8, p, l = 1 mod 3",
            C2 => "p = 3, l = 1 mod 4, l = 1 mod 8, not both 1 mod 3",
            C3 => "p = 3, l = 1 mod 4, l = 5 mod 8, p, l = 1 mod 3",
            C4 => "p = 3, l = 1 mod 4, l = 5 mod 8, not both 1 mod 3",
        }
    }

    /// `r_(p,l)` for the R-labels.
    pub fn r_value(self) -> Option<u64> {
        match self {
            CaseLabel::R1 => Some(1),
            CaseLabel::R2 => Some(2),
            CaseLabel::R3 => Some(3),
            CaseLabel::R6 => Some(6),
            _ => None,
        }
    }

    fn from_r(r: u64) -> Self {
        match r {
            1 => CaseLabel::R1,
            2 => CaseLabel::R2,
            3 => CaseLabel::R3,
            6 => CaseLabel::R6,
            _ => unreachable!("r = {r} is not a divisor of 6"),
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl std::str::FromStr for CaseLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseLabel::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown case label `{s}`")))
    }
}

/// Case split from residues alone (`p`, `l` may be any odd representatives;
/// mixed inputs must already be ordered `p = 3, l = 1 (mod 4)`).
fn classify_residues(p: u64, l: u64) -> CaseLabel {
    use CaseLabel::*;
    let thirds = p % 3 == 1 && l % 3 == 1;
    match (p % 4, l % 4) {
        (1, 1) => {
            let label = match (p % 8 == 1 && l % 8 == 1, thirds) {
                (true, true) => R6,
                (true, false) => R2,
                (false, true) => R3,
                (false, false) => R1,
            };
            // The mod-8/mod-3 split and the gcd formula agree.
            assert_eq!(label, CaseLabel::from_r(r_from_residues(p, l)), "p = {p}, l = {l}");
            label
        }
        (3, 3) => match (p % 8 == l % 8, thirds) {
            (true, true) => B1,
            (true, false) => B2,
            (false, true) => B3,
            (false, false) => B4,
        },
        (3, 1) => match (l % 8 == 1, thirds) {
            (true, true) => C1,
            (true, false) => C2,
            (false, true) => C3,
            (false, false) => C4,
        },
        _ => panic!("classify_residues({p}, {l}): mixed pair not normalized"),
    }
}

pub fn classify_case(pair: &PrimePair) -> CaseLabel {
    let n = pair.normalized();
    classify_residues(n.p, n.l)
}

/// A product of cyclic groups written with prime-power orders and multiplicities.
fn primary(parts: &[(u64, usize)]) -> AbelianGroup {
    let powers: Vec<u64> = parts.iter().flat_map(|&(q, m)| std::iter::repeat_n(q, m)).collect();
    canonicalize(&powers, 0).expect("conjectured groups are written in prime powers")
}

pub fn predicted_gamma_ab_for_case(label: CaseLabel) -> AbelianGroup {
    use CaseLabel::*;
    match label {
        R1 => primary(&[(2, 1), (4, 3)]),
        R2 => primary(&[(2, 3), (8, 2)]),
        R3 => primary(&[(2, 1), (3, 1), (4, 3)]),
        R6 => primary(&[(2, 3), (3, 1), (8, 2)]),
        B1 | C1 => primary(&[(2, 1), (3, 1), (8, 2)]),
        B2 | C2 => primary(&[(2, 1), (8, 2)]),
        B3 | C3 => primary(&[(2, 1), (3, 1), (4, 2)]),
        B4 | C4 => primary(&[(2, 1), (4, 2)]),
    }
}

/// The conjectured `Γ^ab` from the gcd invariant `r` (the original
/// formulation for `p, l = 1 mod 4`).
pub fn predicted_gamma_ab_from_r(r: u64) -> AbelianGroup {
    predicted_gamma_ab_for_case(CaseLabel::from_r(r))
}

pub fn predicted_gamma_ab(pair: &PrimePair) -> AbelianGroup {
    predicted_gamma_ab_for_case(classify_case(pair))
}

/// What is predicted (or known) about `t_(p,l)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TConstraint {
    Residue { modulus: u64, residue: u64 },
    Even,
    EvenPositive,
    Zero,
}

impl TConstraint {
    pub fn admits(self, t: u64) -> bool {
        match self {
            TConstraint::Residue { modulus, residue } => t % modulus == residue,
            TConstraint::Even => t.is_multiple_of(2),
            TConstraint::EvenPositive => t.is_multiple_of(2) && t > 0,
            TConstraint::Zero => t == 0,
        }
    }
}

impl fmt::Display for TConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TConstraint::Residue { modulus, residue } => write!(f, "t = {residue} mod {modulus}"),
            TConstraint::Even => f.write_str("t even"),
            TConstraint::EvenPositive => f.write_str("t even, t > 0"),
            TConstraint::Zero => f.write_str("t = 0"),
        }
    }
}

pub fn predicted_t_constraint_for_case(label: CaseLabel) -> TConstraint {
    use CaseLabel::*;
    let m12 = |residue| TConstraint::Residue { modulus: 12, residue };
    match label {
        R1 => m12(3),
        R2 => m12(9),
        R3 => m12(7),
        R6 => m12(1),
        B1 => TConstraint::EvenPositive,
        B2 | C1 | C2 => TConstraint::Even,
        B3 | B4 | C3 | C4 => TConstraint::Zero,
    }
}

pub fn predicted_t_constraint(pair: &PrimePair) -> TConstraint {
    predicted_t_constraint_for_case(classify_case(pair))
}

/// The `Γ^ab` expected from the class of `t mod 12` (for `p, l = 1 mod 4`).
pub fn predicted_gamma_ab_from_t(t: u64) -> Option<AbelianGroup> {
    match t % 12 {
        3 => Some(predicted_gamma_ab_for_case(CaseLabel::R1)),
        9 => Some(predicted_gamma_ab_for_case(CaseLabel::R2)),
        7 => Some(predicted_gamma_ab_for_case(CaseLabel::R3)),
        1 => Some(predicted_gamma_ab_for_case(CaseLabel::R6)),
        _ => None,
    }
}

/// The implications relating `t` and `Γ^ab` for `p = 3 (mod 4)`: returns
/// the numbers (1..=5) of the implications that fail.
pub fn t_group_implication_failures(t: u64, gamma_ab: &AbelianGroup) -> Vec<u8> {
    use CaseLabel::*;
    let g = |c| predicted_gamma_ab_for_case(c);
    let is = |c: CaseLabel| *gamma_ab == g(c);
    let mut fails = Vec::new();
    if t == 0 && !(is(B2) || is(B3) || is(B4)) {
        fails.push(1);
    }
    if t == 2 && !is(B2) {
        fails.push(2);
    }
    if t >= 4 && !(is(B1) || is(B2)) {
        fails.push(3);
    }
    if (is(B3) || is(B4)) && t != 0 {
        fails.push(4);
    }
    if is(B1) && t < 4 {
        fails.push(5);
    }
    fails
}

/// Conjectured `[Γ, Γ]^ab`.
pub fn predicted_commutator_ab(pair: &PrimePair) -> AbelianGroup {
    let n = pair.normalized();
    let thirds = n.both_one_mod_three();
    let has3 = n.contains_three();
    if n.both_one_mod_four() {
        let big = n.p % 8 == 1 && n.l % 8 == 1;
        return match (big, thirds) {
            (true, true) => primary(&[(2, 2), (16, 2), (64, 1)]),
            (true, false) => primary(&[(3, 1), (16, 2), (64, 1)]),
            (false, true) => primary(&[(2, 2), (16, 3)]),
            (false, false) => primary(&[(3, 1), (16, 3)]),
        };
    }
    // p, l = 3 mod 4 split on p = l mod 8; mixed pairs on l = 1 mod 8.
    let top = if n.both_three_mod_four() { n.p % 8 == n.l % 8 } else { n.l % 8 == 1 };
    let last = if top { 64 } else { 16 };
    if thirds {
        primary(&[(2, 2), (8, 2), (last, 1)])
    } else if has3 {
        primary(&[(8, 2), (last, 1)])
    } else {
        primary(&[(3, 1), (8, 2), (last, 1)])
    }
}

/// Conjectured `Λ^ab` for the index-4 subgroup.
pub fn predicted_lambda_ab(pair: &PrimePair) -> AbelianGroup {
    if pair.contains_three() {
        primary(&[(2, 1), (8, 2)])
    } else {
        primary(&[(2, 1), (3, 1), (8, 2)])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableKind {
    /// `r_(p,l)` for `p, l = 1 mod 4`.
    R,
    /// Cases B1–B4 for `p, l = 3 mod 4`.
    B,
    /// Cases C1–C4 for `p = 3, l = 1 mod 4`.
    C,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableCell {
    R(u64),
    Case(CaseLabel),
}

impl fmt::Display for TableCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableCell::R(r) => write!(f, "{r}"),
            TableCell::Case(c) => write!(f, "({c})"),
        }
    }
}

/// A 6×6 table indexed by residues mod 24.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueTable {
    pub row_residues: [u64; 6],
    pub col_residues: [u64; 6],
    pub cells: [[TableCell; 6]; 6],
}

const ONE_MOD_FOUR: [u64; 6] = [1, 5, 9, 13, 17, 21];
const THREE_MOD_FOUR: [u64; 6] = [3, 7, 11, 15, 19, 23];

pub fn table_mod24(kind: TableKind) -> ResidueTable {
    let (rows, cols) = match kind {
        TableKind::R => (ONE_MOD_FOUR, ONE_MOD_FOUR),
        TableKind::B => (THREE_MOD_FOUR, THREE_MOD_FOUR),
        TableKind::C => (THREE_MOD_FOUR, ONE_MOD_FOUR),
    };
    let mut cells = [[TableCell::R(0); 6]; 6];
    for (i, &p) in rows.iter().enumerate() {
        for (j, &l) in cols.iter().enumerate() {
            // Residue 1 stands for primes = 1 mod 24, so use 25 as the
            // representative when a formula divides by 4.
            let (pp, ll) = (if p == 1 { 25 } else { p }, if l == 1 { 25 } else { l });
            cells[i][j] = match kind {
                TableKind::R => TableCell::R(r_from_residues(pp, ll)),
                _ => TableCell::Case(classify_residues(pp, ll)),
            };
        }
    }
    ResidueTable { row_residues: rows, col_residues: cols, cells }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::odd_primes;

    fn pair(p: u64, l: u64) -> PrimePair {
        PrimePair::new(p, l).unwrap()
    }

    fn g(chain: &[u64]) -> AbelianGroup {
        AbelianGroup::finite(chain).unwrap()
    }

    #[test]
    fn pair_validation() {
        assert!(PrimePair::new(5, 5).is_err());
        assert!(PrimePair::new(2, 5).is_err());
        assert!(PrimePair::new(9, 5).is_err());
        assert_eq!(pair(13, 7).normalized(), pair(7, 13));
        assert_eq!(pair(7, 13).normalized(), pair(7, 13));
    }

    #[test]
    fn r_examples() {
        assert_eq!(r_invariant(&pair(5, 13)).unwrap(), 1);
        assert_eq!(r_invariant(&pair(13, 61)).unwrap(), 3);
        assert_eq!(r_invariant(&pair(73, 97)).unwrap(), 6);
        assert!(r_invariant(&pair(3, 5)).is_err());
    }

    #[test]
    fn case_examples() {
        // 7 mod 24 and 19 mod 24
        assert_eq!(classify_case(&pair(7, 43)), CaseLabel::B3);
        // 3 mod 24 and 1 mod 24
        assert_eq!(classify_case(&pair(3, 73)), CaseLabel::C2);
        assert_eq!(classify_case(&pair(73, 3)), CaseLabel::C2);
        // 13 and 13 mod 24
        assert_eq!(classify_case(&pair(13, 37)), CaseLabel::R3);
    }

    #[test]
    fn gamma_predictions() {
        assert_eq!(predicted_gamma_ab(&pair(5, 13)), g(&[2, 4, 4, 4]));
        assert_eq!(predicted_gamma_ab(&pair(17, 41)), g(&[2, 2, 2, 8, 8]));
        assert_eq!(predicted_gamma_ab(&pair(3, 5)), g(&[2, 4, 4]));
        assert_eq!(predicted_gamma_ab_from_r(6), g(&[2, 2, 2, 8, 24]));
    }

    #[test]
    fn b_and_c_images_coincide() {
        use CaseLabel::*;
        for (b, c) in [(B1, C1), (B2, C2), (B3, C3), (B4, C4)] {
            assert_eq!(predicted_gamma_ab_for_case(b), predicted_gamma_ab_for_case(c));
        }
        let distinct: std::collections::BTreeSet<_> =
            CaseLabel::ALL.iter().map(|&c| predicted_gamma_ab_for_case(c)).collect();
        assert_eq!(distinct.len(), 8);
    }

    #[test]
    fn t_constraints() {
        assert_eq!(predicted_t_constraint(&pair(73, 97)), TConstraint::Residue { modulus: 12, residue: 1 });
        assert_eq!(predicted_t_constraint(&pair(7, 43)), TConstraint::Zero);
        assert_eq!(predicted_t_constraint(&pair(5, 13)), TConstraint::Residue { modulus: 12, residue: 3 });
        assert!(TConstraint::EvenPositive.admits(4));
        assert!(!TConstraint::EvenPositive.admits(0));
        assert_eq!(predicted_gamma_ab_from_t(15), Some(g(&[2, 4, 4, 4])));
        assert_eq!(predicted_gamma_ab_from_t(4), None);
    }

    #[test]
    fn implications() {
        let b1 = predicted_gamma_ab_for_case(CaseLabel::B1);
        let b4 = predicted_gamma_ab_for_case(CaseLabel::B4);
        assert!(t_group_implication_failures(6, &b1).is_empty());
        assert_eq!(t_group_implication_failures(2, &b1), vec![2, 5]);
        assert_eq!(t_group_implication_failures(4, &b4), vec![3, 4]);
        assert!(t_group_implication_failures(0, &b4).is_empty());
    }

    #[test]
    fn commutator_predictions() {
        assert_eq!(predicted_commutator_ab(&pair(5, 13)), primary(&[(3, 1), (16, 3)]));
        assert_eq!(predicted_commutator_ab(&pair(3, 5)), primary(&[(8, 2), (16, 1)]));
        assert_eq!(predicted_commutator_ab(&pair(7, 31)), primary(&[(2, 2), (8, 2), (64, 1)]));
        assert_eq!(predicted_commutator_ab(&pair(3, 11)), primary(&[(8, 2), (64, 1)]));
        assert_eq!(predicted_commutator_ab(&pair(17, 3)), primary(&[(8, 2), (64, 1)]));
        assert_eq!(predicted_commutator_ab(&pair(7, 5)), primary(&[(3, 1), (8, 2), (16, 1)]));
    }

    #[test]
    fn lambda_predictions() {
        assert_eq!(predicted_lambda_ab(&pair(3, 7)), g(&[2, 8, 8]));
        assert_eq!(predicted_lambda_ab(&pair(5, 13)), g(&[2, 8, 24]));
        assert_eq!(predicted_lambda_ab(&pair(3, 997)), g(&[2, 8, 8]));
    }

    #[test]
    fn tables() {
        let r = table_mod24(TableKind::R);
        assert!(r.cells[1].iter().all(|c| *c == TableCell::R(1)));
        assert_eq!(r.cells[0][0], TableCell::R(6));
        let b = table_mod24(TableKind::B);
        assert_eq!(b.cells[3][1], TableCell::Case(CaseLabel::B2));
        let c = table_mod24(TableKind::C);
        assert_eq!(c.cells[4][3], TableCell::Case(CaseLabel::C3));
    }

    #[test]
    fn r_formula_and_case_split_agree_on_primes() {
        let ps: Vec<u64> = odd_primes(1000).into_iter().filter(|p| p % 4 == 1).collect();
        for (i, &p) in ps.iter().enumerate() {
            for &l in &ps[i + 1..] {
                let pr = pair(p, l);
                assert_eq!(classify_case(&pr).r_value(), Some(r_invariant(&pr).unwrap()));
            }
        }
    }

    #[test]
    fn classification_is_total() {
        let ps = odd_primes(200);
        for &p in &ps {
            for &l in &ps {
                if p != l {
                    let label = classify_case(&pair(p, l));
                    assert_eq!(label, classify_case(&pair(l, p)));
                }
            }
        }
    }
}
