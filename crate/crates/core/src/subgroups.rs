//! Finite-index normal subgroups as kernels of maps onto finite abelian
//! groups, with Reidemeister–Schreier presentations.
//!
//! Cosets are the elements of the target group itself, so no coset
//! enumeration is needed: the action of a generator is translation by its
//! image.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::presentation::{Family, Generator, GroupPresentation, Letter, Word};
use crate::zmodule::{abelian_invariants_sparse, abelianize_presentation, AbelianGroup};

/// Largest conjectured `|Γ^ab|` (`Z_2^3 × Z_3 × Z_8^2`).
pub const DEFAULT_INDEX_CEILING: u64 = 1536;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgroupKind {
    /// Kernel of `Γ → Z_2 × Z_2`, `a ↦ (1, 0)`, `b ↦ (0, 1)`.
    Lambda,
    /// Kernel of `Γ → Γ^ab`.
    Commutator,
}

impl fmt::Display for SubgroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubgroupKind::Lambda => "lambda",
            SubgroupKind::Commutator => "commutator",
        })
    }
}

impl FromStr for SubgroupKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lambda" => Ok(SubgroupKind::Lambda),
            "commutator" => Ok(SubgroupKind::Commutator),
            _ => Err(Error::Config(format!("unknown subgroup `{s}` (expected lambda or commutator)"))),
        }
    }
}

/// A surjection from a presented group onto `Z_{m_1} × … × Z_{m_k}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteQuotientMap {
    moduli: Vec<u64>,
    images: Vec<Vec<u64>>,
}

impl FiniteQuotientMap {
    /// Checks that every relator dies and that the images generate.
    pub fn new(moduli: Vec<u64>, images: Vec<Vec<u64>>, source: &GroupPresentation) -> Result<Self> {
        if images.len() != source.generator_count() {
            return Err(Error::InvalidQuotientMap(format!(
                "{} images for {} generators",
                images.len(),
                source.generator_count()
            )));
        }
        if moduli.iter().any(|&m| m < 2) {
            return Err(Error::InvalidQuotientMap("moduli must be at least 2".into()));
        }
        let mut map = FiniteQuotientMap { moduli, images };
        for img in map.images.iter_mut() {
            if img.len() != map.moduli.len() {
                return Err(Error::InvalidQuotientMap("image has the wrong number of coordinates".into()));
            }
            for (x, m) in img.iter_mut().zip(&map.moduli) {
                *x %= m;
            }
        }
        if let Some(r) = source.relators().iter().find(|r| !map.is_identity(&map.word_image(r))) {
            return Err(Error::InvalidQuotientMap(format!("relator {r} does not map to the identity")));
        }
        let reached = map.closure_size();
        if reached != map.order() {
            return Err(Error::InvalidQuotientMap(format!(
                "not surjective: images generate {reached} of {} elements",
                map.order()
            )));
        }
        Ok(map)
    }

    pub fn moduli(&self) -> &[u64] {
        &self.moduli
    }

    pub fn images(&self) -> &[Vec<u64>] {
        &self.images
    }

    pub fn target(&self) -> AbelianGroup {
        AbelianGroup::from_cyclic_orders(&self.moduli, 0).expect("moduli are at least 2")
    }

    pub fn order(&self) -> usize {
        self.moduli.iter().product::<u64>() as usize
    }

    pub fn is_identity(&self, e: &[u64]) -> bool {
        e.iter().all(|&x| x == 0)
    }

    pub fn word_image(&self, w: &Word) -> Vec<u64> {
        let mut acc = vec![0u64; self.moduli.len()];
        for l in w.letters() {
            for ((a, x), m) in acc.iter_mut().zip(&self.images[l.generator]).zip(&self.moduli) {
                *a = if l.inverse { (*a + m - x) % m } else { (*a + x) % m };
            }
        }
        acc
    }

    /// Mixed-radix index of an element.
    pub fn encode(&self, e: &[u64]) -> usize {
        e.iter().zip(&self.moduli).fold(0usize, |acc, (&x, &m)| acc * m as usize + x as usize)
    }

    pub fn decode(&self, mut idx: usize) -> Vec<u64> {
        let mut e = vec![0u64; self.moduli.len()];
        for (x, &m) in e.iter_mut().zip(&self.moduli).rev() {
            *x = (idx % m as usize) as u64;
            idx /= m as usize;
        }
        e
    }

    fn translate(&self, idx: usize, g: usize, inverse: bool) -> usize {
        let e = self.decode(idx);
        let moved: Vec<u64> = e
            .iter()
            .zip(&self.images[g])
            .zip(&self.moduli)
            .map(|((&a, &x), &m)| if inverse { (a + m - x) % m } else { (a + x) % m })
            .collect();
        self.encode(&moved)
    }

    fn closure_size(&self) -> usize {
        let n = self.order();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut stack = vec![0usize];
        let mut count = 1;
        while let Some(c) = stack.pop() {
            for g in 0..self.images.len() {
                let d = self.translate(c, g, false);
                if !seen[d] {
                    seen[d] = true;
                    count += 1;
                    stack.push(d);
                }
            }
        }
        count
    }
}

/// `a`-generators to `(1, 0)` and `b`-generators to `(0, 1)` in `Z_2 × Z_2`.
pub fn lambda_map(p: &GroupPresentation) -> Result<FiniteQuotientMap> {
    let images = (0..p.generator_count())
        .map(|g| match p.family(g) {
            Some(Family::A) => Ok(vec![1, 0]),
            Some(Family::B) => Ok(vec![0, 1]),
            None => Err(Error::NotQuaternionPresentation("the lambda map")),
        })
        .collect::<Result<Vec<_>>>()?;
    FiniteQuotientMap::new(vec![2, 2], images, p)
}

/// The natural surjection onto the (finite) abelianization.
pub fn commutator_map(p: &GroupPresentation) -> Result<FiniteQuotientMap> {
    let (group, ab) = abelianize_presentation(p);
    if !group.is_finite() {
        return Err(Error::InfiniteTarget(group.to_string()));
    }
    let moduli = group
        .invariant_factors()
        .iter()
        .map(|d| d.to_u64().ok_or_else(|| Error::InvalidQuotientMap(format!("factor {d} too large"))))
        .collect::<Result<Vec<_>>>()?;
    let images = ab
        .generator_images()
        .iter()
        .map(|img| img.iter().map(|x| x.to_u64().expect("reduced coordinates are non-negative")).collect())
        .collect();
    FiniteQuotientMap::new(moduli, images, p)
}

/// The map onto the trivial group.
pub fn trivial_map(p: &GroupPresentation) -> FiniteQuotientMap {
    FiniteQuotientMap { moduli: Vec::new(), images: vec![Vec::new(); p.generator_count()] }
}

/// Cosets of the kernel, the generator action, and a Schreier transversal.
#[derive(Clone, Debug)]
pub struct CosetTable {
    n_generators: usize,
    forward: Vec<usize>,
    backward: Vec<usize>,
    transversal: Vec<Word>,
    /// `(coset, generator)` pairs whose Schreier generator is trivial.
    tree: Vec<bool>,
}

impl CosetTable {
    pub fn coset_count(&self) -> usize {
        self.transversal.len()
    }

    pub fn generator_count(&self) -> usize {
        self.n_generators
    }

    /// `coset · g` (or `coset · g⁻¹`).
    pub fn act(&self, coset: usize, l: Letter) -> usize {
        let i = coset * self.n_generators + l.generator;
        if l.inverse {
            self.backward[i]
        } else {
            self.forward[i]
        }
    }

    pub fn act_word(&self, coset: usize, w: &Word) -> usize {
        w.letters().iter().fold(coset, |c, &l| self.act(c, l))
    }

    pub fn transversal(&self, coset: usize) -> &Word {
        &self.transversal[coset]
    }

    pub fn is_tree_edge(&self, coset: usize, generator: usize) -> bool {
        self.tree[coset * self.n_generators + generator]
    }
}

/// Breadth-first from the identity coset; ties go to the lower generator,
/// positive before inverse, so transversal words are shortlex-minimal.
pub fn build_coset_table(p: &GroupPresentation, phi: &FiniteQuotientMap) -> Result<CosetTable> {
    let n = p.generator_count();
    let order = phi.order();
    let mut forward = vec![0; order * n];
    let mut backward = vec![0; order * n];
    for c in 0..order {
        for g in 0..n {
            forward[c * n + g] = phi.translate(c, g, false);
            backward[c * n + g] = phi.translate(c, g, true);
        }
    }
    let mut transversal: Vec<Option<Word>> = vec![None; order];
    let mut tree = vec![false; order * n];
    transversal[0] = Some(Word::empty());
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for g in 0..n {
            for inverse in [false, true] {
                let d = if inverse { backward[c * n + g] } else { forward[c * n + g] };
                if transversal[d].is_some() {
                    continue;
                }
                let t = transversal[c].as_ref().unwrap().concat(&Word::new([Letter::new(g, inverse)]));
                transversal[d] = Some(t);
                // t_c·g = t_d, or t_d·g = t_c for an inverse edge.
                if inverse {
                    tree[d * n + g] = true;
                } else {
                    tree[c * n + g] = true;
                }
                queue.push_back(d);
            }
        }
    }
    let transversal: Vec<Word> = transversal
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::InvalidQuotientMap("generator images do not reach every coset".into()))?;
    Ok(CosetTable { n_generators: n, forward, backward, transversal, tree })
}

/// Presentation of the kernel on the nontrivial Schreier generators
/// `s_(c,g) = t_c · g · t_(c·g)⁻¹`, with one rewritten relator per
/// (coset, relator) pair.
#[derive(Clone, Debug)]
pub struct SchreierPresentation {
    pub presentation: GroupPresentation,
    /// Schreier generator number for each `(coset, generator)`, or `None`
    /// for transversal tree edges.
    index: Vec<Option<usize>>,
    n_generators: usize,
}

impl SchreierPresentation {
    pub fn generator_index(&self, coset: usize, generator: usize) -> Option<usize> {
        self.index[coset * self.n_generators + generator]
    }
}

fn schreier_index(table: &CosetTable) -> (Vec<Option<usize>>, Vec<Generator>) {
    let n = table.n_generators;
    let mut index = vec![None; table.coset_count() * n];
    let mut gens = Vec::new();
    for c in 0..table.coset_count() {
        for g in 0..n {
            if !table.is_tree_edge(c, g) {
                index[c * n + g] = Some(gens.len());
                gens.push(Generator::Schreier { coset: c, generator: g });
            }
        }
    }
    (index, gens)
}

/// Rewrite `t_c · r · t_c⁻¹` in Schreier generators.
fn rewrite(table: &CosetTable, index: &[Option<usize>], coset: usize, r: &Word) -> Vec<Letter> {
    let n = table.n_generators;
    let mut d = coset;
    let mut out = Vec::with_capacity(r.len());
    for &l in r.letters() {
        if l.inverse {
            let e = table.act(d, l);
            if let Some(s) = index[e * n + l.generator] {
                out.push(Letter::new(s, true));
            }
            d = e;
        } else {
            if let Some(s) = index[d * n + l.generator] {
                out.push(Letter::new(s, false));
            }
            d = table.act(d, l);
        }
    }
    debug_assert_eq!(d, coset, "relator does not lie in the kernel");
    out
}

pub fn reidemeister_schreier(p: &GroupPresentation, table: &CosetTable) -> SchreierPresentation {
    let (index, gens) = schreier_index(table);
    let relators: Vec<Word> = (0..table.coset_count())
        .flat_map(|c| p.relators().iter().map(move |r| (c, r)))
        .map(|(c, r)| Word::new(rewrite(table, &index, c, r)))
        .collect();
    SchreierPresentation {
        presentation: GroupPresentation::new(gens, relators, p.primes()),
        index,
        n_generators: table.n_generators,
    }
}

/// The word `t_c · g · t_(c·g)⁻¹` in the original generators.
pub fn schreier_generator_word(table: &CosetTable, coset: usize, generator: usize) -> Word {
    let g = Letter::new(generator, false);
    let target = table.act(coset, g);
    table.transversal(coset).concat(&Word::new([g])).concat(&table.transversal(target).inverse())
}

pub fn quotient_map(p: &GroupPresentation, which: SubgroupKind) -> Result<FiniteQuotientMap> {
    match which {
        SubgroupKind::Lambda => lambda_map(p),
        SubgroupKind::Commutator => commutator_map(p),
    }
}

/// Abelianization of `Λ_(p,l)` or `[Γ, Γ]`, refusing quotients larger
/// than `index_ceiling`.
pub fn subgroup_abelianization(p: &GroupPresentation, which: SubgroupKind, index_ceiling: u64) -> Result<AbelianGroup> {
    let phi = quotient_map(p, which)?;
    let index = phi.order() as u64;
    if index > index_ceiling {
        return Err(Error::IndexCeiling { index, ceiling: index_ceiling });
    }
    let table = build_coset_table(p, &phi)?;
    let (index_map, gens) = schreier_index(&table);
    let rows: Vec<Vec<(usize, i64)>> = (0..table.coset_count())
        .into_par_iter()
        .flat_map_iter(|c| {
            let (table, index_map) = (&table, &index_map);
            p.relators().iter().map(move |r| Word::new(rewrite(table, index_map, c, r)).sparse_exponent_sums())
        })
        .collect();
    Ok(abelian_invariants_sparse(&rows, gens.len()))
}
