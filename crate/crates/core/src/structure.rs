//! Finite relational structures: a carrier with `m` binary edge-sets.
//!
//! Everything downstream (morphism search, amalgamation, refinements,
//! limit sessions) works over these. Structures are immutable after
//! construction and all derived data is kept in canonical (sorted) order
//! so that identical inputs produce byte-identical outputs.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::morphism::Morphism;

/// Name of a single carrier element, unique within its structure.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(String);

impl ElementId {
    pub fn new(name: impl Into<String>) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::structural("element name must be nonempty"));
        }
        Ok(ElementId(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Direction of a relation tag: the symbol `s_i` itself or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Inverse,
}

/// One of the `2m` relation tags `s_1, s_1^-1, ..., s_m, s_m^-1`.
///
/// `index` is 1-based, matching the JSON and CLI conventions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelationTag {
    pub index: usize,
    pub direction: Direction,
}

impl RelationTag {
    pub fn forward(index: usize) -> Self {
        RelationTag { index, direction: Direction::Forward }
    }

    pub fn inverse(index: usize) -> Self {
        RelationTag { index, direction: Direction::Inverse }
    }

    /// The tag for the inverse symbol; an involution.
    pub fn inverted(self) -> Self {
        let direction = match self.direction {
            Direction::Forward => Direction::Inverse,
            Direction::Inverse => Direction::Forward,
        };
        RelationTag { index: self.index, direction }
    }

    /// All `2m` tags in canonical order `s_1, s_1^-1, s_2, s_2^-1, ...`.
    pub fn all(arity: usize) -> Vec<RelationTag> {
        (1..=arity)
            .flat_map(|i| [RelationTag::forward(i), RelationTag::inverse(i)])
            .collect()
    }
}

impl fmt::Display for RelationTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.direction {
            Direction::Forward => write!(f, "s{}", self.index),
            Direction::Inverse => write!(f, "s{}^-1", self.index),
        }
    }
}

/// Edge set of one binary relation over carrier indices.
///
/// Kept sorted in both orientations, so successor and predecessor slices
/// come for free and iteration order is canonical.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSet {
    fwd: Vec<(u32, u32)>,
    rev: Vec<(u32, u32)>,
}

impl EdgeSet {
    pub fn from_pairs(mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_unstable();
        pairs.dedup();
        let mut rev: Vec<(u32, u32)> = pairs.iter().map(|&(u, v)| (v, u)).collect();
        rev.sort_unstable();
        EdgeSet { fwd: pairs, rev }
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn contains(&self, u: u32, v: u32) -> bool {
        self.fwd.binary_search(&(u, v)).is_ok()
    }

    /// Sorted edge list `(source, target)`.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.fwd
    }

    fn slice(of: &[(u32, u32)], key: u32) -> &[(u32, u32)] {
        let lo = of.partition_point(|&(u, _)| u < key);
        let hi = of.partition_point(|&(u, _)| u <= key);
        &of[lo..hi]
    }

    pub fn successors(&self, u: u32) -> impl Iterator<Item = u32> + '_ {
        Self::slice(&self.fwd, u).iter().map(|&(_, v)| v)
    }

    pub fn predecessors(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        Self::slice(&self.rev, v).iter().map(|&(_, u)| u)
    }

    pub fn out_degree(&self, u: u32) -> usize {
        Self::slice(&self.fwd, u).len()
    }

    pub fn in_degree(&self, v: u32) -> usize {
        Self::slice(&self.rev, v).len()
    }

    /// The reversed edge set (swap the two orientations).
    pub fn reversed(&self) -> EdgeSet {
        EdgeSet { fwd: self.rev.clone(), rev: self.fwd.clone() }
    }

    /// Neighbors under a tag direction: successors for forward, predecessors
    /// for inverse.
    pub fn neighbors(&self, direction: Direction, u: u32) -> impl Iterator<Item = u32> + '_ {
        let of = match direction {
            Direction::Forward => &self.fwd,
            Direction::Inverse => &self.rev,
        };
        Self::slice(of, u).iter().map(|&(_, v)| v)
    }

    pub fn degree(&self, direction: Direction, u: u32) -> usize {
        match direction {
            Direction::Forward => self.out_degree(u),
            Direction::Inverse => self.in_degree(u),
        }
    }
}

/// A finite set with `m` binary relations; the objects of the family F0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinStructure {
    name: String,
    carrier: Vec<ElementId>,
    relations: Vec<EdgeSet>,
}

impl FinStructure {
    /// Build from carrier names and index edge lists. Validates that the
    /// carrier is nonempty with distinct names, that at least one relation
    /// is present, and that every edge endpoint lies in the carrier.
    pub fn from_parts(
        name: impl Into<String>,
        carrier: Vec<ElementId>,
        relations: Vec<Vec<(u32, u32)>>,
    ) -> Result<Self> {
        let name = name.into();
        if carrier.is_empty() {
            return Err(Error::structural(format!("structure '{name}': carrier is empty")));
        }
        if relations.is_empty() {
            return Err(Error::structural(format!(
                "structure '{name}': needs at least one relation"
            )));
        }
        let mut sorted: Vec<&str> = carrier.iter().map(|e| e.as_str()).collect();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::structural(format!(
                "structure '{name}': duplicate element names"
            )));
        }
        let n = carrier.len() as u32;
        for (i, edges) in relations.iter().enumerate() {
            if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n) {
                return Err(Error::structural(format!(
                    "structure '{name}': edge ({u},{v}) of relation s{} leaves the carrier",
                    i + 1
                )));
            }
        }
        Ok(FinStructure {
            name,
            carrier,
            relations: relations.into_iter().map(EdgeSet::from_pairs).collect(),
        })
    }

    /// Convenience constructor from string names; mostly for tests and
    /// hand-written inputs.
    pub fn from_names(
        name: impl Into<String>,
        carrier: &[&str],
        relations: &[&[(&str, &str)]],
    ) -> Result<Self> {
        let ids = carrier
            .iter()
            .map(|s| ElementId::new(*s))
            .collect::<Result<Vec<_>>>()?;
        let find = |s: &str| -> Result<u32> {
            carrier
                .iter()
                .position(|c| *c == s)
                .map(|i| i as u32)
                .ok_or_else(|| Error::structural(format!("unknown element '{s}'")))
        };
        let rels = relations
            .iter()
            .map(|edges| {
                edges
                    .iter()
                    .map(|&(u, v)| Ok((find(u)?, find(v)?)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FinStructure::from_parts(name, ids, rels)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of relation symbols `m`.
    pub fn arity(&self) -> usize {
        self.relations.len()
    }

    pub fn size(&self) -> usize {
        self.carrier.len()
    }

    pub fn carrier(&self) -> &[ElementId] {
        &self.carrier
    }

    pub fn element(&self, index: usize) -> &ElementId {
        &self.carrier[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.carrier.iter().position(|e| e.as_str() == name)
    }

    /// Relation edge sets in symbol order `s_1 .. s_m` (zero-based slice).
    pub fn relations(&self) -> &[EdgeSet] {
        &self.relations
    }

    /// The edge set for a 1-based relation index.
    pub fn relation(&self, index: usize) -> Result<&EdgeSet> {
        if index == 0 || index > self.relations.len() {
            return Err(Error::precondition(format!(
                "relation index {index} out of range 1..={}",
                self.relations.len()
            )));
        }
        Ok(&self.relations[index - 1])
    }

    /// The edge set denoted by a tag: the relation itself, or its reversal.
    /// This is the `inverse_relation` operation.
    pub fn inverse_relation(&self, tag: RelationTag) -> Result<EdgeSet> {
        let rel = self.relation(tag.index)?;
        Ok(match tag.direction {
            Direction::Forward => rel.clone(),
            Direction::Inverse => rel.reversed(),
        })
    }

    /// Edge set of a tag as named pairs, in canonical order.
    pub fn tagged_edges(&self, tag: RelationTag) -> Result<Vec<(ElementId, ElementId)>> {
        let set = self.inverse_relation(tag)?;
        Ok(set
            .edges()
            .iter()
            .map(|&(u, v)| (self.carrier[u as usize].clone(), self.carrier[v as usize].clone()))
            .collect())
    }

    /// True when every relation is surjective: each element has at least one
    /// successor and one predecessor under each `s_i`.
    pub fn is_surjective(&self) -> bool {
        self.validate().is_surjective()
    }

    /// The `validate_structure` operation: per-relation lists of elements
    /// with no successor or no predecessor.
    pub fn validate(&self) -> ValidationReport {
        let per_relation = self
            .relations
            .iter()
            .map(|rel| {
                let mut no_successor = Vec::new();
                let mut no_predecessor = Vec::new();
                for i in 0..self.carrier.len() as u32 {
                    if rel.out_degree(i) == 0 {
                        no_successor.push(self.carrier[i as usize].clone());
                    }
                    if rel.in_degree(i) == 0 {
                        no_predecessor.push(self.carrier[i as usize].clone());
                    }
                }
                RelationCheck { no_successor, no_predecessor }
            })
            .collect();
        ValidationReport { per_relation }
    }

    pub(crate) fn require_surjective(&self, op: &str) -> Result<()> {
        if !self.is_surjective() {
            return Err(Error::precondition(format!(
                "{op}: structure '{}' is not surjective",
                self.name
            )));
        }
        Ok(())
    }
}

/// Surjectivity report for one relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationCheck {
    pub no_successor: Vec<ElementId>,
    pub no_predecessor: Vec<ElementId>,
}

/// Result of `validate_structure`: surjective iff all lists are empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub per_relation: Vec<RelationCheck>,
}

impl ValidationReport {
    pub fn is_surjective(&self) -> bool {
        self.per_relation
            .iter()
            .all(|c| c.no_successor.is_empty() && c.no_predecessor.is_empty())
    }
}

/// Join two component names with the reserved pair separator. If the result
/// collides with an existing name the caller disambiguates, so products of
/// arbitrary inputs still have distinct carriers.
fn pair_name(a: &ElementId, b: &ElementId) -> String {
    format!("{}|{}", a.as_str(), b.as_str())
}

fn dedupe_names(mut names: Vec<String>) -> Vec<ElementId> {
    let mut seen: std::collections::HashSet<String> = std::collections::HashSet::new();
    for name in names.iter_mut() {
        if !seen.insert(name.clone()) {
            let mut k = 2usize;
            loop {
                let candidate = format!("{name}#{k}");
                if seen.insert(candidate.clone()) {
                    *name = candidate;
                    break;
                }
                k += 1;
            }
        }
    }
    names.into_iter().map(ElementId).collect()
}

/// Product structure `S x T` with its two projections. Both projections are
/// epimorphisms when `S` and `T` are surjective, which is required here.
pub fn product(
    s: &Arc<FinStructure>,
    t: &Arc<FinStructure>,
) -> Result<(Arc<FinStructure>, Morphism, Morphism)> {
    if s.arity() != t.arity() {
        return Err(Error::precondition(format!(
            "product: arity mismatch ({} vs {})",
            s.arity(),
            t.arity()
        )));
    }
    s.require_surjective("product")?;
    t.require_surjective("product")?;

    let nt = t.size() as u32;
    let mut names = Vec::with_capacity(s.size() * t.size());
    for a in s.carrier() {
        for b in t.carrier() {
            names.push(pair_name(a, b));
        }
    }
    let carrier = dedupe_names(names);

    let mut relations = Vec::with_capacity(s.arity());
    for (rs, rt) in s.relations().iter().zip(t.relations()) {
        let mut edges = Vec::with_capacity(rs.len() * rt.len());
        for &(a, a2) in rs.edges() {
            for &(b, b2) in rt.edges() {
                edges.push((a * nt + b, a2 * nt + b2));
            }
        }
        relations.push(edges);
    }

    let p = Arc::new(FinStructure::from_parts(
        format!("{}x{}", s.name(), t.name()),
        carrier,
        relations,
    )?);
    let to_s: Vec<u32> = (0..p.size() as u32).map(|i| i / nt).collect();
    let to_t: Vec<u32> = (0..p.size() as u32).map(|i| i % nt).collect();
    let pi1 = Morphism::new(Arc::clone(&p), Arc::clone(s), to_s)?;
    let pi2 = Morphism::new(Arc::clone(&p), Arc::clone(t), to_t)?;
    Ok((p, pi1, pi2))
}

/// Pullback (fiber product) of two maps into a common target:
/// `D0 = {(b,c) : phi1(b) = phi2(c)}` with the componentwise relations and
/// the two projections. The projections need not be epimorphisms.
pub fn pullback(
    phi1: &Morphism,
    phi2: &Morphism,
) -> Result<(Arc<FinStructure>, Morphism, Morphism)> {
    if !Morphism::same_structure(phi1.target(), phi2.target()) {
        return Err(Error::precondition(
            "pullback: the two maps have different targets".to_string(),
        ));
    }
    let b = phi1.source();
    let c = phi2.source();
    if b.arity() != c.arity() {
        return Err(Error::precondition(format!(
            "pullback: arity mismatch ({} vs {})",
            b.arity(),
            c.arity()
        )));
    }

    let nc = c.size() as u32;
    let mut members: Vec<(u32, u32)> = Vec::new();
    let mut position = vec![u32::MAX; b.size() * c.size()];
    for u in 0..b.size() as u32 {
        for v in 0..nc {
            if phi1.apply(u as usize) == phi2.apply(v as usize) {
                position[(u * nc + v) as usize] = members.len() as u32;
                members.push((u, v));
            }
        }
    }
    if members.is_empty() {
        return Err(Error::precondition(
            "pullback: empty fiber product (no pair agrees on the target)".to_string(),
        ));
    }

    let names = members
        .iter()
        .map(|&(u, v)| pair_name(b.element(u as usize), c.element(v as usize)))
        .collect();
    let carrier = dedupe_names(names);

    let mut relations = Vec::with_capacity(b.arity());
    for (rb, rc) in b.relations().iter().zip(c.relations()) {
        let mut edges = Vec::new();
        for &(u, u2) in rb.edges() {
            for &(v, v2) in rc.edges() {
                let p = position[(u * nc + v) as usize];
                let q = position[(u2 * nc + v2) as usize];
                if p != u32::MAX && q != u32::MAX {
                    edges.push((p, q));
                }
            }
        }
        relations.push(edges);
    }

    let d0 = Arc::new(FinStructure::from_parts(
        format!("pb({},{})", b.name(), c.name()),
        carrier,
        relations,
    )?);
    let to_b: Vec<u32> = members.iter().map(|&(u, _)| u).collect();
    let to_c: Vec<u32> = members.iter().map(|&(_, v)| v).collect();
    let pi1 = Morphism::new(Arc::clone(&d0), Arc::clone(phi1.source_arc()), to_b)?;
    let pi2 = Morphism::new(Arc::clone(&d0), Arc::clone(phi2.source_arc()), to_c)?;
    Ok((d0, pi1, pi2))
}
