//! Relation-preserving maps, epimorphisms, and their enumeration.
//!
//! An epimorphism is a structure-preserving surjection where every target
//! edge lifts to a source edge; an isomorphism is a bijective epimorphism.
//! Enumeration is a backtracking search over assignments in carrier order,
//! pruning on edges that land outside the target relation.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::structure::{ElementId, FinStructure};

/// Classification flags of a map, as computed by `check`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MorphismFlags {
    /// Every source edge maps to a target edge, in every relation.
    pub preserving: bool,
    /// Preserving, onto, and every target edge has a source-edge preimage.
    pub epimorphism: bool,
    /// An injective epimorphism.
    pub isomorphism: bool,
}

/// A total assignment between two structures of equal arity, with its
/// classification flags cached at construction time.
#[derive(Clone, Debug)]
pub struct Morphism {
    source: Arc<FinStructure>,
    target: Arc<FinStructure>,
    map: Vec<u32>,
    flags: MorphismFlags,
}

impl PartialEq for Morphism {
    fn eq(&self, other: &Self) -> bool {
        self.map == other.map
            && Morphism::same_structure(self.source(), other.source())
            && Morphism::same_structure(self.target(), other.target())
    }
}
impl Eq for Morphism {}

impl Morphism {
    /// Build and classify a total map given by target indices in source
    /// carrier order.
    pub fn new(source: Arc<FinStructure>, target: Arc<FinStructure>, map: Vec<u32>) -> Result<Self> {
        if source.arity() != target.arity() {
            return Err(Error::precondition(format!(
                "morphism {} -> {}: arity mismatch",
                source.name(),
                target.name()
            )));
        }
        if map.len() != source.size() {
            return Err(Error::structural(format!(
                "morphism {} -> {}: map is not total ({} of {} elements)",
                source.name(),
                target.name(),
                map.len(),
                source.size()
            )));
        }
        if let Some(&bad) = map.iter().find(|&&t| t as usize >= target.size()) {
            return Err(Error::structural(format!(
                "morphism {} -> {}: image index {bad} outside the target carrier",
                source.name(),
                target.name()
            )));
        }
        let flags = compute_flags(&source, &target, &map);
        Ok(Morphism { source, target, map, flags })
    }

    /// Build from named pairs, e.g. parsed from a JSON document.
    pub fn from_named_pairs(
        source: Arc<FinStructure>,
        target: Arc<FinStructure>,
        pairs: &[(String, String)],
    ) -> Result<Self> {
        let mut map = vec![u32::MAX; source.size()];
        for (from, to) in pairs {
            let i = source
                .index_of(from)
                .ok_or_else(|| Error::structural(format!("unknown source element '{from}'")))?;
            let j = target
                .index_of(to)
                .ok_or_else(|| Error::structural(format!("unknown target element '{to}'")))?;
            if map[i] != u32::MAX {
                return Err(Error::structural(format!("element '{from}' mapped twice")));
            }
            map[i] = j as u32;
        }
        if let Some(i) = map.iter().position(|&t| t == u32::MAX) {
            return Err(Error::structural(format!(
                "map is not total: '{}' has no image",
                source.element(i)
            )));
        }
        Morphism::new(source, target, map)
    }

    pub fn identity(s: &Arc<FinStructure>) -> Morphism {
        let map = (0..s.size() as u32).collect();
        Morphism::new(Arc::clone(s), Arc::clone(s), map).expect("identity is always valid")
    }

    pub fn source(&self) -> &FinStructure {
        &self.source
    }

    pub fn target(&self) -> &FinStructure {
        &self.target
    }

    pub fn source_arc(&self) -> &Arc<FinStructure> {
        &self.source
    }

    pub fn target_arc(&self) -> &Arc<FinStructure> {
        &self.target
    }

    /// Image of the source element with the given index.
    pub fn apply(&self, index: usize) -> usize {
        self.map[index] as usize
    }

    pub fn map(&self) -> &[u32] {
        &self.map
    }

    /// Image of a named element.
    pub fn apply_name(&self, name: &str) -> Option<&ElementId> {
        let i = self.source.index_of(name)?;
        Some(self.target.element(self.map[i] as usize))
    }

    /// The map as named pairs in source carrier order.
    pub fn named_pairs(&self) -> Vec<(ElementId, ElementId)> {
        self.map
            .iter()
            .enumerate()
            .map(|(i, &t)| (self.source.element(i).clone(), self.target.element(t as usize).clone()))
            .collect()
    }

    /// Cached flags from construction time.
    pub fn flags(&self) -> MorphismFlags {
        self.flags
    }

    pub fn is_preserving(&self) -> bool {
        self.flags.preserving
    }

    pub fn is_epimorphism(&self) -> bool {
        self.flags.epimorphism
    }

    pub fn is_isomorphism(&self) -> bool {
        self.flags.isomorphism
    }

    /// Recompute the flags from scratch; the `check_morphism` operation.
    /// Always agrees with the cached flags.
    pub fn check(&self) -> MorphismFlags {
        compute_flags(&self.source, &self.target, &self.map)
    }

    /// Two structure handles denote the same structure: pointer equality
    /// with a structural fallback.
    pub fn same_structure(a: &FinStructure, b: &FinStructure) -> bool {
        std::ptr::eq(a, b) || a == b
    }

    /// The fiber of a target element, as source indices in carrier order.
    pub fn fiber(&self, target_index: usize) -> Vec<usize> {
        (0..self.map.len())
            .filter(|&i| self.map[i] as usize == target_index)
            .collect()
    }
}

/// Pointwise composition `g o f` for `f: X -> Y`, `g: Y -> Z`, written in
/// diagram order: `compose(f, g): X -> Z`.
pub fn compose(f: &Morphism, g: &Morphism) -> Result<Morphism> {
    if !Morphism::same_structure(f.target(), g.source()) {
        return Err(Error::precondition(format!(
            "compose: endpoint mismatch ({} -> {} then {} -> {})",
            f.source().name(),
            f.target().name(),
            g.source().name(),
            g.target().name()
        )));
    }
    let map = f.map.iter().map(|&m| g.map[m as usize]).collect();
    Morphism::new(Arc::clone(f.source_arc()), Arc::clone(g.target_arc()), map)
}

fn compute_flags(source: &FinStructure, target: &FinStructure, map: &[u32]) -> MorphismFlags {
    let preserving = source.relations().iter().zip(target.relations()).all(|(rs, rt)| {
        rs.edges()
            .iter()
            .all(|&(u, v)| rt.contains(map[u as usize], map[v as usize]))
    });

    let mut hit = vec![false; target.size()];
    for &t in map {
        hit[t as usize] = true;
    }
    let onto = hit.iter().all(|&h| h);

    let covering = preserving
        && onto
        && source.relations().iter().zip(target.relations()).all(|(rs, rt)| {
            let mut covered = vec![false; rt.len()];
            for &(u, v) in rs.edges() {
                let e = (map[u as usize], map[v as usize]);
                if let Ok(pos) = rt.edges().binary_search(&e) {
                    covered[pos] = true;
                }
            }
            covered.iter().all(|&c| c)
        });

    let epimorphism = covering;
    let isomorphism = epimorphism && {
        let mut seen = vec![false; target.size()];
        map.iter().all(|&t| !std::mem::replace(&mut seen[t as usize], true))
    };

    MorphismFlags { preserving, epimorphism, isomorphism }
}

/// Which class of maps a query asks for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MorphismClass {
    Preserving,
    Epimorphism,
    Isomorphism,
}

/// Enumeration request: which class, and how many maps to materialize.
/// `cap = 0` counts without returning any maps; the count is exact either way.
#[derive(Clone, Copy, Debug)]
pub struct MorphismQuery {
    pub mode: MorphismClass,
    pub cap: usize,
}

/// Enumeration result: maps in canonical (lexicographic) order, truncated
/// at the cap, plus the exact total count.
#[derive(Clone, Debug)]
pub struct Enumeration {
    pub morphisms: Vec<Morphism>,
    pub total: u64,
}

struct Search<'a> {
    source: &'a Arc<FinStructure>,
    target: &'a Arc<FinStructure>,
    query: MorphismQuery,
    /// Per source element: edges (relation, u, v) whose endpoints are both
    /// assigned once this element is, used for incremental pruning.
    checks: Vec<Vec<(usize, u32, u32)>>,
    assignment: Vec<u32>,
    /// How many source elements map to each target element so far.
    load: Vec<u32>,
    unhit: usize,
    found: Vec<Morphism>,
    total: u64,
}

impl<'a> Search<'a> {
    fn run(mut self) -> Enumeration {
        let n = self.source.size();
        self.descend(0, n);
        Enumeration { morphisms: self.found, total: self.total }
    }

    fn descend(&mut self, depth: usize, n: usize) {
        if depth == n {
            if self.accept_leaf() {
                self.total += 1;
                if self.found.len() < self.query.cap {
                    let m = Morphism::new(
                        Arc::clone(self.source),
                        Arc::clone(self.target),
                        self.assignment.clone(),
                    )
                    .expect("search assignments are total and in range");
                    self.found.push(m);
                }
            }
            return;
        }
        let onto_needed = !matches!(self.query.mode, MorphismClass::Preserving);
        for t in 0..self.target.size() as u32 {
            if self.query.mode == MorphismClass::Isomorphism && self.load[t as usize] > 0 {
                continue;
            }
            self.assignment[depth] = t;
            if !self.edges_ok(depth) {
                continue;
            }
            let was_unhit = self.load[t as usize] == 0;
            self.load[t as usize] += 1;
            if was_unhit {
                self.unhit -= 1;
            }
            // Remaining-capacity prune: each still-unhit target needs a
            // distinct remaining source element.
            if !(onto_needed && self.unhit > n - depth - 1) {
                self.descend(depth + 1, n);
            }
            self.load[t as usize] -= 1;
            if was_unhit {
                self.unhit += 1;
            }
        }
    }

    fn edges_ok(&self, depth: usize) -> bool {
        self.checks[depth].iter().all(|&(r, u, v)| {
            self.target.relations()[r]
                .contains(self.assignment[u as usize], self.assignment[v as usize])
        })
    }

    fn accept_leaf(&self) -> bool {
        match self.query.mode {
            MorphismClass::Preserving => true,
            MorphismClass::Epimorphism | MorphismClass::Isomorphism => {
                // Onto and injectivity are maintained during the search;
                // edge coverage is the leaf condition.
                self.unhit == 0
                    && self
                        .source
                        .relations()
                        .iter()
                        .zip(self.target.relations())
                        .all(|(rs, rt)| {
                            let mut covered = vec![false; rt.len()];
                            let mut missing = rt.len();
                            for &(u, v) in rs.edges() {
                                let e = (
                                    self.assignment[u as usize],
                                    self.assignment[v as usize],
                                );
                                if let Ok(pos) = rt.edges().binary_search(&e) {
                                    if !std::mem::replace(&mut covered[pos], true) {
                                        missing -= 1;
                                        if missing == 0 {
                                            return true;
                                        }
                                    }
                                }
                            }
                            missing == 0
                        })
            }
        }
    }
}

/// Enumerate all maps of the requested class from `source` onto `target`,
/// in canonical order. Counts are exact regardless of the cap.
pub fn enumerate_morphisms(
    source: &Arc<FinStructure>,
    target: &Arc<FinStructure>,
    query: MorphismQuery,
) -> Result<Enumeration> {
    if source.arity() != target.arity() {
        return Err(Error::precondition(format!(
            "enumerate: arity mismatch ({} vs {})",
            source.arity(),
            target.arity()
        )));
    }
    let n = source.size();
    let mut checks: Vec<Vec<(usize, u32, u32)>> = vec![Vec::new(); n];
    for (r, rel) in source.relations().iter().enumerate() {
        for &(u, v) in rel.edges() {
            checks[u.max(v) as usize].push((r, u, v));
        }
    }
    let search = Search {
        source,
        target,
        query,
        checks,
        assignment: vec![0; n],
        load: vec![0; target.size()],
        unhit: target.size(),
        found: Vec::new(),
        total: 0,
    };
    Ok(search.run())
}

/// Shorthand for epimorphism enumeration, the common case.
pub fn enumerate_epimorphisms(
    source: &Arc<FinStructure>,
    target: &Arc<FinStructure>,
    cap: usize,
) -> Result<Enumeration> {
    enumerate_morphisms(source, target, MorphismQuery { mode: MorphismClass::Epimorphism, cap })
}

/// Morphism JSON document shape: source and target structure names plus the
/// assignment keyed by source element name.
pub fn morphism_named_map(m: &Morphism) -> BTreeMap<String, String> {
    m.named_pairs()
        .into_iter()
        .map(|(a, b)| (a.as_str().to_string(), b.as_str().to_string()))
        .collect()
}
