//! Constructions placing arbitrary surjective structures below members of
//! the amalgamable family: the 4m-copy refinement, spiral covers of a
//! single surjective relation, and the point-resolving refinement that
//! forces unique successors over a chosen fiber.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::morphism::Morphism;
use crate::spiral::{Spiral, SpiralStructure};
use crate::structure::{EdgeSet, ElementId, FinStructure};

/// Sign of a refinement copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// Label of one element of the refined structure: which of the `4m`
/// copies it lives in and which base element it covers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CopyLabel {
    pub base: ElementId,
    /// 1-based relation index of the copy block.
    pub relation: usize,
    pub sign: Sign,
    pub hat: bool,
}

impl CopyLabel {
    pub fn label(&self) -> String {
        let hat = if self.hat { "h" } else { "" };
        let sign = match self.sign {
            Sign::Plus => "+",
            Sign::Minus => "-",
        };
        format!("{}(A{}{}s{})", self.base, hat, sign, self.relation)
    }
}

/// A refinement: the structure on `4m` copies together with the
/// base-recovering projection, which is always an epimorphism onto a
/// structure satisfying both amalgamation hypotheses.
#[derive(Clone, Debug)]
pub struct RefinementResult {
    pub b: Arc<FinStructure>,
    pub projection: Morphism,
    pub labels: Vec<CopyLabel>,
}

/// Refine a surjective structure into the amalgamable family: take four
/// copies per relation, wire the cross edges between the plus and minus
/// copies of that relation, and give every element one canonical
/// predecessor edge from the plus copy and one canonical successor edge
/// into the minus copy.
pub fn refine(a: &Arc<FinStructure>) -> Result<RefinementResult> {
    a.require_surjective("refine")?;
    let m = a.arity();
    let n = a.size();
    let variants = [(Sign::Plus, false), (Sign::Plus, true), (Sign::Minus, false), (Sign::Minus, true)];

    let mut labels = Vec::with_capacity(4 * m * n);
    for r in 1..=m {
        for &(sign, hat) in &variants {
            for base in a.carrier() {
                labels.push(CopyLabel { base: base.clone(), relation: r, sign, hat });
            }
        }
    }
    let idx = |r: usize, sign: Sign, hat: bool, base: u32| -> u32 {
        let variant = match (sign, hat) {
            (Sign::Plus, false) => 0,
            (Sign::Plus, true) => 1,
            (Sign::Minus, false) => 2,
            (Sign::Minus, true) => 3,
        };
        (((r - 1) * 4 + variant) * n) as u32 + base
    };
    let total = (4 * m * n) as u32;

    let mut relations = Vec::with_capacity(m);
    for r in 1..=m {
        let rel = &a.relations()[r - 1];
        let mut edges = Vec::new();
        // Cross edges between the four copies of this relation.
        for &(x, y) in rel.edges() {
            for &xh in &[false, true] {
                for &yh in &[false, true] {
                    edges.push((idx(r, Sign::Plus, xh, x), idx(r, Sign::Minus, yh, y)));
                }
            }
        }
        // One canonical predecessor edge into every element, from the
        // unhatted plus copy; one canonical successor edge out of every
        // element, into the unhatted minus copy. The canonical choice is
        // the least one in carrier order.
        for b in 0..total {
            let base = b % n as u32;
            let pred = rel.predecessors(base).next().expect("surjective");
            edges.push((idx(r, Sign::Plus, false, pred), b));
            let succ = rel.successors(base).next().expect("surjective");
            edges.push((b, idx(r, Sign::Minus, false, succ)));
        }
        relations.push(edges);
    }

    let carrier = labels
        .iter()
        .map(|l| ElementId::new(l.label()))
        .collect::<Result<Vec<_>>>()?;
    let b = Arc::new(FinStructure::from_parts(
        format!("refine({})", a.name()),
        carrier,
        relations,
    )?);
    let map: Vec<u32> = (0..total).map(|i| i % n as u32).collect();
    let projection = Morphism::new(Arc::clone(&b), Arc::clone(a), map)?;

    if b.size() != 4 * m * n {
        return Err(Error::precondition("refine: wrong output size".to_string()));
    }
    if !projection.is_epimorphism() {
        return Err(Error::precondition("refine: projection is not an epimorphism".to_string()));
    }
    let base_check = crate::amalgamation::check_amalgamation_base(&b)?;
    if !base_check.passes() {
        return Err(Error::precondition(
            "refine: output fails the amalgamation base check".to_string(),
        ));
    }
    Ok(RefinementResult { b, projection, labels })
}

/// A deterministic eventually-periodic walk: values reachable from a start
/// by always taking the least successor (or predecessor).
struct LeastWalk {
    /// Values `w_0, w_1, ..., w_{entry + period - 1}`; beyond that the walk
    /// repeats with the given period.
    prefix: Vec<u32>,
    entry: usize,
    period: usize,
}

impl LeastWalk {
    fn new(rel: &EdgeSet, start: u32, forward: bool) -> Self {
        let mut seen: std::collections::HashMap<u32, usize> = std::collections::HashMap::new();
        let mut prefix = Vec::new();
        let mut current = start;
        loop {
            if let Some(&at) = seen.get(&current) {
                let period = prefix.len() - at;
                return LeastWalk { prefix, entry: at, period };
            }
            seen.insert(current, prefix.len());
            prefix.push(current);
            current = if forward {
                rel.successors(current).next().expect("surjective relation")
            } else {
                rel.predecessors(current).next().expect("surjective relation")
            };
        }
    }

    fn at(&self, j: usize) -> u32 {
        if j < self.prefix.len() {
            self.prefix[j]
        } else {
            self.prefix[self.entry + (j - self.entry) % self.period]
        }
    }
}

/// One spiral component of a cover, with the designated middle edge that
/// maps onto the covered base edge.
#[derive(Clone, Debug)]
pub struct CoverComponent {
    pub spiral: Spiral,
    /// Positions `(p, p+1)` of the designated edge.
    pub designated: (usize, usize),
    /// Base labels of positions `1..=n`.
    labels: Vec<u32>,
}

/// A spiral cover of a single surjective relation: one spiral per base
/// edge, with an epimorphic union map.
#[derive(Clone, Debug)]
pub struct SpiralCover {
    pub map: Morphism,
    pub components: Vec<CoverComponent>,
}

impl SpiralCover {
    pub fn structure(&self) -> &Arc<FinStructure> {
        self.map.source_arc()
    }

    pub fn spirals(&self) -> SpiralStructure {
        SpiralStructure::new(self.components.iter().map(|c| c.spiral).collect())
            .expect("covers have at least one component")
    }
}

fn cover_component(rel: &EdgeSet, x0: u32, x1: u32, avoid: &BTreeSet<u32>) -> CoverComponent {
    let back = LeastWalk::new(rel, x0, false);
    let fwd = LeastWalk::new(rel, x1, true);
    // Shift the left block deeper into the backward cycle until its node
    // label leaves the avoid set; impossible only when the whole cycle is
    // avoided, in which case the node stays where it is and is reported.
    let delta = (0..back.period)
        .find(|&d| !avoid.contains(&back.at(back.entry + d)))
        .unwrap_or(0);
    let e_b = back.entry + delta;
    let e_f = fwd.entry;
    let lambda = if back.period == 1 { 2 } else { back.period };
    let rho = if fwd.period == 1 { 2 } else { fwd.period };

    let n = lambda + e_b + e_f + rho;
    let x = lambda;
    let y = lambda + e_b + e_f + 1;
    let spiral = Spiral::new(n, x, y).expect("cover blocks satisfy 1 < x < y < n");

    let mut labels = Vec::with_capacity(n);
    for j in (0..lambda).rev() {
        labels.push(back.at(e_b + j));
    }
    for j in (0..e_b).rev() {
        labels.push(back.at(j));
    }
    for j in 0..e_f {
        labels.push(fwd.at(j));
    }
    for j in 0..rho {
        labels.push(fwd.at(e_f + j));
    }
    debug_assert_eq!(labels.len(), n);
    CoverComponent { spiral, designated: (lambda + e_b, lambda + e_b + 1), labels }
}

/// Cover a single surjective relation by spirals, one per edge: extend the
/// edge to a least-successor/least-predecessor walk, clip one period on
/// each side, and map positions to their walk labels.
pub fn spiral_cover(a: &Arc<FinStructure>) -> Result<SpiralCover> {
    if a.arity() != 1 {
        return Err(Error::precondition(format!(
            "spiral_cover: '{}' has {} relations, need exactly 1",
            a.name(),
            a.arity()
        )));
    }
    a.require_surjective("spiral_cover")?;
    spiral_cover_over(a, 1, &BTreeSet::new(), format!("cover({})", a.name()))
        .map(|(cover, _)| cover)
}

/// Shared worker: cover relation `rel_index` of `a` (avoiding left nodes
/// over `avoid`), lifting every other relation as the full fiber preimage.
/// Returns the cover and the structure it builds.
fn spiral_cover_over(
    a: &Arc<FinStructure>,
    rel_index: usize,
    avoid: &BTreeSet<u32>,
    name: String,
) -> Result<(SpiralCover, Arc<FinStructure>)> {
    let rel = a.relation(rel_index)?;
    let components: Vec<CoverComponent> = rel
        .edges()
        .iter()
        .map(|&(x0, x1)| cover_component(rel, x0, x1, avoid))
        .collect();
    let spirals = SpiralStructure::new(components.iter().map(|c| c.spiral).collect())?;

    let mut carrier = Vec::with_capacity(spirals.total_size());
    let mut base_of = Vec::with_capacity(spirals.total_size());
    for (k, c) in components.iter().enumerate() {
        for (i, &label) in c.labels.iter().enumerate() {
            carrier.push(ElementId::new(format!("{}:{}", k + 1, i + 1))?);
            base_of.push(label);
        }
    }

    let mut relations: Vec<Vec<(u32, u32)>> = vec![Vec::new(); a.arity()];
    let mut offset = 0u32;
    for c in &components {
        for (u, v) in c.spiral.edges() {
            relations[rel_index - 1].push((offset + u as u32 - 1, offset + v as u32 - 1));
        }
        offset += c.spiral.n() as u32;
    }
    // Full preimage lift of every other relation.
    for (j, other) in a.relations().iter().enumerate() {
        if j + 1 == rel_index {
            continue;
        }
        for u in 0..base_of.len() as u32 {
            for v in 0..base_of.len() as u32 {
                if other.contains(base_of[u as usize], base_of[v as usize]) {
                    relations[j].push((u, v));
                }
            }
        }
    }

    let b = Arc::new(FinStructure::from_parts(name, carrier, relations)?);
    let map = Morphism::new(Arc::clone(&b), Arc::clone(a), base_of)?;
    if !map.is_epimorphism() {
        return Err(Error::precondition(
            "spiral_cover: union map is not an epimorphism".to_string(),
        ));
    }
    Ok((SpiralCover { map, components }, b))
}

/// Result of a point-resolving refinement: over the target fiber, resolved
/// elements have exactly one successor in the chosen relation; residual
/// elements (possible only when every label of a wrap cycle is the target)
/// keep two and are reported.
#[derive(Clone, Debug)]
pub struct Resolution {
    pub b: Arc<FinStructure>,
    pub projection: Morphism,
    pub resolved: Vec<ElementId>,
    pub residual: Vec<ElementId>,
}

/// Refine so that elements over `target` have a unique successor in
/// relation `rel_index`: spiral-cover that relation with left nodes kept
/// away from the target fiber, and lift every other relation fully.
pub fn resolving_refinement(
    a: &Arc<FinStructure>,
    rel_index: usize,
    target: &ElementId,
) -> Result<Resolution> {
    let t = a
        .index_of(target.as_str())
        .ok_or_else(|| Error::structural(format!("unknown element '{target}'")))?;
    resolving_refinement_over(a, rel_index, &[t as u32])
}

/// Resolve a whole set of fiber elements at once; used by limit sessions
/// where a base element lifts to several stage elements.
pub fn resolving_refinement_over(
    a: &Arc<FinStructure>,
    rel_index: usize,
    targets: &[u32],
) -> Result<Resolution> {
    a.require_surjective("resolving_refinement")?;
    let avoid: BTreeSet<u32> = targets.iter().copied().collect();
    let (cover, b) = spiral_cover_over(
        a,
        rel_index,
        &avoid,
        format!("resolve({},s{})", a.name(), rel_index),
    )?;
    let rel = b.relation(rel_index)?;
    let mut resolved = Vec::new();
    let mut residual = Vec::new();
    for u in 0..b.size() as u32 {
        if avoid.contains(&(cover.map.apply(u as usize) as u32)) {
            if rel.out_degree(u) == 1 {
                resolved.push(b.element(u as usize).clone());
            } else {
                residual.push(b.element(u as usize).clone());
            }
        }
    }
    Ok(Resolution { projection: cover.map, b, resolved, residual })
}
