//! Spirals and spiral structures: the single-relation digraphs on
//! `{1..n}` with path edges plus the two wrap edges `(x,1)` and `(n,y)`,
//! their explicit relation-preserving maps, and the joint-projection and
//! amalgamation constructions that make disjoint unions of spirals a
//! projective Fraisse family.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::morphism::Morphism;
use crate::structure::{ElementId, FinStructure};

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// A spiral on `{1..n}` with left node `x` and right node `y`,
/// `1 < x < y < n`. The edge set is derived: `(i, i+1)` for `i < n`,
/// plus `(x, 1)` and `(n, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Spiral {
    n: usize,
    x: usize,
    y: usize,
}

impl Spiral {
    pub fn new(n: usize, x: usize, y: usize) -> Result<Self> {
        if x <= 1 {
            return Err(Error::precondition(format!("spiral ({n},{x},{y}): needs 1 < x")));
        }
        if y <= x {
            return Err(Error::precondition(format!("spiral ({n},{x},{y}): needs x < y")));
        }
        if n <= y {
            return Err(Error::precondition(format!("spiral ({n},{x},{y}): needs y < n")));
        }
        Ok(Spiral { n, x, y })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x(&self) -> usize {
        self.x
    }

    pub fn y(&self) -> usize {
        self.y
    }

    /// Size of the left circle `[1, x]`.
    pub fn left_len(&self) -> usize {
        self.x
    }

    /// Number of edges on the middle line `[x, y]`.
    pub fn mid_edges(&self) -> usize {
        self.y - self.x
    }

    /// Size of the right circle `[y, n]`.
    pub fn right_len(&self) -> usize {
        self.n + 1 - self.y
    }

    /// Derived edges as 1-based positions, in canonical order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> = (1..self.n).map(|i| (i, i + 1)).collect();
        e.push((self.x, 1));
        e.push((self.n, self.y));
        e.sort_unstable();
        e
    }

    /// Realize as a single-relation structure with elements named "1".."n".
    pub fn to_structure(&self, name: impl Into<String>) -> FinStructure {
        let carrier = (1..=self.n)
            .map(|i| ElementId::new(i.to_string()).expect("nonempty"))
            .collect();
        let edges = self
            .edges()
            .into_iter()
            .map(|(u, v)| (u as u32 - 1, v as u32 - 1))
            .collect();
        FinStructure::from_parts(name, carrier, vec![edges]).expect("spiral edges are in range")
    }
}

/// A disjoint union of spirals; always surjective as a structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpiralStructure {
    components: Vec<Spiral>,
}

impl SpiralStructure {
    pub fn new(components: Vec<Spiral>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::precondition("spiral structure needs at least one component"));
        }
        Ok(SpiralStructure { components })
    }

    pub fn single(s: Spiral) -> Self {
        SpiralStructure { components: vec![s] }
    }

    pub fn components(&self) -> &[Spiral] {
        &self.components
    }

    pub fn total_size(&self) -> usize {
        self.components.iter().map(|s| s.n).sum()
    }

    /// Realize as a structure with elements named "k:i" for component k
    /// (1-based) and position i.
    pub fn to_structure(&self, name: impl Into<String>) -> FinStructure {
        let mut carrier = Vec::with_capacity(self.total_size());
        let mut edges = Vec::new();
        let mut offset = 0u32;
        for (k, s) in self.components.iter().enumerate() {
            for i in 1..=s.n {
                carrier.push(ElementId::new(format!("{}:{}", k + 1, i)).expect("nonempty"));
            }
            for (u, v) in s.edges() {
                edges.push((offset + u as u32 - 1, offset + v as u32 - 1));
            }
            offset += s.n as u32;
        }
        FinStructure::from_parts(name, carrier, vec![edges]).expect("edges are in range")
    }
}

/// A spiral structure together with its realization as a `FinStructure`
/// and the element index of every component position.
#[derive(Clone, Debug)]
pub struct SpiralRealization {
    spirals: SpiralStructure,
    structure: Arc<FinStructure>,
    /// `elems[k][i-1]` is the carrier index of position `i` in component `k`.
    elems: Vec<Vec<u32>>,
}

impl SpiralRealization {
    pub fn from_spirals(name: impl Into<String>, spirals: &SpiralStructure) -> Self {
        let structure = Arc::new(spirals.to_structure(name));
        let mut elems = Vec::new();
        let mut offset = 0u32;
        for s in spirals.components() {
            elems.push((offset..offset + s.n as u32).collect());
            offset += s.n as u32;
        }
        SpiralRealization { spirals: spirals.clone(), structure, elems }
    }

    /// Recognize an arbitrary single-relation structure as a disjoint union
    /// of spirals. Fails when any component is not a spiral.
    pub fn from_structure(structure: &Arc<FinStructure>) -> Result<Self> {
        if structure.arity() != 1 {
            return Err(Error::precondition(format!(
                "'{}' is not a spiral structure: arity {} != 1",
                structure.name(),
                structure.arity()
            )));
        }
        let rel = &structure.relations()[0];
        let n = structure.size();
        // Connected components in the undirected sense.
        let mut comp = vec![usize::MAX; n];
        let mut comp_count = 0;
        for start in 0..n as u32 {
            if comp[start as usize] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            comp[start as usize] = comp_count;
            while let Some(u) = stack.pop() {
                for v in rel.successors(u).chain(rel.predecessors(u)) {
                    if comp[v as usize] == usize::MAX {
                        comp[v as usize] = comp_count;
                        stack.push(v);
                    }
                }
            }
            comp_count += 1;
        }
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); comp_count];
        for (i, &c) in comp.iter().enumerate() {
            members[c].push(i as u32);
        }
        // Components ordered by their least element, which is carrier order.
        members.sort_by_key(|m| m[0]);

        let mut spirals = Vec::new();
        let mut elems = Vec::new();
        for m in &members {
            let (spiral, positions) = recognize_spiral(structure, rel, m)?;
            spirals.push(spiral);
            elems.push(positions);
        }
        Ok(SpiralRealization {
            spirals: SpiralStructure::new(spirals)?,
            structure: Arc::clone(structure),
            elems,
        })
    }

    pub fn spirals(&self) -> &SpiralStructure {
        &self.spirals
    }

    pub fn structure(&self) -> &Arc<FinStructure> {
        &self.structure
    }

    pub fn component(&self, k: usize) -> &Spiral {
        &self.spirals.components()[k]
    }

    pub fn component_count(&self) -> usize {
        self.elems.len()
    }

    /// Carrier index of position `pos` (1-based) in component `k`.
    pub fn element(&self, k: usize, pos: usize) -> u32 {
        self.elems[k][pos - 1]
    }

    /// Locate a carrier index: `(component, position)`.
    pub fn locate(&self, index: u32) -> (usize, usize) {
        for (k, positions) in self.elems.iter().enumerate() {
            if let Some(p) = positions.iter().position(|&e| e == index) {
                return (k, p + 1);
            }
        }
        unreachable!("index belongs to some component")
    }
}

fn recognize_spiral(
    structure: &FinStructure,
    rel: &crate::structure::EdgeSet,
    members: &[u32],
) -> Result<(Spiral, Vec<u32>)> {
    let n = members.len();
    let bad = |why: &str| {
        Error::precondition(format!(
            "'{}' is not a spiral structure: component of '{}' {}",
            structure.name(),
            structure.element(members[0] as usize),
            why
        ))
    };
    // The left node is the unique vertex with two successors, the right
    // node the unique vertex with two predecessors.
    let mut x_node = None;
    for &u in members {
        match rel.out_degree(u) {
            1 => {}
            2 => {
                if x_node.replace(u).is_some() {
                    return Err(bad("has two double-successor vertices"));
                }
            }
            _ => return Err(bad("has a vertex with out-degree not in {1,2}")),
        }
        if !matches!(rel.in_degree(u), 1 | 2) {
            return Err(bad("has a vertex with in-degree not in {1,2}"));
        }
    }
    let x_node = x_node.ok_or_else(|| bad("has no double-successor vertex"))?;

    // Position 1 is the successor of the left node whose forward walk
    // returns to the left node; the other successor starts the middle line.
    let succs: Vec<u32> = rel.successors(x_node).collect();
    let returns = |mut v: u32| -> bool {
        for _ in 0..n {
            if v == x_node {
                return true;
            }
            let next: Vec<u32> = rel.successors(v).collect();
            if next.len() != 1 {
                return false;
            }
            v = next[0];
        }
        false
    };
    let first = if returns(succs[0]) { succs[0] } else { succs[1] };
    if !returns(first) {
        return Err(bad("has no cycle returning to its double-successor vertex"));
    }

    // Walk 1 -> 2 -> ... -> n: from position 1 up to the left node, then
    // along the middle and right parts, taking the non-returning successor
    // at the left node.
    let mut positions = vec![first];
    let mut current = first;
    while positions.len() < n {
        let next: Vec<u32> = rel.successors(current).collect();
        let step = if current == x_node {
            *next.iter().find(|&&v| v != first).ok_or_else(|| bad("left node lacks a middle successor"))?
        } else {
            if next.len() != 1 {
                return Err(bad("has an unexpected branch outside the left node"));
            }
            next[0]
        };
        if positions.contains(&step) {
            return Err(bad("walk revisits a vertex before covering the component"));
        }
        positions.push(step);
        current = step;
    }

    let x = positions.iter().position(|&v| v == x_node).ok_or_else(|| bad("left node unreachable"))? + 1;
    // The last element must close onto the right node.
    let last = positions[n - 1];
    let last_succ: Vec<u32> = rel.successors(last).collect();
    if last_succ.len() != 1 {
        return Err(bad("last element must have exactly one successor"));
    }
    let y = positions
        .iter()
        .position(|&v| v == last_succ[0])
        .ok_or_else(|| bad("wrap edge leaves the component"))?
        + 1;
    let spiral = Spiral::new(n, x, y)
        .map_err(|_| bad("node positions violate 1 < x < y < n"))?;
    // Exact edge match: the component must have spiral edges and no others.
    let mut found: Vec<(u32, u32)> = Vec::new();
    for (i, &u) in positions.iter().enumerate() {
        for v in rel.successors(u) {
            let j = positions.iter().position(|&w| w == v).ok_or_else(|| bad("edge leaves the component"))?;
            found.push((i as u32 + 1, j as u32 + 1));
        }
    }
    found.sort_unstable();
    let expected: Vec<(u32, u32)> =
        spiral.edges().into_iter().map(|(u, v)| (u as u32, v as u32)).collect();
    if found != expected {
        return Err(bad("edge set is not exactly the spiral edge set"));
    }
    Ok((spiral, positions))
}

/// Which explicit map of a spiral onto (part of) another to build, and
/// through which anchor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpiralMapSpec {
    /// Onto the whole target through middle anchors `a < b` with
    /// `b - a = mid_edges(M)`.
    OntoFull { a: usize, b: usize },
    /// Onto the left circle of the target through `c` in the left circle
    /// of the source, with `f(c) = x_M`.
    OntoLeft { c: usize },
    /// Onto the right circle of the target through `d` in the right circle
    /// of the source, with `f(d) = y_M`.
    OntoRight { d: usize },
}

/// Values `f(1..n)` of the unique relation-preserving map of the given mode
/// through the given anchor.
pub fn spiral_map_values(n: &Spiral, m: &Spiral, spec: &SpiralMapSpec) -> Result<Vec<usize>> {
    let (xm, ym, mm) = (m.x, m.y, m.n);
    let rm = m.right_len();
    match *spec {
        SpiralMapSpec::OntoFull { a, b } => {
            if m.mid_edges() > n.mid_edges() {
                return Err(Error::precondition(format!(
                    "onto_full: target middle ({}) exceeds source middle ({})",
                    m.mid_edges(),
                    n.mid_edges()
                )));
            }
            if n.left_len() % m.left_len() != 0 {
                return Err(Error::precondition(format!(
                    "onto_full: target left circle ({}) does not divide source left circle ({})",
                    m.left_len(),
                    n.left_len()
                )));
            }
            if n.right_len() % m.right_len() != 0 {
                return Err(Error::precondition(format!(
                    "onto_full: target right circle ({}) does not divide source right circle ({})",
                    m.right_len(),
                    n.right_len()
                )));
            }
            if !(n.x <= a && a < b && b <= n.y && b - a == m.mid_edges()) {
                return Err(Error::precondition(format!(
                    "onto_full: anchor ({a},{b}) invalid: need x_N <= a < b <= y_N and b - a = {}",
                    m.mid_edges()
                )));
            }
            Ok((1..=n.n)
                .map(|pos| {
                    if pos < a {
                        xm - ((a - pos) % xm)
                    } else if pos <= b {
                        xm + (pos - a)
                    } else {
                        ym + ((pos - b) % rm)
                    }
                })
                .collect())
        }
        SpiralMapSpec::OntoLeft { c } => {
            if n.left_len() % m.left_len() != 0 {
                return Err(Error::precondition(format!(
                    "onto_left: target left circle ({}) does not divide source left circle ({})",
                    m.left_len(),
                    n.left_len()
                )));
            }
            if n.right_len() % m.left_len() != 0 {
                return Err(Error::precondition(format!(
                    "onto_left: target left circle ({}) does not divide source right circle ({})",
                    m.left_len(),
                    n.right_len()
                )));
            }
            if !(1 <= c && c <= n.x) {
                return Err(Error::precondition(format!(
                    "onto_left: anchor {c} outside the source left circle [1,{}]",
                    n.x
                )));
            }
            Ok((1..=n.n)
                .map(|pos| {
                    if pos >= c {
                        let v = (pos - c) % xm;
                        if v == 0 {
                            xm
                        } else {
                            v
                        }
                    } else {
                        xm - ((c - pos) % xm)
                    }
                })
                .collect())
        }
        SpiralMapSpec::OntoRight { d } => {
            if n.right_len() % m.right_len() != 0 {
                return Err(Error::precondition(format!(
                    "onto_right: target right circle ({}) does not divide source right circle ({})",
                    m.right_len(),
                    n.right_len()
                )));
            }
            if n.left_len() % m.right_len() != 0 {
                return Err(Error::precondition(format!(
                    "onto_right: target right circle ({}) does not divide source left circle ({})",
                    m.right_len(),
                    n.left_len()
                )));
            }
            if !(n.y <= d && d <= n.n) {
                return Err(Error::precondition(format!(
                    "onto_right: anchor {d} outside the source right circle [{},{}]",
                    n.y, n.n
                )));
            }
            Ok((1..=n.n)
                .map(|pos| {
                    if pos >= d {
                        ym + ((pos - d) % rm)
                    } else {
                        let v = (d - pos) % rm;
                        if v == 0 {
                            ym
                        } else {
                            mm + 1 - v
                        }
                    }
                })
                .collect())
        }
    }
}

/// The explicit map as a `Morphism` between the canonical realizations.
/// Relation preservation is verified, and onto_full maps are verified to be
/// epimorphisms.
pub fn spiral_map(n: &Spiral, m: &Spiral, spec: &SpiralMapSpec) -> Result<Morphism> {
    let values = spiral_map_values(n, m, spec)?;
    let src = Arc::new(n.to_structure(format!("spiral({},{},{})", n.n, n.x, n.y)));
    let tgt = Arc::new(m.to_structure(format!("spiral({},{},{})", m.n, m.x, m.y)));
    let map = values.iter().map(|&v| v as u32 - 1).collect();
    let morphism = Morphism::new(src, tgt, map)?;
    debug_assert!(morphism.is_preserving());
    debug_assert!(
        !matches!(spec, SpiralMapSpec::OntoFull { .. }) || morphism.is_epimorphism()
    );
    Ok(morphism)
}

/// Joint projection of two spiral structures: a spiral structure with one
/// component per pair of input components, mapping onto both inputs.
#[derive(Clone, Debug)]
pub struct SpiralJpp {
    pub n: SpiralRealization,
    pub to_first: Morphism,
    pub to_second: Morphism,
}

/// Per-pair component: left and right circles are the lcm of the inputs'
/// circles, the middle strictly exceeds both middles.
pub fn spiral_jpp_realized(k: &SpiralRealization, l: &SpiralRealization) -> Result<SpiralJpp> {
    let mut comps = Vec::new();
    let mut pairs = Vec::new();
    for (ki, kc) in k.spirals().components().iter().enumerate() {
        for (li, lc) in l.spirals().components().iter().enumerate() {
            let left = lcm(kc.left_len(), lc.left_len());
            let right = lcm(kc.right_len(), lc.right_len());
            let mid = kc.mid_edges().max(lc.mid_edges()) + 1;
            let n = left + mid + right - 1;
            comps.push(Spiral::new(n, left, left + mid)?);
            pairs.push((ki, li));
        }
    }
    let spirals = SpiralStructure::new(comps)?;
    let name = format!("jpp({},{})", k.structure().name(), l.structure().name());
    let n = SpiralRealization::from_spirals(name, &spirals);

    let mut to_k = vec![0u32; n.structure().size()];
    let mut to_l = vec![0u32; n.structure().size()];
    for (p, &(ki, li)) in pairs.iter().enumerate() {
        let comp = n.component(p);
        let kc = k.component(ki);
        let lc = l.component(li);
        let vk = spiral_map_values(
            comp,
            kc,
            &SpiralMapSpec::OntoFull { a: comp.x(), b: comp.x() + kc.mid_edges() },
        )?;
        let vl = spiral_map_values(
            comp,
            lc,
            &SpiralMapSpec::OntoFull { a: comp.x(), b: comp.x() + lc.mid_edges() },
        )?;
        for pos in 1..=comp.n() {
            to_k[n.element(p, pos) as usize] = k.element(ki, vk[pos - 1]);
            to_l[n.element(p, pos) as usize] = l.element(li, vl[pos - 1]);
        }
    }
    let to_first = Morphism::new(Arc::clone(n.structure()), Arc::clone(k.structure()), to_k)?;
    let to_second = Morphism::new(Arc::clone(n.structure()), Arc::clone(l.structure()), to_l)?;
    Ok(SpiralJpp { n, to_first, to_second })
}

/// Joint projection from plain spiral structures.
pub fn spiral_jpp(k: &SpiralStructure, l: &SpiralStructure) -> Result<SpiralJpp> {
    let kr = SpiralRealization::from_spirals("K", k);
    let lr = SpiralRealization::from_spirals("L", l);
    spiral_jpp_realized(&kr, &lr)
}

/// Image class of one source component under a preserving map: the whole
/// target component, its left circle, or its right circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum ImageClass {
    Full,
    LeftCircle,
    RightCircle,
}

fn classify_component(
    f: &Morphism,
    src: &SpiralRealization,
    tgt: &SpiralRealization,
    comp: usize,
) -> Result<(usize, ImageClass)> {
    let s = src.component(comp);
    let mut image: Vec<u32> = (1..=s.n())
        .map(|pos| f.apply(src.element(comp, pos) as usize) as u32)
        .collect();
    image.sort_unstable();
    image.dedup();
    let (tk, _) = tgt.locate(image[0]);
    let t = tgt.component(tk);
    let full: Vec<u32> = (1..=t.n()).map(|p| tgt.element(tk, p)).collect();
    let mut sorted_full = full.clone();
    sorted_full.sort_unstable();
    if image == sorted_full {
        return Ok((tk, ImageClass::Full));
    }
    let mut left: Vec<u32> = (1..=t.x()).map(|p| tgt.element(tk, p)).collect();
    left.sort_unstable();
    if image == left {
        return Ok((tk, ImageClass::LeftCircle));
    }
    let mut right: Vec<u32> = (t.y()..=t.n()).map(|p| tgt.element(tk, p)).collect();
    right.sort_unstable();
    if image == right {
        return Ok((tk, ImageClass::RightCircle));
    }
    Err(Error::precondition(format!(
        "map '{}' -> '{}': component {} image is not a component, left circle, or right circle",
        f.source().name(),
        f.target().name(),
        comp + 1
    )))
}

/// The unique middle anchor pair of a component-onto preserving map:
/// positions `(a, b)` in the source middle with `f(a) = x_K`, `f(b) = y_K`,
/// `b - a = mid_edges(K)`.
fn anchor_pair(
    f: &Morphism,
    src: &SpiralRealization,
    comp: usize,
    tgt: &SpiralRealization,
    tcomp: usize,
) -> Result<(usize, usize)> {
    let s = src.component(comp);
    let k = tgt.component(tcomp);
    let xk = tgt.element(tcomp, k.x());
    let yk = tgt.element(tcomp, k.y());
    let mid = k.mid_edges();
    let mut found = None;
    for a in s.x()..=s.y().saturating_sub(mid) {
        if f.apply(src.element(comp, a) as usize) as u32 == xk
            && f.apply(src.element(comp, a + mid) as usize) as u32 == yk
        {
            if found.replace((a, a + mid)).is_some() {
                return Err(Error::precondition(
                    "onto map has two middle anchor pairs".to_string(),
                ));
            }
        }
    }
    found.ok_or_else(|| Error::precondition("onto map has no middle anchor pair".to_string()))
}

/// One amalgamation piece: a spiral plus its position maps into a component
/// of L and a component of M.
struct Piece {
    spiral: Spiral,
    l_comp: usize,
    l_values: Vec<usize>,
    m_comp: usize,
    m_values: Vec<usize>,
}

/// Case analysis for a single pair of components, following the image of
/// `f1` on the L side: full spiral, left circle, or right circle of the
/// common K component. Returns the piece mapping onto the L side.
fn build_piece(
    f1: &Morphism,
    f2: &Morphism,
    l: &SpiralRealization,
    m: &SpiralRealization,
    k: &SpiralRealization,
    li: usize,
    mi: usize,
    ki: usize,
    class: ImageClass,
) -> Result<Piece> {
    let lc = *l.component(li);
    let mc = *m.component(mi);
    let kc = *k.component(ki);
    match class {
        ImageClass::Full => {
            let (a1, b1) = anchor_pair(f1, l, li, k, ki)?;
            let (a2, b2) = anchor_pair(f2, m, mi, k, ki)?;
            let left = lcm(lc.left_len(), mc.left_len());
            let right = lcm(lc.right_len(), mc.right_len());
            let lead = (a1 - lc.x()).max(a2 - mc.x());
            let tail = (lc.y() - b1).max(mc.y() - b2);
            let mid = lead + kc.mid_edges() + tail;
            let spiral = Spiral::new(left + mid + right - 1, left, left + mid)?;
            let a = spiral.x() + lead;
            let l_values = spiral_map_values(
                &spiral,
                &lc,
                &SpiralMapSpec::OntoFull { a: a - (a1 - lc.x()), b: a - (a1 - lc.x()) + lc.mid_edges() },
            )?;
            let m_values = spiral_map_values(
                &spiral,
                &mc,
                &SpiralMapSpec::OntoFull { a: a - (a2 - mc.x()), b: a - (a2 - mc.x()) + mc.mid_edges() },
            )?;
            Ok(Piece { spiral, l_comp: li, l_values, m_comp: mi, m_values })
        }
        ImageClass::LeftCircle => {
            let xk = k.element(ki, kc.x());
            let c1 = (1..=lc.x())
                .find(|&p| f1.apply(l.element(li, p) as usize) as u32 == xk)
                .ok_or_else(|| Error::precondition("left-circle image misses the left node"))?;
            let c2 = (1..=mc.x())
                .find(|&p| f2.apply(m.element(mi, p) as usize) as u32 == xk)
                .ok_or_else(|| {
                    Error::precondition(format!(
                        "f2 has no preimage of the left node inside the left circle of component {}",
                        mi + 1
                    ))
                })?;
            let left = lcm(lc.left_len(), mc.left_len());
            let right = lcm(lc.right_len(), mc.left_len());
            let c = 1usize;
            // t0 = least position >= x_N with t0 == c + x_L - c1 (mod l_L):
            // there f3 takes the value x_L, so the onto_full anchor sits at t0.
            let x_n = left;
            let residue = (c + lc.x()).wrapping_sub(c1) % lc.left_len();
            let t0 = x_n + (residue + lc.left_len() - x_n % lc.left_len()) % lc.left_len();
            let mid = (t0 - x_n) + lc.mid_edges();
            let spiral = Spiral::new(left + mid + right - 1, left, left + mid)?;
            let l_values = spiral_map_values(
                &spiral,
                &lc,
                &SpiralMapSpec::OntoFull { a: t0, b: t0 + lc.mid_edges() },
            )?;
            // c' in [1, l_M] with c' == c + x_M - c2 (mod l_M).
            let cp = ((c + mc.x()).wrapping_sub(c2).wrapping_sub(1)) % mc.left_len() + 1;
            let m_values = spiral_map_values(&spiral, &mc, &SpiralMapSpec::OntoLeft { c: cp })?;
            Ok(Piece { spiral, l_comp: li, l_values, m_comp: mi, m_values })
        }
        ImageClass::RightCircle => {
            let yk = k.element(ki, kc.y());
            let d1 = (lc.y()..=lc.n())
                .find(|&p| f1.apply(l.element(li, p) as usize) as u32 == yk)
                .ok_or_else(|| Error::precondition("right-circle image misses the right node"))?;
            let d2 = (mc.y()..=mc.n())
                .find(|&p| f2.apply(m.element(mi, p) as usize) as u32 == yk)
                .ok_or_else(|| {
                    Error::precondition(format!(
                        "f2 has no preimage of the right node inside the right circle of component {}",
                        mi + 1
                    ))
                })?;
            let left = lcm(lc.left_len(), mc.right_len());
            let right = lcm(lc.right_len(), mc.right_len());
            let mid = lc.right_len() + lc.mid_edges();
            let spiral = Spiral::new(left + mid + right - 1, left, left + mid)?;
            let n_n = spiral.n();
            // b in (y_N - r_L, y_N] with (n - b) == d1 - y_L (mod r_L):
            // there f3 ends the middle, so f3(n) lands on d1.
            let b = (spiral.y() - lc.right_len() + 1..=spiral.y())
                .find(|&b| (n_n - b) % lc.right_len() == (d1 - lc.y()) % lc.right_len())
                .expect("one residue per window");
            let l_values = spiral_map_values(
                &spiral,
                &lc,
                &SpiralMapSpec::OntoFull { a: b - lc.mid_edges(), b },
            )?;
            // d' in (n - r_M, n] with (n - d') == d2 - y_M (mod r_M).
            let dp = (n_n - mc.right_len() + 1..=n_n)
                .find(|&d| (n_n - d) % mc.right_len() == (d2 - mc.y()) % mc.right_len())
                .expect("one residue per window");
            let m_values = spiral_map_values(&spiral, &mc, &SpiralMapSpec::OntoRight { d: dp })?;
            Ok(Piece { spiral, l_comp: li, l_values, m_comp: mi, m_values })
        }
    }
}

/// Amalgamation of spiral structures over a common target.
#[derive(Clone, Debug)]
pub struct SpiralAmalgam {
    pub n: SpiralRealization,
    /// Epimorphism onto the source of `f1`.
    pub f3: Morphism,
    /// Relation-preserving map into the source of `f2`; an epimorphism
    /// whenever `f1` is one.
    pub f4: Morphism,
}

/// Amalgamate `f1: L -> K` (relation preserving) against `f2: M -> K`
/// (epimorphism): a spiral structure `N` with `f3: N -> L` onto and
/// `f4: N -> M` such that `f1 o f3 = f2 o f4`.
///
/// Components of `L` are handled by the three-case analysis of the image
/// of `f1`; components of `M` are handled symmetrically (against an
/// `f1`-onto partner component, when one exists) so that `f4` covers `M`
/// whenever `f1` is an epimorphism.
pub fn spiral_amalgamate(f1: &Morphism, f2: &Morphism) -> Result<SpiralAmalgam> {
    if !Morphism::same_structure(f1.target(), f2.target()) {
        return Err(Error::precondition(
            "spiral amalgamation: maps have different targets".to_string(),
        ));
    }
    if !f1.is_preserving() {
        return Err(Error::precondition("spiral amalgamation: f1 is not relation preserving".to_string()));
    }
    if !f2.is_epimorphism() {
        return Err(Error::precondition("spiral amalgamation: f2 is not an epimorphism".to_string()));
    }
    let l = SpiralRealization::from_structure(f1.source_arc())?;
    let m = SpiralRealization::from_structure(f2.source_arc())?;
    let k = SpiralRealization::from_structure(f1.target_arc())?;

    // Image class of every component on both sides.
    let l_classes: Vec<(usize, ImageClass)> = (0..l.component_count())
        .map(|li| classify_component(f1, &l, &k, li))
        .collect::<Result<_>>()?;
    let m_classes: Vec<(usize, ImageClass)> = (0..m.component_count())
        .map(|mi| classify_component(f2, &m, &k, mi))
        .collect::<Result<_>>()?;

    let m_onto = |ki: usize| -> Option<usize> {
        m_classes
            .iter()
            .position(|&(tk, cls)| tk == ki && cls == ImageClass::Full)
    };
    let l_onto = |ki: usize| -> Option<usize> {
        l_classes
            .iter()
            .position(|&(tk, cls)| tk == ki && cls == ImageClass::Full)
    };

    let mut pieces = Vec::new();
    for (li, &(ki, class)) in l_classes.iter().enumerate() {
        let mi = m_onto(ki).ok_or_else(|| {
            Error::precondition(format!(
                "f2 is not onto the needed component: no component of '{}' maps onto component {} of '{}'",
                m.structure().name(),
                ki + 1,
                k.structure().name()
            ))
        })?;
        pieces.push(build_piece(f1, f2, &l, &m, &k, li, mi, ki, class)?);
    }
    // Symmetric pieces covering M, where an f1-onto partner exists.
    for (mi, &(ki, class)) in m_classes.iter().enumerate() {
        if let Some(li) = l_onto(ki) {
            let p = build_piece(f2, f1, &m, &l, &k, mi, li, ki, class)?;
            pieces.push(Piece {
                spiral: p.spiral,
                l_comp: p.m_comp,
                l_values: p.m_values,
                m_comp: p.l_comp,
                m_values: p.l_values,
            });
        }
    }

    let spirals = SpiralStructure::new(pieces.iter().map(|p| p.spiral).collect())?;
    let name = format!("ap({},{})", l.structure().name(), m.structure().name());
    let n = SpiralRealization::from_spirals(name, &spirals);
    let mut to_l = vec![0u32; n.structure().size()];
    let mut to_m = vec![0u32; n.structure().size()];
    for (p, piece) in pieces.iter().enumerate() {
        for pos in 1..=piece.spiral.n() {
            let e = n.element(p, pos) as usize;
            to_l[e] = l.element(piece.l_comp, piece.l_values[pos - 1]);
            to_m[e] = m.element(piece.m_comp, piece.m_values[pos - 1]);
        }
    }
    let f3 = Morphism::new(Arc::clone(n.structure()), Arc::clone(f1.source_arc()), to_l)?;
    let f4 = Morphism::new(Arc::clone(n.structure()), Arc::clone(f2.source_arc()), to_m)?;

    if !f3.is_epimorphism() {
        return Err(Error::precondition(
            "spiral amalgamation: constructed f3 is not onto L (invalid inputs)".to_string(),
        ));
    }
    if !f4.is_preserving() {
        return Err(Error::precondition(
            "spiral amalgamation: constructed f4 is not relation preserving (invalid inputs)".to_string(),
        ));
    }
    for e in 0..n.structure().size() {
        if f1.apply(f3.apply(e)) != f2.apply(f4.apply(e)) {
            return Err(Error::precondition(
                "spiral amalgamation: square does not commute (invalid inputs)".to_string(),
            ));
        }
    }
    Ok(SpiralAmalgam { n, f3, f4 })
}
