//! Amalgamation over base structures whose points are outgoing for exactly
//! one tag: the pullback, the descending fixpoint `D = ∩ D_n`, and the
//! proof-auxiliary `E`-sequence that tracks it.
//!
//! A point is outgoing for a tag when it has more than one successor and
//! exactly one predecessor under that tag; incoming is the mirror image.
//! Amalgamation requires every base point to be outgoing for exactly one
//! of the `2m` tags and every edge to have an outgoing tail or incoming
//! head; under these two conditions the fixpoint projections are
//! epimorphisms.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::morphism::{compose, Morphism};
use crate::structure::{pullback, Direction, ElementId, FinStructure, RelationTag};

/// Role of a point under one relation tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    /// More than one successor, exactly one predecessor.
    Outgoing,
    /// More than one predecessor, exactly one successor.
    Incoming,
    Neither,
}

/// Per-point classification across all `2m` tags, in canonical tag order
/// `s_1, s_1^-1, s_2, s_2^-1, ...`.
#[derive(Clone, Debug)]
pub struct PointRole {
    pub element: ElementId,
    pub roles: Vec<(RelationTag, Role)>,
}

impl PointRole {
    pub fn outgoing_tags(&self) -> Vec<RelationTag> {
        self.roles
            .iter()
            .filter(|(_, r)| *r == Role::Outgoing)
            .map(|&(t, _)| t)
            .collect()
    }
}

/// Classify every point of a surjective structure under every tag.
pub fn classify_points(a: &FinStructure) -> Result<Vec<PointRole>> {
    a.require_surjective("classify_points")?;
    let tags = RelationTag::all(a.arity());
    Ok((0..a.size() as u32)
        .map(|u| {
            let roles = tags
                .iter()
                .map(|&tag| {
                    let rel = &a.relations()[tag.index - 1];
                    let (out, inc) = match tag.direction {
                        Direction::Forward => (rel.out_degree(u), rel.in_degree(u)),
                        Direction::Inverse => (rel.in_degree(u), rel.out_degree(u)),
                    };
                    let role = if out > 1 && inc == 1 {
                        Role::Outgoing
                    } else if inc > 1 && out == 1 {
                        Role::Incoming
                    } else {
                        Role::Neither
                    };
                    (tag, role)
                })
                .collect();
            PointRole { element: a.element(u as usize).clone(), roles }
        })
        .collect())
}

/// Outcome of the amalgamation-base check with its violation lists.
#[derive(Clone, Debug)]
pub struct BaseCheckReport {
    /// Points that are outgoing for a number of tags different from one,
    /// with that count.
    pub condition1: Vec<(ElementId, usize)>,
    /// Edges `(relation index, tail, head)` where the tail is not outgoing
    /// and the head is not incoming under that relation.
    pub condition2: Vec<(usize, ElementId, ElementId)>,
}

impl BaseCheckReport {
    pub fn passes(&self) -> bool {
        self.condition1.is_empty() && self.condition2.is_empty()
    }
}

/// Check the two amalgamation hypotheses on a surjective structure:
/// (1) every point is outgoing for exactly one of the `2m` tags, and
/// (2) every edge of every `s_i` has an `s_i`-outgoing tail or an
/// `s_i`-incoming head.
pub fn check_amalgamation_base(a: &FinStructure) -> Result<BaseCheckReport> {
    let roles = classify_points(a)?;
    let mut condition1 = Vec::new();
    for pr in &roles {
        let count = pr.outgoing_tags().len();
        if count != 1 {
            condition1.push((pr.element.clone(), count));
        }
    }
    let mut condition2 = Vec::new();
    for (r, rel) in a.relations().iter().enumerate() {
        let fwd = RelationTag::forward(r + 1);
        for &(u, v) in rel.edges() {
            let tail_out = roles[u as usize]
                .roles
                .iter()
                .any(|&(t, role)| t == fwd && role == Role::Outgoing);
            let head_in = roles[v as usize]
                .roles
                .iter()
                .any(|&(t, role)| t == fwd && role == Role::Incoming);
            if !tail_out && !head_in {
                condition2.push((
                    r + 1,
                    a.element(u as usize).clone(),
                    a.element(v as usize).clone(),
                ));
            }
        }
    }
    Ok(BaseCheckReport { condition1, condition2 })
}

/// The descending carrier sequences produced by the fixpoint iteration.
#[derive(Clone, Debug)]
pub struct AmalgamationTrace {
    pub d0: Arc<FinStructure>,
    /// Carriers `D_0 ⊇ D_1 ⊇ ...` up to and including the fixpoint stage.
    pub d_carriers: Vec<Vec<ElementId>>,
    /// The `E_n` carriers; equal to `d_carriers` index by index.
    pub e_carriers: Vec<Vec<ElementId>>,
    /// First `n` with `D_n = D_{n+1}`.
    pub fixpoint_index: usize,
}

impl AmalgamationTrace {
    pub fn d_sizes(&self) -> Vec<usize> {
        self.d_carriers.iter().map(|c| c.len()).collect()
    }

    pub fn e_sizes(&self) -> Vec<usize> {
        self.e_carriers.iter().map(|c| c.len()).collect()
    }
}

/// Result of a successful amalgamation: the fixpoint structure with its
/// two epimorphic projections and the trace.
#[derive(Clone, Debug)]
pub struct AmalgamResult {
    pub d: Arc<FinStructure>,
    pub phi3: Morphism,
    pub phi4: Morphism,
    pub trace: AmalgamationTrace,
}

/// Per-element neighbor lists of the pullback under all `2m` tags.
struct TagAdjacency {
    /// `adj[tag][element]` lists tag-successors; tag order is canonical.
    adj: Vec<Vec<Vec<u32>>>,
}

impl TagAdjacency {
    fn new(d0: &FinStructure) -> Self {
        let n = d0.size();
        let mut adj = Vec::with_capacity(2 * d0.arity());
        for rel in d0.relations() {
            let mut fwd = vec![Vec::new(); n];
            let mut rev = vec![Vec::new(); n];
            for &(u, v) in rel.edges() {
                fwd[u as usize].push(v);
                rev[v as usize].push(u);
            }
            adj.push(fwd);
            adj.push(rev);
        }
        TagAdjacency { adj }
    }
}

/// Run the `D_n` iteration: keep an element when it has an alive successor
/// under every one of the `2m` tags. Returns the carrier stages, ending
/// with the first stage equal to its successor stage.
fn descending_fixpoint(d0: &FinStructure, adj: &TagAdjacency) -> Vec<Vec<u32>> {
    let n = d0.size();
    let mut alive: Vec<bool> = vec![true; n];
    let mut stages: Vec<Vec<u32>> = vec![(0..n as u32).collect()];
    loop {
        let prev = stages.last().expect("nonempty");
        let next: Vec<u32> = prev
            .iter()
            .copied()
            .filter(|&u| {
                adj.adj
                    .iter()
                    .all(|tag| tag[u as usize].iter().any(|&v| alive[v as usize]))
            })
            .collect();
        let stable = next.len() == prev.len();
        // Fixpoint reached in at most |D0| proper steps.
        for a in alive.iter_mut() {
            *a = false;
        }
        for &u in &next {
            alive[u as usize] = true;
        }
        stages.push(next);
        if stable {
            stages.pop();
            return stages;
        }
    }
}

/// The `E_n` iteration: each pullback element sits over a base point with a
/// unique outgoing tag; the element survives when it has a successor under
/// that single tag among the survivors.
fn e_sequence_stages(
    d0: &FinStructure,
    adj: &TagAdjacency,
    base_tag_of: &[usize],
    rounds: usize,
) -> Vec<Vec<u32>> {
    let n = d0.size();
    let mut alive: Vec<bool> = vec![true; n];
    let mut stages: Vec<Vec<u32>> = vec![(0..n as u32).collect()];
    for _ in 0..rounds {
        let prev = stages.last().expect("nonempty");
        let next: Vec<u32> = prev
            .iter()
            .copied()
            .filter(|&u| {
                let tag = base_tag_of[u as usize];
                adj.adj[tag][u as usize].iter().any(|&v| alive[v as usize])
            })
            .collect();
        for a in alive.iter_mut() {
            *a = false;
        }
        for &u in &next {
            alive[u as usize] = true;
        }
        stages.push(next);
    }
    stages
}

fn require_base(a: &FinStructure) -> Result<()> {
    let report = check_amalgamation_base(a)?;
    if let Some((e, count)) = report.condition1.first() {
        return Err(Error::precondition(format!(
            "amalgamation base check failed: condition (1): point '{e}' of '{}' is outgoing for {count} tags instead of exactly one",
            a.name()
        )));
    }
    if let Some((r, u, v)) = report.condition2.first() {
        return Err(Error::precondition(format!(
            "amalgamation base check failed: condition (2): edge ({u},{v}) of s{r} in '{}' has no outgoing tail or incoming head",
            a.name()
        )));
    }
    Ok(())
}

/// Amalgamate `phi1: B -> A` and `phi2: C -> A` over a base satisfying the
/// two hypotheses: pullback, descending fixpoint, restriction.
pub fn amalgamate(phi1: &Morphism, phi2: &Morphism) -> Result<AmalgamResult> {
    if !Morphism::same_structure(phi1.target(), phi2.target()) {
        return Err(Error::precondition("amalgamate: maps have different targets".to_string()));
    }
    if !phi1.is_epimorphism() {
        return Err(Error::precondition(format!(
            "amalgamate: {} -> {} is not an epimorphism",
            phi1.source().name(),
            phi1.target().name()
        )));
    }
    if !phi2.is_epimorphism() {
        return Err(Error::precondition(format!(
            "amalgamate: {} -> {} is not an epimorphism",
            phi2.source().name(),
            phi2.target().name()
        )));
    }
    let a = phi1.target();
    require_base(a)?;
    amalgamate_unchecked(phi1, phi2)
}

/// The construction itself, without the base check; kept separate so the
/// regression tests can pin down why the hypotheses matter.
pub(crate) fn amalgamate_unchecked(phi1: &Morphism, phi2: &Morphism) -> Result<AmalgamResult> {
    let a = phi1.target();
    let (d0, pi1, pi2) = pullback(phi1, phi2)?;
    let adj = TagAdjacency::new(&d0);

    let d_stages = descending_fixpoint(&d0, &adj);
    let fixpoint_index = d_stages.len() - 1;

    // Unique outgoing tag of each base point, as an index into the
    // canonical tag order; condition (1) guarantees exactly one. Without
    // condition (1) the E-sequence is undefined and stays empty.
    let roles = classify_points(a)?;
    let tag_slot = |tag: RelationTag| -> usize {
        2 * (tag.index - 1)
            + match tag.direction {
                Direction::Forward => 0,
                Direction::Inverse => 1,
            }
    };
    let mut base_tag = vec![usize::MAX; a.size()];
    let mut tags_defined = true;
    for (i, pr) in roles.iter().enumerate() {
        let outgoing = pr.outgoing_tags();
        match outgoing.as_slice() {
            [tag] => base_tag[i] = tag_slot(*tag),
            _ => tags_defined = false,
        }
    }
    let e_stages = if tags_defined {
        let base_tag_of: Vec<usize> = (0..d0.size())
            .map(|u| base_tag[phi1.apply(pi1.apply(u))])
            .collect();
        e_sequence_stages(&d0, &adj, &base_tag_of, fixpoint_index)
    } else {
        Vec::new()
    };

    // E_n = D_n at every index; a failure here is an implementation bug.
    for (n, (dn, en)) in d_stages.iter().zip(&e_stages).enumerate() {
        if dn != en {
            return Err(Error::precondition(format!(
                "amalgamate: internal invariant E_{n} = D_{n} failed"
            )));
        }
    }

    let survivors = d_stages.last().expect("at least D_0").clone();
    if survivors.is_empty() {
        return Err(Error::precondition(
            "amalgamate: fixpoint is empty (hypotheses on the base do not hold)".to_string(),
        ));
    }
    let keep: Vec<ElementId> = survivors
        .iter()
        .map(|&u| d0.element(u as usize).clone())
        .collect();
    let mut index_in_d = vec![u32::MAX; d0.size()];
    for (i, &u) in survivors.iter().enumerate() {
        index_in_d[u as usize] = i as u32;
    }
    let relations: Vec<Vec<(u32, u32)>> = d0
        .relations()
        .iter()
        .map(|rel| {
            rel.edges()
                .iter()
                .filter_map(|&(u, v)| {
                    let (iu, iv) = (index_in_d[u as usize], index_in_d[v as usize]);
                    (iu != u32::MAX && iv != u32::MAX).then_some((iu, iv))
                })
                .collect()
        })
        .collect();
    let d = Arc::new(FinStructure::from_parts(
        format!("amalgam({},{})", phi1.source().name(), phi2.source().name()),
        keep,
        relations,
    )?);

    let phi3 = Morphism::new(
        Arc::clone(&d),
        Arc::clone(phi1.source_arc()),
        survivors.iter().map(|&u| pi1.apply(u as usize) as u32).collect(),
    )?;
    let phi4 = Morphism::new(
        Arc::clone(&d),
        Arc::clone(phi2.source_arc()),
        survivors.iter().map(|&u| pi2.apply(u as usize) as u32).collect(),
    )?;

    let stage_names = |stages: &[Vec<u32>]| -> Vec<Vec<ElementId>> {
        stages
            .iter()
            .map(|s| s.iter().map(|&u| d0.element(u as usize).clone()).collect())
            .collect()
    };
    let trace = AmalgamationTrace {
        d_carriers: stage_names(&d_stages),
        e_carriers: stage_names(&e_stages),
        d0,
        fixpoint_index,
    };

    let result = AmalgamResult { d, phi3, phi4, trace };
    verify(&result, phi1, phi2)?;
    Ok(result)
}

/// Contract check: commuting square, epimorphic projections, surjective
/// relations. Violations are reported as precondition failures since they
/// can only arise when the base hypotheses were skipped.
fn verify(result: &AmalgamResult, phi1: &Morphism, phi2: &Morphism) -> Result<()> {
    for i in 0..result.d.size() {
        if phi1.apply(result.phi3.apply(i)) != phi2.apply(result.phi4.apply(i)) {
            return Err(Error::precondition(
                "amalgamate: square does not commute".to_string(),
            ));
        }
    }
    if !result.phi3.is_epimorphism() {
        return Err(Error::precondition(
            "amalgamate: projection to the first factor is not an epimorphism".to_string(),
        ));
    }
    if !result.phi4.is_epimorphism() {
        return Err(Error::precondition(
            "amalgamate: projection to the second factor is not an epimorphism".to_string(),
        ));
    }
    if !result.d.is_surjective() {
        return Err(Error::precondition(
            "amalgamate: restricted relations are not surjective".to_string(),
        ));
    }
    Ok(())
}

/// The `E`-sequence carriers on their own, for callers that only need the
/// trace of the proof bookkeeping.
pub fn compute_e_sequence(phi1: &Morphism, phi2: &Morphism) -> Result<Vec<Vec<ElementId>>> {
    let result = amalgamate(phi1, phi2)?;
    Ok(result.trace.e_carriers)
}

/// Compose a chain of morphisms `f_1, f_2, ...` in diagram order.
pub fn compose_chain(maps: &[&Morphism]) -> Result<Morphism> {
    let (first, rest) = maps
        .split_first()
        .ok_or_else(|| Error::precondition("compose_chain: empty chain"))?;
    let mut acc = (*first).clone();
    for m in rest {
        acc = compose(&acc, m)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coinitial::refine;
    use crate::morphism::{enumerate_morphisms, MorphismClass, MorphismQuery};

    fn arc(s: FinStructure) -> Arc<FinStructure> {
        Arc::new(s)
    }

    fn loop1() -> Arc<FinStructure> {
        arc(FinStructure::from_names("loop", &["a"], &[&[("a", "a")]]).unwrap())
    }

    fn a_star() -> Arc<FinStructure> {
        arc(
            FinStructure::from_names("A*", &["a", "b"], &[&[("a", "a"), ("a", "b"), ("b", "b")]])
                .unwrap(),
        )
    }

    #[test]
    fn loop_point_is_neither_outgoing_nor_incoming() {
        let roles = classify_points(&loop1()).unwrap();
        assert_eq!(roles.len(), 1);
        assert!(roles[0].roles.iter().all(|&(_, r)| r == Role::Neither));
    }

    #[test]
    fn a_star_roles() {
        let roles = classify_points(&a_star()).unwrap();
        // a: out 2 / in 1 under s1 -> outgoing for s1 only.
        assert_eq!(roles[0].outgoing_tags(), vec![RelationTag::forward(1)]);
        // b: in 2 / out 1 -> outgoing for the inverse tag only.
        assert_eq!(roles[1].outgoing_tags(), vec![RelationTag::inverse(1)]);
    }

    #[test]
    fn refined_loop_roles_split_into_plus_and_minus() {
        let refined = refine(&loop1()).unwrap();
        let roles = classify_points(&refined.b).unwrap();
        for (label, role) in refined.labels.iter().zip(&roles) {
            let expected = match label.sign {
                crate::coinitial::Sign::Plus => RelationTag::forward(1),
                crate::coinitial::Sign::Minus => RelationTag::inverse(1),
            };
            assert_eq!(role.outgoing_tags(), vec![expected], "label {}", label.label());
        }
    }

    #[test]
    fn base_check_rejects_the_loop_and_accepts_a_star() {
        let report = check_amalgamation_base(&loop1()).unwrap();
        assert!(!report.passes());
        assert_eq!(report.condition1.len(), 1);
        assert_eq!(report.condition1[0].1, 0);

        let report = check_amalgamation_base(&a_star()).unwrap();
        assert!(report.passes());
    }

    #[test]
    fn base_check_rejects_non_surjective_input() {
        let s = arc(FinStructure::from_names("e", &["a", "b"], &[&[("a", "b")]]).unwrap());
        assert!(matches!(check_amalgamation_base(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn identity_amalgamation_over_a_star_is_the_diagonal() {
        let a = a_star();
        let id1 = Morphism::identity(&a);
        let id2 = Morphism::identity(&a);
        let result = amalgamate(&id1, &id2).unwrap();
        assert_eq!(result.d.size(), 2);
        assert!(result.phi3.is_isomorphism());
        assert!(result.phi4.is_isomorphism());
        // The E-sequence is constant at the diagonal.
        assert_eq!(result.trace.fixpoint_index, 0);
        assert_eq!(result.trace.e_carriers.len(), 1);
        assert_eq!(result.trace.e_carriers[0].len(), 2);
    }

    #[test]
    fn amalgamation_of_the_refined_cover_over_a_star() {
        let a = a_star();
        let refined1 = refine(&a).unwrap();
        let refined2 = refine(&a).unwrap();
        let result = amalgamate(&refined1.projection, &refined2.projection).unwrap();
        assert!(!result.trace.d_carriers.last().unwrap().is_empty());
        assert!(result.phi3.is_epimorphism());
        assert!(result.phi4.is_epimorphism());
        assert!(result.d.is_surjective());
        for i in 0..result.d.size() {
            assert_eq!(
                refined1.projection.apply(result.phi3.apply(i)),
                refined2.projection.apply(result.phi4.apply(i))
            );
        }
        // Fixpoint within |D0| proper shrink steps.
        assert!(result.trace.d_carriers.len() <= result.trace.d0.size() + 1);
        // E matches D at every index.
        assert_eq!(result.trace.d_sizes(), result.trace.e_sizes());
    }

    #[test]
    fn e_zero_counts_fiber_products() {
        let a = a_star();
        let refined = refine(&a).unwrap();
        let result = amalgamate(&refined.projection, &Morphism::identity(&a)).unwrap();
        let expected: usize = (0..a.size())
            .map(|x| refined.projection.fiber(x).len() * Morphism::identity(&a).fiber(x).len())
            .sum();
        assert_eq!(result.trace.e_carriers[0].len(), expected);
        assert_eq!(result.trace.d0.size(), expected);
    }

    #[test]
    fn swapping_the_maps_gives_an_isomorphic_amalgam() {
        let a = a_star();
        let refined = refine(&a).unwrap();
        let id = Morphism::identity(&a);
        let left = amalgamate(&refined.projection, &id).unwrap();
        let right = amalgamate(&id, &refined.projection).unwrap();
        let isos = enumerate_morphisms(
            &left.d,
            &right.d,
            MorphismQuery { mode: MorphismClass::Isomorphism, cap: 1 },
        )
        .unwrap();
        assert!(isos.total >= 1);
    }

    #[test]
    fn amalgamate_requires_epimorphisms_and_the_base_check() {
        let a = a_star();
        let l = loop1();
        // Base check failure is named as condition (1).
        let id = Morphism::identity(&l);
        let err = amalgamate(&id, &id).unwrap_err().to_string();
        assert!(err.contains("condition (1)"), "{err}");
        // Non-epimorphism is rejected up front.
        let collapse = Morphism::new(Arc::clone(&a), Arc::clone(&a), vec![0, 0]).unwrap();
        assert!(!collapse.is_epimorphism());
        let err = amalgamate(&collapse, &Morphism::identity(&a)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    /// Pinned search result: without the base hypotheses the construction
    /// can produce an empty fixpoint.
    #[test]
    fn regression_empty_fixpoint_without_the_base_check() {
        let a = arc(
            FinStructure::from_names("A", &["a", "b"], &[&[("a", "a"), ("a", "b"), ("b", "a")]])
                .unwrap(),
        );
        assert!(!check_amalgamation_base(&a).unwrap().passes());
        let b = arc(
            FinStructure::from_names(
                "B",
                &["a", "b", "c"],
                &[&[("a", "b"), ("a", "c"), ("b", "a"), ("c", "a")]],
            )
            .unwrap(),
        );
        let c = arc(
            FinStructure::from_names(
                "C",
                &["a", "b", "c"],
                &[&[("a", "b"), ("b", "c"), ("c", "a")]],
            )
            .unwrap(),
        );
        let phi1 = Morphism::new(Arc::clone(&b), Arc::clone(&a), vec![0, 0, 1]).unwrap();
        let phi2 = Morphism::new(Arc::clone(&c), Arc::clone(&a), vec![0, 0, 1]).unwrap();
        assert!(phi1.is_epimorphism() && phi2.is_epimorphism());
        let err = amalgamate_unchecked(&phi1, &phi2).unwrap_err().to_string();
        assert!(err.contains("fixpoint is empty"), "{err}");
    }

    /// Pinned search result: without the base hypotheses the fixpoint can
    /// be nonempty yet project non-surjectively.
    #[test]
    fn regression_non_epimorphic_projection_without_the_base_check() {
        let a = arc(
            FinStructure::from_names("A", &["a", "b"], &[&[("a", "a"), ("a", "b"), ("b", "a")]])
                .unwrap(),
        );
        let b = arc(
            FinStructure::from_names(
                "B",
                &["a", "b", "c"],
                &[&[("a", "b"), ("a", "c"), ("b", "a"), ("c", "a")]],
            )
            .unwrap(),
        );
        let c = arc(
            FinStructure::from_names(
                "C",
                &["a", "b", "c"],
                &[&[("a", "b"), ("a", "c"), ("b", "c"), ("c", "a")]],
            )
            .unwrap(),
        );
        let phi1 = Morphism::new(Arc::clone(&b), Arc::clone(&a), vec![0, 0, 1]).unwrap();
        let phi2 = Morphism::new(Arc::clone(&c), Arc::clone(&a), vec![0, 0, 1]).unwrap();
        assert!(phi1.is_epimorphism() && phi2.is_epimorphism());
        let err = amalgamate_unchecked(&phi1, &phi2).unwrap_err().to_string();
        assert!(err.contains("not an epimorphism"), "{err}");
    }
}
