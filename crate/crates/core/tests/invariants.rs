//! Cross-module invariant sweeps over small structures: deterministic,
//! exhaustive where the instance space allows it and strided where it
//! does not.

use std::sync::Arc;

use fraisse::amalgamation::{amalgamate, check_amalgamation_base};
use fraisse::coinitial::refine;
use fraisse::morphism::{
    compose, enumerate_morphisms, Morphism, MorphismClass, MorphismQuery,
};
use fraisse::structure::{product, pullback, ElementId, FinStructure};

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

fn mask_structure(name: String, n: usize, mask: u64) -> FinStructure {
    let carrier = NAMES[..n].iter().map(|s| ElementId::new(*s).unwrap()).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if mask >> (u * n + v) & 1 == 1 {
                edges.push((u as u32, v as u32));
            }
        }
    }
    FinStructure::from_parts(name, carrier, vec![edges]).unwrap()
}

fn surjective(n: usize) -> Vec<Arc<FinStructure>> {
    let mut out = Vec::new();
    'mask: for mask in 0u64..1 << (n * n) {
        for i in 0..n {
            let mut row = false;
            let mut col = false;
            for j in 0..n {
                row |= mask >> (i * n + j) & 1 == 1;
                col |= mask >> (j * n + i) & 1 == 1;
            }
            if !row || !col {
                continue 'mask;
            }
        }
        out.push(Arc::new(mask_structure(format!("S{n}_{mask}"), n, mask)));
    }
    out
}

#[test]
fn product_projections_are_epimorphisms() {
    // Exhaustive over all surjective pairs with up to 3 points, strided
    // over 4-point factors.
    let small: Vec<Arc<FinStructure>> =
        (1..=3).flat_map(surjective).collect();
    for s in &small {
        for t in &small {
            let (_, pi1, pi2) = product(s, t).unwrap();
            assert!(pi1.is_epimorphism() && pi2.is_epimorphism(), "{} x {}", s.name(), t.name());
        }
    }
    let big: Vec<Arc<FinStructure>> = surjective(4).into_iter().step_by(613).collect();
    for s in &big {
        for t in small.iter().step_by(17).chain(&big) {
            let (_, pi1, pi2) = product(s, t).unwrap();
            assert!(pi1.is_epimorphism() && pi2.is_epimorphism(), "{} x {}", s.name(), t.name());
        }
    }
}

#[test]
fn pullback_of_epimorphisms_projects_onto_both_factors() {
    let targets: Vec<Arc<FinStructure>> = (1..=2).flat_map(surjective).collect();
    let sources: Vec<Arc<FinStructure>> = (1..=3).flat_map(surjective).collect();
    let onto_as_sets = |m: &Morphism| {
        let mut hit = vec![false; m.target().size()];
        for i in 0..m.source().size() {
            hit[m.apply(i)] = true;
        }
        hit.iter().all(|&h| h)
    };
    let mut checked = 0u64;
    for a in &targets {
        let epis: Vec<Morphism> = sources
            .iter()
            .step_by(3)
            .flat_map(|b| {
                enumerate_morphisms(
                    b,
                    a,
                    MorphismQuery { mode: MorphismClass::Epimorphism, cap: 4 },
                )
                .unwrap()
                .morphisms
            })
            .collect();
        for phi1 in epis.iter().step_by(5) {
            for phi2 in epis.iter().step_by(7) {
                let (_, pi1, pi2) = pullback(phi1, phi2).unwrap();
                assert!(onto_as_sets(&pi1) && onto_as_sets(&pi2));
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "sweep too thin: {checked}");
}

#[test]
fn composition_of_epimorphisms_is_an_epimorphism() {
    let tops = surjective(3);
    let mids = surjective(2);
    let bottoms = surjective(1);
    let mut checked = 0u64;
    for x in tops.iter().step_by(5) {
        for y in &mids {
            let Some(f) = enumerate_morphisms(
                x,
                y,
                MorphismQuery { mode: MorphismClass::Epimorphism, cap: 1 },
            )
            .unwrap()
            .morphisms
            .pop() else {
                continue;
            };
            for z in &bottoms {
                let Some(g) = enumerate_morphisms(
                    y,
                    z,
                    MorphismQuery { mode: MorphismClass::Epimorphism, cap: 1 },
                )
                .unwrap()
                .morphisms
                .pop() else {
                    continue;
                };
                let fg = compose(&f, &g).unwrap();
                assert!(fg.check().epimorphism);
                checked += 1;
            }
        }
    }
    assert!(checked > 50, "sweep too thin: {checked}");
}

#[test]
fn isomorphism_is_reflexive_and_symmetric() {
    let smalls: Vec<Arc<FinStructure>> = (1..=3).flat_map(surjective).collect();
    for s in smalls.iter().step_by(7) {
        assert!(Morphism::identity(s).is_isomorphism());
    }
    for s in smalls.iter().step_by(19) {
        for t in smalls.iter().step_by(23) {
            let isos = enumerate_morphisms(
                s,
                t,
                MorphismQuery { mode: MorphismClass::Isomorphism, cap: 8 },
            )
            .unwrap();
            for m in &isos.morphisms {
                let mut inverse = vec![0u32; t.size()];
                for i in 0..s.size() {
                    inverse[m.apply(i)] = i as u32;
                }
                let back = Morphism::new(Arc::clone(t), Arc::clone(s), inverse).unwrap();
                assert!(back.is_isomorphism());
            }
        }
    }
}

#[test]
fn amalgamation_over_refined_bases_succeeds_for_varied_covers() {
    // Refined structures satisfy the hypotheses, so amalgamating any pair
    // of covers over them must verify end to end.
    let bases: Vec<Arc<FinStructure>> = (1..=2).flat_map(surjective).collect();
    let mut checked = 0u64;
    for a in &bases {
        let base = refine(a).unwrap().b;
        assert!(check_amalgamation_base(&base).unwrap().passes());
        let covers = vec![
            Morphism::identity(&base),
            fraisse::limit::double_cover(&base).unwrap(),
            refine(&base).unwrap().projection,
        ];
        for phi1 in &covers {
            for phi2 in &covers {
                let result = amalgamate(phi1, phi2).unwrap();
                assert!(result.phi3.is_epimorphism() && result.phi4.is_epimorphism());
                assert_eq!(result.trace.d_sizes(), result.trace.e_sizes());
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 9 * bases.len() as u64);
}

mod spiral_contracts {
    use fraisse::spiral::{
        spiral_amalgamate, spiral_jpp, spiral_map, Spiral, SpiralMapSpec, SpiralStructure,
    };

    fn spirals_up_to(cap: usize) -> Vec<Spiral> {
        let mut out = Vec::new();
        for n in 4..=cap {
            for x in 2..n {
                for y in x + 1..n {
                    out.push(Spiral::new(n, x, y).unwrap());
                }
            }
        }
        out
    }

    #[test]
    fn joint_projections_are_epimorphic_on_both_sides() {
        // Exhaustive over single-spiral pairs up to 8 points, strided up
        // to 12, plus one multi-component pair.
        let small = spirals_up_to(8);
        for k in &small {
            for l in &small {
                let j = spiral_jpp(&SpiralStructure::single(*k), &SpiralStructure::single(*l))
                    .unwrap();
                assert!(j.to_first.check().epimorphism);
                assert!(j.to_second.check().epimorphism);
            }
        }
        let big = spirals_up_to(12);
        for k in big.iter().step_by(13) {
            for l in big.iter().step_by(17) {
                let j = spiral_jpp(&SpiralStructure::single(*k), &SpiralStructure::single(*l))
                    .unwrap();
                assert!(j.to_first.check().epimorphism && j.to_second.check().epimorphism);
            }
        }
        let k = SpiralStructure::new(vec![big[0], big[37]]).unwrap();
        let l = SpiralStructure::new(vec![big[11], big[91], big[140]]).unwrap();
        let j = spiral_jpp(&k, &l).unwrap();
        assert!(j.to_first.check().epimorphism && j.to_second.check().epimorphism);
    }

    /// All anchored preserving maps from one spiral to another: every
    /// valid full anchor, plus one left-circle and one right-circle map
    /// when the divisibility conditions allow them.
    fn anchored_maps(n: &Spiral, m: &Spiral) -> Vec<fraisse::morphism::Morphism> {
        let mut out = Vec::new();
        if n.left_len() % m.left_len() == 0
            && n.right_len() % m.right_len() == 0
            && m.mid_edges() <= n.mid_edges()
        {
            for a in n.x()..=n.y() - m.mid_edges() {
                out.push(
                    spiral_map(n, m, &SpiralMapSpec::OntoFull { a, b: a + m.mid_edges() })
                        .unwrap(),
                );
            }
        }
        if n.left_len() % m.left_len() == 0 && n.right_len() % m.left_len() == 0 {
            out.push(spiral_map(n, m, &SpiralMapSpec::OntoLeft { c: 1 }).unwrap());
        }
        if n.right_len() % m.right_len() == 0 && n.left_len() % m.right_len() == 0 {
            out.push(spiral_map(n, m, &SpiralMapSpec::OntoRight { d: n.y() }).unwrap());
        }
        out
    }

    #[test]
    fn amalgamation_contracts_hold_across_the_three_cases() {
        let pool = spirals_up_to(7);
        let mut checked = 0u64;
        let mut by_class = [0u64; 2];
        for k in &pool {
            for l in &pool {
                for m in &pool {
                    // f2 must be onto K; f1 may land on a circle.
                    let f2s: Vec<_> = anchored_maps(m, k)
                        .into_iter()
                        .filter(|f| f.is_epimorphism())
                        .take(2)
                        .collect();
                    if f2s.is_empty() {
                        continue;
                    }
                    for f1 in anchored_maps(l, k) {
                        for f2 in &f2s {
                            let ap = spiral_amalgamate(&f1, f2).unwrap();
                            assert!(ap.f3.check().epimorphism);
                            assert!(ap.f4.check().preserving);
                            for e in 0..ap.n.structure().size() {
                                assert_eq!(
                                    f1.apply(ap.f3.apply(e)),
                                    f2.apply(ap.f4.apply(e)),
                                    "square must commute"
                                );
                            }
                            if f1.is_epimorphism() {
                                assert!(ap.f4.check().epimorphism);
                                by_class[0] += 1;
                            } else {
                                by_class[1] += 1;
                            }
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert!(checked > 1000, "sweep too thin: {checked}");
        assert!(by_class[0] > 0 && by_class[1] > 0, "both map classes exercised: {by_class:?}");
    }
}
