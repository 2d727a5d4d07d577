//! Refine so that every element over a chosen point has a unique
//! successor; report the residual when the base makes that impossible.
//!
//! Run with: cargo run --example resolve_a_fiber

use std::sync::Arc;

use fraisse::coinitial::resolving_refinement;
use fraisse::structure::{ElementId, FinStructure};

fn main() -> fraisse::Result<()> {
    // On a 2-cycle the whole fiber resolves.
    let c2 = Arc::new(FinStructure::from_names(
        "c2",
        &["a", "b"],
        &[&[("a", "b"), ("b", "a")]],
    )?);
    let r = resolving_refinement(&c2, 1, &ElementId::new("a")?)?;
    println!(
        "resolve(c2, s1, a): {} points, resolved {:?}, residual {:?}",
        r.b.size(),
        r.resolved.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        r.residual.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
    );

    // Over the one-point loop the left node cannot avoid the fiber: the
    // refinement reports it instead of failing.
    let pt = Arc::new(FinStructure::from_names("pt", &["a"], &[&[("a", "a")]])?);
    let r = resolving_refinement(&pt, 1, &ElementId::new("a")?)?;
    println!(
        "resolve(pt, s1, a): {} points, resolved {:?}, residual {:?}",
        r.b.size(),
        r.resolved.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        r.residual.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
    );

    // With a second relation present, the other relation lifts as the full
    // fiber preimage and the projection stays an epimorphism.
    let two = Arc::new(FinStructure::from_names(
        "two",
        &["a", "b"],
        &[
            &[("a", "b"), ("b", "a")],
            &[("a", "a"), ("a", "b"), ("b", "b")],
        ],
    )?);
    let r = resolving_refinement(&two, 1, &ElementId::new("b")?)?;
    println!(
        "resolve(two, s1, b): {} points, projection epimorphic = {}, residual empty = {}",
        r.b.size(),
        r.projection.is_epimorphism(),
        r.residual.is_empty()
    );
    Ok(())
}
