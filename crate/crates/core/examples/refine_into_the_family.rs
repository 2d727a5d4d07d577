//! Place an arbitrary surjective structure below a member of the
//! amalgamable family: the 4m-copy refinement.
//!
//! Run with: cargo run --example refine_into_the_family

use std::sync::Arc;

use fraisse::amalgamation::check_amalgamation_base;
use fraisse::coinitial::refine;
use fraisse::structure::FinStructure;

fn main() -> fraisse::Result<()> {
    // The one-point loop fails the hypotheses; its refinement passes.
    let pt = Arc::new(FinStructure::from_names("pt", &["a"], &[&[("a", "a")]])?);
    let refined = refine(&pt)?;
    println!(
        "refine({}) has {} points (4m|A| with m=1, |A|=1)",
        pt.name(),
        refined.b.size()
    );
    for label in &refined.labels {
        println!("  {}", label.label());
    }
    let edges = refined.b.relations()[0].edges();
    println!("  {} edges under s1", edges.len());
    println!(
        "  base check: {}, projection epimorphic: {}",
        check_amalgamation_base(&refined.b)?.passes(),
        refined.projection.is_epimorphism()
    );

    // A two-relation point: 4m copies means eight elements.
    let pt2 = Arc::new(FinStructure::from_names(
        "pt2",
        &["a"],
        &[&[("a", "a")], &[("a", "a")]],
    )?);
    let refined2 = refine(&pt2)?;
    println!(
        "refine({}) has {} points; base check {}",
        pt2.name(),
        refined2.b.size(),
        check_amalgamation_base(&refined2.b)?.passes()
    );
    Ok(())
}
