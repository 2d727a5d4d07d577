//! Amalgamate two covers over a base satisfying the hypotheses, and print
//! the descending fixpoint trace with its matching E-sequence.
//!
//! Run with: cargo run --example amalgamation_trace

use std::sync::Arc;

use fraisse::amalgamation::amalgamate;
use fraisse::coinitial::refine;
use fraisse::limit::double_cover;
use fraisse::structure::FinStructure;

fn main() -> fraisse::Result<()> {
    let a = Arc::new(FinStructure::from_names(
        "A*",
        &["a", "b"],
        &[&[("a", "a"), ("a", "b"), ("b", "b")]],
    )?);

    // Two different covers of A*: its refinement and a double cover of it.
    let phi1 = refine(&a)?.projection;
    let phi2 = double_cover(&a)?;
    println!(
        "phi1: {} ({} points) -> {}",
        phi1.source().name(),
        phi1.source().size(),
        a.name()
    );
    println!(
        "phi2: {} ({} points) -> {}",
        phi2.source().name(),
        phi2.source().size(),
        a.name()
    );

    let result = amalgamate(&phi1, &phi2)?;
    println!("pullback D0 has {} points", result.trace.d0.size());
    println!("D-sequence sizes: {:?}", result.trace.d_sizes());
    println!("E-sequence sizes: {:?}", result.trace.e_sizes());
    println!("fixpoint index:   {}", result.trace.fixpoint_index);
    println!(
        "D has {} points; projections epimorphic: {} / {}",
        result.d.size(),
        result.phi3.is_epimorphism(),
        result.phi4.is_epimorphism()
    );

    // The square commutes pointwise.
    let commutes = (0..result.d.size())
        .all(|i| phi1.apply(result.phi3.apply(i)) == phi2.apply(result.phi4.apply(i)));
    println!("square commutes: {commutes}");
    Ok(())
}
