//! Build small structures, check surjectivity, and classify points as
//! outgoing or incoming under each relation tag.
//!
//! Run with: cargo run --example validate_and_classify

use fraisse::amalgamation::{check_amalgamation_base, classify_points};
use fraisse::structure::FinStructure;

fn main() -> fraisse::Result<()> {
    // A single loop is surjective but has no outgoing point.
    let pt = FinStructure::from_names("loop", &["a"], &[&[("a", "a")]])?;
    println!("{}: surjective = {}", pt.name(), pt.validate().is_surjective());

    // The two-point structure with edges a->a, a->b, b->b: the smallest
    // member of the amalgamable family.
    let a_star = FinStructure::from_names(
        "A*",
        &["a", "b"],
        &[&[("a", "a"), ("a", "b"), ("b", "b")]],
    )?;
    println!("{}: surjective = {}", a_star.name(), a_star.validate().is_surjective());

    for role in classify_points(&a_star)? {
        let tags: Vec<String> = role
            .outgoing_tags()
            .iter()
            .map(|t| t.to_string())
            .collect();
        println!("  point {}: outgoing for {}", role.element, tags.join(", "));
    }

    for s in [&pt, &a_star] {
        let report = check_amalgamation_base(s)?;
        println!("{}: amalgamation base check passes = {}", s.name(), report.passes());
        for (e, count) in &report.condition1 {
            println!("  condition (1) fails at {e}: outgoing for {count} tags");
        }
    }

    // A structure that is not surjective, with the offending points named.
    let broken = FinStructure::from_names("broken", &["a", "b"], &[&[("a", "b")]])?;
    let report = broken.validate();
    println!("{}: surjective = {}", broken.name(), report.is_surjective());
    for (i, check) in report.per_relation.iter().enumerate() {
        println!(
            "  s{}: no successor {:?}, no predecessor {:?}",
            i + 1,
            check.no_successor.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
            check.no_predecessor.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        );
    }
    Ok(())
}
