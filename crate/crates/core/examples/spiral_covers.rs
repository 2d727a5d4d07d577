//! Cover a surjective relation by spirals, one per edge, by clipping
//! eventually-periodic walks.
//!
//! Run with: cargo run --example spiral_covers

use std::sync::Arc;

use fraisse::coinitial::spiral_cover;
use fraisse::structure::FinStructure;

fn main() -> fraisse::Result<()> {
    for (name, carrier, edges) in [
        ("loop", vec!["a"], vec![("a", "a")]),
        ("c2", vec!["a", "b"], vec![("a", "b"), ("b", "a")]),
        (
            "A*",
            vec!["a", "b"],
            vec![("a", "a"), ("a", "b"), ("b", "b")],
        ),
    ] {
        let a = Arc::new(FinStructure::from_names(name, &carrier, &[&edges])?);
        let cover = spiral_cover(&a)?;
        println!(
            "{name}: {} components, union map epimorphic = {}",
            cover.components.len(),
            cover.map.is_epimorphism()
        );
        let mut offset = 0usize;
        for c in &cover.components {
            let s = c.spiral;
            let (p, q) = c.designated;
            println!(
                "  spiral (n={}, x={}, y={}) covers edge ({}, {}) at positions ({p}, {q})",
                s.n(),
                s.x(),
                s.y(),
                cover.map.target().element(cover.map.apply(offset + p - 1)),
                cover.map.target().element(cover.map.apply(offset + q - 1)),
            );
            offset += s.n();
        }
    }
    Ok(())
}
