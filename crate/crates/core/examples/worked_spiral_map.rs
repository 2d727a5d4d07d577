//! The explicit relation-preserving map between two spirals through a
//! chosen middle anchor, compared against brute-force enumeration.
//!
//! Run with: cargo run --example worked_spiral_map

use std::sync::Arc;

use fraisse::morphism::{enumerate_morphisms, MorphismClass, MorphismQuery};
use fraisse::spiral::{spiral_map, spiral_map_values, Spiral, SpiralMapSpec};

fn main() -> fraisse::Result<()> {
    let n = Spiral::new(10, 3, 7)?;
    let m = Spiral::new(6, 3, 5)?;
    println!(
        "N = (n={}, x={}, y={}): circles {}/{}, middle edges {}",
        n.n(), n.x(), n.y(), n.left_len(), n.right_len(), n.mid_edges()
    );
    println!(
        "M = (n={}, x={}, y={}): circles {}/{}, middle edges {}",
        m.n(), m.x(), m.y(), m.left_len(), m.right_len(), m.mid_edges()
    );

    // The map anchored at middle positions (5, 7).
    let values = spiral_map_values(&n, &m, &SpiralMapSpec::OntoFull { a: 5, b: 7 })?;
    println!("f(1..10) = {values:?}");
    let morphism = spiral_map(&n, &m, &SpiralMapSpec::OntoFull { a: 5, b: 7 })?;
    println!(
        "preserving = {}, epimorphism = {}",
        morphism.is_preserving(),
        morphism.is_epimorphism()
    );

    // Every onto map corresponds to exactly one anchor pair: brute-force
    // enumeration agrees with the anchor count.
    let src = Arc::new(n.to_structure("N"));
    let tgt = Arc::new(m.to_structure("M"));
    let found = enumerate_morphisms(
        &src,
        &tgt,
        MorphismQuery { mode: MorphismClass::Epimorphism, cap: usize::MAX },
    )?;
    let anchors: Vec<(usize, usize)> = (n.x()..=n.y() - m.mid_edges())
        .map(|a| (a, a + m.mid_edges()))
        .collect();
    println!("onto maps found by search: {}", found.total);
    println!("valid anchor pairs:        {}", anchors.len());
    for (a, b) in anchors {
        let v = spiral_map_values(&n, &m, &SpiralMapSpec::OntoFull { a, b })?;
        println!("  anchor ({a},{b}) -> f = {v:?}");
    }

    // Maps onto a circle only: the left-circle map needs both circles of
    // the source divisible by the target's left circle.
    let n2 = Spiral::new(11, 4, 8)?;
    let m2 = Spiral::new(6, 2, 4)?;
    let left = spiral_map_values(&n2, &m2, &SpiralMapSpec::OntoLeft { c: 3 })?;
    println!("onto-left (11,4,8) -> (6,2,4) through c=3: {left:?}");
    Ok(())
}
