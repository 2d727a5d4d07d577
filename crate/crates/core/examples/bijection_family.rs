//! The bijection family: stages stay functional, orbits are deterministic,
//! and the two-block obstruction pattern is never realizable.
//!
//! Run with: cargo run --example bijection_family

use std::sync::Arc;

use fraisse::limit::{nondensity_check, Family, FamilySpec, Session, Thread};
use fraisse::structure::{Direction, FinStructure};

fn main() -> fraisse::Result<()> {
    let seed = Arc::new(FinStructure::from_names("seed", &["p0"], &[&[("p0", "p0")]])?);
    let mut session = Session::new(
        FamilySpec { family: Family::Bijections, size_cap: 10_000 },
        seed,
    )?;
    // The generator enumerates bijections in size order, each universality
    // followed by a double-cover extension that splits fibers.
    session.advance_generated(8)?;

    println!("stages after 8 generated tasks:");
    for stage in session.stages() {
        println!("  D{}: {} elements", stage.index, stage.structure.size());
    }
    let profile = session.ambiguity_profile();
    let functional = profile
        .stages
        .iter()
        .all(|s| s.max_out_degree.iter().all(|&d| d == 1));
    println!("every stage is the graph of a bijection: {functional}");

    // Orbit simulation is deterministic in both directions.
    let mut entries = vec![session.stages()[0].structure.element(0).clone()];
    for i in 1..session.stages().len().min(4) {
        let stage = &session.stages()[i];
        let bond = stage.bond.as_ref().unwrap();
        let prev = session.stages()[i - 1]
            .structure
            .index_of(entries[i - 1].as_str())
            .unwrap();
        let idx = (0..stage.structure.size()).find(|&k| bond.apply(k) == prev).unwrap();
        entries.push(stage.structure.element(idx).clone());
    }
    let mut thread = Thread { entries };
    print!("orbit:");
    for _ in 0..6 {
        print!(" {}", thread.entries.last().unwrap());
        let next = session.simulate_step(&thread, 1, Direction::Forward)?;
        assert_eq!(next.len(), 1, "bijection steps are unique");
        thread = next.into_iter().next().unwrap();
    }
    println!();

    // The obstruction scan: a bijection can never induce the block pattern
    // p->p, q->p, q->q present with p->q absent.
    let report = nondensity_check(6)?;
    println!(
        "two-block obstruction on up to 6 points: {}",
        if report.unrealizable { "unrealizable" } else { "realized" }
    );
    Ok(())
}
