//! Build a finite approximation of the spiral-family limit: discharge
//! universality, extension, and resolution tasks, then inspect the
//! ambiguity profile and step a thread through the stages.
//!
//! Run with: cargo run --example limit_session

use std::sync::Arc;

use fraisse::limit::{double_cover, Family, FamilySpec, Session, TaskStatus, Thread};
use fraisse::spiral::{Spiral, SpiralStructure};
use fraisse::structure::{Direction, ElementId};

fn main() -> fraisse::Result<()> {
    let seed = Arc::new(SpiralStructure::single(Spiral::new(4, 2, 3)?).to_structure("seed"));
    let mut session = Session::new(
        FamilySpec { family: Family::Spirals, size_cap: 50_000 },
        seed,
    )?;

    // Universality of every spiral with at most six points.
    for n in 4..=6usize {
        for x in 2..n {
            for y in x + 1..n {
                let spiral = Spiral::new(n, x, y)?;
                let target = Arc::new(spiral.to_structure(format!("spiral({n},{x},{y})")));
                session.enqueue_universality(target)?;
            }
        }
    }
    session.advance(usize::MAX)?;

    // One resolution, then one double-cover extension per witness.
    session.enqueue_resolution(1, 1, ElementId::new("1:2")?)?;
    session.advance(1)?;
    let witnesses: Vec<(usize, fraisse::morphism::Morphism)> = session
        .tasks()
        .iter()
        .filter_map(|t| match (&t.kind, &t.status) {
            (fraisse::limit::TaskKind::Universality { .. }, TaskStatus::Discharged(w)) => {
                Some((w.stage_index, w.map.clone().unwrap()))
            }
            _ => None,
        })
        .collect();
    for (stage_index, witness) in witnesses {
        let phi1 = double_cover(witness.target_arc())?;
        session.enqueue_extension(phi1, stage_index, witness)?;
    }
    session.advance(usize::MAX)?;

    println!("stages:");
    for stage in session.stages() {
        println!(
            "  D{} has {} elements{}",
            stage.index,
            stage.structure.size(),
            if stage.bond.is_some() { "" } else { " (seed)" }
        );
    }
    let profile = session.ambiguity_profile();
    for s in profile.stages.iter().take(4) {
        println!("  D{}: max out-degree {:?}", s.stage_index, s.max_out_degree);
    }
    for f in &profile.fibers {
        println!(
            "  resolution task {}: fiber of {} elements, successor counts {:?}",
            f.task_id,
            f.elements.len(),
            f.successor_counts
        );
    }

    // Step a bond-coherent three-stage thread forward and back.
    let mut entries = vec![session.stages()[0].structure.element(0).clone()];
    for i in 1..3 {
        let stage = &session.stages()[i];
        let bond = stage.bond.as_ref().unwrap();
        let prev = session.stages()[i - 1]
            .structure
            .index_of(entries[i - 1].as_str())
            .unwrap();
        let idx = (0..stage.structure.size()).find(|&k| bond.apply(k) == prev).unwrap();
        entries.push(stage.structure.element(idx).clone());
    }
    let thread = Thread { entries };
    let forward = session.simulate_step(&thread, 1, Direction::Forward)?;
    println!(
        "thread {:?} has {} forward successor thread(s)",
        thread.entries.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        forward.len()
    );
    let back = session.simulate_step(&forward[0], 1, Direction::Inverse)?;
    println!(
        "stepping back returns the original: {}",
        back.contains(&thread)
    );
    Ok(())
}
