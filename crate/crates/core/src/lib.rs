//! Finite combinatorics of projective Fraisse families of surjective
//! relations: structures with `m` binary relations, epimorphism search,
//! amalgamation over bases with unique outgoing tags, coinitial
//! refinements, the spiral calculus, and finite approximations of the
//! limit with orbit simulation.
//!
//! The library is the primary interface; each major capability has a
//! runnable example:
//!
//! ```text
//! cargo run --example validate_and_classify   # structures, roles, base check
//! cargo run --example worked_spiral_map       # explicit spiral maps and anchors
//! cargo run --example amalgamation_trace      # pullback fixpoint with D/E trace
//! cargo run --example refine_into_the_family  # the 4m-copy refinement
//! cargo run --example spiral_covers           # spirals covering a relation
//! cargo run --example resolve_a_fiber         # unique successors over a fiber
//! cargo run --example limit_session           # inverse-sequence sessions
//! cargo run --example bijection_family        # functional stages and orbits
//! cargo run --example dot_export              # DOT rendering
//! ```
//!
//! A thin `fraisse` binary exposes the same operations on JSON documents;
//! see the `cli` module or run `fraisse help`.
//!
//! # Layout
//!
//! - [`structure`]: carriers, edge sets, validation, product, pullback.
//! - [`morphism`]: preservation and epimorphism checks, backtracking
//!   enumeration in canonical order.
//! - [`amalgamation`]: point roles, the two base hypotheses, and the
//!   descending-fixpoint amalgamation with its E-sequence bookkeeping.
//! - [`coinitial`]: the 4m-copy refinement, spiral covers, and resolving
//!   refinements.
//! - [`spiral`]: spirals, explicit anchored maps, joint projection, and
//!   the three-case amalgamation.
//! - [`limit`]: sessions, tasks, witnesses, ambiguity profiles, thread
//!   stepping, and the two-block obstruction scan.
//! - [`io`]: JSON documents, DOT export, atomic writes.

pub mod amalgamation;
pub mod coinitial;
pub mod cli;
pub mod error;
pub mod io;
pub mod limit;
pub mod morphism;
pub mod spiral;
pub mod structure;

pub use amalgamation::{
    amalgamate, check_amalgamation_base, classify_points, compute_e_sequence, AmalgamResult,
    AmalgamationTrace, BaseCheckReport, PointRole, Role,
};
pub use coinitial::{
    refine, resolving_refinement, spiral_cover, CopyLabel, RefinementResult, Resolution, Sign,
    SpiralCover,
};
pub use error::{Error, Result};
pub use limit::{
    nondensity_check, AmbiguityProfile, Family, FamilySpec, NondensityReport, Session, Stage,
    Task, TaskKind, TaskStatus, Thread, Witness,
};
pub use morphism::{
    compose, enumerate_epimorphisms, enumerate_morphisms, Enumeration, Morphism, MorphismClass,
    MorphismFlags, MorphismQuery,
};
pub use spiral::{
    spiral_amalgamate, spiral_jpp, spiral_map, spiral_map_values, Spiral, SpiralAmalgam,
    SpiralJpp, SpiralMapSpec, SpiralRealization, SpiralStructure,
};
pub use structure::{
    product, pullback, Direction, EdgeSet, ElementId, FinStructure, RelationTag, ValidationReport,
};
