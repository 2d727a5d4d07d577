//! Render a spiral structure as DOT, with the left and right nodes marked.
//!
//! Run with: cargo run --example dot_export

use fraisse::io::spiral_structure_to_dot;
use fraisse::spiral::{Spiral, SpiralStructure};

fn main() -> fraisse::Result<()> {
    let s = SpiralStructure::new(vec![Spiral::new(6, 3, 5)?, Spiral::new(4, 2, 3)?])?;
    print!("{}", spiral_structure_to_dot(&s, "two_spirals"));
    Ok(())
}
