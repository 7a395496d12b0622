//! Print the level-by-level DOF classification for a small grid: which
//! nodes are cell interiors, separator edges/faces, and corners at each
//! level of the quadtree.

use parahif::grid::GridSpec;
use parahif::hierarchy::classification_dump;

fn main() -> parahif::Result<()> {
    let grid = GridSpec::with_depth(2, 8, 4)?;
    print!("{}", classification_dump(&grid));
    println!();
    let grid3 = GridSpec::with_depth(3, 4, 2)?;
    print!("{}", classification_dump(&grid3));
    Ok(())
}
