use super::{Hole, LatticeSpec, Site};
use crate::error::Result;

/// Holes of the unperturbed triangular lattice.
///
/// Rows sit at `y = k a sqrt(3)/2` for `|k| <= ny`; odd rows are offset by
/// `a/2`. Every row keeps the holes with `|x| <= nx a`, so row 0 carries a hole
/// at the origin. Holes are ordered by row, then by x.
pub fn build_bulk_lattice(spec: &LatticeSpec) -> Result<Vec<Hole>> {
    spec.validate()?;
    let nx = spec.nx as i32;
    let ny = spec.ny as i32;
    let mut holes = Vec::with_capacity(((2 * ny + 1) * (2 * nx + 1)) as usize);
    for row in -ny..=ny {
        let odd = row.rem_euclid(2) == 1;
        // col2 = 2x/a; even rows carry even col2, odd rows odd col2
        let (lo, hi) = if odd { (-2 * nx + 1, 2 * nx - 1) } else { (-2 * nx, 2 * nx) };
        for col2 in (lo..=hi).step_by(2) {
            holes.push(Hole::at_site(Site::Lattice { row, col2 }, spec.a_nm, spec.r_nm));
        }
    }
    Ok(holes)
}

/// Closed-form hole count of [`build_bulk_lattice`].
#[cfg(test)]
pub(crate) fn bulk_count(nx: u32, ny: u32) -> usize {
    let (nx, ny) = (nx as usize, ny as usize);
    let even_rows = 2 * (ny / 2) + 1;
    let odd_rows = 2 * ny + 1 - even_rows;
    even_rows * (2 * nx + 1) + odd_rows * 2 * nx
}
