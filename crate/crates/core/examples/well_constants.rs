//! Sobolev constant and potential-well thresholds as the grid is refined.

use std::f64::consts::PI;

use viscowave::grid::SpatialGrid;
use viscowave::wellconst::WellConstants;

fn main() -> viscowave::Result<()> {
    let k0 = 2.0;
    for p in [2.0, 3.0, 5.0] {
        println!("p = {p}");
        for n in [50, 100, 200, 400] {
            let grid = SpatialGrid::new_1d(PI, n)?;
            let c = WellConstants::compute(&grid, p, k0)?;
            let m = c.m.map_or_else(|| "-".to_string(), |m| format!("{m:.6}"));
            println!("  n = {n:>3}: gamma = {:.7}  d = {:.6}  y0 = {:.6}  M = {m}", c.gamma, c.d, c.y0);
        }
    }
    Ok(())
}
