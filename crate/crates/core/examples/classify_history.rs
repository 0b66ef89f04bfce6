//! Where scaled copies of the ground state fall relative to the potential
//! well.

use std::f64::consts::PI;

use viscowave::grid::SpatialGrid;
use viscowave::history::{well_parts, HistoryDatum};
use viscowave::kernel::RelaxationKernel;
use viscowave::wellconst::{ground_state, GammaOptions, WellConstants};

fn main() -> viscowave::Result<()> {
    let p = 3.0;
    let grid = SpatialGrid::new_1d(PI, 200)?;
    let kernel = RelaxationKernel::exponential(1.0, 1.0)?;
    let gs = ground_state(&grid, p, GammaOptions::default())?;
    let constants = WellConstants::from_gamma(&grid, gs.gamma, p, kernel.k0())?;
    // This multiple of the normalised ground state lies on the Nehari manifold.
    let on_m = gs.profile.scaled(gs.gamma.powf(-(p + 1.0) / (p - 1.0)));
    println!("d = {:.6}", constants.d);
    println!("{:>6} {:>12} {:>12} {:>12}", "scale", "I", "gap", "class");
    for scale in [0.0, 0.5, 0.9, 1.0, 1.1, 1.3, 2.0] {
        let v = HistoryDatum::constant(&grid, on_m.scaled(scale))?;
        let parts = well_parts(&grid, &kernel, &v, p)?;
        println!(
            "{scale:>6.2} {:>12.6} {:>12.4e} {:>12?}",
            parts.functional_i(),
            parts.nehari_gap(),
            parts.classify(constants.d)
        );
    }

    // A history with memory: the present state differs from the past one,
    // so the memory term raises the quadratic part.
    let now = on_m.scaled(0.8);
    let samples = (0..=50).map(|j| on_m.scaled(0.8 * (1.0 - j as f64 / 50.0))).collect();
    let v = HistoryDatum::new(&grid, 0.02, samples, viscowave::history::Extension::Zero, grid.zeros())?;
    let with_memory = well_parts(&grid, &kernel, &v, p)?;
    let frozen = well_parts(&grid, &kernel, &HistoryDatum::constant(&grid, now)?, p)?;
    println!(
        "ramped history: quadratic part {:.6} vs {:.6} when frozen",
        with_memory.quadratic, frozen.quadratic
    );
    Ok(())
}
