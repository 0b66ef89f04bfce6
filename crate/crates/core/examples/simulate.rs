//! A single run from an in-code config, printing the energy ledger.

use std::f64::consts::PI;

use viscowave::history::TemporalProfile;
use viscowave::integrator::{run, GridSpec, HistorySpec, RunOptions, ScenarioConfig};
use viscowave::kernel::KernelFamily;

fn main() -> viscowave::Result<()> {
    let config = ScenarioConfig {
        m: 2.0,
        p: 3.0,
        dt: None,
        t_end: 20.0,
        cfl_safety: 0.5,
        seed: 0,
        dim3_semantics: false,
        output_every: 50,
        memory_stride: 1,
        s_cap: None,
        fit_window: None,
        grid: GridSpec {
            extents: vec![PI],
            n: vec![100],
        },
        kernel: KernelFamily::Exponential { mu0: 1.0, c: 1.0 },
        history: HistorySpec::template(0.8, vec![1], TemporalProfile::ExpRamp { rate: 1.0, support: 2.0 }),
    };
    let out = run(&config, &RunOptions::default())?;
    println!("{:?} after {} steps", out.termination, out.steps);
    println!("{:>8} {:>12} {:>12} {:>12} {:>12}", "t", "E", "D_cum", "|grad u|", "residual");
    for r in &out.ledger.rows {
        println!(
            "{:>8.3} {:>12.6} {:>12.6} {:>12.6} {:>12.2e}",
            r.t, r.e, r.d_cum, r.grad_norm, r.identity_residual
        );
    }
    Ok(())
}
