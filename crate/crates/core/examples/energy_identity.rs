//! The energy identity E(t) + D(t) = E(0) holds up to a residual that
//! shrinks fourfold each time the step is halved.

use viscowave::integrator::{run, RunOptions};
use viscowave::kernel::KernelFamily;
use viscowave::verify::base_config;

fn main() -> viscowave::Result<()> {
    let mut previous: Option<f64> = None;
    for cfl in [0.8, 0.4, 0.2, 0.1] {
        let mut cfg = base_config(100, 0.8, 10.0, 2.0, 3.0, KernelFamily::Polynomial { c: 1.0, r: 1.5 });
        cfg.cfl_safety = cfl;
        let out = run(&cfg, &RunOptions::default())?;
        let e0 = out.ledger.e0();
        let worst = out.ledger.rows.iter().map(|r| r.identity_residual).fold(0.0, f64::max) / e0.abs();
        let ratio = previous.map_or_else(String::new, |p| format!("  ratio {:.3}", p / worst));
        println!("cfl {cfl:<4} steps {:>6}  max residual / E0 = {worst:.3e}{ratio}", out.steps);
        previous = Some(worst);
    }
    Ok(())
}
