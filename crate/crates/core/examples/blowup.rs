//! A negative-energy datum that blows up, with the detector's verdict and
//! the growth of the gradient.

use viscowave::integrator::RunOptions;
use viscowave::kernel::KernelFamily;
use viscowave::runner::execute;
use viscowave::verify::{base_config, negative_energy_amplitude};

fn main() -> viscowave::Result<()> {
    let template = base_config(200, 1.0, 5.0, 1.0, 3.0, KernelFamily::Exponential { mu0: 1.0, c: 1.0 });
    let amplitude = negative_energy_amplitude(&template)?;
    let mut cfg = template.clone();
    cfg.history = cfg.history.amplitude_scaled(amplitude);
    let record = execute(&cfg, &RunOptions::default())?;
    let s = &record.summary;
    println!("amplitude {amplitude:.4}: E(0) = {:.4}, class {:?}", s.e0, s.classification_at_0);
    println!("hypothesis {:?}, termination {:?}", s.blowup.hypothesis, s.termination);
    println!(
        "detector fired: {}, estimated blow-up time {:?}, {} step halvings",
        s.blowup.fired, s.blowup.t_estimate, s.controller.halvings
    );
    let rows = &record.output.ledger.rows;
    for r in rows.iter().step_by((rows.len() / 15).max(1)).chain(rows.last()) {
        println!("  t = {:.5}  |grad u| = {:.4e}  E = {:.4e}", r.t, r.grad_norm, r.e);
    }
    Ok(())
}
