//! The comparison ODE S' = -(I + Phi)^{-1} S, its check against a simulated
//! energy, and the rate bootstrap for polynomial kernels.

use viscowave::decay::{comparison_check, lt_ode_solve, optimal_rate_bootstrap, DecayModel};
use viscowave::integrator::{run, RunOptions};
use viscowave::kernel::KernelFamily;
use viscowave::verify::base_config;

fn main() -> viscowave::Result<()> {
    for m in [1.0, 2.0, 3.0] {
        let s = lt_ode_solve(&DecayModel::new(1.0, m, 1.0)?, 1.0, 50.0, false)?;
        let sample: Vec<String> = [0.0, 10.0, 25.0, 50.0].iter().map(|&t| format!("{:.3e}", s.at(t))).collect();
        println!("m = {m}: S at t = 0, 10, 25, 50: {}", sample.join(", "));
    }

    let cfg = base_config(100, 0.5, 40.0, 1.0, 3.0, KernelFamily::Exponential { mu0: 1.0, c: 1.0 });
    let out = run(&cfg, &RunOptions::default())?;
    let report = comparison_check(&out.ledger, &DecayModel::new(1.0, 1.0, 1.0)?, false, 1e-6)?;
    println!("{}", report.calibration);
    println!(
        "E(n) <= S(n) over {} periods: {} ({} violations)",
        report.points.len() - 1,
        report.passed,
        report.violations.len()
    );

    for (sigma1, r) in [(0.1, 1.5), (0.05, 1.9), (0.3, 1.2)] {
        let b = optimal_rate_bootstrap(sigma1, r)?;
        let seq: Vec<String> = b.sigma_sequence.iter().map(|s| format!("{s:.3}")).collect();
        println!("r = {r}, sigma1 = {sigma1}: {} steps, sigma = {}", b.iterations, seq.join(" -> "));
    }
    Ok(())
}
