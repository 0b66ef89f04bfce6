//! Fitted energy decay rates against the predicted rates for the four
//! damping and kernel combinations.

use viscowave::decay::{compare, default_window, fit_rate, predicted_rate, FitModel};
use viscowave::integrator::{run, RunOptions};
use viscowave::kernel::{KernelFamily, RelaxationKernel};
use viscowave::verify::base_config;

fn main() -> viscowave::Result<()> {
    let cases = [
        ("linear damping, exponential kernel", 1.0, KernelFamily::Exponential { mu0: 1.0, c: 1.0 }, 40.0),
        ("cubic damping, exponential kernel", 3.0, KernelFamily::Exponential { mu0: 1.0, c: 1.0 }, 100.0),
        ("linear damping, polynomial kernel", 1.0, KernelFamily::Polynomial { c: 1.0, r: 1.5 }, 100.0),
        ("cubic damping, polynomial kernel", 3.0, KernelFamily::Polynomial { c: 1.0, r: 1.5 }, 100.0),
    ];
    for (label, m, family, t_end) in cases {
        let mut cfg = base_config(50, 0.5, t_end, m, 3.0, family);
        cfg.output_every = 20;
        let out = run(&cfg, &RunOptions::default())?;
        let class = RelaxationKernel::new(family)?.validate_assumptions()?.class;
        // Bump histories have compact support.
        let predicted = predicted_rate(m, class, None, true)?;
        let window = default_window(&out.ledger);
        println!("{label}: predicted {predicted:?}");
        for model in [FitModel::Exponential, FitModel::Polynomial] {
            let fit = fit_rate(&out.ledger, window, model)?;
            println!(
                "  {model:?} fit: rate {:.4}, R^2 {:.4} -> {:?}",
                fit.rate,
                fit.goodness,
                compare(&fit, predicted)
            );
        }
    }
    Ok(())
}
