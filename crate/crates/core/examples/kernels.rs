//! The two built-in relaxation kernels: values, tail masses, k(0) and the
//! decay class that drives the predicted energy decay.

use viscowave::kernel::{KernelFamily, RelaxationKernel};

fn main() -> viscowave::Result<()> {
    let kernels = [
        KernelFamily::Exponential { mu0: 1.0, c: 1.0 },
        KernelFamily::Exponential { mu0: 0.5, c: 3.0 },
        KernelFamily::Polynomial { c: 1.0, r: 1.5 },
        KernelFamily::Polynomial { c: 0.4, r: 1.8 },
    ];
    for family in kernels {
        let k = RelaxationKernel::new(family)?;
        let report = k.validate_assumptions()?;
        println!("{family:?}");
        println!("  k0 = {:.6}, class {:?}, decay constant {:.4}", k.k0(), report.class, report.decay_constant);
        println!("  {:>6} {:>12} {:>12} {:>12}", "s", "mu(s)", "mu'(s)", "k(s)");
        for s in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0] {
            println!("  {s:>6.1} {:>12.4e} {:>12.4e} {:>12.6}", k.mu(s)?, k.mu_prime(s)?, k.k_at(s)?);
        }
    }
    Ok(())
}
