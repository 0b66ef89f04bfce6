//! Amplitude x damping x kernel sweep written as a CSV table.

use viscowave::kernel::KernelFamily;
use viscowave::runner::{sweep, write_sweep_csv};
use viscowave::verify::base_config;

fn main() -> viscowave::Result<()> {
    let base = base_config(50, 1.0, 10.0, 1.0, 3.0, KernelFamily::Exponential { mu0: 1.0, c: 1.0 });
    let rows = sweep(
        &base,
        &[0.25, 0.5, 1.0, 2.0, 3.0],
        &[1.0, 3.0],
        &[
            KernelFamily::Exponential { mu0: 1.0, c: 1.0 },
            KernelFamily::Polynomial { c: 1.0, r: 1.5 },
        ],
        None,
    );
    write_sweep_csv(&rows, std::io::stdout().lock())
}
