//! Finite-difference operators on 1-D and 2-D Dirichlet grids.

use std::f64::consts::PI;

use viscowave::grid::SpatialGrid;

fn main() -> viscowave::Result<()> {
    // The discrete Laplacian of sin(kx) is -(2/h sin(kh/2))^2 sin(kx).
    for n in [25, 50, 100, 200] {
        let g = SpatialGrid::new_1d(PI, n)?;
        let u = g.sine_mode(&[2]);
        let lap = g.laplacian(&u)?;
        let ratio = -g.inner_product(&lap, &u) / g.l2_norm_sq(&u);
        println!("n = {n:>3}: eigenvalue of mode 2 = {ratio:.8} (continuum 4)");
    }

    let g = SpatialGrid::new_2d([PI, 2.0 * PI], [30, 60])?;
    let u = g.sample(|x| x[0].sin() * (0.5 * x[1]).sin() * (1.0 + 0.2 * x[0]));
    println!("2-D grid with {} nodes", g.len());
    println!("  ||u||_2^2      = {:.6}", g.l2_norm_sq(&u));
    println!("  ||grad u||_2^2 = {:.6}", g.h1_seminorm_sq(&u));
    println!("  ||u||_4^4      = {:.6}", g.lp_norm_pow(&u, 4.0)?);
    let back = g.laplacian(&g.poisson_solve(&u)?)?;
    let err = back.iter().zip(u.iter()).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
    println!("  Poisson solve round trip error {err:.2e}");
    Ok(())
}
