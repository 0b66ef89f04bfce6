//! Independent estimate of the discrete Sobolev constant on an interval by
//! projected gradient ascent from random starts.
//!
//! Written against the raw node values only (own norms, own tridiagonal
//! solve) so it shares no code with the ground-state iteration it checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Result of the multi-start ascent.
#[derive(Debug, Clone, PartialEq)]
pub struct AscentOracle {
    pub gamma: f64,
    /// Best ratio reached from each start, in start order.
    pub per_start: Vec<f64>,
}

struct Interval {
    n: usize,
    h: f64,
}

impl Interval {
    /// Sum over all n + 1 edges (boundary values are zero) of squared
    /// difference quotients, times h.
    fn grad_sq(&self, u: &[f64]) -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0;
        for &x in u.iter().chain(std::iter::once(&0.0)) {
            acc += (x - prev) * (x - prev);
            prev = x;
        }
        acc / self.h
    }

    fn grad_dot(&self, u: &[f64], w: &[f64]) -> f64 {
        let mut acc = 0.0;
        let (mut pu, mut pw) = (0.0, 0.0);
        for (x, y) in u.iter().chain(std::iter::once(&0.0)).zip(w.iter().chain(std::iter::once(&0.0))) {
            acc += (x - pu) * (y - pw);
            pu = *x;
            pw = *y;
        }
        acc / self.h
    }

    fn power(&self, u: &[f64], q: f64) -> f64 {
        self.h * u.iter().map(|x| x.abs().powf(q)).sum::<f64>()
    }

    /// Solves `(2 w_i - w_{i-1} - w_{i+1}) / h^2 = f_i`.
    fn inverse_laplacian(&self, f: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut diag = vec![2.0; n];
        let mut rhs: Vec<f64> = f.iter().map(|x| x * self.h * self.h).collect();
        for i in 1..n {
            let w = -1.0 / diag[i - 1];
            diag[i] += w;
            rhs[i] -= w * rhs[i - 1];
        }
        let mut x = vec![0.0; n];
        x[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (rhs[i] + x[i + 1]) / diag[i];
        }
        x
    }

    fn normalise(&self, u: &mut [f64]) {
        let g = self.grad_sq(u).sqrt();
        u.iter_mut().for_each(|x| *x /= g);
    }
}

/// Maximises `||u||_{p+1}` on `{||grad u|| = 1}` over fields with `n`
/// interior nodes on `[0, length]`, from `starts` random initial fields.
pub fn ascent_gamma(length: f64, n: usize, p: f64, starts: usize, seed: u64) -> AscentOracle {
    let grid = Interval {
        n,
        h: length / (n + 1) as f64,
    };
    let q = p + 1.0;
    let per_start: Vec<f64> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            grid.normalise(&mut u);
            climb(&grid, u, q).powf(1.0 / q)
        })
        .collect();
    AscentOracle {
        gamma: per_start.iter().cloned().fold(0.0, f64::max),
        per_start,
    }
}

fn climb(grid: &Interval, mut u: Vec<f64>, q: f64) -> f64 {
    let mut value = grid.power(&u, q);
    let mut step = 1.0;
    let mut stalls = 0;
    for _ in 0..200_000 {
        // Riesz representative of the derivative in the gradient inner product.
        let d: Vec<f64> = u.iter().map(|x| q * x.abs().powf(q - 2.0) * x).collect();
        let g = grid.inverse_laplacian(&d);
        let along = grid.grad_dot(&g, &u);
        let tangent: Vec<f64> = g.iter().zip(&u).map(|(gi, ui)| gi - along * ui).collect();
        let slope = grid.grad_sq(&tangent);
        if slope <= 1e-30 * value.max(1e-300) {
            break;
        }
        loop {
            let mut trial: Vec<f64> = u.iter().zip(&tangent).map(|(a, b)| a + step * b).collect();
            grid.normalise(&mut trial);
            let tv = grid.power(&trial, q);
            if tv > value {
                let gain = (tv - value) / value;
                u = trial;
                value = tv;
                step *= 1.5;
                stalls = if gain < 1e-15 { stalls + 1 } else { 0 };
                break;
            }
            step *= 0.5;
            if step < 1e-14 {
                return value;
            }
        }
        if stalls >= 5 {
            break;
        }
    }
    value
}
