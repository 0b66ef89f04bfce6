//! The discrete Sobolev constant and the well thresholds derived from it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, SpatialGrid};

/// Iteration limits for [`sobolev_gamma_with`].
#[derive(Debug, Clone, Copy)]
pub struct GammaOptions {
    pub max_iter: usize,
    pub rel_tol: f64,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            max_iter: 10_000,
            rel_tol: 1e-10,
        }
    }
}

/// Converged ground state of the fixed-point iteration.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub gamma: f64,
    /// Maximiser normalised to `||grad u|| = 1`.
    pub profile: Field,
    pub iterations: usize,
}

/// `gamma = sup ||u||_{p+1} / ||grad u||_2` over nonzero grid fields.
pub fn sobolev_gamma(grid: &SpatialGrid, p: f64) -> Result<f64> {
    Ok(ground_state(grid, p, GammaOptions::default())?.gamma)
}

/// Ground-state iteration `u <- (-lap)^{-1}(|u|^{p-1} u)`, renormalised
/// each sweep, started from the first Dirichlet mode.
pub fn ground_state(grid: &SpatialGrid, p: f64, opts: GammaOptions) -> Result<GroundState> {
    let first = grid.sine_mode(&vec![1; grid.dim()]);
    ground_state_from(grid, p, first, opts)
}

/// Same iteration from a chosen start field.
pub fn ground_state_from(
    grid: &SpatialGrid,
    p: f64,
    start: Field,
    opts: GammaOptions,
) -> Result<GroundState> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::domain(format!("Sobolev exponent requires p >= 1, got {p}")));
    }
    grid.check(&start)?;
    let q = p + 1.0;
    let ratio = |u: &Field| grid.lp_pow(u, q).powf(1.0 / q) / grid.h1_seminorm_sq(u).sqrt();
    let mut u = normalise(grid, start)?;
    let mut last = ratio(&u);
    for it in 1..=opts.max_iter {
        let rhs = Field(u.iter().map(|&x| x.abs().powf(p - 1.0) * x).collect());
        u = normalise(grid, grid.poisson_solve(&rhs)?)?;
        let r = ratio(&u);
        if (r - last).abs() <= opts.rel_tol * r {
            return Ok(GroundState {
                gamma: r,
                profile: u,
                iterations: it,
            });
        }
        last = r;
    }
    Err(Error::GammaNonConvergence {
        iterations: opts.max_iter,
        ratio: last,
    })
}

fn normalise(grid: &SpatialGrid, u: Field) -> Result<Field> {
    let g = grid.h1_seminorm_sq(&u).sqrt();
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::domain("ground-state iterate collapsed"));
    }
    Ok(u.scaled(1.0 / g))
}

/// `d = (p - 1) / (2 (p + 1)) gamma^{-2 (p + 1) / (p - 1)}`.
pub fn mountain_pass_d(gamma: f64, p: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
    }
    if !(p > 1.0) {
        return Err(Error::domain(format!("the well depth needs p > 1, got {p}")));
    }
    Ok((p - 1.0) / (2.0 * (p + 1.0)) * gamma.powf(-2.0 * (p + 1.0) / (p - 1.0)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub y0: f64,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_absent_reason: Option<String>,
}

/// `y0 = (p + 1)/(p - 1) d` and, when `p > sqrt(k0) > 1`,
/// `M = ((sqrt(k0) + 1)/2)^{2/(p-1)} (p - sqrt(k0))/(p - 1) d`.
pub fn thresholds(d: f64, p: f64, k0: f64) -> Result<Thresholds> {
    if !(d > 0.0) {
        return Err(Error::domain(format!("d must be positive, got {d}")));
    }
    if !(p > 1.0) {
        return Err(Error::domain(format!("thresholds need p > 1, got {p}")));
    }
    let y0 = (p + 1.0) / (p - 1.0) * d;
    let sk = k0.sqrt();
    let (m, m_absent_reason) = if !(sk > 1.0) {
        (None, Some(format!("sqrt(k0) = {sk} is not above 1")))
    } else if !(p > sk) {
        (None, Some(format!("p = {p} does not exceed sqrt(k0) = {sk}")))
    } else {
        let m = ((sk + 1.0) / 2.0).powf(2.0 / (p - 1.0)) * (p - sk) / (p - 1.0) * d;
        (Some(m), None)
    };
    Ok(Thresholds {
        y0,
        m,
        m_absent_reason,
    })
}

/// All well constants for one grid, exponent and kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WellConstants {
    pub gamma: f64,
    pub d: f64,
    pub y0: f64,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_absent_reason: Option<String>,
    pub p: f64,
    pub k0: f64,
    pub grid_fingerprint: String,
}

impl WellConstants {
    pub fn compute(grid: &SpatialGrid, p: f64, k0: f64) -> Result<Self> {
        let gamma = sobolev_gamma(grid, p)?;
        Self::from_gamma(grid, gamma, p, k0)
    }

    pub fn from_gamma(grid: &SpatialGrid, gamma: f64, p: f64, k0: f64) -> Result<Self> {
        let d = mountain_pass_d(gamma, p)?;
        let t = thresholds(d, p, k0)?;
        if let Some(m) = t.m {
            assert!(m < d, "M = {m} is not below d = {d}");
        }
        Ok(WellConstants {
            gamma,
            d,
            y0: t.y0,
            m: t.m,
            m_absent_reason: t.m_absent_reason,
            p,
            k0,
            grid_fingerprint: grid.fingerprint(),
        })
    }

    /// `gamma^{-(p+1)/(p-1)}`, the gradient norm at which the source
    /// potential balances the quadratic energy.
    pub fn gradient_threshold(&self) -> f64 {
        self.gamma.powf(-(self.p + 1.0) / (self.p - 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn poincare_limit() {
        let g = SpatialGrid::new_1d(PI, 400).unwrap();
        let gamma = sobolev_gamma(&g, 1.0).unwrap();
        // Discrete first eigenvalue (2/h sin(h/2))^2.
        let h = g.spacings()[0];
        let lambda = (2.0 / h * (h / 2.0).sin()).powi(2);
        assert!((gamma - lambda.powf(-0.5)).abs() < 1e-9);
        assert!((gamma - 1.0).abs() < 1e-3);
    }

    #[test]
    fn scale_invariant_start() {
        let g = SpatialGrid::new_1d(1.0, 80).unwrap();
        let start = g.sine_mode(&[1]);
        let a = ground_state_from(&g, 3.0, start.clone(), GammaOptions::default()).unwrap();
        let b = ground_state_from(&g, 3.0, start.scaled(2.0), GammaOptions::default()).unwrap();
        assert!((a.gamma - b.gamma).abs() <= 1e-14 * a.gamma);
    }

    #[test]
    fn d_arithmetic() {
        assert_eq!(mountain_pass_d(1.0, 3.0).unwrap(), 0.25);
        assert!((mountain_pass_d(2.0, 2.0).unwrap() - 1.0 / 384.0).abs() < 1e-16);
        let gamma: f64 = 0.7;
        assert!((mountain_pass_d(gamma, 3.0).unwrap() - gamma.powi(-4) / 4.0).abs() < 1e-14);
        assert!(mountain_pass_d(1.0, 1.0).is_err());
    }

    #[test]
    fn threshold_arithmetic() {
        let t = thresholds(1.0, 3.0, 2.0).unwrap();
        assert_eq!(t.y0, 2.0);
        assert!((t.m.unwrap() - 0.957107).abs() < 1e-6);
        let absent = thresholds(1.0, 1.2, 2.0).unwrap();
        assert!(absent.m.is_none() && absent.m_absent_reason.is_some());
        assert!(thresholds(1.0, 3.0, 1.0).unwrap().m.is_none());
    }

    #[test]
    fn nonconvergence_reports_ratio() {
        let g = SpatialGrid::new_1d(1.0, 50).unwrap();
        let opts = GammaOptions {
            max_iter: 1,
            rel_tol: 0.0,
        };
        match ground_state(&g, 3.0, opts) {
            Err(Error::GammaNonConvergence { ratio, .. }) => assert!(ratio > 0.0),
            other => panic!("{other:?}"),
        }
    }
}
