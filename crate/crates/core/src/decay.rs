//! Decay-rate fitting, predicted rates, the comparison ODE
//! `S' + (I + Phi)^{-1} S = 0`, and the rate-improvement bootstrap.

use serde::{Deserialize, Serialize};

use crate::energetics::{EnergyLedger, EnergyRow};
use crate::error::{Error, Result};
use crate::kernel::DecayClass;
use crate::roots::{increasing_bisect, increasing_root};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    /// `ln E` linear in `t`.
    Exponential,
    /// `ln E` linear in `ln(1 + t)`.
    Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub model: FitModel,
    /// `alpha` in `exp(-alpha t)` or the exponent in `(1 + t)^-a`.
    pub rate: f64,
    /// Coefficient of determination of the log-linear fit.
    pub goodness: f64,
    pub rows_used: usize,
    pub window: [f64; 2],
}

/// Default fit window: the second half of the ledger's time span.
pub fn default_window(ledger: &EnergyLedger) -> [f64; 2] {
    let t_end = ledger.last().map_or(0.0, |r| r.t);
    [0.5 * t_end, t_end]
}

/// Least-squares fit of `ln E` over the rows with `t` in `window`, skipping
/// rows where `E < 1e-14 E(0)`.
pub fn fit_rate(ledger: &EnergyLedger, window: [f64; 2], model: FitModel) -> Result<RateFit> {
    let floor = 1e-14 * ledger.e0().abs();
    let pts: Vec<(f64, f64)> = ledger
        .rows
        .iter()
        .filter(|r| r.t >= window[0] && r.t <= window[1] && r.e > floor && r.e > 0.0)
        .map(|r| {
            let x = match model {
                FitModel::Exponential => r.t,
                FitModel::Polynomial => (1.0 + r.t).ln(),
            };
            (x, r.e.ln())
        })
        .collect();
    if pts.len() < 10 {
        return Err(Error::Fit(format!(
            "fit window [{}, {}] holds {} usable rows, need at least 10",
            window[0],
            window[1],
            pts.len()
        )));
    }
    let (slope, goodness) = linear_fit(&pts);
    Ok(RateFit {
        model,
        rate: -slope,
        goodness,
        rows_used: pts.len(),
        window,
    })
}

fn linear_fit(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    // A perfectly flat series is fitted exactly.
    let goodness = if syy <= 1e-30 * (1.0 + my * my) {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    (slope, goodness)
}

/// Rate bound asserted by the decay theorem for a given damping and kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RatePrediction {
    Exponential,
    Polynomial { exponent: f64 },
}

/// Predicted decay for damping exponent `m`, kernel class and, for
/// polynomial kernels without compactly supported history, the auxiliary
/// exponent `sigma` in `(0, 2 - r)`.
pub fn predicted_rate(
    m: f64,
    class: DecayClass,
    sigma: Option<f64>,
    compact_support: bool,
) -> Result<RatePrediction> {
    if !(m >= 1.0) {
        return Err(Error::domain(format!("damping exponent must be >= 1, got {m}")));
    }
    let damping = (m > 1.0).then(|| 2.0 / (m - 1.0));
    match class {
        DecayClass::Exponential => Ok(match damping {
            None => RatePrediction::Exponential,
            Some(a) => RatePrediction::Polynomial { exponent: a },
        }),
        DecayClass::Polynomial { r } => {
            let memory = if compact_support {
                1.0 / (r - 1.0)
            } else {
                let s = sigma.ok_or_else(|| Error::domain("sigma is required without compact support"))?;
                if !(s > 0.0 && s < 2.0 - r) {
                    return Err(Error::domain(format!("sigma = {s} must lie in (0, {})", 2.0 - r)));
                }
                s / (r - 1.0)
            };
            Ok(RatePrediction::Polynomial {
                exponent: damping.map_or(memory, |a| a.max(memory)),
            })
        }
    }
}

/// Whether an observed decay is at least as fast as predicted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    SlowerThanPredicted,
    Inconclusive,
}

/// One-sided comparison. Exponential predictions need a positive
/// exponential rate with goodness at least 0.9; polynomial predictions need
/// a fitted exponent no more than 10 % below the prediction.
pub fn compare(fit: &RateFit, predicted: RatePrediction) -> Verdict {
    match (predicted, fit.model) {
        (RatePrediction::Exponential, FitModel::Exponential) => {
            if fit.rate > 0.0 && fit.goodness >= 0.9 {
                Verdict::Consistent
            } else {
                Verdict::SlowerThanPredicted
            }
        }
        (RatePrediction::Polynomial { exponent }, FitModel::Polynomial) => {
            if fit.rate >= 0.9 * exponent {
                Verdict::Consistent
            } else {
                Verdict::SlowerThanPredicted
            }
        }
        (RatePrediction::Polynomial { .. }, FitModel::Exponential) if fit.rate > 0.0 && fit.goodness >= 0.9 => {
            Verdict::Consistent
        }
        _ => Verdict::Inconclusive,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub exponent: f64,
    pub window: [f64; 2],
    pub start_value: f64,
    pub max_value: f64,
    pub max_at: f64,
    pub factor: f64,
    pub passed: bool,
}

/// Checks `E(t) (1 + t)^exponent <= factor * (value at the window start)`
/// over the window.
pub fn envelope_check(
    ledger: &EnergyLedger,
    exponent: f64,
    window: [f64; 2],
    factor: f64,
) -> Result<EnvelopeReport> {
    let rows: Vec<&EnergyRow> = ledger
        .rows
        .iter()
        .filter(|r| r.t >= window[0] && r.t <= window[1])
        .collect();
    let first = rows
        .first()
        .ok_or_else(|| Error::Fit(format!("no ledger rows in [{}, {}]", window[0], window[1])))?;
    let env = |r: &EnergyRow| r.e * (1.0 + r.t).powf(exponent);
    let start_value = env(first);
    let (max_at, max_value) = rows
        .iter()
        .map(|r| (r.t, env(r)))
        .fold((first.t, start_value), |acc, x| if x.1 > acc.1 { x } else { acc });
    Ok(EnvelopeReport {
        exponent,
        window,
        start_value,
        max_value,
        max_at,
        factor,
        passed: max_value <= factor * start_value.max(0.0),
    })
}

/// `Phi` and `Psi` of the comparison argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    pub phi_c: f64,
    pub psi_c1: f64,
    pub psi_c2: f64,
    pub m: f64,
    pub r: Option<f64>,
    pub sigma: Option<f64>,
    pub t_reiter: f64,
}

impl DecayModel {
    pub fn new(phi_c: f64, m: f64, t_reiter: f64) -> Result<Self> {
        if !(phi_c > 0.0) || !(m >= 1.0) || !(t_reiter > 0.0) {
            return Err(Error::domain("decay model needs phi_c > 0, m >= 1 and T > 0"));
        }
        Ok(DecayModel {
            phi_c,
            psi_c1: phi_c,
            psi_c2: phi_c,
            m,
            r: None,
            sigma: None,
            t_reiter,
        })
    }

    /// Adds the polynomial-kernel part used by `Psi`.
    pub fn with_psi(mut self, psi_c1: f64, psi_c2: f64, r: f64, sigma: f64) -> Result<Self> {
        if !(psi_c1 > 0.0 && psi_c2 > 0.0) {
            return Err(Error::domain("psi constants must be positive"));
        }
        if !(r > 1.0 && r < 2.0) || !(sigma > 0.0 && sigma < 2.0 - r) {
            return Err(Error::domain(format!("need r in (1, 2) and sigma in (0, 2 - r), got r = {r}, sigma = {sigma}")));
        }
        self.psi_c1 = psi_c1;
        self.psi_c2 = psi_c2;
        self.r = Some(r);
        self.sigma = Some(sigma);
        Ok(self)
    }

    fn damping_exponent(&self) -> f64 {
        2.0 / (self.m + 1.0)
    }

    /// `Phi(s) = phi_c (s^{2/(m+1)} + s)` (or `Psi`) and its derivative.
    pub fn eval(&self, s: f64, use_psi: bool) -> (f64, f64) {
        let a = self.damping_exponent();
        let base = s.powf(a) + s;
        let dbase = if s > 0.0 { a * s.powf(a - 1.0) + 1.0 } else { f64::INFINITY };
        if !use_psi {
            return (self.phi_c * base, self.phi_c * dbase);
        }
        let (r, sigma) = (self.r.unwrap_or(1.5), self.sigma.unwrap_or(0.25));
        let b = sigma / (sigma + r - 1.0);
        let extra = self.psi_c1 * s.powf(b);
        let dextra = if s > 0.0 { self.psi_c1 * b * s.powf(b - 1.0) } else { f64::INFINITY };
        (extra + self.psi_c2 * base, dextra + self.psi_c2 * dbase)
    }

    fn check_psi(&self, use_psi: bool) -> Result<()> {
        if use_psi && (self.r.is_none() || self.sigma.is_none()) {
            return Err(Error::domain("Psi needs r and sigma (see DecayModel::with_psi)"));
        }
        Ok(())
    }

    /// `z` with `z + Phi(z) = s`, solved to a relative residual of a few
    /// ulps of `s` (so well inside `1e-13 max(1, s)`).
    pub fn inverse_i_plus(&self, s: f64, use_psi: bool) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let tol = 2.0 * f64::EPSILON * s;
        let root = increasing_root(
            |z| {
                let (f, df) = self.eval(z, use_psi);
                (z + f - s, 1.0 + df)
            },
            0.0,
            s,
            tol,
            500,
        );
        root.x
    }

    /// `Phi^{-1}(y)` by bisection.
    pub fn inverse_phi(&self, y: f64, use_psi: bool) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.eval(hi, use_psi).0 < y {
            hi *= 2.0;
        }
        increasing_bisect(|x| self.eval(x, use_psi).0 - y, 0.0, hi, 2000)
    }

    /// Both sides of `(I + Phi^{-1})^{-1}(s) = s - (I + Phi)^{-1}(s)`: the left
    /// by two nested bisections, the right by the Newton inverse.
    pub fn inverse_identity_sides(&self, s: f64, use_psi: bool) -> (f64, f64) {
        let left = if s <= 0.0 {
            0.0
        } else {
            increasing_bisect(|y| y + self.inverse_phi(y, use_psi) - s, 0.0, s, 2000)
        };
        (left, s - self.inverse_i_plus(s, use_psi))
    }
}

/// Samples of the comparison solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SSeries {
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    /// Largest `|z + Phi(z) - S| / max(1, S)` over every inversion made.
    pub max_inverse_residual: f64,
}

impl SSeries {
    /// Linear interpolation; clamps outside the sampled range.
    pub fn at(&self, t: f64) -> f64 {
        let n = self.t.len();
        if n == 0 {
            return 0.0;
        }
        if t <= self.t[0] {
            return self.s[0];
        }
        if t >= self.t[n - 1] {
            return self.s[n - 1];
        }
        let k = self.t.partition_point(|&x| x <= t);
        let (t0, t1) = (self.t[k - 1], self.t[k]);
        let w = (t - t0) / (t1 - t0);
        (1.0 - w) * self.s[k - 1] + w * self.s[k]
    }
}

/// Classical RK4 for `S' = -(I + Phi)^{-1} S`, `S(0) = e0`, with step
/// `1e-3 t_end`.
pub fn lt_ode_solve(model: &DecayModel, e0: f64, t_end: f64, use_psi: bool) -> Result<SSeries> {
    model.check_psi(use_psi)?;
    if !(e0 >= 0.0) || !(t_end > 0.0) {
        return Err(Error::domain("comparison ODE needs E0 >= 0 and t_end > 0"));
    }
    lt_ode_with_steps(model, e0, t_end, 1000, use_psi)
}

pub(crate) fn lt_ode_with_steps(
    model: &DecayModel,
    e0: f64,
    t_end: f64,
    steps: usize,
    use_psi: bool,
) -> Result<SSeries> {
    let h = t_end / steps as f64;
    let mut worst = 0.0f64;
    let mut rhs = |s: f64| {
        let z = model.inverse_i_plus(s, use_psi);
        if s > 0.0 {
            let res = (z + model.eval(z, use_psi).0 - s).abs() / s.max(1.0);
            worst = worst.max(res);
        }
        -z
    };
    let mut t = Vec::with_capacity(steps + 1);
    let mut out = Vec::with_capacity(steps + 1);
    let mut s = e0;
    t.push(0.0);
    out.push(s);
    for k in 1..=steps {
        let k1 = rhs(s);
        let k2 = rhs(s + 0.5 * h * k1);
        let k3 = rhs(s + 0.5 * h * k2);
        let k4 = rhs(s + h * k3);
        s += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        s = s.max(0.0);
        t.push(k as f64 * h);
        out.push(s);
    }
    Ok(SSeries {
        t,
        s: out,
        max_inverse_residual: worst,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonPoint {
    pub n: usize,
    pub e: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `phi_c` after calibration.
    pub phi_c: f64,
    pub t_reiter: f64,
    pub calibration: String,
    pub points: Vec<ComparisonPoint>,
    pub violations: Vec<usize>,
    pub passed: bool,
}

/// Energy at `t` from the ledger by linear interpolation between rows.
pub fn energy_at(ledger: &EnergyLedger, t: f64) -> Option<f64> {
    let rows = &ledger.rows;
    let k = rows.partition_point(|r| r.t < t);
    if k < rows.len() && rows[k].t == t {
        return Some(rows[k].e);
    }
    if k == 0 || k == rows.len() {
        return None;
    }
    let (a, b) = (&rows[k - 1], &rows[k]);
    let w = (t - a.t) / (b.t - a.t);
    Some((1.0 - w) * a.e + w * b.e)
}

/// Tests `E(nT) <= S(n) (1 + tol)` for `S(0) = E(0)`, after choosing the
/// smallest `phi_c` with `S(1) >= E(T)` (bisection on `log phi_c`).
pub fn comparison_check(
    ledger: &EnergyLedger,
    template: &DecayModel,
    use_psi: bool,
    tol: f64,
) -> Result<ComparisonReport> {
    let t_reiter = template.t_reiter;
    let t_last = ledger.last().map_or(0.0, |r| r.t);
    let n_max = (t_last / t_reiter + 1e-9).floor() as usize;
    if n_max < 2 {
        return Err(Error::Fit(format!(
            "ledger covers {t_last}, need at least two reiteration periods of {t_reiter}"
        )));
    }
    let energies: Vec<f64> = (0..=n_max)
        .map(|n| energy_at(ledger, n as f64 * t_reiter).unwrap_or(0.0))
        .collect();
    let e0 = energies[0];
    let s_of = |phi_c: f64, horizon: f64| -> Result<SSeries> {
        let mut model = *template;
        let scale = phi_c / template.phi_c;
        model.phi_c = phi_c;
        model.psi_c1 = template.psi_c1 * scale;
        model.psi_c2 = template.psi_c2 * scale;
        // Keep at least 1000 RK4 steps per unit of the rescaled time.
        let steps = (1000.0 * horizon).ceil().max(1000.0) as usize;
        lt_ode_with_steps(&model, e0, horizon, steps, use_psi)
    };
    let (phi_c, calibration) = if !(e0 > 0.0) {
        (template.phi_c, "E(0) = 0; no calibration needed".to_string())
    } else {
        let target = energies[1];
        let s1 = |c: f64| -> Result<f64> { Ok(*s_of(c, 1.0)?.s.last().unwrap()) };
        let (mut lo, mut hi) = (1e-12f64.ln(), 1e12f64.ln());
        if s1(hi.exp())? < target {
            return Err(Error::Fit("cannot calibrate: E(T) exceeds S(1) for every phi_c".into()));
        }
        if s1(lo.exp())? >= target {
            hi = lo;
        } else {
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if s1(mid.exp())? >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
        }
        let c = hi.exp();
        (c, format!("phi_c = {c:.6e} is the smallest value with S(1) >= E(T) = {target:.6e}"))
    };
    let series = s_of(phi_c, n_max as f64)?;
    let mut points = Vec::new();
    let mut violations = Vec::new();
    for (n, &e) in energies.iter().enumerate() {
        let s = series.at(n as f64);
        if e > s * (1.0 + tol) + f64::MIN_POSITIVE {
            violations.push(n);
        }
        points.push(ComparisonPoint { n, e, s });
    }
    Ok(ComparisonReport {
        phi_c,
        t_reiter,
        calibration,
        passed: violations.is_empty(),
        points,
        violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bootstrap {
    /// Number of updates applied.
    pub iterations: usize,
    pub sigma_sequence: Vec<f64>,
}

/// Iterates `sigma <- (2 - r)/2 + sigma` from `sigma1` until the kernel's own
/// rate is reached, i.e. `sigma >= r - 1` up to `1e-12`.
pub fn optimal_rate_bootstrap(sigma1: f64, r: f64) -> Result<Bootstrap> {
    if !(r > 1.0 && r < 2.0) {
        return Err(Error::domain(format!("r must lie in (1, 2), got {r}")));
    }
    if !(sigma1 > 0.0 && sigma1 < 1.0) {
        return Err(Error::domain(format!("sigma1 must lie in (0, 1), got {sigma1}")));
    }
    if sigma1 == r - 1.0 {
        return Err(Error::domain("sigma1 must differ from r - 1"));
    }
    let step = (2.0 - r) / 2.0;
    let mut seq = vec![sigma1];
    let mut sigma = sigma1;
    while sigma < r - 1.0 - 1e-12 {
        sigma += step;
        seq.push(sigma);
    }
    Ok(Bootstrap {
        iterations: seq.len() - 1,
        sigma_sequence: seq,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ledger_from(f: impl Fn(f64) -> f64, t_end: f64, n: usize) -> EnergyLedger {
        let mut l = EnergyLedger::new();
        for k in 0..=n {
            let t = t_end * k as f64 / n as f64;
            l.push(EnergyRow {
                t,
                script_e: f(t),
                e: f(t),
                i: 0.0,
                d_cum: 0.0,
                damp_cum: 0.0,
                visc_cum: 0.0,
                grad_norm: 0.0,
                lp_pow: 0.0,
                nehari_gap: 0.0,
                identity_residual: 0.0,
            });
        }
        l
    }

    #[test]
    fn fits_synthetic_series() {
        let l = ledger_from(|t| (-2.0 * t).exp(), 10.0, 200);
        let f = fit_rate(&l, [0.0, 10.0], FitModel::Exponential).unwrap();
        assert!((f.rate - 2.0).abs() < 1e-10 && (f.goodness - 1.0).abs() < 1e-12);
        let l = ledger_from(|t| 1.0 / (1.0 + t), 10.0, 200);
        let f = fit_rate(&l, [0.0, 10.0], FitModel::Polynomial).unwrap();
        assert!((f.rate - 1.0).abs() < 1e-10 && (f.goodness - 1.0).abs() < 1e-12);
        let l = ledger_from(|_| 3.0, 10.0, 200);
        let f = fit_rate(&l, [0.0, 10.0], FitModel::Exponential).unwrap();
        assert!(f.rate.abs() < 1e-14);
        assert!(fit_rate(&l, [0.0, 0.2], FitModel::Exponential).is_err());
    }

    #[test]
    fn predictions() {
        let exp = DecayClass::Exponential;
        let poly = DecayClass::Polynomial { r: 1.5 };
        assert_eq!(predicted_rate(1.0, exp, None, false).unwrap(), RatePrediction::Exponential);
        assert_eq!(
            predicted_rate(3.0, exp, None, false).unwrap(),
            RatePrediction::Polynomial { exponent: 1.0 }
        );
        assert_eq!(
            predicted_rate(3.0, poly, None, true).unwrap(),
            RatePrediction::Polynomial { exponent: 2.0 }
        );
        assert_eq!(
            predicted_rate(1.0, poly, Some(0.25), false).unwrap(),
            RatePrediction::Polynomial { exponent: 0.5 }
        );
        assert!(predicted_rate(1.0, poly, Some(0.6), false).is_err());
        assert!(predicted_rate(1.0, poly, None, false).is_err());
    }

    #[test]
    fn linear_phi_closed_form() {
        // m = 1 makes Phi(s) = 2 phi_c s.
        let model = DecayModel::new(0.5, 1.0, 1.0).unwrap();
        let s = lt_ode_solve(&model, 2.0, 10.0, false).unwrap();
        for (t, v) in s.t.iter().zip(&s.s) {
            let exact = 2.0 * (-t / 2.0).exp();
            assert!((v - exact).abs() <= 1e-6 * exact);
        }
        assert!(s.max_inverse_residual <= 1e-13);
        let zero = lt_ode_solve(&model, 0.0, 10.0, false).unwrap();
        assert!(zero.s.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn nonlinear_phi_decays_polynomially() {
        let model = DecayModel::new(1.0, 3.0, 1.0).unwrap();
        let s = lt_ode_solve(&model, 1.0, 100.0, false).unwrap();
        let env: Vec<f64> = s.t.iter().zip(&s.s).map(|(t, v)| v * (1.0 + t)).collect();
        let max = env.iter().cloned().fold(0.0, f64::max);
        assert!(max < 10.0, "{max}");
        assert!(s.s.windows(2).all(|w| w[1] < w[0] && w[1] > 0.0));
    }

    #[test]
    fn bootstrap_counts() {
        let b = optimal_rate_bootstrap(0.2, 1.5).unwrap();
        assert_eq!(b.iterations, 2);
        assert!((b.sigma_sequence[1] - 0.45).abs() < 1e-15 && (b.sigma_sequence[2] - 0.7).abs() < 1e-15);
        assert_eq!(optimal_rate_bootstrap(0.05, 1.9).unwrap().iterations, 17);
        assert_eq!(optimal_rate_bootstrap(0.7, 1.5).unwrap().iterations, 0);
        assert!(optimal_rate_bootstrap(0.5, 1.5).is_err());
    }

    #[test]
    fn comparison_passes_on_its_own_solution() {
        let model = DecayModel::new(0.7, 3.0, 2.0).unwrap();
        let s = lt_ode_with_steps(&model, 1.5, 10.0, 10_000, false).unwrap();
        // E(nT) = S(n) with T = 2: sample S at t / T.
        let ledger = ledger_from(|t| s.at(t / 2.0), 20.0, 400);
        let report = comparison_check(&ledger, &model, false, 1e-6).unwrap();
        assert!(report.passed, "{report:?}");
        assert!((report.phi_c / 0.7 - 1.0).abs() < 1e-3, "{}", report.phi_c);
        let zero = ledger_from(|_| 0.0, 20.0, 400);
        assert!(comparison_check(&zero, &model, false, 0.0).unwrap().passed);
    }
}
