//! Blow-up hypotheses and the operational blow-up detector.
//!
//! A run is flagged when `||grad u||` passed `1e3 ||grad u(0)|| + 1` while
//! the step controller sat at its smallest step. The blow-up time is then
//! estimated by extrapolating `1 / ||grad u||` linearly to zero over the
//! final doubling of the gradient.

use serde::{Deserialize, Serialize};

use crate::energetics::{EnergyLedger, EnergyRow};
use crate::history::WellClass;
use crate::integrator::ControllerLog;
use crate::wellconst::WellConstants;

/// Which blow-up theorem, if any, applies to the initial data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    NegativeEnergy,
    PositiveEnergyWindow,
    W2Well,
    None,
}

/// Decides the hypothesis from the first ledger row.
///
/// `NegativeEnergy`: `E(0) < 0` and `p > max(m, sqrt(k0))`.
/// `PositiveEnergyWindow`: `0 <= E(0) < M`, `scriptE(0) > y0` and the same
/// exponent condition. `W2Well`: the history is in `W2` with `0 <= E(0) < M`.
pub fn check_hypotheses(
    m: f64,
    constants: &WellConstants,
    row0: &EnergyRow,
    class_at_0: WellClass,
) -> Hypothesis {
    let p = constants.p;
    let exponents = p > m.max(constants.k0.sqrt());
    let e0 = row0.e;
    let below_m = constants.m.is_some_and(|mm| e0 >= 0.0 && e0 < mm);
    if e0 < 0.0 && exponents {
        Hypothesis::NegativeEnergy
    } else if below_m && exponents && row0.script_e > constants.y0 {
        Hypothesis::PositiveEnergyWindow
    } else if below_m && class_at_0 == WellClass::W2 {
        Hypothesis::W2Well
    } else {
        Hypothesis::None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupVerdict {
    pub fired: bool,
    pub t_estimate: Option<f64>,
    pub peak_grad: f64,
    pub threshold: f64,
    pub hypothesis: Hypothesis,
}

/// Threshold the gradient must cross: `1e3 ||grad u(0)|| + 1`.
pub fn grad_threshold(grad0: f64) -> f64 {
    1e3 * grad0 + 1.0
}

/// Applies the detector to a finished (or aborted) run.
pub fn detect(ledger: &EnergyLedger, controller: &ControllerLog, hypothesis: Hypothesis) -> BlowupVerdict {
    let grad0 = ledger.first().map_or(0.0, |r| r.grad_norm);
    let threshold = grad_threshold(grad0);
    let peak_grad = ledger
        .rows
        .iter()
        .map(|r| r.grad_norm)
        .fold(controller.peak_grad, f64::max);
    let fired = controller.exhausted && peak_grad >= threshold;
    BlowupVerdict {
        fired,
        t_estimate: if fired { reciprocal_extrapolation(ledger) } else { None },
        peak_grad,
        threshold,
        hypothesis,
    }
}

/// Zero of the least-squares line through `(t, 1/||grad u||)` over the rows
/// since the gradient was half its final value.
pub fn reciprocal_extrapolation(ledger: &EnergyLedger) -> Option<f64> {
    let last = ledger.last()?;
    let half = 0.5 * last.grad_norm;
    let start = ledger.rows.iter().rposition(|r| r.grad_norm < half).map_or(0, |k| k + 1);
    let pts: Vec<(f64, f64)> = ledger.rows[start..]
        .iter()
        .filter(|r| r.grad_norm > 0.0 && r.grad_norm.is_finite())
        .map(|r| (r.t, 1.0 / r.grad_norm))
        .collect();
    if pts.len() < 2 {
        return Some(last.t);
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) || !(sxy < 0.0) {
        return Some(last.t);
    }
    let slope = sxy / sxx;
    Some((mx - my / slope).max(last.t))
}
