//! Energy functionals, the cumulative dissipation ledger and the checks run
//! against it.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, SpatialGrid};
use crate::history::{HistoryDatum, Weight};
use crate::integrator::{SimState, Trajectory};
use crate::kernel::RelaxationKernel;

/// Column names of the ledger CSV, in order.
pub const LEDGER_COLUMNS: [&str; 11] = [
    "t",
    "scriptE",
    "E",
    "I",
    "D_cum",
    "damp_cum",
    "visc_cum",
    "grad_norm",
    "lp_pow",
    "nehari_gap",
    "identity_residual",
];

/// One diagnostic row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRow {
    pub t: f64,
    #[serde(rename = "scriptE")]
    pub script_e: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "I")]
    pub i: f64,
    #[serde(rename = "D_cum")]
    pub d_cum: f64,
    pub damp_cum: f64,
    pub visc_cum: f64,
    pub grad_norm: f64,
    pub lp_pow: f64,
    pub nehari_gap: f64,
    pub identity_residual: f64,
}

impl EnergyRow {
    fn values(&self) -> [f64; 11] {
        [
            self.t,
            self.script_e,
            self.e,
            self.i,
            self.d_cum,
            self.damp_cum,
            self.visc_cum,
            self.grad_norm,
            self.lp_pow,
            self.nehari_gap,
            self.identity_residual,
        ]
    }

    fn from_values(v: &[f64]) -> Self {
        EnergyRow {
            t: v[0],
            script_e: v[1],
            e: v[2],
            i: v[3],
            d_cum: v[4],
            damp_cum: v[5],
            visc_cum: v[6],
            grad_norm: v[7],
            lp_pow: v[8],
            nehari_gap: v[9],
            identity_residual: v[10],
        }
    }
}

/// Diagnostic rows in time order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyLedger {
    pub rows: Vec<EnergyRow>,
}

impl EnergyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: EnergyRow) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn first(&self) -> Option<&EnergyRow> {
        self.rows.first()
    }

    pub fn last(&self) -> Option<&EnergyRow> {
        self.rows.last()
    }

    /// `E(0)`, or 0 for an empty ledger.
    pub fn e0(&self) -> f64 {
        self.rows.first().map_or(0.0, |r| r.e)
    }

    /// Writes the CSV with a header row; numbers keep all 17 significant
    /// digits so the file round-trips bit for bit.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(LEDGER_COLUMNS)?;
        for row in &self.rows {
            w.write_record(row.values().iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let index: Vec<usize> = LEDGER_COLUMNS
            .iter()
            .map(|c| {
                header
                    .iter()
                    .position(|h| h == c)
                    .ok_or_else(|| Error::domain(format!("ledger is missing column {c}")))
            })
            .collect::<Result<_>>()?;
        let mut rows = Vec::new();
        for (k, rec) in r.records().enumerate() {
            let rec = rec?;
            let mut vals = [0.0; 11];
            for (slot, &col) in vals.iter_mut().zip(&index) {
                let cell = rec.get(col).unwrap_or("");
                *slot = cell
                    .trim()
                    .parse()
                    .map_err(|_| Error::domain(format!("ledger row {}: bad number {cell:?}", k + 1)))?;
            }
            rows.push(EnergyRow::from_values(&vals));
        }
        Ok(EnergyLedger { rows })
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ascii"))
    }
}

/// `1/2 (||v||^2 + ||grad u||^2 + int ||grad w||^2 mu)`.
pub fn quadratic_energy(grid: &SpatialGrid, state: &SimState) -> Result<f64> {
    let mi = state.memory.memory_integral(&state.u, Weight::Mu)?;
    Ok(0.5 * (grid.l2_norm_sq(&state.v) + grid.h1_seminorm_sq(&state.u) + mi))
}

/// Quadratic energy minus the source potential `||u||_{p+1}^{p+1}/(p+1)`.
pub fn total_energy(grid: &SpatialGrid, state: &SimState, p: f64) -> Result<f64> {
    Ok(quadratic_energy(grid, state)? - grid.lp_norm_pow(&state.u, p + 1.0)? / (p + 1.0))
}

/// Dissipation over one step.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dissipation {
    pub damp: f64,
    pub visc: f64,
}

/// Instantaneous dissipation rates at one time level.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct Rates {
    /// `||u_t||_{m+1}^{m+1}`.
    pub damp: f64,
    /// `-1/2 int ||grad w||^2 mu'`.
    pub visc: f64,
}

impl Dissipation {
    pub(crate) fn trapezoid(dt: f64, a: Rates, b: Rates) -> Self {
        Dissipation {
            damp: 0.5 * dt * (a.damp + b.damp),
            visc: 0.5 * dt * (a.visc + b.visc),
        }
    }
}

pub(crate) fn rates(grid: &SpatialGrid, v: &Field, integral_mu_prime: f64, m: f64) -> Rates {
    Rates {
        damp: grid.lp_pow(v, m + 1.0),
        visc: (-0.5 * integral_mu_prime).max(0.0),
    }
}

/// Trapezoid-in-time dissipation between two consecutive states.
pub fn dissipation_increment(
    grid: &SpatialGrid,
    before: &SimState,
    after: &SimState,
    m: f64,
) -> Result<Dissipation> {
    let dt = after.t - before.t;
    if !(dt >= 0.0) {
        return Err(Error::domain("states are not in time order"));
    }
    let rb = rates(grid, &before.v, before.memory.memory_integral(&before.u, Weight::MuPrime)?, m);
    let ra = rates(grid, &after.v, after.memory.memory_integral(&after.u, Weight::MuPrime)?, m);
    Ok(Dissipation::trapezoid(dt, rb, ra))
}

/// `|E + D_cum - E(0)|`.
pub fn identity_residual(row: &EnergyRow, e0: f64) -> f64 {
    (row.e + row.d_cum - e0).abs()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub row: usize,
    pub t: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: &'static str,
    pub rows_checked: usize,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `E(t_{j+1}) <= E(t_j) + tol_step` with
/// `tol_step = 1e-8 max(1, E(0)) + identity_residual(t_{j+1})`.
pub fn monotonicity_check(ledger: &EnergyLedger) -> CheckReport {
    let base = 1e-8 * ledger.e0().max(1.0);
    let mut violations = Vec::new();
    for (j, w) in ledger.rows.windows(2).enumerate() {
        let tol = base + w[1].identity_residual;
        if w[1].e > w[0].e + tol {
            violations.push(Violation {
                row: j + 1,
                t: w[1].t,
                detail: format!("E rose from {:e} to {:e} (tolerance {tol:e})", w[0].e, w[1].e),
            });
        }
    }
    CheckReport {
        name: "monotone energy",
        rows_checked: ledger.len(),
        violations,
    }
}

/// `0 <= (p-1)/(p+1) scriptE <= E <= scriptE` at every row, each side with
/// tolerance `1e-8 max(1, scriptE(0))`.
pub fn sandwich_check(ledger: &EnergyLedger, p: f64) -> CheckReport {
    let tol = 1e-8 * ledger.first().map_or(1.0, |r| r.script_e.max(1.0));
    let k = (p - 1.0) / (p + 1.0);
    let mut violations = Vec::new();
    for (j, r) in ledger.rows.iter().enumerate() {
        let lower = k * r.script_e;
        let detail = if lower < -tol {
            Some(format!("scriptE = {:e} is negative", r.script_e))
        } else if r.e < lower - tol {
            Some(format!("E = {:e} below (p-1)/(p+1) scriptE = {lower:e}", r.e))
        } else if r.e > r.script_e + tol {
            Some(format!("E = {:e} above scriptE = {:e}", r.e, r.script_e))
        } else {
            None
        };
        if let Some(detail) = detail {
            violations.push(Violation { row: j, t: r.t, detail });
        }
    }
    CheckReport {
        name: "energy sandwich",
        rows_checked: ledger.len(),
        violations,
    }
}

/// Nehari gap strictly positive at every row.
pub fn nehari_check(ledger: &EnergyLedger) -> CheckReport {
    let violations = ledger
        .rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !(r.nehari_gap > 0.0) && !(r.grad_norm == 0.0))
        .map(|(j, r)| Violation {
            row: j,
            t: r.t,
            detail: format!("Nehari gap {:e} is not positive", r.nehari_gap),
        })
        .collect();
    CheckReport {
        name: "well invariance",
        rows_checked: ledger.len(),
        violations,
    }
}

/// Temporal factor of a separable test function `phi(x) theta(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestProfile {
    Constant,
    /// `cos(omega t)`.
    Cosine { omega: f64 },
    /// `t`.
    Linear,
}

impl TestProfile {
    fn value(&self, t: f64) -> f64 {
        match *self {
            TestProfile::Constant => 1.0,
            TestProfile::Cosine { omega } => (omega * t).cos(),
            TestProfile::Linear => t,
        }
    }

    fn derivative(&self, t: f64) -> f64 {
        match *self {
            TestProfile::Constant => 0.0,
            TestProfile::Cosine { omega } => -omega * (omega * t).sin(),
            TestProfile::Linear => 1.0,
        }
    }
}

/// Physical parameters needed to evaluate the weak form.
#[derive(Debug, Clone, Copy)]
pub struct WeakFormParams {
    pub m: f64,
    pub p: f64,
    pub damping: bool,
    pub source: bool,
}

/// Left minus right side of the variational identity at the final stored
/// time, with every time integral (including the memory convolution over the
/// stored trajectory and the history) done by the trapezoid rule on the
/// stored rows.
pub fn variational_residual(
    grid: &SpatialGrid,
    kernel: &RelaxationKernel,
    history: &HistoryDatum,
    trajectory: &Trajectory,
    params: WeakFormParams,
    phi: &Field,
    profile: TestProfile,
) -> Result<f64> {
    grid.check(phi)?;
    let times = &trajectory.times;
    let n = times.len();
    if n == 0 {
        return Ok(0.0);
    }
    let k0 = kernel.k0();
    let lap_phi = grid.laplacian(phi)?;
    // Scalars per stored row; a(u, phi) = -(u, lap phi).
    let a_u: Vec<f64> = trajectory.u.iter().map(|u| -grid.inner_product(u, &lap_phi)).collect();
    let vphi: Vec<f64> = trajectory.v.iter().map(|v| grid.inner_product(v, phi)).collect();
    let damp: Vec<f64> = trajectory
        .v
        .iter()
        .map(|v| {
            if !params.damping {
                return 0.0;
            }
            let d: Vec<f64> = v.iter().map(|&x| x.abs().powf(params.m - 1.0) * x).collect();
            grid.inner_product(&d, phi)
        })
        .collect();
    let src: Vec<f64> = trajectory
        .u
        .iter()
        .map(|u| {
            if !params.source {
                return 0.0;
            }
            let s: Vec<f64> = u.iter().map(|&x| x.abs().powf(params.p - 1.0) * x).collect();
            grid.inner_product(&s, phi)
        })
        .collect();
    let hist_a: Vec<f64> = history
        .samples()
        .iter()
        .map(|u| -grid.inner_product(u, &lap_phi))
        .collect();
    let hist_tail = match history.extension() {
        crate::history::Extension::Zero => 0.0,
        crate::history::Extension::Frozen => *hist_a.last().unwrap(),
    };
    let spacing = history.spacing();
    let depth = history.support();

    // int_0^inf mu(s) a(u(t_i - s), phi) ds over stored rows, history, tail.
    let memory: Vec<f64> = (0..n)
        .map(|i| {
            let ti = times[i];
            let mut acc = 0.0;
            for j in (1..=i).rev() {
                let (s0, s1) = (ti - times[j], ti - times[j - 1]);
                acc += 0.5
                    * (s1 - s0)
                    * (kernel.mu_at(s0) * a_u[j] + kernel.mu_at(s1) * a_u[j - 1]);
            }
            for j in 1..hist_a.len() {
                let (s0, s1) = (ti + (j - 1) as f64 * spacing, ti + j as f64 * spacing);
                acc += 0.5 * (s1 - s0) * (kernel.mu_at(s0) * hist_a[j - 1] + kernel.mu_at(s1) * hist_a[j]);
            }
            acc + kernel.tail(ti + depth) * hist_tail
        })
        .collect();

    let integrand = |i: usize| -> f64 {
        let t = times[i];
        let th = profile.value(t);
        -vphi[i] * profile.derivative(t) + (k0 * a_u[i] - memory[i] + damp[i] - src[i]) * th
    };
    let mut integral = 0.0;
    for i in 1..n {
        integral += 0.5 * (times[i] - times[i - 1]) * (integrand(i) + integrand(i - 1));
    }
    let last = n - 1;
    let lhs = vphi[last] * profile.value(times[last]) - vphi[0] * profile.value(times[0]) + integral;
    Ok(lhs.abs())
}
