//! History data on `t <= 0`, the running memory of past states, and the
//! potential-well functionals evaluated on a history.
//!
//! The memory integral over `s in (0, inf)` is split into a trapezoid sum
//! over the stored past states and a closed-form tail beyond the oldest one.
//! Beyond the oldest stored state the past is either zero (compactly
//! supported history) or frozen at a fixed field, and in both cases the
//! tail integral is exact.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, SpatialGrid};
use crate::kernel::RelaxationKernel;
use crate::wellconst::WellConstants;

/// What the past looks like beyond the last stored sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Extension {
    /// `u0(t) = 0` before the support.
    #[default]
    Zero,
    /// `u0(t) = u0(-T)` for all earlier times.
    Frozen,
}

/// Temporal profile of an analytic history template.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case", deny_unknown_fields)]
pub enum TemporalProfile {
    /// `u0(t) = U` for every `t <= 0`.
    Constant,
    /// `u0(0) = U`, `u0(t) = 0` for `t < 0`.
    Step,
    /// `cos^2(pi t / (2 T0)) U` on `[-T0, 0]`, zero before.
    Bump { support: f64 },
    /// `exp(rate t) U` on `[-T0, 0]`, zero before.
    ExpRamp { rate: f64, support: f64 },
}

/// Analytic history: amplitude times a product of sine modes times a
/// temporal profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryTemplate {
    pub amplitude: f64,
    pub modes: Vec<usize>,
    pub profile: TemporalProfile,
}

impl HistoryTemplate {
    pub fn new(amplitude: f64, modes: Vec<usize>, profile: TemporalProfile) -> Self {
        HistoryTemplate {
            amplitude,
            modes,
            profile,
        }
    }

    /// Samples the template at `t = 0, -spacing, -2 spacing, ...`.
    pub fn sample(&self, grid: &SpatialGrid, spacing: f64) -> Result<HistoryDatum> {
        if !(spacing > 0.0) {
            return Err(Error::domain("history sample spacing must be positive"));
        }
        let shape = grid.sine_mode(&self.modes).scaled(self.amplitude);
        let (temporal, count, extension): (Box<dyn Fn(f64) -> f64>, usize, Extension) = match self.profile {
            TemporalProfile::Constant => (Box::new(|_| 1.0), 1, Extension::Frozen),
            TemporalProfile::Step => (Box::new(|_| 1.0), 1, Extension::Zero),
            TemporalProfile::Bump { support } => {
                check_support(support)?;
                let f = move |t: f64| {
                    if t <= -support {
                        0.0
                    } else {
                        (std::f64::consts::PI * t / (2.0 * support)).cos().powi(2)
                    }
                };
                (Box::new(f), samples_for(support, spacing), Extension::Zero)
            }
            TemporalProfile::ExpRamp { rate, support } => {
                check_support(support)?;
                (
                    Box::new(move |t: f64| (rate * t).exp()),
                    samples_for(support, spacing),
                    Extension::Zero,
                )
            }
        };
        let samples = (0..count)
            .map(|j| shape.scaled(temporal(-(j as f64) * spacing)))
            .collect();
        let velocity_at_0 = match self.profile {
            TemporalProfile::ExpRamp { rate, .. } => shape.scaled(rate),
            _ => grid.zeros(),
        };
        HistoryDatum::new(grid, spacing, samples, extension, velocity_at_0)
    }
}

fn check_support(support: f64) -> Result<()> {
    if support > 0.0 && support.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("history support must be positive, got {support}")))
    }
}

fn samples_for(support: f64, spacing: f64) -> usize {
    // Include the sample at (or just past) -support.
    (support / spacing - 1e-9).ceil() as usize + 1
}

/// A sampled history `u0` on `t <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryDatum {
    spacing: f64,
    /// `samples[j] = u0(-j * spacing)`.
    samples: Vec<Field>,
    extension: Extension,
    velocity_at_0: Field,
}

impl HistoryDatum {
    pub fn new(
        grid: &SpatialGrid,
        spacing: f64,
        samples: Vec<Field>,
        extension: Extension,
        velocity_at_0: Field,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::domain("history needs at least the t = 0 sample"));
        }
        for s in &samples {
            grid.check(s)?;
            if s.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain("history sample is not finite"));
            }
        }
        grid.check(&velocity_at_0)?;
        Ok(HistoryDatum {
            spacing,
            samples,
            extension,
            velocity_at_0,
        })
    }

    /// History that equals `u` for all `t <= 0`.
    pub fn constant(grid: &SpatialGrid, u: Field) -> Result<Self> {
        let v = grid.zeros();
        Self::new(grid, 1.0, vec![u], Extension::Frozen, v)
    }

    /// `u0(0) = u` and zero before.
    pub fn step(grid: &SpatialGrid, u: Field) -> Result<Self> {
        let v = grid.zeros();
        Self::new(grid, 1.0, vec![u], Extension::Zero, v)
    }

    pub fn zero(grid: &SpatialGrid) -> Self {
        HistoryDatum {
            spacing: 1.0,
            samples: vec![grid.zeros()],
            extension: Extension::Zero,
            velocity_at_0: grid.zeros(),
        }
    }

    /// Reads a CSV table with rows `t, v_1, ..., v_N` (`t <= 0`, one row at
    /// `t = 0`) and resamples it linearly onto a uniform spacing.
    pub fn from_table(
        grid: &SpatialGrid,
        path: &Path,
        spacing: f64,
        extension: Extension,
    ) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut rows: Vec<(f64, Vec<f64>)> = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record?;
            let values: std::result::Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
            let values = match values {
                Ok(v) => v,
                // A header row is allowed.
                Err(_) if line == 0 => continue,
                Err(e) => return Err(Error::domain(format!("history table row {}: {e}", line + 1))),
            };
            if values.len() != grid.len() + 1 {
                return Err(Error::domain(format!(
                    "history table row {} has {} node values, grid has {}",
                    line + 1,
                    values.len().saturating_sub(1),
                    grid.len()
                )));
            }
            if values[0] > 0.0 {
                return Err(Error::domain(format!("history table time {} is positive", values[0])));
            }
            rows.push((values[0], values[1..].to_vec()));
        }
        Self::from_rows(grid, rows, spacing, extension)
    }

    pub(crate) fn from_rows(
        grid: &SpatialGrid,
        mut rows: Vec<(f64, Vec<f64>)>,
        spacing: f64,
        extension: Extension,
    ) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("history table is empty"));
        }
        rows.sort_by(|a, b| b.0.total_cmp(&a.0));
        if rows[0].0 != 0.0 {
            return Err(Error::domain("history table must contain a row at t = 0"));
        }
        let depth = -rows.last().map(|r| r.0).unwrap_or(0.0);
        let count = if depth > 0.0 { samples_for(depth, spacing) } else { 1 };
        let value_at = |t: f64| -> Vec<f64> {
            if t <= rows.last().unwrap().0 {
                return rows.last().unwrap().1.clone();
            }
            let k = rows.iter().position(|r| r.0 <= t).unwrap_or(rows.len() - 1);
            if rows[k].0 == t || k == 0 {
                return rows[k].1.clone();
            }
            let (t1, a) = (&rows[k - 1].0, &rows[k - 1].1);
            let (t0, b) = (&rows[k].0, &rows[k].1);
            let w = (t - t0) / (t1 - t0);
            a.iter().zip(b).map(|(x, y)| w * x + (1.0 - w) * y).collect()
        };
        let samples: Vec<Field> = (0..count)
            .map(|j| Field(value_at(-(j as f64) * spacing)))
            .collect();
        let velocity_at_0 = if rows.len() > 1 {
            let dt = rows[0].0 - rows[1].0;
            Field(rows[0].1.iter().zip(&rows[1].1).map(|(a, b)| (a - b) / dt).collect())
        } else {
            grid.zeros()
        };
        Self::new(grid, spacing, samples, extension, velocity_at_0)
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn samples(&self) -> &[Field] {
        &self.samples
    }

    pub fn extension(&self) -> Extension {
        self.extension
    }

    /// `u0(0)`.
    pub fn at_zero(&self) -> &Field {
        &self.samples[0]
    }

    pub fn velocity_at_0(&self) -> &Field {
        &self.velocity_at_0
    }

    /// Length of the sampled window; the datum vanishes before `-support`
    /// when the extension is [`Extension::Zero`].
    pub fn support(&self) -> f64 {
        (self.samples.len() - 1) as f64 * self.spacing
    }

    /// `sup_t ||grad u0(t)||_2` over the samples (and the frozen extension).
    pub fn m0(&self, grid: &SpatialGrid) -> f64 {
        self.samples
            .iter()
            .map(|s| grid.h1_seminorm_sq(s).sqrt())
            .fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(Field::is_zero)
    }

    /// The same history multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> HistoryDatum {
        HistoryDatum {
            spacing: self.spacing,
            samples: self.samples.iter().map(|s| s.scaled(alpha)).collect(),
            extension: self.extension,
            velocity_at_0: self.velocity_at_0.scaled(alpha),
        }
    }
}

/// Weight function for [`MemoryState::memory_integral`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    Mu,
    MuPrime,
}

#[derive(Debug, Clone)]
struct Entry {
    t: f64,
    field: Field,
    h1: f64,
    /// Trapezoid weight once both neighbours exist.
    interior_weight: f64,
}

/// Interior sums `sum w_j mu(t_ref - t_j) (p_j, h1(p_j), 1)` for kernels
/// with `mu(s + d) = exp(-c d) mu(s)`.
#[derive(Debug, Clone)]
struct ExpAccumulator {
    rate: f64,
    t_ref: f64,
    field: Vec<f64>,
    h1: f64,
    mass: f64,
}

/// Past states `u(t - s)` on the stored nodes, plus the closed-form tail.
///
/// Entries are stored newest first. The current state is always node
/// `s = 0`; stored entries sit at `s_j = t - t_j`.
#[derive(Debug, Clone)]
pub struct MemoryState {
    grid: SpatialGrid,
    kernel: RelaxationKernel,
    now: f64,
    stride: f64,
    s_cap: f64,
    entries: VecDeque<Entry>,
    extension: Option<Field>,
    extension_h1: f64,
    truncated: bool,
    accel: Option<ExpAccumulator>,
}

/// Everything the integrator needs from the memory at one instant.
#[derive(Debug, Clone)]
pub struct MemoryEval {
    /// `int_0^inf mu(s) lap w(t, s) ds`, the memory part of the elastic
    /// force written as the gradient of the discrete memory energy.
    pub relaxation: Field,
    /// `int_0^inf ||grad w(t, s)||^2 mu(s) ds`.
    pub integral_mu: f64,
    /// `int_0^inf ||grad w(t, s)||^2 mu'(s) ds` (non-positive).
    pub integral_mu_prime: f64,
    /// Tail contribution beyond the truncation depth (0 if not truncated).
    pub truncation_tail: f64,
}

struct Sums {
    field: Vec<f64>,
    h1: f64,
    mass: f64,
}

impl MemoryState {
    /// Loads the history at `t = 0`. Later states are pushed every
    /// `stride` time units; entries older than `s_cap` are dropped.
    pub fn new(
        grid: &SpatialGrid,
        kernel: &RelaxationKernel,
        history: &HistoryDatum,
        stride: f64,
        s_cap: f64,
    ) -> Result<Self> {
        if !(stride > 0.0) {
            return Err(Error::domain("memory stride must be positive"));
        }
        if !(s_cap > 0.0) {
            return Err(Error::domain("memory truncation depth must be positive"));
        }
        let mut entries: VecDeque<Entry> = history
            .samples
            .iter()
            .enumerate()
            .map(|(j, f)| Entry {
                t: -(j as f64) * history.spacing,
                h1: grid.h1_seminorm_sq(f),
                field: f.clone(),
                interior_weight: 0.0,
            })
            .collect();
        for j in 1..entries.len().saturating_sub(1) {
            entries[j].interior_weight = 0.5 * (entries[j - 1].t - entries[j + 1].t);
        }
        let extension = match history.extension {
            Extension::Zero => None,
            Extension::Frozen => Some(history.samples.last().unwrap().clone()),
        };
        let extension_h1 = extension.as_ref().map_or(0.0, |f| grid.h1_seminorm_sq(f));
        let mut state = MemoryState {
            grid: grid.clone(),
            kernel: *kernel,
            now: 0.0,
            stride,
            s_cap,
            entries,
            extension,
            extension_h1,
            truncated: false,
            accel: None,
        };
        if let Some(rate) = kernel.exponential_rate() {
            let mut acc = ExpAccumulator {
                rate,
                t_ref: 0.0,
                field: vec![0.0; grid.len()],
                h1: 0.0,
                mass: 0.0,
            };
            let n = state.entries.len();
            for e in state.entries.iter().take(n.saturating_sub(1)).skip(1) {
                let w = e.interior_weight * kernel.mu_at(-e.t);
                axpy(w, &e.field, &mut acc.field);
                acc.h1 += w * e.h1;
                acc.mass += w;
            }
            state.accel = Some(acc);
        }
        state.enforce_cap();
        Ok(state)
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Depth `t - t_oldest` covered by stored entries.
    pub fn s_active(&self) -> f64 {
        self.now - self.entries.back().map_or(self.now, |e| e.t)
    }

    pub fn s_cap(&self) -> f64 {
        self.s_cap
    }

    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    /// Stored nodes as `(s, field)`, newest first.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, &Field)> {
        self.entries.iter().map(move |e| (self.now - e.t, &e.field))
    }

    /// Moves the clock to `t` where the solution equals `u`, storing `u`
    /// when at least one stride has elapsed since the last stored entry.
    pub fn advance(&mut self, t: f64, u: &Field) -> Result<()> {
        self.grid.check(u)?;
        if !(t >= self.now) {
            return Err(Error::BufferUnderflow(format!(
                "cannot move memory clock backwards from {} to {t}",
                self.now
            )));
        }
        self.now = t;
        let newest = self.entries.front().map(|e| e.t).unwrap_or(f64::NEG_INFINITY);
        if t - newest >= self.stride * (1.0 - 1e-9) {
            self.push(t, u.clone());
        }
        self.enforce_cap();
        Ok(())
    }

    fn push(&mut self, t: f64, field: Field) {
        let h1 = self.grid.h1_seminorm_sq(&field);
        if self.entries.len() >= 2 {
            let older = self.entries[1].t;
            let w = 0.5 * (t - older);
            self.entries[0].interior_weight = w;
            if let Some(acc) = self.accel.as_mut() {
                let decay = (-acc.rate * (t - acc.t_ref)).exp();
                acc.field.iter_mut().for_each(|v| *v *= decay);
                acc.h1 *= decay;
                acc.mass *= decay;
                acc.t_ref = t;
                let e = &self.entries[0];
                let wm = w * self.kernel.mu_at(t - e.t);
                axpy(wm, &e.field, &mut acc.field);
                acc.h1 += wm * e.h1;
                acc.mass += wm;
            }
        }
        self.entries.push_front(Entry {
            t,
            field,
            h1,
            interior_weight: 0.0,
        });
    }

    fn enforce_cap(&mut self) {
        while self.entries.len() >= 3 && self.now - self.entries[self.entries.len() - 2].t >= self.s_cap {
            let dropped = self.entries.pop_back().unwrap();
            let n = self.entries.len();
            // The new oldest entry is no longer interior.
            if let Some(acc) = self.accel.as_mut() {
                let e = &self.entries[n - 1];
                let wm = e.interior_weight * self.kernel.mu_at(acc.t_ref - e.t);
                axpy(-wm, &e.field, &mut acc.field);
                acc.h1 -= wm * e.h1;
                acc.mass -= wm;
            }
            self.entries[n - 1].interior_weight = 0.0;
            self.extension_h1 = dropped.h1;
            self.extension = Some(dropped.field);
            self.truncated = true;
        }
    }

    fn weight_at(&self, weight: Weight, s: f64) -> f64 {
        match weight {
            Weight::Mu => self.kernel.mu_at(s),
            Weight::MuPrime => self.kernel.mu_prime_at(s),
        }
    }

    /// Trapezoid sums over all nodes except `u_now` itself.
    fn sums(&self, weight: Weight) -> Sums {
        let n = self.entries.len();
        let mut out = Sums {
            field: vec![0.0; self.grid.len()],
            h1: 0.0,
            mass: 0.0,
        };
        if n == 0 {
            return out;
        }
        match &self.accel {
            Some(acc) => {
                let scale = (-acc.rate * (self.now - acc.t_ref)).exp()
                    * match weight {
                        Weight::Mu => 1.0,
                        Weight::MuPrime => -acc.rate,
                    };
                if scale != 0.0 {
                    out.field.iter_mut().zip(&acc.field).for_each(|(o, a)| *o = scale * a);
                }
                out.h1 = scale * acc.h1;
                out.mass = scale * acc.mass;
            }
            None => {
                for e in self.entries.iter().take(n.saturating_sub(1)).skip(1) {
                    let w = e.interior_weight * self.weight_at(weight, self.now - e.t);
                    axpy(w, &e.field, &mut out.field);
                    out.h1 += w * e.h1;
                    out.mass += w;
                }
            }
        }
        // Endpoint nodes.
        let delta = self.now - self.entries[0].t;
        let mut add = |w: f64, e: &Entry| {
            axpy(w, &e.field, &mut out.field);
            out.h1 += w * e.h1;
            out.mass += w;
        };
        let newest = &self.entries[0];
        let w_newest = if n >= 2 {
            0.5 * delta + 0.5 * (newest.t - self.entries[1].t)
        } else {
            0.5 * delta
        };
        add(w_newest * self.weight_at(weight, delta), newest);
        if n >= 2 {
            let oldest = &self.entries[n - 1];
            let w_oldest = 0.5 * (self.entries[n - 2].t - oldest.t);
            add(w_oldest * self.weight_at(weight, self.now - oldest.t), oldest);
        }
        out
    }

    fn node0_weight(&self, weight: Weight) -> f64 {
        let delta = self.now - self.entries.front().map_or(self.now, |e| e.t);
        0.5 * delta * self.weight_at(weight, 0.0)
    }

    // The node at s = 0 is u_now itself and contributes nothing.
    fn integral_from(&self, sums: &Sums, u_now: &[f64], weight: Weight) -> (f64, f64) {
        let h1u = self.grid.h1_seminorm_sq(u_now);
        let body = sums.mass * h1u - 2.0 * self.grid.dirichlet_form(u_now, &sums.field) + sums.h1;
        let s_a = self.s_active();
        let ext_dist = match &self.extension {
            None => h1u,
            Some(x) => {
                h1u - 2.0 * self.grid.dirichlet_form(u_now, x) + self.extension_h1
            }
        }
        .max(0.0);
        let tail = match weight {
            Weight::Mu => ext_dist * self.kernel.tail(s_a),
            Weight::MuPrime => -ext_dist * self.kernel.mu_at(s_a),
        };
        let body = match weight {
            Weight::Mu => body.max(0.0),
            Weight::MuPrime => body.min(0.0),
        };
        (body + tail, if self.truncated { tail } else { 0.0 })
    }

    /// `int_0^inf ||grad(u_now - u(t - s))||^2 weight(s) ds`.
    pub fn memory_integral(&self, u_now: &Field, weight: Weight) -> Result<f64> {
        self.ready(u_now)?;
        let sums = self.sums(weight);
        Ok(self.integral_from(&sums, u_now, weight).0)
    }

    /// `int_0^inf mu(s) lap u(t - s) ds`.
    pub fn memory_force(&self, u_now: &Field) -> Result<Field> {
        self.ready(u_now)?;
        let sums = self.sums(Weight::Mu);
        Ok(self.force_from(sums.field, self.node0_weight(Weight::Mu), u_now))
    }

    fn force_from(&self, mut acc: Vec<f64>, node0: f64, u_now: &[f64]) -> Field {
        axpy(node0, u_now, &mut acc);
        if let Some(x) = &self.extension {
            axpy(self.kernel.tail(self.s_active()), x, &mut acc);
        }
        let mut out = self.grid.zeros();
        self.grid.laplacian_into(&acc, &mut out);
        out
    }

    /// `int_0^inf mu(s) lap w(t, s) ds`. Equal to `(k0 - 1) lap u - F` for
    /// the exact kernel mass; here the discrete weights are used throughout so
    /// the force is exactly minus the gradient of the discrete memory energy.
    pub fn relaxation_force(&self, u_now: &Field) -> Result<Field> {
        self.ready(u_now)?;
        Ok(self.relaxation_from(self.sums(Weight::Mu), u_now))
    }

    fn relaxation_from(&self, sums: Sums, u_now: &[f64]) -> Field {
        let tail = self.kernel.tail(self.s_active());
        let mut acc: Vec<f64> = sums.field;
        let total = sums.mass + tail;
        acc.iter_mut().zip(u_now).for_each(|(a, u)| *a = total * u - *a);
        if let Some(x) = &self.extension {
            axpy(-tail, x, &mut acc);
        }
        let mut out = self.grid.zeros();
        self.grid.laplacian_into(&acc, &mut out);
        out
    }

    /// Relaxation force and both memory integrals in one pass over the buffer.
    pub fn evaluate(&self, u_now: &Field) -> Result<MemoryEval> {
        self.ready(u_now)?;
        let mu = self.sums(Weight::Mu);
        let (integral_mu, truncation_tail) = self.integral_from(&mu, u_now, Weight::Mu);
        let dmu = self.sums(Weight::MuPrime);
        let (integral_mu_prime, _) = self.integral_from(&dmu, u_now, Weight::MuPrime);
        let relaxation = self.relaxation_from(mu, u_now);
        Ok(MemoryEval {
            relaxation,
            integral_mu,
            integral_mu_prime,
            truncation_tail,
        })
    }

    /// Literal node-by-node evaluation of the memory integral, kept as a
    /// cross-check for the accumulated sums.
    pub fn memory_integral_reference(&self, u_now: &Field, weight: Weight) -> Result<f64> {
        self.ready(u_now)?;
        let n = self.entries.len();
        let delta = self.now - self.entries[0].t;
        let mut s_prev = 0.0;
        let mut total = 0.0;
        let mut prev_val = 0.0;
        for (j, e) in self.entries.iter().enumerate() {
            let s = self.now - e.t;
            let val = self.grid.h1_distance_sq(u_now, &e.field) * self.weight_at(weight, s);
            if j == 0 {
                total += 0.5 * delta * (prev_val + val);
            } else {
                total += 0.5 * (s - s_prev) * (prev_val + val);
            }
            s_prev = s;
            prev_val = val;
        }
        debug_assert!(n > 0);
        let s_a = self.s_active();
        let dist = match &self.extension {
            None => self.grid.h1_seminorm_sq(u_now),
            Some(x) => self.grid.h1_distance_sq(u_now, x),
        };
        let tail = match weight {
            Weight::Mu => dist * self.kernel.tail(s_a),
            Weight::MuPrime => -dist * self.kernel.mu_at(s_a),
        };
        Ok(total + tail)
    }

    fn ready(&self, u_now: &Field) -> Result<()> {
        self.grid.check(u_now)?;
        if self.entries.is_empty() {
            return Err(Error::BufferUnderflow("memory has no stored states".into()));
        }
        Ok(())
    }
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    if a == 0.0 {
        return;
    }
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Potential-well class of a history.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WellClass {
    W1,
    W2,
    OnM,
    OutsideWell,
}

/// Quadratic and power parts of the well functionals for one history.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellParts {
    /// `||grad v(0)||^2 + int ||grad v(0) - grad v(-s)||^2 mu ds`.
    pub quadratic: f64,
    /// `||v(0)||_{p+1}^{p+1}`.
    pub power: f64,
    pub p: f64,
}

impl WellParts {
    pub fn functional_i(&self) -> f64 {
        0.5 * self.quadratic - self.power / (self.p + 1.0)
    }

    pub fn nehari_gap(&self) -> f64 {
        self.quadratic - self.power
    }

    /// Sign of the Nehari gap with the `1e-8` relative tolerance for `OnM`.
    /// Returns `None` on the zero history.
    pub fn nehari_side(&self) -> Option<std::cmp::Ordering> {
        if self.quadratic == 0.0 && self.power == 0.0 {
            return None;
        }
        let gap = self.nehari_gap();
        Some(if gap.abs() <= 1e-8 * self.quadratic {
            std::cmp::Ordering::Equal
        } else if gap > 0.0 {
            std::cmp::Ordering::Greater
        } else {
            std::cmp::Ordering::Less
        })
    }

    pub fn classify(&self, d: f64) -> WellClass {
        use std::cmp::Ordering::*;
        match self.nehari_side() {
            None => WellClass::W1,
            Some(Equal) => WellClass::OnM,
            Some(_) if self.functional_i() >= d => WellClass::OutsideWell,
            Some(Greater) => WellClass::W1,
            Some(Less) => WellClass::W2,
        }
    }
}

/// Evaluates the quadratic and power parts of a history.
pub fn well_parts(
    grid: &SpatialGrid,
    kernel: &RelaxationKernel,
    v: &HistoryDatum,
    p: f64,
) -> Result<WellParts> {
    let mem = MemoryState::new(grid, kernel, v, v.spacing(), f64::INFINITY)?;
    let v0 = v.at_zero();
    let quadratic = grid.h1_seminorm_sq(v0) + mem.memory_integral(v0, Weight::Mu)?;
    let power = grid.lp_norm_pow(v0, p + 1.0)?;
    Ok(WellParts { quadratic, power, p })
}

/// The functional `I(v)` on histories.
pub fn functional_i(grid: &SpatialGrid, kernel: &RelaxationKernel, v: &HistoryDatum, p: f64) -> Result<f64> {
    Ok(well_parts(grid, kernel, v, p)?.functional_i())
}

/// Quadratic part minus power part; positive on the `W1` side.
pub fn nehari_gap(grid: &SpatialGrid, kernel: &RelaxationKernel, v: &HistoryDatum, p: f64) -> Result<f64> {
    Ok(well_parts(grid, kernel, v, p)?.nehari_gap())
}

/// Classifies a history against the well constants computed for the same
/// grid and exponent. Membership in `M` is decided first, since every
/// element of `M` has `I >= d`.
pub fn classify(
    grid: &SpatialGrid,
    kernel: &RelaxationKernel,
    v: &HistoryDatum,
    constants: &WellConstants,
) -> Result<WellClass> {
    if constants.grid_fingerprint != grid.fingerprint() {
        return Err(Error::domain("well constants were computed for a different grid"));
    }
    Ok(well_parts(grid, kernel, v, constants.p)?.classify(constants.d))
}
