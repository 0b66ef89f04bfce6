//! Time stepping for `u_tt = k0 lap u - int mu(s) lap u(t-s) ds
//! - |u_t|^{m-1} u_t + |u|^{p-1} u`.
//!
//! One step is a kick-drift-kick leapfrog with the damping folded into the
//! drift as an implicit midpoint substep:
//!
//! 1. `v <- v + dt/2 a(u)`
//! 2. `z` solves `z + dt/2 |z|^{m-1} z = v`; then `u <- u + dt z` and
//!    `v <- 2 z - v`
//! 3. push `u` into the memory, recompute `a(u)`, `v <- v + dt/2 a(u)`
//!
//! The memory part of `a` is evaluated from the buffer at the current time
//! level only, so the scheme stays explicit apart from the scalar damping
//! solve at each node.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::energetics::{rates, Dissipation, EnergyLedger, EnergyRow, Rates};
use crate::error::{Error, Result};
use crate::grid::{Field, SpatialGrid};
use crate::history::{Extension, HistoryDatum, HistoryTemplate, MemoryEval, MemoryState, TemporalProfile};
use crate::kernel::{KernelFamily, RelaxationKernel};
use crate::roots::increasing_root;

/// Grid section of a scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub extents: Vec<f64>,
    pub n: Vec<usize>,
}

impl GridSpec {
    pub fn build(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.extents.clone(), self.n.clone())
    }
}

/// How the history is specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HistorySpec {
    Template {
        amplitude: f64,
        modes: Vec<usize>,
        #[serde(flatten)]
        profile: TemporalProfile,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spacing: Option<f64>,
    },
    Table {
        path: PathBuf,
        #[serde(default)]
        extension: Extension,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        spacing: Option<f64>,
    },
}

impl HistorySpec {
    pub fn template(amplitude: f64, modes: Vec<usize>, profile: TemporalProfile) -> Self {
        HistorySpec::Template {
            amplitude,
            modes,
            profile,
            spacing: None,
        }
    }

    /// Samples the history with `default_spacing` unless the spec fixes one.
    pub fn build(&self, grid: &SpatialGrid, default_spacing: f64) -> Result<HistoryDatum> {
        match self {
            HistorySpec::Template {
                amplitude,
                modes,
                profile,
                spacing,
            } => HistoryTemplate::new(*amplitude, modes.clone(), *profile)
                .sample(grid, spacing.unwrap_or(default_spacing)),
            HistorySpec::Table {
                path,
                extension,
                spacing,
            } => HistoryDatum::from_table(grid, path, spacing.unwrap_or(default_spacing), *extension),
        }
    }

    pub fn amplitude_scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        if let HistorySpec::Template { amplitude, .. } = &mut out {
            *amplitude *= factor;
        }
        out
    }
}

fn default_cfl() -> f64 {
    0.5
}

fn one() -> usize {
    1
}

/// A complete, self-describing simulation scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub m: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dim3_semantics: bool,
    /// Ledger row every this many steps (the last step always gets a row).
    #[serde(default = "one")]
    pub output_every: usize,
    /// Past states are stored every this many steps.
    #[serde(default = "one")]
    pub memory_stride: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_cap: Option<f64>,
    /// Window for decay-rate fits; defaults to the second half of the run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
    pub grid: GridSpec,
    pub kernel: KernelFamily,
    pub history: HistorySpec,
}

impl ScenarioConfig {
    /// Checks every constraint and returns all failures at once. Warnings
    /// (constraints that only matter in three dimensions) are returned on
    /// success.
    pub fn validate(&self) -> Result<Vec<String>> {
        let mut errors = Vec::new();
        let mut warnings = Vec::new();
        if !(self.m >= 1.0) || !self.m.is_finite() {
            errors.push(format!("m must be >= 1, got {}", self.m));
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            errors.push(format!("p must be > 1, got {}", self.p));
        }
        let three_d = [
            (self.p < 6.0, format!("p = {} must be < 6", self.p)),
            (
                self.p * (self.m + 1.0) / self.m < 6.0,
                format!("p(m+1)/m = {} must be < 6", self.p * (self.m + 1.0) / self.m),
            ),
        ];
        for (ok, msg) in three_d {
            if !ok {
                if self.dim3_semantics {
                    errors.push(msg);
                } else {
                    warnings.push(format!("{msg} under three-dimensional semantics (ignored here)"));
                }
            }
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            errors.push(format!("t_end must be finite and >= 0, got {}", self.t_end));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            errors.push(format!("cfl_safety must lie in (0, 1], got {}", self.cfl_safety));
        }
        if self.output_every == 0 {
            errors.push("output_every must be >= 1".into());
        }
        if self.memory_stride == 0 {
            errors.push("memory_stride must be >= 1".into());
        }
        if let Some(s) = self.s_cap {
            if !(s > 0.0) {
                errors.push(format!("s_cap must be positive, got {s}"));
            }
        }
        if let Some([lo, hi]) = self.fit_window {
            if !(lo >= 0.0 && hi > lo) {
                errors.push(format!("fit_window [{lo}, {hi}] is not an increasing pair of times"));
            }
        }
        let grid = self.grid.build().map_err(|e| errors.push(format!("grid: {e}"))).ok();
        let kernel = RelaxationKernel::new(self.kernel)
            .map_err(|e| errors.push(format!("kernel: {e}")))
            .ok();
        if let (Some(grid), Some(kernel)) = (&grid, &kernel) {
            let bound = self.cfl_safety * grid.cfl_length() / kernel.k0().sqrt();
            match self.dt {
                Some(dt) if !(dt > 0.0) => errors.push(format!("dt must be positive, got {dt}")),
                Some(dt) if dt > bound * (1.0 + 1e-12) => errors.push(format!(
                    "dt = {dt} exceeds the stability bound {bound} (cfl_safety h / sqrt(k0))"
                )),
                _ => {}
            }
        }
        match &self.history {
            HistorySpec::Template {
                amplitude,
                modes,
                profile,
                spacing,
            } => {
                if !amplitude.is_finite() {
                    errors.push("history amplitude must be finite".into());
                }
                if modes.is_empty() || modes.contains(&0) {
                    errors.push("history modes must be positive integers".into());
                } else if let Some(grid) = &grid {
                    if modes.len() != grid.dim() {
                        errors.push(format!(
                            "history needs one mode per axis ({}), got {}",
                            grid.dim(),
                            modes.len()
                        ));
                    }
                }
                match profile {
                    TemporalProfile::Bump { support } | TemporalProfile::ExpRamp { support, .. }
                        if !(*support > 0.0) =>
                    {
                        errors.push(format!("history support must be positive, got {support}"))
                    }
                    _ => {}
                }
                if let Some(s) = spacing {
                    if !(*s > 0.0) {
                        errors.push(format!("history spacing must be positive, got {s}"));
                    }
                }
            }
            HistorySpec::Table { path, spacing, .. } => {
                if !path.exists() {
                    errors.push(format!("history table {} does not exist", path.display()));
                }
                if let Some(s) = spacing {
                    if !(*s > 0.0) {
                        errors.push(format!("history spacing must be positive, got {s}"));
                    }
                }
            }
        }
        if errors.is_empty() {
            Ok(warnings)
        } else {
            Err(Error::Config(errors))
        }
    }
}

/// Test-only switches that alter the equation being integrated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub disable_damping: bool,
    pub disable_source: bool,
    /// Keep `(t, u, v)` at every ledger row.
    pub store_trajectory: bool,
}

/// Everything derived from a validated config before the first step.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub grid: SpatialGrid,
    pub kernel: RelaxationKernel,
    pub history: HistoryDatum,
    pub dt: f64,
    pub stride: f64,
    pub s_cap: f64,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn build(config: &ScenarioConfig) -> Result<Self> {
        let warnings = config.validate()?;
        let grid = config.grid.build()?;
        let kernel = RelaxationKernel::new(config.kernel)?;
        let bound = config.cfl_safety * grid.cfl_length() / kernel.k0().sqrt();
        let mut dt = config.dt.unwrap_or(bound);
        if config.t_end > 0.0 {
            dt = config.t_end / (config.t_end / dt).ceil();
        }
        let stride = config.memory_stride as f64 * dt;
        let history = config.history.build(&grid, stride)?;
        let s_cap = config.s_cap.unwrap_or_else(|| default_s_cap(&kernel));
        Ok(Scenario {
            config: config.clone(),
            grid,
            kernel,
            history,
            dt,
            stride,
            s_cap,
            warnings,
        })
    }

    pub fn initial_state(&self) -> Result<SimState> {
        let memory = MemoryState::new(&self.grid, &self.kernel, &self.history, self.stride, self.s_cap)?;
        Ok(SimState {
            t: 0.0,
            u: self.history.at_zero().clone(),
            v: self.history.velocity_at_0().clone(),
            memory,
            dt: self.dt,
            step_index: 0,
            t_anchor: 0.0,
            steps_at_dt: 0,
            accel: None,
        })
    }
}

/// Truncation depth: `50/c` for exponential kernels, otherwise where the
/// remaining kernel mass drops below `1e-10 (k0 - 1)`.
pub fn default_s_cap(kernel: &RelaxationKernel) -> f64 {
    match kernel.family() {
        KernelFamily::Exponential { c, .. } => 50.0 / c,
        KernelFamily::Polynomial { .. } => kernel.tail_quantile(1e-10),
    }
}

/// Solution state at one time level.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: f64,
    pub u: Field,
    pub v: Field,
    pub memory: MemoryState,
    pub dt: f64,
    pub step_index: u64,
    t_anchor: f64,
    steps_at_dt: u64,
    accel: Option<Field>,
}

impl SimState {
    /// Changes the step size from the next step on.
    pub fn set_dt(&mut self, dt: f64) {
        self.t_anchor = self.t;
        self.steps_at_dt = 0;
        self.dt = dt;
    }
}

/// The unique `v` with `v + dt |v|^{m-1} v = a`.
pub fn pointwise_damping_solve(a: f64, dt: f64, m: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if m == 1.0 {
        return a / (1.0 + dt);
    }
    let target = a.abs();
    let tol = 1e-14 * target.max(1.0);
    let g = |x: f64| {
        let xm = x.powf(m - 1.0);
        (x + dt * xm * x - target, 1.0 + dt * m * xm)
    };
    // The root lies below both |a| and (|a|/dt)^{1/m}.
    let hi = target.min((target / dt).powf(1.0 / m));
    let root = increasing_root(g, 0.0, hi, tol, 200);
    a.signum() * root.x
}

fn source_into(u: &[f64], p: f64, out: &mut [f64]) {
    if p == 3.0 {
        out.iter_mut().zip(u).for_each(|(o, &x)| *o += x * x * x);
    } else if p == 2.0 {
        out.iter_mut().zip(u).for_each(|(o, &x)| *o += x.abs() * x);
    } else {
        out.iter_mut().zip(u).for_each(|(o, &x)| *o += x.abs().powf(p - 1.0) * x);
    }
}

fn acceleration(scn: &Scenario, u: &Field, relaxation: &Field, opts: &RunOptions) -> Field {
    let mut a = scn.grid.zeros();
    scn.grid.laplacian_into(u, &mut a);
    a.iter_mut().zip(relaxation.iter()).for_each(|(x, r)| *x += r);
    if !opts.disable_source {
        source_into(u, scn.config.p, &mut a);
    }
    a
}

fn finite(f: &Field) -> bool {
    f.iter().all(|v| v.is_finite())
}

/// Advances `state` by one step of size `state.dt` and returns the memory
/// evaluation at the new time level.
pub fn step(scn: &Scenario, state: &mut SimState, opts: &RunOptions) -> Result<MemoryEval> {
    let dt = state.dt;
    let a0 = match state.accel.take() {
        Some(a) => a,
        None => {
            let eval = state.memory.evaluate(&state.u)?;
            acceleration(scn, &state.u, &eval.relaxation, opts)
        }
    };
    let half = 0.5 * dt;
    state.v.iter_mut().zip(a0.iter()).for_each(|(v, a)| *v += half * a);
    if opts.disable_damping {
        state.u.iter_mut().zip(state.v.iter()).for_each(|(u, v)| *u += dt * v);
    } else {
        let m = scn.config.m;
        for (u, v) in state.u.iter_mut().zip(state.v.iter_mut()) {
            let z = pointwise_damping_solve(*v, half, m);
            *u += dt * z;
            *v = 2.0 * z - *v;
        }
    }
    state.step_index += 1;
    state.steps_at_dt += 1;
    state.t = state.t_anchor + state.steps_at_dt as f64 * dt;
    if !finite(&state.u) || !finite(&state.v) {
        return Err(Error::BlowupOrInstability {
            step: state.step_index,
            t: state.t,
        });
    }
    state.memory.advance(state.t, &state.u)?;
    let eval = state.memory.evaluate(&state.u)?;
    let a1 = acceleration(scn, &state.u, &eval.relaxation, opts);
    state.v.iter_mut().zip(a1.iter()).for_each(|(v, a)| *v += half * a);
    if !finite(&state.v) || !finite(&a1) {
        return Err(Error::BlowupOrInstability {
            step: state.step_index,
            t: state.t,
        });
    }
    state.accel = Some(a1);
    Ok(eval)
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// Gradient threshold crossed with the step controller at its floor.
    BlowupSuspected { t: f64, step: u64 },
    /// Non-finite values appeared.
    Unstable { t: f64, step: u64 },
}

/// Record of the step-size controller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerLog {
    pub dt0: f64,
    pub dt_min: f64,
    pub dt_final: f64,
    pub halvings: u32,
    /// A halving was requested with `dt` already at `dt_min`.
    pub exhausted: bool,
    pub grad_norm0: f64,
    pub peak_grad: f64,
}

/// Stored solution snapshots at the ledger rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub u: Vec<Field>,
    pub v: Vec<Field>,
}

/// Result of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub ledger: EnergyLedger,
    pub termination: Termination,
    pub controller: ControllerLog,
    pub trajectory: Option<Trajectory>,
    pub steps: u64,
    /// Largest memory mass beyond the truncation depth seen at any row.
    pub max_truncation_tail: f64,
    pub warnings: Vec<String>,
}

/// Number of halvings allowed by the step controller.
pub const MAX_HALVINGS: u32 = 10;

struct Diagnostics<'a> {
    scn: &'a Scenario,
    opts: RunOptions,
    e0: Option<f64>,
    damp_cum: f64,
    visc_cum: f64,
}

impl Diagnostics<'_> {
    fn row(&mut self, state: &SimState, eval: &MemoryEval) -> EnergyRow {
        let g = &self.scn.grid;
        let p = self.scn.config.p;
        let h1 = g.h1_seminorm_sq(&state.u);
        let lp = g.lp_pow(&state.u, p + 1.0);
        let quad = h1 + eval.integral_mu;
        let script_e = 0.5 * (g.l2_norm_sq(&state.v) + quad);
        let source = if self.opts.disable_source { 0.0 } else { lp / (p + 1.0) };
        let e = script_e - source;
        let e0 = *self.e0.get_or_insert(e);
        let d_cum = self.damp_cum + self.visc_cum;
        EnergyRow {
            t: state.t,
            script_e,
            e,
            i: 0.5 * quad - source,
            d_cum,
            damp_cum: self.damp_cum,
            visc_cum: self.visc_cum,
            grad_norm: h1.sqrt(),
            lp_pow: lp,
            nehari_gap: quad - lp,
            identity_residual: (e + d_cum - e0).abs(),
        }
    }
}

/// Runs a scenario to `t_end`, to a suspected blow-up, or to the first
/// non-finite value. Only setup failures are returned as errors; a run that
/// stops early still returns its partial ledger.
pub fn run(config: &ScenarioConfig, opts: &RunOptions) -> Result<RunOutput> {
    let scn = Scenario::build(config)?;
    run_scenario(&scn, opts)
}

pub fn run_scenario(scn: &Scenario, opts: &RunOptions) -> Result<RunOutput> {
    let cfg = &scn.config;
    let mut state = scn.initial_state()?;
    let mut eval = state.memory.evaluate(&state.u)?;
    let mut diag = Diagnostics {
        scn,
        opts: *opts,
        e0: None,
        damp_cum: 0.0,
        visc_cum: 0.0,
    };
    let mut ledger = EnergyLedger::new();
    let mut trajectory = opts.store_trajectory.then(Trajectory::default);
    let record = |state: &SimState, traj: &mut Option<Trajectory>| {
        if let Some(tr) = traj.as_mut() {
            tr.times.push(state.t);
            tr.u.push(state.u.clone());
            tr.v.push(state.v.clone());
        }
    };
    let row0 = diag.row(&state, &eval);
    ledger.push(row0);
    record(&state, &mut trajectory);
    let mut max_tail = eval.truncation_tail;

    let g0 = row0.grad_norm;
    let mut g_ref = g0.max((2.0 * row0.script_e).sqrt()).max(f64::MIN_POSITIVE);
    let threshold = 1e3 * g0 + 1.0;
    let mut controller = ControllerLog {
        dt0: scn.dt,
        dt_min: scn.dt / f64::from(1u32 << MAX_HALVINGS),
        dt_final: scn.dt,
        halvings: 0,
        exhausted: false,
        grad_norm0: g0,
        peak_grad: g0,
    };
    let damping_m = if opts.disable_damping { None } else { Some(cfg.m) };
    let rate_of = |v: &Field, e: &MemoryEval| -> Rates {
        let mut r = rates(&scn.grid, v, e.integral_mu_prime, cfg.m);
        if damping_m.is_none() {
            r.damp = 0.0;
        }
        r
    };
    let mut termination = Termination::Completed;
    let mut dense = false;
    let mut since_row = 0usize;
    while cfg.t_end - state.t > 0.5 * state.dt {
        let before = rate_of(&state.v, &eval);
        let dt = state.dt;
        match step(scn, &mut state, opts) {
            Ok(next) => eval = next,
            Err(Error::BlowupOrInstability { step, t }) => {
                termination = Termination::Unstable { t, step };
                break;
            }
            Err(e) => return Err(e),
        }
        let inc = Dissipation::trapezoid(dt, before, rate_of(&state.v, &eval));
        diag.damp_cum += inc.damp;
        diag.visc_cum += inc.visc;
        since_row += 1;

        let grad = scn.grid.h1_seminorm_sq(&state.u).sqrt();
        controller.peak_grad = controller.peak_grad.max(grad);
        if grad >= 2.0 * g_ref {
            if state.dt > controller.dt_min * 1.5 {
                state.set_dt(0.5 * state.dt);
                controller.halvings += 1;
                controller.dt_final = state.dt;
                dense = true;
            } else {
                controller.exhausted = true;
            }
            g_ref = grad;
        }
        let blowup = controller.exhausted && grad >= threshold;
        let last = !(cfg.t_end - state.t > 0.5 * state.dt);
        if dense || blowup || last || since_row >= cfg.output_every {
            ledger.push(diag.row(&state, &eval));
            record(&state, &mut trajectory);
            max_tail = max_tail.max(eval.truncation_tail);
            since_row = 0;
        }
        if blowup {
            termination = Termination::BlowupSuspected {
                t: state.t,
                step: state.step_index,
            };
            break;
        }
    }
    Ok(RunOutput {
        ledger,
        termination,
        controller,
        trajectory,
        steps: state.step_index,
        max_truncation_tail: max_tail,
        warnings: scn.warnings.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    pub(crate) fn config(n: usize, amplitude: f64, t_end: f64) -> ScenarioConfig {
        ScenarioConfig {
            m: 1.0,
            p: 3.0,
            dt: None,
            t_end,
            cfl_safety: 0.5,
            seed: 0,
            dim3_semantics: false,
            output_every: 1,
            memory_stride: 1,
            s_cap: None,
            fit_window: None,
            grid: GridSpec {
                extents: vec![PI],
                n: vec![n],
            },
            kernel: KernelFamily::Exponential { mu0: 1.0, c: 1.0 },
            history: HistorySpec::template(amplitude, vec![1], TemporalProfile::Bump { support: 1.0 }),
        }
    }

    #[test]
    fn damping_solve_examples() {
        assert_eq!(pointwise_damping_solve(1.0, 1.0, 1.0), 0.5);
        assert_eq!(pointwise_damping_solve(0.0, 0.3, 2.5), 0.0);
        assert!((pointwise_damping_solve(2.0, 1.0, 3.0) - 1.0).abs() < 1e-14);
        let v = pointwise_damping_solve(-7.5, 0.01, 1.7);
        assert!((v + 0.01 * v.abs().powf(1.7 - 1.0) * v + 7.5).abs() <= 1e-14 * 7.5);
    }

    #[test]
    fn zero_state_stays_zero() {
        let out = run(&config(20, 0.0, 1.0), &RunOptions::default()).unwrap();
        assert_eq!(out.termination, Termination::Completed);
        for r in &out.ledger.rows {
            assert_eq!(r.e, 0.0);
            assert_eq!(r.grad_norm, 0.0);
        }
    }

    #[test]
    fn zero_end_time_gives_one_row() {
        let out = run(&config(20, 0.1, 0.0), &RunOptions::default()).unwrap();
        assert_eq!(out.ledger.len(), 1);
        assert_eq!(out.ledger.rows[0].t, 0.0);
    }

    #[test]
    fn ends_exactly_at_t_end() {
        let out = run(&config(30, 0.1, 1.7), &RunOptions::default()).unwrap();
        let t = out.ledger.last().unwrap().t;
        assert!((t - 1.7).abs() < 1e-12, "{t}");
    }

    #[test]
    fn rejects_bad_config_all_at_once() {
        let mut c = config(20, 0.1, 1.0);
        c.m = 0.5;
        c.p = 0.5;
        c.dt = Some(10.0);
        match c.validate() {
            Err(Error::Config(list)) => assert_eq!(list.len(), 3, "{list:?}"),
            other => panic!("{other:?}"),
        }
        let mut c = config(20, 0.1, 1.0);
        c.dim3_semantics = true;
        c.p = 5.5;
        assert!(c.validate().is_err());
        c.dim3_semantics = false;
        assert!(!c.validate().unwrap().is_empty());
    }
}
