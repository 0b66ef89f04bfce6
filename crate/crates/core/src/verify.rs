//! The built-in acceptance suite.
//!
//! [`run_all`] evaluates fourteen numbered criteria. The long simulations are
//! run once, in parallel, and shared between the criteria that inspect them.

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::blowup::{check_hypotheses, detect, Hypothesis};
use crate::decay::{
    comparison_check, default_window, envelope_check, fit_rate, lt_ode_solve, optimal_rate_bootstrap,
    predicted_rate, DecayModel, FitModel, RatePrediction,
};
use crate::energetics::{monotonicity_check, nehari_check, quadratic_energy, sandwich_check, total_energy};
use crate::error::Result;
use crate::grid::SpatialGrid;
use crate::history::{well_parts, TemporalProfile, WellClass};
use crate::integrator::{run, GridSpec, HistorySpec, RunOptions, RunOutput, Scenario, ScenarioConfig, Termination};
use crate::kernel::{DecayClass, KernelFamily};
use crate::oracle::ascent_gamma;
use crate::wellconst::{mountain_pass_d, sobolev_gamma, thresholds, WellConstants};

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

const EXP: KernelFamily = KernelFamily::Exponential { mu0: 1.0, c: 1.0 };
const POLY: KernelFamily = KernelFamily::Polynomial { c: 1.0, r: 1.5 };

/// The one-dimensional scenario family every criterion builds on: `[0, pi]`,
/// the first sine mode switched on by a bump of unit length.
pub fn base_config(n: usize, amplitude: f64, t_end: f64, m: f64, p: f64, kernel: KernelFamily) -> ScenarioConfig {
    ScenarioConfig {
        m,
        p,
        dt: None,
        t_end,
        cfl_safety: 0.5,
        seed: 0,
        dim3_semantics: false,
        output_every: 10,
        memory_stride: 1,
        s_cap: None,
        fit_window: None,
        grid: GridSpec {
            extents: vec![PI],
            n: vec![n],
        },
        kernel,
        history: HistorySpec::template(amplitude, vec![1], TemporalProfile::Bump { support: 1.0 }),
    }
}

/// Energy `E(0)` of a config without running it.
pub fn initial_energy(config: &ScenarioConfig) -> Result<f64> {
    let scn = Scenario::build(config)?;
    total_energy(&scn.grid, &scn.initial_state()?, config.p)
}

/// Multiplies the amplitude by 1.25, starting from 1, until `E(0) < 0`.
pub fn negative_energy_amplitude(template: &ScenarioConfig) -> Result<f64> {
    let mut amplitude = 1.0;
    for _ in 0..200 {
        let mut cfg = template.clone();
        cfg.history = HistorySpec::template(amplitude, vec![1], TemporalProfile::Bump { support: 1.0 });
        if initial_energy(&cfg)? < 0.0 {
            return Ok(amplitude);
        }
        amplitude *= 1.25;
    }
    Err(crate::Error::NonConvergence {
        iterations: 200,
        residual: amplitude,
    })
}

/// The named scenarios shared by several criteria.
pub fn suite_scenarios() -> Result<Vec<(&'static str, ScenarioConfig)>> {
    let blowup_template = base_config(200, 1.0, 50.0, 1.0, 3.0, EXP);
    let amplitude = negative_energy_amplitude(&blowup_template)?;
    let mut blowup = blowup_template;
    blowup.history = blowup.history.amplitude_scaled(amplitude);
    let case3 = base_config(50, 0.5, 100.0, 1.0, 3.0, POLY);
    let mut case4 = case3.clone();
    case4.m = 3.0;
    Ok(vec![
        ("w1", base_config(200, 0.5, 50.0, 1.0, 3.0, EXP)),
        ("case1", base_config(200, 0.5, 40.0, 1.0, 3.0, EXP)),
        ("case2", base_config(200, 0.5, 100.0, 3.0, 3.0, EXP)),
        ("case3", case3),
        ("case4", case4),
        ("global", base_config(200, 1.0, 100.0, 3.0, 2.0, EXP)),
        ("blowup", blowup),
    ])
}

struct SuiteRun {
    name: &'static str,
    config: ScenarioConfig,
    output: RunOutput,
    seconds: f64,
}

struct Suite {
    runs: Vec<SuiteRun>,
}

impl Suite {
    fn build() -> Result<Self> {
        let runs = suite_scenarios()?
            .into_par_iter()
            .map(|(name, config)| {
                let start = Instant::now();
                let output = run(&config, &RunOptions::default())?;
                Ok(SuiteRun {
                    name,
                    config,
                    output,
                    seconds: start.elapsed().as_secs_f64(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Suite { runs })
    }

    fn get(&self, name: &str) -> &SuiteRun {
        self.runs.iter().find(|r| r.name == name).expect("suite scenario exists")
    }
}

fn outcome(id: u32, name: &'static str, start: Instant, body: Result<(bool, String)>) -> CriterionResult {
    let (passed, detail) = body.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn energy_identity() -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let mut residuals = Vec::new();
        let mut slowest = 0.0f64;
        for n in [200, 401, 803] {
            let level = Instant::now();
            let mut cfg = base_config(n, 0.1, 20.0, 1.0, 3.0, EXP);
            cfg.output_every = 100;
            let out = run(&cfg, &RunOptions::default())?;
            let e0 = out.ledger.e0();
            residuals.push((out.ledger.last().map_or(f64::NAN, |r| r.identity_residual), e0));
            slowest = slowest.max(level.elapsed().as_secs_f64());
        }
        let (r0, e0) = residuals[0];
        let first = r0 <= 1e-3 * e0;
        let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0].0 / w[1].0).collect();
        let refined = ratios.iter().all(|&q| q >= 3.0);
        let timely = slowest < 30.0;
        Ok((
            first && refined && timely,
            format!(
                "residual/E(0) = {:.3e} at n=200, refinement ratios {:.3} and {:.3}, slowest level {slowest:.2} s",
                r0 / e0,
                ratios[0],
                ratios[1]
            ),
        ))
    };
    outcome(1, "energy identity", start, body())
}

fn monotone_energy(suite: &Suite) -> CriterionResult {
    let start = Instant::now();
    let mut failed = Vec::new();
    let mut rows = 0;
    for r in &suite.runs {
        let report = monotonicity_check(&r.output.ledger);
        rows += report.rows_checked;
        if !report.passed() {
            failed.push(format!("{} ({} violations)", r.name, report.violations.len()));
        }
    }
    let detail = if failed.is_empty() {
        format!("{} scenarios, {rows} rows, no increase beyond tol_step", suite.runs.len())
    } else {
        format!("increase in {}", failed.join(", "))
    };
    outcome(2, "monotone energy", start, Ok((failed.is_empty(), detail)))
}

fn well_invariance(suite: &Suite) -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let w1 = suite.get("w1");
        let scn = Scenario::build(&w1.config)?;
        let constants = WellConstants::compute(&scn.grid, w1.config.p, scn.kernel.k0())?;
        let class = well_parts(&scn.grid, &scn.kernel, &scn.history, w1.config.p)?.classify(constants.d);
        let ledger = &w1.output.ledger;
        let e0 = ledger.e0();
        let sandwich = sandwich_check(ledger, w1.config.p);
        let nehari = nehari_check(ledger);
        let reached = ledger.last().map_or(0.0, |r| r.t);
        let passed = e0 < constants.d
            && class == WellClass::W1
            && sandwich.passed()
            && nehari.passed()
            && reached >= 50.0 - 1e-9;
        Ok((
            passed,
            format!(
                "E(0) = {e0:.4} < d = {:.4}, class {class:?}, {} rows to t = {reached}, sandwich violations {}, Nehari violations {}",
                constants.d,
                ledger.len(),
                sandwich.violations.len(),
                nehari.violations.len()
            ),
        ))
    };
    outcome(3, "potential-well invariance", start, body())
}

fn case1_decay(suite: &Suite) -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let ledger = &suite.get("case1").output.ledger;
        let fit = fit_rate(ledger, default_window(ledger), FitModel::Exponential)?;
        Ok((
            fit.rate > 0.0 && fit.goodness >= 0.98,
            format!("alpha = {:.4}, goodness = {:.6}", fit.rate, fit.goodness),
        ))
    };
    outcome(4, "exponential decay (m = 1)", start, body())
}

fn envelope(name: &str, ledger: &crate::energetics::EnergyLedger, exponent: f64) -> Result<(bool, String)> {
    let env = envelope_check(ledger, exponent, default_window(ledger), 10.0)?;
    Ok((
        env.passed,
        format!(
            "{name}: exponent {exponent}, max/start = {:.4}",
            env.max_value / env.start_value
        ),
    ))
}

fn polynomial_exponent(p: RatePrediction) -> f64 {
    match p {
        RatePrediction::Exponential => 0.0,
        RatePrediction::Polynomial { exponent } => exponent,
    }
}

fn case2_decay(suite: &Suite) -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let r = suite.get("case2");
        let exponent = polynomial_exponent(predicted_rate(r.config.m, DecayClass::Exponential, None, false)?);
        envelope("m = 3", &r.output.ledger, exponent)
    };
    outcome(5, "polynomial decay (m = 3)", start, body())
}

fn case34_decay(suite: &Suite) -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let mut passed = true;
        let mut parts = Vec::new();
        for name in ["case3", "case4"] {
            let r = suite.get(name);
            let pred = predicted_rate(r.config.m, DecayClass::Polynomial { r: 1.5 }, None, true)?;
            let (ok, detail) = envelope(&format!("m = {}", r.config.m), &r.output.ledger, polynomial_exponent(pred))?;
            passed &= ok;
            parts.push(detail);
        }
        Ok((passed, parts.join("; ")))
    };
    outcome(6, "polynomial-kernel decay", start, body())
}

fn global_existence(suite: &Suite) -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let r = suite.get("global");
        let ledger = &r.output.ledger;
        let scn = Scenario::build(&r.config)?;
        let constants = WellConstants::compute(&scn.grid, r.config.p, scn.kernel.k0())?;
        let class = well_parts(&scn.grid, &scn.kernel, &scn.history, r.config.p)?.classify(constants.d);
        let row0 = *ledger.first().expect("initial row");
        let verdict = detect(ledger, &r.output.controller, check_hypotheses(r.config.m, &constants, &row0, class));
        let peak = ledger.rows.iter().map(|x| x.script_e).fold(0.0, f64::max);
        let completed = r.output.termination == Termination::Completed;
        Ok((
            completed && !verdict.fired && peak <= 10.0 * row0.script_e,
            format!(
                "{:?}, blow-up flag {}, max scriptE / scriptE(0) = {:.4}",
                r.output.termination,
                verdict.fired,
                peak / row0.script_e
            ),
        ))
    };
    outcome(7, "global existence (m >= p)", start, body())
}

fn blowup(suite: &Suite) -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let r = suite.get("blowup");
        let ledger = &r.output.ledger;
        let scn = Scenario::build(&r.config)?;
        let constants = WellConstants::compute(&scn.grid, r.config.p, scn.kernel.k0())?;
        let class = well_parts(&scn.grid, &scn.kernel, &scn.history, r.config.p)?.classify(constants.d);
        let row0 = *ledger.first().expect("initial row");
        let hypothesis = check_hypotheses(r.config.m, &constants, &row0, class);
        let verdict = detect(ledger, &r.output.controller, hypothesis);
        let t_est = verdict.t_estimate.unwrap_or(f64::INFINITY);
        let amplitude = match &r.config.history {
            HistorySpec::Template { amplitude, .. } => *amplitude,
            HistorySpec::Table { .. } => f64::NAN,
        };
        Ok((
            row0.e < 0.0 && hypothesis == Hypothesis::NegativeEnergy && verdict.fired && t_est < r.config.t_end,
            format!(
                "amplitude {amplitude:.4}, E(0) = {:.4}, k0 = {}, {:?}, detector fired {}, t_estimate = {t_est:.4}",
                row0.e,
                scn.kernel.k0(),
                r.output.termination,
                verdict.fired
            ),
        ))
    };
    outcome(8, "finite-time blow-up", start, body())
}

/// Sine modes and temporal profiles scanned for unstable-well data.
fn w2_candidates() -> Vec<HistorySpec> {
    let shapes = [vec![1], vec![2], vec![3]];
    let profiles = [
        TemporalProfile::Constant,
        TemporalProfile::Step,
        TemporalProfile::Bump { support: 1.0 },
        TemporalProfile::ExpRamp { rate: 1.0, support: 2.0 },
    ];
    let mut out = Vec::new();
    for modes in &shapes {
        for profile in &profiles {
            out.push(HistorySpec::template(1.0, modes.clone(), *profile));
        }
    }
    out
}

fn w2_chain() -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let grid = SpatialGrid::new_1d(PI, 200)?;
        let constants = WellConstants::compute(&grid, 3.0, 2.0)?;
        let grad_bound = constants.gradient_threshold();
        let checks = w2_candidates()
            .into_par_iter()
            .map(|spec| -> Result<(usize, usize, f64, f64)> {
                let (mut found, mut failed) = (0, 0);
                let (mut min_grad, mut min_energy) = (f64::INFINITY, f64::INFINITY);
                let mut amplitude = 0.05;
                while amplitude < 50.0 {
                    let mut cfg = base_config(200, 1.0, 0.0, 1.0, 3.0, EXP);
                    cfg.history = spec.amplitude_scaled(amplitude);
                    let scn = Scenario::build(&cfg)?;
                    let parts = well_parts(&scn.grid, &scn.kernel, &scn.history, cfg.p)?;
                    if parts.classify(constants.d) == WellClass::W2 {
                        let state = scn.initial_state()?;
                        let grad = grid.h1_seminorm_sq(&state.u).sqrt();
                        let energy = quadratic_energy(&grid, &state)?;
                        found += 1;
                        if !(grad > grad_bound && energy > constants.y0) {
                            failed += 1;
                        }
                        min_grad = min_grad.min(grad);
                        min_energy = min_energy.min(energy);
                    }
                    amplitude *= 1.05;
                }
                Ok((found, failed, min_grad, min_energy))
            })
            .collect::<Result<Vec<_>>>()?;
        let found: usize = checks.iter().map(|c| c.0).sum();
        let failed: usize = checks.iter().map(|c| c.1).sum();
        let every_shape = checks.iter().all(|c| c.0 > 0);
        let min_grad = checks.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
        let min_energy = checks.iter().map(|c| c.3).fold(f64::INFINITY, f64::min);
        Ok((
            failed == 0 && every_shape,
            format!(
                "{found} unstable-well data from {} families, {failed} failures; min grad {min_grad:.4} > {grad_bound:.4}, min scriptE(0) {min_energy:.4} > y0 = {:.4}",
                checks.len(),
                constants.y0
            ),
        ))
    };
    outcome(9, "unstable-well preconditions", start, body())
}

fn well_constants() -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let poincare = sobolev_gamma(&SpatialGrid::new_1d(PI, 400)?, 1.0)?;
        let grid = SpatialGrid::new_1d(PI, 100)?;
        let gamma = sobolev_gamma(&grid, 3.0)?;
        let oracle = ascent_gamma(PI, 100, 3.0, 20, 0).gamma;
        let rel = (gamma - oracle).abs() / oracle;
        let d = mountain_pass_d(gamma, 3.0)?;
        let t = thresholds(d, 3.0, 2.0)?;
        let m = t.m.unwrap_or(f64::NAN);
        let s2 = 2f64.sqrt();
        let closed = d == gamma.powi(-4) / 4.0
            && t.y0 == 2.0 * d
            && (m - (s2 + 1.0) / 2.0 * (3.0 - s2) / 2.0 * d).abs() <= 4.0 * f64::EPSILON * d;
        let ratio = m / d;
        let passed = (poincare - 1.0).abs() < 1e-3
            && rel < 1e-4
            && closed
            && m < d
            && (ratio - 0.957107).abs() <= 1e-6
            && start.elapsed().as_secs_f64() < 60.0;
        Ok((
            passed,
            format!(
                "p=1 gamma = {poincare:.7}; p=3 gamma = {gamma:.10} vs ascent {oracle:.10} (rel {rel:.1e}); closed forms {closed}; M/d = {ratio:.7}"
            ),
        ))
    };
    outcome(10, "well constants", start, body())
}

fn comparison_machinery(suite: &Suite) -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        // Phi(s) = 2 phi_c s for m = 1, so phi_c = 1/2 gives C = 1.
        let linear = DecayModel::new(0.5, 1.0, 1.0)?;
        let series = lt_ode_solve(&linear, 1.0, 10.0, false)?;
        let closed_err = series
            .t
            .iter()
            .zip(&series.s)
            .map(|(&t, &s)| ((s - (-t / 2.0).exp()) / (-t / 2.0).exp()).abs())
            .fold(0.0, f64::max);

        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut identity_err = 0.0f64;
        for k in 0..1000 {
            let m = rng.gen_range(1.0..5.0);
            let phi_c = 10f64.powf(rng.gen_range(-1.0..1.0));
            let s = 10f64.powf(rng.gen_range(-6.0..3.0));
            let mut model = DecayModel::new(phi_c, m, 1.0)?;
            let use_psi = k % 2 == 1;
            if use_psi {
                model = model.with_psi(phi_c, phi_c, 1.5, 0.25)?;
            }
            let (left, right) = model.inverse_identity_sides(s, use_psi);
            identity_err = identity_err.max((left - right).abs() / right.abs());
        }

        let ledger = &suite.get("case1").output.ledger;
        let report = comparison_check(ledger, &DecayModel::new(1.0, 1.0, 1.0)?, false, 1e-6)?;
        Ok((
            closed_err <= 1e-6 && identity_err <= 1e-10 && report.passed,
            format!(
                "linear closed form rel err {closed_err:.1e}; identity max rel err {identity_err:.1e} over 1000 points; comparison over {} periods with phi_c = {:.3e}: {} violations",
                report.points.len() - 1,
                report.phi_c,
                report.violations.len()
            ),
        ))
    };
    outcome(11, "comparison-ODE machinery", start, body())
}

fn bootstrap() -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let a = optimal_rate_bootstrap(0.2, 1.5)?.iterations;
        let b = optimal_rate_bootstrap(0.05, 1.9)?.iterations;
        Ok((a == 2 && b == 17, format!("r=1.5, sigma1=0.2: {a} updates; r=1.9, sigma1=0.05: {b} updates")))
    };
    outcome(12, "rate bootstrap", start, body())
}

fn continuous_dependence() -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let base = base_config(200, 0.5, 20.0, 1.0, 3.0, EXP);
        let grid = base.grid.build()?;
        let opts = RunOptions {
            store_trajectory: true,
            ..Default::default()
        };
        let deltas = [0.0, 1e-2, 1e-3, 1e-4];
        let trajectories = deltas
            .par_iter()
            .map(|&delta| {
                let mut cfg = base.clone();
                cfg.history = cfg.history.amplitude_scaled(1.0 + delta);
                Ok(run(&cfg, &opts)?.trajectory.expect("trajectory requested"))
            })
            .collect::<Result<Vec<_>>>()?;
        let reference = &trajectories[0];
        let mut sups = Vec::new();
        for tr in &trajectories[1..] {
            let mut sup = 0.0f64;
            for (a, b) in reference.u.iter().zip(&tr.u) {
                sup = sup.max(grid.h1_distance_sq(a, b).sqrt());
            }
            sups.push(sup);
        }
        let ratios: Vec<f64> = sups.windows(2).map(|w| w[0] / w[1]).collect();
        let passed = ratios.iter().all(|&q| q > 1.0 && (5.0..=20.0).contains(&q));
        Ok((
            passed,
            format!(
                "sup distances {:.3e}, {:.3e}, {:.3e}; ratios {:.4}, {:.4}",
                sups[0], sups[1], sups[2], ratios[0], ratios[1]
            ),
        ))
    };
    outcome(13, "continuous dependence", start, body())
}

fn determinism(suite: &Suite, quick: bool) -> CriterionResult {
    let start = Instant::now();
    let body = || -> Result<(bool, String)> {
        let mut chosen: Vec<&SuiteRun> = suite.runs.iter().collect();
        if quick {
            chosen.sort_by(|a, b| a.seconds.total_cmp(&b.seconds));
            chosen.truncate(2);
        }
        let mismatched = chosen
            .par_iter()
            .map(|r| -> Result<Option<&'static str>> {
                let again = run(&r.config, &RunOptions::default())?;
                let same = again.ledger.to_csv_string()? == r.output.ledger.to_csv_string()?;
                Ok((!same).then_some(r.name))
            })
            .collect::<Result<Vec<_>>>()?;
        let bad: Vec<&str> = mismatched.into_iter().flatten().collect();
        let names: Vec<&str> = chosen.iter().map(|r| r.name).collect();
        Ok((
            bad.is_empty(),
            if bad.is_empty() {
                format!("ledgers reproduced bit-for-bit for {}", names.join(", "))
            } else {
                format!("ledgers differ for {}", bad.join(", "))
            },
        ))
    };
    outcome(14, "determinism", start, body())
}

/// Runs every criterion. `quick` re-runs only the two fastest suite
/// scenarios for the determinism check instead of all of them.
pub fn run_all(quick: bool) -> Vec<CriterionResult> {
    let start = Instant::now();
    let suite = match Suite::build() {
        Ok(s) => s,
        Err(e) => {
            return NAMES
                .iter()
                .map(|&(id, name)| CriterionResult {
                    id,
                    name,
                    passed: false,
                    detail: format!("suite scenarios failed: {e}"),
                    seconds: start.elapsed().as_secs_f64(),
                })
                .collect();
        }
    };
    let mut results = vec![
        energy_identity(),
        monotone_energy(&suite),
        well_invariance(&suite),
        case1_decay(&suite),
        case2_decay(&suite),
        case34_decay(&suite),
        global_existence(&suite),
        blowup(&suite),
        w2_chain(),
        well_constants(),
        comparison_machinery(&suite),
        bootstrap(),
        continuous_dependence(),
        determinism(&suite, quick),
    ];
    results.sort_by_key(|r| r.id);
    results
}

const NAMES: [(u32, &str); 14] = [
    (1, "energy identity"),
    (2, "monotone energy"),
    (3, "potential-well invariance"),
    (4, "exponential decay (m = 1)"),
    (5, "polynomial decay (m = 3)"),
    (6, "polynomial-kernel decay"),
    (7, "global existence (m >= p)"),
    (8, "finite-time blow-up"),
    (9, "unstable-well preconditions"),
    (10, "well constants"),
    (11, "comparison-ODE machinery"),
    (12, "rate bootstrap"),
    (13, "continuous dependence"),
    (14, "determinism"),
];
