use viscowave::blowup::Hypothesis;
use viscowave::history::{TemporalProfile, WellClass};
use viscowave::integrator::{HistorySpec, RunOptions, Termination};
use viscowave::kernel::KernelFamily;
use viscowave::runner::execute;
use viscowave::verify::{base_config, suite_scenarios};

const EXP: KernelFamily = KernelFamily::Exponential { mu0: 1.0, c: 1.0 };

#[test]
fn fired_runs_never_gain_energy() {
    let (_, cfg) = suite_scenarios().unwrap().into_iter().find(|(name, _)| *name == "blowup").unwrap();
    let record = execute(&cfg, &RunOptions::default()).unwrap();
    let s = &record.summary;
    assert!(s.blowup.fired, "{:?}", s.termination);
    assert_eq!(s.blowup.hypothesis, Hypothesis::NegativeEnergy);
    assert!(matches!(s.termination, Termination::BlowupSuspected { .. }));
    assert!(s.controller.exhausted);
    let e0 = record.output.ledger.e0();
    let slack = 1e-8 * e0.abs().max(1.0);
    for r in &record.output.ledger.rows {
        assert!(r.e <= e0 + slack + r.identity_residual, "E = {} > E0 = {e0} at t = {}", r.e, r.t);
    }
    let t_est = s.blowup.t_estimate.unwrap();
    assert!(t_est >= s.t_final && t_est < cfg.t_end);
}

#[test]
fn dominant_damping_never_triggers_the_detector() {
    for (m, p) in [(4.0, 3.0), (3.0, 2.0)] {
        for amplitude in [1.0, 2.4414, 4.0] {
            let cfg = base_config(50, amplitude, 10.0, m, p, EXP);
            let s = execute(&cfg, &RunOptions::default()).unwrap().summary;
            assert!(!s.blowup.fired, "m = {m}, p = {p}, amplitude {amplitude}: {:?}", s.termination);
            assert_eq!(s.termination, Termination::Completed);
        }
    }
}

#[test]
fn suite_scenarios_with_dominant_damping_stay_global() {
    let suite = suite_scenarios().unwrap();
    let global: Vec<_> = suite.iter().filter(|(_, c)| c.m >= c.p).collect();
    assert!(!global.is_empty());
    for (name, cfg) in global {
        let s = execute(cfg, &RunOptions::default()).unwrap().summary;
        assert!(!s.blowup.fired, "{name}");
    }
}

#[test]
fn unstable_well_datum_below_m() {
    // With m = p the exponent condition fails, which leaves the well criterion.
    let mut amplitude = 1.0;
    let mut seen = None;
    while amplitude < 10.0 {
        let mut cfg = base_config(50, 1.0, 0.0, 3.0, 3.0, EXP);
        cfg.history = HistorySpec::template(amplitude, vec![1], TemporalProfile::Constant);
        let record = execute(&cfg, &RunOptions::default()).unwrap();
        let s = record.summary;
        let m = s.constants.m.unwrap();
        if s.classification_at_0 == WellClass::W2 && s.e0 >= 0.0 && s.e0 < m {
            assert_eq!(s.blowup.hypothesis, Hypothesis::W2Well);
            let grad0 = record.output.ledger.rows[0].grad_norm;
            assert!(grad0 > s.constants.gradient_threshold());
            seen = Some(amplitude);
            break;
        }
        amplitude *= 1.02;
    }
    assert!(seen.is_some(), "no W2 datum with 0 <= E(0) < M");
}
