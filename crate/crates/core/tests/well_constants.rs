use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use viscowave::grid::{Field, SpatialGrid};
use viscowave::history::{classify, nehari_gap, HistoryDatum, WellClass};
use viscowave::kernel::RelaxationKernel;
use viscowave::wellconst::{
    ground_state, ground_state_from, mountain_pass_d, sobolev_gamma, thresholds, GammaOptions, WellConstants,
};

#[test]
fn gamma_settles_under_refinement() {
    for p in [1.0, 3.0] {
        let gammas: Vec<f64> = [50, 100, 200, 400]
            .iter()
            .map(|&n| sobolev_gamma(&SpatialGrid::new_1d(PI, n).unwrap(), p).unwrap())
            .collect();
        for w in gammas.windows(2) {
            assert!(w[1] <= w[0], "p = {p}: {gammas:?}");
        }
        let gaps: Vec<f64> = gammas.windows(2).map(|w| w[0] - w[1]).collect();
        for w in gaps.windows(2) {
            // Second order: each halving cuts the gap by about four.
            assert!(w[1] < 0.3 * w[0], "p = {p}: gaps {gaps:?}");
        }
        assert!(gaps[1] < 1e-4 && gaps[2] < 1e-4, "p = {p}: gaps {gaps:?}");
    }
}

#[test]
fn random_fields_obey_the_sobolev_inequality() {
    let g = SpatialGrid::new_1d(PI, 60).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [1.5, 3.0, 5.0] {
        let gamma = sobolev_gamma(&g, p).unwrap();
        let mut best: f64 = 0.0;
        for i in 0..1000 {
            // Mix rough and smooth fields.
            let f = if i % 2 == 0 {
                Field((0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect())
            } else {
                let c: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
                g.sample(|x| c.iter().enumerate().map(|(k, ck)| ck * ((k + 1) as f64 * x[0]).sin()).sum())
            };
            let lhs = g.lp_norm_pow(&f, p + 1.0).unwrap().powf(1.0 / (p + 1.0));
            let ratio = lhs / g.h1_seminorm_sq(&f).sqrt();
            assert!(ratio <= gamma * (1.0 + 1e-9), "p = {p}: {ratio} > {gamma}");
            best = best.max(ratio);
        }
        assert!(best > 0.5 * gamma);
    }
}

#[test]
fn ground_state_ignores_the_scale_of_its_start() {
    let g = SpatialGrid::new_1d(PI, 120).unwrap();
    let start = g.sample(|x| x[0] * (PI - x[0]));
    let a = ground_state_from(&g, 3.0, start.clone(), GammaOptions::default()).unwrap();
    for alpha in [1e-3, 0.5, 7.0, 1e4] {
        let b = ground_state_from(&g, 3.0, start.scaled(alpha), GammaOptions::default()).unwrap();
        assert!((a.gamma - b.gamma).abs() <= 1e-12 * a.gamma);
        let diff = a.profile.iter().zip(b.profile.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-9 * a.profile.max_abs());
    }
}

#[test]
fn thresholds_follow_their_formulas() {
    let d = mountain_pass_d(0.8, 3.0).unwrap();
    assert!((d - 0.25 * 0.8f64.powi(-4)).abs() <= 1e-15 * d);
    let t = thresholds(d, 3.0, 2.0).unwrap();
    assert!((t.y0 - 2.0 * d).abs() <= 1e-15 * d);
    let sk = 2.0f64.sqrt();
    let m = ((sk + 1.0) / 2.0) * (3.0 - sk) / 2.0 * d;
    assert!((t.m.unwrap() - m).abs() <= 1e-14 * d);
    assert!(t.m.unwrap() < d);
    assert!(thresholds(d, 3.0, 1.0).unwrap().m.is_none());
    assert!(thresholds(d, 1.2, 2.0).unwrap().m.is_none());
    assert!(mountain_pass_d(0.8, 1.0).is_err());
}

struct Setup {
    grid: SpatialGrid,
    kernel: RelaxationKernel,
    constants: WellConstants,
    /// Ground state scaled onto the Nehari manifold.
    on_m: Field,
}

fn setup(p: f64) -> Setup {
    let grid = SpatialGrid::new_1d(PI, 100).unwrap();
    let kernel = RelaxationKernel::exponential(1.0, 1.0).unwrap();
    let gs = ground_state(&grid, p, GammaOptions::default()).unwrap();
    let constants = WellConstants::from_gamma(&grid, gs.gamma, p, kernel.k0()).unwrap();
    let lambda = gs.gamma.powf(-(p + 1.0) / (p - 1.0));
    Setup {
        on_m: gs.profile.scaled(lambda),
        grid,
        kernel,
        constants,
    }
}

#[test]
fn classification_examples() {
    let s = setup(3.0);
    let class = |u: Field| {
        classify(&s.grid, &s.kernel, &HistoryDatum::constant(&s.grid, u).unwrap(), &s.constants).unwrap()
    };
    assert_eq!(class(s.grid.zeros()), WellClass::W1);
    assert_eq!(class(s.on_m.clone()), WellClass::OnM);
    assert_eq!(class(s.on_m.scaled(0.5)), WellClass::W1);
    assert_eq!(class(s.on_m.scaled(0.99)), WellClass::W1);
    assert_eq!(class(s.on_m.scaled(1.5)), WellClass::W2);
    assert_eq!(class(s.on_m.scaled(-1.5)), WellClass::W2);
    assert_eq!(class(s.on_m.scaled(1.2)), WellClass::W2);
}

#[test]
fn nehari_point_on_the_manifold_has_depth_d() {
    let s = setup(3.0);
    let v = HistoryDatum::constant(&s.grid, s.on_m.clone()).unwrap();
    let gap = nehari_gap(&s.grid, &s.kernel, &v, 3.0).unwrap();
    let i = viscowave::history::functional_i(&s.grid, &s.kernel, &v, 3.0).unwrap();
    assert!(gap.abs() <= 1e-8 * s.grid.h1_seminorm_sq(&s.on_m));
    assert!((i - s.constants.d).abs() <= 1e-8 * s.constants.d);
}

#[test]
fn scale_covariance_has_one_positive_root() {
    let s = setup(3.0);
    // A history with real memory: mode 2 now, mode 1 in the past.
    let now = s.grid.sine_mode(&[2]).scaled(0.3);
    let past = s.grid.sine_mode(&[1]).scaled(0.3);
    let samples = (0..=20).map(|j| if j == 0 { now.clone() } else { past.clone() }).collect();
    let v = HistoryDatum::new(&s.grid, 0.1, samples, viscowave::history::Extension::Frozen, s.grid.zeros()).unwrap();
    let gap = |a: f64| nehari_gap(&s.grid, &s.kernel, &v.scaled(a), 3.0).unwrap();
    let (mut lo, mut hi) = (1e-3, 1e3);
    assert!(gap(lo) > 0.0 && gap(hi) < 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // gap(a) = a^2 Q - a^4 P, so the root is sqrt(Q / P).
    let q = gap(1.0) + s.grid.lp_norm_pow(v.at_zero(), 4.0).unwrap();
    let pw = s.grid.lp_norm_pow(v.at_zero(), 4.0).unwrap();
    let root = (q / pw).sqrt();
    assert!((lo - root).abs() <= 1e-10 * root, "{lo} vs {root}");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let a: f64 = rng.gen_range(1e-2..1e2);
        if (a - root).abs() > 1e-6 * root {
            assert_eq!(gap(a) > 0.0, a < root, "a = {a}");
        }
    }
}

#[test]
fn constants_refuse_a_foreign_grid() {
    let s = setup(3.0);
    let other = SpatialGrid::new_1d(PI, 101).unwrap();
    let v = HistoryDatum::zero(&other);
    assert!(classify(&other, &s.kernel, &v, &s.constants).is_err());
}
