use std::f64::consts::PI;

use viscowave::energetics::quadratic_energy;
use viscowave::grid::{Field, SpatialGrid};
use viscowave::history::{Extension, HistoryDatum, MemoryState, TemporalProfile, Weight};
use viscowave::integrator::{GridSpec, HistorySpec, Scenario, ScenarioConfig};
use viscowave::kernel::{KernelFamily, RelaxationKernel};

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h);
    }
    acc * h / 3.0
}

fn grid() -> SpatialGrid {
    SpatialGrid::new_1d(PI, 40).unwrap()
}

fn bump_field(g: &SpatialGrid) -> Field {
    g.sample(|x| x[0].sin() + 0.3 * (2.0 * x[0]).sin())
}

#[test]
fn switched_on_state_against_dense_quadrature() {
    let g = grid();
    let k = RelaxationKernel::exponential(1.0, 1.0).unwrap();
    let u = bump_field(&g);
    let dt = 0.01;
    let mut mem = MemoryState::new(&g, &k, &HistoryDatum::step(&g, u.clone()).unwrap(), dt, 50.0).unwrap();
    let h1 = g.h1_seminorm_sq(&u);
    for step in 1..=300 {
        let t = step as f64 * dt;
        mem.advance(t, &u).unwrap();
        if step % 50 == 0 {
            // The integrand vanishes for s < t and is h1 mu(s) beyond.
            let oracle = simpson(|s| h1 * k.mu(s).unwrap(), t, t + 60.0, 10_000);
            let got = mem.memory_integral(&u, Weight::Mu).unwrap();
            assert!((got - oracle).abs() <= 1e-10 * oracle, "t = {t}: {got} vs {oracle}");
            assert!((got - h1 * (-t).exp()).abs() <= 1e-12 * h1);
        }
    }
}

#[test]
fn linear_in_time_past_force() {
    let g = grid();
    let k = RelaxationKernel::exponential(1.0, 1.0).unwrap();
    let u = bump_field(&g);
    let lap = g.laplacian(&u).unwrap();
    let spacing = 0.005;
    let depth = 60.0;
    let samples: Vec<Field> = (0..=(depth / spacing) as usize)
        .map(|j| u.scaled(-(j as f64) * spacing))
        .collect();
    let history = HistoryDatum::new(&g, spacing, samples, Extension::Zero, u.clone()).unwrap();
    let mut mem = MemoryState::new(&g, &k, &history, spacing, 1e6).unwrap();
    let mut t = 0.0;
    for target in [0.0, 1.0, 2.5] {
        while t < target - 1e-12 {
            t += spacing;
            mem.advance(t, &u.scaled(t)).unwrap();
        }
        let weight = simpson(|s| k.mu(s).unwrap() * (t - s), 0.0, t + depth, 20_000);
        assert!((weight - (t - 1.0)).abs() < 1e-9);
        let force = mem.memory_force(&u.scaled(t)).unwrap();
        let scale = lap.max_abs();
        for (f, l) in force.iter().zip(lap.iter()) {
            assert!((f - weight * l).abs() <= 1e-5 * scale, "t = {t}: {f} vs {}", weight * l);
        }
    }
}

#[test]
fn frozen_history_force_uses_the_whole_kernel_mass() {
    let g = grid();
    for k in [
        RelaxationKernel::exponential(1.0, 1.0).unwrap(),
        RelaxationKernel::polynomial(1.0, 1.5).unwrap(),
    ] {
        let u = bump_field(&g);
        let mem = MemoryState::new(&g, &k, &HistoryDatum::constant(&g, u.clone()).unwrap(), 0.01, 1e6).unwrap();
        let force = mem.memory_force(&u).unwrap();
        let lap = g.laplacian(&u).unwrap();
        for (f, l) in force.iter().zip(lap.iter()) {
            assert!((f - (k.k0() - 1.0) * l).abs() <= 1e-12 * lap.max_abs());
        }
        assert_eq!(mem.memory_integral(&u, Weight::Mu).unwrap(), 0.0);
        assert!(mem.relaxation_force(&u).unwrap().max_abs() <= 1e-12 * lap.max_abs());
    }
}

/// History `cos(t) U` on `[-1, 0]`, zero before; the solution continues as
/// `cos(t) U`.
fn memory_with_stride(g: &SpatialGrid, k: &RelaxationKernel, u: &Field, stride: f64, t_end: f64) -> f64 {
    let n_hist = (1.0 / stride).round() as usize;
    let samples = (0..=n_hist).map(|j| u.scaled((j as f64 * stride).cos())).collect();
    let history = HistoryDatum::new(g, stride, samples, Extension::Zero, g.zeros()).unwrap();
    let mut mem = MemoryState::new(g, k, &history, stride, 1e6).unwrap();
    let steps = (t_end / stride).round() as usize;
    for j in 1..=steps {
        let t = j as f64 * stride;
        mem.advance(t, &u.scaled(t.cos())).unwrap();
    }
    mem.memory_integral(&u.scaled(t_end.cos()), Weight::Mu).unwrap()
}

#[test]
fn finer_stride_agrees_within_the_trapezoid_bound() {
    let g = grid();
    let u = bump_field(&g);
    let h1 = g.h1_seminorm_sq(&u);
    let t_end = 5.0;
    for k in [
        RelaxationKernel::exponential(1.0, 1.0).unwrap(),
        RelaxationKernel::polynomial(1.0, 1.5).unwrap(),
    ] {
        let coarse_stride = 0.05;
        let coarse = memory_with_stride(&g, &k, &u, coarse_stride, t_end);
        let fine = memory_with_stride(&g, &k, &u, coarse_stride / 10.0, t_end);
        // f(s) = h1 (cos t - cos(t - s))^2 mu(s) on [0, t + 1]; bound f'' by
        // differencing the exact integrand.
        let f = |s: f64| h1 * (t_end.cos() - (t_end - s).cos()).powi(2) * k.mu(s).unwrap();
        let d = 1e-3;
        let span = t_end + 1.0;
        let f2 = (1..(span / d) as usize)
            .map(|i| {
                let s = i as f64 * d;
                ((f(s + d) - 2.0 * f(s) + f(s - d)) / (d * d)).abs()
            })
            .fold(0.0, f64::max);
        let bound = span / 12.0 * coarse_stride * coarse_stride * f2;
        assert!((coarse - fine).abs() <= bound, "{coarse} vs {fine}, bound {bound}");
        // Both approach the exact value, computed with the tail past t + 1.
        let exact = simpson(f, 0.0, span, 20_000) + h1 * t_end.cos().powi(2) * k.tail_mass(span).unwrap();
        assert!((fine - exact).abs() <= bound / 50.0, "{fine} vs {exact}");
    }
}

#[test]
fn accumulated_integral_matches_node_by_node_sum() {
    let g = grid();
    let u = bump_field(&g);
    let k = RelaxationKernel::exponential(2.0, 0.7).unwrap();
    let history = HistoryDatum::new(
        &g,
        0.1,
        (0..=10).map(|j| u.scaled(1.0 - 0.05 * j as f64)).collect(),
        Extension::Frozen,
        g.zeros(),
    )
    .unwrap();
    let mut mem = MemoryState::new(&g, &k, &history, 0.1, 8.0).unwrap();
    for j in 1..=200 {
        let t = j as f64 * 0.1;
        let now = u.scaled((0.3 * t).sin() + 1.0);
        mem.advance(t, &now).unwrap();
        for w in [Weight::Mu, Weight::MuPrime] {
            let a = mem.memory_integral(&now, w).unwrap();
            let b = mem.memory_integral_reference(&now, w).unwrap();
            assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-12), "t = {t}: {a} vs {b}");
        }
    }
    assert!(mem.is_truncated());
    assert!(mem.s_active() <= 8.0 + 0.1 + 1e-9);
}

#[test]
fn quadratic_energy_of_a_switched_on_state() {
    let config = ScenarioConfig {
        m: 1.0,
        p: 3.0,
        dt: None,
        t_end: 1.0,
        cfl_safety: 0.5,
        seed: 0,
        dim3_semantics: false,
        output_every: 1,
        memory_stride: 1,
        s_cap: None,
        fit_window: None,
        grid: GridSpec {
            extents: vec![PI],
            n: vec![50],
        },
        kernel: KernelFamily::Exponential { mu0: 1.0, c: 1.0 },
        history: HistorySpec::template(0.7, vec![1], TemporalProfile::Step),
    };
    let scn = Scenario::build(&config).unwrap();
    let state = scn.initial_state().unwrap();
    let h1 = scn.grid.h1_seminorm_sq(&state.u);
    let oracle = 0.5 * (h1 + simpson(|s| h1 * (-s).exp(), 0.0, 60.0, 10_000));
    let got = quadratic_energy(&scn.grid, &state).unwrap();
    assert!((got - h1).abs() <= 1e-12 * h1);
    assert!((got - oracle).abs() <= 1e-9 * h1);
}
