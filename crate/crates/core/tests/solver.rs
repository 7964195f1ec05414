use radflow::coefficients::{CoefficientModel, RegularizationParams};
use radflow::diagnostics::{self, DiagnosticsConfig};
use radflow::solver::{self, snapshot, RadialState, RunPlan, Scheme, StepControl};
use radflow::Error;

fn params(eps: f64) -> RegularizationParams {
    RegularizationParams::new(2, 0.5, eps, 1.5, 0.0, false).unwrap()
}

fn wavy_state(k: usize) -> RadialState {
    let (a, b) = (0.1, 1.5);
    let node_r: Vec<f64> = (0..=k).map(|j| a + (b - a) * j as f64 / k as f64).collect();
    let mut node_u: Vec<f64> = node_r.iter().map(|r| 0.3 * (3.0 * r).sin() * (r - a) * (b - r)).collect();
    node_u[0] = 0.0;
    node_u[k] = 0.0;
    let rho: Vec<f64> = (0..k)
        .map(|i| {
            let c = 0.5 * (node_r[i] + node_r[i + 1]);
            0.6 + 0.3 * (-(c - 0.8f64).powi(2) * 6.0).exp()
        })
        .collect();
    RadialState::from_densities(2, node_r, node_u, &rho).unwrap()
}

#[test]
fn acoustic_limit_of_unit_density() {
    let s = RadialState::uniform(2, 0.0, 1.0, 10, 1.0, 0.0).unwrap();
    let m = CoefficientModel::saint_venant();
    assert!((solver::acoustic_limit(&s, &m) - 0.070_710_678_118_654_752).abs() < 1e-15);
}

#[test]
fn static_constant_state_is_a_fixed_point() {
    let m = CoefficientModel::saint_venant();
    let p = params(0.1);
    let s0 = RadialState::uniform(2, 0.1, 1.5, 64, 0.7, 0.0).unwrap();
    let mut s = s0.clone();
    for _ in 0..100 {
        let out = solver::step(&s, &m, &p, &StepControl::default(), f64::INFINITY).unwrap();
        assert!(out.work.abs() <= 1e-12);
        s = out.state;
    }
    for (a, b) in s.node_r.iter().zip(&s0.node_r) {
        assert!((a - b).abs() <= 1e-14);
    }
    assert!(s.node_u.iter().all(|u| u.abs() <= 1e-14));
    for (a, b) in s.cell_rho.iter().zip(&s0.cell_rho) {
        assert!((a - b).abs() <= 1e-14);
    }
}

#[test]
fn mass_is_conserved_and_energy_never_grows() {
    let m = CoefficientModel::saint_venant();
    let p = params(0.1);
    let s0 = wavy_state(96);
    let mass0 = s0.total_mass();
    let e0 = diagnostics::energy(&s0, &m);
    let plan = RunPlan {
        t_end: 0.3,
        observer_dt: 0.05,
        every_step: false,
        diagnostics: DiagnosticsConfig::default(),
    };
    let out = solver::run(s0, &m, &p, &StepControl::default(), &plan, &mut []).unwrap();
    assert_eq!(out.records.len(), 7);
    for r in &out.records {
        assert!((r.mass - mass0).abs() / mass0 <= 1e-13);
        assert!(r.energy + r.work <= e0 * (1.0 + 1e-12));
        assert!(r.diss_exact >= r.diss_lower - 1e-10);
        assert!(r.bd_cross_rate >= -1e-10);
    }
    assert!((out.state.time - 0.3).abs() < 1e-15);
}

#[test]
fn semi_implicit_scheme_tracks_discrete_gradient() {
    let m = CoefficientModel::saint_venant();
    let p = params(0.1);
    let plan = RunPlan {
        t_end: 0.1,
        observer_dt: 0.0,
        every_step: false,
        diagnostics: DiagnosticsConfig::default(),
    };
    let dg = solver::run(wavy_state(64), &m, &p, &StepControl::default(), &plan, &mut []).unwrap();
    let ctl = StepControl {
        scheme: Scheme::SemiImplicit,
        ..StepControl::default()
    };
    let si = solver::run(wavy_state(64), &m, &p, &ctl, &plan, &mut []).unwrap();
    let diff = dg
        .state
        .node_u
        .iter()
        .zip(&si.state.node_u)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(diff < 5e-3, "schemes differ by {diff}");
    assert!((si.state.total_mass() - dg.state.total_mass()).abs() < 1e-13);
}

#[test]
fn observers_see_every_tick() {
    let m = CoefficientModel::saint_venant();
    let p = params(0.1);
    let plan = RunPlan {
        t_end: 0.2,
        observer_dt: 0.05,
        every_step: false,
        diagnostics: DiagnosticsConfig::default(),
    };
    let mut times = Vec::new();
    let mut obs = |s: &RadialState, _: &diagnostics::DiagnosticsRecord| times.push(s.time);
    solver::run(wavy_state(32), &m, &p, &StepControl::default(), &plan, &mut [&mut obs]).unwrap();
    let expected = [0.0, 0.05, 0.1, 0.15, 0.2];
    assert_eq!(times.len(), expected.len());
    for (t, e) in times.iter().zip(expected) {
        assert!((t - e).abs() < 1e-14);
    }
}

#[test]
fn zero_horizon_gives_one_record() {
    let m = CoefficientModel::saint_venant();
    let plan = RunPlan {
        t_end: 0.0,
        observer_dt: 0.1,
        every_step: false,
        diagnostics: DiagnosticsConfig::default(),
    };
    let out = solver::run(wavy_state(16), &m, &params(0.1), &StepControl::default(), &plan, &mut []).unwrap();
    assert_eq!(out.records.len(), 1);
    assert_eq!(out.totals.steps, 0);
}

#[test]
fn impossible_step_aborts_with_dump() {
    let m = CoefficientModel::saint_venant();
    let ctl = StepControl {
        newton_max_iter: 1,
        newton_tol: 0.0,
        ..StepControl::default()
    };
    match solver::step(&wavy_state(16), &m, &params(0.1), &ctl, f64::INFINITY) {
        Err(Error::SolverAbort { halvings, dump, .. }) => {
            assert_eq!(halvings, solver::MAX_HALVINGS);
            let (_, s) = snapshot::parse(&dump.unwrap()).unwrap();
            assert_eq!(s.cells(), 16);
        }
        other => panic!("expected abort, got {other:?}"),
    }
}

#[test]
fn snapshot_roundtrip_is_exact() {
    let m = CoefficientModel::saint_venant();
    let p = params(0.1);
    let s = wavy_state(40);
    let text = snapshot::to_string(&s, &m, &p);
    let (h, back) = snapshot::parse(&text).unwrap();
    assert_eq!(h.n_dim, 2);
    assert_eq!(h.cells, 40);
    assert_eq!(h.gamma, 2.0);
    assert_eq!(h.epsilon, 0.1);
    assert_eq!(back.node_r, s.node_r);
    assert_eq!(back.node_u, s.node_u);
    for (a, b) in back.cell_rho.iter().zip(&s.cell_rho) {
        assert!((a - b).abs() <= 4e-16 * b);
    }
}

#[test]
fn malformed_snapshot_is_rejected() {
    assert!(matches!(snapshot::parse("N 2\ngamma x\n"), Err(Error::Parse(_))));
    assert!(matches!(snapshot::parse("N 2\n"), Err(Error::Parse(_))));
}

fn random_state(k: usize, amp: f64, freq: f64, base: f64, bump: f64) -> RadialState {
    let (a, b) = (0.1, 1.5);
    let node_r: Vec<f64> = (0..=k).map(|j| a + (b - a) * j as f64 / k as f64).collect();
    let mut node_u: Vec<f64> = node_r.iter().map(|r| amp * (freq * r).sin() * (r - a) * (b - r)).collect();
    node_u[0] = 0.0;
    node_u[k] = 0.0;
    let rho: Vec<f64> = (0..k)
        .map(|i| base + bump * (-(0.5 * (node_r[i] + node_r[i + 1]) - 0.8f64).powi(2) * 6.0).exp())
        .collect();
    RadialState::from_densities(2, node_r, node_u, &rho).unwrap()
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]

    #[test]
    fn runs_keep_mass_positivity_and_the_energy_budget(
        amp in -1.0f64..1.0,
        freq in 1.0f64..8.0,
        base in 0.05f64..1.0,
        bump in 0.0f64..1.0,
        eps in 0.02f64..0.19,
    ) {
        let m = CoefficientModel::saint_venant();
        let p = RegularizationParams::new(2, 0.5, eps, 1.5, 0.0, false).unwrap();
        let s0 = random_state(32, amp, freq, base, bump);
        let mass0 = s0.total_mass();
        let e0 = diagnostics::energy(&s0, &m);
        let plan = RunPlan {
            t_end: 0.05,
            observer_dt: 0.01,
            every_step: false,
            diagnostics: DiagnosticsConfig::default(),
        };
        let out = solver::run(s0, &m, &p, &StepControl::default(), &plan, &mut []).unwrap();
        for r in &out.records {
            proptest::prop_assert!((r.mass - mass0).abs() <= 1e-13 * mass0);
            proptest::prop_assert!(r.energy + r.work <= e0 * (1.0 + 1e-12));
        }
        proptest::prop_assert!(out.state.cell_rho.iter().all(|r| *r > 0.0));
        proptest::prop_assert!(out.state.node_r.windows(2).all(|w| w[1] > w[0]));
        proptest::prop_assert_eq!(out.state.node_u[0], 0.0);
        proptest::prop_assert_eq!(*out.state.node_u.last().unwrap(), 0.0);
    }
}
