use radflow::coefficients::{CoefficientModel, RegularizationParams};
use radflow::diagnostics::{self, DiagnosticsConfig, RunTotals, CSV_HEADER};
use radflow::solver::RadialState;

// `h = ρ`, `g = 0`, `γ = 2`, `N = 2`; `ε` tiny so the added terms are invisible.
fn sv() -> CoefficientModel {
    CoefficientModel::saint_venant()
}

fn tiny_eps() -> RegularizationParams {
    RegularizationParams::new(2, 0.5, 1e-300, 1.0, 0.0, false).unwrap()
}

fn from_cells(k: usize, u: impl Fn(f64) -> f64, rho: impl Fn(f64) -> f64) -> RadialState {
    let node_r: Vec<f64> = (0..=k).map(|j| j as f64 / k as f64).collect();
    let node_u = node_r.iter().map(|r| u(*r)).collect();
    let cells: Vec<f64> = (0..k).map(|i| rho((i as f64 + 0.5) / k as f64)).collect();
    RadialState::from_densities(2, node_r, node_u, &cells).unwrap()
}

#[test]
fn energy_of_constant_states() {
    let rest = RadialState::uniform(2, 0.0, 1.0, 50, 1.0, 0.0).unwrap();
    assert!((diagnostics::energy(&rest, &sv()) - 0.5).abs() < 1e-15);
    let moving = RadialState::uniform(2, 0.0, 1.0, 50, 1.0, 2.0).unwrap();
    assert!((diagnostics::energy(&moving, &sv()) - 1.5).abs() < 1e-14);
}

#[test]
fn isothermal_relative_entropy_vanishes_at_reference() {
    let iso = CoefficientModel::power_law("iso", vec![radflow::PowerTerm::new(1.0, 1.0)], 0.5, 2.0, 2.0, 1.0);
    let k = 2000;
    let (a, b) = (0.5, 3.0);
    let node_r: Vec<f64> = (0..=k).map(|j| a + (b - a) * j as f64 / k as f64).collect();
    let mass: Vec<f64> = node_r
        .windows(2)
        .map(|w| {
            // ∫ e^{−r} r dr over the cell
            let f = |r: f64| -(r + 1.0) * (-r).exp();
            f(w[1]) - f(w[0])
        })
        .collect();
    let s = RadialState::from_parts(2, 0.0, node_r, vec![0.0; k + 1], mass).unwrap();
    let e = diagnostics::energy(&s, &iso);
    assert!(e.abs() < 1e-6, "relative entropy {e}");
}

#[test]
fn zero_velocity_dissipates_nothing() {
    let s = from_cells(32, |_| 0.0, |r| 1.0 + r);
    assert_eq!(diagnostics::dissipation_exact(&s, &sv(), &tiny_eps()), 0.0);
    assert_eq!(diagnostics::dissipation_lower(&s, &sv(), &tiny_eps()), 0.0);
}

#[test]
fn pure_expansion_dissipation() {
    let s = from_cells(40, |r| r, |_| 1.0);
    let exact = diagnostics::dissipation_exact(&s, &sv(), &tiny_eps());
    let lower = diagnostics::dissipation_lower(&s, &sv(), &tiny_eps());
    assert!((exact - 2.0).abs() < 1e-13, "{exact}");
    assert!((lower - 2.0).abs() < 1e-13, "{lower}");
}

#[test]
fn bd_entropy_of_constant_states() {
    let rest = RadialState::uniform(2, 0.0, 1.0, 20, 3.0, 0.0).unwrap();
    let (bd, cross) = diagnostics::bd_entropy(&rest, &sv(), &tiny_eps());
    assert!(bd.abs() < 1e-20 && cross.abs() < 1e-20);
    let moving = RadialState::uniform(2, 0.0, 1.0, 20, 3.0, 0.7).unwrap();
    let (bd, cross) = diagnostics::bd_entropy(&moving, &sv(), &tiny_eps());
    assert!((bd - diagnostics::energy(&moving, &sv()) + 0.5 * 3.0 * 3.0).abs() < 1e-14);
    assert!(cross.abs() < 1e-20);
}

#[test]
fn bd_entropy_of_linear_density() {
    // 2(1 − ln 2)
    let s = from_cells(4000, |_| 0.0, |r| 1.0 + r);
    let (bd, cross) = diagnostics::bd_entropy(&s, &sv(), &tiny_eps());
    assert!((bd - 0.613_705_638_880_109_38).abs() < 1e-3, "{bd}");
    assert!(cross > 0.0);
}

#[test]
fn sqrt_rho_norms() {
    let four = RadialState::uniform(2, 0.0, 1.0, 16, 4.0, 0.0).unwrap();
    let h = diagnostics::sqrt_rho_h1(&four);
    assert!((h.l2_sq - 2.0).abs() < 1e-15);
    assert_eq!(h.grad_sq, 0.0);
    assert_eq!(sv().hbar(4.0), 4.0);

    let sq = from_cells(64, |_| 0.0, |r| r * r);
    let h = diagnostics::sqrt_rho_h1(&sq);
    assert!((h.grad_sq - 0.5).abs() < 1e-13, "{}", h.grad_sq);
    let hb = diagnostics::hbar_grad_l2(&sq, &sv());
    assert!((hb - 2.0 * h.grad_sq.sqrt()).abs() < 1e-12);
}

#[test]
fn velocity_moments() {
    let rest = RadialState::uniform(2, 0.0, 1.0, 10, 1.0, 0.0).unwrap();
    assert_eq!(diagnostics::log_moment(&rest), 0.0);
    assert_eq!(diagnostics::u_lm_norm(&rest, 0.5), 0.0);
    let one = RadialState::uniform(2, 0.0, 1.0, 10, 1.0, 1.0).unwrap();
    assert!((diagnostics::log_moment(&one) - 0.173_286_795_139_986_33).abs() < 1e-15);
    // m = N/(1−α) = 4
    let l4 = diagnostics::u_lm_norm(&one, 0.5);
    assert!((l4 - one.total_mass().powf(0.25)).abs() < 1e-15);
}

#[test]
fn pressure_norm_of_static_state() {
    let s = RadialState::uniform(2, 0.0, 1.0, 10, 1.0, 0.0).unwrap();
    let q = DiagnosticsConfig::default().pressure_exponent(2);
    let one = diagnostics::pressure_spacetime_norm(&[(0.0, &s), (1.0, &s)], 2.0, q);
    assert!((one - 0.629_960_524_947_436_58).abs() < 1e-15);
    let two = diagnostics::pressure_spacetime_norm(&[(0.0, &s), (2.0, &s)], 2.0, q);
    assert!((two / one - 2f64.powf(1.0 / 1.5)).abs() < 1e-14);
    assert_eq!(DiagnosticsConfig::default().pressure_exponent(3), 5.0 / 3.0);
}

#[test]
fn record_row_matches_header() {
    let s = from_cells(16, |r| r * (1.0 - r), |r| 1.0 + r);
    let p = RegularizationParams::new(2, 0.5, 0.01, 1.0, 0.0, false).unwrap();
    let rec = diagnostics::evaluate(&s, &sv(), &p, &DiagnosticsConfig::default(), &RunTotals::default());
    assert_eq!(rec.csv_row().split(',').count(), CSV_HEADER.split(',').count());
    assert!((rec.mass - s.cell_mass.iter().sum::<f64>()).abs() < 1e-15);
    assert!(rec.diss_exact >= rec.diss_lower - 1e-10 * (1.0 + rec.diss_exact.abs()));
    let mut buf = Vec::new();
    diagnostics::write_csv(&mut buf, &[rec]).unwrap();
    assert!(String::from_utf8(buf).unwrap().starts_with(CSV_HEADER));
}

#[test]
fn subsampling_changes_functionals_little() {
    let rho = |r: f64| 0.6 + 0.3 * (-(r - 0.5f64).powi(2) * 8.0).exp();
    let u = |r: f64| r * (1.0 - r);
    let p = RegularizationParams::new(2, 0.5, 0.01, 1.0, 0.0, false).unwrap();
    let coarse = from_cells(400, u, rho);
    let fine = from_cells(800, u, rho);
    let c = diagnostics::evaluate(&coarse, &sv(), &p, &DiagnosticsConfig::default(), &RunTotals::default());
    let f = diagnostics::evaluate(&fine, &sv(), &p, &DiagnosticsConfig::default(), &RunTotals::default());
    for (a, b) in [
        (c.energy, f.energy),
        (c.diss_exact, f.diss_exact),
        (c.bd_entropy, f.bd_entropy),
        (c.sqrt_rho_h1, f.sqrt_rho_h1),
        (c.log_moment, f.log_moment),
        (c.hbar_grad_l2, f.hbar_grad_l2),
    ] {
        assert!((a - b).abs() <= 1e-3 * b.abs(), "{a} vs {b}");
    }
}
