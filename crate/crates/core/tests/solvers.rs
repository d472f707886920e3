use kdv_momentum::experiments::{build_coupled_initial_data, InitialProfile, ProfileShape};
use kdv_momentum::kdv::{self, KdVState, Soliton};
use kdv_momentum::peregrine::{self, PeregrineState};
use kdv_momentum::waterwave::{VerticalGrid, WaterWaveSolver};
use kdv_momentum::{Error, Grid1D, ModelParams, RealField};

fn params(eps: f64, mu: f64) -> ModelParams {
    ModelParams::new(eps, mu).unwrap()
}

#[test]
fn soliton_keeps_shape_and_speed() {
    let p = params(0.04, 0.04);
    let grid = Grid1D::new(80.0, 512).unwrap();
    let sol = Soliton {
        amplitude: 0.5,
        center: 30.0,
    };
    let end = kdv::integrate(&KdVState::new(sol.profile(&grid, &p, 0.0)), 2e-3, 250, &p).unwrap();
    assert!((end.t - 0.5).abs() < 1e-12);
    let err = (&end.eta - &sol.profile(&grid, &p, 0.5)).norm_linf();
    assert!(err < 1e-7, "{err:e}");
}

#[test]
fn kdv_time_stepping_is_fourth_order() {
    let p = params(0.08, 0.08);
    let grid = Grid1D::new(80.0, 256).unwrap();
    let eta0 = InitialProfile::default().sample(&grid, &p).unwrap();
    let run = |dt: f64| kdv::integrate(&KdVState::new(eta0.clone()), dt, (1.0 / dt).round() as usize, &p).unwrap().eta;
    let (a, b, c) = (run(0.04), run(0.02), run(0.01));
    let ratio = (&a - &b).norm_linf() / (&b - &c).norm_linf();
    assert!((12.0..20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn centre_of_mass_moves_with_the_mass_flux() {
    // eta_t + (mass flux)_x = 0, so d/dt int x eta = int (mass flux)
    let p = params(0.05, 0.05);
    let grid = Grid1D::new(80.0, 512).unwrap();
    let eta0 = InitialProfile::default().sample(&grid, &p).unwrap();
    let x = RealField::from_fn(&grid, |x| x);
    let first_moment = |f: &RealField| x.zip_map(f, |x, e| x * e).integral();
    let dt = 1e-3;
    let start = KdVState::new(eta0.clone());
    let mid = kdv::integrate(&start, dt / 2.0, 1, &p).unwrap();
    let end = kdv::integrate(&start, dt, 1, &p).unwrap();
    let rate = (first_moment(&end.eta) - first_moment(&eta0)) / dt;
    let flux = kdv::mass_flux(&mid.eta, &p).integral();
    assert!((rate - flux).abs() < 1e-7 * flux.abs(), "{rate} vs {flux}");
}

#[test]
fn kdv_invariants_hold_over_long_runs() {
    let p = params(0.04, 0.04);
    let grid = Grid1D::new(80.0, 256).unwrap();
    let profile = InitialProfile {
        shape: ProfileShape::Sech2,
        ..InitialProfile::default()
    };
    let eta0 = profile.sample(&grid, &p).unwrap();
    let (m0, l0, h0) = kdv::conserved_integrals(&eta0, &p).unwrap();
    let end = kdv::integrate(&KdVState::new(eta0), 0.01, 500, &p).unwrap();
    let (m1, l1, h1) = kdv::conserved_integrals(&end.eta, &p).unwrap();
    assert!(((m1 - m0) / m0).abs() < 1e-12);
    assert!(((l1 - l0) / l0).abs() < 1e-9);
    assert!(((h1 - h0) / h0).abs() < 1e-9);
}

#[test]
fn peregrine_conserves_mass_and_momentum() {
    let p = params(0.08, 0.08);
    let grid = Grid1D::new(80.0, 256).unwrap();
    let xi = InitialProfile::default().sample(&grid, &p).unwrap();
    let s0 = PeregrineState::new(xi.clone(), kdv::v_kdv(&xi, &p));
    let s1 = peregrine::integrate(&s0, 0.01, 500, &p).unwrap();
    let (a0, b0) = s0.invariants(&p);
    let (a1, b1) = s1.invariants(&p);
    assert!(((a1 - a0) / a0).abs() < 1e-12);
    assert!(((b1 - b0) / b0).abs() < 1e-12);
}

#[test]
fn peregrine_rejects_dry_states() {
    let p = params(0.2, 0.1);
    let grid = Grid1D::new(80.0, 128).unwrap();
    let xi = RealField::from_fn(&grid, |x| -6.0 * (-(x - 40.0).powi(2)).exp());
    let s = PeregrineState::new(xi, RealField::zeros(&grid));
    assert!(matches!(peregrine::step(&s, 0.01, &p), Err(Error::DepthViolation { .. })));
}

#[test]
fn water_wave_energy_and_mass_are_conserved() {
    let p = params(0.04, 0.04);
    let grid = Grid1D::new(80.0, 256).unwrap();
    let solver = WaterWaveSolver::new(&grid, &p, &VerticalGrid::new(16).unwrap());
    let data = build_coupled_initial_data(&InitialProfile::default(), &solver).unwrap();
    let s0 = data.waterwave();
    let (e0, m0) = (solver.energy(&s0).unwrap(), s0.zeta.integral());
    let s1 = solver.integrate(&s0, 0.01, 200).unwrap();
    assert!((s1.t - 2.0).abs() < 1e-12);
    assert_eq!(s1.phi_slope, s0.phi_slope);
    let (e1, m1) = (solver.energy(&s1).unwrap(), s1.zeta.integral());
    assert!(((m1 - m0) / m0).abs() < 1e-10, "mass {m0} -> {m1}");
    assert!(((e1 - e0) / e0).abs() < 1e-7, "energy {e0} -> {e1}");
}
