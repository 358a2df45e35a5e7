use gkdv_core::linop::LinearizedOperator;
use gkdv_core::numerics::{differentiate, integrate, make_grid, Decay, Grid, Parity, Profile};
use gkdv_core::omega::{omega_residual, solve_model_problem};
use gkdv_core::{Error, Nonlinearity};

fn grid() -> Grid {
    make_grid(40.0, 4096).unwrap()
}

fn omega10_sources(op: &LinearizedOperator) -> (Profile, Profile) {
    let g = op.potential().clone();
    let f = differentiate(&g, 1).unwrap().with_decay(Decay::Localized);
    (f, g)
}

#[test]
fn homogeneous_problem_is_trivial() {
    let op = LinearizedOperator::new(&Nonlinearity::pure_power(2), &grid()).unwrap();
    let sp = op.special_solutions().unwrap();
    let z_odd = Profile::zeros(op.grid(), Parity::Odd, Decay::Localized);
    let z_even = Profile::zeros(op.grid(), Parity::Even, Decay::Localized);
    let s = solve_model_problem(&op, &sp, &z_odd, &z_even, 0.0, 0.0).unwrap();
    assert_eq!(s.a, 0.0);
    assert_eq!(s.b, 0.0);
    assert_eq!(s.a_profile.max_abs(), 0.0);
    assert_eq!(s.b_profile.max_abs(), 0.0);
}

#[test]
fn kdv_first_system() {
    let op = LinearizedOperator::new(&Nonlinearity::pure_power(2), &grid()).unwrap();
    let sp = op.special_solutions().unwrap();
    let (f, g) = omega10_sources(&op);
    let s = solve_model_problem(&op, &sp, &f, &g, 0.0, 0.0).unwrap();
    assert!((s.a - 2.0 / 3.0).abs() < 1e-6, "a = {}", s.a);
    assert!((s.b + 2.0).abs() < 1e-6, "b = {}", s.b);
    assert!((s.limit_b() + 2.0).abs() < 1e-6);
    assert!(s.limit_a().abs() < 1e-9);
    let (r1, r2) = omega_residual(&op, &s, &f, &g).unwrap();
    assert!(r1 < 1e-6 && r2 < 1e-6, "residuals {r1:e} {r2:e}");
    // A = -(4/3)Q + ... for KdV: A_{1,0} is localized
    assert!(s.a_profile.check_invariants().is_ok());
    assert_eq!(s.a_profile.parity(), Parity::Even);
    assert_eq!(s.b_profile.parity(), Parity::Odd);
}

#[test]
fn a_matches_ratio_for_first_system() {
    for nl in [
        Nonlinearity::pure_power(2),
        Nonlinearity::gardner(0.1),
        Nonlinearity::epsilon_family(2, 0.05, 4.0, 0.0).unwrap(),
        Nonlinearity::epsilon_family(3, 0.1, 5.0, 0.0).unwrap(),
    ] {
        let op = LinearizedOperator::new(&nl, &grid()).unwrap();
        let sp = op.special_solutions().unwrap();
        let (f, g) = omega10_sources(&op);
        let s = solve_model_problem(&op, &sp, &f, &g, 0.0, 0.0).unwrap();
        let ratio = integrate(op.lambda_q()).unwrap() / op.lambda_q().dot(op.q()).unwrap();
        assert!((s.a - ratio).abs() < 1e-7, "{nl:?}: {} vs {ratio}", s.a);
        let (r1, r2) = omega_residual(&op, &s, &f, &g).unwrap();
        assert!(r1 < 1e-6 && r2 < 1e-6, "{nl:?}: residuals {r1:e} {r2:e}");
    }
}

#[test]
fn mkdv_first_system() {
    let op = LinearizedOperator::new(&Nonlinearity::pure_power(3), &grid()).unwrap();
    let sp = op.special_solutions().unwrap();
    let (f, g) = omega10_sources(&op);
    let s = solve_model_problem(&op, &sp, &f, &g, 0.0, 0.0).unwrap();
    assert!(s.a.abs() < 1e-7);
    assert!((s.b + 2.0).abs() < 1e-6, "b = {}", s.b);
    let expect = op.q().mul(op.q()).scale(-1.0);
    assert!(s.a_profile.sub(&expect).max_abs() < 1e-6);
}

#[test]
fn gamma_and_kappa_enter_as_stated() {
    let op = LinearizedOperator::new(&Nonlinearity::gardner(0.05), &grid()).unwrap();
    let sp = op.special_solutions().unwrap();
    let g = op.q().mul(op.q());
    let f = differentiate(&op.q().mul(op.potential()), 1).unwrap().with_decay(Decay::Localized);
    let base = solve_model_problem(&op, &sp, &f, &g, 0.0, 0.0).unwrap();
    let s = solve_model_problem(&op, &sp, &f, &g, 0.7, -1.3).unwrap();
    assert!((s.limit_a() - 0.7).abs() < 1e-8);
    assert!((s.limit_b() - s.b).abs() < 1e-8);
    let (r1, r2) = omega_residual(&op, &s, &f, &g).unwrap();
    assert!(r1 < 1e-6 && r2 < 1e-6, "residuals {r1:e} {r2:e}");
    let s0 = solve_model_problem(&op, &sp, &f, &g, 0.7, 0.0).unwrap();
    let diff = s.b_profile.sub(&s0.b_profile).sub(&op.dq().scale(-1.3));
    assert!(diff.max_abs() < 1e-12);
    // gamma shifts a by -gamma ∫P / ∫ΛQ Q
    let shift = -0.7 * integrate(&sp.p).unwrap() / op.lambda_q().dot(op.q()).unwrap();
    assert!((s.a - base.a - shift).abs() < 1e-9);
}

#[test]
fn derivatives_are_localized() {
    let op = LinearizedOperator::new(&Nonlinearity::pure_power(2), &grid()).unwrap();
    let sp = op.special_solutions().unwrap();
    let (f, g) = omega10_sources(&op);
    let s = solve_model_problem(&op, &sp, &f, &g, 0.4, 0.0).unwrap();
    for d in s.a_derivs.iter().chain(s.b_derivs.iter()) {
        let v = d.values();
        let scale = d.max_abs().max(1.0);
        assert!(v[0].abs() < 1e-8 * scale && v[v.len() - 1].abs() < 1e-8 * scale);
    }
    // stored jets agree with finite differences of the profiles
    let da = differentiate(&s.a_profile, 1).unwrap();
    assert!(da.sub(&s.a_derivs[0]).max_abs() < 1e-7);
    let d3b = differentiate(&s.b_profile, 3).unwrap();
    assert!(d3b.sub(&s.b_derivs[2]).max_abs() < 1e-5);
}

#[test]
fn rejects_wrong_parity() {
    let op = LinearizedOperator::new(&Nonlinearity::pure_power(2), &grid()).unwrap();
    let sp = op.special_solutions().unwrap();
    let (f, g) = omega10_sources(&op);
    let r = solve_model_problem(&op, &sp, &g, &f, 0.0, 0.0);
    assert!(matches!(r, Err(Error::InvalidArgument(_))));
}
