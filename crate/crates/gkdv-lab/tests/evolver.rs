use gkdv_core::soliton::SolitonShape;
use gkdv_core::Nonlinearity;
use gkdv_lab::evolver::{conserved, dealias_fraction, evolve, monotonicity_g, psi, psi_prime, psi_third, Evolver, EvolverConfig, Integrator};
use gkdv_lab::spectral::{PeriodicGrid, Spectral};
use gkdv_lab::LabError;

fn config(n_modes: usize, dt: f64) -> EvolverConfig {
    EvolverConfig { domain_half_length: 50.0, n_modes, dt, dealias: true, integrator: Integrator::Etdrk4, frame_speed: 0.0 }
}

fn sampled(nl: &Nonlinearity, c: f64, sign: f64, x0: f64, grid: &PeriodicGrid) -> Vec<f64> {
    let q = SolitonShape::new(nl, c).unwrap();
    grid.xs().iter().map(|&x| sign * q.value(x - x0)).collect()
}

/// L² distance after transport to t = 10.
fn translation_error(nl: &Nonlinearity, sign: f64, cfg: &EvolverConfig) -> f64 {
    let grid = cfg.grid().unwrap();
    let c = 1.0;
    let u0 = sampled(nl, c, sign, -10.0, &grid);
    let run = evolve(nl, &u0, 10.0, cfg, &[]).unwrap();
    let end = run.states.last().unwrap();
    assert_eq!(end.t, 10.0);
    let exact = sampled(nl, c, sign, -10.0 + 10.0 * c, &grid);
    let diff: Vec<f64> = end.u.iter().zip(&exact).map(|(a, b)| a - b).collect();
    Spectral::new(grid).l2_norm(&diff)
}

#[test]
fn kdv_soliton_translates() {
    let err = translation_error(&Nonlinearity::pure_power(2), 1.0, &config(1024, 0.005));
    assert!(err < 1e-6, "{err:e}");
}

#[test]
fn negative_mkdv_soliton_translates() {
    let nl = Nonlinearity::pure_power(3);
    let err = translation_error(&nl, -1.0, &config(1024, 0.0025));
    assert!(err < 1e-6, "{err:e}");
    // u ↦ −u is a symmetry of the cubic equation
    let pos = translation_error(&nl, 1.0, &config(1024, 0.0025));
    assert!((err - pos).abs() < 1e-12);
}

#[test]
fn fourth_order_in_time() {
    let nl = Nonlinearity::pure_power(2);
    let coarse = translation_error(&nl, 1.0, &config(1024, 0.02));
    let fine = translation_error(&nl, 1.0, &config(1024, 0.01));
    assert!(coarse / fine >= 8.0, "ratio {}", coarse / fine);
}

#[test]
fn integrating_factor_agrees_with_etd() {
    let nl = Nonlinearity::pure_power(2);
    let mut cfg = config(256, 0.0);
    let h = cfg.grid().unwrap().spacing();
    cfg.dt = 0.4 * h.powi(3);
    cfg.integrator = Integrator::Ifrk4;
    let grid = cfg.grid().unwrap();
    let u0 = sampled(&nl, 0.5, 1.0, 0.0, &grid);
    let a = evolve(&nl, &u0, 1.0, &cfg, &[]).unwrap();
    cfg.integrator = Integrator::Etdrk4;
    let b = evolve(&nl, &u0, 1.0, &cfg, &[]).unwrap();
    let diff = a.states[0].u.iter().zip(&b.states[0].u).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff:e}");
}

#[test]
fn mass_of_half_soliton_is_conserved() {
    let nl = Nonlinearity::pure_power(2);
    let cfg = config(1024, 0.005);
    let grid = cfg.grid().unwrap();
    let u0: Vec<f64> = sampled(&nl, 1.0, 0.5, 0.0, &grid);
    let times: Vec<f64> = (1..=10).map(f64::from).collect();
    let run = evolve(&nl, &u0, 10.0, &cfg, &times).unwrap();
    assert_eq!(run.states.len(), 10);
    let (m0, e0) = conserved(&nl, &Spectral::new(grid), &u0);
    for s in &run.states {
        assert!(((s.mass - m0) / m0).abs() < 1e-9, "mass drift at t = {}", s.t);
        assert!(((s.energy - e0) / e0).abs() < 1e-8, "energy drift at t = {}", s.t);
    }
}

#[test]
fn frame_speed_moves_the_soliton() {
    // in a frame moving at c the soliton Q_c stays put
    let nl = Nonlinearity::pure_power(2);
    let mut cfg = config(512, 0.01);
    cfg.frame_speed = 0.5;
    let grid = cfg.grid().unwrap();
    let u0 = sampled(&nl, 0.5, 1.0, 0.0, &grid);
    let run = evolve(&nl, &u0, 5.0, &cfg, &[]).unwrap();
    let drift = run.states[0].u.iter().zip(&u0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-7, "{drift:e}");
}

#[test]
fn conserved_values_of_the_soliton() {
    let spec = Spectral::new(PeriodicGrid::new(40.0, 2048).unwrap());
    let kdv = Nonlinearity::pure_power(2);
    let (m, e) = conserved(&kdv, &spec, &sampled(&kdv, 1.0, 1.0, 0.0, &spec.grid));
    assert!((m - 6.0).abs() < 1e-10, "{m}");
    assert!(e < 0.0);
    // E(Q) = 3/5 − 12/5 for KdV
    assert!((e + 1.8).abs() < 1e-10, "{e}");
    let mkdv = Nonlinearity::pure_power(3);
    let (m, _) = conserved(&mkdv, &spec, &sampled(&mkdv, 1.0, 1.0, 0.0, &spec.grid));
    assert!((m - 4.0).abs() < 1e-10, "{m}");
}

#[test]
fn psi_properties() {
    for kappa in [1.0, 4.0, 10.0] {
        for i in -400..=400 {
            let x = 0.1 * f64::from(i);
            assert!((psi(-x, kappa) - (1.0 - psi(x, kappa))).abs() < 1e-12);
            assert!(psi_third(x, kappa).abs() <= psi_prime(x, kappa) / (kappa * kappa) * (1.0 + 1e-12));
            let h = 1e-4;
            let fd = (psi(x + h, kappa) - psi(x - h, kappa)) / (2.0 * h);
            assert!((fd - psi_prime(x, kappa)).abs() < 1e-8);
        }
        assert!((psi(0.0, kappa) - 0.5).abs() < 1e-15);
    }
}

#[test]
fn monotonicity_functional_of_a_lone_soliton() {
    // a soliton well right of the cut-off contributes nothing; 𝓖 is then
    // the (constant) weighted energy of the empty region
    let nl = Nonlinearity::pure_power(2);
    let cfg = config(512, 0.01);
    let grid = cfg.grid().unwrap();
    let u0 = sampled(&nl, 1.0, 1.0, 0.0, &grid);
    let run = evolve(&nl, &u0, 4.0, &cfg, &[1.0, 2.0, 3.0]).unwrap();
    let spec = Spectral::new(grid);
    let g = monotonicity_g(&nl, &spec, &run.states, 1.0, 0.1, |t| t - 30.0);
    assert_eq!(g.len(), 4);
    for v in &g {
        assert!(v.abs() < 1e-6, "{v:e}");
    }
    // centred on the soliton, 𝓖 picks up half of a M(Q) + E(Q)
    let g = monotonicity_g(&nl, &spec, &run.states, 1.0, 0.1, |t| t);
    let (m, e) = conserved(&nl, &spec, &u0);
    for v in &g {
        assert!((v - 0.5 * (0.5 * 0.1 * m + e)).abs() < 1e-3, "{v}");
    }
}

#[test]
fn dealias_rule() {
    assert_eq!(dealias_fraction(&Nonlinearity::pure_power(2)), 2.0 / 3.0);
    assert_eq!(dealias_fraction(&Nonlinearity::epsilon_family(3, 0.1, 6.0, 0.0).unwrap()), 2.0 / 3.0);
    assert_eq!(dealias_fraction(&Nonlinearity::epsilon_family(2, 0.1, 8.0, 0.0).unwrap()), 0.5);
}

#[test]
fn config_validation() {
    let nl = Nonlinearity::pure_power(2);
    assert!(matches!(config(100, 0.01).validate(), Err(LabError::InvalidArgument(_))));
    assert!(matches!(config(128, 0.01).validate(), Err(LabError::InvalidArgument(_))));
    assert!(config(256, 0.0).validate().is_err());
    let mut c = config(1024, 0.01);
    c.integrator = Integrator::Ifrk4;
    assert!(matches!(c.validate(), Err(LabError::InvalidArgument(_))));
    assert!(Evolver::new(&nl, &c).is_err());
}

#[test]
fn run_preconditions() {
    let nl = Nonlinearity::pure_power(2);
    let cfg = config(256, 0.01);
    let grid = cfg.grid().unwrap();
    let mut ev = Evolver::new(&nl, &cfg).unwrap();
    // not periodic
    let ramp: Vec<f64> = grid.xs().iter().map(|x| 0.01 * x).collect();
    assert!(matches!(ev.run(&ramp, &[1.0]), Err(LabError::InvalidArgument(_))));
    let u0 = sampled(&nl, 1.0, 1.0, 0.0, &grid);
    assert!(matches!(ev.run(&u0, &[2.0, 1.0]), Err(LabError::InvalidArgument(_))));
    assert!(matches!(ev.run(&u0[..10], &[1.0]), Err(LabError::InvalidArgument(_))));
}

#[test]
fn seam_proximity_is_reported() {
    let nl = Nonlinearity::pure_power(2);
    let cfg = config(512, 0.01);
    let grid = cfg.grid().unwrap();
    let u0 = sampled(&nl, 1.0, 1.0, 20.0, &grid);
    let run = evolve(&nl, &u0, 22.0, &cfg, &[2.0]).unwrap();
    assert_eq!(run.warnings.len(), 1, "{:?}", run.warnings);
    assert!(run.warnings[0].starts_with("t = 22"));
}

#[test]
fn blow_up_is_a_divergence() {
    // far too long a step for this amplitude
    let nl = Nonlinearity::pure_power(2);
    let mut cfg = config(512, 0.5);
    cfg.dealias = false;
    let grid = cfg.grid().unwrap();
    let u0: Vec<f64> = grid.xs().iter().map(|x| 30.0 / (2.0 * x).cosh().powi(2)).collect();
    let times: Vec<f64> = (1..=20).map(|i| 0.5 * f64::from(i)).collect();
    match evolve(&nl, &u0, 10.0, &cfg, &times) {
        Err(LabError::Divergence { last_good, t, .. }) => {
            let s = last_good.expect("a finite state precedes the blow-up");
            assert!(s.t < t);
            assert!(s.u.iter().all(|v| v.is_finite()));
        }
        other => panic!("expected divergence, got {:?}", other.map(|r| r.states.len())),
    }
}
