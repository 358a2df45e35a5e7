use gkdv_core::numerics::{differentiate, integrate, make_grid, Parity};
use gkdv_core::soliton::{lambda_q, soliton_profile, stability_derivative, SolitonShape};
use gkdv_core::{Error, Family, Nonlinearity};

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn eval_f_examples() {
    let kdv = Nonlinearity::pure_power(2);
    assert_eq!(kdv.eval(2.0, 0), 4.0);
    let g = Nonlinearity::gardner(0.1);
    assert!((g.eval(1.0, 1) - 1.7).abs() < 1e-14);
    let e = Nonlinearity::epsilon_family(3, 0.01, 5.0, 0.0).unwrap();
    assert!((e.eval(1.0, 0) - 1.01).abs() < 1e-14);
}

#[test]
fn derivatives_match_finite_differences() {
    let nls = [
        Nonlinearity::gardner(0.2),
        Nonlinearity::epsilon_family(2, 0.1, 4.5, 0.7).unwrap(),
        Nonlinearity::epsilon_family(3, -0.2, 5.0, 0.0).unwrap(),
        Nonlinearity::custom(3, vec![[0.3, 3.5], [-0.1, 6.0]]).unwrap(),
    ];
    let h = 1e-4;
    for nl in &nls {
        for s in [0.3, 1.1, -0.7] {
            for k in 0..4 {
                let fd = (nl.eval(s + h, k) - nl.eval(s - h, k)) / (2.0 * h);
                let exact = nl.eval(s, k + 1);
                assert!((fd - exact).abs() < 1e-6 * (1.0 + exact.abs()), "{nl:?} s={s} k={k}");
            }
            let fd = (nl.primitive(s + h) - nl.primitive(s - h)) / (2.0 * h);
            assert!((fd - nl.eval(s, 0)).abs() < 1e-7);
        }
        assert_eq!(nl.eval(0.0, 0), 0.0);
        assert_eq!(nl.eval(0.0, 1), 0.0);
    }
}

#[test]
fn primitive_examples() {
    assert!((Nonlinearity::pure_power(2).primitive(3.0) - 9.0).abs() < 1e-13);
    assert!((Nonlinearity::pure_power(3).primitive(2.0) - 4.0).abs() < 1e-13);
    assert!((Nonlinearity::gardner(0.2).primitive(1.0) - (1.0 / 3.0 - 0.05)).abs() < 1e-14);
}

#[test]
fn epsilon_family_quadratic_uses_mu_of_epsilon() {
    // mu(eps) = mu_hat * eps^{1/(p-2)}: p = 4, eps = 0.04, mu_hat = 2 gives mu = 0.4
    let nl = Nonlinearity::epsilon_family(2, 0.04, 4.0, 2.0).unwrap();
    let s: f64 = 0.5;
    let expect = s * s + 0.4 * s.powi(3) + 0.04 * s.powi(4);
    assert!((nl.eval(s, 0) - expect).abs() < 1e-14);
}

#[test]
fn json_schema_round_trip() {
    let nl = Nonlinearity::epsilon_family(2, 0.1, 4.0, 0.5).unwrap();
    let text = serde_json::to_string(&nl).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in ["m", "epsilon", "mu_hat", "p", "family"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["family"], "epsilon_family");
    let back: Nonlinearity = serde_json::from_str(&text).unwrap();
    assert_eq!(back, nl);
    let parsed: Nonlinearity = serde_json::from_str(r#"{"m":2,"epsilon":0.0,"mu_hat":0.2,"p":4,"family":"gardner"}"#).unwrap();
    assert_eq!(parsed.family, Family::Gardner);
    assert!(parsed.validate().is_ok());
    let bad: Nonlinearity = serde_json::from_str(r#"{"m":4,"epsilon":0.0,"mu_hat":0.0,"p":4,"family":"pure_power"}"#).unwrap();
    assert!(matches!(bad.validate(), Err(Error::InvalidArgument(_))));
}

#[test]
fn amplitudes() {
    let g = make_grid(40.0, 4097).unwrap();
    let kdv = soliton_profile(&Nonlinearity::pure_power(2), 1.0, &g).unwrap();
    assert!((kdv.amplitude - 1.5).abs() < 1e-14);
    let mkdv = soliton_profile(&Nonlinearity::pure_power(3), 1.0, &g).unwrap();
    assert!((mkdv.amplitude - 2f64.sqrt()).abs() < 1e-14);
    let gz = soliton_profile(&Nonlinearity::gardner(0.0), 0.5, &g).unwrap();
    assert!((gz.amplitude - 0.75).abs() < 1e-14);
}

#[test]
fn solitons_satisfy_both_equations() {
    let cases = [
        (Nonlinearity::pure_power(2), 1.0),
        (Nonlinearity::pure_power(3), 0.25),
        (Nonlinearity::gardner(0.15), 1.0),
        (Nonlinearity::gardner(-0.3), 1.0),
        (Nonlinearity::epsilon_family(2, 0.2, 4.0, 0.0).unwrap(), 1.0),
        (Nonlinearity::epsilon_family(3, 0.1, 5.0, 0.0).unwrap(), 1.0),
        (Nonlinearity::epsilon_family(3, -0.1, 4.5, 0.0).unwrap(), 0.5),
        (Nonlinearity::custom(2, vec![[0.05, 3.5]]).unwrap(), 1.0),
    ];
    for (nl, c) in cases {
        let c: f64 = c;
        let g = make_grid(40.0 / c.sqrt(), 8193).unwrap();
        let q = soliton_profile(&nl, c, &g).unwrap();
        assert_eq!(q.profile.parity(), Parity::Even);
        assert!(q.profile.values().iter().all(|&v| v > 0.0));
        let d2 = differentiate(&q.profile, 2).unwrap();
        let d1 = differentiate(&q.profile, 1).unwrap();
        let qv = q.profile.values();
        let r2: Vec<f64> = qv.iter().map(|&v| c * v - nl.eval(v, 0)).collect();
        assert!(sup_diff(d2.values(), &r2) < 1e-7, "{nl:?}: second order");
        let lhs: Vec<f64> = d1.values().iter().map(|v| v * v).collect();
        let rhs: Vec<f64> = qv.iter().map(|&v| c * v * v - 2.0 * nl.primitive(v)).collect();
        assert!(sup_diff(&lhs, &rhs) < 1e-7, "{nl:?}: first integral");
    }
}

#[test]
fn turning_point_path_matches_closed_forms() {
    for m in [2u32, 3] {
        for c in [0.25, 1.0] {
            let closed = SolitonShape::new(&Nonlinearity::pure_power(m), c).unwrap();
            let general = SolitonShape::from_turning_point(&Nonlinearity::pure_power(m), c).unwrap();
            let mut err: f64 = 0.0;
            let mut derr: f64 = 0.0;
            for i in 0..4000 {
                let x = -60.0 + 0.03 * i as f64;
                err = err.max((closed.value(x) - general.value(x)).abs());
                derr = derr.max((closed.slope(x) - general.slope(x)).abs());
            }
            assert!(err < 1e-8, "m={m} c={c} err={err}");
            assert!(derr < 1e-8, "m={m} c={c} slope err={derr}");
        }
    }
    let closed = SolitonShape::new(&Nonlinearity::gardner(0.15), 1.0).unwrap();
    let general = SolitonShape::from_turning_point(&Nonlinearity::gardner(0.15), 1.0).unwrap();
    for i in 0..200 {
        let x = -20.0 + 0.2 * i as f64;
        assert!((closed.value(x) - general.value(x)).abs() < 1e-8);
    }
}

#[test]
fn gardner_converges_linearly_to_kdv() {
    let kdv = SolitonShape::new(&Nonlinearity::pure_power(2), 1.0).unwrap();
    let sup = |mu: f64| {
        let g = SolitonShape::new(&Nonlinearity::gardner(mu), 1.0).unwrap();
        (0..400).map(|i| -20.0 + 0.1 * i as f64).map(|x| (g.value(x) - kdv.value(x)).abs()).fold(0.0, f64::max)
    };
    let ratio = sup(0.02) / sup(0.01);
    assert!((ratio - 2.0).abs() < 0.05, "ratio {ratio}");
}

#[test]
fn amplitude_increases_with_speed() {
    for m in [2u32, 3] {
        let nl = Nonlinearity::pure_power(m);
        let mut last = 0.0;
        for k in 1..20 {
            let a = SolitonShape::new(&nl, 0.1 * k as f64).unwrap().amplitude();
            assert!(a > last);
            last = a;
        }
    }
}

#[test]
fn inadmissible_speeds() {
    let g = make_grid(40.0, 1025).unwrap();
    assert!(matches!(soliton_profile(&Nonlinearity::gardner(0.2), 1.2, &g), Err(Error::InvalidArgument(_))));
    assert!(matches!(soliton_profile(&Nonlinearity::pure_power(2), -1.0, &g), Err(Error::InvalidArgument(_))));
    // s^3 - s^5: c q^2 = q^4/2 - q^6/3 has no positive root once c > 3/16
    let nl = Nonlinearity::custom(3, vec![[-1.0, 5.0]]).unwrap();
    assert!(SolitonShape::new(&nl, 0.1).is_ok());
    assert!(matches!(SolitonShape::new(&nl, 0.5), Err(Error::NoSoliton(_))));
}

#[test]
fn lambda_q_examples() {
    let g = make_grid(40.0, 4097).unwrap();
    let kdv = Nonlinearity::pure_power(2);
    let lq = lambda_q(&kdv, &g).unwrap();
    let q = SolitonShape::new(&kdv, 1.0).unwrap();
    let expect: Vec<f64> = g.xs().map(|x| q.value(x) + 0.5 * x * q.slope(x)).collect();
    assert!(sup_diff(lq.values(), &expect) < 1e-8);
    assert!((integrate(&lq).unwrap() - 3.0).abs() < 1e-7);

    let mkdv = Nonlinearity::pure_power(3);
    let lq = lambda_q(&mkdv, &g).unwrap();
    let q = SolitonShape::new(&mkdv, 1.0).unwrap();
    let expect: Vec<f64> = g.xs().map(|x| 0.5 * (x * q.slope(x) + q.value(x))).collect();
    assert!(sup_diff(lq.values(), &expect) < 1e-8);
    assert!(integrate(&lq).unwrap().abs() < 1e-7);

    // Gardner closed form
    let mu = 0.1;
    let lq = lambda_q(&Nonlinearity::gardner(mu), &g).unwrap();
    let q = SolitonShape::new(&Nonlinearity::gardner(mu), 1.0).unwrap();
    let rho2 = 1.0 - 4.5 * mu;
    let expect: Vec<f64> = g
        .xs()
        .map(|x| {
            let v = q.value(x);
            0.5 * (x * q.slope(x) + 2.0 * v) + 3.0 * mu / (4.0 * rho2) * (3.0 * v - v * v)
        })
        .collect();
    assert!(sup_diff(lq.values(), &expect) < 1e-8);
}

#[test]
fn stability_derivative_examples() {
    assert!((stability_derivative(&Nonlinearity::pure_power(2), 1.0).unwrap() - 9.0).abs() < 1e-6);
    assert!((stability_derivative(&Nonlinearity::pure_power(3), 1.0).unwrap() - 2.0).abs() < 1e-6);
    assert!(stability_derivative(&Nonlinearity::gardner(0.2), 1.0).unwrap() > 0.0);
    assert!(matches!(stability_derivative(&Nonlinearity::gardner(0.2), 10.0 / 9.0), Err(Error::InvalidArgument(_))));
}
