use gkdv_core::approx::{interaction_time, ApproxSolution, Hermite, Variant};
use gkdv_core::cascade::{solve_cascade, CascadeSolution};
use gkdv_core::numerics::{make_grid, Parity};
use gkdv_core::soliton::SolitonShape;
use gkdv_core::{Error, Nonlinearity};

fn cubic_family() -> CascadeSolution {
    solve_cascade(&Nonlinearity::epsilon_family(3, 0.01, 4.0, 0.0).unwrap()).unwrap()
}

fn quartic_family() -> CascadeSolution {
    solve_cascade(&Nonlinearity::epsilon_family(2, 0.2, 4.0, 0.0).unwrap()).unwrap()
}

fn sample_points(a: &ApproxSolution) -> Vec<f64> {
    let reach = a.t_c + 30.0 / a.c.sqrt();
    (0..=801).map(|i| -reach + 2.0 * reach * i as f64 / 801.0).collect()
}

#[test]
fn interaction_time_exponent() {
    assert_eq!(interaction_time(1.0), 1.0);
    let c: f64 = 0.01;
    assert!((interaction_time(c) - c.powf(-0.51)).abs() < 1e-12);
}

#[test]
fn symmetric_variant_is_point_symmetric() {
    let a = ApproxSolution::new(cubic_family(), 0.02, Variant::Symmetric).unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.0, 0.3 * a.t_c, -a.t_c, 1.7 * a.t_c] {
        for &x in &sample_points(&a) {
            worst = worst.max((a.value(t, x) - a.value(-t, -x)).abs());
        }
    }
    assert!(worst <= 1e-15, "asymmetry {worst:e}");
}

#[test]
fn modified_variant_breaks_symmetry_through_the_defect_term() {
    let cas = quartic_family();
    let d = cas.defect;
    assert!(d.abs() > 0.1);
    let sym = ApproxSolution::new(cas.clone(), 0.05, Variant::Symmetric).unwrap();
    let hat = ApproxSolution::new(cas, 0.05, Variant::Modified).unwrap();
    let mut worst: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for t in [0.5 * hat.t_c, hat.t_c] {
        for &x in &sample_points(&hat) {
            let broken = hat.value(t, x) - hat.value(-t, -x);
            let extra = hat.value(t, x) - sym.value(t, x);
            // the extra term is odd in (t, x), so it accounts for all of the asymmetry
            worst = worst.max((broken - 2.0 * extra).abs());
            largest = largest.max(broken.abs());
        }
    }
    assert!(largest > 1e-3, "û looks symmetric: {largest:e}");
    assert!(worst < 1e-13, "{worst:e}");
}

#[test]
fn defect_term_far_from_the_big_soliton() {
    // once the small soliton is far behind, 1 + P̄(y) = 1 and û − ũ = −d (Q_c²)'
    let cas = quartic_family();
    let c = 0.05;
    let d = cas.defect;
    let sym = ApproxSolution::new(cas.clone(), c, Variant::Symmetric).unwrap();
    let hat = ApproxSolution::new(cas, c, Variant::Modified).unwrap();
    let small = SolitonShape::new(&Nonlinearity::epsilon_family(2, 0.2, 4.0, 0.0).unwrap(), c).unwrap();
    let t = 60.0 / (1.0 - c);
    for s in [-3.0, -1.0, 0.5, 2.0] {
        let x = s - (1.0 - c) * t;
        let (q, q1) = small.value_and_slope(s);
        let expected = -d * 2.0 * q * q1;
        let got = hat.value(t, x) - sym.value(t, x);
        assert!((got - expected).abs() < 1e-12, "s = {s}: {got} vs {expected}");
    }
}

#[test]
fn alpha_is_odd_and_tends_to_half_delta1() {
    let a = ApproxSolution::new(cubic_family(), 0.01, Variant::Symmetric).unwrap();
    let (beta0, alpha0) = a.beta_alpha(0.0);
    assert_eq!(alpha0, 0.0);
    assert!(beta0.is_finite());
    for s in [0.3, 4.0, 25.0] {
        assert_eq!(a.beta_alpha(s).1, -a.beta_alpha(-s).1);
    }
    let half = 0.5 * a.shifts().delta1;
    let far = a.beta_alpha(500.0).1;
    assert!((far - half).abs() < 1e-12 * half.abs().max(1.0));

    // Δ₁ against a direct trapezoid sum of β
    let (reach, n) = (600.0, 600_000);
    let h = 2.0 * reach / n as f64;
    let total: f64 = (0..=n).map(|i| a.beta_alpha(-reach + i as f64 * h).0 * if i == 0 || i == n { 0.5 } else { 1.0 }).sum::<f64>() * h;
    assert!((total - a.shifts().delta1).abs() < 1e-9 * total.abs(), "{total} vs {}", a.shifts().delta1);
}

#[test]
fn alpha_scales_like_sqrt_c_for_kdv() {
    let cas = solve_cascade(&Nonlinearity::pure_power(2)).unwrap();
    let sup = |c: f64| {
        let a = ApproxSolution::new(cas.clone(), c, Variant::Symmetric).unwrap();
        (0..4000).map(|i| a.beta_alpha(i as f64 * 0.1 / c.sqrt()).1.abs()).fold(0.0, f64::max)
    };
    let ratio = sup(0.01) / sup(0.0025);
    assert!((ratio - 2.0).abs() < 0.1, "sup|α| ratio {ratio}");
}

#[test]
fn delta1_leading_term() {
    // KdV: ∫Q_c = 6√c and a₁,₀ = 2/3, so Δ₁ = 4√c + O(c^{3/2})
    let cas = solve_cascade(&Nonlinearity::pure_power(2)).unwrap();
    let a10 = cas.get(1, 0).unwrap().a;
    let mut scaled = Vec::new();
    for c in [0.01, 0.0025] {
        let a = ApproxSolution::new(cas.clone(), c, Variant::Symmetric).unwrap();
        let lead = a10 * 6.0 * f64::sqrt(c);
        scaled.push((a.shifts().delta1 - lead) / c.powf(1.5));
    }
    for s in &scaled {
        assert!(s.abs() < 20.0, "{scaled:?}");
    }
    assert!((scaled[0] - scaled[1]).abs() < 0.2 * scaled[1].abs().max(1.0), "{scaled:?}");
}

#[test]
fn delta2_kdv_and_cubic() {
    let cas = solve_cascade(&Nonlinearity::pure_power(2)).unwrap();
    let bt = cas.b_tilde_11;
    for c in [0.01, 0.001] {
        let s = ApproxSolution::new(cas.clone(), c, Variant::Symmetric).unwrap().shifts();
        assert!((s.delta2 + 4.0 - 2.0 * c * bt).abs() < 1e-6);
        assert!((s.delta2 + 4.0).abs() < 10.0 * c, "Δ₂ = {}", s.delta2);
    }
    let cas = cubic_family();
    let b10 = cas.get(1, 0).unwrap().b;
    let s = ApproxSolution::new(cas, 0.01, Variant::Symmetric).unwrap().shifts();
    assert_eq!(s.delta2, 2.0 * b10);
}

#[test]
fn hermite_reproduces_smooth_functions() {
    let g = make_grid(3.0, 61).unwrap();
    let xs: Vec<f64> = g.xs().collect();
    let jets = [
        xs.iter().map(|x| x.sin()).collect::<Vec<_>>(),
        xs.iter().map(|x| x.cos()).collect(),
        xs.iter().map(|x| -x.sin()).collect(),
        xs.iter().map(|x| -x.cos()).collect(),
    ];
    let h = Hermite::new(&g, [&jets[0], &jets[1], &jets[2], &jets[3]], Parity::Odd, (-0.5, 0.5));
    let mut worst: f64 = 0.0;
    for i in 0..=6000 {
        let x = -2.999 + 5.998 * i as f64 / 6000.0;
        worst = worst.max((h.eval(x) - x.sin()).abs());
    }
    // septic interpolation at h = 0.1
    assert!(worst < 1e-11, "{worst:e}");
    assert_eq!(h.eval(1.234), -h.eval(-1.234));
    assert_eq!(h.eval(10.0), 0.5);
    assert_eq!(h.eval(-10.0), -0.5);
    for x in [0.0, 0.1, 1.5, -2.9] {
        let node = h.eval(x);
        assert!((node - f64::sin(x)).abs() < 1e-15, "node {x}");
    }
}

#[test]
fn soliton_power_identity() {
    // (Q_c^k)'' = c k² Q_c^k − 2k(k−1) Q_c^{k−2} F(Q_c) − k f(Q_c) Q_c^{k−1}
    for nl in [Nonlinearity::gardner(0.15), Nonlinearity::epsilon_family(2, 0.2, 4.0, 0.0).unwrap(), Nonlinearity::epsilon_family(3, 0.1, 5.0, 0.0).unwrap()] {
        let c = 0.3;
        let q = SolitonShape::new(&nl, c).unwrap();
        let h = 1e-3;
        let mut worst: f64 = 0.0;
        for k in 1..=4 {
            let pk = |x: f64| q.value(x).powi(k);
            for i in 0..200 {
                let x = -10.0 + 0.1 * i as f64 + 0.013;
                let lhs = (pk(x + h) - 2.0 * pk(x) + pk(x - h)) / (h * h);
                let v = q.value(x);
                let kf = f64::from(k);
                let rhs = c * kf * kf * v.powi(k) - 2.0 * kf * (kf - 1.0) * v.powi(k - 2) * nl.primitive(v) - kf * nl.eval(v, 0) * v.powi(k - 1);
                worst = worst.max((lhs - rhs).abs());
            }
        }
        assert!(worst < 1e-6, "{nl:?}: {worst:e}");
    }
}

#[test]
fn product_with_localized_profile_decays_past_interaction() {
    // ‖Q(y)² Q_c^k(y_c)‖ / ‖Q_c^k‖ decays like exp(−k√c(1−c)t) once the
    // small soliton has left the big one
    let cas = quartic_family();
    let c = 0.05;
    let a = ApproxSolution::new(cas.clone(), c, Variant::Symmetric).unwrap();
    let big = a.big_soliton().clone();
    let small = a.small_soliton().clone();
    let ratio = |t: f64, k: i32| {
        let (lo, hi, n) = (-(1.0 - c) * t - 80.0 / c.sqrt(), 40.0, 40_000);
        let h = (hi - lo) / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..=n {
            let x = lo + i as f64 * h;
            let yc = x + (1.0 - c) * t;
            let y = x - a.beta_alpha(yc).1;
            let qk = small.value(yc).powi(k);
            num += (big.value(y).powi(2) * qk).powi(2);
            den += qk * qk;
        }
        (num / den).sqrt()
    };
    for k in [1, 2] {
        let (t1, t2) = (5.0 * a.t_c, 10.0 * a.t_c);
        let rate = (ratio(t1, k) / ratio(t2, k)).ln() / (t2 - t1);
        let expected = f64::from(k) * c.sqrt() * (1.0 - c);
        assert!((rate - expected).abs() < 0.05 * expected, "k = {k}: rate {rate}, expected {expected}");
        assert!(ratio(t2, k) < ratio(a.t_c, k));
    }
}

#[test]
fn rejects_bad_speed_ratio() {
    let cas = cubic_family();
    for c in [0.0, 1.0, -0.1, f64::NAN] {
        assert!(matches!(ApproxSolution::new(cas.clone(), c, Variant::Symmetric), Err(Error::InvalidArgument(_))), "c = {c}");
    }
}

#[test]
fn time_derivative_matches_transport_far_from_the_collision() {
    // long after the collision ũ is two separated solitons, so in the frame
    // of the big one ∂_t ũ ≈ (1 − c) ∂_x Q_c near the small soliton
    let cas = cubic_family();
    let c = 0.02;
    let a = ApproxSolution::new(cas, c, Variant::Symmetric).unwrap();
    let t = 40.0 / (1.0 - c);
    let xs: Vec<f64> = (0..20).map(|i| -40.0 + (i as f64 - 10.0) * 0.7).collect();
    let ut = a.time_derivative(t, &xs);
    let h = 1e-4;
    for (x, v) in xs.iter().zip(&ut) {
        let ux = (a.value(t, x + h) - a.value(t, x - h)) / (2.0 * h);
        assert!((v - (1.0 - c) * ux).abs() < 1e-3 * ux.abs().max(1e-3), "x = {x}: {v} vs {}", (1.0 - c) * ux);
    }
}
