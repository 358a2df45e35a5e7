use gkdv_core::soliton::SolitonShape;
use gkdv_core::Nonlinearity;
use gkdv_lab::fit::{fit_pair, fit_soliton, speed_from_amplitude, two_extrema, two_peaks, SolitonFit};
use gkdv_lab::spectral::PeriodicGrid;
use gkdv_lab::LabError;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn grid() -> PeriodicGrid {
    PeriodicGrid::new(60.0, 2048).unwrap()
}

fn soliton(nl: &Nonlinearity, c: f64, x0: f64, g: &PeriodicGrid) -> Vec<f64> {
    let q = SolitonShape::new(nl, c).unwrap();
    g.xs().iter().map(|&x| q.value(x - x0)).collect()
}

#[test]
fn exact_soliton_is_recovered() {
    let nl = Nonlinearity::pure_power(2);
    let g = grid();
    let u = soliton(&nl, 0.25, 7.0, &g);
    let f = fit_soliton(&u, &g, &nl, (-20.0, 40.0)).unwrap();
    assert!((f.c - 0.25).abs() < 1e-6, "{f:?}");
    assert!((f.x - 7.0).abs() < 1e-4, "{f:?}");
}

#[test]
fn noisy_soliton() {
    let nl = Nonlinearity::pure_power(2);
    let g = grid();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u: Vec<f64> = soliton(&nl, 1.0, -3.0, &g).into_iter().map(|v| v + 1e-4 * rng.gen_range(-1.0..1.0)).collect();
    let f = fit_soliton(&u, &g, &nl, (-20.0, 20.0)).unwrap();
    assert!((f.c - 1.0).abs() < 1e-3, "{f:?}");
    assert!((f.x + 3.0).abs() < 1e-2, "{f:?}");
}

#[test]
fn empty_window_is_not_found() {
    let nl = Nonlinearity::pure_power(2);
    let g = grid();
    let u = soliton(&nl, 1.0, 0.0, &g);
    assert!(matches!(fit_soliton(&u, &g, &nl, (30.0, 50.0)), Err(LabError::NotFound(_))));
    assert!(matches!(fit_soliton(&u, &g, &nl, (5.0, 5.01)), Err(LabError::NotFound(_))));
    let zero = vec![0.0; g.n];
    assert!(matches!(fit_soliton(&zero, &g, &nl, (-10.0, 10.0)), Err(LabError::NotFound(_))));
    // the window edge cuts through the flank of the soliton
    assert!(matches!(fit_soliton(&u, &g, &nl, (1.0, 20.0)), Err(LabError::NotFound(_))));
}

#[test]
fn two_solitons_jointly() {
    let nl = Nonlinearity::gardner(0.2);
    let g = grid();
    let a = soliton(&nl, 1.0, 25.0, &g);
    let b = soliton(&nl, 0.2, -15.0, &g);
    let u: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let peaks = two_peaks(&g, &u);
    assert!((peaks[0].unwrap().x - 25.0).abs() < 0.05);
    assert!((peaks[1].unwrap().x + 15.0).abs() < 0.1);
    let guesses = [SolitonFit { c: 0.9, x: 24.8 }, SolitonFit { c: 0.22, x: -15.2 }];
    let [big, small] = fit_pair(&u, &g, &nl, &[(-45.0, 45.0)], guesses).unwrap();
    assert!((big.c - 1.0).abs() < 1e-8 && (big.x - 25.0).abs() < 1e-6, "{big:?}");
    assert!((small.c - 0.2).abs() < 1e-8 && (small.x + 15.0).abs() < 1e-6, "{small:?}");
}

#[test]
fn amplitude_speed_relation() {
    let kdv = Nonlinearity::pure_power(2);
    assert!((speed_from_amplitude(&kdv, 1.5 * 0.3) - 0.3).abs() < 1e-14);
    let nl = Nonlinearity::epsilon_family(2, 0.2, 4.0, 0.0).unwrap();
    for c in [0.05, 0.4, 1.0] {
        let q = SolitonShape::new(&nl, c).unwrap();
        assert!((speed_from_amplitude(&nl, q.amplitude()) - c).abs() < 1e-10);
    }
}

#[test]
fn extrema_keep_the_sign() {
    let nl = Nonlinearity::pure_power(3);
    let g = grid();
    let u: Vec<f64> = soliton(&nl, 1.0, 10.0, &g).into_iter().map(|v| -v).collect();
    let [p, _] = two_extrema(&g, &u);
    let p = p.unwrap();
    assert!((p.x - 10.0).abs() < 0.01);
    assert!((p.amp + 2f64.sqrt()).abs() < 1e-3, "{p:?}");
    assert!(two_peaks(&g, &u)[0].map_or(true, |q| q.amp < 1e-10));
}
