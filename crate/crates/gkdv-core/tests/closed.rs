use gkdv_core::cascade::{Cascade, SigmaIndex};
use gkdv_core::closed::{b20_closed_integrals, b20_from_first_order};
use gkdv_core::numerics::make_grid;
use gkdv_core::{Error, Nonlinearity};

const I10: SigmaIndex = SigmaIndex::new(1, 0);
const I20: SigmaIndex = SigmaIndex::new(2, 0);

fn both(nl: &Nonlinearity) -> (f64, f64, f64) {
    let mut c = Cascade::new(nl, &make_grid(40.0, 4096).unwrap()).unwrap();
    c.solve_index(I10).unwrap();
    let closed = b20_closed_integrals(&c).unwrap();
    c.solve_index(I20).unwrap();
    (closed, c.get(I20).unwrap().b, c.get(I10).unwrap().b)
}

#[test]
fn mkdv_gives_zero() {
    let (closed, _, _) = both(&Nonlinearity::pure_power(3));
    assert!(closed.abs() < 1e-8, "{closed}");
}

#[test]
fn cubic_family_matches_cascade() {
    for (eps, p) in [(1e-3, 4.0), (0.05, 5.0), (-0.02, 4.5)] {
        let (closed, cascade, _) = both(&Nonlinearity::epsilon_family(3, eps, p, 0.0).unwrap());
        assert!((closed - cascade).abs() < 1e-8, "eps {eps} p {p}: {closed} vs {cascade}");
    }
}

#[test]
fn quadratic_family_matches_cascade() {
    for nl in [Nonlinearity::pure_power(2), Nonlinearity::epsilon_family(2, 0.05, 4.0, 0.0).unwrap(), Nonlinearity::epsilon_family(2, 0.05, 4.5, 1.0).unwrap()]
    {
        let (closed, cascade, _) = both(&nl);
        assert!((closed - cascade).abs() < 1e-8, "{nl:?}: {closed} vs {cascade}");
    }
}

#[test]
fn gardner_closed_value_cancels_the_cube() {
    for mu in [0.1, -0.3] {
        let (closed, _, b10) = both(&Nonlinearity::gardner(mu));
        assert!((closed + b10.powi(3) / 6.0).abs() < 1e-8, "mu {mu}: {closed}");
    }
}

#[test]
fn needs_first_system() {
    let c = Cascade::new(&Nonlinearity::pure_power(2), &make_grid(30.0, 1024).unwrap()).unwrap();
    assert!(matches!(b20_closed_integrals(&c), Err(Error::OrderViolation(_))));
}

#[test]
fn free_kappa_does_not_enter() {
    // the B term is blind to multiples of Q'
    let mut c = Cascade::new(&Nonlinearity::epsilon_family(2, 0.05, 4.0, 0.0).unwrap(), &make_grid(40.0, 4096).unwrap()).unwrap();
    c.solve_index(I10).unwrap();
    let op = c.operator().clone();
    let mut s = c.get(I10).unwrap().clone();
    let base = b20_from_first_order(&op, &s).unwrap();
    s.b_profile = s.b_profile.axpby(1.0, op.dq(), 0.7);
    let shifted = b20_from_first_order(&op, &s).unwrap();
    assert!((base - shifted).abs() < 1e-9, "{base} {shifted}");
}
