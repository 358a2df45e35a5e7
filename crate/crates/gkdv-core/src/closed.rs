//! `b_{2,0}` from integrals of the first-order profiles alone.
//!
//! These formulas only need `(a, A, B)` of the system at `(1,0)`, so they give
//! a check on the cascade that never touches the `(2,0)` sources.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::cascade::{Cascade, SigmaIndex};
use crate::error::bail;
use crate::linop::LinearizedOperator;
use crate::numerics::{cumulative_primitive, quadrature_weights, Decay, Parity, Profile};
use crate::omega::OmegaSolution;
use crate::Result;

struct Sampled {
    q: Vec<f64>,
    dq: Vec<f64>,
    d2q: Vec<f64>,
    f1: Vec<f64>,
    f2: Vec<f64>,
    w: Vec<f64>,
}

fn sample(op: &LinearizedOperator) -> Sampled {
    let ev = op.nonlinearity().evaluator();
    let mut s = Sampled { q: Vec::new(), dq: Vec::new(), d2q: Vec::new(), f1: Vec::new(), f2: Vec::new(), w: Vec::new() };
    for x in op.grid().xs() {
        let j = op.shape().jet(x);
        s.q.push(j[0]);
        s.dq.push(j[1]);
        s.d2q.push(j[2]);
        s.f1.push(ev.f(j[0], 1));
        s.f2.push(ev.f(j[0], 2));
    }
    s.w = quadrature_weights(op.grid());
    s
}

impl Sampled {
    fn int(&self, g: impl Fn(usize) -> f64) -> f64 {
        // mirrored pairs, as in `integrate`
        let n = self.w.len();
        let mut s = 0.0;
        for i in 0..n / 2 {
            s += self.w[i] * (g(i) + g(n - 1 - i));
        }
        if n % 2 == 1 {
            s += self.w[n / 2] * g(n / 2);
        }
        s
    }
}

/// `b_{2,0}` for `m = 3`, where `γ_{2,0} = 0`.
fn cubic(s: &Sampled, sol: &OmegaSolution) -> f64 {
    let a = sol.a;
    let av = sol.a_profile.values();
    let a1 = sol.a_derivs[0].values();
    let one_a = |i: usize| 1.0 + av[i];
    0.25 * s.int(|i| s.f2[i] * one_a(i).powi(3)) - 0.75 * a * s.int(|i| s.f1[i] * one_a(i) * av[i]) + 2.25 * a * s.int(|i| a1[i] * a1[i])
        - 0.5 * a * a * s.int(|i| s.f1[i] * s.q[i] * one_a(i))
        + 3.0 * a * a * s.int(|i| av[i] * s.d2q[i])
        - 0.75 * a.powi(3) * s.int(|i| s.dq[i] * s.dq[i])
}

/// `b_{2,0}` for `m = 2`, where `γ_{2,0} = −b_{1,0}²/2`.
fn quadratic(op: &LinearizedOperator, s: &Sampled, sol: &OmegaSolution) -> f64 {
    let (a, b) = (sol.a, sol.b);
    let av = sol.a_profile.values();
    let a1 = sol.a_derivs[0].values();
    let a2 = sol.a_derivs[1].values();
    let bv = sol.b_profile.values();
    let one_a = |i: usize| 1.0 + av[i];
    let inner = Profile::from_values(op.grid(), av.iter().zip(&s.q).map(|(x, q)| x + a * q).collect(), Parity::Even, Decay::Localized);
    let prim = cumulative_primitive(&inner);
    let pv = prim.values();
    -0.5 * b.powi(3) + 0.25 * s.int(|i| (s.f2[i] - 2.0) * one_a(i).powi(3)) - 2.0 * b + 0.5 * s.int(|i| av[i] * (1.0 + av[i] * av[i]))
        - 0.5 * a * s.int(|i| s.q[i] * av[i])
        - 0.75 * a.powi(3) * s.int(|i| s.dq[i] * s.dq[i])
        + 0.5 * a * a * s.int(|i| s.q[i] * (s.q[i] - s.f1[i] * one_a(i)))
        - 0.75 * a * s.int(|i| (s.f1[i] * one_a(i) + 3.0 * a2[i]) * av[i])
        + 0.5 * s.int(|i| bv[i] * (3.0 * a1[i] + s.f1[i] * pv[i]))
        + 3.0 * a * a * s.int(|i| s.d2q[i] * av[i])
}

/// Evaluates `b_{2,0}` from the solution of the `(1,0)` system.
pub fn b20_from_first_order(op: &LinearizedOperator, sol10: &OmegaSolution) -> Result<f64> {
    let s = sample(op);
    match op.nonlinearity().m {
        2 => Ok(quadratic(op, &s, sol10)),
        3 => Ok(cubic(&s, sol10)),
        m => bail!(Unsupported, "no closed formula for m = {m}"),
    }
}

/// [`b20_from_first_order`] on a cascade where `(1,0)` has been solved.
pub fn b20_closed_integrals(cascade: &Cascade) -> Result<f64> {
    let Some(sol) = cascade.get(SigmaIndex::new(1, 0)) else {
        bail!(OrderViolation, "(1,0) must be solved before b_2,0 can be evaluated");
    };
    b20_from_first_order(cascade.operator(), sol)
}
