//! The model linear system
//!
//! ```text
//! (𝓛A)' + a(3Q − 2f(Q))' = F
//! (𝓛B)' + 3aQ'' − 3A'' − f'(Q)A = G
//! ```
//!
//! with `A = Ã + γ`, `B = B̃ + bφ + κQ'`, `Ã` even and `B̃` odd, both decaying.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::bail;
use crate::linop::{LinearizedOperator, SpecialSolutions};
use crate::numerics::{cumulative_primitive, differentiate, integrate, Decay, Parity, Profile};
use crate::Result;

/// Solution of one model system. `a_derivs`/`b_derivs` hold the first three
/// derivatives, obtained from the ODEs rather than repeated differencing.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaSolution {
    pub a_profile: Profile,
    pub b_profile: Profile,
    pub a_derivs: [Profile; 3],
    pub b_derivs: [Profile; 3],
    pub a: f64,
    pub b: f64,
    pub gamma: f64,
    pub kappa: f64,
}

fn tail_mean(p: &Profile) -> f64 {
    let v = p.values();
    let k = (v.len() / 100).max(1);
    v[v.len() - k..].iter().sum::<f64>() / k as f64
}

impl OmegaSolution {
    /// `lim_{+∞} A`, read off the last percent of the grid.
    pub fn limit_a(&self) -> f64 {
        tail_mean(&self.a_profile)
    }

    pub fn limit_b(&self) -> f64 {
        tail_mean(&self.b_profile)
    }
}

/// Grid samples of `φ` and its first three derivatives, plus `𝓛φ` and `(𝓛φ)'`.
pub(crate) struct ResonanceJet {
    pub phi: [Vec<f64>; 4],
    pub l_phi: Vec<f64>,
    pub dl_phi: Vec<f64>,
}

pub(crate) fn resonance_jet(op: &LinearizedOperator) -> ResonanceJet {
    let f = op.nonlinearity().evaluator();
    let n = op.grid().n_points();
    let mut phi: [Vec<f64>; 4] = core::array::from_fn(|_| Vec::with_capacity(n));
    let mut l_phi = Vec::with_capacity(n);
    let mut dl_phi = Vec::with_capacity(n);
    for (i, x) in op.grid().xs().enumerate() {
        let q = op.q().values()[i];
        let dq = op.dq().values()[i];
        let p0 = op.shape().phi(x);
        // g = f(Q)/Q, g' = −φ(f'(Q) − g)
        let g = if q > 0.0 { f.f(q, 0) / q } else { 0.0 };
        let f1 = f.f(q, 1);
        let f2 = f.f(q, 2);
        let dg = -p0 * (f1 - g);
        let p1 = p0 * p0 - 1.0 + g;
        let p2 = 2.0 * p0 * p1 + dg;
        let d2g = -p1 * (f1 - g) - p0 * (f2 * dq - dg);
        let p3 = 2.0 * p1 * p1 + 2.0 * p0 * p2 + d2g;
        phi[0].push(p0);
        phi[1].push(p1);
        phi[2].push(p2);
        phi[3].push(p3);
        l_phi.push(p0 * (3.0 - 3.0 * g - 2.0 * p0 * p0));
        dl_phi.push(p1 * (3.0 - 3.0 * g - 6.0 * p0 * p0) - 3.0 * p0 * dg);
    }
    ResonanceJet { phi, l_phi, dl_phi }
}

fn check_source(p: &Profile, want: Parity, name: &str) -> Result<Profile> {
    if p.parity() != Parity::None && p.parity() != want {
        bail!(InvalidArgument, "{name} must be {want:?}, got {:?}", p.parity());
    }
    if p.decay() == Decay::Unbounded {
        bail!(Domain, "{name} is unbounded");
    }
    Ok(p.clone().with_parity(want))
}

/// Solves the model system for given sources and free constants `γ`, `κ`.
pub fn solve_model_problem(
    op: &LinearizedOperator,
    special: &SpecialSolutions,
    f_src: &Profile,
    g_src: &Profile,
    gamma: f64,
    kappa: f64,
) -> Result<OmegaSolution> {
    let f_src = check_source(f_src, Parity::Odd, "F")?;
    let g_src = check_source(g_src, Parity::Even, "G")?;
    let grid = *op.grid();
    let (q, dq, lq) = (op.q(), op.dq(), op.lambda_q());
    let lqq = lq.dot(q)?;
    if lqq.abs() < 1e-12 * (lq.dot(lq)? * q.dot(q)?).sqrt() {
        bail!(Degenerate, "∫ΛQ·Q vanishes; the model system is degenerate");
    }
    let nl = op.nonlinearity().evaluator();
    let fq = q.map(|v| nl.f(v, 0), Parity::Even, Decay::Localized);
    let v1 = op.potential();
    let v2 = q.map(|v| nl.f(v, 2), Parity::Even, Decay::Bounded);

    let cum_p = cumulative_primitive(&special.p);
    let cum_pbar = cumulative_primitive(&special.p_bar);
    let a = -(gamma * integrate(&special.p)? + g_src.dot(q)? - f_src.dot(&cum_p)?) / lqq;
    let b = 0.5 * (gamma * integrate(&special.p_bar)? + a * integrate(lq)? - f_src.dot(&cum_pbar)? + integrate(&g_src)?);

    // 𝓗 = ∫_{−∞}^x F + γ f'(Q), since 𝓛1 = 1 − f'(Q)
    let cum_f = cumulative_primitive(&f_src);
    let end = *cum_f.values().last().expect("grid is non-empty");
    let h_src = cum_f.shift(-end).axpby(1.0, v1, gamma).with_decay(Decay::Localized);
    let h_bar = op.invert(&h_src, Parity::Even)?;
    let a_tilde = h_bar.axpby(1.0, &special.p_hat, -a);

    // 𝓛w = h gives w'' = w − f'(Q)w − h exactly on the discrete level
    let second = |w: &Profile, h: &Profile| w.sub(&v1.mul(w)).sub(h);
    let d_fn = second(&h_bar, &h_src).scale(3.0).add(&v1.mul(&h_bar)).add(&g_src).axpby(1.0, v1, gamma);
    let three_q_2f = q.axpby(3.0, &fq, -2.0);
    let d2_phat = second(&special.p_hat, &three_q_2f);
    let q2 = q.sub(&fq);
    let z0 = q2.axpby(3.0, &d2_phat, 3.0).add(&v1.mul(&special.p_hat));
    let dz = d_fn.axpby(1.0, &z0, -a).with_decay(Decay::Localized);

    let jet = resonance_jet(op);
    let l_phi = Profile::from_values(&grid, jet.l_phi.clone(), Parity::Odd, Decay::Bounded);
    let mut e_fn = cumulative_primitive(&dz).axpby(1.0, &l_phi, -b);
    let dq2 = dq.dot(dq)?;
    let leak = e_fn.dot(dq)? / dq2;
    if leak.abs() * dq2.sqrt() > 1e-6 * e_fn.max_abs().max(1.0) {
        bail!(NotSolvable, "B equation is not orthogonal to Q' (component {leak:e})");
    }
    e_fn = e_fn.axpby(1.0, dq, -leak);
    let b_tilde = op.invert(&e_fn, Parity::Odd)?;

    // derivative jets
    let da1 = differentiate(&a_tilde, 1)?;
    let rhs_a = h_src.axpby(1.0, &three_q_2f, -a);
    let da2 = second(&a_tilde, &rhs_a);
    let d_three_q_2f =
        Profile::from_values(&grid, dq.values().iter().zip(v1.values()).map(|(d, v)| (3.0 - 2.0 * v) * d).collect(), Parity::Odd, Decay::Localized);
    let dh = f_src.add(&v2.mul(dq).scale(gamma));
    let da3 = da1.sub(&v2.mul(dq).mul(&a_tilde)).sub(&v1.mul(&da1)).sub(&dh.axpby(1.0, &d_three_q_2f, -a));

    let db1t = differentiate(&b_tilde, 1)?;
    let db2t = second(&b_tilde, &e_fn);
    let dl_phi = Profile::from_values(&grid, jet.dl_phi, Parity::Even, Decay::Localized);
    let de = dz.axpby(1.0, &dl_phi, -b).axpby(1.0, &differentiate(dq, 1)?, -leak);
    let db3t = db1t.sub(&v2.mul(dq).mul(&b_tilde)).sub(&v1.mul(&db1t)).sub(&de);

    let qjet: [Vec<f64>; 3] = {
        let mut out: [Vec<f64>; 3] = core::array::from_fn(|_| Vec::with_capacity(grid.n_points()));
        for x in grid.xs() {
            let j = op.shape().jet(x);
            out[0].push(j[2]);
            out[1].push(j[3]);
            out[2].push(j[4]);
        }
        out
    };
    let phi = Profile::from_values(&grid, jet.phi[0].clone(), Parity::Odd, Decay::Bounded);
    let mut b_derivs: [Profile; 3] = [db1t, db2t, db3t];
    for (k, d) in b_derivs.iter_mut().enumerate() {
        let parity = d.parity();
        let vals: Vec<f64> = d.values().iter().zip(&jet.phi[k + 1]).zip(&qjet[k]).map(|((w, p), qd)| w + b * p + kappa * qd).collect();
        *d = Profile::from_values(&grid, vals, parity, Decay::Localized);
    }

    let a_profile = a_tilde.shift(gamma).with_decay(if gamma == 0.0 { Decay::Localized } else { Decay::Bounded });
    let b_profile = b_tilde.axpby(1.0, &phi, b).axpby(1.0, dq, kappa).with_decay(if b == 0.0 { Decay::Localized } else { Decay::Bounded });
    Ok(OmegaSolution { a_profile, b_profile, a_derivs: [da1, da2.with_parity(Parity::Even), da3.with_parity(Parity::Odd)], b_derivs, a, b, gamma, kappa })
}

/// Sup-norm residuals of both lines, each integrated once in `x`.
///
/// Third differences of a computed profile amplify solver roundoff like
/// `h⁻³`, so the check works with `𝓛A + a(3Q − 2f(Q)) − ∫₋∞ˣF − γ` and
/// `𝓛B + 3aQ' − 3A' − ∫₀ˣ(f'(Q)A + G)`, which vanish exactly when the
/// system holds and the sources have the stated parity.
pub fn omega_residual(op: &LinearizedOperator, s: &OmegaSolution, f_src: &Profile, g_src: &Profile) -> Result<(f64, f64)> {
    let nl = op.nonlinearity().evaluator();
    let v1 = op.potential();
    let q = op.q();
    let cum_f = cumulative_primitive(f_src);
    let end = *cum_f.values().last().expect("grid is non-empty");
    let three_q_2f = q.map(|v| 3.0 * v - 2.0 * nl.f(v, 0), Parity::Even, Decay::Localized);
    let r1 = op.apply(&s.a_profile).axpby(1.0, &three_q_2f, s.a).sub(&cum_f.shift(-end)).shift(-s.gamma).max_abs();
    let da = differentiate(&s.a_profile, 1)?;
    let rhs = cumulative_primitive(&v1.mul(&s.a_profile).add(g_src));
    let r2 = op.apply(&s.b_profile).axpby(1.0, op.dq(), 3.0 * s.a).axpby(1.0, &da, -3.0).sub(&rhs).max_abs();
    Ok((r1, r2))
}
