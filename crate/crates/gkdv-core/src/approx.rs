//! Approximate two-soliton solutions built from a solved cascade.
//!
//! In the frame of the big soliton, with `y_c = x + (1 − c)t` and
//! `y = x − α(y_c)`,
//!
//! ```text
//! ũ(t, x) = Q(y) + Q_c(y_c) + Σ c^l (Q_c^k(y_c) A_{k,l}(y) + (Q_c^k)'(y_c) B_{k,l}(y))
//! ```
//!
//! and the modified solution `û` adds `−d (Q_c²)'(y_c)(1 + P̄(y))`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::cascade::CascadeSolution;
use crate::error::bail;
use crate::linop::LinearizedOperator;
use crate::numerics::{cumulative_primitive, differentiate, make_grid, Decay, Grid, Parity, Profile};
use crate::soliton::SolitonShape;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "sym")]
    Symmetric,
    #[serde(rename = "hat")]
    Modified,
}

/// `T_c = c^{−1/2 − 1/100}`.
pub fn interaction_time(c: f64) -> f64 {
    c.powf(-0.51)
}

/// Piecewise septic Hermite interpolant through `(v, v', v'', v''')` on a
/// uniform grid. It is `C³`, so three derivatives of the interpolant are
/// still continuous. Outside the grid the function is continued by its
/// limits.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermite {
    grid: Grid,
    jets: [Vec<f64>; 4],
    parity: Parity,
    left: f64,
    right: f64,
}

impl Hermite {
    pub fn new(grid: &Grid, jets: [&[f64]; 4], parity: Parity, limits: (f64, f64)) -> Hermite {
        Hermite { grid: *grid, jets: jets.map(<[f64]>::to_vec), parity, left: limits.0, right: limits.1 }
    }

    /// From a profile and its first three derivative profiles.
    pub fn from_profiles(p: &Profile, d: &[Profile; 3], limits: (f64, f64)) -> Hermite {
        Hermite::new(p.grid(), [p.values(), d[0].values(), d[1].values(), d[2].values()], p.parity(), limits)
    }

    fn raw(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= -g.half_width() {
            return self.left;
        }
        if x >= g.half_width() {
            return self.right;
        }
        let i = g.locate(x).min(g.n_points() - 2);
        let h = g.spacing();
        let t = (x - g.x(i)) / h;
        let j = &self.jets;
        let l = [j[0][i], j[1][i] * h, j[2][i] * h * h / 2.0, j[3][i] * h.powi(3) / 6.0];
        let r = [j[0][i + 1], j[1][i + 1] * h, j[2][i + 1] * h * h, j[3][i + 1] * h.powi(3)];
        // mismatch of the left Taylor cubic against the right jet
        let g0 = r[0] - (l[0] + l[1] + l[2] + l[3]);
        let g1 = r[1] - (l[1] + 2.0 * l[2] + 3.0 * l[3]);
        let g2 = r[2] - (2.0 * l[2] + 6.0 * l[3]);
        let g3 = r[3] - 6.0 * l[3];
        let b0 = 35.0 * g0 - 15.0 * g1 + 2.5 * g2 - g3 / 6.0;
        let b1 = -84.0 * g0 + 39.0 * g1 - 7.0 * g2 + 0.5 * g3;
        let b2 = 70.0 * g0 - 34.0 * g1 + 6.5 * g2 - 0.5 * g3;
        let b3 = -20.0 * g0 + 10.0 * g1 - 2.0 * g2 + g3 / 6.0;
        let t4 = t * t * t * t;
        l[0] + t * (l[1] + t * (l[2] + t * l[3])) + t4 * (b0 + t * (b1 + t * (b2 + t * b3)))
    }

    /// Value at `x`; even and odd profiles are evaluated on `|x|` so that
    /// their symmetry is exact.
    pub fn eval(&self, x: f64) -> f64 {
        match self.parity {
            Parity::Even => self.raw(x.abs()),
            Parity::Odd => x.signum() * self.raw(x.abs()),
            Parity::None => self.raw(x),
        }
    }
}

/// `(β, β', β'')` at `s`, with `β = Σ w Q_c^k`.
fn beta_jet(coeffs: &[(i32, f64)], small: &SolitonShape, s: f64) -> [f64; 3] {
    let [q, q1, q2, ..] = small.jet(s);
    let mut out = [0.0; 3];
    for &(k, w) in coeffs {
        let kf = f64::from(k);
        out[0] += w * q.powi(k);
        out[1] += w * kf * q.powi(k - 1) * q1;
        let curv = if k >= 2 { (kf - 1.0) * q.powi(k - 2) * q1 * q1 } else { 0.0 };
        out[2] += w * kf * (curv + q.powi(k - 1) * q2);
    }
    out
}

#[derive(Debug, Clone)]
struct Term {
    k: i32,
    weight: f64,
    a: Hermite,
    b: Hermite,
}

/// `ũ` or `û` for a fixed speed ratio `c`.
#[derive(Debug, Clone)]
pub struct ApproxSolution {
    pub cascade: CascadeSolution,
    pub c: f64,
    pub variant: Variant,
    pub t_c: f64,
    big: SolitonShape,
    small: SolitonShape,
    terms: Vec<Term>,
    coeffs: Vec<(i32, f64)>,
    alpha: Hermite,
    alpha_limit: f64,
    p_bar: Option<Hermite>,
}

/// Position shifts `Δ₁`, `Δ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftObservables {
    pub delta1: f64,
    pub delta2: f64,
}

impl ApproxSolution {
    pub fn new(cascade: CascadeSolution, c: f64, variant: Variant) -> Result<ApproxSolution> {
        if !(c.is_finite() && c > 0.0 && c < 1.0) {
            bail!(InvalidArgument, "speed ratio must lie in (0, 1), got {c}");
        }
        let nl = cascade.nl.clone();
        let big = SolitonShape::new(&nl, 1.0)?;
        let small = SolitonShape::new(&nl, c)?;
        let mut terms = Vec::new();
        for (idx, s) in &cascade.entries {
            let weight = c.powi(i32::from(idx.l));
            terms.push(Term {
                k: i32::from(idx.k),
                weight,
                a: Hermite::from_profiles(&s.a_profile, &s.a_derivs, (s.gamma, s.gamma)),
                b: Hermite::from_profiles(&s.b_profile, &s.b_derivs, (-s.b, s.b)),
            });
        }

        // α(s) = ∫₀ˢ β with β = Σ a_{k,l} c^l Q_c^k; Q_c^k is negligible past 60/√c
        let reach = 60.0 / c.sqrt();
        let ag = make_grid(reach, (1 << 15) + 1)?;
        let coeffs: Vec<(i32, f64)> = cascade.entries.iter().map(|(i, s)| (i32::from(i.k), s.a * c.powi(i32::from(i.l)))).collect();
        let beta = Profile::from_fn(&ag, |s| beta_jet(&coeffs, &small, s)[0], Parity::Even, Decay::Localized);
        let prim = cumulative_primitive(&beta);
        let alpha_limit = *prim.values().last().expect("grid is non-empty");
        let mut dj = [Vec::new(), Vec::new(), Vec::new()];
        for s in ag.xs() {
            let b = beta_jet(&coeffs, &small, s);
            for (d, v) in dj.iter_mut().zip(b) {
                d.push(v);
            }
        }
        let alpha = Hermite::new(&ag, [prim.values(), &dj[0], &dj[1], &dj[2]], Parity::Odd, (-alpha_limit, alpha_limit));

        let p_bar = if variant == Variant::Modified {
            let op = LinearizedOperator::new(&nl, &cascade.grid)?;
            let sp = op.special_solutions()?;
            let v1 = op.potential();
            let v2dq: Vec<f64> = op
                .grid()
                .xs()
                .map(|x| {
                    let j = big.jet(x);
                    nl.eval(j[0], 2) * j[1]
                })
                .collect();
            let p = &sp.p_bar;
            let d1 = differentiate(p, 1)?;
            // 𝓛P̄ = f'(Q): P̄'' = P̄ − f'(Q)(P̄ + 1)
            let d2: Vec<f64> = p.values().iter().zip(v1.values()).map(|(w, v)| w - v * (w + 1.0)).collect();
            let d3: Vec<f64> = (0..p.values().len()).map(|i| d1.values()[i] - v2dq[i] * (p.values()[i] + 1.0) - v1.values()[i] * d1.values()[i]).collect();
            Some(Hermite::new(op.grid(), [p.values(), d1.values(), &d2, &d3], Parity::Even, (0.0, 0.0)))
        } else {
            None
        };
        Ok(ApproxSolution { t_c: interaction_time(c), cascade, c, variant, big, small, terms, coeffs, alpha, alpha_limit, p_bar })
    }

    /// `(β(s), α(s))`.
    pub fn beta_alpha(&self, s: f64) -> (f64, f64) {
        (beta_jet(&self.coeffs, &self.small, s)[0], self.alpha.eval(s))
    }

    /// `Δ₁ = Σ a_{k,l}c^l ∫Q_c^k`, `Δ₂ = 2(b_{1,0} + c b̃_{1,1} δ_{m2})`.
    pub fn shifts(&self) -> ShiftObservables {
        let b10 = self.cascade.get(1, 0).map_or(0.0, |s| s.b);
        let dm2 = f64::from(self.cascade.delta_m2);
        ShiftObservables { delta1: 2.0 * self.alpha_limit, delta2: 2.0 * (b10 + self.c * self.cascade.b_tilde_11 * dm2) }
    }

    pub fn small_soliton(&self) -> &SolitonShape {
        &self.small
    }

    pub fn big_soliton(&self) -> &SolitonShape {
        &self.big
    }

    /// `ũ(t, x)` (or `û`).
    pub fn value(&self, t: f64, x: f64) -> f64 {
        let yc = x + (1.0 - self.c) * t;
        let y = x - self.alpha.eval(yc);
        let (q, dq) = self.small.value_and_slope(yc);
        let mut u = self.big.value(y) + q;
        for term in &self.terms {
            let qk = q.powi(term.k);
            let dqk = f64::from(term.k) * q.powi(term.k - 1) * dq;
            u += term.weight * (qk * term.a.eval(y) + dqk * term.b.eval(y));
        }
        if let Some(pb) = &self.p_bar {
            u -= self.cascade.defect * 2.0 * q * dq * (1.0 + pb.eval(y));
        }
        u
    }

    /// Samples the solution at time `t` on `grid`.
    pub fn eval(&self, t: f64, grid: &Grid) -> Profile {
        Profile::from_fn(grid, |x| self.value(t, x), Parity::None, Decay::Localized)
    }

    /// Samples at arbitrary points.
    pub fn eval_points(&self, t: f64, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.value(t, x)).collect()
    }

    /// Central time difference `∂_t ũ` with step `δt = 10⁻⁵ T_c`.
    pub fn time_derivative(&self, t: f64, xs: &[f64]) -> Vec<f64> {
        let dt = 1e-5 * self.t_c;
        xs.iter().map(|&x| (self.value(t + dt, x) - self.value(t - dt, x)) / (2.0 * dt)).collect()
    }
}
