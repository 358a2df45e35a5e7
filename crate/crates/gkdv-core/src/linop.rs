//! `𝓛 w = −w'' + w − f'(Q) w` around the unit-speed soliton.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::banded::{BandLu, BandMatrix};
use crate::error::bail;
use crate::numerics::{differentiate, quadrature_weights, Decay, Grid, Parity, Profile};
use crate::soliton::{lambda_q, SolitonProfile, SolitonShape};
use crate::{Nonlinearity, Result};

/// Operator data assembled once per (nonlinearity, grid).
#[derive(Debug, Clone)]
pub struct LinearizedOperator {
    nl: Nonlinearity,
    grid: Grid,
    shape: SolitonShape,
    q: Profile,
    dq: Profile,
    lambda_q: Profile,
    potential: Profile,
    matrix: BandMatrix,
    lu: BandLu,
    // quadrature-weighted Q' (the discrete constraint) and L^{-1} of it
    v: Vec<f64>,
    z2: Vec<f64>,
    vz2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda0: f64,
    pub chi0: Profile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecialSolutions {
    /// `−(xQ' + ΛQ + Q)`, solves `𝓛P = 3Q'' + f'(Q)Q`.
    pub p: Profile,
    /// `−(xQ' + ΛQ)`, solves `𝓛P̂ = 3Q − 2f(Q)`.
    pub p_hat: Profile,
    /// `𝓛⁻¹ f'(Q)`.
    pub p_bar: Profile,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl LinearizedOperator {
    pub fn new(nl: &Nonlinearity, grid: &Grid) -> Result<Self> {
        let shape = SolitonShape::new(nl, 1.0)?;
        let q = shape.sample(grid);
        let dq = shape.sample_slope(grid);
        let lq = lambda_q(nl, grid)?;
        let f = nl.evaluator();
        let potential = q.map(|v| f.f(v, 1), Parity::Even, Decay::Localized);

        let n = grid.n_points();
        let h2 = grid.spacing() * grid.spacing();
        // −d²/dx² with the seven-point stencil, zero ghost values outside the grid
        let stencil = [490.0, -270.0, 27.0, -2.0].map(|c| c / (180.0 * h2));
        let mut matrix = BandMatrix::zeros(n, 3, 3);
        for i in 0..n {
            matrix.set(i, i, stencil[0] + 1.0 - potential.values()[i]);
            for (k, &c) in stencil.iter().enumerate().skip(1) {
                if i >= k {
                    matrix.set(i, i - k, c);
                }
                if i + k < n {
                    matrix.set(i, i + k, c);
                }
            }
        }
        let lu = matrix.factor()?;
        let w = quadrature_weights(grid);
        let v: Vec<f64> = w.iter().zip(dq.values()).map(|(a, b)| a * b).collect();
        let z2 = lu.solve(&v);
        let vz2 = dot(&v, &z2);
        Ok(LinearizedOperator { nl: nl.clone(), grid: *grid, shape, q, dq, lambda_q: lq, potential, matrix, lu, v, z2, vz2 })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nl
    }

    pub fn shape(&self) -> &SolitonShape {
        &self.shape
    }

    pub fn q(&self) -> &Profile {
        &self.q
    }

    pub fn dq(&self) -> &Profile {
        &self.dq
    }

    pub fn lambda_q(&self) -> &Profile {
        &self.lambda_q
    }

    /// `f'(Q)`.
    pub fn potential(&self) -> &Profile {
        &self.potential
    }

    /// `φ = −Q'/Q`.
    pub fn phi(&self) -> Profile {
        Profile::from_fn(&self.grid, |x| self.shape.phi(x), Parity::Odd, Decay::Bounded)
    }

    /// Pointwise `−w'' + w − f'(Q)w` with the seven-point difference stencil.
    pub fn apply(&self, w: &Profile) -> Profile {
        let d2 = differentiate(w, 2).expect("order 2 is valid");
        let vals = w.values().iter().zip(d2.values()).zip(self.potential.values()).map(|((u, u2), v)| -u2 + u - v * u).collect();
        Profile::from_values(&self.grid, vals, w.parity(), w.decay())
    }

    /// Solves `𝓛w = h` with `∫wQ' = 0` in the requested parity class.
    /// Right sides with nonzero limits are handled by peeling off
    /// `α + β tanh x`, whose image is known in closed form.
    pub fn invert(&self, h: &Profile, parity: Parity) -> Result<Profile> {
        if parity == Parity::None {
            bail!(InvalidArgument, "inversion needs an even or odd parity class");
        }
        if h.parity() != Parity::None && h.parity() != parity {
            bail!(InvalidArgument, "right side has parity {:?}, requested {parity:?}", h.parity());
        }
        if h.decay() == Decay::Unbounded {
            bail!(Domain, "cannot invert an unbounded right side");
        }
        let h = h.clone().with_parity(parity);
        let dq2 = self.dq.dot(&self.dq)?;
        if parity == Parity::Odd {
            let s = h.dot(&self.dq)? / dq2.sqrt();
            if s.abs() > 1e-8 * h.max_abs().max(1.0) {
                bail!(NotSolvable, "odd right side is not orthogonal to Q' (normalized ∫hQ' = {s:e})");
            }
        }
        let n = self.grid.n_points();
        let hv = h.values();
        let alpha = 0.5 * (hv[0] + hv[n - 1]);
        let beta = 0.5 * (hv[n - 1] - hv[0]);
        let peel = alpha.abs() > 1e-14 || beta.abs() > 1e-14;
        let mut rhs = hv.to_vec();
        if peel {
            for (i, x) in self.grid.xs().enumerate() {
                let (t, s) = (x.tanh(), 1.0 / x.cosh());
                let v = self.potential.values()[i];
                rhs[i] -= alpha * (1.0 - v) + beta * (t * (1.0 - v) + 2.0 * t * s * s);
            }
        }
        let z1 = self.lu.solve(&rhs);
        let lam = dot(&self.v, &z1) / self.vz2;
        let mut w: Vec<f64> = z1.iter().zip(&self.z2).map(|(a, b)| a - lam * b).collect();
        if peel {
            for (wi, x) in w.iter_mut().zip(self.grid.xs()) {
                *wi += alpha + beta * x.tanh();
            }
        }
        let decay = if h.decay() == Decay::Localized && !peel { Decay::Localized } else { Decay::Bounded };
        let w = Profile::from_values(&self.grid, w, parity, decay);
        let k = w.dot(&self.dq)? / dq2;
        Ok(if parity == Parity::Odd && k != 0.0 { w.sub(&self.dq.scale(k)).with_parity(parity) } else { w })
    }

    /// Bottom of the spectrum by shifted inverse iteration.
    pub fn ground_state(&self) -> Result<EigenPair> {
        let rq = |x: &[f64]| dot(x, &self.matrix.mul_vec(x)) / dot(x, x);
        let shift = 2.0 * rq(self.q.values());
        let mut m = self.matrix.clone();
        m.add_diagonal(-shift);
        let lu = m.factor()?;
        let mut x = self.q.values().to_vec();
        let mut last = f64::INFINITY;
        for _ in 0..500 {
            let mut y = lu.solve(&x);
            let norm = dot(&y, &y).sqrt();
            y.iter_mut().for_each(|v| *v /= norm);
            let r = rq(&y);
            x = y;
            if (r - last).abs() < 1e-14 * r.abs().max(1.0) {
                break;
            }
            last = r;
        }
        let eig = rq(&x);
        if eig >= 0.0 {
            bail!(SpectralAnomaly, "smallest eigenvalue {eig} is not negative");
        }
        let chi = Profile::from_values(&self.grid, x, Parity::Even, Decay::Localized);
        let sign = if chi.values()[n_mid(&self.grid)] < 0.0 { -1.0 } else { 1.0 };
        let norm = chi.dot(&chi)?.sqrt();
        Ok(EigenPair { lambda0: -eig, chi0: chi.scale(sign / norm) })
    }

    pub fn special_solutions(&self) -> Result<SpecialSolutions> {
        let xdq = Profile::from_fn(&self.grid, |x| x * self.shape.slope(x), Parity::Even, Decay::Localized);
        let p_hat = xdq.add(&self.lambda_q).scale(-1.0);
        let p = p_hat.sub(&self.q);
        let p_bar = self.invert(&self.potential, Parity::Even)?;
        Ok(SpecialSolutions { p, p_hat, p_bar })
    }
}

fn n_mid(g: &Grid) -> usize {
    g.n_points() / 2
}

/// `φ = −Q_c'/Q_c` on the grid of `q`.
pub fn resonance_phi(q: &SolitonProfile) -> Result<Profile> {
    if let Some(i) = q.profile.values().iter().position(|&v| !(v > 0.0)) {
        bail!(Domain, "soliton vanishes at node {i}; −Q'/Q is undefined");
    }
    let shape = SolitonShape::new(&q.nonlinearity, q.c)?;
    Ok(Profile::from_fn(q.profile.grid(), |x| shape.phi(x), Parity::Odd, Decay::Bounded))
}
