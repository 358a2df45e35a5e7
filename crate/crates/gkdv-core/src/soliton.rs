//! Solitons `Q_c'' + f(Q_c) = c Q_c`, their speed derivative `ΛQ` and the
//! stability derivative of the mass.
//!
//! Pure powers and Gardner have closed forms. Any other nonlinearity goes
//! through the turning point `q*` (first positive zero of
//! `h(σ) = c − 2F(σ)/σ²`): with `Q = q* sin²θ` the first integral
//! `Q'² = Q² h(Q)` becomes the regular ODE `θ' = −sinθ R(θ)/2`,
//! `R = sqrt(h)/cosθ`, integrated from the apex `θ(0) = π/2`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::bail;
use crate::nonlinearity::{Evaluator, Family};
use crate::numerics::{integrate, make_grid, Decay, Grid, Parity, Profile};
use crate::{Error, Nonlinearity, Result};

/// Soliton sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonProfile {
    pub profile: Profile,
    pub c: f64,
    pub amplitude: f64,
    pub nonlinearity: Nonlinearity,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Power { m: u32 },
    Gardner { rho: f64 },
    Table(Table),
}

/// Pointwise evaluator of `Q_c` and its derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct SolitonShape {
    c: f64,
    amplitude: f64,
    f: Evaluator,
    kind: Kind,
}

// sech(z) without overflow
fn sech(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

fn check_speed(c: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) {
        bail!(InvalidArgument, "soliton speed must be positive, got {c}");
    }
    Ok(())
}

impl SolitonShape {
    /// Closed form when one exists, turning-point integration otherwise.
    pub fn new(nl: &Nonlinearity, c: f64) -> Result<SolitonShape> {
        nl.validate()?;
        check_speed(c)?;
        let f = nl.evaluator();
        let terms = f.terms();
        if terms.len() == 1 {
            let m = nl.m;
            let amplitude = c.powf(1.0 / (m as f64 - 1.0)) * ((m as f64 + 1.0) / 2.0).powf(1.0 / (m as f64 - 1.0));
            return Ok(SolitonShape { c, amplitude, f, kind: Kind::Power { m } });
        }
        if nl.m == 2 && terms.len() == 2 && terms[1].power == 3.0 {
            // s² − μ s³
            let mu = -terms[1].coeff;
            let rho2 = 1.0 - 4.5 * mu * c;
            if rho2 <= 0.0 {
                bail!(InvalidArgument, "Gardner soliton needs c < 2/(9μ) = {}, got {c}", 2.0 / (9.0 * mu));
            }
            let rho = rho2.sqrt();
            return Ok(SolitonShape { c, amplitude: 3.0 * c / (1.0 + rho), f, kind: Kind::Gardner { rho } });
        }
        Self::from_turning_point(nl, c)
    }

    /// Forces the turning-point construction even when a closed form exists.
    pub fn from_turning_point(nl: &Nonlinearity, c: f64) -> Result<SolitonShape> {
        nl.validate()?;
        check_speed(c)?;
        if nl.family == Family::Gardner && 1.0 - 4.5 * nl.mu_hat * c <= 0.0 {
            bail!(InvalidArgument, "Gardner soliton needs c < 2/(9μ)");
        }
        let f = nl.evaluator();
        let table = Table::build(&f, c, nl.m)?;
        Ok(SolitonShape { c, amplitude: table.qstar, f, kind: Kind::Table(table) })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// `(Q_c(x), Q_c'(x))`.
    pub fn value_and_slope(&self, x: f64) -> (f64, f64) {
        let c = self.c;
        let sc = c.sqrt();
        match &self.kind {
            Kind::Power { m } => {
                let k = *m as f64 - 1.0;
                let z = 0.5 * k * sc * x;
                let q = self.amplitude * sech(z).powf(2.0 / k);
                (q, -q * sc * z.tanh())
            }
            Kind::Gardner { rho } => {
                let z = sc * x.abs();
                let e = (-z).exp();
                let den = 2.0 * e + rho * (1.0 + e * e);
                let q = 6.0 * c * e / den;
                let ratio = rho * (1.0 - e * e) / den;
                (q, -x.signum() * q * sc * ratio)
            }
            Kind::Table(t) => t.eval(x),
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.value_and_slope(x).0
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.value_and_slope(x).1
    }

    /// `φ = −Q'/Q`, computed without dividing two tiny numbers in the tails.
    pub fn phi(&self, x: f64) -> f64 {
        let c = self.c;
        let sc = c.sqrt();
        match &self.kind {
            Kind::Power { m } => sc * (0.5 * (*m as f64 - 1.0) * sc * x).tanh(),
            Kind::Gardner { rho } => {
                let z = sc * x.abs();
                let e = (-z).exp();
                x.signum() * sc * rho * (1.0 - e * e) / (2.0 * e + rho * (1.0 + e * e))
            }
            Kind::Table(t) => t.phi(x),
        }
    }

    /// `[Q, Q', Q'', Q''', Q'''']` at `x`, from the profile equation.
    pub fn jet(&self, x: f64) -> [f64; 5] {
        let (q, q1) = self.value_and_slope(x);
        let c = self.c;
        let f0 = self.f.f(q, 0);
        let f1 = self.f.f(q, 1);
        let f2 = self.f.f(q, 2);
        let q2 = c * q - f0;
        let q3 = (c - f1) * q1;
        let q4 = (c - f1) * q2 - f2 * q1 * q1;
        [q, q1, q2, q3, q4]
    }

    pub fn sample(&self, grid: &Grid) -> Profile {
        Profile::from_fn(grid, |x| self.value(x), Parity::Even, Decay::Localized)
    }

    pub fn sample_slope(&self, grid: &Grid) -> Profile {
        Profile::from_fn(grid, |x| self.slope(x), Parity::Odd, Decay::Localized)
    }
}

/// `θ(x)` on `x >= 0` for the turning-point construction.
#[derive(Debug, Clone, PartialEq)]
struct Table {
    qstar: f64,
    c: f64,
    dx: f64,
    theta: Vec<f64>,
    // -h'(q*) q* and h''(q*) q*² / 2, for R(θ) near the apex
    r0: f64,
    r1: f64,
    terms: Evaluator,
}

fn h_of(f: &Evaluator, c: f64, s: f64) -> f64 {
    c - 2.0 * f.primitive(s) / (s * s)
}

impl Table {
    fn build(f: &Evaluator, c: f64, m: u32) -> Result<Table> {
        let scale = c.powf(1.0 / (m as f64 - 1.0));
        let mut lo = 1e-6 * scale;
        if h_of(f, c, lo) <= 0.0 {
            bail!(NoSoliton, "h(σ) is not positive near 0 for c = {c}");
        }
        let mut hi = lo;
        loop {
            hi *= 1.005;
            if hi > 1e6 * scale.max(1.0) {
                bail!(NoSoliton, "no turning point for c = {c}");
            }
            if h_of(f, c, hi) <= 0.0 {
                break;
            }
            lo = hi;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if h_of(f, c, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let q = 0.5 * (lo + hi);
        let (f0, f1, big_f) = (f.f(q, 0), f.f(q, 1), f.primitive(q));
        let dh = -2.0 * f0 / (q * q) + 4.0 * big_f / (q * q * q);
        let d2h = -2.0 * f1 / (q * q) + 8.0 * f0 / (q * q * q) - 12.0 * big_f / (q * q * q * q);
        if !(dh < 0.0) || (-dh * q) < 1e-10 * c {
            bail!(NoSoliton, "turning point at {q} is degenerate (h' = {dh}); c is at the edge of the family");
        }
        let mut t = Table { qstar: q, c, dx: 0.02 / c.sqrt(), theta: Vec::new(), r0: -dh * q, r1: 0.5 * d2h * q * q, terms: f.clone() };
        t.integrate();
        Ok(t)
    }

    /// `R(θ)² = h(q* sin²θ)/cos²θ`.
    fn r(&self, theta: f64) -> f64 {
        let cos = theta.cos();
        let c2 = cos * cos;
        let r2 = if c2 < 1e-6 {
            self.r0 + self.r1 * c2
        } else {
            let s = self.qstar * theta.sin().powi(2);
            h_of(&self.terms, self.c, s) / c2
        };
        r2.max(0.0).sqrt()
    }

    fn rhs(&self, theta: f64) -> f64 {
        -0.5 * theta.sin() * self.r(theta)
    }

    fn integrate(&mut self) {
        const SUB: usize = 8;
        let hs = self.dx / SUB as f64;
        let mut th = core::f64::consts::FRAC_PI_2;
        loop {
            self.theta.push(th);
            if self.qstar * th.sin().powi(2) < 1e-40 * self.qstar {
                break;
            }
            for _ in 0..SUB {
                th = self.rk4(th, hs);
            }
        }
    }

    /// Dense output: a few RK4 steps from the nearest tabulated node. Unlike
    /// piecewise interpolation this keeps second differences of the samples
    /// clean.
    fn theta_at(&self, ax: f64) -> Option<f64> {
        let i = (ax / self.dx).round() as usize;
        if i + 1 >= self.theta.len() {
            return None;
        }
        let span = ax - i as f64 * self.dx;
        let hs = span / 4.0;
        let mut th = self.theta[i];
        for _ in 0..4 {
            th = self.rk4(th, hs);
        }
        Some(th)
    }

    fn rk4(&self, th: f64, hs: f64) -> f64 {
        let k1 = self.rhs(th);
        let k2 = self.rhs(th + 0.5 * hs * k1);
        let k3 = self.rhs(th + 0.5 * hs * k2);
        let k4 = self.rhs(th + hs * k3);
        th + hs * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    }

    fn tail(&self, ax: f64) -> (f64, f64) {
        let last = *self.theta.last().unwrap();
        let x_end = (self.theta.len() - 1) as f64 * self.dx;
        let q = self.qstar * last.sin().powi(2) * (-self.c.sqrt() * (ax - x_end)).exp();
        (q, -self.c.sqrt() * q)
    }

    fn eval(&self, x: f64) -> (f64, f64) {
        let ax = x.abs();
        let (q, dq) = match self.theta_at(ax) {
            Some(th) => {
                let s2 = th.sin().powi(2);
                let q = self.qstar * s2;
                (q, -q * th.cos() * self.r(th))
            }
            None => self.tail(ax),
        };
        (q, if x < 0.0 { -dq } else { dq })
    }

    fn phi(&self, x: f64) -> f64 {
        let v = match self.theta_at(x.abs()) {
            Some(th) => th.cos() * self.r(th),
            None => self.c.sqrt(),
        };
        if x < 0.0 {
            -v
        } else {
            v
        }
    }
}

/// Samples `Q_c` on `grid`.
pub fn soliton_profile(nl: &Nonlinearity, c: f64, grid: &Grid) -> Result<SolitonProfile> {
    let shape = SolitonShape::new(nl, c)?;
    Ok(SolitonProfile { profile: shape.sample(grid), c, amplitude: shape.amplitude(), nonlinearity: nl.clone() })
}

/// `ΛQ_c = ∂_c Q_c` by Richardson-extrapolated central differences.
pub fn lambda_q_at(nl: &Nonlinearity, c: f64, grid: &Grid) -> Result<Profile> {
    let delta = 1e-4 * c;
    let sample = |cc: f64| SolitonShape::new(nl, cc).map(|s| s.sample(grid));
    let diff = |d: f64| -> Result<Vec<f64>> {
        let (p, m) = (sample(c + d)?, sample(c - d)?);
        Ok(p.values().iter().zip(m.values()).map(|(a, b)| (a - b) / (2.0 * d)).collect())
    };
    let d1 = diff(delta)?;
    let d2 = diff(2.0 * delta)?;
    let v = d1.iter().zip(&d2).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
    Ok(Profile::from_values(grid, v, Parity::Even, Decay::Localized))
}

/// `ΛQ` at `c = 1`.
pub fn lambda_q(nl: &Nonlinearity, grid: &Grid) -> Result<Profile> {
    let s = stability_derivative(nl, 1.0)?;
    if s <= 0.0 {
        bail!(DegenerateFamily, "d/dc ∫Q_c² = {s} at c = 1; the soliton family is not stable");
    }
    lambda_q_at(nl, 1.0, grid)
}

/// `d/dc ∫ Q_c²`.
pub fn stability_derivative(nl: &Nonlinearity, c: f64) -> Result<f64> {
    check_speed(c)?;
    let grid = make_grid(60.0 / c.sqrt(), 8193)?;
    let mass = |cc: f64| -> Result<f64> {
        let s = SolitonShape::new(nl, cc).map_err(|e| match e {
            Error::InvalidArgument(m) | Error::NoSoliton(m) => Error::InvalidArgument(alloc::format!("family not defined on both sides of c = {c}: {m}")),
            other => other,
        })?;
        let q = s.sample(&grid);
        integrate(&q.mul(&q))
    };
    let delta = 1e-4 * c;
    let d = |h: f64| -> Result<f64> { Ok((mass(c + h)? - mass(c - h)?) / (2.0 * h)) };
    Ok((4.0 * d(delta)? - d(2.0 * delta)?) / 3.0)
}
