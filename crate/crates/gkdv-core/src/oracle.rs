//! Closed-form ground truth for small perturbations of the integrable
//! equations: leading coefficients `c_{m,p}` of the defect, sech-power
//! integrals, the explicit Gardner solution of the first system and the
//! first-order coefficient `a_{1,0}¹`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::cascade::{Cascade, SigmaIndex};
use crate::error::bail;
use crate::linop::LinearizedOperator;
use crate::numerics::{Decay, Grid, Parity, Profile};
use crate::soliton::SolitonShape;
use crate::{Nonlinearity, Result};

fn sech(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    2.0 * e / (1.0 + e * e)
}

/// Base soliton of `s^m` at speed 1.
pub fn base_soliton(m: u32, x: f64) -> f64 {
    if m == 2 {
        1.5 * sech(0.5 * x).powi(2)
    } else {
        core::f64::consts::SQRT_2 * sech(x)
    }
}

/// `x Q⁰'` written through `tanh` so it stays finite for large `|x|`.
fn x_dq(m: u32, x: f64) -> f64 {
    if m == 2 {
        -x * base_soliton(2, x) * (0.5 * x).tanh()
    } else {
        -x * base_soliton(3, x) * x.tanh()
    }
}

fn check_m(m: u32) -> Result<()> {
    if m != 2 && m != 3 {
        bail!(InvalidArgument, "m must be 2 or 3, got {m}");
    }
    Ok(())
}

/// Trapezoid rule on a wide, fine grid. The integrands are analytic and
/// decay exponentially, so the error is far below `1e-12`.
fn quad(f: impl Fn(f64) -> f64, decay_rate: f64) -> f64 {
    let half = 40.0 / decay_rate.min(1.0) + 40.0;
    let h = 2e-3;
    let n = (half / h) as usize;
    let mut s = f(0.0);
    for i in 1..=n {
        let x = i as f64 * h;
        s += f(x) + f(-x);
    }
    s * h
}

/// `∫(Q⁰)^p` for the base soliton of `s^m`.
///
/// Integer powers come from the recursions seeded by `∫Q⁰ = 6` (m = 2) or
/// `∫Q⁰ = √2π`, `∫(Q⁰)² = 4` (m = 3); other powers are integrated directly.
pub fn sech_power_integral(m: u32, p: f64) -> Result<f64> {
    check_m(m)?;
    if !(p.is_finite() && p >= 1.0) {
        bail!(InvalidArgument, "power must be at least 1, got {p}");
    }
    if p != p.round() || p > 200.0 {
        return Ok(quad(|x| base_soliton(m, x).powf(p), p));
    }
    let n = p as u32;
    if m == 2 {
        // ∫Q^{k+1} = 3k/(2k+1) ∫Q^k
        let mut v = 6.0;
        for k in 1..n {
            v *= 3.0 * f64::from(k) / (2.0 * f64::from(k) + 1.0);
        }
        Ok(v)
    } else {
        let (mut v, start) = if n % 2 == 1 { (core::f64::consts::SQRT_2 * core::f64::consts::PI, 1) } else { (4.0, 2) };
        // ∫Q^{k+2} = 2k/(k+1) ∫Q^k
        let mut k = start;
        while k < n {
            v *= 2.0 * f64::from(k) / (f64::from(k) + 1.0);
            k += 2;
        }
        Ok(v)
    }
}

/// `c_{m,p}`, the slope of the defect `d(ε)` at `ε = 0`.
pub fn leading_coefficient(m: u32, p: f64) -> Result<f64> {
    check_m(m)?;
    if !(p.is_finite() && p >= 3.0) {
        bail!(InvalidArgument, "the leading coefficient needs p >= 3, got {p}");
    }
    let integral = sech_power_integral(m, p)?;
    let factor = if m == 2 {
        (p - 3.0) * (2.0 * p - 1.0) * (24.0 - 23.0 * p + 3.0 * p * p + 2.0 * p.powi(3)) / (36.0 * (p * p - 1.0) * (p - 2.0))
    } else {
        (p - 1.0) * (p - 3.0) * (p * p - 3.0 * p + 8.0) / (8.0 * (p - 2.0) * (p + 1.0))
    };
    Ok(-factor * integral)
}

/// Explicit solution of the first system for `f(s) = s² − μ̃s³`.
#[derive(Debug, Clone, PartialEq)]
pub struct GardnerZeroth {
    pub a10: f64,
    pub b10: f64,
    pub kappa10: f64,
    pub a_profile: Profile,
    pub b_profile: Profile,
}

fn gardner_shape(mu_tilde: f64) -> Result<SolitonShape> {
    if !(mu_tilde < 2.0 / 9.0) {
        bail!(NoSoliton, "the Gardner soliton needs mu < 2/9, got {mu_tilde}");
    }
    SolitonShape::new(&Nonlinearity::gardner(mu_tilde), 1.0)
}

/// `∫(Q⁰)^k` for `k = 0..=n` (entry 0 unused) for the Gardner soliton.
fn gardner_moments(shape: &SolitonShape, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        *o = quad(|x| shape.value(x).powi(k as i32), 0.5);
    }
    out
}

pub fn gardner_zeroth(mu_tilde: f64, grid: &Grid) -> Result<GardnerZeroth> {
    let shape = gardner_shape(mu_tilde)?;
    let mo = gardner_moments(&shape, 2);
    // both numerator and denominator vanish at μ̃ = 0 (∫Q = ∫Q² = 6 for KdV)
    let kappa10 = if mu_tilde == 0.0 { -10.0 / 3.0 } else { 3.0 * mu_tilde * (mo[2] - 3.0 * mo[1]) / ((3.0 * mu_tilde - 1.0) * mo[2] + mo[1]) };
    let a_profile = Profile::from_fn(
        grid,
        |x| {
            let q = shape.value(x);
            -4.0 / 3.0 * q + mu_tilde * q * q
        },
        Parity::Even,
        Decay::Localized,
    );
    let b_profile = Profile::from_fn(grid, |x| -2.0 * shape.phi(x) + kappa10 * shape.slope(x), Parity::Odd, Decay::Bounded);
    Ok(GardnerZeroth { a10: 2.0 / 3.0, b10: -2.0, kappa10, a_profile, b_profile })
}

// Polynomials in Q, lowest degree first.
fn pmul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn padd(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += s * y;
    }
    out
}

/// `d_{μ̃,0}` evaluated by writing every integrand of the quadratic closed
/// formula as a polynomial in `Q⁰` and integrating moment by moment.
///
/// For Gardner `Q'' = Q − Q² + μ̃Q³` and `Q'² = Q² − ⅔Q³ + ½μ̃Q⁴`, and the
/// `B` term drops out because `3A' − 2(2Q − 3μ̃Q²)φ = 0`.
pub fn gardner_defect_chain(mu_tilde: f64) -> Result<f64> {
    let shape = gardner_shape(mu_tilde)?;
    let mo = gardner_moments(&shape, 8);
    let int = |poly: &[f64]| -> f64 {
        assert!(poly.len() <= mo.len() && poly[0] == 0.0, "integrand must be localized");
        poly.iter().zip(&mo).skip(1).map(|(c, m)| c * m).sum()
    };
    let mu = mu_tilde;
    let q = [0.0, 1.0];
    let d2q = [0.0, 1.0, -1.0, mu];
    let dq_sq = [0.0, 0.0, 1.0, -2.0 / 3.0, 0.5 * mu];
    let a = [0.0, -4.0 / 3.0, mu];
    // A'' = −4/3 Q'' + μ̃(2Q'² + 2QQ'')
    let d2a = padd(&padd(&[], &d2q, -4.0 / 3.0), &padd(&pmul(&[2.0], &dq_sq), &pmul(&[0.0, 2.0], &d2q), 1.0), mu);
    let one_a = padd(&[1.0], &a, 1.0);
    let f1 = [0.0, 2.0, -3.0 * mu];
    let a10 = 2.0 / 3.0;
    let b = -int(&q) / 3.0 + 0.5 * mu * int(&pmul(&q, &q));

    let cube = pmul(&pmul(&one_a, &one_a), &one_a);
    let mut d = -b.powi(3) / 3.0 - 2.0 * b;
    d += 0.25 * int(&pmul(&[0.0, -6.0 * mu], &cube));
    d += 0.5 * int(&pmul(&a, &padd(&[1.0], &pmul(&a, &a), 1.0)));
    d -= 0.5 * a10 * int(&pmul(&q, &a));
    d -= 0.75 * a10.powi(3) * int(&dq_sq);
    d += 0.5 * a10 * a10 * int(&pmul(&q, &padd(&q, &pmul(&f1, &one_a), -1.0)));
    d -= 0.75 * a10 * int(&pmul(&padd(&pmul(&f1, &one_a), &d2a, 3.0), &a));
    d += 3.0 * a10 * a10 * int(&pmul(&d2q, &a));
    Ok(d)
}

/// `a_{1,0}¹ = ∂_ε a_{1,0}` at `ε = 0` for `f = s^m + εs^p`.
///
/// For `m = 3` this builds `Q¹ = (𝓛⁰)⁻¹(Q⁰)^p` on `grid` and integrates
/// `∫ΛQ¹` through the cancellation identity, which avoids ever forming `ΛQ¹`.
pub fn a10_first_order(m: u32, p: f64, grid: &Grid) -> Result<f64> {
    check_m(m)?;
    if !(p.is_finite() && p >= 3.0) {
        bail!(InvalidArgument, "a10_first_order needs p >= 3, got {p}");
    }
    if m == 2 {
        return Ok(-(p - 3.0) * (2.0 * p - 1.0) / (9.0 * (p + 1.0)) * sech_power_integral(2, p)?);
    }
    let op = LinearizedOperator::new(&Nonlinearity::pure_power(3), grid)?;
    let qp = Profile::from_fn(grid, |x| base_soliton(3, x).powf(p), Parity::Even, Decay::Localized);
    let q1 = op.invert(&qp, Parity::Even)?;
    let weight = Profile::from_fn(
        grid,
        |x| {
            let q = base_soliton(3, x);
            let lq = 0.5 * (x_dq(3, x) + q);
            -1.0 + q * q + 6.0 * q * lq - 6.0 * q.powi(3) * lq
        },
        Parity::Even,
        Decay::Bounded,
    );
    let tail = Profile::from_fn(
        grid,
        |x| {
            let q = base_soliton(3, x);
            let lq = 0.5 * (x_dq(3, x) + q);
            p * q.powf(p - 1.0) * lq * (1.0 - q * q)
        },
        Parity::Even,
        Decay::Localized,
    );
    Ok(q1.dot(&weight)? + crate::numerics::integrate(&tail)?)
}

/// A relation `𝓛⁰ u = v` for the base operator of `s^m`.
#[derive(Debug, Clone, Copy)]
pub struct Identity {
    pub name: &'static str,
    pub m: u32,
    pub argument: fn(f64) -> f64,
    pub image: fn(f64) -> f64,
}

fn q2(x: f64) -> f64 {
    base_soliton(2, x)
}
fn lq2(x: f64) -> f64 {
    0.5 * x_dq(2, x) + q2(x)
}
fn q3(x: f64) -> f64 {
    base_soliton(3, x)
}

/// The explicit inverse images used in the first-order expansions.
pub fn identities() -> Vec<Identity> {
    vec![
        Identity {
            name: "inv1",
            m: 3,
            argument: |x| -2.25 * x_dq(3, x) - 3.75 * q3(x) + 1.5 * q3(x).powi(3),
            image: |x| 4.5 * q3(x) * (1.0 - q3(x).powi(2)).powi(2),
        },
        Identity {
            name: "inv2",
            m: 3,
            argument: |x| q3(x) * x_dq(3, x),
            image: |x| {
                let q = q3(x);
                -4.0 * q * q + 3.0 * q.powi(4) - 3.0 * q * x_dq(3, x) * (1.0 - q * q)
            },
        },
        Identity { name: "inv3", m: 3, argument: |x| q3(x).powi(4), image: |x| -15.0 * q3(x).powi(4) + 7.0 * q3(x).powi(6) },
        Identity { name: "inv0c2", m: 2, argument: |x| 1.0 - 4.0 / 3.0 * lq2(x), image: |x| 1.0 - 2.0 / 3.0 * q2(x) },
        Identity {
            name: "inv02",
            m: 2,
            argument: |x| {
                let q = q2(x);
                (1.0 - q) * (1.0 + x * x * q / 3.0) - q
            },
            image: |x| 1.0 - 8.0 / 3.0 * lq2(x) + 8.0 / 3.0 * lq2(x).powi(2),
        },
        Identity { name: "inv0a2", m: 2, argument: |x| -5.0 + 68.0 / 9.0 * q2(x) - 6.0 * lq2(x), image: |x| -5.0 + 16.0 * q2(x) - 68.0 / 9.0 * q2(x).powi(2) },
        Identity {
            name: "inv0b2",
            m: 2,
            argument: |x| 2.0 + 20.0 / 3.0 * lq2(x) - 170.0 / 27.0 * q2(x),
            image: |x| 2.0 - 32.0 / 3.0 * q2(x) + 170.0 / 27.0 * q2(x).powi(2),
        },
    ]
}

impl Identity {
    /// Sup-norm of `𝓛⁰u − v` on `grid`.
    pub fn residual(&self, grid: &Grid) -> Result<f64> {
        let op = LinearizedOperator::new(&Nonlinearity::pure_power(self.m), grid)?;
        let u = Profile::from_fn(grid, self.argument, Parity::Even, Decay::Bounded);
        let v = Profile::from_fn(grid, self.image, Parity::Even, Decay::Bounded);
        Ok(op.apply(&u).sub(&v).max_abs())
    }
}

/// Extrapolates `d(ε)/ε` to `ε = 0` by polynomial (Neville) extrapolation
/// through the given samples `(ε, d)`.
pub fn richardson_slope(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.is_empty() || samples.iter().any(|s| s.0 == 0.0 || !s.0.is_finite()) {
        bail!(InvalidArgument, "need nonzero finite sample points");
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let mut t: Vec<f64> = samples.iter().map(|s| s.1 / s.0).collect();
    let n = t.len();
    for k in 1..n {
        for i in 0..n - k {
            let (xi, xj) = (xs[i], xs[i + k]);
            if xi == xj {
                bail!(InvalidArgument, "sample points must be distinct");
            }
            t[i] = (xj * t[i] - xi * t[i + 1]) / (xj - xi);
        }
    }
    Ok(t[0])
}

/// Defect of the `ε`-family from the first two cascade systems only.
pub fn pipeline_defect(m: u32, p: f64, epsilon: f64, grid: &Grid) -> Result<f64> {
    let nl = Nonlinearity::epsilon_family(m, epsilon, p, 0.0)?;
    let mut c = Cascade::new(&nl, grid)?;
    c.solve_index(SigmaIndex::new(1, 0))?;
    c.solve_index(SigmaIndex::new(2, 0))?;
    Ok(c.defect())
}

/// One row of the oracle comparison table.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SlopeRow {
    pub m: u32,
    pub p: f64,
    pub c_mp: f64,
    pub pipeline_slope: f64,
    pub rel_error: f64,
}

/// Compares the extrapolated pipeline slope with `c_{m,p}`.
pub fn slope_row(m: u32, p: f64, epsilons: &[f64], grid: &Grid) -> Result<SlopeRow> {
    let c_mp = leading_coefficient(m, p)?;
    let samples = epsilons.iter().map(|&e| Ok((e, pipeline_defect(m, p, e, grid)?))).collect::<Result<Vec<_>>>()?;
    let pipeline_slope = richardson_slope(&samples)?;
    let rel_error = if c_mp == 0.0 { pipeline_slope.abs() } else { ((pipeline_slope - c_mp) / c_mp).abs() };
    Ok(SlopeRow { m, p, c_mp, pipeline_slope, rel_error })
}

/// `ε` values used for the slope comparison.
pub const SLOPE_EPSILONS: [f64; 3] = [1e-3, 5e-4, 2.5e-4];
