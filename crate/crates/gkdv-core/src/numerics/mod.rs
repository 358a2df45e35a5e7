//! Grids, sampled profiles and the quadrature/difference operators on them.
//!
//! All profiles live on a symmetric uniform grid `x_i = -L + i h`, `h = 2L/(n-1)`.
//! Parities are enforced when a profile is built, so odd data is exactly
//! antisymmetric in floating point and its integrals cancel pairwise.

mod fd;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::error::bail;
use crate::{Error, Result};

/// Symmetric uniform grid on `[-L, L]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    half_width: f64,
    n: usize,
    h: f64,
}

/// Builds the grid with `n` points on `[-half_width, half_width]`.
pub fn make_grid(half_width: f64, n: usize) -> Result<Grid> {
    if !(half_width.is_finite() && half_width > 0.0) {
        bail!(InvalidArgument, "grid half-width must be positive, got {half_width}");
    }
    if n < 16 {
        bail!(InvalidArgument, "grid needs at least 16 points, got {n}");
    }
    Ok(Grid { half_width, n, h: 2.0 * half_width / (n - 1) as f64 })
}

impl Grid {
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    /// Node `i`. The right half is computed from the right end so that
    /// `x(i) == -x(n-1-i)` exactly.
    pub fn x(&self, i: usize) -> f64 {
        let j = self.n - 1 - i;
        if i <= j {
            -self.half_width + i as f64 * self.h
        } else {
            self.half_width - j as f64 * self.h
        }
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    pub fn zero_index(&self) -> Option<usize> {
        (self.n % 2 == 1).then_some(self.n / 2)
    }

    /// Index of the last node with `x_i <= x`, clamped to the grid.
    pub fn locate(&self, x: f64) -> usize {
        let t = ((x + self.half_width) / self.h).floor();
        if t <= 0.0 {
            0
        } else {
            (t as usize).min(self.n - 1)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
            Parity::None => Parity::None,
        }
    }

    /// Parity of a product.
    pub fn times(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::None, _) | (_, Parity::None) => Parity::None,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }
}

/// Behaviour at `|x| -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decay {
    /// Exponentially small at both ends.
    Localized,
    /// Tends to finite (possibly nonzero) limits.
    Bounded,
    Unbounded,
}

impl Decay {
    fn weakest(self, other: Decay) -> Decay {
        use Decay::*;
        match (self, other) {
            (Unbounded, _) | (_, Unbounded) => Unbounded,
            (Bounded, _) | (_, Bounded) => Bounded,
            _ => Localized,
        }
    }
}

/// Values of a function on a [`Grid`], tagged with parity and decay.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
    parity: Parity,
    decay: Decay,
}

fn symmetrize(values: &mut [f64], parity: Parity) {
    let n = values.len();
    match parity {
        Parity::None => {}
        Parity::Even => {
            for i in 0..n / 2 {
                let m = 0.5 * (values[i] + values[n - 1 - i]);
                values[i] = m;
                values[n - 1 - i] = m;
            }
        }
        Parity::Odd => {
            for i in 0..n / 2 {
                let m = 0.5 * (values[i] - values[n - 1 - i]);
                values[i] = m;
                values[n - 1 - i] = -m;
            }
            if n % 2 == 1 {
                values[n / 2] = 0.0;
            }
        }
    }
}

impl Profile {
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64, parity: Parity, decay: Decay) -> Profile {
        let values = grid.xs().map(f).collect();
        Profile::from_values(grid, values, parity, decay)
    }

    /// Wraps sampled values; the declared parity is imposed by averaging with
    /// the mirror image.
    pub fn from_values(grid: &Grid, mut values: Vec<f64>, parity: Parity, decay: Decay) -> Profile {
        assert_eq!(values.len(), grid.n, "profile length does not match grid");
        symmetrize(&mut values, parity);
        Profile { grid: *grid, values, parity, decay }
    }

    pub fn zeros(grid: &Grid, parity: Parity, decay: Decay) -> Profile {
        Profile { grid: *grid, values: vec![0.0; grid.n], parity, decay }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn decay(&self) -> Decay {
        self.decay
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn with_decay(mut self, decay: Decay) -> Profile {
        self.decay = decay;
        self
    }

    pub fn with_parity(mut self, parity: Parity) -> Profile {
        symmetrize(&mut self.values, parity);
        self.parity = parity;
        self
    }

    pub fn map(&self, f: impl Fn(f64) -> f64, parity: Parity, decay: Decay) -> Profile {
        Profile::from_values(&self.grid, self.values.iter().map(|&v| f(v)).collect(), parity, decay)
    }

    /// Linear combination `a*self + b*other`.
    pub fn axpby(&self, a: f64, other: &Profile, b: f64) -> Profile {
        debug_assert_eq!(self.grid, other.grid);
        let parity = if self.parity == other.parity { self.parity } else { Parity::None };
        let values = self.values.iter().zip(&other.values).map(|(u, v)| a * u + b * v).collect();
        Profile { grid: self.grid, values, parity, decay: self.decay.weakest(other.decay) }
    }

    pub fn add(&self, other: &Profile) -> Profile {
        self.axpby(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Profile) -> Profile {
        self.axpby(1.0, other, -1.0)
    }

    pub fn scale(&self, a: f64) -> Profile {
        Profile { values: self.values.iter().map(|v| a * v).collect(), ..self.clone() }
    }

    /// Adds the constant `a` (the result is at best bounded).
    pub fn shift(&self, a: f64) -> Profile {
        let parity = if a == 0.0 || self.parity == Parity::Even { self.parity } else { Parity::None };
        let decay = if a == 0.0 { self.decay } else { self.decay.weakest(Decay::Bounded) };
        Profile { values: self.values.iter().map(|v| v + a).collect(), parity, decay, grid: self.grid }
    }

    /// Pointwise product. Localized times bounded stays localized.
    pub fn mul(&self, other: &Profile) -> Profile {
        debug_assert_eq!(self.grid, other.grid);
        use Decay::*;
        let decay = match (self.decay, other.decay) {
            (Unbounded, _) | (_, Unbounded) => Unbounded,
            (Localized, _) | (_, Localized) => Localized,
            _ => Bounded,
        };
        let values = self.values.iter().zip(&other.values).map(|(u, v)| u * v).collect();
        Profile { grid: self.grid, values, parity: self.parity.times(other.parity), decay }
    }

    /// Inner product `∫ self * other`.
    pub fn dot(&self, other: &Profile) -> Result<f64> {
        integrate(&self.mul(other))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Verifies finiteness, declared parity and declared decay.
    pub fn check_invariants(&self) -> Result<()> {
        if let Some(i) = self.values.iter().position(|v| !v.is_finite()) {
            bail!(Domain, "non-finite value at node {i}");
        }
        let n = self.values.len();
        let scale = self.max_abs().max(1e-300);
        let sign = match self.parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
            Parity::None => 0.0,
        };
        if sign != 0.0 {
            for i in 0..n / 2 {
                if (self.values[i] - sign * self.values[n - 1 - i]).abs() > 1e-10 * scale {
                    bail!(Domain, "parity violated at node {i}");
                }
            }
        }
        match self.decay {
            Decay::Unbounded => bail!(Domain, "unbounded profiles cannot be stored on a truncated grid"),
            Decay::Localized => {
                let tail = self.values[0].abs().max(self.values[n - 1].abs());
                if tail > 1e-6 * scale.max(1.0) {
                    bail!(Domain, "profile declared localized but endpoint value is {tail:e}");
                }
            }
            Decay::Bounded => {}
        }
        Ok(())
    }

    /// Six-point Lagrange interpolation; outside the grid the endpoint values
    /// are used as limits.
    pub fn eval_at(&self, x: f64) -> f64 {
        let g = &self.grid;
        let n = g.n;
        if x <= -g.half_width {
            return self.values[0];
        }
        if x >= g.half_width {
            return self.values[n - 1];
        }
        let k = g.locate(x);
        let start = k.saturating_sub(2).min(n - 6);
        let mut s = 0.0;
        for a in start..start + 6 {
            let mut w = 1.0;
            let xa = g.x(a);
            for b in start..start + 6 {
                if b != a {
                    w *= (x - g.x(b)) / (xa - g.x(b));
                }
            }
            s += w * self.values[a];
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 48 + 8);
        out.push_str("x,value\n");
        for (x, v) in self.grid.xs().zip(&self.values) {
            let _ = writeln!(out, "{x:.16e},{v:.16e}");
        }
        out
    }

    /// Reads the two-column CSV written by [`Profile::to_csv`]. The grid is
    /// rebuilt from the first node and the row count.
    pub fn from_csv(text: &str) -> Result<Profile> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == "x,value" => {}
            _ => bail!(InvalidArgument, "missing header 'x,value'"),
        }
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (row, line) in lines.enumerate() {
            let mut parts = line.split(',');
            let (Some(a), Some(b), None) = (parts.next(), parts.next(), parts.next()) else {
                bail!(InvalidArgument, "row {row}: expected two columns");
            };
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::InvalidArgument(format!("row {row}: {e}")));
            xs.push(parse(a)?);
            vs.push(parse(b)?);
        }
        if xs.len() < 16 {
            bail!(InvalidArgument, "need at least 16 rows, got {}", xs.len());
        }
        let grid = make_grid(-xs[0], xs.len())?;
        let tol = 1e-9 * grid.half_width;
        if xs.iter().enumerate().any(|(i, &x)| (x - grid.x(i)).abs() > tol) {
            bail!(InvalidArgument, "nodes are not a symmetric uniform grid");
        }
        Ok(Profile { grid, values: vs, parity: Parity::None, decay: Decay::Bounded })
    }
}

/// Simpson weights (in units of h) for `n` nodes. For an odd number of
/// intervals the two placements of the 3/8 panel are averaged so that the
/// weights stay mirror symmetric.
fn simpson_weights(n: usize) -> Vec<f64> {
    fn simpson_into(w: &mut [f64], start: usize, intervals: usize) {
        for k in (0..intervals).step_by(2) {
            w[start + k] += 1.0 / 3.0;
            w[start + k + 1] += 4.0 / 3.0;
            w[start + k + 2] += 1.0 / 3.0;
        }
    }
    fn three_eighths_into(w: &mut [f64], start: usize) {
        for (j, c) in [3.0, 9.0, 9.0, 3.0].iter().enumerate() {
            w[start + j] += c / 8.0;
        }
    }
    let mut w = vec![0.0; n];
    let intervals = n - 1;
    if intervals % 2 == 0 {
        simpson_into(&mut w, 0, intervals);
        return w;
    }
    let mut right = vec![0.0; n];
    simpson_into(&mut w, 0, intervals - 3);
    three_eighths_into(&mut w, n - 4);
    three_eighths_into(&mut right, 0);
    simpson_into(&mut right, 3, intervals - 3);
    for (a, b) in w.iter_mut().zip(&right) {
        *a = 0.5 * (*a + b);
    }
    w
}

/// Simpson weights including the factor `h`, so `Σ w_i v_i ≈ ∫ v`.
pub fn quadrature_weights(grid: &Grid) -> Vec<f64> {
    simpson_weights(grid.n).into_iter().map(|w| w * grid.h).collect()
}

/// `∫ p dx` over the grid.
pub fn integrate(p: &Profile) -> Result<f64> {
    if p.decay == Decay::Unbounded {
        bail!(Domain, "cannot integrate an unbounded profile");
    }
    let w = simpson_weights(p.values.len());
    Ok(pairwise_weighted_sum(&w, &p.values) * p.grid.h)
}

// Sums w_i v_i by mirrored pairs, which makes odd data cancel exactly.
fn pairwise_weighted_sum(w: &[f64], v: &[f64]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n / 2 {
        s += w[i] * (v[i] + v[n - 1 - i]);
    }
    if n % 2 == 1 {
        s += w[n / 2] * v[n / 2];
    }
    s
}

/// `∫_0^x p`, fourth order accurate. Parity flips.
pub fn cumulative_primitive(p: &Profile) -> Profile {
    let v = &p.values;
    let n = v.len();
    let h = p.grid.h;
    let mut c = vec![0.0; n];
    for k in 0..n - 1 {
        let step = if k >= 2 && k + 3 < n {
            (11.0 * (v[k - 2] + v[k + 3]) - 93.0 * (v[k - 1] + v[k + 2]) + 802.0 * (v[k] + v[k + 1])) / 1440.0
        } else if k == 0 {
            (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3]) / 24.0
        } else if k == n - 2 {
            (9.0 * v[n - 1] + 19.0 * v[n - 2] - 5.0 * v[n - 3] + v[n - 4]) / 24.0
        } else {
            (-v[k - 1] + 13.0 * v[k] + 13.0 * v[k + 1] - v[k + 2]) / 24.0
        };
        c[k + 1] = c[k] + step * h;
    }
    let origin = match p.grid.zero_index() {
        Some(z) => c[z],
        None => {
            // from x_k to the midpoint, six nodes x_{k-2}..x_{k+3}
            let k = n / 2 - 1;
            let half = (189.0 * v[k - 2] - 1673.0 * v[k - 1] + 19082.0 * v[k] + 6582.0 * v[k + 1] - 1303.0 * v[k + 2] + 163.0 * v[k + 3]) / 46080.0;
            c[k] + half * h
        }
    };
    for x in c.iter_mut() {
        *x -= origin;
    }
    let parity = p.parity.flip();
    let decay = match p.decay {
        Decay::Localized if p.parity == Parity::Odd => Decay::Localized,
        Decay::Unbounded => Decay::Unbounded,
        _ => Decay::Bounded,
    };
    Profile::from_values(&p.grid, c, parity, decay)
}

/// Derivative of order 1, 2 or 3.
pub fn differentiate(p: &Profile, order: usize) -> Result<Profile> {
    if !(1..=3).contains(&order) {
        bail!(InvalidArgument, "derivative order must be 1, 2 or 3, got {order}");
    }
    let st = fd::Stencils::new(order);
    let out = st.apply(&p.values, p.grid.h.powi(-(order as i32)));
    let parity = if order % 2 == 1 { p.parity.flip() } else { p.parity };
    let decay = if p.decay == Decay::Unbounded { Decay::Unbounded } else { p.decay };
    Ok(Profile::from_values(&p.grid, out, parity, decay))
}

/// `‖p'‖ + sqrt(c)‖p‖` in L² over `x >= x0` (the whole grid when `x0` is
/// `None`).
pub fn h1_norm(p: &Profile, x0: Option<f64>, c_weight: f64) -> Result<f64> {
    let lo = x0.unwrap_or(-p.grid.half_width);
    h1_norm_between(p, lo, p.grid.half_width, c_weight)
}

/// Same as [`h1_norm`] restricted to `lo <= x <= hi`.
pub fn h1_norm_between(p: &Profile, lo: f64, hi: f64, c_weight: f64) -> Result<f64> {
    if !(c_weight.is_finite() && c_weight > 0.0) {
        bail!(InvalidArgument, "norm weight must be positive, got {c_weight}");
    }
    let g = &p.grid;
    if lo > g.half_width || hi < -g.half_width || lo >= hi {
        bail!(InvalidArgument, "window [{lo}, {hi}] misses the grid [-{0}, {0}]", g.half_width);
    }
    let d = differentiate(p, 1)?;
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..g.n {
        let x = g.x(i);
        if x < lo || x > hi {
            continue;
        }
        // trapezoid weights: halve the window ends
        let w = if (i == 0 || g.x(i - 1) < lo) || (i == g.n - 1 || g.x(i + 1) > hi) { 0.5 } else { 1.0 };
        a += w * d.values[i] * d.values[i];
        b += w * p.values[i] * p.values[i];
    }
    Ok((a * g.h).sqrt() + c_weight.sqrt() * (b * g.h).sqrt())
}
