//! The translated-frame residual `S[u] = u_t + (u_xx − u + f(u))_x` of the
//! approximate solutions, measured in `H¹` on a periodic box.

use gkdv_core::approx::{ApproxSolution, Variant};
use gkdv_core::Nonlinearity;

use crate::error::Result;
use crate::spectral::{PeriodicGrid, Spectral};

/// Pointwise residual at time `t`. `u(t, xs)` samples the family; the time
/// derivative is the central difference with step `dt`.
pub fn residual_s(nl: &Nonlinearity, spec: &Spectral, u: impl Fn(f64, &[f64]) -> Vec<f64>, t: f64, dt: f64) -> Vec<f64> {
    let xs = spec.grid.xs();
    let ev = nl.evaluator();
    let now = u(t, &xs);
    let later = u(t + dt, &xs);
    let earlier = u(t - dt, &xs);
    let uxx = spec.derivative(&now, 2);
    let flux: Vec<f64> = now.iter().zip(&uxx).map(|(&v, &d2)| d2 - v + ev.f(v, 0)).collect();
    let dflux = spec.derivative(&flux, 1);
    (0..xs.len()).map(|j| (later[j] - earlier[j]) / (2.0 * dt) + dflux[j]).collect()
}

/// Box large enough for `|t| ≤ T_c` with both solitons far from the seam.
pub fn approx_box(c: f64, t_c: f64) -> Result<PeriodicGrid> {
    let half = t_c + 32.0 / c.sqrt() + 40.0;
    let n = ((2.0 * half / 0.08).ceil() as usize).next_power_of_two();
    PeriodicGrid::new(half, n)
}

/// `‖S(t)‖_{H¹}` at equispaced times over `[−T_c, T_c]`.
#[derive(Debug, Clone)]
pub struct ResidualScan {
    pub c: f64,
    pub variant: Variant,
    pub times: Vec<f64>,
    pub h1: Vec<f64>,
}

impl ResidualScan {
    pub fn max(&self) -> f64 {
        self.h1.iter().copied().fold(0.0, f64::max)
    }
}

pub const SCAN_TIMES: usize = 41;

pub fn residual_scan(approx: &ApproxSolution, n_times: usize) -> Result<ResidualScan> {
    let spec = Spectral::new(approx_box(approx.c, approx.t_c)?);
    let nl = &approx.cascade.nl;
    let dt = 1e-5 * approx.t_c;
    let times: Vec<f64> = if n_times == 1 { vec![0.0] } else { (0..n_times).map(|i| approx.t_c * (-1.0 + 2.0 * i as f64 / (n_times - 1) as f64)).collect() };
    let h1 = times.iter().map(|&t| spec.h1_norm(&residual_s(nl, &spec, |s, xs| approx.eval_points(s, xs), t, dt))).collect();
    Ok(ResidualScan { c: approx.c, variant: approx.variant, times, h1 })
}
