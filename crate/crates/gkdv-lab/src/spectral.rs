//! Fourier pseudospectral operations on a uniform periodic grid.

use std::sync::Arc;

use realfft::num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{invalid, Result};

/// `n` equispaced points on `[−L, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicGrid {
    pub half_length: f64,
    pub n: usize,
}

impl PeriodicGrid {
    pub fn new(half_length: f64, n: usize) -> Result<PeriodicGrid> {
        if !(half_length.is_finite() && half_length > 0.0) {
            invalid!("half length must be positive, got {half_length}");
        }
        if n < 16 || !n.is_power_of_two() {
            invalid!("number of modes must be a power of two >= 16, got {n}");
        }
        Ok(PeriodicGrid { half_length, n })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.n as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_length + j as f64 * self.spacing()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.x(j)).collect()
    }

    /// Angular wavenumber of mode `j` in FFT order.
    pub fn wavenumber(&self, j: usize) -> f64 {
        let n = self.n as isize;
        let j = j as isize;
        let s = if j < n / 2 { j } else { j - n };
        std::f64::consts::PI / self.half_length * s as f64
    }

    /// Trapezoid (spectrally accurate) integral of samples.
    pub fn integrate(&self, v: &[f64]) -> f64 {
        v.iter().sum::<f64>() * self.spacing()
    }
}

/// Real-to-complex FFT plans and wavenumbers for one grid. Spectra hold the
/// `n/2 + 1` non-negative modes.
#[derive(Clone)]
pub struct Spectral {
    pub grid: PeriodicGrid,
    fwd: Arc<dyn RealToComplex<f64>>,
    inv: Arc<dyn ComplexToReal<f64>>,
    k: Vec<f64>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish()
    }
}

impl Spectral {
    pub fn new(grid: PeriodicGrid) -> Spectral {
        let mut planner = RealFftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n);
        let inv = planner.plan_fft_inverse(grid.n);
        let k = (0..=grid.n / 2).map(|j| grid.wavenumber(j).abs()).collect();
        Spectral { grid, fwd, inv, k }
    }

    /// Wavenumbers of the `n/2 + 1` stored modes; the last is Nyquist.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    pub fn modes(&self) -> usize {
        self.k.len()
    }

    /// Forward transform; `u` is used as scratch.
    pub fn forward_into(&self, u: &mut [f64], out: &mut [Complex64]) {
        self.fwd.process(u, out).expect("buffer sizes match the plan");
    }

    /// Normalized inverse transform; `modes` is used as scratch.
    pub fn inverse_into(&self, modes: &mut [Complex64], out: &mut [f64]) {
        let last = modes.len() - 1;
        modes[0].im = 0.0;
        modes[last].im = 0.0;
        self.inv.process(modes, out).expect("buffer sizes match the plan");
        let s = 1.0 / self.grid.n as f64;
        for v in out.iter_mut() {
            *v *= s;
        }
    }

    pub fn forward(&self, u: &[f64]) -> Vec<Complex64> {
        let mut buf = u.to_vec();
        let mut out = vec![Complex64::default(); self.modes()];
        self.forward_into(&mut buf, &mut out);
        out
    }

    pub fn inverse(&self, mut modes: Vec<Complex64>) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.n];
        self.inverse_into(&mut modes, &mut out);
        out
    }

    /// `d^order u / dx^order`. The Nyquist mode is dropped for odd orders.
    pub fn derivative(&self, u: &[f64], order: u32) -> Vec<f64> {
        let mut m = self.forward(u);
        let last = m.len() - 1;
        for (j, z) in m.iter_mut().enumerate() {
            if order % 2 == 1 && j == last {
                *z = Complex64::default();
                continue;
            }
            *z *= Complex64::new(0.0, self.k[j]).powu(order);
        }
        self.inverse(m)
    }

    /// `(∫ v² + ∫ v_x²)^{1/2}`.
    pub fn h1_norm(&self, v: &[f64]) -> f64 {
        let dv = self.derivative(v, 1);
        let s: f64 = v.iter().zip(&dv).map(|(a, b)| a * a + b * b).sum();
        (s * self.grid.spacing()).sqrt()
    }

    pub fn l2_norm(&self, v: &[f64]) -> f64 {
        (v.iter().map(|a| a * a).sum::<f64>() * self.grid.spacing()).sqrt()
    }
}
