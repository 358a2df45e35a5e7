//! Locating solitons in sampled data.

use gkdv_core::soliton::SolitonShape;
use gkdv_core::Nonlinearity;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, LabError, Result};
use crate::spectral::PeriodicGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonFit {
    pub c: f64,
    pub x: f64,
}

/// A local maximum with parabolic refinement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub x: f64,
    pub amp: f64,
}

fn refine(grid: &PeriodicGrid, u: &[f64], i: usize) -> Peak {
    let n = u.len();
    let (a, b, c) = (u[(i + n - 1) % n], u[i], u[(i + 1) % n]);
    let curv = a - 2.0 * b + c;
    if curv >= 0.0 {
        return Peak { x: grid.x(i), amp: b };
    }
    let off = 0.5 * (a - c) / curv;
    Peak { x: grid.x(i) + off * grid.spacing(), amp: b - 0.25 * (a - c) * off }
}

/// The two largest local maxima, largest first.
pub fn two_peaks(grid: &PeriodicGrid, u: &[f64]) -> [Option<Peak>; 2] {
    let n = u.len();
    let mut best: [Option<(usize, f64)>; 2] = [None, None];
    for i in 0..n {
        let v = u[i];
        if v > u[(i + n - 1) % n] && v >= u[(i + 1) % n] && v > 0.0 {
            if best[0].map_or(true, |(_, b)| v > b) {
                best[1] = best[0];
                best[0] = Some((i, v));
            } else if best[1].map_or(true, |(_, b)| v > b) {
                best[1] = Some((i, v));
            }
        }
    }
    best.map(|b| b.map(|(i, _)| refine(grid, u, i)))
}

/// The two largest local maxima of `|u|`, with the sign of `u` carried by
/// the amplitude. Negative solitons of odd nonlinearities show up here.
pub fn two_extrema(grid: &PeriodicGrid, u: &[f64]) -> [Option<Peak>; 2] {
    let abs: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    two_peaks(grid, &abs).map(|p| {
        p.map(|p| {
            let j = ((p.x + grid.half_length) / grid.spacing()).round() as usize % grid.n;
            Peak { x: p.x, amp: p.amp.copysign(u[j]) }
        })
    })
}

/// Speed of the soliton with amplitude `a`: the turning point condition
/// `c = 2F(a)/a²`.
pub fn speed_from_amplitude(nl: &Nonlinearity, a: f64) -> f64 {
    2.0 * nl.primitive(a) / (a * a)
}

fn window_indices(grid: &PeriodicGrid, window: (f64, f64)) -> Vec<usize> {
    (0..grid.n).filter(|&j| (window.0..=window.1).contains(&grid.x(j))).collect()
}

/// Gauss–Newton on `Σ_window (u − Σ Q_{c_i}(x − x_i))²`.
fn least_squares(nl: &Nonlinearity, grid: &PeriodicGrid, u: &[f64], idx: &[usize], start: &[SolitonFit]) -> Result<Vec<SolitonFit>> {
    let mut p: Vec<SolitonFit> = start.to_vec();
    let np = 2 * p.len();
    for _ in 0..40 {
        let mut jac = DMatrix::<f64>::zeros(idx.len(), np);
        let mut res = DVector::<f64>::zeros(idx.len());
        for (r, &j) in idx.iter().enumerate() {
            res[r] = u[j];
        }
        for (s, fit) in p.iter().enumerate() {
            let dc = 1e-6 * fit.c;
            let q = SolitonShape::new(nl, fit.c)?;
            let qp = SolitonShape::new(nl, fit.c + dc)?;
            let qm = SolitonShape::new(nl, fit.c - dc)?;
            for (r, &j) in idx.iter().enumerate() {
                let y = grid.x(j) - fit.x;
                let (v, slope) = q.value_and_slope(y);
                res[r] -= v;
                jac[(r, 2 * s)] = (qp.value(y) - qm.value(y)) / (2.0 * dc);
                jac[(r, 2 * s + 1)] = -slope;
            }
        }
        let jt = jac.transpose();
        let Some(step) = (&jt * &jac).lu().solve(&(&jt * &res)) else {
            return Err(LabError::NotFound("singular least-squares system".into()));
        };
        let mut worst = 0.0f64;
        for (s, fit) in p.iter_mut().enumerate() {
            // damp steps that would leave the admissible speeds
            let mut dc = step[2 * s];
            if fit.c + dc <= 0.0 {
                dc = -0.5 * fit.c;
            }
            fit.c += dc;
            fit.x += step[2 * s + 1];
            worst = worst.max((dc / fit.c).abs()).max(step[2 * s + 1].abs());
        }
        if worst < 1e-13 {
            break;
        }
    }
    Ok(p)
}

fn initial_guess(nl: &Nonlinearity, grid: &PeriodicGrid, u: &[f64], idx: &[usize]) -> Result<SolitonFit> {
    let Some(&imax) = idx.iter().max_by(|&&a, &&b| u[a].total_cmp(&u[b])) else {
        return Err(LabError::NotFound("empty search window".into()));
    };
    // a bump has to stand well clear of what the window edges see
    let noise = (2.0 * u[idx[0]].abs().max(u[idx[idx.len() - 1]].abs())).max(1e-8);
    if u[imax] <= noise {
        return Err(LabError::NotFound(format!("no bump above the noise floor {noise:.1e}")));
    }
    if imax == idx[0] || imax == idx[idx.len() - 1] {
        return Err(LabError::NotFound("maximum sits on the edge of the search window".into()));
    }
    let peak = refine(grid, u, imax);
    let c = speed_from_amplitude(nl, peak.amp);
    if !(c.is_finite() && c > 0.0) {
        return Err(LabError::NotFound(format!("amplitude {} matches no soliton", peak.amp)));
    }
    Ok(SolitonFit { c, x: peak.x })
}

/// Fits one soliton to the single dominant bump in `window`.
pub fn fit_soliton(u: &[f64], grid: &PeriodicGrid, nl: &Nonlinearity, window: (f64, f64)) -> Result<SolitonFit> {
    if u.len() != grid.n {
        invalid!("{} samples on a grid of {}", u.len(), grid.n);
    }
    let idx = window_indices(grid, window);
    if idx.len() < 5 {
        return Err(LabError::NotFound("search window holds fewer than five samples".into()));
    }
    let start = initial_guess(nl, grid, u, &idx)?;
    Ok(least_squares(nl, grid, u, &idx, &[start])?[0])
}

/// Joint fit of two solitons on the union of `windows`; `guesses` seeds
/// the iteration.
pub fn fit_pair(u: &[f64], grid: &PeriodicGrid, nl: &Nonlinearity, windows: &[(f64, f64)], guesses: [SolitonFit; 2]) -> Result<[SolitonFit; 2]> {
    let mut idx: Vec<usize> = windows.iter().flat_map(|&w| window_indices(grid, w)).collect();
    idx.sort_unstable();
    idx.dedup();
    if idx.len() < 10 {
        return Err(LabError::NotFound("fit windows hold fewer than ten samples".into()));
    }
    let p = least_squares(nl, grid, u, &idx, &guesses)?;
    Ok([p[0], p[1]])
}

/// Separate fits of the two bumps on either side of `split`.
pub fn fit_split(u: &[f64], grid: &PeriodicGrid, nl: &Nonlinearity, window: (f64, f64), split: f64) -> Result<[SolitonFit; 2]> {
    let left = fit_soliton(u, grid, nl, (window.0, split))?;
    let right = fit_soliton(u, grid, nl, (split, window.1))?;
    Ok([left, right])
}
