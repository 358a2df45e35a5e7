//! Two-soliton collision experiments.
//!
//! A run starts from `Q(x + X₀) + Q_c(x)` in a frame moving with the small
//! soliton, evolves until the big soliton sits at `+X₀`, and then decomposes
//! the field into two fitted solitons plus a remainder `w⁺`. The remainder is
//! measured left of the line `x = x_coll + s·c·(t − t_coll)` (lab slope `s`,
//! default 1/10); to the right of that line it is expected to vanish in time.

use gkdv_core::approx::{ApproxSolution, Variant};
use gkdv_core::cascade::solve_cascade;
use gkdv_core::soliton::SolitonShape;
use gkdv_core::{Family, Nonlinearity};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::evolver::{conserved, monotonicity_g, psi_prime, psi_third, EvolutionState, Evolver, EvolverConfig};
use crate::fit::{fit_pair, fit_split, two_extrema, two_peaks, SolitonFit};
use crate::spectral::{PeriodicGrid, Spectral};

fn default_slope() -> f64 {
    0.1
}

fn default_checkpoints() -> usize {
    40
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub nonlinearity: Nonlinearity,
    pub c: f64,
    pub initial_separation: f64,
    pub evolver: EvolverConfig,
    #[serde(default = "default_slope")]
    pub measurement_window_slope: f64,
    #[serde(default = "default_checkpoints")]
    pub checkpoints: usize,
    /// Time after the collision, in units of the collision time.
    #[serde(default = "default_settle")]
    pub settle: f64,
}

fn default_settle() -> f64 {
    1.0
}

/// Distance kept between the big soliton and the seam.
const SEAM_MARGIN: f64 = 30.0;

impl ExperimentConfig {
    /// Separation `20/√c`, with a box twice as long as the run needs so that
    /// radiation crossing the seam stays away from the big soliton.
    pub fn standard(nl: Nonlinearity, c: f64, n_modes: usize, dt: f64) -> ExperimentConfig {
        let sep = 20.0 / c.sqrt();
        ExperimentConfig {
            nonlinearity: nl,
            c,
            initial_separation: sep,
            evolver: EvolverConfig {
                domain_half_length: 2.0 * sep + 40.0,
                n_modes,
                dt,
                dealias: true,
                integrator: crate::evolver::Integrator::Etdrk4,
                frame_speed: 0.0,
            },
            measurement_window_slope: default_slope(),
            checkpoints: default_checkpoints(),
            settle: default_settle(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.nonlinearity.validate()?;
        self.evolver.validate()?;
        let c = self.c;
        if !(c.is_finite() && c > 0.0 && c < 1.0) {
            invalid!("c must lie in (0, 1), got {c}");
        }
        if !(self.initial_separation >= 20.0 / c.sqrt()) {
            invalid!("initial_separation must be at least 20/sqrt(c) = {:.3}, got {}", 20.0 / c.sqrt(), self.initial_separation);
        }
        if !(self.settle >= 0.5 && self.settle.is_finite()) {
            invalid!("settle must be at least 0.5, got {}", self.settle);
        }
        let reach = self.initial_separation * self.settle.max(1.0) + SEAM_MARGIN;
        if self.evolver.domain_half_length < reach {
            invalid!("domain_half_length must be at least initial_separation * max(1, settle) + {SEAM_MARGIN} = {reach:.3}");
        }
        if !(self.measurement_window_slope > 0.0 && self.measurement_window_slope < 1.0) {
            invalid!("measurement_window_slope must lie in (0, 1)");
        }
        if self.checkpoints < 8 {
            invalid!("at least 8 checkpoints are needed, got {}", self.checkpoints);
        }
        Ok(())
    }

    fn collision_time(&self) -> f64 {
        self.initial_separation / (1.0 - self.c)
    }
}

/// The integrable equation closest to `nl`: the ε-perturbation (or custom
/// terms) is dropped, a Gardner cubic is kept.
pub fn integrable_control(nl: &Nonlinearity) -> Nonlinearity {
    if nl.is_integrable() {
        return nl.clone();
    }
    if nl.m == 2 && nl.family == Family::EpsilonFamily {
        let mu = nl.mu_of_epsilon();
        if mu != 0.0 {
            return Nonlinearity::gardner(-mu);
        }
    }
    Nonlinearity::pure_power(nl.m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    ElasticWithinFloor,
    Inelastic,
}

/// Whether `0 < c ≤ |ε|^{m−1+1/25}` holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Asymptotic,
    DeskScale,
    Integrable,
}

pub fn regime(nl: &Nonlinearity, c: f64) -> Regime {
    if nl.is_integrable() {
        return Regime::Integrable;
    }
    let eps = match nl.family {
        Family::EpsilonFamily => nl.epsilon.abs(),
        _ => return Regime::DeskScale,
    };
    if c <= eps.powf(nl.m as f64 - 1.0 + 0.04) {
        Regime::Asymptotic
    } else {
        Regime::DeskScale
    }
}

/// Orders of magnitude predicted for the run, all with unit constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicted {
    pub q: f64,
    /// `|ε| c^{q+1/2}` and `|ε| c^q`.
    pub residual_lower: f64,
    pub residual_upper: f64,
    /// `ε² c^{2q+1}` and `ε² c^{2q}` for `c₁⁺ − 1`.
    pub c1_gain_lower: f64,
    pub c1_gain_upper: f64,
    pub delta1: Option<f64>,
    pub delta2: Option<f64>,
    pub d: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub c1_plus: f64,
    pub c2_plus: f64,
    pub shift1: f64,
    pub shift2: f64,
    /// `‖w⁺_x‖ + √c‖w⁺‖` on the measurement window.
    pub residual_h1_weighted: f64,
    pub floor: f64,
    /// The same norm right of the window line, at the last three checkpoints.
    pub tail_norms: Vec<f64>,
    pub tail_decaying: bool,
    /// Relative change of `∫u²` and of the energy over the run.
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub predicted: Predicted,
    pub monotonicity: Monotonicity,
    pub classification: Classification,
    pub regime: Regime,
    pub t_final: f64,
    pub warnings: Vec<String>,
}

/// The localized functional `𝓖` after the collision, with `ψ` centred
/// between the two solitons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monotonicity {
    pub kappa: f64,
    /// `−E(Q)/M(Q) · c`.
    pub a: f64,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Largest `𝓖(s) − 𝓖(t)` over `s < t`; zero when `𝓖` never goes down.
    pub max_decrease: f64,
    /// `m'ψ' − ψ''' ≥ ψ'/4` on the grid for the slowest observed midpoint speed.
    pub weight_condition: bool,
}

/// Width of the cut-off in `𝓖`.
pub const KAPPA: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub peak1_x: f64,
    pub peak1_amp: f64,
    pub peak2_x: f64,
    pub peak2_amp: f64,
}

/// Conserved quantities and the two largest extrema of a state; missing
/// ones are NaN.
pub fn trajectory_row(grid: &PeriodicGrid, s: &EvolutionState) -> TrajectoryRow {
    let p = two_extrema(grid, &s.u);
    let (x1, a1) = p[0].map_or((f64::NAN, f64::NAN), |p| (p.x, p.amp));
    let (x2, a2) = p[1].map_or((f64::NAN, f64::NAN), |p| (p.x, p.amp));
    TrajectoryRow { t: s.t, mass: s.mass, energy: s.energy, peak1_x: x1, peak1_amp: a1, peak2_x: x2, peak2_amp: a2 }
}

/// Everything a run produces; the report is the summary.
#[derive(Debug, Clone)]
pub struct CollisionRun {
    pub report: CollisionReport,
    pub trajectory: Vec<TrajectoryRow>,
    pub grid: PeriodicGrid,
    pub states: Vec<EvolutionState>,
}

/// Measurements of one evolution before any comparison with a control.
#[derive(Debug, Clone)]
struct Measured {
    fits: [SolitonFit; 2],
    shifts: (f64, f64),
    residual: f64,
    tail: Vec<f64>,
    t_final: f64,
    trajectory: Vec<TrajectoryRow>,
    grid: PeriodicGrid,
    states: Vec<EvolutionState>,
    monotonicity: Monotonicity,
    warnings: Vec<String>,
}

/// `(‖w_x‖ + √c‖w‖)` restricted to the grid points selected by `keep`.
fn weighted_norm(spec: &Spectral, w: &[f64], c: f64, keep: impl Fn(f64) -> bool) -> f64 {
    let wx = spec.derivative(w, 1);
    let h = spec.grid.spacing();
    let (mut a, mut b) = (0.0, 0.0);
    for (j, x) in spec.grid.xs().into_iter().enumerate() {
        if keep(x) {
            a += wx[j] * wx[j];
            b += w[j] * w[j];
        }
    }
    (a * h).sqrt() + c.sqrt() * (b * h).sqrt()
}

fn remainder(nl: &Nonlinearity, grid: &PeriodicGrid, u: &[f64], fits: &[SolitonFit; 2]) -> Result<Vec<f64>> {
    let q: Vec<SolitonShape> = fits.iter().map(|f| SolitonShape::new(nl, f.c)).collect::<gkdv_core::Result<_>>()?;
    Ok((0..grid.n)
        .map(|j| {
            let x = grid.x(j);
            u[j] - q[0].value(x - fits[0].x) - q[1].value(x - fits[1].x)
        })
        .collect())
}

/// Half width of the window around the big soliton.
const BIG_WINDOW: f64 = 20.0;

/// Fits `[small, big]` in a state where the two solitons are well apart.
/// The small soliton is fitted from `4/√c` behind its peak up to the
/// midpoint, which keeps most of the radiation it leaves behind out of the
/// fit; the big soliton gets its own window.
fn fit_state(nl: &Nonlinearity, grid: &PeriodicGrid, u: &[f64], c: f64) -> Result<[SolitonFit; 2]> {
    let peaks = two_peaks(grid, u);
    let (Some(a), Some(b)) = (peaks[0], peaks[1]) else {
        return Err(crate::LabError::NotFound("fewer than two bumps in the field".into()));
    };
    let (lo, hi) = if a.x < b.x { (a, b) } else { (b, a) };
    let split = 0.5 * (lo.x + hi.x);
    let left = ((lo.x - 4.0 / c.sqrt()).max(-grid.half_length), split);
    let right = ((hi.x - BIG_WINDOW).max(split), (hi.x + BIG_WINDOW).min(grid.half_length));
    let [l, r] = fit_split(u, grid, nl, (left.0, right.1), split)?;
    let mut pair = fit_pair(u, grid, nl, &[left, right], [l, r])?;
    pair.sort_by(|a, b| a.c.total_cmp(&b.c));
    Ok(pair)
}

fn measure(cfg: &ExperimentConfig, nl: &Nonlinearity, evolver: &EvolverConfig) -> Result<Measured> {
    let c = cfg.c;
    let mut ecfg = *evolver;
    ecfg.frame_speed = c;
    let mut ev = Evolver::new(nl, &ecfg)?;
    let grid = ev.spectral().grid;
    let spec = ev.spectral().clone();
    let x0 = cfg.initial_separation;
    let big = SolitonShape::new(nl, 1.0)?;
    let small = SolitonShape::new(nl, c)?;
    let u0: Vec<f64> = grid.xs().iter().map(|&x| big.value(x + x0) + small.value(x)).collect();

    let t_coll = cfg.collision_time();
    let t_final = (1.0 + cfg.settle) * t_coll;
    let n = cfg.checkpoints;
    let times: Vec<f64> = (1..=n).map(|i| t_final * i as f64 / n as f64).collect();
    let run = ev.run(&u0, &times)?;

    let (m0, e0) = conserved(nl, &spec, &u0);
    let mut trajectory = vec![trajectory_row(&grid, &EvolutionState { t: 0.0, u: u0.clone(), mass: m0, energy: e0 })];
    trajectory.extend(run.states.iter().map(|s| trajectory_row(&grid, s)));

    // free flight from an early checkpoint, before the solitons interact
    let pre = &run.states[n / 8 - 1];
    let pre_fit = fit_state(nl, &grid, &pre.u, c)?;
    let free = |f: &SolitonFit, t: f64| f.x + (f.c - c) * (t - pre.t);

    let line = |t: f64| -(1.0 - cfg.measurement_window_slope) * c * (t - t_coll);
    let mut tail = Vec::new();
    let mut last = None;
    for s in &run.states[n - 3..] {
        let fits = fit_state(nl, &grid, &s.u, c)?;
        let w = remainder(nl, &grid, &s.u, &fits)?;
        let l = line(s.t);
        tail.push(weighted_norm(&spec, &w, c, |x| x > l));
        last = Some((fits, w, s.t));
    }
    let (fits, w, t) = last.expect("three checkpoints were measured");
    let l = line(t);
    let residual = weighted_norm(&spec, &w, c, |x| x <= l);
    let shifts = (fits[1].x - free(&pre_fit[1], t), fits[0].x - free(&pre_fit[0], t));
    let monotonicity = monotonicity(nl, &spec, &run.states, &trajectory[1..], c, t_coll)?;
    Ok(Measured { fits, shifts, residual, tail, t_final, trajectory, grid, states: run.states, monotonicity, warnings: run.warnings })
}

/// `𝓖` on the checkpoints after `1.25 t_coll`, where the peaks are apart.
/// Positions are in the moving frame, so the lab speed of the midpoint is
/// its frame speed plus `c`.
fn monotonicity(nl: &Nonlinearity, spec: &Spectral, states: &[EvolutionState], rows: &[TrajectoryRow], c: f64, t_coll: f64) -> Result<Monotonicity> {
    let q: Vec<f64> = {
        let big = SolitonShape::new(nl, 1.0)?;
        spec.grid.xs().iter().map(|&x| big.value(x)).collect()
    };
    let (mass, energy) = conserved(nl, spec, &q);
    let a = -energy / mass * c;
    let post: Vec<usize> = (0..states.len()).filter(|&i| states[i].t >= 1.25 * t_coll && rows[i].peak2_x.is_finite()).collect();
    let mid = |i: usize| 0.5 * (rows[i].peak1_x + rows[i].peak2_x);
    let times: Vec<f64> = post.iter().map(|&i| states[i].t).collect();
    let picked: Vec<EvolutionState> = post.iter().map(|&i| states[i].clone()).collect();
    let values = monotonicity_g(nl, spec, &picked, KAPPA, a, |t| {
        let k = post.iter().position(|&i| states[i].t == t).expect("time comes from the picked states");
        mid(post[k])
    });
    let mut max_decrease: f64 = 0.0;
    let mut best = f64::NEG_INFINITY;
    for &g in &values {
        best = best.max(g);
        max_decrease = max_decrease.max(best - g);
    }
    let speed = post.windows(2).map(|w| (mid(w[1]) - mid(w[0])) / (states[w[1]].t - states[w[0]].t) + c).fold(f64::INFINITY, f64::min);
    let weight_condition = speed.is_finite()
        && spec.grid.xs().iter().all(|&x| {
            let p1 = psi_prime(x, KAPPA);
            speed * p1 - psi_third(x, KAPPA) >= 0.25 * p1
        });
    Ok(Monotonicity { kappa: KAPPA, a, times, values, max_decrease, weight_condition })
}

pub fn predictions(nl: &Nonlinearity, c: f64) -> Predicted {
    let q = 2.0 / (nl.m as f64 - 1.0) + 0.25;
    let eps = if nl.family == Family::EpsilonFamily { nl.epsilon.abs() } else { 0.0 };
    let (delta1, delta2, d) = match solve_cascade(nl).and_then(|cas| {
        let d = cas.defect;
        ApproxSolution::new(cas, c, Variant::Symmetric).map(|a| (a.shifts(), d))
    }) {
        Ok((s, d)) => (Some(s.delta1), Some(s.delta2), Some(d)),
        Err(_) => (None, None, None),
    };
    Predicted {
        q,
        residual_lower: eps * c.powf(q + 0.5),
        residual_upper: eps * c.powf(q),
        c1_gain_lower: eps * eps * c.powf(2.0 * q + 1.0),
        c1_gain_upper: eps * eps * c.powf(2.0 * q),
        delta1,
        delta2,
        d,
    }
}

/// Residual floor of the integrable control: the larger of its residuals at
/// the configured resolution and with the number of modes doubled.
pub fn control_floor(cfg: &ExperimentConfig) -> Result<f64> {
    let ctrl = integrable_control(&cfg.nonlinearity);
    let coarse = measure(cfg, &ctrl, &cfg.evolver)?;
    let mut fine_cfg = cfg.evolver;
    fine_cfg.n_modes *= 2;
    let fine = measure(cfg, &ctrl, &fine_cfg)?;
    Ok(coarse.residual.max(fine.residual))
}

/// A collision with a floor supplied by the caller (shared controls in a
/// scaling study).
pub fn run_collision_with_floor(cfg: &ExperimentConfig, floor: f64) -> Result<CollisionRun> {
    cfg.validate()?;
    let nl = &cfg.nonlinearity;
    let m = measure(cfg, nl, &cfg.evolver)?;
    let mut warnings = m.warnings;
    // at the noise floor the tail only has to stay there
    let tail_decaying = m.tail.windows(2).all(|w| w[1] <= w[0] + floor);
    if !tail_decaying {
        warnings.push(format!("remainder right of the window line is not decreasing: {:?}", m.tail));
    }
    let r = regime(nl, cfg.c);
    if r == Regime::DeskScale {
        warnings.push("c is outside the asymptotic regime c <= |eps|^(m-1+1/25); only signs and exponents are meaningful".into());
    }
    let classification = if m.residual > 3.0 * floor { Classification::Inelastic } else { Classification::ElasticWithinFloor };
    let report = CollisionReport {
        c1_plus: m.fits[1].c,
        c2_plus: m.fits[0].c,
        shift1: m.shifts.0,
        shift2: m.shifts.1,
        residual_h1_weighted: m.residual,
        floor,
        tail_norms: m.tail,
        tail_decaying,
        mass_drift: drift(&m.trajectory, |r| r.mass),
        energy_drift: drift(&m.trajectory, |r| r.energy),
        predicted: predictions(nl, cfg.c),
        monotonicity: m.monotonicity,
        classification,
        regime: r,
        t_final: m.t_final,
        warnings,
    };
    Ok(CollisionRun { report, trajectory: m.trajectory, grid: m.grid, states: m.states })
}

fn drift(rows: &[TrajectoryRow], f: impl Fn(&TrajectoryRow) -> f64) -> f64 {
    let first = f(&rows[0]);
    rows.iter().map(|r| ((f(r) - first) / first).abs()).fold(0.0, f64::max)
}

pub fn run_collision(cfg: &ExperimentConfig) -> Result<CollisionRun> {
    cfg.validate()?;
    run_collision_with_floor(cfg, control_floor(cfg)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub c: f64,
    pub epsilon: f64,
    pub residual: f64,
    pub floor: f64,
    pub c1_plus: f64,
    pub c2_plus: f64,
    pub classification: Classification,
}

/// Least-squares slope of `ln y` against `ln x` with a 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub stderr: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub points: usize,
}

pub fn loglog_slope(pts: &[(f64, f64)]) -> Result<SlopeFit> {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    if pts.len() < 2 || pts.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0)) {
        invalid!("a log-log slope needs at least two positive points");
    }
    let n = pts.len() as f64;
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let (stderr, half) = if pts.len() > 2 {
        let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - my - slope * (x - mx)).powi(2)).sum();
        let se = (rss / (n - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, n - 2.0).expect("positive degrees of freedom").inverse_cdf(0.975);
        (se, t * se)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(SlopeFit { slope, stderr, ci_low: slope - half, ci_high: slope + half, points: pts.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub q: f64,
    pub points: Vec<ScalingPoint>,
    /// Residual against `c` for each non-zero `ε`.
    pub c_slopes: Vec<(f64, SlopeFit)>,
    /// Residual against `ε` for each `c`.
    pub eps_slopes: Vec<(f64, SlopeFit)>,
    pub c_window: (f64, f64),
    pub eps_window: (f64, f64),
}

/// `base` moved to another `(c, ε)`: separation and box grow like `1/√c`,
/// modes and step stay.
pub fn config_at(base: &ExperimentConfig, c: f64, eps: f64) -> Result<ExperimentConfig> {
    let b = &base.nonlinearity;
    if b.family != Family::EpsilonFamily {
        invalid!("a scaling study needs an epsilon-family nonlinearity");
    }
    let mut cfg = base.clone();
    cfg.nonlinearity = Nonlinearity::epsilon_family(b.m, eps, b.p, b.mu_hat)?;
    cfg.c = c;
    cfg.initial_separation = base.initial_separation * (base.c / c).sqrt();
    cfg.evolver.domain_half_length = base.evolver.domain_half_length + 2.0 * (cfg.initial_separation - base.initial_separation);
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the `c × ε` grid. Controls are shared between points that have the
/// same `c` and the same integrable counterpart.
pub fn scaling_study(base: &ExperimentConfig, c_values: &[f64], eps_values: &[f64]) -> Result<ScalingTable> {
    use rayon::prelude::*;
    let nonzero: Vec<f64> = eps_values.iter().copied().filter(|&e| e != 0.0).collect();
    if c_values.len() < 3 || nonzero.len() < 3 {
        invalid!("a scaling study needs at least 3 values of c and 3 non-zero values of epsilon");
    }
    let mut grid = Vec::new();
    for &c in c_values {
        for &e in eps_values {
            grid.push(config_at(base, c, e)?);
        }
    }
    let mut control_keys: Vec<(f64, Nonlinearity)> = Vec::new();
    for cfg in &grid {
        let key = (cfg.c, integrable_control(&cfg.nonlinearity));
        if !control_keys.contains(&key) {
            control_keys.push(key);
        }
    }
    let floors: Vec<f64> = control_keys
        .par_iter()
        .map(|(c, _)| {
            let cfg = grid.iter().find(|g| g.c == *c).expect("every key comes from the grid");
            control_floor(cfg)
        })
        .collect::<Result<_>>()?;
    let points: Vec<ScalingPoint> = grid
        .par_iter()
        .map(|cfg| {
            let key = (cfg.c, integrable_control(&cfg.nonlinearity));
            let floor = floors[control_keys.iter().position(|k| *k == key).expect("key was registered")];
            let r = run_collision_with_floor(cfg, floor)?.report;
            Ok(ScalingPoint {
                c: cfg.c,
                epsilon: cfg.nonlinearity.epsilon,
                residual: r.residual_h1_weighted,
                floor,
                c1_plus: r.c1_plus,
                c2_plus: r.c2_plus,
                classification: r.classification,
            })
        })
        .collect::<Result<_>>()?;
    let mut c_slopes = Vec::new();
    for &e in &nonzero {
        let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.epsilon == e).map(|p| (p.c, p.residual)).collect();
        c_slopes.push((e, loglog_slope(&pts)?));
    }
    let mut eps_slopes = Vec::new();
    for &c in c_values {
        let pts: Vec<(f64, f64)> = points.iter().filter(|p| p.c == c && p.epsilon != 0.0).map(|p| (p.epsilon.abs(), p.residual)).collect();
        eps_slopes.push((c, loglog_slope(&pts)?));
    }
    let q = 2.0 / (base.nonlinearity.m as f64 - 1.0) + 0.25;
    Ok(ScalingTable { q, points, c_slopes, eps_slopes, c_window: (q, q + 0.5), eps_window: (0.8, 1.2) })
}
