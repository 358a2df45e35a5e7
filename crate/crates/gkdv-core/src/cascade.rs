//! The hierarchy of linear systems `(Ω_{k,l})` and the defect `d(ε)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::Serialize;

use crate::algebra::{Coef, Poly, Series};
use crate::error::bail;
use crate::linop::{LinearizedOperator, SpecialSolutions};
use crate::numerics::{make_grid, Decay, Grid, Parity, Profile};
use crate::omega::{solve_model_problem, OmegaSolution};
use crate::{Family, Nonlinearity, Result};

/// Endpoint size above which a source is declared non-localized.
pub const CANCELLATION_TOL: f64 = 1e-6;

/// `(k, l)`: the coefficient of `c^l Q_c^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SigmaIndex {
    pub k: u8,
    pub l: u8,
}

impl SigmaIndex {
    pub const fn new(k: u8, l: u8) -> SigmaIndex {
        SigmaIndex { k, l }
    }

    /// The strict partial order: `(k', l') < (k, l)` iff one entry is smaller
    /// and the other is not larger.
    pub fn precedes(&self, other: &SigmaIndex) -> bool {
        (self.k < other.k && self.l <= other.l) || (self.k <= other.k && self.l < other.l)
    }

    pub fn key(&self) -> String {
        format!("{}_{}", self.k, self.l)
    }
}

/// `Σ_m` listed in a valid solve order.
pub fn sigma(m: u32) -> Result<Vec<SigmaIndex>> {
    let s = |k, l| SigmaIndex::new(k, l);
    match m {
        2 => Ok(vec![s(1, 0), s(2, 0), s(1, 1), s(3, 0), s(2, 1), s(1, 2)]),
        3 => Ok(vec![s(1, 0), s(2, 0), s(1, 1), s(3, 0), s(2, 1), s(4, 0)]),
        _ => bail!(Unsupported, "the cascade is defined for m = 2 and m = 3, got m = {m}"),
    }
}

fn coefficient_of(nl: &Nonlinearity, power: f64) -> f64 {
    nl.terms().iter().filter(|t| t.power == power).map(|t| t.coeff).sum()
}

/// Incrementally solved hierarchy on a fixed grid.
#[derive(Debug, Clone)]
pub struct Cascade {
    nl: Nonlinearity,
    op: LinearizedOperator,
    special: SpecialSolutions,
    series: Series,
    order: Vec<SigmaIndex>,
    solved: BTreeMap<SigmaIndex, OmegaSolution>,
    sources: BTreeMap<SigmaIndex, (Profile, Profile)>,
    // f^{(n)}(Q) and its y-derivative, n = 0..=max weight
    taylor: Vec<Coef>,
    q_jet: Coef,
}

impl Cascade {
    pub fn new(nl: &Nonlinearity, grid: &Grid) -> Result<Cascade> {
        nl.validate()?;
        if nl.family == Family::Custom {
            bail!(Unsupported, "the cascade needs a power, Gardner or epsilon-family nonlinearity");
        }
        let order = sigma(nl.m)?;
        let caps: Vec<(u8, u8)> = order.iter().map(|i| (i.k, i.l)).collect();
        let top = caps.iter().map(|c| c.0).max().unwrap_or(1);
        let mut f_terms = Vec::new();
        for t in nl.terms() {
            if t.power == t.power.round() {
                f_terms.push((t.coeff, t.power as u8));
            } else if t.power < f64::from(top) {
                bail!(Unsupported, "non-integer power {} is below the expansion order {top}; f^({top}) is singular at 0", t.power);
            }
        }
        let series = Series::new(&caps, &f_terms);
        let op = LinearizedOperator::new(nl, grid)?;
        let special = op.special_solutions()?;
        let ev = nl.evaluator();
        let q = op.q().values();
        let dq = op.dq().values();
        let taylor = (0..=usize::from(top))
            .map(|n| {
                let v: Vec<f64> = q.iter().map(|&s| ev.f(s, n)).collect();
                let d: Vec<f64> = q.iter().zip(dq).map(|(&s, &d)| ev.f(s, n + 1) * d).collect();
                Coef::Jet(vec![v, d])
            })
            .collect();
        let mut qj: Vec<Vec<f64>> = (0..5).map(|_| Vec::with_capacity(q.len())).collect();
        for x in grid.xs() {
            for (k, v) in op.shape().jet(x).into_iter().enumerate() {
                qj[k].push(v);
            }
        }
        Ok(Cascade { nl: nl.clone(), op, special, series, order, solved: BTreeMap::new(), sources: BTreeMap::new(), taylor, q_jet: Coef::Jet(qj) })
    }

    pub fn operator(&self) -> &LinearizedOperator {
        &self.op
    }

    pub fn special(&self) -> &SpecialSolutions {
        &self.special
    }

    pub fn order(&self) -> &[SigmaIndex] {
        &self.order
    }

    pub fn get(&self, idx: SigmaIndex) -> Option<&OmegaSolution> {
        self.solved.get(&idx)
    }

    /// `S[ũ]` expanded with every solved system included.
    pub fn residual_series(&self) -> Poly {
        let s = &self.series;
        let mut u = Poly::new();
        u.insert((0, 0, 0), self.q_jet.clone());
        u.insert((0, 1, 0), Coef::Const(1.0));
        let mut beta = Poly::new();
        for (idx, sol) in &self.solved {
            let mut a = vec![sol.a_profile.values().to_vec()];
            a.extend(sol.a_derivs.iter().map(|p| p.values().to_vec()));
            let mut b = vec![sol.b_profile.values().to_vec()];
            b.extend(sol.b_derivs.iter().map(|p| p.values().to_vec()));
            let mut w = Poly::new();
            w.insert((idx.l, idx.k, 0), Coef::Jet(a));
            u = s.add(&u, &w, 1.0);
            let mut w = Poly::new();
            w.insert((idx.l, idx.k - 1, 1), Coef::Jet(b));
            u = s.add(&u, &w, f64::from(idx.k));
            if sol.a != 0.0 {
                let mut w = Poly::new();
                w.insert((idx.l, idx.k, 0), Coef::Const(sol.a));
                beta = s.add(&beta, &w, 1.0);
            }
        }
        // f(Q + δ) = Σ f^{(n)}(Q) δⁿ / n!
        let mut delta = u.clone();
        delta.remove(&(0, 0, 0));
        let mut f_u = Poly::new();
        let mut power = Poly::new();
        power.insert((0, 0, 0), Coef::Const(1.0));
        let mut fact = 1.0;
        for (n, fn_q) in self.taylor.iter().enumerate() {
            if n > 0 {
                power = s.mul(&power, &delta);
                fact *= n as f64;
            }
            let mut t = Poly::new();
            t.insert((0, 0, 0), fn_q.clone());
            f_u = s.add(&f_u, &s.mul(&t, &power), 1.0 / fact);
        }
        let uxx = s.dx(&s.dx(&u, &beta), &beta);
        let flux = s.add(&s.add(&uxx, &u, -1.0), &f_u, 1.0);
        s.add(&s.dt(&u, &beta), &s.dx(&flux, &beta), 1.0)
    }

    fn check_order(&self, idx: SigmaIndex) -> Result<()> {
        if !self.order.contains(&idx) {
            bail!(InvalidArgument, "({}, {}) is not in Σ_{}", idx.k, idx.l, self.nl.m);
        }
        if let Some(p) = self.order.iter().find(|p| p.precedes(&idx) && !self.solved.contains_key(p)) {
            bail!(OrderViolation, "({}, {}) requested before ({}, {})", idx.k, idx.l, p.k, p.l);
        }
        Ok(())
    }

    /// `(F_{k,l}, G_{k,l})` read off the expanded residual.
    pub fn source_terms(&self, idx: SigmaIndex) -> Result<(Profile, Profile)> {
        self.check_order(idx)?;
        let s = self.residual_series();
        let grid = self.op.grid();
        let n = grid.n_points();
        let get = |m| s.get(&m).map(|c: &Coef| c.value(n)).unwrap_or_else(|| vec![0.0; n]);
        let f = get((idx.l, idx.k, 0));
        let g: Vec<f64> = get((idx.l, idx.k - 1, 1)).iter().map(|v| v / f64::from(idx.k)).collect();
        for (name, v) in [("F", &f), ("G", &g)] {
            let worst = v[0].abs().max(v[n - 1].abs());
            if worst > CANCELLATION_TOL {
                bail!(CancellationFailure, "{name}_({},{}) does not decay: endpoint value {worst:e}", idx.k, idx.l);
            }
        }
        Ok((Profile::from_values(grid, f, Parity::Odd, Decay::Localized), Profile::from_values(grid, g, Parity::Even, Decay::Localized)))
    }

    fn b_of(&self, k: u8, l: u8) -> f64 {
        self.solved.get(&SigmaIndex::new(k, l)).map_or(0.0, |s| s.b)
    }

    /// `d(ε) = b₂,₀ + δ_{m2} b₁,₀³/6`, from the solved systems.
    pub fn defect(&self) -> f64 {
        let b10 = self.b_of(1, 0);
        let dm2 = if self.nl.m == 2 { 1.0 } else { 0.0 };
        self.b_of(2, 0) + dm2 * b10.powi(3) / 6.0
    }

    /// The prescribed limit `γ_{k,l}` of `A_{k,l}`.
    pub fn gamma_for(&self, idx: SigmaIndex) -> f64 {
        let b = self.b_of(1, 0);
        let b11 = self.b_of(1, 1);
        let d = self.defect();
        match (self.nl.m, idx.k, idx.l) {
            (_, 1, 0) => 0.0,
            (2, 2, 0) => -0.5 * b * b,
            (3, 2, 0) => 0.0,
            (_, 1, 1) => 0.5 * b * b,
            (2, 3, 0) => {
                let mu = coefficient_of(&self.nl, 3.0);
                5.0 / 36.0 * b.powi(4) + 10.0 / 3.0 * d * b + 0.5 * mu * b * b
            }
            (2, 2, 1) => b.powi(4) / 24.0 - b * b11 - 4.0 * d * b,
            (2, 1, 2) => -3.0 / 24.0 * b.powi(4) + b * b11,
            (3, 3, 0) => -0.5 * b * b,
            (3, 2, 1) => -4.0 * b * d,
            (3, 4, 0) => 3.0 * d * b + 0.5 * coefficient_of(&self.nl, 4.0) * b * b,
            _ => 0.0,
        }
    }

    /// Solves `(Ω_{k,l})`; every predecessor must be solved already.
    pub fn solve_index(&mut self, idx: SigmaIndex) -> Result<&OmegaSolution> {
        let gamma = self.gamma_for(idx);
        self.solve_index_with_gamma(idx, gamma)
    }

    /// Same as [`Cascade::solve_index`] with an explicit limit `γ`.
    pub fn solve_index_with_gamma(&mut self, idx: SigmaIndex, gamma: f64) -> Result<&OmegaSolution> {
        let (f, g) = self.source_terms(idx)?;
        let mut sol = solve_model_problem(&self.op, &self.special, &f, &g, gamma, 0.0)?;
        if idx == SigmaIndex::new(1, 0) {
            let dq = self.op.dq();
            let kappa = -sol.b_profile.dot(dq)? / dq.dot(dq)?;
            sol = solve_model_problem(&self.op, &self.special, &f, &g, gamma, kappa)?;
        }
        self.sources.insert(idx, (f, g));
        self.solved.insert(idx, sol);
        Ok(&self.solved[&idx])
    }

    pub fn solve_all(&mut self) -> Result<()> {
        for idx in self.order.clone() {
            if !self.solved.contains_key(&idx) {
                self.solve_index(idx)?;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> CascadeSolution {
        let defect = self.defect();
        let b10 = self.b_of(1, 0);
        let b_tilde_11 = self.b_of(1, 1) - b10.powi(3) / 6.0;
        let delta_m2 = u8::from(self.nl.m == 2);
        let delta_p4 = u8::from(self.nl.family == Family::EpsilonFamily && self.nl.p == 4.0);
        CascadeSolution { nl: self.nl, grid: *self.op.grid(), entries: self.solved, sources: self.sources, defect, b_tilde_11, delta_m2, delta_p4 }
    }
}

/// All systems of `Σ_m` with their sources.
#[derive(Debug, Clone)]
pub struct CascadeSolution {
    pub nl: Nonlinearity,
    pub grid: Grid,
    pub entries: BTreeMap<SigmaIndex, OmegaSolution>,
    pub sources: BTreeMap<SigmaIndex, (Profile, Profile)>,
    pub defect: f64,
    pub b_tilde_11: f64,
    pub delta_m2: u8,
    pub delta_p4: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeCoeffs {
    pub a_1_0: f64,
    pub b_1_0: f64,
    pub b_2_0: f64,
    pub d: f64,
    pub gamma: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeSummary {
    pub m: u32,
    pub epsilon: f64,
    pub p: f64,
    pub coeffs: CascadeCoeffs,
}

impl CascadeSolution {
    pub fn get(&self, k: u8, l: u8) -> Option<&OmegaSolution> {
        self.entries.get(&SigmaIndex::new(k, l))
    }

    pub fn summary(&self) -> CascadeSummary {
        let v = |k, l, f: fn(&OmegaSolution) -> f64| self.get(k, l).map_or(0.0, f);
        CascadeSummary {
            m: self.nl.m,
            epsilon: self.nl.epsilon,
            p: self.nl.p,
            coeffs: CascadeCoeffs {
                a_1_0: v(1, 0, |s| s.a),
                b_1_0: v(1, 0, |s| s.b),
                b_2_0: v(2, 0, |s| s.b),
                d: self.defect,
                gamma: self.entries.iter().map(|(i, s)| (i.key(), s.gamma)).collect(),
            },
        }
    }
}

/// `b₂,₀ + δ_{m2} b₁,₀³/6`.
pub fn defect(c: &CascadeSolution) -> f64 {
    let b10 = c.get(1, 0).map_or(0.0, |s| s.b);
    let b20 = c.get(2, 0).map_or(0.0, |s| s.b);
    b20 + f64::from(c.delta_m2) * b10.powi(3) / 6.0
}

/// Default resolution used by [`solve_cascade`].
pub const DEFAULT_HALF_WIDTH: f64 = 40.0;
pub const DEFAULT_POINTS: usize = 4096;

pub fn solve_cascade_on(nl: &Nonlinearity, grid: &Grid) -> Result<CascadeSolution> {
    let mut c = Cascade::new(nl, grid)?;
    c.solve_all()?;
    Ok(c.finish())
}

pub fn solve_cascade(nl: &Nonlinearity) -> Result<CascadeSolution> {
    solve_cascade_on(nl, &make_grid(DEFAULT_HALF_WIDTH, DEFAULT_POINTS)?)
}
