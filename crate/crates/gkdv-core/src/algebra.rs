//! Truncated two-scale expansions.
//!
//! An expression is a finite sum `Σ c^l q^j (q')^e · C(y)` where `q = Q_c(y_c)`,
//! `e ∈ {0, 1}` and each coefficient `C` is either a constant or a jet
//! `(C, C', C'', …)` sampled on a grid. Products use `(q')² = cq² − 2F(q)` and
//! the `y_c` derivative uses `q'' = cq − f(q)`, so the representation is
//! closed under the operations needed to expand the gKdV residual.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

/// `(l, j, e)`: the monomial `c^l q^j (q')^e`.
pub type Mono = (u8, u8, u8);

#[derive(Debug, Clone, PartialEq)]
pub enum Coef {
    Const(f64),
    /// `jet[k]` holds the k-th `y` derivative.
    Jet(Vec<Vec<f64>>),
}

fn binom(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

impl Coef {
    pub fn value(&self, n: usize) -> Vec<f64> {
        match self {
            Coef::Const(a) => vec![*a; n],
            Coef::Jet(j) => j[0].clone(),
        }
    }

    fn scale(&self, s: f64) -> Coef {
        match self {
            Coef::Const(a) => Coef::Const(a * s),
            Coef::Jet(j) => Coef::Jet(j.iter().map(|v| v.iter().map(|x| x * s).collect()).collect()),
        }
    }

    fn add_scaled(&mut self, other: &Coef, s: f64) {
        match (&mut *self, other) {
            (Coef::Const(a), Coef::Const(b)) => *a += s * b,
            (Coef::Jet(j), Coef::Const(b)) => j[0].iter_mut().for_each(|x| *x += s * b),
            (Coef::Const(a), Coef::Jet(k)) => {
                let mut out: Vec<Vec<f64>> = k.iter().map(|v| v.iter().map(|x| x * s).collect()).collect();
                out[0].iter_mut().for_each(|x| *x += *a);
                *self = Coef::Jet(out);
            }
            (Coef::Jet(j), Coef::Jet(k)) => {
                j.truncate(k.len());
                for (u, v) in j.iter_mut().zip(k) {
                    u.iter_mut().zip(v).for_each(|(x, y)| *x += s * y);
                }
            }
        }
    }

    fn mul(&self, other: &Coef) -> Coef {
        match (self, other) {
            (Coef::Const(a), Coef::Const(b)) => Coef::Const(a * b),
            (Coef::Const(a), j) | (j, Coef::Const(a)) => j.scale(*a),
            (Coef::Jet(u), Coef::Jet(v)) => {
                let depth = u.len().min(v.len());
                let n = u[0].len();
                let mut out = vec![vec![0.0; n]; depth];
                for (k, o) in out.iter_mut().enumerate() {
                    for i in 0..=k {
                        let w = binom(k, i);
                        for ((x, a), b) in o.iter_mut().zip(&u[i]).zip(&v[k - i]) {
                            *x += w * a * b;
                        }
                    }
                }
                Coef::Jet(out)
            }
        }
    }

    /// `None` when the derivative vanishes identically.
    fn dy(&self) -> Option<Coef> {
        match self {
            Coef::Const(_) => None,
            Coef::Jet(j) => {
                assert!(j.len() > 1, "jet too short for another derivative");
                Some(Coef::Jet(j[1..].to_vec()))
            }
        }
    }
}

pub type Poly = BTreeMap<Mono, Coef>;

/// Truncation pattern and the small-soliton nonlinearity.
#[derive(Debug, Clone)]
pub struct Series {
    /// Kept orders `(k, l)`: a monomial of weight `j + e` and `c`-power `l`
    /// survives if it lies below one of them.
    caps: Vec<(u8, u8)>,
    /// Integer-power monomials of `f`, as `(coeff, power)`.
    f_terms: Vec<(f64, u8)>,
}

impl Series {
    pub fn new(caps: &[(u8, u8)], f_terms: &[(f64, u8)]) -> Series {
        let mut caps = caps.to_vec();
        caps.push((0, 0));
        Series { caps, f_terms: f_terms.to_vec() }
    }

    pub fn max_weight(&self) -> u8 {
        self.caps.iter().map(|c| c.0).max().unwrap_or(0)
    }

    fn keep(&self, (l, j, e): Mono) -> bool {
        self.caps.iter().any(|&(k, lc)| j + e <= k && l <= lc)
    }

    fn push(&self, p: &mut Poly, m: Mono, c: &Coef, s: f64) {
        if s == 0.0 || !self.keep(m) {
            return;
        }
        match p.get_mut(&m) {
            Some(old) => old.add_scaled(c, s),
            None => {
                p.insert(m, c.scale(s));
            }
        }
    }

    pub fn add(&self, a: &Poly, b: &Poly, s: f64) -> Poly {
        let mut out = a.clone();
        for (m, c) in b {
            self.push(&mut out, *m, c, s);
        }
        out
    }

    pub fn scale(&self, a: &Poly, s: f64) -> Poly {
        a.iter().map(|(m, c)| (*m, c.scale(s))).collect()
    }

    pub fn mul(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = Poly::new();
        for (&(l1, j1, e1), c1) in a {
            for (&(l2, j2, e2), c2) in b {
                let (l, j, e) = (l1 + l2, j1 + j2, e1 + e2);
                // weight and c-power only grow, so skip pairs that are out of range
                if !self.keep((l, j, e.min(1))) && !self.keep((l, j + e, 0)) {
                    continue;
                }
                let c = c1.mul(c2);
                if e < 2 {
                    self.push(&mut out, (l, j, e), &c, 1.0);
                } else {
                    // (q')² = c q² − 2F(q)
                    self.push(&mut out, (l + 1, j + 2, 0), &c, 1.0);
                    for &(a, p) in &self.f_terms {
                        self.push(&mut out, (l, j + p + 1, 0), &c, -2.0 * a / (p as f64 + 1.0));
                    }
                }
            }
        }
        out
    }

    /// Multiplies by `c^k`.
    pub fn shift_c(&self, a: &Poly, k: u8) -> Poly {
        let mut out = Poly::new();
        for (&(l, j, e), c) in a {
            self.push(&mut out, (l + k, j, e), c, 1.0);
        }
        out
    }

    /// `∂_y`.
    pub fn dy(&self, a: &Poly) -> Poly {
        let mut out = Poly::new();
        for (m, c) in a {
            if let Some(d) = c.dy() {
                self.push(&mut out, *m, &d, 1.0);
            }
        }
        out
    }

    /// `∂_{y_c}`.
    pub fn dyc(&self, a: &Poly) -> Poly {
        let mut out = Poly::new();
        for (&(l, j, e), c) in a {
            let jf = j as f64;
            if e == 0 {
                if j > 0 {
                    self.push(&mut out, (l, j - 1, 1), c, jf);
                }
                continue;
            }
            // d(q^j q') = j q^{j−1}(cq² − 2F(q)) + q^j (cq − f(q))
            self.push(&mut out, (l + 1, j + 1, 0), c, jf + 1.0);
            for &(a, p) in &self.f_terms {
                if j > 0 {
                    self.push(&mut out, (l, j - 1 + p + 1, 0), c, -2.0 * jf * a / (p as f64 + 1.0));
                }
                self.push(&mut out, (l, j + p, 0), c, -a);
            }
        }
        out
    }

    /// `D_x = (1 − β)∂_y + ∂_{y_c}`.
    pub fn dx(&self, a: &Poly, beta: &Poly) -> Poly {
        let d = self.dy(a);
        let bd = self.mul(beta, &d);
        self.add(&self.add(&d, &bd, -1.0), &self.dyc(a), 1.0)
    }

    /// `D_t = (1 − c)(−β∂_y + ∂_{y_c})`.
    pub fn dt(&self, a: &Poly, beta: &Poly) -> Poly {
        let inner = self.add(&self.dyc(a), &self.mul(beta, &self.dy(a)), -1.0);
        self.add(&inner, &self.shift_c(&inner, 1), -1.0)
    }
}
