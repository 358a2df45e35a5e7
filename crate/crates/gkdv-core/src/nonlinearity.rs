//! The nonlinearity `f` of `u_t + (u_xx + f(u))_x = 0`.
//!
//! Every supported family is a finite sum `Σ coeff · s^power`. Integer powers
//! are ordinary monomials; any other power `p` is extended oddly as
//! `s|s|^{p-1}`, so `f` stays defined for the small negative values the
//! evolver produces.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::error::bail;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `s^m`.
    PurePower,
    /// `s² − μ s³` with `μ` stored in `mu_hat`.
    Gardner,
    /// `u² + μ̂ ε^{1/(p−2)} u³ + ε u^p` (m = 2) or `u³ + ε u^p` (m = 3).
    EpsilonFamily,
    /// `s^m` plus the explicit `terms`.
    Custom,
}

fn default_p() -> f64 {
    4.0
}

/// JSON config unit: `{"m", "epsilon", "mu_hat", "p", "family"}` and, for the
/// custom family, `"terms": [[coeff, power], ...]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub m: u32,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub mu_hat: f64,
    #[serde(default = "default_p")]
    pub p: f64,
    pub family: Family,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<[f64; 2]>,
}

/// One monomial `coeff · s^power`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub power: f64,
}

fn is_integer(p: f64) -> bool {
    p == p.round() && p.abs() < 64.0
}

/// `d^k/ds^k` of `s^p` (odd extension for non-integer `p`).
fn power_derivative(s: f64, p: f64, k: usize) -> f64 {
    let mut fall = 1.0;
    for j in 0..k {
        fall *= p - j as f64;
    }
    if fall == 0.0 {
        return 0.0;
    }
    let e = p - k as f64;
    if is_integer(p) {
        return fall * s.powi(e as i32);
    }
    if s == 0.0 {
        return if e > 0.0 { 0.0 } else { f64::INFINITY };
    }
    let a = s.abs().powf(e);
    // derivatives of the odd extension alternate between odd and even functions
    if k % 2 == 0 {
        fall * s.signum() * a
    } else {
        fall * a
    }
}

impl Term {
    pub fn eval(&self, s: f64, k: usize) -> f64 {
        self.coeff * power_derivative(s, self.power, k)
    }

    /// `∫_0^s`.
    pub fn primitive(&self, s: f64) -> f64 {
        let q = self.power + 1.0;
        if is_integer(self.power) {
            self.coeff * s.powi(q as i32) / q
        } else {
            self.coeff * s.abs().powf(q) / q
        }
    }
}

impl Nonlinearity {
    pub fn pure_power(m: u32) -> Self {
        Nonlinearity { m, epsilon: 0.0, mu_hat: 0.0, p: default_p(), family: Family::PurePower, terms: Vec::new() }
    }

    /// `s² − μ s³`.
    pub fn gardner(mu: f64) -> Self {
        Nonlinearity { m: 2, epsilon: 0.0, mu_hat: mu, p: default_p(), family: Family::Gardner, terms: Vec::new() }
    }

    pub fn epsilon_family(m: u32, epsilon: f64, p: f64, mu_hat: f64) -> Result<Self> {
        let nl = Nonlinearity { m, epsilon, mu_hat, p, family: Family::EpsilonFamily, terms: Vec::new() };
        nl.validate()?;
        Ok(nl)
    }

    pub fn custom(m: u32, terms: Vec<[f64; 2]>) -> Result<Self> {
        let nl = Nonlinearity { m, epsilon: 0.0, mu_hat: 0.0, p: default_p(), family: Family::Custom, terms };
        nl.validate()?;
        Ok(nl)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m != 2 && self.m != 3 {
            bail!(InvalidArgument, "m must be 2 or 3, got {}", self.m);
        }
        if !(self.epsilon.is_finite() && self.mu_hat.is_finite() && self.p.is_finite()) {
            bail!(InvalidArgument, "non-finite parameter in nonlinearity");
        }
        match self.family {
            Family::Gardner if self.m != 2 => bail!(InvalidArgument, "the Gardner family has m = 2"),
            Family::EpsilonFamily if self.p < 3.0 => bail!(InvalidArgument, "p must be at least 3, got {}", self.p),
            Family::EpsilonFamily if self.m == 3 && self.p <= 3.0 => {
                bail!(InvalidArgument, "for m = 3 the perturbation power must exceed 3")
            }
            Family::Custom => {
                for &[c, p] in &self.terms {
                    if !(c.is_finite() && p.is_finite()) || p <= self.m as f64 {
                        bail!(InvalidArgument, "custom term {c}·s^{p} must have power above m = {}", self.m);
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// `μ(ε) = μ̂ sign(ε)|ε|^{1/(p−2)}` for the quadratic ε-family.
    pub fn mu_of_epsilon(&self) -> f64 {
        if self.epsilon == 0.0 || self.mu_hat == 0.0 {
            return 0.0;
        }
        self.mu_hat * self.epsilon.signum() * self.epsilon.abs().powf(1.0 / (self.p - 2.0))
    }

    /// `f` as a list of monomials; the leading `s^m` comes first.
    pub fn terms(&self) -> Vec<Term> {
        let mut t = alloc::vec![Term { coeff: 1.0, power: self.m as f64 }];
        match self.family {
            Family::PurePower => {}
            Family::Gardner => t.push(Term { coeff: -self.mu_hat, power: 3.0 }),
            Family::EpsilonFamily => {
                if self.m == 2 {
                    let mu = self.mu_of_epsilon();
                    if mu != 0.0 {
                        t.push(Term { coeff: mu, power: 3.0 });
                    }
                }
                if self.epsilon != 0.0 {
                    t.push(Term { coeff: self.epsilon, power: self.p });
                }
            }
            Family::Custom => t.extend(self.terms.iter().map(|&[coeff, power]| Term { coeff, power })),
        }
        // merge equal powers so downstream series code sees each power once
        let mut merged: Vec<Term> = Vec::with_capacity(t.len());
        for term in t {
            match merged.iter_mut().find(|m| m.power == term.power) {
                Some(m) => m.coeff += term.coeff,
                None => merged.push(term),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        merged
    }

    /// `f^{(order)}(s)`.
    pub fn eval(&self, s: f64, order: usize) -> f64 {
        self.terms().iter().map(|t| t.eval(s, order)).sum()
    }

    /// `F(s) = ∫_0^s f`.
    pub fn primitive(&self, s: f64) -> f64 {
        self.terms().iter().map(|t| t.primitive(s)).sum()
    }

    /// True for the integrable cases: `s²`, `s³` and Gardner.
    pub fn is_integrable(&self) -> bool {
        let t = self.terms();
        match (self.m, t.len()) {
            (_, 1) => true,
            (2, 2) => t[1].power == 3.0,
            _ => false,
        }
    }

    /// Cached evaluator; avoids rebuilding the term list in inner loops.
    pub fn evaluator(&self) -> Evaluator {
        let terms = self.terms();
        let small = terms.iter().map(|t| (t.power >= 1.0 && t.power <= 16.0 && is_integer(t.power)).then_some(t.power as u32)).collect();
        Evaluator { terms, small }
    }
}

/// `s^n` by repeated squaring; `libm::pow` is much slower in hot loops.
fn ipow(mut s: f64, mut n: u32) -> f64 {
    let mut acc = 1.0;
    while n > 0 {
        if n & 1 == 1 {
            acc *= s;
        }
        s *= s;
        n >>= 1;
    }
    acc
}

/// Frozen term list of a [`Nonlinearity`].
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluator {
    terms: Vec<Term>,
    /// Small integer powers, for the fast path of `f`.
    small: Vec<Option<u32>>,
}

impl Evaluator {
    pub fn f(&self, s: f64, order: usize) -> f64 {
        if order == 0 {
            return self
                .terms
                .iter()
                .zip(&self.small)
                .map(|(t, n)| match n {
                    Some(n) => t.coeff * ipow(s, *n),
                    None => t.eval(s, 0),
                })
                .sum();
        }
        self.terms.iter().map(|t| t.eval(s, order)).sum()
    }

    pub fn primitive(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.primitive(s)).sum()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }
}
