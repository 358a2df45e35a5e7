//! Banded LU factorization with partial pivoting (the `gbtrf`/`gbtrs` scheme).

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float as _;

use crate::error::bail;
use crate::Result;

/// Square matrix with `kl` sub- and `ku` super-diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    // row-major band: entry (i, j) lives at data[i * width + (j + kl - i)]
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        BandMatrix { n, kl, ku, data: vec![0.0; n * (kl + ku + 1)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku {
            0.0
        } else {
            self.data[i * self.width() + (j + self.kl - i)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside the band");
        let w = self.width();
        self.data[i * w + (j + self.kl - i)] = v;
    }

    pub fn add_diagonal(&mut self, shift: f64) {
        for i in 0..self.n {
            let v = self.get(i, i);
            self.set(i, i, v + shift);
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            *yi = (lo..=hi).map(|j| self.get(i, j) * x[j]).sum();
        }
        y
    }

    pub fn factor(&self) -> Result<BandLu> {
        BandLu::new(self)
    }
}

/// `PA = LU`; `U` has `kl + ku` super-diagonals after pivoting.
#[derive(Debug, Clone, PartialEq)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    // U rows, each with kl + ku + 1 entries starting at the diagonal
    u: Vec<f64>,
    // multipliers, kl per column
    l: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn new(a: &BandMatrix) -> Result<BandLu> {
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        let uw = kl + ku + 1;
        let mut l = vec![0.0; n * kl];
        let mut piv = vec![0usize; n];
        let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        // Rows not yet used as pivots, each stored on columns [k, k + uw) at step k.
        // A row enters the window when it first reaches column k.
        let load = |i: usize, k: usize| -> Vec<f64> {
            let mut r = vec![0.0; uw];
            for j in i.saturating_sub(kl).max(k)..=(i + ku).min(n - 1) {
                r[j - k] = a.get(i, j);
            }
            r
        };
        let mut window: Vec<Vec<f64>> = Vec::with_capacity(kl + 1);
        let mut next_row = 0usize;
        let mut u = vec![0.0; n * uw];
        for k in 0..n {
            while next_row < n && next_row <= k + kl {
                window.push(load(next_row, k));
                next_row += 1;
            }
            // pivot among window rows (all aligned to column k)
            let mut p = 0;
            let mut best = window[0][0].abs();
            for (t, r) in window.iter().enumerate().skip(1) {
                if r[0].abs() > best {
                    best = r[0].abs();
                    p = t;
                }
            }
            if best == 0.0 || best < 1e-300 * scale {
                bail!(NotSolvable, "banded matrix is singular at column {k}");
            }
            window.swap(0, p);
            piv[k] = k + p;
            let pivot_row = window.remove(0);
            let d = pivot_row[0];
            for (t, r) in window.iter_mut().enumerate() {
                let m = r[0] / d;
                l[k * kl + t] = m;
                if m != 0.0 {
                    for j in 1..uw {
                        r[j] -= m * pivot_row[j];
                    }
                }
                // realign to column k + 1
                r.rotate_left(1);
                r[uw - 1] = 0.0;
            }
            u[k * uw..(k + 1) * uw].copy_from_slice(&pivot_row);
        }
        Ok(BandLu { n, kl, ku, u, l, piv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, kl) = (self.n, self.kl);
        let uw = self.kl + self.ku + 1;
        let mut x = b.to_vec();
        // forward: the window is a queue, so the pivot permutation is a swap
        // between position k and k + p in the not-yet-eliminated ordering.
        let mut order: Vec<f64> = Vec::with_capacity(kl + 1);
        let mut next = 0usize;
        let mut y = vec![0.0; n];
        for k in 0..n {
            while next < n && next <= k + kl {
                order.push(x[next]);
                next += 1;
            }
            let p = self.piv[k] - k;
            order.swap(0, p);
            let head = order.remove(0);
            y[k] = head;
            for (t, v) in order.iter_mut().enumerate() {
                *v -= self.l[k * kl + t] * head;
            }
        }
        // back substitution
        for k in (0..n).rev() {
            let row = &self.u[k * uw..(k + 1) * uw];
            let mut s = y[k];
            for j in 1..uw {
                if k + j < n {
                    s -= row[j] * x[k + j];
                }
            }
            x[k] = s / row[0];
        }
        x
    }
}
