//! Finite-difference weights on uniform grids.

use alloc::vec;
use alloc::vec::Vec;

/// Fornberg's recursion: weights of the `order`-th derivative at `z` for the
/// given nodes.
pub(crate) fn fornberg(z: f64, nodes: &[f64], order: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; order + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[order]).collect()
}

/// Precomputed stencils of a derivative of fixed order on a grid with `n`
/// points and unit spacing. Interior rows use the centred stencil; the
/// boundary rows use shifted one-sided windows of seven points.
pub(crate) struct Stencils {
    half: usize,
    odd: bool,
    central: Vec<f64>,
    edge_width: usize,
    left: Vec<Vec<f64>>,
}

impl Stencils {
    pub(crate) fn new(order: usize) -> Self {
        // seven-point centred stencils: sixth order for d1, d2 and fourth for d3
        let half = 3;
        let nodes: Vec<f64> = (0..2 * half + 1).map(|i| i as f64 - half as f64).collect();
        let central = fornberg(0.0, &nodes, order);
        let edge_width = (order + 4).max(2 * half + 1);
        let window: Vec<f64> = (0..edge_width).map(|i| i as f64).collect();
        let left = (0..half).map(|i| fornberg(i as f64, &window, order)).collect();
        Stencils { half, odd: order % 2 == 1, central, edge_width, left }
    }

    /// Applies the stencil; `scale` is `h^{-order}`.
    pub(crate) fn apply(&self, v: &[f64], scale: f64) -> Vec<f64> {
        let n = v.len();
        let mut out = vec![0.0; n];
        let h = self.half;
        for i in h..n - h {
            let mut s = 0.0;
            for (k, w) in self.central.iter().enumerate() {
                s += w * v[i + k - h];
            }
            out[i] = s * scale;
        }
        let w = self.edge_width;
        for (i, weights) in self.left.iter().enumerate() {
            let mut s = 0.0;
            for k in 0..w {
                s += weights[k] * v[k];
            }
            out[i] = s * scale;
            // mirrored right edge
            let j = n - 1 - i;
            let mut s = 0.0;
            for k in 0..w {
                s += weights[k] * v[n - 1 - k];
            }
            out[j] = if self.odd { -s * scale } else { s * scale };
        }
        out
    }
}
