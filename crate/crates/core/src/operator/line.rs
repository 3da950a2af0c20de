//! Row-wise description of the 1D operator along one grid line.
//!
//! Every row is stored as its off-diagonal weights plus an optional boundary
//! anchor. The diagonal is implied by consistency: it equals minus the sum of
//! the off-diagonal weights minus the anchor weight. Evaluating rows in the
//! difference form `sum_k w_k (u_k - u_m) + w_g (g - u_m)` avoids the
//! cancellation of `O(1/h^2)` terms that a plain matrix-vector product
//! suffers, which matters once errors reach `1e-12`.

use super::boundary::{EdgeValues, Side};
use super::{BoundaryCondition, SchemeParams};

/// Boundary contribution of a closure row, in units of the stencil scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Anchor {
    pub side: Side,
    pub wg: f64,
    pub wa: f64,
    pub wb: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LineRow {
    pub neighbors: Vec<(usize, f64)>,
    pub anchor: Option<Anchor>,
}

impl LineRow {
    pub fn diagonal(&self) -> f64 {
        let off: f64 = self.neighbors.iter().map(|&(_, w)| w).sum();
        -off - self.anchor.map_or(0.0, |a| a.wg)
    }
}

/// The 1D operator on a line of `2N` nodes, scaled by `scale = 1/(3h^2)`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LineOperator {
    pub rows: Vec<LineRow>,
    pub scale: f64,
    /// `(h/4)^2`, the ghost offset squared used by the derivative terms.
    pub q2: f64,
}

/// Interior stencil of the left node of a cell, offsets -2..=3.
pub(crate) fn left_row(c: f64) -> [f64; 6] {
    [
        -1.0 + c,
        16.0 - 5.0 * c,
        -30.0 + 10.0 * c,
        16.0 - 10.0 * c,
        -1.0 + 5.0 * c,
        -c,
    ]
}

/// Interior stencil of the right node of a cell, offsets -3..=2.
pub(crate) fn right_row(c: f64) -> [f64; 6] {
    [
        -c,
        -1.0 + 5.0 * c,
        16.0 - 10.0 * c,
        -30.0 + 10.0 * c,
        16.0 - 5.0 * c,
        -1.0 + c,
    ]
}

/// Closure row at the boundary node: weights on nodes 0..=3 and the anchor
/// weights `(g, (h/4)^2 u_xx, (h/4)^4 u_xxxx)`.
pub(crate) fn closure_row0(c: f64) -> ([f64; 4], [f64; 3]) {
    (
        [-46.0 + 15.0 * c, 17.0 - 11.0 * c, -1.0 + 5.0 * c, -c],
        [30.0 - 8.0 * c, 7.0 + 4.0 * c, (-65.0 + 76.0 * c) / 12.0],
    )
}

/// Closure row at the second node from the boundary.
pub(crate) fn closure_row1(c: f64) -> ([f64; 4], [f64; 3]) {
    (
        [17.0 - 15.0 * c, -30.0 + 11.0 * c, 16.0 - 5.0 * c, -1.0 + c],
        [-2.0 + 8.0 * c, -1.0 - 4.0 * c, (-1.0 - 76.0 * c) / 12.0],
    )
}

impl LineOperator {
    pub fn new(n_blocks: usize, h: f64, params: SchemeParams, bc: BoundaryCondition) -> Self {
        let c = params.c;
        let n = 2 * n_blocks;
        let mut rows = Vec::with_capacity(n);
        for m in 0..n {
            let (stencil, first) = if m % 2 == 0 {
                (left_row(c), -2i64)
            } else {
                (right_row(c), -3i64)
            };
            let mut neighbors = Vec::with_capacity(5);
            for (i, &w) in stencil.iter().enumerate() {
                let off = first + i as i64;
                if off == 0 {
                    continue;
                }
                let k = (m as i64 + off).rem_euclid(n as i64) as usize;
                neighbors.push((k, w));
            }
            rows.push(LineRow {
                neighbors,
                anchor: None,
            });
        }
        if bc == BoundaryCondition::Dirichlet {
            for (local, closure) in [(0usize, closure_row0(c)), (1, closure_row1(c))] {
                let (w, anchor) = closure;
                for side in [Side::Left, Side::Right] {
                    let map = |k: usize| if side == Side::Left { k } else { n - 1 - k };
                    let neighbors = (0..4)
                        .filter(|&k| k != local)
                        .map(|k| (map(k), w[k]))
                        .collect();
                    rows[map(local)] = LineRow {
                        neighbors,
                        anchor: Some(Anchor {
                            side,
                            wg: anchor[0],
                            wa: anchor[1],
                            wb: anchor[2],
                        }),
                    };
                }
            }
        }
        Self {
            rows,
            scale: 1.0 / (3.0 * h * h),
            q2: h * h / 16.0,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    /// Accumulates `scale * (row . u + boundary terms)` into `out`, reading
    /// `u` and writing `out` with the given offset and stride.
    pub fn apply_affine_into(
        &self,
        u: &[f64],
        offset: usize,
        stride: usize,
        edges: Option<(EdgeValues, EdgeValues)>,
        out: &mut [f64],
    ) {
        for (m, row) in self.rows.iter().enumerate() {
            let um = u[offset + m * stride];
            let mut acc = 0.0;
            for &(k, w) in &row.neighbors {
                acc += w * (u[offset + k * stride] - um);
            }
            if let (Some(a), Some((left, right))) = (row.anchor, edges) {
                let e = if a.side == Side::Left { left } else { right };
                acc += a.wg * (e.g - um) + self.q2 * (a.wa * e.uxx + a.wb * self.q2 * e.uxxxx);
            }
            out[offset + m * stride] += self.scale * acc;
        }
    }

    /// Matrix entries `(row, col, value)` with the same offset/stride map.
    pub fn triplets(&self, offset: usize, stride: usize, out: &mut Vec<(usize, usize, f64)>) {
        for (m, row) in self.rows.iter().enumerate() {
            let r = offset + m * stride;
            out.push((r, r, self.scale * row.diagonal()));
            for &(k, w) in &row.neighbors {
                out.push((r, offset + k * stride, self.scale * w));
            }
        }
    }
}
