//! Block grids, projection of analytic functions and discrete norms.
//!
//! A 1D grid on `[a, b]` has `N` cells of width `h = (b - a)/N` with centers
//! `x_j = a + (j - 1)h + h/2`. Each cell holds two nodes, `x_j - h/4` and
//! `x_j + h/4`, so the `2N` nodes are uniformly spaced by `h/2`. Node `m`
//! of cell `j` (1-based) has index `m = 2(j - 1) + k`, with `k = 0` for the
//! left node.

use num_complex::Complex64;

use crate::error::{BfdError, Result};

/// Smallest admissible number of cells; the stencil reaches two cells away.
pub const MIN_BLOCKS: usize = 3;

/// Discrete norm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `sqrt(w * sum |u_m|^2)` with `w` the node-volume weight.
    L2,
    /// `max |u_m|`.
    Linf,
}

/// Values whose magnitude enters a discrete norm.
pub trait Magnitude: Copy {
    fn magnitude(self) -> f64;
}

impl Magnitude for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Magnitude for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Discrete norm of `u` with node-volume weight `weight` (used by L2 only).
pub fn norm<T: Magnitude>(u: &[T], kind: NormKind, weight: f64) -> f64 {
    match kind {
        NormKind::L2 => (weight * u.iter().map(|v| v.magnitude().powi(2)).sum::<f64>()).sqrt(),
        NormKind::Linf => u.iter().fold(0.0, |m, v| m.max(v.magnitude())),
    }
}

/// One-dimensional two-point block grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid1D {
    n_blocks: usize,
    a: f64,
    b: f64,
    h: f64,
    nodes: Vec<f64>,
}

impl BlockGrid1D {
    /// Builds the grid with `n_blocks` cells on `[a, b]`.
    pub fn new(n_blocks: usize, a: f64, b: f64) -> Result<Self> {
        if n_blocks < MIN_BLOCKS {
            return Err(BfdError::InvalidSize(format!(
                "need at least {MIN_BLOCKS} blocks, got {n_blocks}"
            )));
        }
        if !(b > a) || !a.is_finite() || !b.is_finite() {
            return Err(BfdError::InvalidDomain { a, b });
        }
        let h = (b - a) / n_blocks as f64;
        let nodes = (0..2 * n_blocks)
            .map(|m| {
                let center = a + (m / 2) as f64 * h + 0.5 * h;
                if m % 2 == 0 {
                    center - 0.25 * h
                } else {
                    center + 0.25 * h
                }
            })
            .collect();
        Ok(Self {
            n_blocks,
            a,
            b,
            h,
            nodes,
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Cell width.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Center of cell `j`, 1-based.
    pub fn cell_center(&self, j: usize) -> f64 {
        self.a + (j as f64 - 1.0) * self.h + 0.5 * self.h
    }

    /// Node-volume weight of the L2 norm (the node spacing `h/2`).
    pub fn weight(&self) -> f64 {
        0.5 * self.h
    }

    /// Pointwise evaluation of `f` at every node.
    pub fn project<T, F: Fn(f64) -> T>(&self, f: F) -> Vec<T> {
        self.nodes.iter().map(|&x| f(x)).collect()
    }

    pub fn norm<T: Magnitude>(&self, u: &[T], kind: NormKind) -> f64 {
        norm(u, kind, self.weight())
    }
}

/// Tensor product of two 1D block grids; four nodes per cell.
///
/// Node `(p, q)` (x-node `p`, y-node `q`) has linear index `p * ny_nodes + q`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockGrid2D {
    x: BlockGrid1D,
    y: BlockGrid1D,
}

impl BlockGrid2D {
    pub fn new(x: BlockGrid1D, y: BlockGrid1D) -> Self {
        Self { x, y }
    }

    /// Square grid with `n` cells per direction on `[a, b]^2`.
    pub fn square(n: usize, a: f64, b: f64) -> Result<Self> {
        let g = BlockGrid1D::new(n, a, b)?;
        Ok(Self { x: g.clone(), y: g })
    }

    pub fn x(&self) -> &BlockGrid1D {
        &self.x
    }

    pub fn y(&self) -> &BlockGrid1D {
        &self.y
    }

    pub fn node_count(&self) -> usize {
        self.x.node_count() * self.y.node_count()
    }

    pub fn index(&self, p: usize, q: usize) -> usize {
        p * self.y.node_count() + q
    }

    pub fn node(&self, m: usize) -> (f64, f64) {
        let ny = self.y.node_count();
        (self.x.nodes()[m / ny], self.y.nodes()[m % ny])
    }

    pub fn weight(&self) -> f64 {
        self.x.weight() * self.y.weight()
    }

    pub fn project<T, F: Fn(f64, f64) -> T>(&self, f: F) -> Vec<T> {
        let mut out = Vec::with_capacity(self.node_count());
        for &xp in self.x.nodes() {
            for &yq in self.y.nodes() {
                out.push(f(xp, yq));
            }
        }
        out
    }

    pub fn norm<T: Magnitude>(&self, u: &[T], kind: NormKind) -> f64 {
        norm(u, kind, self.weight())
    }
}
